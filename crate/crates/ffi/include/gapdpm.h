#ifndef GAPDPM_H
#define GAPDPM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result of every fallible call.
 */
typedef enum GapdpmStatus {
  GAPDPM_STATUS_OK = 0,
  /*
   Null pointer, bad UTF-8 or an out-of-range argument.
   */
  GAPDPM_STATUS_INVALID_ARGUMENT = 1,
  GAPDPM_STATUS_INVALID_DATA = 2,
  GAPDPM_STATUS_INVALID_CONFIG = 3,
  GAPDPM_STATUS_IO = 4,
  GAPDPM_STATUS_NUMERICAL = 5,
  GAPDPM_STATUS_SERIALIZATION = 6,
  /*
   The buffer passed in is too small; the required length was written.
   */
  GAPDPM_STATUS_BUFFER_TOO_SMALL = 7,
  GAPDPM_STATUS_PANIC = 8,
} GapdpmStatus;

/*
 A loaded or simulated gap-time dataset.
 */
typedef struct GapdpmDataset GapdpmDataset;

/*
 Posterior draws of one or more chains.
 */
typedef struct GapdpmFit GapdpmFit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread, or null. Valid until
 the next failing call on the same thread.
 */
const char *gapdpm_last_error(void);

/*
 Library version as a static string.
 */
const char *gapdpm_version(void);

/*
 Frees a string returned by this library. Null is ignored.

 # Safety
 `s` must come from this library and not have been freed.
 */
void gapdpm_string_free(char *s);

/*
 Loads a gap-time CSV. `codec_json` describes the covariate columns as
 JSON (`{"columns": [...]}`) and may be null for no covariates.

 # Safety
 String arguments must be null or nul-terminated; `out` must be writable.
 */
enum GapdpmStatus gapdpm_dataset_load_csv(const char *path,
                                          const char *codec_json,
                                          struct GapdpmDataset **out);

/*
 Simulates scenario `"1"` or `"2"`.

 # Safety
 `scenario` must be nul-terminated; `out` must be writable.
 */
enum GapdpmStatus gapdpm_dataset_simulate(const char *scenario,
                                          uint64_t seed,
                                          struct GapdpmDataset **out);

/*
 Number of subjects; 0 for a null handle.

 # Safety
 `ds` must be null or a live dataset handle.
 */
size_t gapdpm_dataset_n_subjects(const struct GapdpmDataset *ds);

/*
 Total number of gap times, censored ones included; 0 for null.

 # Safety
 `ds` must be null or a live dataset handle.
 */
size_t gapdpm_dataset_total_gaps(const struct GapdpmDataset *ds);

/*
 Writes the dataset in the gap-time CSV format.

 # Safety
 `ds` must be a live handle and `path` nul-terminated.
 */
enum GapdpmStatus gapdpm_dataset_write_csv(const struct GapdpmDataset *ds, const char *path);

/*
 # Safety
 `ds` must be null or a handle not yet freed.
 */
void gapdpm_dataset_free(struct GapdpmDataset *ds);

/*
 Fits the model to `ds`. `spec_toml` holds a `[model]` table and an
 optional `[sampler]` table in the run-config format.

 # Safety
 `ds` must be live, `spec_toml` nul-terminated and `out` writable.
 */
enum GapdpmStatus gapdpm_fit_run(const struct GapdpmDataset *ds,
                                 const char *spec_toml,
                                 struct GapdpmFit **out);

/*
 Reads the chains stored under `dir`.

 # Safety
 `dir` must be nul-terminated and `out` writable.
 */
enum GapdpmStatus gapdpm_fit_load(const char *dir, struct GapdpmFit **out);

/*
 Writes each chain to `dir/chain-<c>`.

 # Safety
 `fit` must be live and `dir` nul-terminated.
 */
enum GapdpmStatus gapdpm_fit_write(const struct GapdpmFit *fit, const char *dir);

/*
 Number of chains; 0 for null.

 # Safety
 `fit` must be null or live.
 */
size_t gapdpm_fit_chains(const struct GapdpmFit *fit);

/*
 Retained draws over all chains; 0 for null.

 # Safety
 `fit` must be null or live.
 */
size_t gapdpm_fit_draws(const struct GapdpmFit *fit);

/*
 Copies the pooled series of a scalar (`sigma`, `tau`, `concentration`,
 `order`, `k`, `last_weight`) into `buf`.

 # Safety
 `fit` live, `name` nul-terminated, `buf` valid for `len` doubles,
 `written` writable.
 */
enum GapdpmStatus gapdpm_fit_scalar(const struct GapdpmFit *fit,
                                    const char *name,
                                    double *buf,
                                    size_t len,
                                    size_t *written);

/*
 Predictive draws of atom coordinate `coordinate` (0 = intercept).

 # Safety
 As for [`gapdpm_fit_scalar`].
 */
enum GapdpmStatus gapdpm_fit_atom_draws(const struct GapdpmFit *fit,
                                        size_t coordinate,
                                        double *buf,
                                        size_t len,
                                        size_t *written);

/*
 Posterior inclusion probability of each lag.

 # Safety
 As for [`gapdpm_fit_scalar`].
 */
enum GapdpmStatus gapdpm_fit_inclusion(const struct GapdpmFit *fit,
                                       double *buf,
                                       size_t len,
                                       size_t *written);

/*
 Posterior probability that the number of occupied clusters equals `k`.

 # Safety
 `fit` live and `out` writable.
 */
enum GapdpmStatus gapdpm_fit_k_probability(const struct GapdpmFit *fit, size_t k, double *out);

/*
 Posterior probability of autoregressive order `p`.

 # Safety
 `fit` live and `out` writable.
 */
enum GapdpmStatus gapdpm_fit_order_probability(const struct GapdpmFit *fit, size_t p, double *out);

/*
 Full posterior summary as a JSON string; free with
 [`gapdpm_string_free`].

 # Safety
 `fit` live and `out` writable.
 */
enum GapdpmStatus gapdpm_fit_summary_json(const struct GapdpmFit *fit, char **out);

/*
 # Safety
 `fit` must be null or a handle not yet freed.
 */
void gapdpm_fit_free(struct GapdpmFit *fit);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GAPDPM_H */
