//! C ABI over `gapdpm`.
//!
//! Datasets and fits are opaque handles created by `gapdpm_*_load`,
//! `gapdpm_*_simulate` or `gapdpm_fit_*` and released with the matching
//! `*_free`. Every fallible call returns a [`GapdpmStatus`]; on failure the
//! message is available from [`gapdpm_last_error`] on the same thread.
//! Strings handed out by the library are freed with [`gapdpm_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use gapdpm::cli::FitSpec;
use gapdpm::data::{self, CovariateCodec};
use gapdpm::{simgen, store, summaries, DrawStore, Error, GapTimeDataset};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GapdpmStatus {
    Ok = 0,
    /// Null pointer, bad UTF-8 or an out-of-range argument.
    InvalidArgument = 1,
    InvalidData = 2,
    InvalidConfig = 3,
    Io = 4,
    Numerical = 5,
    Serialization = 6,
    /// The buffer passed in is too small; the required length was written.
    BufferTooSmall = 7,
    Panic = 8,
}

/// A loaded or simulated gap-time dataset.
pub struct GapdpmDataset(GapTimeDataset);

/// Posterior draws of one or more chains.
pub struct GapdpmFit(Vec<DrawStore>);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn status_of(e: &Error) -> GapdpmStatus {
    match e {
        Error::Io { .. } => GapdpmStatus::Io,
        Error::Numerical { .. } => GapdpmStatus::Numerical,
        Error::Serialization(_) => GapdpmStatus::Serialization,
        Error::InvalidConfig(_) => GapdpmStatus::InvalidConfig,
        Error::Csv(_) | Error::Row { .. } | Error::MissingColumn(_) | Error::InvalidData(_) => {
            GapdpmStatus::InvalidData
        }
    }
}

struct Failure(GapdpmStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(GapdpmStatus::InvalidArgument, msg.into())
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> GapdpmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GapdpmStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            GapdpmStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(invalid(format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("{what} is not UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| invalid(format!("{what} is null")))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| invalid(format!("{what} is null")))
}

/// Copies `values` into `buf` when it holds at least `values.len()` slots.
/// The needed length always goes to `*written`.
unsafe fn fill(values: &[f64], buf: *mut f64, len: usize, written: *mut usize) -> Result<(), Failure> {
    *out_arg(written, "written")? = values.len();
    if values.len() > len {
        return Err(Failure(
            GapdpmStatus::BufferTooSmall,
            format!("buffer holds {len} values, {} needed", values.len()),
        ));
    }
    if !values.is_empty() {
        if buf.is_null() {
            return Err(invalid("buffer is null"));
        }
        ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
    }
    Ok(())
}

/// Message of the last failed call on this thread, or null. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn gapdpm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn gapdpm_version() -> *const c_char {
    static VERSION: std::sync::OnceLock<CString> = std::sync::OnceLock::new();
    VERSION
        .get_or_init(|| CString::new(gapdpm::cli::version()).expect("no interior nul"))
        .as_ptr()
}

/// Frees a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn gapdpm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Loads a gap-time CSV. `codec_json` describes the covariate columns as
/// JSON (`{"columns": [...]}`) and may be null for no covariates.
///
/// # Safety
/// String arguments must be null or nul-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gapdpm_dataset_load_csv(
    path: *const c_char,
    codec_json: *const c_char,
    out: *mut *mut GapdpmDataset,
) -> GapdpmStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let path = PathBuf::from(str_arg(path, "path")?);
        let mut codec = if codec_json.is_null() {
            CovariateCodec::default()
        } else {
            serde_json::from_str(str_arg(codec_json, "codec_json")?)
                .map_err(|e| Failure(GapdpmStatus::InvalidConfig, e.to_string()))?
        };
        codec.validate()?;
        let ds = data::load_csv(&path, &mut codec)?;
        *out = Box::into_raw(Box::new(GapdpmDataset(ds)));
        Ok(())
    })
}

/// Simulates scenario `"1"` or `"2"`.
///
/// # Safety
/// `scenario` must be nul-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gapdpm_dataset_simulate(
    scenario: *const c_char,
    seed: u64,
    out: *mut *mut GapdpmDataset,
) -> GapdpmStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let name = str_arg(scenario, "scenario")?;
        let spec = simgen::named(name, seed)
            .ok_or_else(|| Failure(GapdpmStatus::InvalidConfig, format!("unknown scenario `{name}`")))?;
        *out = Box::into_raw(Box::new(GapdpmDataset(simgen::generate(&spec)?.dataset)));
        Ok(())
    })
}

/// Number of subjects; 0 for a null handle.
///
/// # Safety
/// `ds` must be null or a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn gapdpm_dataset_n_subjects(ds: *const GapdpmDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.0.n_subjects())
}

/// Total number of gap times, censored ones included; 0 for null.
///
/// # Safety
/// `ds` must be null or a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn gapdpm_dataset_total_gaps(ds: *const GapdpmDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.0.total_gaps())
}

/// Writes the dataset in the gap-time CSV format.
///
/// # Safety
/// `ds` must be a live handle and `path` nul-terminated.
#[no_mangle]
pub unsafe extern "C" fn gapdpm_dataset_write_csv(ds: *const GapdpmDataset, path: *const c_char) -> GapdpmStatus {
    guard(|| {
        let ds = ref_arg(ds, "dataset")?;
        data::write_csv_path(&ds.0, str_arg(path, "path")?)?;
        Ok(())
    })
}

/// # Safety
/// `ds` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gapdpm_dataset_free(ds: *mut GapdpmDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// Fits the model to `ds`. `spec_toml` holds a `[model]` table and an
/// optional `[sampler]` table in the run-config format.
///
/// # Safety
/// `ds` must be live, `spec_toml` nul-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gapdpm_fit_run(
    ds: *const GapdpmDataset,
    spec_toml: *const c_char,
    out: *mut *mut GapdpmFit,
) -> GapdpmStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let ds = ref_arg(ds, "dataset")?;
        let spec = FitSpec::from_toml(str_arg(spec_toml, "spec_toml")?)?;
        let stores = spec.run(&ds.0)?;
        *out = Box::into_raw(Box::new(GapdpmFit(stores)));
        Ok(())
    })
}

/// Reads the chains stored under `dir`.
///
/// # Safety
/// `dir` must be nul-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gapdpm_fit_load(dir: *const c_char, out: *mut *mut GapdpmFit) -> GapdpmStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let stores = store::read_stores(str_arg(dir, "dir")?)?;
        *out = Box::into_raw(Box::new(GapdpmFit(stores)));
        Ok(())
    })
}

/// Writes each chain to `dir/chain-<c>`.
///
/// # Safety
/// `fit` must be live and `dir` nul-terminated.
#[no_mangle]
pub unsafe extern "C" fn gapdpm_fit_write(fit: *const GapdpmFit, dir: *const c_char) -> GapdpmStatus {
    guard(|| {
        let fit = ref_arg(fit, "fit")?;
        store::write_stores(&fit.0, str_arg(dir, "dir")?)?;
        Ok(())
    })
}

/// Number of chains; 0 for null.
///
/// # Safety
/// `fit` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn gapdpm_fit_chains(fit: *const GapdpmFit) -> usize {
    fit.as_ref().map_or(0, |f| f.0.len())
}

/// Retained draws over all chains; 0 for null.
///
/// # Safety
/// `fit` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn gapdpm_fit_draws(fit: *const GapdpmFit) -> usize {
    fit.as_ref().map_or(0, |f| f.0.iter().map(|s| s.len()).sum())
}

unsafe fn pooled(fit: *const GapdpmFit) -> Result<DrawStore, Failure> {
    Ok(DrawStore::pooled(&ref_arg(fit, "fit")?.0)?)
}

/// Copies the pooled series of a scalar (`sigma`, `tau`, `concentration`,
/// `order`, `k`, `last_weight`) into `buf`.
///
/// # Safety
/// `fit` live, `name` nul-terminated, `buf` valid for `len` doubles,
/// `written` writable.
#[no_mangle]
pub unsafe extern "C" fn gapdpm_fit_scalar(
    fit: *const GapdpmFit,
    name: *const c_char,
    buf: *mut f64,
    len: usize,
    written: *mut usize,
) -> GapdpmStatus {
    guard(|| {
        let store = pooled(fit)?;
        let name = str_arg(name, "name")?;
        let v = store
            .scalar(name)
            .ok_or_else(|| invalid(format!("unknown scalar `{name}`")))?;
        fill(&v, buf, len, written)
    })
}

/// Predictive draws of atom coordinate `coordinate` (0 = intercept).
///
/// # Safety
/// As for [`gapdpm_fit_scalar`].
#[no_mangle]
pub unsafe extern "C" fn gapdpm_fit_atom_draws(
    fit: *const GapdpmFit,
    coordinate: usize,
    buf: *mut f64,
    len: usize,
    written: *mut usize,
) -> GapdpmStatus {
    guard(|| {
        let d = summaries::predictive_atom_density(&pooled(fit)?, coordinate)?;
        fill(&d.draws, buf, len, written)
    })
}

/// Posterior inclusion probability of each lag.
///
/// # Safety
/// As for [`gapdpm_fit_scalar`].
#[no_mangle]
pub unsafe extern "C" fn gapdpm_fit_inclusion(
    fit: *const GapdpmFit,
    buf: *mut f64,
    len: usize,
    written: *mut usize,
) -> GapdpmStatus {
    guard(|| {
        let v = summaries::inclusion_probabilities(&pooled(fit)?)?;
        fill(&v, buf, len, written)
    })
}

/// Posterior probability that the number of occupied clusters equals `k`.
///
/// # Safety
/// `fit` live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gapdpm_fit_k_probability(fit: *const GapdpmFit, k: usize, out: *mut f64) -> GapdpmStatus {
    guard(|| {
        let h = summaries::k_posterior(&pooled(fit)?)?;
        *out_arg(out, "out")? = h.get(&k).copied().unwrap_or(0.0);
        Ok(())
    })
}

/// Posterior probability of autoregressive order `p`.
///
/// # Safety
/// `fit` live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gapdpm_fit_order_probability(fit: *const GapdpmFit, p: usize, out: *mut f64) -> GapdpmStatus {
    guard(|| {
        let h = summaries::order_posterior(&pooled(fit)?)?;
        *out_arg(out, "out")? = h.get(&p).copied().unwrap_or(0.0);
        Ok(())
    })
}

/// Full posterior summary as a JSON string; free with
/// [`gapdpm_string_free`].
///
/// # Safety
/// `fit` live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gapdpm_fit_summary_json(fit: *const GapdpmFit, out: *mut *mut c_char) -> GapdpmStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let summary = summaries::summarize(&ref_arg(fit, "fit")?.0)?;
        let json = serde_json::to_string(&summary).map_err(|e| Failure(GapdpmStatus::Serialization, e.to_string()))?;
        *out = CString::new(json).map_err(|e| invalid(e.to_string()))?.into_raw();
        Ok(())
    })
}

/// # Safety
/// `fit` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gapdpm_fit_free(fit: *mut GapdpmFit) {
    if !fit.is_null() {
        drop(Box::from_raw(fit));
    }
}
