//! Run configuration and the `simulate | fit | summarize | predict |
//! diagnose` commands behind the `gapdpm` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::data::{self, ColumnSpec, CovariateCodec, GapTimeDataset};
use crate::error::{Error, Result};
use crate::model::ModelConfig;
use crate::sampler::{self, BlockTuning, DrawStore, SamplerConfig};
use crate::simgen;
use crate::store;
use crate::summaries::{self, PosteriorSummary, ScalarDiagnostics};

/// Environment variable naming the default output root.
pub const OUT_ENV: &str = "GAPDPM_OUT";
pub const DEFAULT_OUT_ROOT: &str = "gapdpm-out";

pub const MANIFEST_FILE: &str = "manifest.json";
pub const CONFIG_COPY: &str = "config.toml";
pub const CODEC_FILE: &str = "codec.json";
pub const SUMMARY_FILE: &str = "summary.json";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.json";
pub const PREDICTIVE_FILE: &str = "predictive.csv";
pub const PREDICTIVE_SUMMARY_FILE: &str = "predictive_summary.csv";

/// Build version, `git describe` output when available.
pub fn version() -> &'static str {
    env!("GAPDPM_VERSION")
}

/// `$GAPDPM_OUT`, or `gapdpm-out` in the working directory.
pub fn output_root() -> PathBuf {
    std::env::var_os(OUT_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_ROOT))
}

/// Where the data come from: a CSV file or a named simulation scenario.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    pub path: Option<PathBuf>,
    pub scenario: Option<String>,
    /// Simulation seed; defaults to the sampler seed.
    pub seed: Option<u64>,
    #[serde(default)]
    pub covariates: Vec<ColumnSpec>,
}

/// Sampler settings; unset run-length fields fall back to desk or paper
/// scale.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerSection {
    pub iterations: Option<usize>,
    pub burn_in: Option<usize>,
    pub thin: Option<usize>,
    pub seed: Option<u64>,
    pub chains: Option<usize>,
    #[serde(default)]
    pub tuning: BlockTuning,
}

impl SamplerSection {
    /// Concrete settings, with desk-scale defaults, seed 0 and one chain
    /// for unset fields.
    pub fn to_config(&self) -> SamplerConfig {
        let base = SamplerConfig::desk_scale(0);
        SamplerConfig {
            iterations: self.iterations.unwrap_or(base.iterations),
            burn_in: self.burn_in.unwrap_or(base.burn_in),
            thin: self.thin.unwrap_or(base.thin),
            seed: self.seed.unwrap_or(0),
            chains: self.chains.unwrap_or(1),
            tuning: self.tuning,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub data: DataSection,
    pub model: ModelConfig,
    #[serde(default)]
    pub sampler: SamplerSection,
    pub output: Option<PathBuf>,
}

/// Model and sampler sections alone, for fitting a dataset already in
/// memory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSpec {
    pub model: ModelConfig,
    #[serde(default)]
    pub sampler: SamplerSection,
}

impl FitSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    /// Runs every chain on `dataset`. Unset run lengths take desk-scale
    /// defaults.
    pub fn run(&self, dataset: &GapTimeDataset) -> Result<Vec<DrawStore>> {
        self.model.validate()?;
        let cfg = self.sampler.to_config();
        cfg.validate()?;
        sampler::run_chains(dataset, &self.model, &cfg)
    }
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub chains: Option<usize>,
    pub out: Option<PathBuf>,
    pub paper_scale: bool,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    /// Parses a config file; a relative data path is taken relative to the
    /// file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text)?;
        if let (Some(p), Some(dir)) = (&cfg.data.path, path.parent()) {
            let joined = if p.is_relative() { dir.join(p) } else { p.clone() };
            cfg.data.path = Some(fs::canonicalize(&joined).unwrap_or(joined));
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Serialization(e.to_string()))
    }

    /// Folds command-line overrides and the run-length defaults into the
    /// config, so the result reproduces the run on its own.
    pub fn resolve(mut self, ov: &Overrides) -> Self {
        let base = if ov.paper_scale {
            SamplerConfig::paper_scale(0)
        } else {
            SamplerConfig::desk_scale(0)
        };
        let s = &mut self.sampler;
        s.iterations.get_or_insert(base.iterations);
        s.burn_in.get_or_insert(base.burn_in);
        s.thin.get_or_insert(base.thin);
        if let Some(seed) = ov.seed {
            s.seed = Some(seed);
        }
        s.seed.get_or_insert(0);
        if let Some(c) = ov.chains {
            s.chains = Some(c);
        }
        s.chains.get_or_insert(1);
        if self.data.scenario.is_some() && self.data.seed.is_none() {
            self.data.seed = s.seed;
        }
        if let Some(out) = &ov.out {
            self.output = Some(out.clone());
        }
        self
    }

    pub fn sampler_config(&self) -> SamplerConfig {
        self.sampler.to_config()
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.data.path, &self.data.scenario) {
            (Some(p), None) => {
                if !p.is_file() {
                    return Err(Error::InvalidConfig(format!(
                        "data file {} does not exist",
                        p.display()
                    )));
                }
            }
            (None, Some(name)) => {
                if simgen::named(name, 0).is_none() {
                    return Err(Error::InvalidConfig(format!("unknown scenario `{name}`")));
                }
                if !self.data.covariates.is_empty() {
                    return Err(Error::InvalidConfig("simulated scenarios carry no covariates".into()));
                }
            }
            _ => {
                return Err(Error::InvalidConfig(
                    "[data] needs exactly one of `path` or `scenario`".into(),
                ))
            }
        }
        CovariateCodec::new(self.data.covariates.clone()).validate()?;
        self.model.validate()?;
        self.sampler_config().validate()
    }

    /// Loads or simulates the dataset. The returned codec carries the
    /// fitted standardization.
    pub fn load_data(&self) -> Result<(GapTimeDataset, CovariateCodec)> {
        let mut codec = CovariateCodec::new(self.data.covariates.clone());
        let ds = match (&self.data.path, &self.data.scenario) {
            (Some(p), _) => data::load_csv(p, &mut codec)?,
            (None, Some(name)) => {
                let seed = self.data.seed.or(self.sampler.seed).unwrap_or(0);
                let spec = simgen::named(name, seed)
                    .ok_or_else(|| Error::InvalidConfig(format!("unknown scenario `{name}`")))?;
                simgen::generate(&spec)?.dataset
            }
            (None, None) => return Err(Error::InvalidConfig("no data source".into())),
        };
        Ok((ds, codec))
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output.clone().unwrap_or_else(|| output_root().join("fit"))
    }
}

/// Provenance record written next to every command's outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub seed: Option<u64>,
    pub config_sha256: Option<String>,
    pub spec_sha256: Option<String>,
    pub wall_time_seconds: f64,
    pub outputs: Vec<String>,
}

impl Manifest {
    fn new(command: &str) -> Self {
        Manifest {
            command: command.to_string(),
            version: version().to_string(),
            seed: None,
            config_sha256: None,
            spec_sha256: None,
            wall_time_seconds: 0.0,
            outputs: Vec::new(),
        }
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(MANIFEST_FILE);
        write_json(&path, self)?;
        Ok(path)
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Serialization(e.to_string()))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Serialization(e.to_string()))?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Simulates a named scenario into `out/data.csv` (default
/// `<root>/scenario<name>-seed<seed>`). Returns the CSV path.
pub fn cmd_simulate(scenario: &str, seed: u64, out: Option<&Path>) -> Result<PathBuf> {
    let start = Instant::now();
    let spec = simgen::named(scenario, seed)
        .ok_or_else(|| Error::InvalidConfig(format!("unknown scenario `{scenario}` (expected 1 or 2)")))?;
    let dir = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| output_root().join(format!("scenario{scenario}-seed{seed}")));
    create_dir(&dir)?;
    let sim = simgen::generate(&spec)?;
    let csv = dir.join("data.csv");
    data::write_csv_path(&sim.dataset, &csv)?;
    let mut m = Manifest::new("simulate");
    m.seed = Some(seed);
    m.spec_sha256 = Some(spec.hash());
    m.outputs = vec![file_name(&csv)];
    m.wall_time_seconds = start.elapsed().as_secs_f64();
    m.write(&dir)?;
    Ok(csv)
}

/// Result of a fit: output directory and the chains.
#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub dir: PathBuf,
    pub stores: Vec<DrawStore>,
    pub summary: PosteriorSummary,
}

/// Fits the model described by the config file.
pub fn cmd_fit(config_path: &Path, overrides: &Overrides) -> Result<FitOutcome> {
    fit(RunConfig::load(config_path)?, overrides)
}

/// Fits a parsed config: writes one store per chain, the resolved config,
/// the covariate codec, a manifest and the posterior summary files.
pub fn fit(config: RunConfig, overrides: &Overrides) -> Result<FitOutcome> {
    let start = Instant::now();
    let config = config.resolve(overrides);
    config.validate()?;
    let (dataset, codec) = config.load_data()?;
    let sampler_cfg = config.sampler_config();
    let dir = config.output_dir();
    create_dir(&dir)?;
    let text = config.to_toml()?;
    fs::write(dir.join(CONFIG_COPY), &text).map_err(|e| Error::io(dir.join(CONFIG_COPY), e))?;
    write_json(&dir.join(CODEC_FILE), &codec)?;

    let stores = sampler::run_chains(&dataset, &config.model, &sampler_cfg)?;
    let chain_dirs = store::write_stores(&stores, &dir)?;
    let summary = write_summary(&stores, &dir)?;

    let mut m = Manifest::new("fit");
    m.seed = Some(sampler_cfg.seed);
    m.config_sha256 = Some(sha256_hex(text.as_bytes()));
    m.outputs = [CONFIG_COPY.to_string(), CODEC_FILE.to_string()]
        .into_iter()
        .chain(chain_dirs.iter().map(|d| file_name(d)))
        .chain(SUMMARY_OUTPUTS.iter().map(|s| s.to_string()))
        .collect();
    m.wall_time_seconds = start.elapsed().as_secs_f64();
    m.write(&dir)?;
    Ok(FitOutcome { dir, stores, summary })
}

const SUMMARY_OUTPUTS: [&str; 7] = [
    SUMMARY_FILE,
    "k_histogram.csv",
    "order_histogram.csv",
    "inclusion_probabilities.csv",
    "atom_draws.csv",
    "atom_density.csv",
    "beta_intervals.csv",
];

fn write_rows<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Serialization(format!("{}: {e}", path.display())))?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes `summary.json` and the CSV tables for `stores` into `dir`.
pub fn write_summary(stores: &[DrawStore], dir: &Path) -> Result<PosteriorSummary> {
    create_dir(dir)?;
    let summary = summaries::summarize(stores)?;
    let pooled = DrawStore::pooled(stores)?;
    write_json(&dir.join(SUMMARY_FILE), &summary)?;
    write_rows(
        &dir.join("k_histogram.csv"),
        &["k", "probability"],
        summary.k_histogram.iter().map(|(k, p)| [k.to_string(), p.to_string()]),
    )?;
    write_rows(
        &dir.join("order_histogram.csv"),
        &["order", "probability"],
        summary
            .order_histogram
            .iter()
            .map(|(k, p)| [k.to_string(), p.to_string()]),
    )?;
    write_rows(
        &dir.join("inclusion_probabilities.csv"),
        &["lag", "probability"],
        summary
            .inclusion
            .iter()
            .enumerate()
            .map(|(l, p)| [(l + 1).to_string(), p.to_string()]),
    )?;
    let slots = pooled.meta.lag_slots;
    let mut header = vec!["draw".to_string(), "m0".to_string()];
    header.extend((1..=slots).map(|l| format!("m{l}")));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    write_rows(
        &dir.join("atom_draws.csv"),
        &header_refs,
        pooled.draws.iter().enumerate().map(|(k, d)| {
            std::iter::once(k.to_string())
                .chain(std::iter::once(d.predictive_atom.m0.to_string()))
                .chain(d.predictive_atom.lags.iter().map(|v| v.to_string()))
                .collect::<Vec<_>>()
        }),
    )?;
    let mut density_rows = Vec::new();
    for c in 0..=slots {
        let d = summaries::predictive_atom_density(&pooled, c)?;
        for (x, y) in d.grid.iter().zip(&d.density) {
            density_rows.push([c.to_string(), x.to_string(), y.to_string()]);
        }
    }
    write_rows(
        &dir.join("atom_density.csv"),
        &["coordinate", "x", "density"],
        density_rows,
    )?;
    write_rows(
        &dir.join("beta_intervals.csv"),
        &["covariate", "gap_index", "lower", "median", "upper"],
        summary.beta.iter().map(|b| {
            [
                b.covariate.clone(),
                b.gap_index.to_string(),
                b.lower.to_string(),
                b.median.to_string(),
                b.upper.to_string(),
            ]
        }),
    )?;
    Ok(summary)
}

/// Summarizes the store(s) under `store_dir` into `out` (default: the store
/// directory).
pub fn cmd_summarize(store_dir: &Path, out: Option<&Path>) -> Result<PosteriorSummary> {
    let start = Instant::now();
    let stores = store::read_stores(store_dir)?;
    let dir = out.unwrap_or(store_dir);
    let summary = write_summary(&stores, dir)?;
    let mut m = Manifest::new("summarize");
    m.seed = stores.first().map(|s| s.meta.seed);
    m.outputs = SUMMARY_OUTPUTS.iter().map(|s| s.to_string()).collect();
    m.wall_time_seconds = start.elapsed().as_secs_f64();
    if out.is_some() {
        m.write(dir)?;
    }
    Ok(summary)
}

/// Covariate profile for a hypothetical new subject.
#[derive(Debug, Clone, PartialEq)]
pub enum ProfileSource {
    /// No covariates in the model.
    None,
    /// CSV whose header lists the encoded covariate names, with one row
    /// used for every gap or one row per gap.
    File(PathBuf),
    /// Empirical mode of a data file, encoded with the fit's codec.
    ModeOf(PathBuf),
}

fn read_profile(path: &Path, names: &[String], horizon: usize) -> Result<Vec<Vec<f64>>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::Serialization(format!("{}: {e}", path.display())))?;
    let header = r.headers()?.clone();
    let cols: Vec<usize> = names
        .iter()
        .map(|n| {
            header
                .iter()
                .position(|h| h == n)
                .ok_or_else(|| Error::MissingColumn(n.clone()))
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = cols
            .iter()
            .map(|&c| {
                rec.get(c)
                    .and_then(|v| v.trim().parse::<f64>().ok())
                    .ok_or_else(|| Error::row(k + 2, "covariate value is not a number"))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    match rows.len() {
        1 => Ok(vec![rows[0].clone(); horizon]),
        n if n >= horizon => Ok(rows),
        n => Err(Error::InvalidData(format!("profile has {n} rows; need 1 or {horizon}"))),
    }
}

fn run_root(store_dir: &Path) -> PathBuf {
    if store_dir.join(store::META_FILE).is_file() {
        store_dir.parent().map(Path::to_path_buf).unwrap_or_default()
    } else {
        store_dir.to_path_buf()
    }
}

/// Builds the covariate profile for [`cmd_predict`].
pub fn resolve_profile(
    store_dir: &Path,
    meta_q: usize,
    names: &[String],
    source: &ProfileSource,
    horizon: usize,
) -> Result<Vec<Vec<f64>>> {
    match source {
        ProfileSource::None if meta_q == 0 => Ok(vec![Vec::new(); horizon]),
        ProfileSource::None => Err(Error::InvalidConfig(format!(
            "the model has {meta_q} covariates; pass a profile"
        ))),
        ProfileSource::File(p) => read_profile(p, names, horizon),
        ProfileSource::ModeOf(p) => {
            let codec_path = run_root(store_dir).join(CODEC_FILE);
            let text = fs::read_to_string(&codec_path).map_err(|e| Error::io(&codec_path, e))?;
            let mut codec: CovariateCodec =
                serde_json::from_str(&text).map_err(|e| Error::Serialization(e.to_string()))?;
            let ds = data::load_csv(p, &mut codec)?;
            Ok(data::empirical_mode_profile(&ds, &codec, horizon))
        }
    }
}

/// Predictive log-gap trajectories of a new subject, one per retained draw
/// pooled over chains. Writes `predictive.csv` (long format) and
/// `predictive_summary.csv`.
pub fn cmd_predict(
    store_dir: &Path,
    profile: &ProfileSource,
    horizon: usize,
    seed: u64,
    out: Option<&Path>,
) -> Result<Vec<Vec<f64>>> {
    let start = Instant::now();
    let stores = store::read_stores(store_dir)?;
    let pooled = DrawStore::pooled(&stores)?;
    let x = resolve_profile(store_dir, pooled.meta.q, &pooled.meta.covariate_names, profile, horizon)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let paths = summaries::predictive_gap_trajectory(&pooled, &x, horizon, &mut rng)?;
    let dir = out.unwrap_or(store_dir);
    create_dir(dir)?;
    write_rows(
        &dir.join(PREDICTIVE_FILE),
        &["draw", "gap_index", "log_gap"],
        paths.iter().enumerate().flat_map(|(k, p)| {
            p.iter()
                .enumerate()
                .map(move |(j, y)| [k.to_string(), (j + 1).to_string(), y.to_string()])
        }),
    )?;
    write_rows(
        &dir.join(PREDICTIVE_SUMMARY_FILE),
        &["gap_index", "mean", "median", "q05", "q95", "skewness"],
        summaries::summarize_trajectories(&paths).iter().map(|g| {
            [
                g.gap_index.to_string(),
                g.summary.mean.to_string(),
                g.summary.median.to_string(),
                g.summary.q05.to_string(),
                g.summary.q95.to_string(),
                g.skewness.map_or_else(String::new, |s| s.to_string()),
            ]
        }),
    )?;
    if out.is_some() {
        let mut m = Manifest::new("predict");
        m.seed = Some(seed);
        m.outputs = vec![PREDICTIVE_FILE.into(), PREDICTIVE_SUMMARY_FILE.into()];
        m.wall_time_seconds = start.elapsed().as_secs_f64();
        m.write(dir)?;
    }
    Ok(paths)
}

/// Convergence diagnostics for the chains under `store_dir`, written to
/// `diagnostics.json`.
pub fn cmd_diagnose(store_dir: &Path, out: Option<&Path>) -> Result<Vec<ScalarDiagnostics>> {
    let stores = store::read_stores(store_dir)?;
    let diag = summaries::diagnostics(&stores)?;
    let dir = out.unwrap_or(store_dir);
    create_dir(dir)?;
    write_json(&dir.join(DIAGNOSTICS_FILE), &diag)?;
    Ok(diag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ConcentrationPrior, DependenceSpec};

    const CONFIG: &str = r#"
[data]
path = "data.csv"
covariates = [
  { name = "age", kind = "numeric", standardize = true },
  { name = "ward", kind = "categorical", levels = ["medical", "surgery"], baseline = "medical" },
]

[model.dependence]
kind = "random_order"
max_order = 3

[model.hyper]
truncation = 12
concentration = { kind = "uniform", upper = 5.0 }

[sampler]
seed = 4
"#;

    #[test]
    fn partial_sections_take_defaults() {
        let cfg = RunConfig::from_toml(CONFIG).unwrap();
        assert_eq!(cfg.model.dependence, DependenceSpec::RandomOrder { max_order: 3 });
        assert_eq!(cfg.model.hyper.truncation, 12);
        assert_eq!(
            cfg.model.hyper.concentration,
            ConcentrationPrior::Uniform { upper: 5.0 }
        );
        assert_eq!(cfg.model.hyper.intercept_var, 10.0);
        assert_eq!(cfg.data.covariates.len(), 2);
        assert_eq!(cfg.sampler.tuning, BlockTuning::default());
    }

    #[test]
    fn resolve_fixes_every_default() {
        let cfg = RunConfig::from_toml(CONFIG).unwrap();
        let ov = Overrides {
            chains: Some(3),
            ..Overrides::default()
        };
        let r = cfg.clone().resolve(&ov);
        assert_eq!(r.sampler.iterations, Some(20_000));
        assert_eq!(r.sampler.burn_in, Some(2_000));
        assert_eq!(r.sampler.thin, Some(10));
        assert_eq!(r.sampler.seed, Some(4));
        assert_eq!(r.sampler.chains, Some(3));
        let long = cfg.resolve(&Overrides {
            paper_scale: true,
            seed: Some(9),
            ..Overrides::default()
        });
        assert_eq!(long.sampler_config().retained(), 5000);
        assert_eq!(long.sampler.seed, Some(9));
        let again = RunConfig::from_toml(&long.to_toml().unwrap()).unwrap();
        assert_eq!(again, long);
    }

    #[test]
    fn unknown_keys_and_bad_sources_rejected() {
        assert!(RunConfig::from_toml(
            "[data]\nscenario = \"1\"\nextra = 2\n[model.dependence]\nkind = \"fixed_ar\"\norder = 1\n"
        )
        .is_err());
        let both = RunConfig::from_toml(
            "[data]\nscenario = \"1\"\npath = \"x.csv\"\n[model.dependence]\nkind = \"fixed_ar\"\norder = 1\n",
        )
        .unwrap();
        assert!(matches!(both.validate(), Err(Error::InvalidConfig(_))));
        let unknown =
            RunConfig::from_toml("[data]\nscenario = \"9\"\n[model.dependence]\nkind = \"fixed_ar\"\norder = 1\n")
                .unwrap();
        assert_eq!(unknown.validate().unwrap_err().exit_code(), 2);
    }

    #[test]
    fn hash_is_hex_sha256() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
