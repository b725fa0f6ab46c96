//! On-disk draw stores: one directory per chain holding `meta.json` and
//! CSV files (one row per draw for scalars, long format for vectors).
//!
//! Floats are written in shortest round-trip form, so reading a store back
//! reproduces every draw exactly and a fixed seed gives identical bytes.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use csv::{ReaderBuilder, StringRecord, Writer};

use crate::error::{Error, Result};
use crate::model::Atom;
use crate::sampler::{Draw, DrawStore, StoreMeta};

pub const META_FILE: &str = "meta.json";
pub const SCALARS_FILE: &str = "scalars.csv";
pub const BETA_FILE: &str = "beta.csv";
pub const ATOMS_FILE: &str = "atoms.csv";
pub const INCLUSION_FILE: &str = "inclusion.csv";
pub const ALLOCATIONS_FILE: &str = "allocations.csv";

/// Directory name of chain `c` inside a run directory.
pub fn chain_dir_name(chain: usize) -> String {
    format!("chain-{chain}")
}

fn csv_writer(path: &Path) -> Result<Writer<fs::File>> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(Writer::from_writer(file))
}

fn finish(mut w: Writer<fs::File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes `store` into `dir`, creating it if needed.
pub fn write_store(store: &DrawStore, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let meta_path = dir.join(META_FILE);
    let json = serde_json::to_string_pretty(&store.meta).map_err(|e| Error::Serialization(e.to_string()))?;
    let mut f = fs::File::create(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
    writeln!(f, "{json}").map_err(|e| Error::io(&meta_path, e))?;

    let p = dir.join(SCALARS_FILE);
    let mut w = csv_writer(&p)?;
    let mut header = vec!["iteration".to_string()];
    header.extend(DrawStore::SCALARS.iter().map(|s| s.to_string()));
    w.write_record(&header)?;
    for d in &store.draws {
        w.write_record([
            d.iteration.to_string(),
            d.sigma.to_string(),
            d.tau.to_string(),
            d.concentration.to_string(),
            d.order.to_string(),
            d.k.to_string(),
            d.last_weight.to_string(),
        ])?;
    }
    finish(w, &p)?;

    let p = dir.join(BETA_FILE);
    let mut w = csv_writer(&p)?;
    w.write_record(["iteration", "gap_index", "covariate", "value"])?;
    for d in &store.draws {
        for (j, row) in d.beta.iter().enumerate() {
            for (r, v) in row.iter().enumerate() {
                w.write_record([
                    d.iteration.to_string(),
                    (j + 1).to_string(),
                    store.meta.covariate_names[r].clone(),
                    v.to_string(),
                ])?;
            }
        }
    }
    finish(w, &p)?;

    let p = dir.join(ATOMS_FILE);
    let mut w = csv_writer(&p)?;
    let slots = store.meta.lag_slots;
    let mut header = vec!["iteration".to_string(), "m0".to_string()];
    header.extend((1..=slots).map(|l| format!("m{l}")));
    header.extend((1..=slots).map(|l| format!("included{l}")));
    w.write_record(&header)?;
    for d in &store.draws {
        let a = &d.predictive_atom;
        let mut rec = vec![d.iteration.to_string(), a.m0.to_string()];
        rec.extend(a.lags.iter().map(|v| v.to_string()));
        rec.extend(a.included.iter().map(|&b| u8::from(b).to_string()));
        w.write_record(&rec)?;
    }
    finish(w, &p)?;

    let p = dir.join(INCLUSION_FILE);
    let mut w = csv_writer(&p)?;
    w.write_record(["iteration", "lag", "probability"])?;
    for d in &store.draws {
        for (l, v) in d.inclusion.iter().enumerate() {
            w.write_record([d.iteration.to_string(), (l + 1).to_string(), v.to_string()])?;
        }
    }
    finish(w, &p)?;

    let p = dir.join(ALLOCATIONS_FILE);
    let mut w = csv_writer(&p)?;
    w.write_record(["iteration", "subject_index", "cluster"])?;
    for d in &store.draws {
        for (i, z) in d.allocations.iter().enumerate() {
            w.write_record([d.iteration.to_string(), i.to_string(), z.to_string()])?;
        }
    }
    finish(w, &p)
}

/// Writes each chain under `root/chain-<c>`.
pub fn write_stores(stores: &[DrawStore], root: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    stores
        .iter()
        .map(|s| {
            let dir = root.as_ref().join(chain_dir_name(s.meta.chain));
            write_store(s, &dir)?;
            Ok(dir)
        })
        .collect()
}

fn read_rows(path: &Path) -> Result<Vec<StringRecord>> {
    let mut r = ReaderBuilder::new().from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Serialization(format!("{}: {other:?}", path.display())),
    })?;
    r.records().map(|rec| rec.map_err(Error::from)).collect()
}

fn field<T: std::str::FromStr>(rec: &StringRecord, k: usize, path: &Path) -> Result<T> {
    rec.get(k)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Serialization(format!("{}: bad field {k} in {rec:?}", path.display())))
}

/// Reads a store written by [`write_store`].
pub fn read_store(dir: impl AsRef<Path>) -> Result<DrawStore> {
    let dir = dir.as_ref();
    let meta_path = dir.join(META_FILE);
    let text = fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
    let meta: StoreMeta =
        serde_json::from_str(&text).map_err(|e| Error::Serialization(format!("{}: {e}", meta_path.display())))?;
    let slots = meta.lag_slots;
    let q = meta.q;
    let beta_rows = if meta.shared_beta { 1 } else { meta.max_gaps };

    let p = dir.join(SCALARS_FILE);
    let mut draws = Vec::new();
    for rec in read_rows(&p)? {
        draws.push(Draw {
            iteration: field(&rec, 0, &p)?,
            sigma: field(&rec, 1, &p)?,
            tau: field(&rec, 2, &p)?,
            concentration: field(&rec, 3, &p)?,
            order: field(&rec, 4, &p)?,
            k: field(&rec, 5, &p)?,
            last_weight: field(&rec, 6, &p)?,
            beta: vec![vec![0.0; q]; beta_rows],
            predictive_atom: Atom {
                m0: 0.0,
                lags: vec![0.0; slots],
                included: vec![false; slots],
            },
            inclusion: vec![0.0; slots],
            allocations: vec![0; meta.n_subjects],
        });
    }
    let n = draws.len();
    let check_len = |rows: usize, per: usize, path: &Path| -> Result<()> {
        if rows == n * per {
            Ok(())
        } else {
            Err(Error::Serialization(format!(
                "{}: expected {} rows, found {rows}",
                path.display(),
                n * per
            )))
        }
    };

    let p = dir.join(BETA_FILE);
    let rows = read_rows(&p)?;
    check_len(rows.len(), beta_rows * q, &p)?;
    for (k, rec) in rows.iter().enumerate() {
        let d = &mut draws[k / (beta_rows * q).max(1)];
        let j: usize = field(rec, 1, &p)?;
        let r = k % q;
        d.beta[j - 1][r] = field(rec, 3, &p)?;
    }

    let p = dir.join(ATOMS_FILE);
    let rows = read_rows(&p)?;
    check_len(rows.len(), 1, &p)?;
    for (d, rec) in draws.iter_mut().zip(&rows) {
        d.predictive_atom.m0 = field(rec, 1, &p)?;
        for l in 0..slots {
            d.predictive_atom.lags[l] = field(rec, 2 + l, &p)?;
            d.predictive_atom.included[l] = field::<u8>(rec, 2 + slots + l, &p)? == 1;
        }
    }

    let p = dir.join(INCLUSION_FILE);
    let rows = read_rows(&p)?;
    check_len(rows.len(), slots, &p)?;
    for (k, rec) in rows.iter().enumerate() {
        draws[k / slots].inclusion[k % slots] = field(rec, 2, &p)?;
    }

    let p = dir.join(ALLOCATIONS_FILE);
    let rows = read_rows(&p)?;
    check_len(rows.len(), meta.n_subjects, &p)?;
    for (k, rec) in rows.iter().enumerate() {
        draws[k / meta.n_subjects].allocations[k % meta.n_subjects] = field(rec, 2, &p)?;
    }
    Ok(DrawStore { meta, draws })
}

/// Reads every chain under a run directory, or the single store at `root`
/// itself. Errors when none is found.
pub fn read_stores(root: impl AsRef<Path>) -> Result<Vec<DrawStore>> {
    let root = root.as_ref();
    if root.join(META_FILE).is_file() {
        return Ok(vec![read_store(root)?]);
    }
    let entries = fs::read_dir(root).map_err(|e| Error::io(root, e))?;
    let mut dirs: Vec<(usize, PathBuf)> = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(root, e))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if let Some(c) = name.strip_prefix("chain-").and_then(|c| c.parse().ok()) {
            if entry.path().join(META_FILE).is_file() {
                dirs.push((c, entry.path()));
            }
        }
    }
    if dirs.is_empty() {
        return Err(Error::InvalidData(format!("no draw store found in {}", root.display())));
    }
    dirs.sort();
    dirs.into_iter().map(|(_, d)| read_store(d)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DependenceSpec, Hyperparameters, ModelConfig};
    use crate::sampler::{run_chains, BlockTuning, SamplerConfig};
    use crate::simgen;

    fn stores() -> Vec<DrawStore> {
        let data = simgen::generate(&simgen::scenario2(1)).unwrap().dataset;
        let model = ModelConfig::new(DependenceSpec::SpikeSlabAr { max_order: 2 }, Hyperparameters::default());
        let cfg = SamplerConfig {
            iterations: 30,
            burn_in: 10,
            thin: 4,
            seed: 2,
            chains: 2,
            tuning: BlockTuning::default(),
        };
        run_chains(&data, &model, &cfg).unwrap()
    }

    #[test]
    fn round_trip_is_exact() {
        let s = stores();
        let dir = tempfile::tempdir().unwrap();
        let written = write_stores(&s, dir.path()).unwrap();
        assert_eq!(written.len(), 2);
        assert_eq!(read_stores(dir.path()).unwrap(), s);
        assert_eq!(read_store(&written[1]).unwrap(), s[1]);
    }

    #[test]
    fn empty_directory_rejected() {
        let dir = tempfile::tempdir().unwrap();
        assert!(read_stores(dir.path()).is_err());
        assert!(read_store(dir.path()).is_err());
    }
}
