//! Seeded generators for mixtures of autoregressive log-gap processes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::data::GapTimeDataset;
use crate::dist::sample_normal;
use crate::error::{Error, Result};

/// A block of subjects sharing one autoregression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub count: usize,
    pub intercept: f64,
    /// Lag coefficients, lag 1 first.
    pub lags: Vec<f64>,
    pub innovation_sd: f64,
    /// SD of the first log gap (mean is `intercept`).
    pub initial_sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub groups: Vec<GroupSpec>,
    pub n_per_subject: usize,
    pub seed: u64,
    /// Probability that a subject's last gap is replaced by a censoring
    /// value below it. Zero for the built-in scenarios.
    #[serde(default)]
    pub censor_prob: f64,
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        if self.groups.is_empty() || self.n_per_subject == 0 {
            return Err(Error::InvalidConfig("scenario needs groups and gaps".into()));
        }
        for g in &self.groups {
            if g.count == 0 {
                return Err(Error::InvalidConfig("group counts must be positive".into()));
            }
            if !(g.innovation_sd > 0.0 && g.initial_sd > 0.0) {
                return Err(Error::InvalidConfig("group SDs must be positive".into()));
            }
        }
        if !(0.0..=1.0).contains(&self.censor_prob) {
            return Err(Error::InvalidConfig("censor_prob must lie in [0, 1]".into()));
        }
        Ok(())
    }

    pub fn n_subjects(&self) -> usize {
        self.groups.iter().map(|g| g.count).sum()
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("spec serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

/// 300 subjects × 10 gaps: white noise, AR(2) with lags (1, 0.7), and AR(3)
/// with lags (1, 0.7, 0.4).
pub fn scenario1(seed: u64) -> ScenarioSpec {
    ScenarioSpec {
        groups: vec![
            GroupSpec {
                count: 100,
                intercept: 0.0,
                lags: vec![],
                innovation_sd: 1.2,
                initial_sd: 1.2,
            },
            GroupSpec {
                count: 100,
                intercept: 0.0,
                lags: vec![1.0, 0.7],
                innovation_sd: 1.5,
                initial_sd: 1.5,
            },
            GroupSpec {
                count: 100,
                intercept: 0.0,
                lags: vec![1.0, 0.7, 0.4],
                innovation_sd: 0.9,
                initial_sd: 0.9,
            },
        ],
        n_per_subject: 10,
        seed,
        censor_prob: 0.0,
    }
}

/// 200 subjects × 10 gaps: AR(2) with lags (0.9, 0.7) and with lags
/// (−0.9, −0.7).
pub fn scenario2(seed: u64) -> ScenarioSpec {
    ScenarioSpec {
        groups: vec![
            GroupSpec {
                count: 100,
                intercept: 0.0,
                lags: vec![0.9, 0.7],
                innovation_sd: 0.9,
                initial_sd: 1.5,
            },
            GroupSpec {
                count: 100,
                intercept: 0.0,
                lags: vec![-0.9, -0.7],
                innovation_sd: 1.5,
                initial_sd: 1.5,
            },
        ],
        n_per_subject: 10,
        seed,
        censor_prob: 0.0,
    }
}

/// Looks up a built-in scenario by name (`1`, `2`, `scenario1`, `scenario2`).
pub fn named(name: &str, seed: u64) -> Option<ScenarioSpec> {
    match name {
        "1" | "scenario1" => Some(scenario1(seed)),
        "2" | "scenario2" => Some(scenario2(seed)),
        _ => None,
    }
}

/// Simulates one log-gap path. Lags reaching before the first gap are
/// dropped.
pub fn simulate_path<R: Rng + ?Sized>(group: &GroupSpec, n: usize, rng: &mut R) -> Vec<f64> {
    let mut y = Vec::with_capacity(n);
    for j in 0..n {
        let v = if j == 0 {
            sample_normal(rng, group.intercept, group.initial_sd)
        } else {
            let mean = group.intercept
                + group
                    .lags
                    .iter()
                    .enumerate()
                    .take(j)
                    .map(|(l, m)| m * y[j - 1 - l])
                    .sum::<f64>();
            sample_normal(rng, mean, group.innovation_sd)
        };
        y.push(v);
    }
    y
}

/// Simulated dataset plus the generating group of each subject.
#[derive(Debug, Clone)]
pub struct Simulated {
    pub dataset: GapTimeDataset,
    pub group: Vec<usize>,
}

/// Generates the dataset. Each subject draws from its own ChaCha stream,
/// so output depends only on the seed and the subject's position.
pub fn generate(spec: &ScenarioSpec) -> Result<Simulated> {
    spec.validate()?;
    let mut ids = Vec::with_capacity(spec.n_subjects());
    let mut paths = Vec::with_capacity(spec.n_subjects());
    let mut censored = Vec::with_capacity(spec.n_subjects());
    let mut groups = Vec::with_capacity(spec.n_subjects());
    let mut i = 0u64;
    for (g, group) in spec.groups.iter().enumerate() {
        for _ in 0..group.count {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream(i);
            let mut y = simulate_path(group, spec.n_per_subject, &mut rng);
            let cens = spec.censor_prob > 0.0 && rng.random::<f64>() < spec.censor_prob;
            if cens {
                let e = -crate::dist::open_unit(&mut rng).ln();
                *y.last_mut().unwrap() -= e;
            }
            i += 1;
            ids.push(format!("s{i:04}"));
            paths.push(y);
            censored.push(cens);
            groups.push(g);
        }
    }
    Ok(Simulated {
        dataset: GapTimeDataset::from_log_gaps(ids, paths, censored)?,
        group: groups,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::gap_count_table;

    #[test]
    fn scenario_sizes() {
        let s1 = generate(&scenario1(7)).unwrap();
        assert_eq!(s1.dataset.n_subjects(), 300);
        assert_eq!(gap_count_table(&s1.dataset).get(&10), Some(&300));
        let s2 = generate(&scenario2(7)).unwrap();
        assert_eq!(s2.dataset.n_subjects(), 200);
        assert_eq!(s2.dataset.total_gaps(), 2000);
        assert_eq!(s2.dataset.n_censored(), 0);
    }

    #[test]
    fn seed_determinism() {
        let a = generate(&scenario2(3)).unwrap();
        let b = generate(&scenario2(3)).unwrap();
        assert_eq!(a.dataset, b.dataset);
        let c = generate(&scenario2(4)).unwrap();
        assert_ne!(a.dataset.log_gaps(), c.dataset.log_gaps());
    }

    #[test]
    fn white_noise_means() {
        let spec = ScenarioSpec {
            groups: vec![GroupSpec {
                count: 2000,
                intercept: 0.0,
                lags: vec![0.0, 0.0],
                innovation_sd: 1.0,
                initial_sd: 1.0,
            }],
            n_per_subject: 5,
            seed: 1,
            censor_prob: 0.0,
        };
        let sim = generate(&spec).unwrap();
        let n = sim.dataset.n_subjects() as f64;
        for j in 0..5 {
            let m: f64 = sim.dataset.log_gaps().iter().map(|y| y[j]).sum::<f64>() / n;
            assert!(m.abs() < 4.0 / n.sqrt(), "j={j} mean={m}");
        }
    }

    #[test]
    fn censoring_switch() {
        let mut spec = scenario2(5);
        spec.censor_prob = 0.5;
        let sim = generate(&spec).unwrap();
        let c = sim.dataset.n_censored();
        assert!(c > 60 && c < 140, "{c}");
    }

    #[test]
    fn unknown_name() {
        assert!(named("3", 1).is_none());
        assert_eq!(named("scenario1", 1).unwrap().n_subjects(), 300);
    }
}
