//! Posterior simulation by blocked Gibbs sampling over the truncated
//! stick-breaking representation.
//!
//! One sweep updates, in order: censored-gap imputation, allocations
//! (plus split–merge proposals), sticks, atoms, lag inclusion (spike-and-slab), order (random order),
//! random effects, regression coefficients, `σ`, `τ` (plus a rotation of
//! the `(σ, τ)` split with the random effects integrated out) and `M`.
//!
//! By default the cluster-structure blocks integrate the random effects
//! out and the random effects are drawn right after them. With
//! `collapse_alpha = false` every block conditions on the random effects,
//! which are then drawn straight after imputation.

mod blocks;
mod design;
mod split_merge;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::GapTimeDataset;
use crate::error::{Error, Result};
use crate::model::{active_order, Atom, ChainState, DependenceSpec, ModelConfig};

pub use blocks::{BlockCounters, BlockTuning, Gibbs};
pub use design::Design;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerConfig {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    #[serde(default = "one")]
    pub chains: usize,
    #[serde(default)]
    pub tuning: BlockTuning,
}

fn one() -> usize {
    1
}

impl SamplerConfig {
    /// 20,000 iterations, 2,000 burn-in, thin 10.
    pub fn desk_scale(seed: u64) -> Self {
        SamplerConfig {
            iterations: 20_000,
            burn_in: 2_000,
            thin: 10,
            seed,
            chains: 1,
            tuning: BlockTuning::default(),
        }
    }

    /// 251,000 iterations, 1,000 burn-in, thin 50: 5,000 retained draws.
    pub fn paper_scale(seed: u64) -> Self {
        SamplerConfig {
            iterations: 251_000,
            burn_in: 1_000,
            thin: 50,
            ..Self::desk_scale(seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 || self.thin == 0 || self.chains == 0 {
            return Err(Error::InvalidConfig(
                "iterations, thin and chains must be positive".into(),
            ));
        }
        if self.burn_in >= self.iterations {
            return Err(Error::InvalidConfig(format!(
                "burn_in ({}) must be below iterations ({})",
                self.burn_in, self.iterations
            )));
        }
        if !(self.tuning.atom_width > 0.0 && self.tuning.scale_width > 0.0) {
            return Err(Error::InvalidConfig("slice widths must be positive".into()));
        }
        Ok(())
    }

    /// `floor((iterations − burn_in) / thin)`.
    pub fn retained(&self) -> usize {
        (self.iterations - self.burn_in) / self.thin
    }
}

/// Header of a draw store: enough to interpret the draws without the
/// original config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoreMeta {
    pub dependence: DependenceSpec,
    pub q: usize,
    pub max_gaps: usize,
    pub n_subjects: usize,
    pub lag_slots: usize,
    pub shared_beta: bool,
    pub covariate_names: Vec<String>,
    pub truncation: usize,
    pub seed: u64,
    pub chain: usize,
    pub counters: BlockCounters,
}

/// One retained sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Draw {
    pub iteration: usize,
    pub sigma: f64,
    pub tau: f64,
    pub concentration: f64,
    pub order: usize,
    /// Occupied clusters.
    pub k: usize,
    /// Weight of the last (remainder) stick.
    pub last_weight: f64,
    /// `β` rows, one per gap index (or a single shared row).
    pub beta: Vec<Vec<f64>>,
    /// Parameters of a new subject drawn from `Σ w_h δ_{atom_h}`, with
    /// inactive lags set to zero.
    pub predictive_atom: Atom,
    /// `Σ_h w_h 1{lag l active in atom h}` per lag.
    pub inclusion: Vec<f64>,
    pub allocations: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DrawStore {
    pub meta: StoreMeta,
    pub draws: Vec<Draw>,
}

impl DrawStore {
    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    /// Named scalar series: `sigma`, `tau`, `concentration`, `order`, `k`.
    pub fn scalar(&self, name: &str) -> Option<Vec<f64>> {
        let f: fn(&Draw) -> f64 = match name {
            "sigma" => |d| d.sigma,
            "tau" => |d| d.tau,
            "concentration" => |d| d.concentration,
            "order" => |d| d.order as f64,
            "k" => |d| d.k as f64,
            "last_weight" => |d| d.last_weight,
            _ => return None,
        };
        Some(self.draws.iter().map(f).collect())
    }

    pub const SCALARS: [&'static str; 6] = ["sigma", "tau", "concentration", "order", "k", "last_weight"];

    /// Keeps every `step`-th draw.
    pub fn thinned(&self, step: usize) -> DrawStore {
        DrawStore {
            meta: self.meta.clone(),
            draws: self.draws.iter().step_by(step.max(1)).cloned().collect(),
        }
    }

    /// Concatenates chains of the same model. Counters are summed.
    pub fn pooled(stores: &[DrawStore]) -> Result<DrawStore> {
        let Some(first) = stores.first() else {
            return Err(Error::InvalidData("no draw stores".into()));
        };
        let mut meta = first.meta.clone();
        let mut draws = Vec::with_capacity(stores.iter().map(|s| s.len()).sum());
        for (k, s) in stores.iter().enumerate() {
            let m = &s.meta;
            if m.dependence != meta.dependence
                || m.q != meta.q
                || m.lag_slots != meta.lag_slots
                || m.shared_beta != meta.shared_beta
                || m.max_gaps != meta.max_gaps
            {
                return Err(Error::InvalidData(format!(
                    "chain {} was fitted to a different model than chain {}",
                    m.chain, first.meta.chain
                )));
            }
            if k > 0 {
                meta.counters.slice_rejections += m.counters.slice_rejections;
                meta.counters.tail_approximations += m.counters.tail_approximations;
                meta.counters.inclusion_flips += m.counters.inclusion_flips;
                meta.counters.joint_accepts += m.counters.joint_accepts;
                meta.counters.split_merge_accepts += m.counters.split_merge_accepts;
            }
            draws.extend(s.draws.iter().cloned());
        }
        Ok(DrawStore { meta, draws })
    }

    /// Draws whose order equals `p`.
    pub fn with_order(&self, p: usize) -> DrawStore {
        DrawStore {
            meta: self.meta.clone(),
            draws: self.draws.iter().filter(|d| d.order == p).cloned().collect(),
        }
    }
}

impl<'a> Gibbs<'a> {
    /// One full scan in the fixed block order.
    pub fn sweep<R: Rng + ?Sized>(
        &self,
        state: &mut ChainState,
        rng: &mut R,
        counters: &mut BlockCounters,
        sweep: usize,
    ) -> Result<()> {
        let check = |ok: bool, block: &'static str, message: &str| -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(Error::Numerical {
                    block,
                    sweep,
                    message: message.to_string(),
                })
            }
        };
        self.impute_censored(state, rng, counters);
        check(
            state.y_imputed.iter().flatten().all(|y| y.is_finite()),
            "imputation",
            "non-finite imputed log gap",
        )?;
        let collapsed = self.tuning.collapse_alpha;
        let alpha_block = |state: &mut ChainState, rng: &mut R| -> Result<()> {
            self.update_alpha(state, rng);
            check(
                state.alpha.iter().flatten().all(|a| a.is_finite()),
                "alpha",
                "non-finite random effect",
            )
        };
        if !collapsed {
            alpha_block(state, rng)?;
        }
        self.update_allocations(state, rng);
        self.split_merge(state, rng, counters);
        self.update_sticks(state, rng);
        self.update_atoms(state, rng, counters);
        check(
            state
                .atoms
                .iter()
                .all(|a| a.m0.is_finite() && a.lags.iter().all(|m| m.abs() < 1.0)),
            "atoms",
            "atom left its support",
        )?;
        self.update_spike_slab(state, rng, counters);
        self.update_order(state, rng);
        if collapsed {
            alpha_block(state, rng)?;
        }
        self.update_beta(state, rng);
        check(
            state.beta.iter().flatten().all(|b| b.is_finite()),
            "beta",
            "non-finite regression coefficient",
        )?;
        self.update_scales(state, rng, counters);
        self.rotate_scales(state, rng, counters);
        check(
            state.sigma > 0.0 && state.sigma.is_finite() && state.tau > 0.0 && state.tau.is_finite(),
            "scales",
            "scale left (0, ∞)",
        )?;
        self.update_concentration(state, rng);
        check(
            state.concentration > 0.0 && state.concentration.is_finite(),
            "concentration",
            "concentration left (0, ∞)",
        )?;
        Ok(())
    }

    pub fn record<R: Rng + ?Sized>(&self, state: &ChainState, iteration: usize, rng: &mut R) -> Draw {
        let weights = state.weights();
        let active = active_order(&self.model.dependence, state);
        let pick = {
            let mut u: f64 = rng.random();
            let mut chosen = weights.len() - 1;
            for (h, w) in weights.iter().enumerate() {
                if u < *w {
                    chosen = h;
                    break;
                }
                u -= w;
            }
            chosen
        };
        let slots = self.design.slots();
        let inclusion = (0..slots)
            .map(|l| {
                state
                    .atoms
                    .iter()
                    .zip(&weights)
                    .filter(|(a, _)| l < active && a.included[l])
                    .map(|(_, w)| w)
                    .sum()
            })
            .collect();
        Draw {
            iteration,
            sigma: state.sigma,
            tau: state.tau,
            concentration: state.concentration,
            order: state.order,
            k: state.occupied(),
            last_weight: *weights.last().unwrap(),
            beta: state.beta.clone(),
            predictive_atom: state.atoms[pick].effective_atom(active),
            inclusion,
            allocations: state.z.clone(),
        }
    }
}

/// RNG for chain `chain` of a run seeded with `seed`: one ChaCha stream
/// per chain.
pub fn chain_rng(seed: u64, chain: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chain as u64);
    rng
}

/// Runs one chain and keeps every `thin`-th sweep after burn-in.
pub fn run_chain(
    data: &GapTimeDataset,
    model: &ModelConfig,
    config: &SamplerConfig,
    chain: usize,
) -> Result<DrawStore> {
    model.validate()?;
    config.validate()?;
    data.check_no_intercept()?;
    let gibbs = Gibbs::new(data, model, config.tuning);
    let mut rng = chain_rng(config.seed, chain);
    let mut state = ChainState::initialize(data, model, &mut rng);
    let mut counters = BlockCounters::default();
    let mut draws = Vec::with_capacity(config.retained());
    for it in 1..=config.iterations {
        gibbs.sweep(&mut state, &mut rng, &mut counters, it)?;
        if it > config.burn_in && (it - config.burn_in).is_multiple_of(config.thin) {
            draws.push(gibbs.record(&state, it, &mut rng));
        }
    }
    Ok(DrawStore {
        meta: StoreMeta {
            dependence: model.dependence,
            q: data.q(),
            max_gaps: data.max_gaps(),
            n_subjects: data.n_subjects(),
            lag_slots: model.dependence.lag_slots(),
            shared_beta: model.shared_beta,
            covariate_names: data.covariate_names().to_vec(),
            truncation: model.hyper.truncation,
            seed: config.seed,
            chain,
            counters,
        },
        draws,
    })
}

/// Runs `config.chains` chains concurrently over the shared dataset.
pub fn run_chains(data: &GapTimeDataset, model: &ModelConfig, config: &SamplerConfig) -> Result<Vec<DrawStore>> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..config.chains)
            .map(|c| scope.spawn(move || run_chain(data, model, config, c)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("chain thread panicked"))
            .collect()
    })
}
