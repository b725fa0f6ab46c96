#![allow(dead_code)]

use gapdpm::dist::sample_normal;
use gapdpm::model::{active_order, alpha_conditional_mean, stick_weights, ConcentrationPrior};
use gapdpm::sampler::{BlockCounters, BlockTuning, Gibbs};
use gapdpm::summaries::ks_two_sample;
use gapdpm::{Atom, ChainState, DependenceSpec, GapTimeDataset, ModelConfig, SubjectRecord};
use rand::Rng;
use rand_distr::{Beta, Distribution};

/// Shape of a small synthetic problem used by joint-distribution tests.
#[derive(Debug, Clone)]
pub struct Design {
    pub n_subjects: usize,
    pub n_gaps: usize,
    /// Covariate value per `(i, j)`; empty rows when `q = 0`.
    pub x: Vec<Vec<Vec<f64>>>,
    /// Censoring value of each subject's last log gap, if any.
    pub censor_at: Vec<Option<f64>>,
}

impl Design {
    pub fn new(n_subjects: usize, n_gaps: usize, with_covariate: bool, censored: &[usize]) -> Self {
        let x = (0..n_subjects)
            .map(|i| {
                (0..n_gaps)
                    .map(|j| {
                        if with_covariate {
                            vec![((i + 2 * j) % 3) as f64 - 1.0 + 0.25 * i as f64]
                        } else {
                            Vec::new()
                        }
                    })
                    .collect()
            })
            .collect();
        let censor_at = (0..n_subjects).map(|i| censored.contains(&i).then_some(0.3)).collect();
        Design {
            n_subjects,
            n_gaps,
            x,
            censor_at,
        }
    }

    pub fn q(&self) -> usize {
        self.x[0][0].len()
    }
}

/// Draws every parameter of the chain state from its prior. Random effects
/// and imputed values are left for [`simulate_data`].
pub fn prior_state<R: Rng + ?Sized>(rng: &mut R, model: &ModelConfig, design: &Design) -> ChainState {
    let hyper = &model.hyper;
    let h = hyper.truncation;
    let slots = model.dependence.lag_slots();
    let beta_rows = if model.shared_beta { 1 } else { design.n_gaps };
    let beta_sd = hyper.beta_prior_var.sqrt();
    let beta = (0..beta_rows)
        .map(|_| (0..design.q()).map(|_| sample_normal(rng, 0.0, beta_sd)).collect())
        .collect();
    let concentration = match hyper.concentration {
        ConcentrationPrior::Fixed { value } => value,
        ConcentrationPrior::Uniform { upper } => upper * rng.random::<f64>(),
    };
    let stick = Beta::new(1.0, concentration).unwrap();
    let sticks: Vec<f64> = (0..h - 1)
        .map(|_| stick.sample(rng).clamp(1e-12, 1.0 - 1e-12))
        .collect();
    let inclusion_prob: Vec<f64> = (0..slots).map(|_| rng.random()).collect();
    let spike = model.dependence.is_spike_slab();
    let atoms = (0..h)
        .map(|_| Atom::sample_prior(rng, slots, hyper, spike.then_some(inclusion_prob.as_slice())))
        .collect();
    let order = match model.dependence {
        DependenceSpec::RandomOrder { max_order } => rng.random_range(0..=max_order),
        DependenceSpec::SpikeSlabAr { max_order } => max_order,
        DependenceSpec::FixedAr { order } => order,
        DependenceSpec::SummaryF { .. } => 1,
    };
    let weights = stick_weights(&sticks);
    let z = (0..design.n_subjects)
        .map(|_| {
            let mut u: f64 = rng.random();
            let mut pick = h - 1;
            for (k, w) in weights.iter().enumerate() {
                if u < *w {
                    pick = k;
                    break;
                }
                u -= w;
            }
            pick
        })
        .collect();
    ChainState {
        beta,
        alpha: vec![vec![0.0; design.n_gaps]; design.n_subjects],
        z,
        sticks,
        atoms,
        inclusion_prob,
        order,
        concentration,
        sigma: hyper.sigma_prior.sample(rng),
        tau: hyper.tau_prior.sample(rng),
        y_imputed: vec![None; design.n_subjects],
    }
}

/// Draws random effects and log gaps forward in `j` given the parameters,
/// writing the random effects and latent censored values into `state`.
pub fn simulate_data<R: Rng + ?Sized>(
    rng: &mut R,
    state: &mut ChainState,
    model: &ModelConfig,
    design: &Design,
) -> GapTimeDataset {
    let active = active_order(&model.dependence, state);
    let mut subjects = Vec::with_capacity(design.n_subjects);
    for i in 0..design.n_subjects {
        let atom = &state.atoms[state.z[i]];
        let mut y = Vec::with_capacity(design.n_gaps);
        for j in 0..design.n_gaps {
            let mean = alpha_conditional_mean(atom, &y, &model.dependence, active);
            let a = sample_normal(rng, mean, state.tau);
            state.alpha[i][j] = a;
            let xb: f64 = design.x[i][j].iter().zip(state.beta_row(j)).map(|(x, b)| x * b).sum();
            y.push(sample_normal(rng, xb + a, state.sigma));
        }
        let last = *y.last().unwrap();
        let censored = matches!(design.censor_at[i], Some(c) if last > c);
        state.y_imputed[i] = None;
        let mut gaps: Vec<f64> = y.iter().map(|v| v.exp()).collect();
        if censored {
            let c = design.censor_at[i].unwrap();
            state.y_imputed[i] = Some(last);
            *gaps.last_mut().unwrap() = c.exp();
        }
        subjects.push(SubjectRecord {
            subject_id: format!("s{i}"),
            gap_times: gaps,
            censored,
            covariates: design.x[i].clone(),
        });
    }
    GapTimeDataset::new(subjects, design.q()).unwrap()
}

/// Scalars compared between the two simulators.
pub const GIR_NAMES: [&str; 7] = ["m0", "m1", "sigma", "tau", "order", "concentration", "beta"];

fn gir_scalars(state: &ChainState) -> [f64; 7] {
    let atom = &state.atoms[state.z[0]];
    [
        atom.m0,
        atom.lags.first().copied().unwrap_or(0.0),
        state.sigma,
        state.tau,
        state.order as f64,
        state.concentration,
        state.beta.first().and_then(|r| r.first()).copied().unwrap_or(0.0),
    ]
}

/// Outcome of a joint-distribution test: per scalar, the KS p-value of
/// successive-conditional draws against independent prior draws.
#[derive(Debug, Clone)]
pub struct GirOutcome {
    pub p_values: Vec<(&'static str, f64)>,
    pub draws: usize,
}

/// Runs the successive-conditional simulator (sweep, then redraw the data
/// given the parameters), keeping every `thin`-th state, and the
/// marginal-conditional simulator (independent prior draws).
pub fn getting_it_right<R: Rng + ?Sized>(
    rng: &mut R,
    model: &ModelConfig,
    design: &Design,
    tuning: BlockTuning,
    draws: usize,
    thin: usize,
) -> GirOutcome {
    let mut prior = vec![Vec::with_capacity(draws); GIR_NAMES.len()];
    for _ in 0..draws {
        let s = prior_state(rng, model, design);
        for (k, v) in gir_scalars(&s).into_iter().enumerate() {
            prior[k].push(v);
        }
    }
    let mut state = prior_state(rng, model, design);
    let mut data = simulate_data(rng, &mut state, model, design);
    let mut counters = BlockCounters::default();
    let mut chain = vec![Vec::with_capacity(draws); GIR_NAMES.len()];
    for t in 0..draws * thin {
        let gibbs = Gibbs::new(&data, model, tuning);
        gibbs.sweep(&mut state, rng, &mut counters, t + 1).unwrap();
        data = simulate_data(rng, &mut state, model, design);
        if (t + 1) % thin == 0 {
            for (k, v) in gir_scalars(&state).into_iter().enumerate() {
                chain[k].push(v);
            }
        }
    }
    let p_values = GIR_NAMES
        .iter()
        .zip(prior.iter().zip(&chain))
        .filter(|(_, (p, _))| p.iter().any(|v| *v != p[0]))
        .map(|(name, (p, c))| (*name, ks_two_sample(p, c).p_value))
        .collect();
    GirOutcome { p_values, draws }
}

/// Hyperparameters tight enough that the tiny joint-distribution instance
/// mixes quickly.
pub fn gir_model(dependence: DependenceSpec) -> ModelConfig {
    use gapdpm::model::ScalePrior;
    let hyper = gapdpm::Hyperparameters {
        beta_prior_var: 1.0,
        sigma_prior: ScalePrior::UniformSd { upper: 2.0 },
        tau_prior: ScalePrior::UniformSd { upper: 2.0 },
        intercept_var: 1.0,
        concentration: ConcentrationPrior::Uniform { upper: 3.0 },
        truncation: 3,
        ..Default::default()
    };
    ModelConfig::new(dependence, hyper)
}
