//! The probabilistic model: observation and random-effect densities, priors,
//! and the latent state shared by every sampler block.
//!
//! Log gaps follow `Y_ij = x_ijᵀβ_j + α_ij + σε_ij`. Random effects are
//! centred on an autoregression over past log gaps whose coefficients
//! `(m0, m1, …)` are atoms of a truncated stick-breaking Dirichlet process.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::GapTimeDataset;
use crate::dist::{normal_log_sf, normal_logpdf, sample_normal, sample_tbeta};
use crate::error::{Error, Result};

pub use crate::dist::tbeta_logpdf;

/// Summary of the past log gaps used by the single-coefficient models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SummaryFn {
    LastValue,
    ArithmeticMean,
    GeometricMean,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DependenceSpec {
    /// `α_ij` centred on `m0 + m1 f(Y_i1..Y_ij-1)`.
    SummaryF { f: SummaryFn },
    /// Autoregression of fixed order.
    FixedAr { order: usize },
    /// Up to `max_order` lags, each atom switching lags off through a
    /// point mass at zero in the base measure.
    SpikeSlabAr { max_order: usize },
    /// Order `p` uniform on `{0..max_order}` and sampled.
    RandomOrder { max_order: usize },
}

impl DependenceSpec {
    /// Number of lag coefficients carried by each atom.
    pub fn lag_slots(&self) -> usize {
        match *self {
            DependenceSpec::SummaryF { .. } => 1,
            DependenceSpec::FixedAr { order } => order,
            DependenceSpec::SpikeSlabAr { max_order } | DependenceSpec::RandomOrder { max_order } => max_order,
        }
    }

    pub fn is_spike_slab(&self) -> bool {
        matches!(self, DependenceSpec::SpikeSlabAr { .. })
    }

    pub fn is_random_order(&self) -> bool {
        matches!(self, DependenceSpec::RandomOrder { .. })
    }
}

/// Prior on an observation or random-effect scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScalePrior {
    /// Uniform on the standard deviation over `(0, upper)`.
    UniformSd { upper: f64 },
    /// Inverse-gamma on the variance.
    InvGammaVar { shape: f64, scale: f64 },
}

impl ScalePrior {
    /// Log prior density of the standard deviation `s` (up to a constant).
    pub fn log_density_sd(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return f64::NEG_INFINITY;
        }
        match *self {
            ScalePrior::UniformSd { upper } => {
                if s < upper {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }
            ScalePrior::InvGammaVar { shape, scale } => {
                // density of v = s² is v^{-shape-1} e^{-scale/v}; ds Jacobian 2s
                let v = s * s;
                -(shape + 1.0) * v.ln() - scale / v + s.ln()
            }
        }
    }

    pub fn upper(&self) -> f64 {
        match *self {
            ScalePrior::UniformSd { upper } => upper,
            ScalePrior::InvGammaVar { .. } => f64::INFINITY,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            ScalePrior::UniformSd { upper } => upper * crate::dist::open_unit(rng),
            ScalePrior::InvGammaVar { shape, scale } => {
                let g = rand_distr::Gamma::new(shape, 1.0 / scale).expect("validated");
                let precision: f64 = rand_distr::Distribution::sample(&g, rng);
                (1.0 / precision).sqrt()
            }
        }
    }

    fn validate(&self, what: &str) -> Result<()> {
        let ok = match *self {
            ScalePrior::UniformSd { upper } => upper > 0.0 && upper.is_finite(),
            ScalePrior::InvGammaVar { shape, scale } => shape > 0.0 && scale > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("invalid prior for {what}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConcentrationPrior {
    Fixed {
        value: f64,
    },
    /// `M ~ U(0, upper)`.
    Uniform {
        upper: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hyperparameters {
    /// Prior variance of each regression coefficient (`β_0²`).
    pub beta_prior_var: f64,
    pub sigma_prior: ScalePrior,
    pub tau_prior: ScalePrior,
    /// Base-measure variance of atom intercepts (`σ_g²`).
    pub intercept_var: f64,
    pub tbeta_a: f64,
    pub tbeta_b: f64,
    pub concentration: ConcentrationPrior,
    /// Stick-breaking truncation level `H`.
    pub truncation: usize,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Hyperparameters {
            beta_prior_var: 1000.0,
            sigma_prior: ScalePrior::UniformSd { upper: 10.0 },
            tau_prior: ScalePrior::UniformSd { upper: 10.0 },
            intercept_var: 10.0,
            tbeta_a: 3.0,
            tbeta_b: 3.0,
            concentration: ConcentrationPrior::Uniform { upper: 10.0 },
            truncation: 30,
        }
    }
}

impl Hyperparameters {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64, what: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!("{what} must be positive and finite")))
            }
        };
        positive(self.beta_prior_var, "beta_prior_var")?;
        positive(self.intercept_var, "intercept_var")?;
        positive(self.tbeta_a, "tbeta_a")?;
        positive(self.tbeta_b, "tbeta_b")?;
        self.sigma_prior.validate("sigma")?;
        self.tau_prior.validate("tau")?;
        match self.concentration {
            ConcentrationPrior::Fixed { value } => positive(value, "concentration")?,
            ConcentrationPrior::Uniform { upper } if upper > 0.0 => {}
            ConcentrationPrior::Uniform { .. } => {
                return Err(Error::InvalidConfig(
                    "concentration upper bound must be positive".into(),
                ))
            }
        }
        if self.truncation == 0 {
            return Err(Error::InvalidConfig("truncation must be at least 1".into()));
        }
        Ok(())
    }
}

/// Model structure: dependence, priors and whether `β_j` is shared over `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub dependence: DependenceSpec,
    #[serde(default)]
    pub hyper: Hyperparameters,
    #[serde(default)]
    pub shared_beta: bool,
}

impl ModelConfig {
    pub fn new(dependence: DependenceSpec, hyper: Hyperparameters) -> Self {
        ModelConfig {
            dependence,
            hyper,
            shared_beta: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.hyper.validate()
    }
}

/// One mixture component: intercept and lag coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub m0: f64,
    pub lags: Vec<f64>,
    /// Lag inclusion flags. Always true outside the spike-and-slab model;
    /// a false flag pins the matching coefficient to exactly zero.
    pub included: Vec<bool>,
}

impl Atom {
    /// Builds an atom, rejecting lag coefficients outside (-1, 1).
    pub fn new(m0: f64, lags: Vec<f64>) -> Result<Self> {
        if !m0.is_finite() {
            return Err(Error::InvalidData("atom intercept must be finite".into()));
        }
        if let Some(m) = lags.iter().find(|m| m.is_nan() || m.abs() >= 1.0) {
            return Err(Error::InvalidData(format!(
                "autoregressive coefficient {m} outside (-1, 1)"
            )));
        }
        let included = vec![true; lags.len()];
        Ok(Atom { m0, lags, included })
    }

    /// Coefficient of lag `l` (0-based) when only the first `active` lags
    /// enter the mean.
    #[inline]
    pub fn effective(&self, l: usize, active: usize) -> f64 {
        if l < active && self.included[l] {
            self.lags[l]
        } else {
            0.0
        }
    }

    /// Copy with inactive lags zeroed.
    pub fn effective_atom(&self, active: usize) -> Atom {
        let lags = (0..self.lags.len()).map(|l| self.effective(l, active)).collect();
        let included = (0..self.lags.len()).map(|l| l < active && self.included[l]).collect();
        Atom {
            m0: self.m0,
            lags,
            included,
        }
    }

    pub fn sample_prior<R: Rng + ?Sized>(
        rng: &mut R,
        slots: usize,
        hyper: &Hyperparameters,
        inclusion_prob: Option<&[f64]>,
    ) -> Atom {
        let m0 = sample_normal(rng, 0.0, hyper.intercept_var.sqrt());
        let mut lags = Vec::with_capacity(slots);
        let mut included = Vec::with_capacity(slots);
        for l in 0..slots {
            let keep = match inclusion_prob {
                Some(c) => rng.random::<f64>() < c[l],
                None => true,
            };
            included.push(keep);
            lags.push(if keep {
                sample_tbeta(rng, hyper.tbeta_a, hyper.tbeta_b)
            } else {
                0.0
            });
        }
        Atom { m0, lags, included }
    }
}

/// Complete set of latent variables for one chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    /// `β_j` rows (one row when shared).
    pub beta: Vec<Vec<f64>>,
    /// Random effects, ragged like the data.
    pub alpha: Vec<Vec<f64>>,
    /// Cluster allocation of each subject, 0-based.
    pub z: Vec<usize>,
    /// `H − 1` stick fractions.
    pub sticks: Vec<f64>,
    pub atoms: Vec<Atom>,
    /// Spike-and-slab inclusion probabilities `c_l`.
    pub inclusion_prob: Vec<f64>,
    /// Active autoregressive order.
    pub order: usize,
    pub concentration: f64,
    pub sigma: f64,
    pub tau: f64,
    /// Latent log gap of each censored subject's last interval.
    pub y_imputed: Vec<Option<f64>>,
}

impl ChainState {
    /// Stick-breaking weights; the last atom takes the remaining mass.
    pub fn weights(&self) -> Vec<f64> {
        stick_weights(&self.sticks)
    }

    #[inline]
    pub fn beta_row(&self, j: usize) -> &[f64] {
        if self.beta.len() == 1 {
            &self.beta[0]
        } else {
            &self.beta[j]
        }
    }

    /// Log gap at `(i, j)`, using the imputed value for a censored last gap.
    #[inline]
    pub fn log_gap(&self, data: &GapTimeDataset, i: usize, j: usize) -> f64 {
        match self.y_imputed[i] {
            Some(y) if j + 1 == data.log_gaps()[i].len() => y,
            _ => data.log_gaps()[i][j],
        }
    }

    /// Number of occupied clusters.
    pub fn occupied(&self) -> usize {
        let mut seen = vec![false; self.atoms.len()];
        for &h in &self.z {
            seen[h] = true;
        }
        seen.iter().filter(|s| **s).count()
    }

    /// Overdispersed-but-feasible starting point: `β = 0`, `σ = τ = 1`,
    /// `α = Y − xβ`, uniform allocations, atoms from the base measure,
    /// `p = P`, every lag included, `M` at half its bound (or fixed), and
    /// censored gaps imputed just above their censoring value.
    pub fn initialize<R: Rng + ?Sized>(data: &GapTimeDataset, model: &ModelConfig, rng: &mut R) -> ChainState {
        let hyper = &model.hyper;
        let h = hyper.truncation;
        let slots = model.dependence.lag_slots();
        let beta_rows = if model.shared_beta { 1 } else { data.max_gaps() };
        let y_imputed: Vec<Option<f64>> = data
            .subjects()
            .iter()
            .zip(data.log_gaps())
            .map(|(s, y)| s.censored.then(|| y[y.len() - 1] + 0.1))
            .collect();
        let alpha = data
            .log_gaps()
            .iter()
            .zip(&y_imputed)
            .map(|(y, imp)| {
                let mut a = y.clone();
                if let Some(v) = imp {
                    *a.last_mut().unwrap() = *v;
                }
                a
            })
            .collect();
        let z = (0..data.n_subjects()).map(|_| rng.random_range(0..h)).collect();
        let sticks = (0..h.saturating_sub(1)).map(|_| 0.5).collect();
        let inclusion_prob = vec![0.5; slots];
        let mut atoms: Vec<Atom> = (0..h).map(|_| Atom::sample_prior(rng, slots, hyper, None)).collect();
        if model.dependence.is_spike_slab() {
            for a in &mut atoms {
                a.included.iter_mut().for_each(|f| *f = true);
            }
        }
        let order = match model.dependence {
            DependenceSpec::SummaryF { .. } => 1,
            DependenceSpec::FixedAr { order } => order,
            DependenceSpec::SpikeSlabAr { max_order } | DependenceSpec::RandomOrder { max_order } => max_order,
        };
        let concentration = match hyper.concentration {
            ConcentrationPrior::Fixed { value } => value,
            ConcentrationPrior::Uniform { upper } => 0.5 * upper,
        };
        ChainState {
            beta: vec![vec![0.0; data.q()]; beta_rows],
            alpha,
            z,
            sticks,
            atoms,
            inclusion_prob,
            order,
            concentration,
            sigma: 1.0,
            tau: 1.0,
            y_imputed,
        }
    }
}

pub fn stick_weights(sticks: &[f64]) -> Vec<f64> {
    let mut w = Vec::with_capacity(sticks.len() + 1);
    let mut remaining = 1.0;
    for &v in sticks {
        w.push(v * remaining);
        remaining *= 1.0 - v;
    }
    w.push(remaining);
    w
}

/// `x·β + α`.
pub fn obs_mean(x: &[f64], beta: &[f64], alpha: f64) -> Result<f64> {
    if x.len() != beta.len() {
        return Err(Error::InvalidData(format!(
            "covariate length {} does not match coefficient length {}",
            x.len(),
            beta.len()
        )));
    }
    Ok(dot(x, beta) + alpha)
}

#[inline]
pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Summary of a non-empty history `Y_i1..Y_ij-1`. The geometric mean keeps
/// the sign of the product, `sgn(∏Y)·|∏Y|^{1/n}`, so it is defined for
/// negative log gaps. Returns `None` for an empty history.
pub fn summary_f(history: &[f64], f: SummaryFn) -> Option<f64> {
    let n = history.len();
    if n == 0 {
        return None;
    }
    Some(match f {
        SummaryFn::LastValue => history[n - 1],
        SummaryFn::ArithmeticMean => history.iter().sum::<f64>() / n as f64,
        SummaryFn::GeometricMean => {
            if history.contains(&0.0) {
                return Some(0.0);
            }
            let negatives = history.iter().filter(|y| **y < 0.0).count();
            let sign = if negatives % 2 == 0 { 1.0 } else { -1.0 };
            let log_abs = history.iter().map(|y| y.abs().ln()).sum::<f64>() / n as f64;
            sign * log_abs.exp()
        }
    })
}

/// Regressors multiplying the lag coefficients for an observation preceded
/// by `history`. Lags reaching before the first gap contribute zero.
pub fn lag_regressors(history: &[f64], spec: &DependenceSpec) -> Vec<f64> {
    match *spec {
        DependenceSpec::SummaryF { f } => vec![summary_f(history, f).unwrap_or(0.0)],
        _ => {
            let slots = spec.lag_slots();
            let n = history.len();
            (1..=slots).map(|l| if l <= n { history[n - l] } else { 0.0 }).collect()
        }
    }
}

/// Prior mean of `α_ij` given the atom, the past log gaps and the active
/// order.
pub fn alpha_conditional_mean(atom: &Atom, history: &[f64], spec: &DependenceSpec, active: usize) -> f64 {
    let x = lag_regressors(history, spec);
    atom.m0
        + x.iter()
            .enumerate()
            .map(|(l, v)| atom.effective(l, active) * v)
            .sum::<f64>()
}

/// Number of lags that enter the mean in state `state`.
pub fn active_order(spec: &DependenceSpec, state: &ChainState) -> usize {
    match *spec {
        DependenceSpec::SummaryF { .. } => 1,
        DependenceSpec::FixedAr { order } => order,
        DependenceSpec::SpikeSlabAr { max_order } => max_order,
        DependenceSpec::RandomOrder { .. } => state.order,
    }
}

/// Observation log-likelihood of subject `i`: Gaussian terms for observed
/// gaps plus, if censored, the log survival of the censoring value.
pub fn loglik_subject(data: &GapTimeDataset, i: usize, state: &ChainState) -> f64 {
    let record = &data.subjects()[i];
    let y = &data.log_gaps()[i];
    let n = y.len();
    let mut ll = 0.0;
    for j in 0..n {
        let mean = dot(&record.covariates[j], state.beta_row(j)) + state.alpha[i][j];
        if record.censored && j + 1 == n {
            ll += normal_log_sf((y[j] - mean) / state.sigma);
        } else {
            ll += normal_logpdf(y[j], mean, state.sigma);
        }
    }
    ll
}

/// Log prior density of subject `i`'s random effects given its atom.
pub fn log_alpha_prior_subject(data: &GapTimeDataset, i: usize, state: &ChainState, spec: &DependenceSpec) -> f64 {
    let y = &data.log_gaps()[i];
    let atom = &state.atoms[state.z[i]];
    let active = active_order(spec, state);
    (0..y.len())
        .map(|j| {
            let mean = alpha_conditional_mean(atom, &y[..j], spec, active);
            normal_logpdf(state.alpha[i][j], mean, state.tau)
        })
        .sum()
}

/// Marginal variance of `α_ij` under the last-value AR(1) structure with
/// covariates ignored: the recursion `V_1 = τ²`,
/// `V_j = m1²(V_{j-1} + σ²) + τ²`, in closed form
/// `τ² Σ_{k<j} m1^{2k} + σ² Σ_{1≤k<j} m1^{2k}`.
pub fn alpha_marginal_variance(atom: &Atom, sigma: f64, tau: f64, j: usize) -> Result<f64> {
    if j == 0 {
        return Err(Error::InvalidData("gap index j starts at 1".into()));
    }
    let m1 = atom.lags.first().copied().unwrap_or(0.0);
    let r = m1 * m1;
    let mut tau_sum = 0.0;
    let mut sigma_sum = 0.0;
    let mut pow = 1.0;
    for k in 0..j {
        tau_sum += pow;
        if k >= 1 {
            sigma_sum += pow;
        }
        pow *= r;
    }
    Ok(tau * tau * tau_sum + sigma * sigma * sigma_sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn obs_mean_examples() {
        assert_eq!(obs_mean(&[0.0, 0.0], &[3.0, 4.0], 0.0).unwrap(), 0.0);
        assert_eq!(obs_mean(&[1.0, 0.0], &[2.0, 5.0], 0.5).unwrap(), 2.5);
        assert!((obs_mean(&[1.0, 1.0], &[0.3, -0.2], 1.1).unwrap() - 1.2).abs() < 1e-12);
        assert!(obs_mean(&[1.0], &[1.0, 2.0], 0.0).is_err());
    }

    #[test]
    fn summary_examples() {
        for f in [
            SummaryFn::LastValue,
            SummaryFn::ArithmeticMean,
            SummaryFn::GeometricMean,
        ] {
            assert!((summary_f(&[3.0], f).unwrap() - 3.0).abs() < 1e-12);
        }
        assert_eq!(summary_f(&[1.0, 3.0], SummaryFn::ArithmeticMean), Some(2.0));
        assert!((summary_f(&[2.0, 8.0], SummaryFn::GeometricMean).unwrap() - 4.0).abs() < 1e-12);
        assert_eq!(summary_f(&[1.0, 3.0], SummaryFn::LastValue), Some(3.0));
        assert_eq!(summary_f(&[], SummaryFn::LastValue), None);
        // sign-preserving: (-2)(8) = -16 -> -4
        assert!((summary_f(&[-2.0, 8.0], SummaryFn::GeometricMean).unwrap() + 4.0).abs() < 1e-12);
        assert!((summary_f(&[-2.0, -8.0], SummaryFn::GeometricMean).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn conditional_mean_examples() {
        let spec = DependenceSpec::FixedAr { order: 2 };
        let atom = Atom::new(0.7, vec![0.5, 0.5]).unwrap();
        assert_eq!(alpha_conditional_mean(&atom, &[], &spec, 2), 0.7);

        let atom = Atom::new(0.0, vec![0.9, 0.7]).unwrap();
        assert!((alpha_conditional_mean(&atom, &[1.0, 1.0], &spec, 2) - 1.6).abs() < 1e-12);

        // order 3 with two past values: lag 3 dropped. m1 = 1 is outside the
        // atom support, so build the struct directly.
        let spec = DependenceSpec::FixedAr { order: 3 };
        let atom = Atom {
            m0: 0.0,
            lags: vec![1.0, 0.7, 0.4],
            included: vec![true; 3],
        };
        // history chronological (Y_1, Y_2) = (1, 2): Y_{j-1} = 2, Y_{j-2} = 1
        assert!((alpha_conditional_mean(&atom, &[1.0, 2.0], &spec, 3) - 2.7).abs() < 1e-12);
    }

    #[test]
    fn summary_mean_uses_f() {
        let spec = DependenceSpec::SummaryF {
            f: SummaryFn::ArithmeticMean,
        };
        let atom = Atom::new(1.0, vec![0.5]).unwrap();
        assert!((alpha_conditional_mean(&atom, &[2.0, 4.0], &spec, 1) - 2.5).abs() < 1e-12);
        assert_eq!(alpha_conditional_mean(&atom, &[], &spec, 1), 1.0);
    }

    #[test]
    fn atom_rejects_unit_root() {
        assert!(Atom::new(0.0, vec![1.0]).is_err());
        assert!(Atom::new(0.0, vec![0.2, -1.0]).is_err());
        assert!(Atom::new(0.0, vec![1.5]).is_err());
        assert!(Atom::new(0.0, vec![0.999]).is_ok());
    }

    #[test]
    fn variance_examples() {
        let zero = Atom::new(0.0, vec![0.0]).unwrap();
        for j in 1..8 {
            assert!((alpha_marginal_variance(&zero, 1.3, 0.7, j).unwrap() - 0.49).abs() < 1e-12);
        }
        let half = Atom::new(0.0, vec![0.5]).unwrap();
        // V_2 = τ²(1 + m²) + σ² m²
        assert!((alpha_marginal_variance(&half, 1.0, 1.0, 2).unwrap() - 1.5).abs() < 1e-12);
        // V_3 = m²(V_2 + σ²) + τ² = 0.25 * 2.5 + 1
        assert!((alpha_marginal_variance(&half, 1.0, 1.0, 3).unwrap() - 1.625).abs() < 1e-12);
        assert!(alpha_marginal_variance(&half, 1.0, 1.0, 0).is_err());
    }

    #[test]
    fn weights_sum_to_one() {
        let w = stick_weights(&[0.3, 0.5, 0.9]);
        assert_eq!(w.len(), 4);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert_eq!(stick_weights(&[]), vec![1.0]);
    }
}
