//! Posterior and posterior-predictive summaries of a draw store, plus the
//! convergence diagnostics and goodness-of-fit tests used to check them.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dist::sample_normal;
use crate::error::{Error, Result};
use crate::model::{lag_regressors, DependenceSpec};
use crate::sampler::DrawStore;

/// Minimum retained draws for [`diagnostics`].
pub const MIN_DIAGNOSTIC_DRAWS: usize = 100;

/// A kernel-density mode counts if its height is at least this fraction of
/// the global maximum.
pub const MODE_HEIGHT_FRACTION: f64 = 0.1;

const KDE_GRID: usize = 512;

fn require_draws(store: &DrawStore) -> Result<()> {
    if store.is_empty() {
        Err(Error::InvalidData("draw store is empty".into()))
    } else {
        Ok(())
    }
}

/// Quantile of sorted data by linear interpolation between order
/// statistics (type 7).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty sample");
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Unbiased sample variance.
pub fn variance(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    if n < 2.0 {
        return 0.0;
    }
    let m = mean(values);
    values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0)
}

/// Moment coefficient of skewness `m3 / m2^{3/2}`; `None` for constant data.
pub fn skewness(values: &[f64]) -> Option<f64> {
    let m = mean(values);
    let n = values.len() as f64;
    let m2 = values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n;
    let m3 = values.iter().map(|v| (v - m).powi(3)).sum::<f64>() / n;
    (m2 > 0.0).then(|| m3 / m2.powf(1.5))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarSummary {
    pub mean: f64,
    pub median: f64,
    pub q05: f64,
    pub q95: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
}

impl ScalarSummary {
    pub fn of(values: &[f64]) -> Self {
        let s = sorted(values);
        ScalarSummary {
            mean: mean(values),
            median: quantile_sorted(&s, 0.5),
            q05: quantile_sorted(&s, 0.05),
            q95: quantile_sorted(&s, 0.95),
            ci_lower: quantile_sorted(&s, 0.025),
            ci_upper: quantile_sorted(&s, 0.975),
        }
    }
}

fn histogram(values: impl Iterator<Item = usize>) -> BTreeMap<usize, f64> {
    let mut counts = BTreeMap::new();
    let mut n = 0usize;
    for v in values {
        *counts.entry(v).or_insert(0usize) += 1;
        n += 1;
    }
    counts.into_iter().map(|(k, c)| (k, c as f64 / n as f64)).collect()
}

/// Posterior frequency of the number of occupied clusters.
pub fn k_posterior(store: &DrawStore) -> Result<BTreeMap<usize, f64>> {
    require_draws(store)?;
    Ok(histogram(store.draws.iter().map(|d| d.k)))
}

/// Posterior frequency of the autoregressive order.
pub fn order_posterior(store: &DrawStore) -> Result<BTreeMap<usize, f64>> {
    require_draws(store)?;
    Ok(histogram(store.draws.iter().map(|d| d.order)))
}

/// Most frequent value of a histogram (smallest on ties).
pub fn histogram_mode(hist: &BTreeMap<usize, f64>) -> Option<(usize, f64)> {
    hist.iter()
        .fold(None, |best: Option<(usize, f64)>, (&k, &p)| match best {
            Some((_, bp)) if bp >= p => best,
            _ => Some((k, p)),
        })
}

/// Posterior probability that each lag enters the model for a new subject.
pub fn inclusion_probabilities(store: &DrawStore) -> Result<Vec<f64>> {
    require_draws(store)?;
    let n = store.len() as f64;
    Ok((0..store.meta.lag_slots)
        .map(|l| store.draws.iter().map(|d| d.inclusion[l]).sum::<f64>() / n)
        .collect())
}

/// Silverman's rule of thumb, `0.9 min(sd, IQR/1.34) n^{-1/5}`. Zero for
/// constant data.
pub fn silverman_bandwidth(values: &[f64]) -> f64 {
    let s = sorted(values);
    let sd = variance(values).sqrt();
    let iqr = quantile_sorted(&s, 0.75) - quantile_sorted(&s, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    0.9 * spread * (values.len() as f64).powf(-0.2)
}

/// Gaussian kernel density estimate on `grid`.
pub fn kde(values: &[f64], bandwidth: f64, grid: &[f64]) -> Vec<f64> {
    let norm = 1.0 / (values.len() as f64 * bandwidth * (2.0 * std::f64::consts::PI).sqrt());
    grid.iter()
        .map(|&g| {
            values
                .iter()
                .map(|&v| {
                    let z = (g - v) / bandwidth;
                    (-0.5 * z * z).exp()
                })
                .sum::<f64>()
                * norm
        })
        .collect()
}

/// Local maxima of a density on a grid whose height is at least
/// [`MODE_HEIGHT_FRACTION`] of the global maximum.
pub fn density_modes(grid: &[f64], density: &[f64]) -> Vec<f64> {
    let top = density.iter().cloned().fold(0.0, f64::max);
    let n = density.len();
    (0..n)
        .filter(|&k| {
            let left = k == 0 || density[k] > density[k - 1];
            let right = k + 1 == n || density[k] >= density[k + 1];
            left && right && density[k] >= MODE_HEIGHT_FRACTION * top
        })
        .map(|k| grid[k])
        .collect()
}

/// Predictive draws of one atom coordinate with their smoothed density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomDensity {
    /// 0 for the intercept, `l` for lag `l`.
    pub coordinate: usize,
    pub draws: Vec<f64>,
    pub q05: f64,
    pub q50: f64,
    pub q95: f64,
    pub bandwidth: f64,
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub modes: Vec<f64>,
}

impl AtomDensity {
    /// Fraction of draws inside `(lo, hi)`.
    pub fn mass_within(&self, lo: f64, hi: f64) -> f64 {
        self.draws.iter().filter(|&&v| v > lo && v < hi).count() as f64 / self.draws.len() as f64
    }
}

/// Draws of coordinate `coordinate` (0 = intercept) of the predictive atom,
/// with quantiles, a Silverman-bandwidth kernel density and its modes.
/// Constant draws give an empty density and a single mode.
pub fn predictive_atom_density(store: &DrawStore, coordinate: usize) -> Result<AtomDensity> {
    require_draws(store)?;
    if coordinate > store.meta.lag_slots {
        return Err(Error::InvalidData(format!(
            "coordinate {coordinate} exceeds the {} lag slots",
            store.meta.lag_slots
        )));
    }
    let draws: Vec<f64> = store
        .draws
        .iter()
        .map(|d| {
            if coordinate == 0 {
                d.predictive_atom.m0
            } else {
                d.predictive_atom.lags[coordinate - 1]
            }
        })
        .collect();
    Ok(density_of(coordinate, draws))
}

fn density_of(coordinate: usize, draws: Vec<f64>) -> AtomDensity {
    let s = sorted(&draws);
    let (q05, q50, q95) = (
        quantile_sorted(&s, 0.05),
        quantile_sorted(&s, 0.5),
        quantile_sorted(&s, 0.95),
    );
    let bandwidth = silverman_bandwidth(&draws);
    let (grid, density, modes) = if bandwidth > 0.0 {
        let lo = s[0] - 3.0 * bandwidth;
        let hi = s[s.len() - 1] + 3.0 * bandwidth;
        let step = (hi - lo) / (KDE_GRID - 1) as f64;
        let grid: Vec<f64> = (0..KDE_GRID).map(|k| lo + k as f64 * step).collect();
        let density = kde(&draws, bandwidth, &grid);
        let modes = density_modes(&grid, &density);
        (grid, density, modes)
    } else {
        (Vec::new(), Vec::new(), vec![s[0]])
    };
    AtomDensity {
        coordinate,
        draws,
        q05,
        q50,
        q95,
        bandwidth,
        grid,
        density,
        modes,
    }
}

/// Equal-tailed 95% interval of one regression coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaInterval {
    pub covariate: String,
    /// 1-based gap index; 0 when `β` is shared across gaps.
    pub gap_index: usize,
    pub lower: f64,
    pub median: f64,
    pub upper: f64,
}

/// 2.5% and 97.5% draw quantiles per covariate and gap index.
pub fn beta_credible_intervals(store: &DrawStore) -> Result<Vec<BetaInterval>> {
    require_draws(store)?;
    let rows = store.draws[0].beta.len();
    let mut out = Vec::with_capacity(rows * store.meta.q);
    for j in 0..rows {
        for r in 0..store.meta.q {
            let v: Vec<f64> = store.draws.iter().map(|d| d.beta[j][r]).collect();
            let s = sorted(&v);
            out.push(BetaInterval {
                covariate: store.meta.covariate_names[r].clone(),
                gap_index: if store.meta.shared_beta { 0 } else { j + 1 },
                lower: quantile_sorted(&s, 0.025),
                median: quantile_sorted(&s, 0.5),
                upper: quantile_sorted(&s, 0.975),
            });
        }
    }
    Ok(out)
}

/// Forward-simulates one log-gap trajectory of a new subject per retained
/// draw. `profile[j]` is the covariate vector at gap `j + 1`. Returns
/// `draws × horizon` values.
pub fn predictive_gap_trajectory<R: Rng + ?Sized>(
    store: &DrawStore,
    profile: &[Vec<f64>],
    horizon: usize,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    require_draws(store)?;
    let meta = &store.meta;
    if !meta.shared_beta && horizon > meta.max_gaps {
        return Err(Error::InvalidData(format!(
            "horizon {horizon} exceeds the {} gap times the model was fitted to",
            meta.max_gaps
        )));
    }
    if profile.len() < horizon || profile.iter().take(horizon).any(|x| x.len() != meta.q) {
        return Err(Error::InvalidData(format!(
            "covariate profile must give {} values for each of {horizon} gaps",
            meta.q
        )));
    }
    let spec: &DependenceSpec = &meta.dependence;
    let mut out = Vec::with_capacity(store.len());
    for d in &store.draws {
        let atom = &d.predictive_atom;
        let mut y = Vec::with_capacity(horizon);
        for j in 0..horizon {
            let regs = lag_regressors(&y, spec);
            let mut mu = atom.m0;
            for (l, v) in regs.iter().enumerate() {
                mu += atom.lags[l] * v;
            }
            let alpha = sample_normal(rng, mu, d.tau);
            let beta = if meta.shared_beta { &d.beta[0] } else { &d.beta[j] };
            let xb: f64 = profile[j].iter().zip(beta).map(|(x, b)| x * b).sum();
            y.push(sample_normal(rng, xb + alpha, d.sigma));
        }
        out.push(y);
    }
    Ok(out)
}

/// Per-gap summary of predictive trajectories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictiveGapSummary {
    pub gap_index: usize,
    pub summary: ScalarSummary,
    pub skewness: Option<f64>,
}

pub fn summarize_trajectories(paths: &[Vec<f64>]) -> Vec<PredictiveGapSummary> {
    let horizon = paths.first().map_or(0, |p| p.len());
    (0..horizon)
        .map(|j| {
            let v: Vec<f64> = paths.iter().map(|p| p[j]).collect();
            PredictiveGapSummary {
                gap_index: j + 1,
                summary: ScalarSummary::of(&v),
                skewness: skewness(&v),
            }
        })
        .collect()
}

fn autocovariance(x: &[f64], m: f64, lag: usize) -> f64 {
    let n = x.len();
    (0..n - lag).map(|t| (x[t] - m) * (x[t + lag] - m)).sum::<f64>() / n as f64
}

/// Asymptotic variance of the sample mean times `n`, by Geyer's initial
/// monotone sequence estimator. `None` for constant input.
pub fn long_run_variance(x: &[f64]) -> Option<f64> {
    let n = x.len();
    if n < 4 {
        return None;
    }
    let m = mean(x);
    let g0 = autocovariance(x, m, 0);
    if g0 <= 0.0 || !g0.is_finite() {
        return None;
    }
    let mut total = -g0;
    let mut prev = f64::INFINITY;
    let mut k = 0;
    while 2 * k + 1 < n {
        let pair = autocovariance(x, m, 2 * k) + autocovariance(x, m, 2 * k + 1);
        if pair <= 0.0 {
            break;
        }
        let pair = pair.min(prev);
        total += 2.0 * pair;
        prev = pair;
        k += 1;
    }
    Some(total.max(g0 / n as f64))
}

/// Effective sample size, capped at the number of draws. `None` for a
/// constant chain.
pub fn ess(x: &[f64]) -> Option<f64> {
    let g0 = autocovariance(x, mean(x), 0);
    long_run_variance(x).map(|lrv| (x.len() as f64 * g0 / lrv).min(x.len() as f64))
}

/// Geweke z-score comparing the first 10% and the last 50% of the chain.
pub fn geweke_z(x: &[f64]) -> Option<f64> {
    let n = x.len();
    let a = &x[..n / 10];
    let b = &x[n - n / 2..];
    let va = long_run_variance(a)? / a.len() as f64;
    let vb = long_run_variance(b)? / b.len() as f64;
    Some((mean(a) - mean(b)) / (va + vb).sqrt())
}

/// Potential scale reduction over chains of equal length.
pub fn rhat(chains: &[&[f64]]) -> Option<f64> {
    let m = chains.len();
    let n = chains.iter().map(|c| c.len()).min()?;
    if m < 2 || n < 2 {
        return None;
    }
    let means: Vec<f64> = chains.iter().map(|c| mean(&c[..n])).collect();
    let w = chains.iter().map(|c| variance(&c[..n])).sum::<f64>() / m as f64;
    if w <= 0.0 {
        return None;
    }
    let b = n as f64 * variance(&means);
    let var_plus = (n as f64 - 1.0) / n as f64 * w + b / n as f64;
    Some((var_plus / w).sqrt())
}

/// R-hat with each chain split into halves.
pub fn split_rhat(chains: &[&[f64]]) -> Option<f64> {
    let halves: Vec<&[f64]> = chains
        .iter()
        .flat_map(|c| {
            let h = c.len() / 2;
            [&c[..h], &c[c.len() - h..]]
        })
        .collect();
    rhat(&halves)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarDiagnostics {
    pub name: String,
    /// `None` when the chain is constant.
    pub ess: Option<f64>,
    pub geweke_z: Option<f64>,
    pub split_rhat: Option<f64>,
}

/// ESS, Geweke z and split R-hat for every scalar of every chain, pooling
/// chains for R-hat.
pub fn diagnostics(stores: &[DrawStore]) -> Result<Vec<ScalarDiagnostics>> {
    let Some(first) = stores.first() else {
        return Err(Error::InvalidData("no draw stores".into()));
    };
    for s in stores {
        if s.len() < MIN_DIAGNOSTIC_DRAWS {
            return Err(Error::InvalidData(format!(
                "diagnostics need at least {MIN_DIAGNOSTIC_DRAWS} draws, chain {} has {}",
                s.meta.chain,
                s.len()
            )));
        }
    }
    let mut names: Vec<String> = DrawStore::SCALARS.iter().map(|s| s.to_string()).collect();
    for r in 0..first.meta.q {
        for j in 0..first.draws[0].beta.len() {
            names.push(format!("beta[{},{}]", first.meta.covariate_names[r], j + 1));
        }
    }
    let series = |s: &DrawStore, name: &str| -> Vec<f64> {
        s.scalar(name).unwrap_or_else(|| {
            let inner = &name[5..name.len() - 1];
            let (cov, j) = inner.rsplit_once(',').expect("beta name");
            let r = s
                .meta
                .covariate_names
                .iter()
                .position(|c| c == cov)
                .expect("known covariate");
            let j: usize = j.parse().expect("gap index");
            s.draws.iter().map(|d| d.beta[j - 1][r]).collect()
        })
    };
    Ok(names
        .iter()
        .map(|name| {
            let per_chain: Vec<Vec<f64>> = stores.iter().map(|s| series(s, name)).collect();
            let pooled: Vec<f64> = per_chain.concat();
            let refs: Vec<&[f64]> = per_chain.iter().map(|c| c.as_slice()).collect();
            ScalarDiagnostics {
                name: name.clone(),
                ess: per_chain.iter().map(|c| ess(c)).sum::<Option<f64>>(),
                geweke_z: geweke_z(&per_chain[0]),
                split_rhat: split_rhat(&refs).filter(|_| variance(&pooled) > 0.0),
            }
        })
        .collect())
}

/// Kolmogorov–Smirnov statistic and asymptotic p-value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// `P(K > x)` for the Kolmogorov distribution.
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 1.0 {
        // small-x form converges faster here
        let t = -std::f64::consts::PI.powi(2) / (8.0 * x * x);
        let s: f64 = (1..=50).map(|k| ((2 * k - 1) as f64).powi(2) * t).map(f64::exp).sum();
        return (1.0 - (2.0 * std::f64::consts::PI).sqrt() / x * s).clamp(0.0, 1.0);
    }
    let s: f64 = (1..=100)
        .map(|k| {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            sign * (-2.0 * (k * k) as f64 * x * x).exp()
        })
        .sum();
    (2.0 * s).clamp(0.0, 1.0)
}

fn ks_p(d: f64, n_eff: f64) -> f64 {
    let s = n_eff.sqrt();
    kolmogorov_sf((s + 0.12 + 0.11 / s) * d)
}

/// One-sample test of `x` against the continuous CDF `cdf`.
pub fn ks_one_sample(x: &[f64], cdf: impl Fn(f64) -> f64) -> KsResult {
    let s = sorted(x);
    let n = s.len() as f64;
    let mut d: f64 = 0.0;
    for (k, &v) in s.iter().enumerate() {
        let f = cdf(v);
        d = d.max((k as f64 + 1.0) / n - f).max(f - k as f64 / n);
    }
    KsResult {
        statistic: d,
        p_value: ks_p(d, n),
    }
}

/// Two-sample test. Ties are handled by stepping past equal values.
pub fn ks_two_sample(x: &[f64], y: &[f64]) -> KsResult {
    let a = sorted(x);
    let b = sorted(y);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    KsResult {
        statistic: d,
        p_value: ks_p(d, n * m / (n + m)),
    }
}

/// Summary of one atom coordinate for the JSON report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomSummary {
    pub coordinate: usize,
    pub summary: ScalarSummary,
    pub bandwidth: f64,
    pub modes: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSummary {
    pub draws: usize,
    pub chains: usize,
    pub scalars: BTreeMap<String, ScalarSummary>,
    pub k_histogram: BTreeMap<usize, f64>,
    pub order_histogram: BTreeMap<usize, f64>,
    pub inclusion: Vec<f64>,
    pub atoms: Vec<AtomSummary>,
    pub beta: Vec<BetaInterval>,
    /// Posterior mean weight of the last stick; the truncation is adequate
    /// when it is below 0.01.
    pub last_weight_mean: f64,
    pub truncation_adequate: bool,
    pub diagnostics: Option<Vec<ScalarDiagnostics>>,
}

/// Full summary of one or more chains of the same model. Diagnostics are
/// omitted when a chain is too short for them.
pub fn summarize(stores: &[DrawStore]) -> Result<PosteriorSummary> {
    let pooled = DrawStore::pooled(stores)?;
    require_draws(&pooled)?;
    let scalars = DrawStore::SCALARS
        .iter()
        .map(|name| {
            (
                name.to_string(),
                ScalarSummary::of(&pooled.scalar(name).expect("known")),
            )
        })
        .collect();
    let atoms = (0..=pooled.meta.lag_slots)
        .map(|c| {
            let d = predictive_atom_density(&pooled, c)?;
            Ok(AtomSummary {
                coordinate: c,
                summary: ScalarSummary::of(&d.draws),
                bandwidth: d.bandwidth,
                modes: d.modes,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let last_weight_mean = mean(&pooled.scalar("last_weight").expect("known"));
    Ok(PosteriorSummary {
        draws: pooled.len(),
        chains: stores.len(),
        scalars,
        k_histogram: k_posterior(&pooled)?,
        order_histogram: order_posterior(&pooled)?,
        inclusion: inclusion_probabilities(&pooled)?,
        atoms,
        beta: beta_credible_intervals(&pooled)?,
        last_weight_mean,
        truncation_adequate: last_weight_mean < 0.01,
        diagnostics: diagnostics(stores).ok(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use statrs::distribution::{ContinuousCDF, Normal};

    #[test]
    fn quantiles_interpolate() {
        let s = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&s, 0.0), 1.0);
        assert_eq!(quantile_sorted(&s, 1.0), 4.0);
        assert!((quantile_sorted(&s, 0.5) - 2.5).abs() < 1e-15);
    }

    #[test]
    fn kolmogorov_branches_agree() {
        for &x in &[0.3, 0.6, 0.9, 1.0, 1.36, 2.0] {
            let p = kolmogorov_sf(x);
            assert!((0.0..=1.0).contains(&p));
        }
        assert!((kolmogorov_sf(1.358) - 0.05).abs() < 1e-3);
        assert!((kolmogorov_sf(1.628) - 0.01).abs() < 1e-3);
        let below = kolmogorov_sf(1.0 - 1e-9);
        let above = kolmogorov_sf(1.0 + 1e-9);
        assert!((below - above).abs() < 1e-6);
    }

    #[test]
    fn ks_accepts_normal_rejects_shift() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x: Vec<f64> = (0..2000).map(|_| sample_normal(&mut rng, 0.0, 1.0)).collect();
        let n = Normal::new(0.0, 1.0).unwrap();
        assert!(ks_one_sample(&x, |v| n.cdf(v)).p_value > 0.01);
        assert!(ks_one_sample(&x, |v| n.cdf(v - 0.2)).p_value < 1e-4);
        let y: Vec<f64> = (0..2000).map(|_| sample_normal(&mut rng, 0.0, 1.0)).collect();
        assert!(ks_two_sample(&x, &y).p_value > 0.01);
        let z: Vec<f64> = y.iter().map(|v| v + 0.2).collect();
        assert!(ks_two_sample(&x, &z).p_value < 1e-3);
    }

    #[test]
    fn iid_ess_and_geweke() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x: Vec<f64> = (0..5000).map(|_| sample_normal(&mut rng, 0.0, 1.0)).collect();
        let e = ess(&x).unwrap();
        assert!((e - 5000.0).abs() < 750.0, "{e}");
        assert!(geweke_z(&x).unwrap().abs() < 3.0);
    }

    #[test]
    fn ar1_ess() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let rho: f64 = 0.9;
        let n = 20_000;
        let mut x = Vec::with_capacity(n);
        let mut v = 0.0;
        for _ in 0..n {
            v = rho * v + (1.0 - rho * rho).sqrt() * sample_normal(&mut rng, 0.0, 1.0);
            x.push(v);
        }
        let expected = n as f64 * (1.0 - rho) / (1.0 + rho);
        let e = ess(&x).unwrap();
        assert!((e - expected).abs() < 0.25 * expected, "{e} vs {expected}");
    }

    #[test]
    fn constant_chain_flagged() {
        let x = vec![1.5; 200];
        assert!(ess(&x).is_none());
        assert!(geweke_z(&x).is_none());
        assert!(rhat(&[&x[..100], &x[100..]]).is_none());
    }

    #[test]
    fn rhat_detects_separation() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a: Vec<f64> = (0..500).map(|_| sample_normal(&mut rng, 0.0, 1.0)).collect();
        let b: Vec<f64> = (0..500).map(|_| sample_normal(&mut rng, 0.0, 1.0)).collect();
        let c: Vec<f64> = b.iter().map(|v| v + 3.0).collect();
        assert!(split_rhat(&[&a, &b]).unwrap() < 1.05);
        assert!(rhat(&[&a, &c]).unwrap() > 1.5);
    }

    #[test]
    fn bimodal_kde() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x: Vec<f64> = (0..4000)
            .map(|k| sample_normal(&mut rng, if k % 2 == 0 { -0.9 } else { 0.9 }, 0.05))
            .collect();
        let d = density_of(1, x);
        assert_eq!(d.modes.len(), 2, "{:?}", d.modes);
        assert!((d.modes[0] + 0.9).abs() < 0.05 && (d.modes[1] - 0.9).abs() < 0.05);
    }

    #[test]
    fn constant_density() {
        let d = density_of(0, vec![0.0; 50]);
        assert_eq!(d.bandwidth, 0.0);
        assert_eq!(d.modes, vec![0.0]);
        assert_eq!((d.q05, d.q50, d.q95), (0.0, 0.0, 0.0));
    }

    #[test]
    fn skewness_sign() {
        assert!(skewness(&[0.0, 0.0, 0.0, 10.0]).unwrap() > 0.0);
        assert!(skewness(&[1.0, 1.0]).is_none());
    }
}
