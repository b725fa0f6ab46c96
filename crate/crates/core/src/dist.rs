//! Densities and random draws used by the sampler blocks.

use rand::Rng;
use rand_distr::{Beta, Distribution, StandardNormal};
use statrs::function::{beta::ln_beta, erf, gamma::gamma_lr};

pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_7;

pub fn normal_logpdf(x: f64, mean: f64, sd: f64) -> f64 {
    let z = (x - mean) / sd;
    -0.5 * z * z - sd.ln() - LN_SQRT_2PI
}

/// Standard normal upper tail `P(Z > z)`.
pub fn normal_sf(z: f64) -> f64 {
    0.5 * erf::erfc(z / std::f64::consts::SQRT_2)
}

pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erf::erfc(-z / std::f64::consts::SQRT_2)
}

/// Log of the standard normal upper tail, accurate far into the tail.
pub fn normal_log_sf(z: f64) -> f64 {
    let q = normal_sf(z);
    if q > 1e-300 {
        q.ln()
    } else {
        // Mills-ratio asymptotic series.
        let z2 = z * z;
        -0.5 * z2 - z.ln() - LN_SQRT_2PI + (1.0 - 1.0 / z2 + 3.0 / (z2 * z2)).ln()
    }
}

/// Log density of the Beta(a, b) law translated to (-1, 1).
pub fn tbeta_logpdf(y: f64, a: f64, b: f64) -> f64 {
    if !(y > -1.0 && y < 1.0) {
        return f64::NEG_INFINITY;
    }
    (a - 1.0) * (1.0 + y).ln() + (b - 1.0) * (1.0 - y).ln() - ln_beta(a, b) - (a + b - 1.0) * std::f64::consts::LN_2
}

pub fn sample_tbeta<R: Rng + ?Sized>(rng: &mut R, a: f64, b: f64) -> f64 {
    let beta = Beta::new(a, b).expect("tbeta shapes validated upstream");
    loop {
        let y = 2.0 * beta.sample(rng) - 1.0;
        if y > -1.0 && y < 1.0 {
            return y;
        }
    }
}

pub fn sample_normal<R: Rng + ?Sized>(rng: &mut R, mean: f64, sd: f64) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    mean + sd * z
}

/// Uniform draw in the open interval (0, 1).
pub fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

/// Outcome of a lower-truncated normal draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedDraw {
    pub value: f64,
    /// The tail mass was below `1e-300` and an exponential tail
    /// approximation was used.
    pub approximated: bool,
}

/// Draws from `Normal(mean, sd²)` truncated to `(lower, ∞)` by inverting
/// the upper-tail function.
pub fn sample_normal_lower_truncated<R: Rng + ?Sized>(rng: &mut R, mean: f64, sd: f64, lower: f64) -> TruncatedDraw {
    let a = (lower - mean) / sd;
    let u = open_unit(rng);
    if a < 0.0 {
        // Invert the CDF side when most mass is above; avoids cancellation.
        let lo = normal_cdf(a);
        let p = lo + u * (1.0 - lo);
        // p in (lo, 1): z = Φ^{-1}(p) = -√2 erfc_inv(2p)
        let z = -std::f64::consts::SQRT_2 * erf::erfc_inv(2.0 * p);
        let z = if z.is_finite() { z.max(a) } else { a };
        return TruncatedDraw {
            value: mean + sd * z,
            approximated: false,
        };
    }
    let tail = normal_sf(a);
    if tail < 1e-300 {
        // Exponential tail with rate a.
        let e = -open_unit(rng).ln() / a.max(1e-12);
        return TruncatedDraw {
            value: lower + sd * e,
            approximated: true,
        };
    }
    let z = std::f64::consts::SQRT_2 * erf::erfc_inv(2.0 * u * tail);
    let z = if z.is_finite() { z.max(a) } else { a };
    TruncatedDraw {
        value: mean + sd * z,
        approximated: false,
    }
}

/// Draws from `Gamma(shape, rate)` truncated to `(0, upper)` by inverse CDF.
/// A non-positive rate degenerates to the density `∝ x^{shape-1}`.
pub fn sample_truncated_gamma<R: Rng + ?Sized>(rng: &mut R, shape: f64, rate: f64, upper: f64) -> f64 {
    let u = open_unit(rng);
    if rate <= 1e-300 {
        return upper * u.powf(1.0 / shape);
    }
    let cdf = |x: f64| gamma_lr(shape, rate * x);
    let top = if upper.is_finite() { cdf(upper) } else { 1.0 };
    let target = u * top;
    // Bracket, then bisect.
    let mut hi = if upper.is_finite() {
        upper
    } else {
        let mut h = (shape / rate).max(1e-12);
        while cdf(h) < target {
            h *= 2.0;
        }
        h
    };
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Draws an index with probabilities proportional to `exp(log_weights)`.
pub fn sample_log_categorical<R: Rng + ?Sized>(rng: &mut R, log_weights: &[f64]) -> usize {
    let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        // Every weight underflowed or is -inf; fall back to uniform.
        return rng.random_range(0..log_weights.len());
    }
    let total: f64 = log_weights.iter().map(|w| (w - max).exp()).sum();
    let mut u = rng.random::<f64>() * total;
    for (k, w) in log_weights.iter().enumerate() {
        let p = (w - max).exp();
        if u < p {
            return k;
        }
        u -= p;
    }
    log_weights
        .iter()
        .rposition(|w| (w - max).exp() > 0.0)
        .unwrap_or(log_weights.len() - 1)
}

#[derive(Debug, Clone, Copy)]
pub struct SliceConfig {
    pub width: f64,
    pub max_step_out: usize,
    pub max_shrink: usize,
}

impl Default for SliceConfig {
    fn default() -> Self {
        SliceConfig {
            width: 0.2,
            max_step_out: 50,
            max_shrink: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceOutcome {
    pub value: f64,
    /// Shrinkage ran out of steps and the current value was kept.
    pub rejected: bool,
}

/// Univariate slice sampler with stepping out and shrinkage on `(lower, upper)`.
pub fn slice_sample<R, F>(
    rng: &mut R,
    x0: f64,
    log_density: F,
    lower: f64,
    upper: f64,
    cfg: &SliceConfig,
) -> SliceOutcome
where
    R: Rng + ?Sized,
    F: Fn(f64) -> f64,
{
    let f0 = log_density(x0);
    debug_assert!(f0.is_finite(), "slice sampler started outside support");
    let level = f0 - (-open_unit(rng).ln());

    let mut left = x0 - cfg.width * rng.random::<f64>();
    let mut right = left + cfg.width;
    let budget = cfg.max_step_out;
    let mut j = rng.random_range(0..budget.max(1));
    let mut k = budget.saturating_sub(1) - j.min(budget.saturating_sub(1));
    while j > 0 && left > lower && log_density(left) > level {
        left -= cfg.width;
        j -= 1;
    }
    while k > 0 && right < upper && log_density(right) > level {
        right += cfg.width;
        k -= 1;
    }
    left = left.max(lower);
    right = right.min(upper);

    for _ in 0..cfg.max_shrink {
        let x = left + (right - left) * rng.random::<f64>();
        if x > lower && x < upper && log_density(x) > level {
            return SliceOutcome {
                value: x,
                rejected: false,
            };
        }
        if x < x0 {
            left = x;
        } else {
            right = x;
        }
    }
    SliceOutcome {
        value: x0,
        rejected: true,
    }
}

/// Gaussian-tilted TBeta: the density on (-1, 1) proportional to
/// `exp(b·m − a·m²/2) · TBeta(m; shape_a, shape_b)`, tabulated on a fine
/// grid. Supplies both the normalizer relative to `m = 0` and exact
/// (up to quadrature) inverse-CDF draws.
pub struct TiltedTBeta {
    nodes: Vec<f64>,
    cumulative: Vec<f64>,
    /// ln ∫ exp(b m − a m²/2) TBeta(m) dm
    pub log_mass: f64,
}

const TILT_NODES: usize = 2049;

impl TiltedTBeta {
    pub fn new(lin: f64, quad: f64, shape_a: f64, shape_b: f64) -> Self {
        let exponent = |m: f64| lin * m - 0.5 * quad * m * m;
        // Integration window: the Gaussian factor's effective support
        // intersected with (-1, 1).
        let (mut lo, mut hi) = (-1.0, 1.0);
        let peak = if quad > 0.0 {
            (lin / quad).clamp(-1.0, 1.0)
        } else if lin > 0.0 {
            1.0
        } else if lin < 0.0 {
            -1.0
        } else {
            0.0
        };
        if quad > 0.0 {
            let half = 14.0 / quad.sqrt();
            lo = (peak - half).max(-1.0);
            hi = (peak + half).min(1.0);
        }
        // Keep the nodes strictly inside the open support.
        let eps = 1e-12;
        lo = lo.max(-1.0 + eps);
        hi = hi.min(1.0 - eps);
        if hi <= lo {
            let c = peak.clamp(-1.0 + eps, 1.0 - eps);
            lo = (c - 1e-9).max(-1.0 + eps);
            hi = (c + 1e-9).min(1.0 - eps);
        }
        let shift = exponent(peak);
        let step = (hi - lo) / (TILT_NODES - 1) as f64;
        let nodes: Vec<f64> = (0..TILT_NODES).map(|k| lo + step * k as f64).collect();
        let values: Vec<f64> = nodes
            .iter()
            .map(|&m| (exponent(m) - shift + tbeta_logpdf(m, shape_a, shape_b)).exp())
            .collect();
        let mut cumulative = Vec::with_capacity(TILT_NODES);
        cumulative.push(0.0);
        for k in 1..TILT_NODES {
            let area = 0.5 * step * (values[k - 1] + values[k]);
            cumulative.push(cumulative[k - 1] + area);
        }
        // Simpson for the normalizer; the trapezoid table is only used to invert.
        let mut simpson = values[0] + values[TILT_NODES - 1];
        for (k, v) in values.iter().enumerate().take(TILT_NODES - 1).skip(1) {
            simpson += if k % 2 == 1 { 4.0 * v } else { 2.0 * v };
        }
        simpson *= step / 3.0;
        let mass = if simpson > 0.0 {
            simpson
        } else {
            cumulative[TILT_NODES - 1]
        };
        TiltedTBeta {
            nodes,
            cumulative,
            log_mass: mass.ln() + shift,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let total = *self.cumulative.last().unwrap();
        let target = rng.random::<f64>() * total;
        let k = self
            .cumulative
            .partition_point(|c| *c < target)
            .clamp(1, self.nodes.len() - 1);
        let (c0, c1) = (self.cumulative[k - 1], self.cumulative[k]);
        let t = if c1 > c0 { (target - c0) / (c1 - c0) } else { 0.5 };
        let m = self.nodes[k - 1] + t * (self.nodes[k] - self.nodes[k - 1]);
        m.clamp(-1.0 + 1e-12, 1.0 - 1e-12)
    }
}
