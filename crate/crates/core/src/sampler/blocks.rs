//! Full-conditional updates. Each block mutates the chain state in place.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma, StandardNormal};

use crate::data::GapTimeDataset;
use crate::dist::{
    normal_logpdf, sample_log_categorical, sample_normal, sample_normal_lower_truncated, sample_tbeta,
    sample_truncated_gamma, slice_sample, tbeta_logpdf, SliceConfig, TiltedTBeta, LN_SQRT_2PI,
};
use crate::model::{
    active_order, dot, Atom, ChainState, ConcentrationPrior, DependenceSpec, Hyperparameters, ModelConfig, ScalePrior,
};

use super::design::Design;

/// Stick fractions are kept inside `[STICK_EPS, 1 − STICK_EPS]` so that
/// `ln(1 − V)` stays finite.
const STICK_EPS: f64 = 1e-12;

/// Event counters accumulated over a run.
#[derive(Debug, Clone, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct BlockCounters {
    pub slice_rejections: u64,
    pub tail_approximations: u64,
    pub inclusion_flips: u64,
    pub joint_accepts: u64,
    pub split_merge_accepts: u64,
}

/// Slice widths per block.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BlockTuning {
    pub atom_width: f64,
    pub scale_width: f64,
    pub max_step_out: usize,
    /// Update allocations, atoms, inclusion and order with the random
    /// effects integrated out (response `Y − xβ`, variance `σ² + τ²`), then
    /// redraw the random effects.
    #[serde(default = "yes")]
    pub collapse_alpha: bool,
    /// Add a joint Metropolis–Hastings move on each occupied atom.
    #[serde(default = "yes")]
    pub joint_atom_move: bool,
    /// Split–merge proposals per sweep (collapsed mode only).
    #[serde(default = "split_merge_default")]
    pub split_merge_moves: usize,
}

fn yes() -> bool {
    true
}

fn split_merge_default() -> usize {
    3
}

impl Default for BlockTuning {
    fn default() -> Self {
        BlockTuning {
            atom_width: 0.2,
            scale_width: 0.2,
            max_step_out: 50,
            collapse_alpha: true,
            joint_atom_move: true,
            split_merge_moves: split_merge_default(),
        }
    }
}

/// Sufficient statistics of one cluster for the atom-level conditionals,
/// over the augmented regressor `(1, d_ij)`.
#[derive(Debug, Clone)]
pub(crate) struct ClusterStats {
    pub dim: usize,
    /// Row-major `dim × dim` Gram matrix.
    pub gram: Vec<f64>,
    pub cross: Vec<f64>,
    pub sum_sq: f64,
}

impl ClusterStats {
    fn new(dim: usize) -> Self {
        ClusterStats {
            dim,
            gram: vec![0.0; dim * dim],
            cross: vec![0.0; dim],
            sum_sq: 0.0,
        }
    }

    fn add(&mut self, d: &[f64], alpha: f64) {
        let dim = self.dim;
        let x = |k: usize| if k == 0 { 1.0 } else { d[k - 1] };
        for a in 0..dim {
            let xa = x(a);
            self.cross[a] += xa * alpha;
            for b in 0..dim {
                self.gram[a * dim + b] += xa * x(b);
            }
        }
        self.sum_sq += alpha * alpha;
    }

    /// `Σ (α − θ·x)²` for coefficient vector `theta` (intercept first).
    pub fn residual_ss(&self, theta: &[f64]) -> f64 {
        let dim = self.dim;
        let mut quad = 0.0;
        for a in 0..dim {
            for b in 0..dim {
                quad += theta[a] * self.gram[a * dim + b] * theta[b];
            }
        }
        (self.sum_sq - 2.0 * dot(theta, &self.cross) + quad).max(0.0)
    }

    /// Gaussian form in coordinate `k` with the others fixed: the
    /// log-likelihood is `lin·t − quad·t²/2 + const` (before dividing by τ²).
    pub fn coordinate(&self, theta: &[f64], k: usize) -> (f64, f64) {
        let dim = self.dim;
        let mut lin = self.cross[k];
        for b in 0..dim {
            if b != k {
                lin -= self.gram[k * dim + b] * theta[b];
            }
        }
        (lin, self.gram[k * dim + k])
    }
}

fn theta_of(atom: &Atom, active: usize) -> Vec<f64> {
    let mut t = Vec::with_capacity(atom.lags.len() + 1);
    t.push(atom.m0);
    t.extend((0..atom.lags.len()).map(|l| atom.effective(l, active)));
    t
}

/// Indices into `(m0, m1, …)` of the coefficients that enter the mean:
/// the intercept and every active, included lag.
pub(crate) fn free_coordinates(atom: &Atom, active: usize) -> Vec<usize> {
    std::iter::once(0)
        .chain(
            (0..atom.lags.len())
                .filter(|&l| l < active && atom.included[l])
                .map(|l| l + 1),
        )
        .collect()
}

/// Reads the coordinates `idx` of an atom.
pub(crate) fn get_coordinates(atom: &Atom, idx: &[usize]) -> Vec<f64> {
    idx.iter()
        .map(|&u| if u == 0 { atom.m0 } else { atom.lags[u - 1] })
        .collect()
}

/// Writes the coordinates `idx` of an atom.
pub(crate) fn set_coordinates(atom: &mut Atom, idx: &[usize], values: &[f64]) {
    for (&u, &v) in idx.iter().zip(values) {
        if u == 0 {
            atom.m0 = v;
        } else {
            atom.lags[u - 1] = v;
        }
    }
}

/// Log base-measure density of the coordinates `idx` of an atom.
pub(crate) fn base_logpdf(atom: &Atom, idx: &[usize], hyper: &Hyperparameters) -> f64 {
    idx.iter()
        .map(|&u| {
            if u == 0 {
                normal_logpdf(atom.m0, 0.0, hyper.intercept_var.sqrt())
            } else {
                tbeta_logpdf(atom.lags[u - 1], hyper.tbeta_a, hyper.tbeta_b)
            }
        })
        .sum()
}

/// Gaussian approximation to the conditional of the free atom coordinates:
/// exact Gaussian likelihood and intercept prior, with each TBeta prior
/// replaced by the Normal of equal mean and variance.
pub(crate) struct AtomProposal {
    mean: DVector<f64>,
    chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
}

impl AtomProposal {
    pub fn new(stats: &ClusterStats, var: f64, idx: &[usize], hyper: &Hyperparameters) -> Option<Self> {
        let (a, b) = (hyper.tbeta_a, hyper.tbeta_b);
        let tb_mean = (a - b) / (a + b);
        let tb_var = 4.0 * a * b / ((a + b) * (a + b) * (a + b + 1.0));
        let d = idx.len();
        let dim = stats.dim;
        let mut prec = DMatrix::<f64>::zeros(d, d);
        let mut rhs = DVector::<f64>::zeros(d);
        for (r, &u) in idx.iter().enumerate() {
            rhs[r] = stats.cross[u] / var;
            for (c, &v) in idx.iter().enumerate() {
                prec[(r, c)] = stats.gram[u * dim + v] / var;
            }
        }
        for (r, &u) in idx.iter().enumerate() {
            if u == 0 {
                prec[(r, r)] += 1.0 / hyper.intercept_var;
            } else {
                prec[(r, r)] += 1.0 / tb_var;
                rhs[r] += tb_mean / tb_var;
            }
        }
        let chol = prec.cholesky()?;
        let mean = chol.solve(&rhs);
        Some(AtomProposal { mean, chol })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let d = self.mean.len();
        let z = DVector::from_fn(d, |_, _| StandardNormal.sample(rng));
        let noise = self
            .chol
            .l()
            .transpose()
            .solve_upper_triangular(&z)
            .expect("Cholesky factor has a positive diagonal");
        (&self.mean + noise).iter().copied().collect()
    }

    pub fn logpdf(&self, x: &[f64]) -> f64 {
        let d = self.mean.len();
        let diff = DVector::from_fn(d, |r, _| x[r] - self.mean[r]);
        let l = self.chol.l();
        let w = l.transpose() * diff;
        let log_det: f64 = (0..d).map(|r| l[(r, r)].ln()).sum();
        log_det - 0.5 * w.norm_squared() - d as f64 * LN_SQRT_2PI
    }
}

/// Independence Metropolis–Hastings move on the active coefficients of one
/// atom, proposing from [`AtomProposal`]. The acceptance ratio is the ratio
/// of TBeta to Normal densities. Returns whether the move was taken.
fn joint_atom_move<R: Rng + ?Sized>(
    rng: &mut R,
    atom: &mut Atom,
    stats: &ClusterStats,
    var: f64,
    active: usize,
    hyper: &Hyperparameters,
) -> bool {
    let idx = free_coordinates(atom, active);
    if idx.len() < 2 {
        return false;
    }
    let Some(q) = AtomProposal::new(stats, var, &idx, hyper) else {
        return false;
    };
    let prop = q.sample(rng);
    if prop[1..].iter().any(|m| m.abs() >= 1.0) {
        return false;
    }
    let cur = get_coordinates(atom, &idx);
    let mut proposed = atom.clone();
    set_coordinates(&mut proposed, &idx, &prop);
    let log_target = |a: &Atom| -0.5 * stats.residual_ss(&theta_of(a, active)) / var + base_logpdf(a, &idx, hyper);
    let log_acc = log_target(&proposed) - q.logpdf(&prop) - log_target(atom) + q.logpdf(&cur);
    if log_acc >= 0.0 || rng.random::<f64>().ln() < log_acc {
        *atom = proposed;
        true
    } else {
        false
    }
}

/// The blocked Gibbs sampler over one dataset and model.
pub struct Gibbs<'a> {
    pub data: &'a GapTimeDataset,
    pub model: &'a ModelConfig,
    pub design: Design,
    pub tuning: BlockTuning,
    /// Precomputed `Xᵀ X` for each β row.
    xtx: Vec<DMatrix<f64>>,
}

impl<'a> Gibbs<'a> {
    pub fn new(data: &'a GapTimeDataset, model: &'a ModelConfig, tuning: BlockTuning) -> Self {
        let design = Design::new(data, &model.dependence);
        let q = data.q();
        let rows = if model.shared_beta { 1 } else { data.max_gaps() };
        let mut xtx = vec![DMatrix::zeros(q, q); rows];
        for s in data.subjects() {
            for (j, x) in s.covariates.iter().enumerate() {
                let r = if model.shared_beta { 0 } else { j };
                let xv = DVector::from_column_slice(x);
                xtx[r] += &xv * xv.transpose();
            }
        }
        Gibbs {
            data,
            model,
            design,
            tuning,
            xtx,
        }
    }

    pub(crate) fn spec(&self) -> &DependenceSpec {
        &self.model.dependence
    }

    fn slice_cfg(&self, width: f64) -> SliceConfig {
        SliceConfig {
            width,
            max_step_out: self.tuning.max_step_out,
            ..SliceConfig::default()
        }
    }

    /// Members of each cluster.
    pub(crate) fn members(&self, state: &ChainState) -> Vec<Vec<usize>> {
        let mut m = vec![Vec::new(); state.atoms.len()];
        for (i, &h) in state.z.iter().enumerate() {
            m[h].push(i);
        }
        m
    }

    pub(crate) fn cluster_stats(&self, state: &ChainState, members: &[usize]) -> ClusterStats {
        let mut stats = ClusterStats::new(self.design.slots() + 1);
        for &i in members {
            for j in 0..state.alpha[i].len() {
                stats.add(self.design.row(i, j), self.response(state, i, j));
            }
        }
        stats
    }

    /// Response regressed on the atom: `α_ij`, or `Y_ij − x_ij·β_j` when the
    /// random effects are integrated out.
    #[inline]
    pub fn response(&self, state: &ChainState, i: usize, j: usize) -> f64 {
        if self.tuning.collapse_alpha {
            state.log_gap(self.data, i, j) - dot(&self.data.subjects()[i].covariates[j], state.beta_row(j))
        } else {
            state.alpha[i][j]
        }
    }

    /// Variance of the response around the atom mean.
    #[inline]
    pub fn response_var(&self, state: &ChainState) -> f64 {
        let t2 = state.tau * state.tau;
        if self.tuning.collapse_alpha {
            t2 + state.sigma * state.sigma
        } else {
            t2
        }
    }

    /// Latent log gap for each censored subject, drawn from the observation
    /// law truncated below at the log censoring value.
    pub fn impute_censored<R: Rng + ?Sized>(&self, state: &mut ChainState, rng: &mut R, counters: &mut BlockCounters) {
        for (i, s) in self.data.subjects().iter().enumerate() {
            if !s.censored {
                continue;
            }
            let j = s.len() - 1;
            let lower = self.data.log_gaps()[i][j];
            let mean = dot(&s.covariates[j], state.beta_row(j)) + state.alpha[i][j];
            let draw = sample_normal_lower_truncated(rng, mean, state.sigma, lower);
            if draw.approximated {
                counters.tail_approximations += 1;
            }
            state.y_imputed[i] = Some(draw.value);
        }
    }

    /// Random effects from their Gaussian conditionals, independently over
    /// `(i, j)`.
    pub fn update_alpha<R: Rng + ?Sized>(&self, state: &mut ChainState, rng: &mut R) {
        let active = active_order(self.spec(), state);
        let obs_prec = 1.0 / (state.sigma * state.sigma);
        let prior_prec = 1.0 / (state.tau * state.tau);
        let prec = obs_prec + prior_prec;
        let sd = prec.sqrt().recip();
        for (i, s) in self.data.subjects().iter().enumerate() {
            let atom = &state.atoms[state.z[i]];
            for j in 0..s.len() {
                let resid = state.log_gap(self.data, i, j) - dot(&s.covariates[j], state.beta_row(j));
                let prior_mean = self.design.mean(atom, i, j, active);
                let mean = (resid * obs_prec + prior_mean * prior_prec) / prec;
                let z: f64 = StandardNormal.sample(rng);
                state.alpha[i][j] = mean + sd * z;
            }
        }
    }

    /// Log-likelihood of subject `i`'s responses under `atom`, up to terms
    /// that do not depend on the atom.
    pub(crate) fn alpha_kernel(&self, state: &ChainState, i: usize, atom: &Atom, active: usize, var: f64) -> f64 {
        let mut ss = 0.0;
        for j in 0..state.alpha[i].len() {
            let r = self.response(state, i, j) - self.design.mean(atom, i, j, active);
            ss += r * r;
        }
        -0.5 * ss / var
    }

    /// Cluster labels from `P(z_i = h) ∝ w_h ∏_j N(r_ij; μ_ijh, v)` for
    /// response `r` and variance `v` (see [`Gibbs::response`]).
    pub fn update_allocations<R: Rng + ?Sized>(&self, state: &mut ChainState, rng: &mut R) {
        let active = active_order(self.spec(), state);
        let var = self.response_var(state);
        let log_w: Vec<f64> = state.weights().iter().map(|w| w.ln()).collect();
        let h = state.atoms.len();
        let mut logp = vec![0.0; h];
        for i in 0..self.data.n_subjects() {
            for (k, atom) in state.atoms.iter().enumerate() {
                logp[k] = if log_w[k].is_finite() {
                    log_w[k] + self.alpha_kernel(state, i, atom, active, var)
                } else {
                    f64::NEG_INFINITY
                };
            }
            state.z[i] = sample_log_categorical(rng, &logp);
        }
    }

    /// Stick fractions `V_h ~ Beta(1 + n_h, M + Σ_{l>h} n_l)`.
    pub fn update_sticks<R: Rng + ?Sized>(&self, state: &mut ChainState, rng: &mut R) {
        let h = state.atoms.len();
        let mut counts = vec![0usize; h];
        for &k in &state.z {
            counts[k] += 1;
        }
        let mut tail: usize = counts.iter().sum();
        for k in 0..h.saturating_sub(1) {
            tail -= counts[k];
            let a = 1.0 + counts[k] as f64;
            let b = state.concentration + tail as f64;
            let v = Beta::new(a, b).map(|d| d.sample(rng)).unwrap_or(0.5);
            state.sticks[k] = if v.is_finite() {
                v.clamp(STICK_EPS, 1.0 - STICK_EPS)
            } else {
                0.5
            };
        }
    }

    /// Occupied atoms: conjugate Gaussian intercept, slice-sampled lag
    /// coefficients on (-1, 1). Unoccupied atoms are redrawn from the base
    /// measure.
    pub fn update_atoms<R: Rng + ?Sized>(&self, state: &mut ChainState, rng: &mut R, counters: &mut BlockCounters) {
        let hyper = &self.model.hyper;
        let active = active_order(self.spec(), state);
        let slots = self.design.slots();
        let members = self.members(state);
        let var = self.response_var(state);
        let cfg = self.slice_cfg(self.tuning.atom_width);
        let inclusion = self.spec().is_spike_slab().then(|| state.inclusion_prob.clone());
        for (h, mem) in members.iter().enumerate() {
            if mem.is_empty() {
                state.atoms[h] = Atom::sample_prior(rng, slots, hyper, inclusion.as_deref());
                continue;
            }
            let stats = self.cluster_stats(state, mem);
            let atom = &mut state.atoms[h];
            if self.tuning.joint_atom_move && joint_atom_move(rng, atom, &stats, var, active, hyper) {
                counters.joint_accepts += 1;
            }
            let mut theta = theta_of(atom, active);

            // intercept: Gaussian likelihood × N(0, σ_g²) prior
            let (lin, quad) = stats.coordinate(&theta, 0);
            let prec = quad / var + 1.0 / hyper.intercept_var;
            let mean = (lin / var) / prec;
            atom.m0 = sample_normal(rng, mean, prec.sqrt().recip());
            theta[0] = atom.m0;

            for l in 0..slots {
                if l >= active || !atom.included[l] {
                    continue;
                }
                let (lin, quad) = stats.coordinate(&theta, l + 1);
                let (lin, quad) = (lin / var, quad / var);
                let logf = |m: f64| lin * m - 0.5 * quad * m * m + tbeta_logpdf(m, hyper.tbeta_a, hyper.tbeta_b);
                let out = slice_sample(rng, atom.lags[l], logf, -1.0, 1.0, &cfg);
                if out.rejected {
                    counters.slice_rejections += 1;
                }
                atom.lags[l] = out.value;
                theta[l + 1] = out.value;
            }
        }
    }

    /// Per-atom lag inclusion: for each occupied atom and lag, draw the
    /// indicator with the coefficient integrated out, then the coefficient
    /// given the indicator. Finally `c_l | η ~ Beta(1 + #in, 1 + #out)`.
    pub fn update_spike_slab<R: Rng + ?Sized>(
        &self,
        state: &mut ChainState,
        rng: &mut R,
        counters: &mut BlockCounters,
    ) {
        if !self.spec().is_spike_slab() {
            return;
        }
        let hyper = &self.model.hyper;
        let slots = self.design.slots();
        let active = slots;
        let members = self.members(state);
        let var = self.response_var(state);
        for (h, mem) in members.iter().enumerate() {
            if mem.is_empty() {
                continue;
            }
            let stats = self.cluster_stats(state, mem);
            let atom = &mut state.atoms[h];
            let mut theta = theta_of(atom, active);
            for l in 0..slots {
                theta[l + 1] = 0.0;
                let (lin, quad) = stats.coordinate(&theta, l + 1);
                let tilted = TiltedTBeta::new(lin / var, quad / var, hyper.tbeta_a, hyper.tbeta_b);
                let c = state.inclusion_prob[l];
                // log odds of inclusion: ln c + ln ∫ L(m)/L(0) TBeta(m) dm − ln(1 − c)
                let log_odds = c.ln() + tilted.log_mass - (1.0 - c).ln();
                let p_in = if log_odds > 0.0 {
                    1.0 / (1.0 + (-log_odds).exp())
                } else {
                    let e = log_odds.exp();
                    e / (1.0 + e)
                };
                let keep = rng.random::<f64>() < p_in;
                if keep != atom.included[l] {
                    counters.inclusion_flips += 1;
                }
                atom.included[l] = keep;
                atom.lags[l] = if keep { tilted.sample(rng) } else { 0.0 };
                theta[l + 1] = atom.lags[l];
            }
        }
        for l in 0..slots {
            let on = state.atoms.iter().filter(|a| a.included[l]).count() as f64;
            let off = state.atoms.len() as f64 - on;
            let d = Beta::new(1.0 + on, 1.0 + off).expect("positive shapes");
            state.inclusion_prob[l] = d.sample(rng).clamp(1e-12, 1.0 - 1e-12);
        }
    }

    /// Log-likelihood of all random effects for each candidate order
    /// `r = 0..=P`, over occupied clusters.
    pub fn order_loglik(&self, state: &ChainState) -> Vec<f64> {
        let slots = self.design.slots();
        let members = self.members(state);
        let var = self.response_var(state);
        let stats: Vec<(usize, ClusterStats)> = members
            .iter()
            .enumerate()
            .filter(|(_, m)| !m.is_empty())
            .map(|(h, m)| (h, self.cluster_stats(state, m)))
            .collect();
        (0..=slots)
            .map(|r| {
                stats
                    .iter()
                    .map(|(h, s)| -0.5 * s.residual_ss(&theta_of(&state.atoms[*h], r)) / var)
                    .sum()
            })
            .collect()
    }

    /// Order `p` from its discrete full conditional under a uniform prior,
    /// then lags above `p` refreshed from their TBeta prior.
    pub fn update_order<R: Rng + ?Sized>(&self, state: &mut ChainState, rng: &mut R) {
        if !self.spec().is_random_order() {
            return;
        }
        let logp = self.order_loglik(state);
        state.order = sample_log_categorical(rng, &logp);
        let hyper = &self.model.hyper;
        for atom in &mut state.atoms {
            for l in state.order..atom.lags.len() {
                atom.lags[l] = sample_tbeta(rng, hyper.tbeta_a, hyper.tbeta_b);
            }
        }
    }

    /// `β_j` from its conjugate Gaussian conditional given `Y − α`.
    pub fn update_beta<R: Rng + ?Sized>(&self, state: &mut ChainState, rng: &mut R) {
        let q = self.data.q();
        if q == 0 {
            return;
        }
        let rows = state.beta.len();
        let mut rhs = vec![DVector::<f64>::zeros(q); rows];
        for (i, s) in self.data.subjects().iter().enumerate() {
            for (j, x) in s.covariates.iter().enumerate() {
                let r = if rows == 1 { 0 } else { j };
                let resid = state.log_gap(self.data, i, j) - state.alpha[i][j];
                for (k, xv) in x.iter().enumerate() {
                    rhs[r][k] += xv * resid;
                }
            }
        }
        let s2 = state.sigma * state.sigma;
        let prior_prec = 1.0 / self.model.hyper.beta_prior_var;
        for r in 0..rows {
            let mut prec = &self.xtx[r] / s2;
            for k in 0..q {
                prec[(k, k)] += prior_prec;
            }
            let b = &rhs[r] / s2;
            let chol = prec
                .cholesky()
                .expect("prior precision keeps the matrix positive definite");
            let mean = chol.solve(&b);
            let z = DVector::from_fn(q, |_, _| StandardNormal.sample(rng));
            let noise = chol
                .l()
                .transpose()
                .solve_upper_triangular(&z)
                .expect("triangular factor is invertible");
            let draw = mean + noise;
            state.beta[r].copy_from_slice(draw.as_slice());
        }
    }

    fn observation_ss(&self, state: &ChainState) -> (f64, f64) {
        let mut n = 0.0;
        let mut ss = 0.0;
        for (i, s) in self.data.subjects().iter().enumerate() {
            for j in 0..s.len() {
                let r = state.log_gap(self.data, i, j) - dot(&s.covariates[j], state.beta_row(j)) - state.alpha[i][j];
                ss += r * r;
                n += 1.0;
            }
        }
        (n, ss)
    }

    fn alpha_ss(&self, state: &ChainState) -> (f64, f64) {
        let active = active_order(self.spec(), state);
        let mut n = 0.0;
        let mut ss = 0.0;
        for (i, alphas) in state.alpha.iter().enumerate() {
            let atom = &state.atoms[state.z[i]];
            for (j, &a) in alphas.iter().enumerate() {
                let r = a - self.design.mean(atom, i, j, active);
                ss += r * r;
                n += 1.0;
            }
        }
        (n, ss)
    }

    fn draw_scale<R: Rng + ?Sized>(
        &self,
        prior: &ScalePrior,
        current: f64,
        n: f64,
        ss: f64,
        rng: &mut R,
        counters: &mut BlockCounters,
    ) -> f64 {
        match *prior {
            ScalePrior::InvGammaVar { shape, scale } => {
                let g = Gamma::new(shape + 0.5 * n, 1.0 / (scale + 0.5 * ss)).expect("positive");
                let precision: f64 = g.sample(rng);
                precision.recip().sqrt()
            }
            ScalePrior::UniformSd { upper } => {
                let logf = |s: f64| {
                    if s <= 0.0 || s >= upper {
                        f64::NEG_INFINITY
                    } else {
                        -n * s.ln() - 0.5 * ss / (s * s)
                    }
                };
                let cfg = self.slice_cfg(self.tuning.scale_width);
                let out = slice_sample(rng, current, logf, 0.0, upper, &cfg);
                if out.rejected {
                    counters.slice_rejections += 1;
                }
                out.value
            }
        }
    }

    /// `σ` against the observation likelihood, then `τ` against the
    /// random-effect likelihood.
    pub fn update_scales<R: Rng + ?Sized>(&self, state: &mut ChainState, rng: &mut R, counters: &mut BlockCounters) {
        let hyper = &self.model.hyper;
        let (n, ss) = self.observation_ss(state);
        state.sigma = self.draw_scale(&hyper.sigma_prior, state.sigma, n, ss, rng, counters);
        let (n, ss) = self.alpha_ss(state);
        state.tau = self.draw_scale(&hyper.tau_prior, state.tau, n, ss, rng, counters);
    }

    /// Only `σ² + τ²` is identified once the random effects are integrated
    /// out, so the split between the two is moved along that circle with
    /// `α` marginalized, then `α` is redrawn.
    pub fn rotate_scales<R: Rng + ?Sized>(&self, state: &mut ChainState, rng: &mut R, counters: &mut BlockCounters) {
        let hyper = &self.model.hyper;
        let radius = state.sigma.hypot(state.tau);
        let angle = state.tau.atan2(state.sigma);
        let logf = |phi: f64| {
            if phi <= 0.0 || phi >= std::f64::consts::FRAC_PI_2 {
                return f64::NEG_INFINITY;
            }
            hyper.sigma_prior.log_density_sd(radius * phi.cos()) + hyper.tau_prior.log_density_sd(radius * phi.sin())
        };
        if !logf(angle).is_finite() {
            return;
        }
        let cfg = self.slice_cfg(self.tuning.scale_width / radius.max(1e-3));
        let out = slice_sample(rng, angle, logf, 0.0, std::f64::consts::FRAC_PI_2, &cfg);
        if out.rejected {
            counters.slice_rejections += 1;
        }
        state.sigma = radius * out.value.cos();
        state.tau = radius * out.value.sin();
        self.update_alpha(state, rng);
    }

    /// `M` from its Gamma(H, −Σ ln(1 − V_h)) conditional truncated to the
    /// prior support. Fixed `M` is left alone.
    pub fn update_concentration<R: Rng + ?Sized>(&self, state: &mut ChainState, rng: &mut R) {
        let upper = match self.model.hyper.concentration {
            ConcentrationPrior::Fixed { .. } => return,
            ConcentrationPrior::Uniform { upper } => upper,
        };
        let shape = state.atoms.len() as f64;
        let rate: f64 = -state.sticks.iter().map(|v| (1.0 - v).ln()).sum::<f64>();
        state.concentration = sample_truncated_gamma(rng, shape, rate, upper);
    }

    /// Log-likelihood kernels used by tests that compare against analytic
    /// conditionals.
    pub fn log_alpha_density(&self, state: &ChainState) -> f64 {
        let active = active_order(self.spec(), state);
        let mut ll = 0.0;
        for (i, alphas) in state.alpha.iter().enumerate() {
            let atom = &state.atoms[state.z[i]];
            for (j, &a) in alphas.iter().enumerate() {
                ll += normal_logpdf(a, self.design.mean(atom, i, j, active), state.tau);
            }
        }
        ll
    }
}
