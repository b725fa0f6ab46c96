//! Split–merge Metropolis–Hastings move on cluster allocations.
//!
//! Runs with the random effects and the stick fractions integrated out, so
//! the allocation prior is the truncated stick-breaking partition law. A
//! pair of subjects is drawn; if they share a cluster, it is split into an
//! empty cluster, otherwise the first subject's cluster is merged into the
//! second's. Splits are guided by a launch state built from restricted
//! scans, and atom coefficients are proposed from [`AtomProposal`].

use rand::seq::IndexedRandom;
use rand::Rng;
use statrs::function::beta::ln_beta;

use crate::model::{active_order, Atom, ChainState};

use super::blocks::{base_logpdf, free_coordinates, get_coordinates, set_coordinates, AtomProposal, BlockCounters};
use super::Gibbs;

/// Restricted allocation scans used to build the launch state.
const LAUNCH_SCANS: usize = 3;

/// `ln p(z | M)` with the stick fractions integrated out.
pub(crate) fn log_partition_prior(counts: &[usize], concentration: f64) -> f64 {
    let mut tail: usize = counts.iter().sum();
    let mut total = 0.0;
    for &n in counts.iter().take(counts.len().saturating_sub(1)) {
        tail -= n;
        total += ln_beta(1.0 + n as f64, concentration + tail as f64) + concentration.ln();
    }
    total
}

/// Context shared by the proposals of one move.
struct Move<'g, 'a> {
    gibbs: &'g Gibbs<'a>,
    state: &'g ChainState,
    active: usize,
    var: f64,
}

impl Move<'_, '_> {
    fn loglik(&self, i: usize, atom: &Atom) -> f64 {
        self.gibbs.alpha_kernel(self.state, i, atom, self.active, self.var)
    }

    fn group_loglik(&self, members: &[usize], atom: &Atom) -> f64 {
        members.iter().map(|&i| self.loglik(i, atom)).sum()
    }

    fn proposal(&self, members: &[usize], idx: &[usize]) -> Option<AtomProposal> {
        let stats = self.gibbs.cluster_stats(self.state, members);
        AtomProposal::new(&stats, self.var, idx, &self.gibbs.model.hyper)
    }

    /// Draws an atom from the proposal for `members`, with lag coefficients
    /// clamped into the support.
    fn launch_atom<R: Rng + ?Sized>(&self, rng: &mut R, template: &Atom, members: &[usize]) -> Option<Atom> {
        let idx = free_coordinates(template, self.active);
        let q = self.proposal(members, &idx)?;
        let mut v = q.sample(rng);
        for x in v.iter_mut().skip(1) {
            *x = x.clamp(-0.99, 0.99);
        }
        let mut atom = template.clone();
        set_coordinates(&mut atom, &idx, &v);
        Some(atom)
    }

    /// Launch atoms for a split with `i` in the first part and `j` in the
    /// second. Depends only on `i`, `j`, the set `rest` and the templates.
    fn launch<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        i: usize,
        j: usize,
        rest: &[usize],
        templates: (&Atom, &Atom),
    ) -> Option<(Atom, Atom)> {
        let mut ta = self.launch_atom(rng, templates.0, &[i])?;
        let mut tb = self.launch_atom(rng, templates.1, &[j])?;
        for _ in 0..LAUNCH_SCANS {
            let mut part_a = vec![i];
            let mut part_b = vec![j];
            for &k in rest {
                if rng.random::<f64>() < self.prob_first(k, &ta, &tb) {
                    part_a.push(k);
                } else {
                    part_b.push(k);
                }
            }
            ta = self.launch_atom(rng, templates.0, &part_a)?;
            tb = self.launch_atom(rng, templates.1, &part_b)?;
        }
        Some((ta, tb))
    }

    fn prob_first(&self, k: usize, ta: &Atom, tb: &Atom) -> f64 {
        let d = self.loglik(k, tb) - self.loglik(k, ta);
        1.0 / (1.0 + d.exp())
    }
}

impl Gibbs<'_> {
    /// Attempts `tuning.split_merge_moves` split–merge proposals. Only
    /// defined when the random effects are integrated out.
    pub fn split_merge<R: Rng + ?Sized>(&self, state: &mut ChainState, rng: &mut R, counters: &mut BlockCounters) {
        let n = self.data.n_subjects();
        if !self.tuning.collapse_alpha || n < 2 || state.atoms.len() < 2 {
            return;
        }
        for _ in 0..self.tuning.split_merge_moves {
            let i = rng.random_range(0..n);
            let mut j = rng.random_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            let accepted = if state.z[i] == state.z[j] {
                self.try_split(state, rng, i, j)
            } else {
                self.try_merge(state, rng, i, j)
            };
            if accepted {
                counters.split_merge_accepts += 1;
            }
        }
    }

    fn counts(state: &ChainState) -> Vec<usize> {
        let mut c = vec![0usize; state.atoms.len()];
        for &h in &state.z {
            c[h] += 1;
        }
        c
    }

    fn try_split<R: Rng + ?Sized>(&self, state: &mut ChainState, rng: &mut R, i: usize, j: usize) -> bool {
        let hyper = &self.model.hyper;
        let c = state.z[i];
        let counts = Self::counts(state);
        let empties: Vec<usize> = (0..counts.len()).filter(|&h| counts[h] == 0).collect();
        let Some(&e) = empties.choose(rng) else {
            return false;
        };
        let mv = Move {
            gibbs: self,
            state,
            active: active_order(self.spec(), state),
            var: self.response_var(state),
        };
        let all: Vec<usize> = (0..state.z.len()).filter(|&k| state.z[k] == c).collect();
        let rest: Vec<usize> = all.iter().copied().filter(|&k| k != i && k != j).collect();
        let (atom_e, atom_c) = (&state.atoms[e], &state.atoms[c]);
        let Some((ta, tb)) = mv.launch(rng, i, j, &rest, (atom_e, atom_c)) else {
            return false;
        };

        let mut log_fwd = -(empties.len() as f64).ln();
        let mut part_a = vec![i];
        let mut part_b = vec![j];
        for &k in &rest {
            let p = mv.prob_first(k, &ta, &tb);
            if rng.random::<f64>() < p {
                part_a.push(k);
                log_fwd += p.ln();
            } else {
                part_b.push(k);
                log_fwd += (1.0 - p).ln();
            }
        }
        let idx_e = free_coordinates(atom_e, mv.active);
        let idx_c = free_coordinates(atom_c, mv.active);
        let (Some(qa), Some(qb), Some(qs)) = (
            mv.proposal(&part_a, &idx_e),
            mv.proposal(&part_b, &idx_c),
            mv.proposal(&all, &idx_c),
        ) else {
            return false;
        };
        let va = qa.sample(rng);
        let vb = qb.sample(rng);
        if va[1..].iter().chain(&vb[1..]).any(|m| m.abs() >= 1.0) {
            return false;
        }
        let mut new_e = atom_e.clone();
        set_coordinates(&mut new_e, &idx_e, &va);
        let mut new_c = atom_c.clone();
        set_coordinates(&mut new_c, &idx_c, &vb);
        log_fwd += qa.logpdf(&va) + qb.logpdf(&vb);
        let log_rev = qs.logpdf(&get_coordinates(atom_c, &idx_c));

        let mut new_counts = counts.clone();
        new_counts[e] = part_a.len();
        new_counts[c] = part_b.len();
        let log_target = mv.group_loglik(&part_a, &new_e) + mv.group_loglik(&part_b, &new_c)
            - mv.group_loglik(&all, atom_c)
            + log_partition_prior(&new_counts, state.concentration)
            - log_partition_prior(&counts, state.concentration)
            + base_logpdf(&new_e, &idx_e, hyper)
            + base_logpdf(&new_c, &idx_c, hyper)
            - base_logpdf(atom_c, &idx_c, hyper);
        let log_acc = log_target + log_rev - log_fwd;
        if log_acc >= 0.0 || rng.random::<f64>().ln() < log_acc {
            for &k in &part_a {
                state.z[k] = e;
            }
            state.atoms[e] = new_e;
            state.atoms[c] = new_c;
            true
        } else {
            false
        }
    }

    fn try_merge<R: Rng + ?Sized>(&self, state: &mut ChainState, rng: &mut R, i: usize, j: usize) -> bool {
        let hyper = &self.model.hyper;
        let (a, b) = (state.z[i], state.z[j]);
        let counts = Self::counts(state);
        let mv = Move {
            gibbs: self,
            state,
            active: active_order(self.spec(), state),
            var: self.response_var(state),
        };
        let part_a: Vec<usize> = (0..state.z.len()).filter(|&k| state.z[k] == a).collect();
        let part_b: Vec<usize> = (0..state.z.len()).filter(|&k| state.z[k] == b).collect();
        let all: Vec<usize> = (0..state.z.len())
            .filter(|&k| state.z[k] == a || state.z[k] == b)
            .collect();
        let rest: Vec<usize> = all.iter().copied().filter(|&k| k != i && k != j).collect();
        let (atom_a, atom_b) = (&state.atoms[a], &state.atoms[b]);
        let idx_a = free_coordinates(atom_a, mv.active);
        let idx_b = free_coordinates(atom_b, mv.active);
        let (Some(qa), Some(qb), Some(qs)) = (
            mv.proposal(&part_a, &idx_a),
            mv.proposal(&part_b, &idx_b),
            mv.proposal(&all, &idx_b),
        ) else {
            return false;
        };
        let vs = qs.sample(rng);
        if vs[1..].iter().any(|m| m.abs() >= 1.0) {
            return false;
        }
        let mut new_b = atom_b.clone();
        set_coordinates(&mut new_b, &idx_b, &vs);
        let log_fwd = qs.logpdf(&vs);

        let Some((ta, tb)) = mv.launch(rng, i, j, &rest, (atom_a, atom_b)) else {
            return false;
        };
        let empties_after = counts.iter().filter(|&&c| c == 0).count() + 1;
        let mut log_rev = -(empties_after as f64).ln();
        for &k in &rest {
            let p = mv.prob_first(k, &ta, &tb);
            log_rev += if state.z[k] == a { p.ln() } else { (1.0 - p).ln() };
        }
        log_rev += qa.logpdf(&get_coordinates(atom_a, &idx_a)) + qb.logpdf(&get_coordinates(atom_b, &idx_b));

        let mut new_counts = counts.clone();
        new_counts[a] = 0;
        new_counts[b] = all.len();
        let log_target =
            mv.group_loglik(&all, &new_b) - mv.group_loglik(&part_a, atom_a) - mv.group_loglik(&part_b, atom_b)
                + log_partition_prior(&new_counts, state.concentration)
                - log_partition_prior(&counts, state.concentration)
                + base_logpdf(&new_b, &idx_b, hyper)
                - base_logpdf(atom_b, &idx_b, hyper)
                - base_logpdf(atom_a, &idx_a, hyper);
        let log_acc = log_target + log_rev - log_fwd;
        if log_acc >= 0.0 || rng.random::<f64>().ln() < log_acc {
            let mut fresh = atom_a.clone();
            let prior = Atom::sample_prior(rng, fresh.lags.len(), hyper, None);
            let prior_values = get_coordinates(&prior, &idx_a);
            set_coordinates(&mut fresh, &idx_a, &prior_values);
            for &k in &part_a {
                state.z[k] = b;
            }
            state.atoms[a] = fresh;
            state.atoms[b] = new_b;
            true
        } else {
            false
        }
    }
}
