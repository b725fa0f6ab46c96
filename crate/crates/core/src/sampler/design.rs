use crate::data::GapTimeDataset;
use crate::model::{lag_regressors, Atom, DependenceSpec};

/// Lag regressors for every `(i, j)`, fixed for the life of a chain.
///
/// History only ever covers gaps before `j`, and a censored gap is always
/// last, so imputed values never enter a regressor.
#[derive(Debug, Clone)]
pub struct Design {
    slots: usize,
    /// Per subject, row-major `n_i × slots`.
    regressors: Vec<Vec<f64>>,
}

impl Design {
    pub fn new(data: &GapTimeDataset, spec: &DependenceSpec) -> Self {
        let slots = spec.lag_slots();
        let regressors = data
            .log_gaps()
            .iter()
            .map(|y| {
                let mut row = Vec::with_capacity(y.len() * slots);
                for j in 0..y.len() {
                    row.extend(lag_regressors(&y[..j], spec));
                }
                row
            })
            .collect();
        Design { slots, regressors }
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    #[inline]
    pub fn row(&self, i: usize, j: usize) -> &[f64] {
        &self.regressors[i][j * self.slots..(j + 1) * self.slots]
    }

    /// Conditional prior mean of `α_ij` under `atom` with `active` lags.
    #[inline]
    pub fn mean(&self, atom: &Atom, i: usize, j: usize, active: usize) -> f64 {
        let d = self.row(i, j);
        let mut m = atom.m0;
        for (l, v) in d.iter().enumerate() {
            m += atom.effective(l, active) * v;
        }
        m
    }
}
