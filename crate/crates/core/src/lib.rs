//! Bayesian nonparametric modelling of serially dependent gap times.
//!
//! Log gap times follow a regression plus a subject-specific random effect
//! whose conditional mean depends on the subject's earlier gaps. The
//! dependence coefficients carry a Dirichlet-process prior, fitted by
//! blocked Gibbs sampling over a truncated stick-breaking representation.

pub mod cli;
pub mod data;
pub mod dist;
pub mod error;
pub mod model;
pub mod sampler;
pub mod simgen;
pub mod store;
pub mod summaries;

pub use data::{CovariateCodec, GapTimeDataset, SubjectRecord};
pub use error::{Error, Result};
pub use model::{Atom, ChainState, DependenceSpec, Hyperparameters, ModelConfig, SummaryFn};
pub use sampler::{run_chain, run_chains, Draw, DrawStore, SamplerConfig};
