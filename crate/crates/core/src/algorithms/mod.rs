//! Learning algorithms as explicit stochastic kernels.

mod classes;
mod compose;
mod erm;
mod gibbs;
mod kernel;
mod noisy_erm;
mod two_stage;

pub use classes::{vc_stats, HypothesisClassTable, VcStats, VC_MAX_DOMAIN};
pub use compose::{compose_adaptive, Composition, CompositionPlan, Stage};
pub use erm::{erm_kernel, TieRule};
pub use gibbs::{gibbs_kernel, gibbs_objective, gibbs_row};
pub use kernel::{chain_kernel, InputArity, StochasticKernel, ROW_SUM_TOL};
pub use noisy_erm::{
    noisy_argmin_probabilities, noisy_argmin_sampled, noisy_erm_kernel, NoisyErmMode, EXACT_MAX_HYPOTHESES,
};
pub use two_stage::{empirical_cover, two_stage_kernel, PrefixStats, TwoStage};
