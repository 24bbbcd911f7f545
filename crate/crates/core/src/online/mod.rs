//! Online learners and regret bookkeeping.

mod blocked;
mod learners;
mod meta;
mod regret;
mod stochastic;

pub use blocked::{blocked_random_order_run, BlockedRun};
pub use learners::{FtlState, Ftrl, StepSchedule, SubLearner};
pub use meta::{
    default_k_algorithm1, default_k_meta_fw, gradient_bound, run_adversarial, Algorithm1, MetaFrankWolfe,
    MetaFw, PlayedRound,
};
pub use regret::{compute_regret, RegretTrace, TraceMeta, TraceRecord};
pub use stochastic::{
    alg2_inner_steps, alg2_total_calls, run_stochastic, AveragedGradientFw, RecursiveFw, Rho, StochasticLearner,
    StochasticRun,
};
