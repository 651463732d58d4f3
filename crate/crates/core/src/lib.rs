//! Budget-constrained multi-armed bandit simulation.
//!
//! Arms pay a random cost and yield a random reward per pull, both on
//! `[0, 1]`, and play stops when a budget runs out. The crate provides:
//!
//! - the environment model ([`DistributionSpec`], [`BanditInstance`]) with
//!   deterministic seeded sampling,
//! - pulling policies ([`policy`]): Thompson sampling over reward and cost
//!   posteriors plus four baseline index policies,
//! - budget accounting and pseudo-regret evaluation ([`eval`]),
//! - closed-form gap quantities and regret-bound constants ([`theory`]),
//! - a reproducible Monte Carlo experiment harness with CSV output
//!   ([`harness`]), data-parallel when the `parallel` feature (default) is
//!   enabled and sequential otherwise.
//!
//! Everything downstream of a seed is deterministic: runs draw from private
//! ChaCha8 streams through a fixed per-round draw layout, so identical
//! configurations produce byte-identical outputs at any thread count.

pub mod beta;
pub mod dist;
pub mod eval;
pub mod harness;
pub mod instance;
pub mod policy;
pub mod rng;
pub mod theory;

pub use dist::{bernoulli_trial, DistributionSpec};
pub use instance::{generate_instance, ArmModel, BanditInstance, Family};
pub use rng::RngStream;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// How observed outcomes feed the learner and how the optimum is scored.
///
/// `Bernoulli` requires every distribution to be 0/1-valued; posterior
/// updates then use outcomes directly and the optimal value is exact.
/// `General` admits any `[0, 1]` distribution; posterior updates reduce
/// outcomes through Bernoulli trials and the optimal value is an upper
/// bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Bernoulli,
    General,
}

/// Errors from environment-model construction and sampling.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),
    #[error("support value {0} outside [0, 1]")]
    SupportOutOfRange(f64),
    #[error("probabilities sum to {0}, expected 1 within 1e-12")]
    ProbabilitiesDoNotSumToOne(f64),
    #[error("support has {support} values but probs has {probs}")]
    MalformedSupport { support: usize, probs: usize },
    #[error("arm {arm} has nonpositive mean {which}")]
    NonPositiveMean { arm: usize, which: &'static str },
    #[error("an instance needs at least 2 arms, got {0}")]
    TooFewArms(usize),
    #[error("arm index {arm} out of range for {arms} arms")]
    ArmOutOfRange { arm: usize, arms: usize },
    #[error("bernoulli trial probability {0} outside [0, 1]")]
    TrialProbabilityOutOfRange(f64),
}
