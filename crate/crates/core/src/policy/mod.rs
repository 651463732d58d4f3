//! Pulling policies behind one uniform interface.
//!
//! [`BtsPolicy`] is the posterior-sampling policy this crate is built
//! around; the other four are the comparison baselines. All of them expose
//! selection as a function of observable state only, so a policy can be
//! replayed from its update history.
//!
//! Stream discipline per round: a policy's `select` runs first (only the
//! posterior-sampling policy consumes stream values there, two per arm in
//! arm order), then the environment pull (two values), then `update` (two
//! values for the posterior-sampling policy in general mode, none
//! otherwise).

mod baselines;
mod bts;

pub use baselines::{EpsilonFirst, KubeVariant, PdBwk, UcbBv1};
pub use bts::{BtsPolicy, BtsState};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::RngStream;
use crate::{CoreError, Mode};

/// Which pulling policy to run, with its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    /// Thompson sampling over Beta posteriors of reward and cost.
    Bts,
    /// Round-robin exploration until `epsilon * budget` is spent, then greedy
    /// on the empirical reward-to-cost ratio.
    EpsilonFirst { epsilon: f64 },
    /// Optimistic-reward over pessimistic-cost index with a
    /// `0.25 * ln(budget * arms)` confidence width.
    PdBwk,
    /// Ratio index with a confidence bonus scaled by a known lower bound
    /// `lambda` on the minimum mean cost.
    UcbBv1 { lambda: f64 },
    /// Reward upper-confidence bound divided by the empirical mean cost.
    KubeVariant,
}

impl PolicyKind {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Bts => "bts",
            Self::EpsilonFirst { .. } => "epsilon_first",
            Self::PdBwk => "pd_bwk",
            Self::UcbBv1 { .. } => "ucb_bv1",
            Self::KubeVariant => "kube_variant",
        }
    }

    /// True for policies whose decisions depend on the total budget, which
    /// therefore must be re-run per budget rather than checkpointed once.
    pub fn needs_budget_in_advance(&self) -> bool {
        matches!(self, Self::EpsilonFirst { .. } | Self::PdBwk)
    }
}

#[derive(Debug, Error)]
pub enum PolicyError {
    #[error("epsilon must lie in (0, 1), got {0}")]
    InvalidEpsilon(f64),
    #[error("lambda must be positive, got {0}")]
    InvalidLambda(f64),
    #[error("bernoulli mode requires binary outcomes, got reward={reward}, cost={cost}")]
    NonBinaryOutcome { reward: f64, cost: f64 },
    #[error(transparent)]
    Core(#[from] CoreError),
}

/// Uniform interface over all pulling policies.
///
/// `round` is 1-based; `spent` is the cumulative cost paid so far. Both are
/// ignored by policies that do not need them. Policy state belongs to a
/// single run and is never shared.
pub trait Policy: Send {
    fn select(&self, round: u64, spent: f64, rng: &mut RngStream) -> usize;

    fn update(
        &mut self,
        arm: usize,
        reward: f64,
        cost: f64,
        rng: &mut RngStream,
    ) -> Result<(), PolicyError>;
}

/// Builds a ready-to-run policy for a `k`-armed environment.
///
/// `budget` is consulted only by budget-aware policies; `mode` only by the
/// posterior-sampling policy (it decides whether updates pass outcomes
/// through Bernoulli trials).
pub fn build_policy(
    kind: &PolicyKind,
    k: usize,
    budget: u64,
    mode: Mode,
) -> Result<Box<dyn Policy>, PolicyError> {
    Ok(match *kind {
        PolicyKind::Bts => Box::new(BtsPolicy::new(k, mode)),
        PolicyKind::EpsilonFirst { epsilon } => Box::new(EpsilonFirst::new(k, epsilon, budget)?),
        PolicyKind::PdBwk => Box::new(PdBwk::new(k, budget)),
        PolicyKind::UcbBv1 { lambda } => Box::new(UcbBv1::new(k, lambda)?),
        PolicyKind::KubeVariant => Box::new(KubeVariant::new(k)),
    })
}

/// Per-arm pull counts and cumulative real-valued reward and cost, the state
/// shared by all baseline policies.
#[derive(Clone, Debug)]
pub struct EmpiricalState {
    pulls: Vec<u64>,
    reward_sums: Vec<f64>,
    cost_sums: Vec<f64>,
}

impl EmpiricalState {
    pub fn new(k: usize) -> Self {
        Self {
            pulls: vec![0; k],
            reward_sums: vec![0.0; k],
            cost_sums: vec![0.0; k],
        }
    }

    pub fn k(&self) -> usize {
        self.pulls.len()
    }

    pub fn record(&mut self, arm: usize, reward: f64, cost: f64) {
        self.pulls[arm] += 1;
        self.reward_sums[arm] += reward;
        self.cost_sums[arm] += cost;
    }

    pub fn pulls(&self, arm: usize) -> u64 {
        self.pulls[arm]
    }

    pub fn total_pulls(&self) -> u64 {
        self.pulls.iter().sum()
    }

    /// Average reward; defined only for arms pulled at least once.
    pub fn mean_reward(&self, arm: usize) -> Option<f64> {
        (self.pulls[arm] > 0).then(|| self.reward_sums[arm] / self.pulls[arm] as f64)
    }

    pub fn mean_cost(&self, arm: usize) -> Option<f64> {
        (self.pulls[arm] > 0).then(|| self.cost_sums[arm] / self.pulls[arm] as f64)
    }

    /// Lowest-index arm that has never been pulled.
    pub fn first_unpulled(&self) -> Option<usize> {
        self.pulls.iter().position(|&n| n == 0)
    }
}

/// Index of the maximum score; the lowest index wins ties (including ties at
/// positive infinity). Scores must not be NaN.
pub(crate) fn argmax(scores: impl IntoIterator<Item = f64>) -> usize {
    let mut best = f64::NEG_INFINITY;
    let mut best_idx = 0;
    for (i, s) in scores.into_iter().enumerate() {
        debug_assert!(!s.is_nan(), "argmax over NaN score at index {i}");
        if s > best {
            best = s;
            best_idx = i;
        }
    }
    best_idx
}

/// Ratio with the convention that a nonpositive denominator scores positive
/// infinity, forcing the arm to the front of the argmax.
pub(crate) fn ratio_or_inf(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        f64::INFINITY
    }
}
