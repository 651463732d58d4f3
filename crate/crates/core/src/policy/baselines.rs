//! Baseline pulling policies: deterministic index rules over empirical
//! per-arm averages.
//!
//! Index formulas are undefined before an arm has been pulled, so the three
//! confidence-bound baselines first pull each arm once in index order. The
//! budget-splitting policy needs no special casing: its exploration phase is
//! round-robin anyway.

use crate::rng::RngStream;

use super::{argmax, ratio_or_inf, EmpiricalState, Policy, PolicyError};

/// Spends `epsilon * budget` on round-robin exploration, then pulls the arm
/// with the best empirical reward-to-cost ratio. Requires the budget in
/// advance.
#[derive(Clone, Debug)]
pub struct EpsilonFirst {
    state: EmpiricalState,
    epsilon: f64,
    budget: f64,
}

impl EpsilonFirst {
    pub fn new(k: usize, epsilon: f64, budget: u64) -> Result<Self, PolicyError> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(PolicyError::InvalidEpsilon(epsilon));
        }
        Ok(Self {
            state: EmpiricalState::new(k),
            epsilon,
            budget: budget as f64,
        })
    }

    pub fn state(&self) -> &EmpiricalState {
        &self.state
    }
}

impl Policy for EpsilonFirst {
    fn select(&self, _round: u64, spent: f64, _rng: &mut RngStream) -> usize {
        // Exploration uses strict <, so hitting the threshold exactly exploits.
        if spent < self.epsilon * self.budget {
            (self.state.total_pulls() % self.state.k() as u64) as usize
        } else {
            argmax((0..self.state.k()).map(|arm| {
                match (self.state.mean_reward(arm), self.state.mean_cost(arm)) {
                    (Some(r), Some(c)) => ratio_or_inf(r, c),
                    // Never-pulled arms sort first, same as a zero denominator.
                    _ => f64::INFINITY,
                }
            }))
        }
    }

    fn update(
        &mut self,
        arm: usize,
        reward: f64,
        cost: f64,
        _rng: &mut RngStream,
    ) -> Result<(), PolicyError> {
        self.state.record(arm, reward, cost);
        Ok(())
    }
}

/// Optimistic-reward over pessimistic-cost ratio index with confidence
/// width `phi(x, n) = sqrt(nu x / n) + nu / n`, `nu = 0.25 ln(budget * k)`.
/// Requires the budget in advance.
#[derive(Clone, Debug)]
pub struct PdBwk {
    state: EmpiricalState,
    nu: f64,
}

impl PdBwk {
    pub fn new(k: usize, budget: u64) -> Self {
        Self {
            state: EmpiricalState::new(k),
            nu: 0.25 * ((budget as f64) * (k as f64)).ln(),
        }
    }

    /// The confidence scale `nu`; natural logarithm of `budget * k`.
    pub fn nu(&self) -> f64 {
        self.nu
    }

    fn phi(&self, x: f64, n: f64) -> f64 {
        (self.nu * x / n).sqrt() + self.nu / n
    }
}

impl Policy for PdBwk {
    fn select(&self, _round: u64, _spent: f64, _rng: &mut RngStream) -> usize {
        if let Some(arm) = self.state.first_unpulled() {
            return arm;
        }
        argmax((0..self.state.k()).map(|arm| {
            let n = self.state.pulls(arm) as f64;
            let r = self.state.mean_reward(arm).expect("initialized");
            let c = self.state.mean_cost(arm).expect("initialized");
            let num = (r + self.phi(r, n)).min(1.0);
            let den = (c - self.phi(c, n)).max(0.0);
            if den > 0.0 {
                num / den
            } else {
                f64::INFINITY
            }
        }))
    }

    fn update(
        &mut self,
        arm: usize,
        reward: f64,
        cost: f64,
        _rng: &mut RngStream,
    ) -> Result<(), PolicyError> {
        self.state.record(arm, reward, cost);
        Ok(())
    }
}

/// Empirical ratio plus an exploration term scaled by a known lower bound
/// `lambda` on the minimum mean cost.
#[derive(Clone, Debug)]
pub struct UcbBv1 {
    state: EmpiricalState,
    lambda: f64,
}

impl UcbBv1 {
    pub fn new(k: usize, lambda: f64) -> Result<Self, PolicyError> {
        if lambda <= 0.0 || !lambda.is_finite() {
            return Err(PolicyError::InvalidLambda(lambda));
        }
        Ok(Self {
            state: EmpiricalState::new(k),
            lambda,
        })
    }

    /// Index value given the empirical ratio and the confidence radius
    /// `sqrt(ln(t-1) / n)`. A nonpositive denominator means the radius has
    /// swallowed the cost lower bound; the arm then scores infinity and is
    /// forced to be explored.
    fn index(&self, ratio: f64, radius: f64) -> f64 {
        let den = self.lambda - radius;
        if den <= 0.0 {
            f64::INFINITY
        } else {
            ratio + (1.0 + 1.0 / self.lambda) * radius / den
        }
    }
}

impl Policy for UcbBv1 {
    fn select(&self, round: u64, _spent: f64, _rng: &mut RngStream) -> usize {
        if let Some(arm) = self.state.first_unpulled() {
            return arm;
        }
        let log_term = ((round.saturating_sub(1)) as f64).ln().max(0.0);
        argmax((0..self.state.k()).map(|arm| {
            let n = self.state.pulls(arm) as f64;
            let r = self.state.mean_reward(arm).expect("initialized");
            let c = self.state.mean_cost(arm).expect("initialized");
            self.index(ratio_or_inf(r, c), (log_term / n).sqrt())
        }))
    }

    fn update(
        &mut self,
        arm: usize,
        reward: f64,
        cost: f64,
        _rng: &mut RngStream,
    ) -> Result<(), PolicyError> {
        self.state.record(arm, reward, cost);
        Ok(())
    }
}

/// Reward upper-confidence bound `r + sqrt(2 ln t / n)` divided by the
/// empirical mean cost.
#[derive(Clone, Debug)]
pub struct KubeVariant {
    state: EmpiricalState,
}

impl KubeVariant {
    pub fn new(k: usize) -> Self {
        Self {
            state: EmpiricalState::new(k),
        }
    }
}

impl Policy for KubeVariant {
    fn select(&self, round: u64, _spent: f64, _rng: &mut RngStream) -> usize {
        if let Some(arm) = self.state.first_unpulled() {
            return arm;
        }
        let log_term = (round as f64).ln();
        argmax((0..self.state.k()).map(|arm| {
            let n = self.state.pulls(arm) as f64;
            let r = self.state.mean_reward(arm).expect("initialized");
            let c = self.state.mean_cost(arm).expect("initialized");
            ratio_or_inf(r + (2.0 * log_term / n).sqrt(), c)
        }))
    }

    fn update(
        &mut self,
        arm: usize,
        reward: f64,
        cost: f64,
        _rng: &mut RngStream,
    ) -> Result<(), PolicyError> {
        self.state.record(arm, reward, cost);
        Ok(())
    }
}
