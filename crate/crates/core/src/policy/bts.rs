//! Thompson sampling over Beta posteriors of both reward and cost.

use crate::beta;
use crate::dist::bernoulli_trial;
use crate::rng::RngStream;
use crate::Mode;

use super::{argmax, Policy, PolicyError};

/// Per-arm success/failure counters for the reward and cost posteriors.
///
/// Every counter starts at zero, so each arm's priors are `Beta(1, 1)`. For
/// each arm, successes plus failures equals its pull count on both the
/// reward and the cost side.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BtsState {
    reward_successes: Vec<u64>,
    reward_failures: Vec<u64>,
    cost_successes: Vec<u64>,
    cost_failures: Vec<u64>,
}

impl BtsState {
    pub fn new(k: usize) -> Self {
        Self {
            reward_successes: vec![0; k],
            reward_failures: vec![0; k],
            cost_successes: vec![0; k],
            cost_failures: vec![0; k],
        }
    }

    pub fn k(&self) -> usize {
        self.reward_successes.len()
    }

    /// (successes, failures) of the reward posterior of `arm`.
    pub fn reward_counts(&self, arm: usize) -> (u64, u64) {
        (self.reward_successes[arm], self.reward_failures[arm])
    }

    /// (successes, failures) of the cost posterior of `arm`.
    pub fn cost_counts(&self, arm: usize) -> (u64, u64) {
        (self.cost_successes[arm], self.cost_failures[arm])
    }

    pub fn pulls(&self, arm: usize) -> u64 {
        self.reward_successes[arm] + self.reward_failures[arm]
    }

    /// Builds a state from a prepared counter table (warm starts, tests).
    pub fn from_counts(
        reward_successes: Vec<u64>,
        reward_failures: Vec<u64>,
        cost_successes: Vec<u64>,
        cost_failures: Vec<u64>,
    ) -> Self {
        assert_eq!(reward_successes.len(), reward_failures.len());
        assert_eq!(reward_successes.len(), cost_successes.len());
        assert_eq!(reward_successes.len(), cost_failures.len());
        Self {
            reward_successes,
            reward_failures,
            cost_successes,
            cost_failures,
        }
    }

    /// Samples one reward and one cost value per arm from the posteriors
    /// (reward first, then cost, in arm order: exactly `2K` stream values)
    /// and returns the arm with the largest sampled reward-to-cost ratio,
    /// lowest index on ties.
    pub fn select(&self, rng: &mut RngStream) -> usize {
        let scores = (0..self.k()).map(|arm| {
            let theta_r = beta::sample(
                (self.reward_successes[arm] + 1) as f64,
                (self.reward_failures[arm] + 1) as f64,
                rng,
            );
            let theta_c = beta::sample(
                (self.cost_successes[arm] + 1) as f64,
                (self.cost_failures[arm] + 1) as f64,
                rng,
            );
            super::ratio_or_inf(theta_r, theta_c)
        });
        // Collected eagerly so all 2K draws happen even after an infinite score.
        let scores: Vec<f64> = scores.collect();
        argmax(scores)
    }

    /// Folds one observed (reward, cost) pair into the pulled arm's counters.
    ///
    /// In bernoulli mode the outcomes must already be 0/1 and are used
    /// directly (no stream values consumed). In general mode the outcomes are
    /// first reduced to binary by Bernoulli trials, reward then cost (exactly
    /// two stream values). Other arms' counters are untouched.
    pub fn update(
        &mut self,
        arm: usize,
        reward: f64,
        cost: f64,
        mode: Mode,
        rng: &mut RngStream,
    ) -> Result<(), PolicyError> {
        let (reward_hit, cost_hit) = match mode {
            Mode::Bernoulli => {
                let binary = |x: f64| x == 0.0 || x == 1.0;
                if !binary(reward) || !binary(cost) {
                    return Err(PolicyError::NonBinaryOutcome { reward, cost });
                }
                (reward == 1.0, cost == 1.0)
            }
            Mode::General => (
                bernoulli_trial(reward, rng)?,
                bernoulli_trial(cost, rng)?,
            ),
        };
        if reward_hit {
            self.reward_successes[arm] += 1;
        } else {
            self.reward_failures[arm] += 1;
        }
        if cost_hit {
            self.cost_successes[arm] += 1;
        } else {
            self.cost_failures[arm] += 1;
        }
        Ok(())
    }
}

/// [`BtsState`] driven through the uniform [`Policy`] interface.
#[derive(Clone, Debug)]
pub struct BtsPolicy {
    state: BtsState,
    mode: Mode,
}

impl BtsPolicy {
    pub fn new(k: usize, mode: Mode) -> Self {
        Self {
            state: BtsState::new(k),
            mode,
        }
    }

    pub fn state(&self) -> &BtsState {
        &self.state
    }
}

impl Policy for BtsPolicy {
    fn select(&self, _round: u64, _spent: f64, rng: &mut RngStream) -> usize {
        self.state.select(rng)
    }

    fn update(
        &mut self,
        arm: usize,
        reward: f64,
        cost: f64,
        rng: &mut RngStream,
    ) -> Result<(), PolicyError> {
        self.state.update(arm, reward, cost, self.mode, rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn selection_frequencies(state: &BtsState, draws: u64, seed: u64) -> Vec<f64> {
        let mut rng = RngStream::from_seed(seed);
        let mut counts = vec![0u64; state.k()];
        for _ in 0..draws {
            counts[state.select(&mut rng)] += 1;
        }
        counts.iter().map(|&c| c as f64 / draws as f64).collect()
    }

    #[test]
    fn empty_history_is_symmetric() {
        let freqs = selection_frequencies(&BtsState::new(3), 30_000, 12345);
        for f in freqs {
            assert!((f - 1.0 / 3.0).abs() < 0.01, "frequency {f}");
        }
    }

    #[test]
    fn identical_counters_are_symmetric() {
        let state = BtsState::from_counts(vec![5, 5], vec![5, 5], vec![5, 5], vec![5, 5]);
        let freqs = selection_frequencies(&state, 10_000, 99);
        assert!((freqs[0] - 0.5).abs() < 0.02);
    }

    #[test]
    fn concentrated_posterior_dominates() {
        // Arm 0: reward posterior pinned near 1, cost posterior near 0; arm 1
        // has flat priors, so arm 0 should win essentially always.
        let state = BtsState::from_counts(
            vec![1_000_000, 0],
            vec![0, 0],
            vec![0, 0],
            vec![1_000_000, 0],
        );
        let freqs = selection_frequencies(&state, 10_000, 7);
        assert!(freqs[0] >= 0.99, "arm 0 frequency {}", freqs[0]);
    }

    #[test]
    fn selection_distribution_is_permutation_equivariant() {
        let state = BtsState::from_counts(
            vec![8, 2, 0],
            vec![2, 8, 0],
            vec![3, 4, 1],
            vec![7, 6, 1],
        );
        // Swap arms 0 and 2.
        let permuted = BtsState::from_counts(
            vec![0, 2, 8],
            vec![0, 8, 2],
            vec![1, 4, 3],
            vec![1, 6, 7],
        );
        let draws = 30_000;
        let base = selection_frequencies(&state, draws, 2024);
        let perm = selection_frequencies(&permuted, draws, 4202);
        for (i, j) in [(0usize, 2usize), (1, 1), (2, 0)] {
            assert!(
                (base[i] - perm[j]).abs() < 0.015,
                "arm {i}->{j}: {} vs {}",
                base[i],
                perm[j]
            );
        }
    }

    #[test]
    fn bernoulli_update_increments_the_right_counters() {
        let mut rng = RngStream::from_seed(0);
        let mut state = BtsState::new(3);
        state.update(0, 1.0, 0.0, Mode::Bernoulli, &mut rng).unwrap();
        assert_eq!(state.reward_counts(0), (1, 0));
        assert_eq!(state.cost_counts(0), (0, 1));
        for arm in 1..3 {
            assert_eq!(state.reward_counts(arm), (0, 0));
            assert_eq!(state.cost_counts(arm), (0, 0));
        }
        assert_eq!(state.pulls(0), 1);
    }

    #[test]
    fn bernoulli_update_rejects_fractional_outcomes() {
        let mut rng = RngStream::from_seed(0);
        let mut state = BtsState::new(2);
        let err = state.update(0, 0.3, 1.0, Mode::Bernoulli, &mut rng);
        assert!(matches!(err, Err(PolicyError::NonBinaryOutcome { .. })));
    }

    #[test]
    fn general_update_with_zero_outcomes_always_fails() {
        let mut rng = RngStream::from_seed(0);
        let mut state = BtsState::new(2);
        for _ in 0..100 {
            state.update(1, 0.0, 0.0, Mode::General, &mut rng).unwrap();
        }
        assert_eq!(state.reward_counts(1), (0, 100));
        assert_eq!(state.cost_counts(1), (0, 100));
    }

    #[test]
    fn general_update_success_rate_matches_outcome_value() {
        let mut rng = RngStream::from_seed(404);
        let mut state = BtsState::new(2);
        let n = 1_000_000;
        for _ in 0..n {
            state.update(0, 0.37, 0.8, Mode::General, &mut rng).unwrap();
        }
        let (s, f) = state.reward_counts(0);
        assert_eq!(s + f, n);
        assert!((s as f64 / n as f64 - 0.37).abs() < 0.002);
        let (sc, fc) = state.cost_counts(0);
        assert_eq!(sc + fc, n);
        assert!((sc as f64 / n as f64 - 0.8).abs() < 0.002);
    }

    #[test]
    fn posterior_mean_after_streak_matches_conjugate_update() {
        // After m all-success reward updates the posterior is Beta(m+1, 1)
        // with mean (m+1)/(m+2).
        let m = 20u64;
        let mut rng = RngStream::from_seed(1);
        let mut state = BtsState::new(2);
        for _ in 0..m {
            state.update(0, 1.0, 1.0, Mode::Bernoulli, &mut rng).unwrap();
        }
        let (s, f) = state.reward_counts(0);
        assert_eq!((s, f), (m, 0));
        let n = 100_000;
        let a = (m + 1) as f64;
        let sum: f64 = (0..n).map(|_| crate::beta::sample(a, 1.0, &mut rng)).sum();
        let mean = sum / n as f64;
        let expect = a / (a + 1.0);
        let var = a / ((a + 1.0) * (a + 1.0) * (a + 2.0));
        assert!((mean - expect).abs() < 3.0 * (var / n as f64).sqrt());
    }

    #[test]
    fn counter_conservation_over_random_updates() {
        let mut rng = RngStream::from_seed(8);
        let mut driver = RngStream::from_seed(9);
        let k = 4;
        let mut state = BtsState::new(k);
        let n = 500;
        for _ in 0..n {
            let arm = (driver.next_unit() * k as f64) as usize;
            let reward = driver.next_unit();
            let cost = driver.next_unit();
            state.update(arm, reward, cost, Mode::General, &mut rng).unwrap();
        }
        let mut total = 0;
        for arm in 0..k {
            let (sr, fr) = state.reward_counts(arm);
            let (sc, fc) = state.cost_counts(arm);
            assert_eq!(sr + fr, sc + fc);
            total += sr + fr;
        }
        assert_eq!(total, n);
    }
}
