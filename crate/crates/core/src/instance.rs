//! Bandit environments: arms, derived gap quantities, and pulling.

use serde::{Deserialize, Serialize};

use crate::dist::DistributionSpec;
use crate::rng::RngStream;
use crate::CoreError;

/// One arm: a reward distribution and an independent cost distribution,
/// both on `[0, 1]` with strictly positive means.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArmModel {
    pub reward: DistributionSpec,
    pub cost: DistributionSpec,
}

impl ArmModel {
    pub fn new(reward: DistributionSpec, cost: DistributionSpec) -> Self {
        Self { reward, cost }
    }
}

/// An immutable K-armed environment (`K >= 2`) with cached means, the
/// optimal arm (maximum mean-reward-to-mean-cost ratio, lowest index on
/// ties), and the per-arm ratio gaps.
///
/// Instances are shared freely across concurrent runs; all mutation lives in
/// policy state and RNG streams.
#[derive(Clone, Debug)]
pub struct BanditInstance {
    arms: Vec<ArmModel>,
    mean_rewards: Vec<f64>,
    mean_costs: Vec<f64>,
    optimal_arm: usize,
    gaps: Vec<f64>,
}

impl BanditInstance {
    pub fn new(arms: Vec<ArmModel>) -> Result<Self, CoreError> {
        if arms.len() < 2 {
            return Err(CoreError::TooFewArms(arms.len()));
        }
        let mut mean_rewards = Vec::with_capacity(arms.len());
        let mut mean_costs = Vec::with_capacity(arms.len());
        for (i, arm) in arms.iter().enumerate() {
            arm.reward.validate()?;
            arm.cost.validate()?;
            let r = arm.reward.exact_mean();
            let c = arm.cost.exact_mean();
            if r <= 0.0 {
                return Err(CoreError::NonPositiveMean { arm: i, which: "reward" });
            }
            if c <= 0.0 {
                return Err(CoreError::NonPositiveMean { arm: i, which: "cost" });
            }
            mean_rewards.push(r);
            mean_costs.push(c);
        }
        let ratios: Vec<f64> = mean_rewards
            .iter()
            .zip(&mean_costs)
            .map(|(r, c)| r / c)
            .collect();
        let optimal_arm = crate::policy::argmax(ratios.iter().copied());
        let best = ratios[optimal_arm];
        let gaps = ratios.iter().map(|r| best - r).collect();
        Ok(Self {
            arms,
            mean_rewards,
            mean_costs,
            optimal_arm,
            gaps,
        })
    }

    pub fn k(&self) -> usize {
        self.arms.len()
    }

    pub fn arms(&self) -> &[ArmModel] {
        &self.arms
    }

    pub fn mean_reward(&self, arm: usize) -> f64 {
        self.mean_rewards[arm]
    }

    pub fn mean_cost(&self, arm: usize) -> f64 {
        self.mean_costs[arm]
    }

    /// Mean-reward-to-mean-cost ratio of `arm`.
    pub fn ratio(&self, arm: usize) -> f64 {
        self.mean_rewards[arm] / self.mean_costs[arm]
    }

    pub fn optimal_arm(&self) -> usize {
        self.optimal_arm
    }

    pub fn optimal_ratio(&self) -> f64 {
        self.ratio(self.optimal_arm)
    }

    /// Ratio gap of `arm` relative to the optimal arm; zero for the optimal
    /// arm, nonnegative everywhere.
    pub fn gap(&self, arm: usize) -> f64 {
        self.gaps[arm]
    }

    pub fn gaps(&self) -> &[f64] {
        &self.gaps
    }

    /// Smallest mean cost over all arms; strictly positive by construction.
    pub fn min_mean_cost(&self) -> f64 {
        self.mean_costs.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_all_bernoulli(&self) -> bool {
        self.arms
            .iter()
            .all(|a| a.reward.is_bernoulli() && a.cost.is_bernoulli())
    }

    /// Pull `arm` once: reward drawn first, then cost, independently.
    /// Consumes exactly two stream values.
    pub fn pull(&self, arm: usize, rng: &mut RngStream) -> Result<(f64, f64), CoreError> {
        let model = self.arms.get(arm).ok_or(CoreError::ArmOutOfRange {
            arm,
            arms: self.arms.len(),
        })?;
        let reward = model.reward.sample(rng);
        let cost = model.cost.sample(rng);
        Ok((reward, cost))
    }
}

/// Distribution family for generated instances.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Bernoulli,
    Multinomial,
}

/// Multinomial support used by the instance generator.
pub const GENERATOR_SUPPORT: [f64; 4] = [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0];

/// Lower bound the generator enforces on every mean cost so that expected
/// round counts stay within a small multiple of the budget.
pub const GENERATOR_MIN_MEAN_COST: f64 = 0.25;

/// Generates a random instance from a seed.
///
/// Bernoulli family: per arm, the reward probability is uniform on
/// `[0.1, 0.9]` (one draw) and the cost probability uniform on
/// `[0.25, 0.9]` (one draw). Multinomial family: per arm, reward and cost
/// each get weights over [`GENERATOR_SUPPORT`] drawn uniformly from the
/// probability simplex (four exponential draws, normalized); cost weights
/// are redrawn until the mean cost reaches [`GENERATOR_MIN_MEAN_COST`].
/// The parameter ranges are this crate's choice, not an external convention.
pub fn generate_instance(seed: u64, arms: usize, family: Family) -> Result<BanditInstance, CoreError> {
    let mut rng = RngStream::from_seed(seed);
    let mut models = Vec::with_capacity(arms);
    for _ in 0..arms {
        let arm = match family {
            Family::Bernoulli => {
                let p_reward = 0.1 + 0.8 * rng.next_unit();
                let p_cost = 0.25 + 0.65 * rng.next_unit();
                ArmModel::new(
                    DistributionSpec::bernoulli(p_reward),
                    DistributionSpec::bernoulli(p_cost),
                )
            }
            Family::Multinomial => {
                let reward = random_simplex_multinomial(&mut rng);
                let mut cost = random_simplex_multinomial(&mut rng);
                let mut attempts = 0;
                while cost.exact_mean() < GENERATOR_MIN_MEAN_COST && attempts < 100 {
                    cost = random_simplex_multinomial(&mut rng);
                    attempts += 1;
                }
                ArmModel::new(reward, cost)
            }
        };
        models.push(arm);
    }
    BanditInstance::new(models)
}

fn random_simplex_multinomial(rng: &mut RngStream) -> DistributionSpec {
    // Normalized exponentials are uniform on the simplex.
    let raw: Vec<f64> = (0..GENERATOR_SUPPORT.len())
        .map(|_| -(1.0 - rng.next_unit()).ln())
        .collect();
    let total: f64 = raw.iter().sum();
    DistributionSpec::multinomial(
        GENERATOR_SUPPORT.to_vec(),
        raw.iter().map(|w| w / total).collect(),
    )
}
