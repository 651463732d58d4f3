//! Independent brute-force oracles for the test and acceptance suites.
//!
//! These estimators deliberately re-implement budget accounting on top of
//! raw instance sampling instead of calling the production evaluation path,
//! so a bookkeeping bug there cannot hide from the checks built on them.
//! They are compiled into test binaries (and the optional CLI oracle
//! command), never into the simulation path itself.

use thiserror::Error;

use budgeted_bandits::eval::{pseudo_regret, run_trajectory, EvalError};
use budgeted_bandits::policy::{build_policy, PolicyError, PolicyKind};
use budgeted_bandits::{BanditInstance, CoreError, Mode, RngStream};

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("oracle estimates need at least {minimum} episodes, got {got}")]
    TooFewEpisodes { minimum: u64, got: u64 },
    #[error("this oracle handles only {0}")]
    OutOfScope(&'static str),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
}

/// A Monte Carlo estimate with its uncertainty.
#[derive(Clone, Copy, Debug)]
pub struct OracleEstimate {
    pub value: f64,
    /// Sample standard deviation divided by sqrt(samples).
    pub standard_error: f64,
    pub samples: u64,
}

/// Minimum episode count accepted by the estimators.
pub const MIN_EPISODES: u64 = 10_000;

/// Streaming mean/variance accumulator, local so the oracles share nothing
/// with the harness aggregation path.
#[derive(Clone, Debug, Default)]
struct Accumulator {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Accumulator {
    fn push(&mut self, value: f64) {
        self.count += 1;
        let delta = value - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (value - self.mean);
    }

    fn estimate(&self) -> OracleEstimate {
        let variance = if self.count > 1 {
            self.m2 / (self.count - 1) as f64
        } else {
            0.0
        };
        OracleEstimate {
            value: self.mean,
            standard_error: (variance / self.count as f64).sqrt(),
            samples: self.count,
        }
    }
}

/// Monte Carlo mean total reward of the constant policy that always pulls
/// `fixed_arm` until `budget` runs out.
///
/// The closed-form benchmark for comparison is `budget * ratio(fixed_arm)`
/// exactly for 0/1 costs, and within `[ratio * (budget - 1), ratio *
/// (budget + 1)]` in general. Budget accounting is re-implemented here:
/// a pull whose cost exceeds the remaining budget forfeits its reward and
/// ends the episode.
pub fn mc_policy_value(
    instance: &BanditInstance,
    fixed_arm: usize,
    budget: u64,
    mode: Mode,
    episodes: u64,
    seed: u64,
) -> Result<OracleEstimate, OracleError> {
    if episodes < MIN_EPISODES {
        return Err(OracleError::TooFewEpisodes {
            minimum: MIN_EPISODES,
            got: episodes,
        });
    }
    if mode == Mode::Bernoulli && !instance.is_all_bernoulli() {
        return Err(OracleError::Eval(EvalError::NotBernoulli));
    }
    if fixed_arm >= instance.k() {
        return Err(OracleError::Core(CoreError::ArmOutOfRange {
            arm: fixed_arm,
            arms: instance.k(),
        }));
    }
    let round_cap = (100.0 * budget as f64 / instance.mean_cost(fixed_arm)).ceil() as u64;
    let mut rng = RngStream::from_seed(seed);
    let mut acc = Accumulator::default();
    for _ in 0..episodes {
        let mut spent = 0.0;
        let mut reward_total = 0.0;
        let mut rounds = 0u64;
        while spent < budget as f64 {
            rounds += 1;
            if rounds > round_cap {
                return Err(OracleError::Eval(EvalError::RoundCapExceeded {
                    cap: round_cap,
                    budget,
                }));
            }
            let (reward, cost) = instance.pull(fixed_arm, &mut rng)?;
            if cost > budget as f64 - spent {
                // Cost overshoots the remaining budget: the reward is
                // forfeited and the episode ends.
                break;
            }
            reward_total += reward;
            spent += cost;
        }
        acc.push(reward_total);
    }
    Ok(acc.estimate())
}

/// Distribution summary from replaying the full simulation stack on a tiny
/// two-armed 0/1 instance across many seeds.
#[derive(Clone, Copy, Debug)]
pub struct SmallBanditSummary {
    pub episodes: u64,
    /// Benchmark-minus-reward regret.
    pub regret: OracleEstimate,
    /// The per-run pull-count decomposition as reported by the evaluation
    /// path.
    pub decomposition: OracleEstimate,
    /// The same decomposition recomputed here from raw pull counts,
    /// `mean_cost * gap * mean(pulls)` summed over non-optimal arms.
    pub recomputed_decomposition: f64,
}

/// Runs `policy` once per seed at `budget` through the production stack and
/// summarizes both regret accountings. Restricted to `budget <= 5`, two
/// arms, 0/1 distributions: the regime where their means probably agree and
/// disagreement means a bookkeeping bug.
pub fn exhaustive_small_bandit_regret(
    instance: &BanditInstance,
    policy: &PolicyKind,
    budget: u64,
    seeds: impl IntoIterator<Item = u64>,
) -> Result<SmallBanditSummary, OracleError> {
    if budget > 5 || instance.k() > 2 || !instance.is_all_bernoulli() {
        return Err(OracleError::OutOfScope(
            "budgets up to 5 on two-armed all-bernoulli instances",
        ));
    }
    let mut regret = Accumulator::default();
    let mut decomposition = Accumulator::default();
    let mut pull_means = vec![Accumulator::default(); instance.k()];
    for seed in seeds {
        let mut rng = RngStream::from_seed(seed);
        let mut p = build_policy(policy, instance.k(), budget, Mode::Bernoulli)?;
        let trajectory = run_trajectory(instance, p.as_mut(), budget, Mode::Bernoulli, &mut rng)?;
        let breakdown = pseudo_regret(instance, &trajectory, Mode::Bernoulli);
        regret.push(breakdown.regret);
        decomposition.push(breakdown.pull_decomposition);
        for (arm, acc) in pull_means.iter_mut().enumerate() {
            acc.push(trajectory.pulls[arm] as f64);
        }
    }
    let recomputed_decomposition = pull_means
        .iter()
        .enumerate()
        .filter(|&(arm, _)| arm != instance.optimal_arm())
        .map(|(arm, acc)| instance.mean_cost(arm) * instance.gap(arm) * acc.estimate().value)
        .sum();
    Ok(SmallBanditSummary {
        episodes: regret.estimate().samples,
        regret: regret.estimate(),
        decomposition: decomposition.estimate(),
        recomputed_decomposition,
    })
}
