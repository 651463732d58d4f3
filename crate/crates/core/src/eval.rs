//! Budget accounting, trajectory recording, and pseudo-regret.

use thiserror::Error;

use crate::instance::BanditInstance;
use crate::policy::{Policy, PolicyError};
use crate::rng::RngStream;
use crate::{CoreError, Mode};

/// Rounds allowed per unit of `budget / min_mean_cost` before a run is
/// declared runaway and aborted with an error.
pub const ROUND_CAP_FACTOR: f64 = 100.0;

/// The record of one completed run at one budget.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    /// The budget this record was evaluated at.
    pub budget: u64,
    /// Number of rounds played, including a final overshooting round.
    pub stopping_time: u64,
    /// Pulls per arm; sums to `stopping_time`.
    pub pulls: Vec<u64>,
    /// Sum of received rewards. A final pull whose cost exceeds the
    /// remaining budget forfeits its reward.
    pub total_reward: f64,
    /// Sum of paid costs; at most `budget + 1` (the final pull may overshoot
    /// by at most one).
    pub total_cost: f64,
}

/// The benchmark value the regret is measured against.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OptimalValue {
    pub value: f64,
    /// False when the value is exact (bernoulli mode); true when it is only
    /// an upper bound on the optimum (general mode), in which case regret
    /// against it should be labeled upper-bound regret.
    pub is_upper_bound: bool,
}

/// Both regret accountings for one trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegretBreakdown {
    /// Benchmark value minus realized total reward.
    pub regret: f64,
    /// The pull-count decomposition: sum over non-optimal arms of
    /// `mean_cost * gap * pulls`. Agrees with `regret` in expectation in
    /// bernoulli mode; kept as a diagnostic.
    pub pull_decomposition: f64,
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("budget must be a positive integer")]
    ZeroBudget,
    #[error("checkpoint budgets must be nonempty and strictly increasing")]
    BadCheckpoints,
    #[error("bernoulli mode requires every reward and cost distribution to be bernoulli")]
    NotBernoulli,
    #[error(
        "round cap of {cap} rounds hit at budget {budget}; the run looks stuck on near-zero costs"
    )]
    RoundCapExceeded { cap: u64, budget: u64 },
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
}

/// Expected reward of the best fixed-arm policy at `budget`.
///
/// In bernoulli mode this equals the optimum exactly: `ratio * budget`. In
/// general mode the exact optimum is intractable and the returned
/// `ratio * (budget + 1)` is an upper bound, flagged as such.
pub fn optimal_value(instance: &BanditInstance, budget: u64, mode: Mode) -> OptimalValue {
    let ratio = instance.optimal_ratio();
    match mode {
        Mode::Bernoulli => OptimalValue {
            value: ratio * budget as f64,
            is_upper_bound: false,
        },
        Mode::General => OptimalValue {
            value: ratio * (budget + 1) as f64,
            is_upper_bound: true,
        },
    }
}

/// Per-run pseudo-regret of `trajectory` plus the pull-count decomposition.
pub fn pseudo_regret(
    instance: &BanditInstance,
    trajectory: &Trajectory,
    mode: Mode,
) -> RegretBreakdown {
    let benchmark = optimal_value(instance, trajectory.budget, mode);
    let pull_decomposition = trajectory
        .pulls
        .iter()
        .enumerate()
        .filter(|&(arm, _)| arm != instance.optimal_arm())
        .map(|(arm, &pulls)| instance.mean_cost(arm) * instance.gap(arm) * pulls as f64)
        .sum();
    RegretBreakdown {
        regret: benchmark.value - trajectory.total_reward,
        pull_decomposition,
    }
}

/// Plays one run until `budget` is exhausted: select, pull, pay, update.
///
/// A pull whose cost exceeds the remaining budget still counts as a round
/// and its cost is still paid, but its reward is forfeited and the run
/// stops. With 0/1 costs and an integer budget that never happens; the
/// budget then runs out exactly.
pub fn run_trajectory(
    instance: &BanditInstance,
    policy: &mut dyn Policy,
    budget: u64,
    mode: Mode,
    rng: &mut RngStream,
) -> Result<Trajectory, EvalError> {
    let mut out = run_checkpointed(instance, policy, &[budget], mode, rng)?;
    Ok(out.pop().expect("one checkpoint yields one trajectory"))
}

/// Plays one run at the largest checkpoint budget, recording for every
/// checkpoint `b` exactly what a fresh run at budget `b` on the same stream
/// would have recorded.
///
/// This works for any policy whose decisions do not depend on the total
/// budget: the first rounds of a large-budget run coincide with a
/// small-budget run, so one long run yields the whole budget grid.
/// `checkpoints` must be strictly increasing and positive.
pub fn run_checkpointed(
    instance: &BanditInstance,
    policy: &mut dyn Policy,
    checkpoints: &[u64],
    mode: Mode,
    rng: &mut RngStream,
) -> Result<Vec<Trajectory>, EvalError> {
    let cap = match checkpoints.last() {
        Some(&budget) => round_cap(budget, instance.min_mean_cost()),
        None => 0,
    };
    run_checkpointed_capped(instance, policy, checkpoints, mode, rng, cap)
}

/// The runaway guard: [`ROUND_CAP_FACTOR`] times the expected rounds needed
/// to drain `budget` at the cheapest arm's mean cost.
pub fn round_cap(budget: u64, min_mean_cost: f64) -> u64 {
    (ROUND_CAP_FACTOR * budget as f64 / min_mean_cost).ceil() as u64
}

fn run_checkpointed_capped(
    instance: &BanditInstance,
    policy: &mut dyn Policy,
    checkpoints: &[u64],
    mode: Mode,
    rng: &mut RngStream,
    cap: u64,
) -> Result<Vec<Trajectory>, EvalError> {
    if checkpoints.is_empty() || checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(EvalError::BadCheckpoints);
    }
    if checkpoints[0] == 0 {
        return Err(EvalError::ZeroBudget);
    }
    if mode == Mode::Bernoulli && !instance.is_all_bernoulli() {
        return Err(EvalError::NotBernoulli);
    }

    let final_budget = *checkpoints.last().expect("nonempty");

    let mut spent = 0.0;
    let mut reward_sum = 0.0;
    let mut pulls = vec![0u64; instance.k()];
    let mut round = 0u64;
    let mut next = 0usize;
    let mut out = Vec::with_capacity(checkpoints.len());

    while next < checkpoints.len() {
        round += 1;
        if round > cap {
            return Err(EvalError::RoundCapExceeded {
                cap,
                budget: final_budget,
            });
        }
        let arm = policy.select(round, spent, rng);
        let (reward, cost) = instance.pull(arm, rng)?;
        pulls[arm] += 1;
        let spent_after = spent + cost;

        // Settle every checkpoint this round exhausts. Draining the budget
        // exactly keeps the reward; overshooting forfeits it.
        while next < checkpoints.len() && spent_after >= checkpoints[next] as f64 {
            let budget = checkpoints[next];
            let forfeited = spent_after > budget as f64;
            out.push(Trajectory {
                budget,
                stopping_time: round,
                pulls: pulls.clone(),
                total_reward: if forfeited { reward_sum } else { reward_sum + reward },
                total_cost: spent_after,
            });
            next += 1;
        }
        if next >= checkpoints.len() {
            break;
        }
        reward_sum += reward;
        spent = spent_after;
        policy.update(arm, reward, cost, rng)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::DistributionSpec;
    use crate::instance::ArmModel;
    use crate::policy::{build_policy, PolicyKind};

    fn bernoulli_instance(params: &[(f64, f64)]) -> BanditInstance {
        BanditInstance::new(
            params
                .iter()
                .map(|&(r, c)| {
                    ArmModel::new(
                        DistributionSpec::bernoulli(r),
                        DistributionSpec::bernoulli(c),
                    )
                })
                .collect(),
        )
        .unwrap()
    }

    fn fixed_instance(params: &[(f64, f64)]) -> BanditInstance {
        BanditInstance::new(
            params
                .iter()
                .map(|&(r, c)| {
                    ArmModel::new(DistributionSpec::fixed(r), DistributionSpec::fixed(c))
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn unit_costs_exhaust_integer_budget_exactly() {
        let instance = fixed_instance(&[(0.5, 1.0), (0.4, 1.0)]);
        let mut policy = build_policy(&PolicyKind::KubeVariant, 2, 10, Mode::General).unwrap();
        let mut rng = RngStream::from_seed(0);
        let t =
            run_trajectory(&instance, policy.as_mut(), 10, Mode::General, &mut rng).unwrap();
        assert_eq!(t.stopping_time, 10);
        assert_eq!(t.total_cost, 10.0);
        assert_eq!(t.pulls.iter().sum::<u64>(), 10);
    }

    #[test]
    fn single_round_budget() {
        let instance = fixed_instance(&[(0.5, 1.0), (0.1, 1.0)]);
        let mut policy = build_policy(&PolicyKind::KubeVariant, 2, 1, Mode::General).unwrap();
        let mut rng = RngStream::from_seed(0);
        let t = run_trajectory(&instance, policy.as_mut(), 1, Mode::General, &mut rng).unwrap();
        assert_eq!(t.stopping_time, 1);
        assert_eq!(t.total_reward, 0.5);
    }

    #[test]
    fn bernoulli_mode_total_cost_is_exactly_the_budget() {
        let instance = bernoulli_instance(&[(0.6, 0.5), (0.3, 0.5)]);
        for seed in 0..20 {
            let mut policy = build_policy(&PolicyKind::Bts, 2, 37, Mode::Bernoulli).unwrap();
            let mut rng = RngStream::from_seed(seed);
            let t = run_trajectory(&instance, policy.as_mut(), 37, Mode::Bernoulli, &mut rng)
                .unwrap();
            assert_eq!(t.total_cost, 37.0);
            assert_eq!(t.pulls.iter().sum::<u64>(), t.stopping_time);
        }
    }

    #[test]
    fn overshooting_pull_forfeits_its_reward() {
        // Cost 0.75 per pull, budget 1: the second pull overshoots
        // (remaining 0.25 < 0.75), so only the first reward is kept.
        let instance = fixed_instance(&[(0.5, 0.75), (0.5, 0.75)]);
        let mut policy = build_policy(&PolicyKind::KubeVariant, 2, 1, Mode::General).unwrap();
        let mut rng = RngStream::from_seed(0);
        let t = run_trajectory(&instance, policy.as_mut(), 1, Mode::General, &mut rng).unwrap();
        assert_eq!(t.stopping_time, 2);
        assert_eq!(t.total_reward, 0.5);
        assert_eq!(t.total_cost, 1.5);
    }

    #[test]
    fn exact_drain_keeps_the_final_reward() {
        let instance = fixed_instance(&[(0.5, 0.5), (0.5, 0.5)]);
        let mut policy = build_policy(&PolicyKind::KubeVariant, 2, 2, Mode::General).unwrap();
        let mut rng = RngStream::from_seed(0);
        let t = run_trajectory(&instance, policy.as_mut(), 2, Mode::General, &mut rng).unwrap();
        assert_eq!(t.stopping_time, 4);
        assert_eq!(t.total_reward, 2.0);
        assert_eq!(t.total_cost, 2.0);
    }

    #[test]
    fn bernoulli_mode_rejects_non_bernoulli_instances() {
        let instance = fixed_instance(&[(0.5, 1.0), (0.4, 1.0)]);
        let mut policy = build_policy(&PolicyKind::Bts, 2, 5, Mode::Bernoulli).unwrap();
        let mut rng = RngStream::from_seed(0);
        assert!(matches!(
            run_trajectory(&instance, policy.as_mut(), 5, Mode::Bernoulli, &mut rng),
            Err(EvalError::NotBernoulli)
        ));
    }

    #[test]
    fn rejects_bad_budgets_and_checkpoints() {
        let instance = bernoulli_instance(&[(0.6, 0.5), (0.3, 0.5)]);
        let mut policy = build_policy(&PolicyKind::Bts, 2, 5, Mode::Bernoulli).unwrap();
        let mut rng = RngStream::from_seed(0);
        assert!(matches!(
            run_trajectory(&instance, policy.as_mut(), 0, Mode::Bernoulli, &mut rng),
            Err(EvalError::ZeroBudget)
        ));
        assert!(matches!(
            run_checkpointed(&instance, policy.as_mut(), &[], Mode::Bernoulli, &mut rng),
            Err(EvalError::BadCheckpoints)
        ));
        assert!(matches!(
            run_checkpointed(
                &instance,
                policy.as_mut(),
                &[5, 5],
                Mode::Bernoulli,
                &mut rng
            ),
            Err(EvalError::BadCheckpoints)
        ));
    }

    #[test]
    fn optimal_value_formulas() {
        let instance = bernoulli_instance(&[(0.5, 0.5), (0.25, 0.5)]);
        let v = optimal_value(&instance, 100, Mode::Bernoulli);
        assert_eq!(v.value, 100.0);
        assert!(!v.is_upper_bound);

        let instance = bernoulli_instance(&[(0.8, 0.4), (0.25, 0.5)]);
        assert_eq!(optimal_value(&instance, 1000, Mode::Bernoulli).value, 2000.0);
        let v = optimal_value(&instance, 1000, Mode::General);
        assert_eq!(v.value, 2002.0);
        assert!(v.is_upper_bound);
    }

    #[test]
    fn always_optimal_deterministic_play_has_zero_regret() {
        let instance = fixed_instance(&[(0.5, 1.0), (0.2, 1.0)]);
        let trajectory = Trajectory {
            budget: 10,
            stopping_time: 10,
            pulls: vec![10, 0],
            total_reward: 5.0,
            total_cost: 10.0,
        };
        let b = pseudo_regret(&instance, &trajectory, Mode::Bernoulli);
        assert_eq!(b.regret, 0.0);
        assert_eq!(b.pull_decomposition, 0.0);
    }

    #[test]
    fn pull_decomposition_arithmetic() {
        // Gap 0.5 and mean cost 0.5 on the suboptimal arm: 100 pulls
        // decompose to 25 lost reward.
        let instance = bernoulli_instance(&[(0.5, 0.5), (0.25, 0.5)]);
        let trajectory = Trajectory {
            budget: 200,
            stopping_time: 300,
            pulls: vec![200, 100],
            total_reward: 150.0,
            total_cost: 200.0,
        };
        let b = pseudo_regret(&instance, &trajectory, Mode::Bernoulli);
        assert!((b.pull_decomposition - 25.0).abs() < 1e-12);
    }

    #[test]
    fn identical_arms_have_zero_decomposition() {
        let instance = bernoulli_instance(&[(0.5, 0.5), (0.5, 0.5)]);
        let trajectory = Trajectory {
            budget: 50,
            stopping_time: 100,
            pulls: vec![30, 70],
            total_reward: 40.0,
            total_cost: 50.0,
        };
        let b = pseudo_regret(&instance, &trajectory, Mode::Bernoulli);
        assert_eq!(b.pull_decomposition, 0.0);
    }

    #[test]
    fn identical_arms_mean_reward_matches_exact_optimum() {
        // Two identical 0.5/0.5 arms: any policy nets ratio * budget = 50 in
        // expectation. 2e4 runs, 3 sigma.
        let instance = bernoulli_instance(&[(0.5, 0.5), (0.5, 0.5)]);
        let runs = 20_000;
        let budget = 50;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for seed in 0..runs {
            let mut policy = build_policy(&PolicyKind::Bts, 2, budget, Mode::Bernoulli).unwrap();
            let mut rng = RngStream::from_seed(seed);
            let t = run_trajectory(&instance, policy.as_mut(), budget, Mode::Bernoulli, &mut rng)
                .unwrap();
            sum += t.total_reward;
            sumsq += t.total_reward * t.total_reward;
        }
        let n = runs as f64;
        let mean = sum / n;
        let se = ((sumsq / n - mean * mean) / n).sqrt();
        assert!(
            (mean - 50.0).abs() < 3.0 * se,
            "mean {mean} not within 3se ({se}) of 50"
        );
    }

    #[test]
    fn mean_regret_is_nonnegative_in_bernoulli_mode() {
        let instance = bernoulli_instance(&[(0.7, 0.4), (0.3, 0.6)]);
        let runs = 5_000;
        let budget = 30;
        let mut total = 0.0;
        for seed in 0..runs {
            let mut policy = build_policy(&PolicyKind::Bts, 2, budget, Mode::Bernoulli).unwrap();
            let mut rng = RngStream::from_seed(1_000_000 + seed);
            let t = run_trajectory(&instance, policy.as_mut(), budget, Mode::Bernoulli, &mut rng)
                .unwrap();
            total += pseudo_regret(&instance, &t, Mode::Bernoulli).regret;
        }
        let mean = total / runs as f64;
        // Allow a little Monte Carlo slack below zero.
        assert!(mean > -0.1, "mean regret {mean}");
    }

    #[test]
    fn regret_accountings_agree_in_expectation() {
        // Eq-style realized regret and the pull decomposition have the same
        // mean in bernoulli mode; check at 4 combined standard errors.
        let instance = bernoulli_instance(&[(0.6, 0.5), (0.3, 0.5)]);
        let runs = 10_000u64;
        let budget = 5;
        let (mut s1, mut q1, mut s2, mut q2) = (0.0, 0.0, 0.0, 0.0);
        for seed in 0..runs {
            let mut policy = build_policy(&PolicyKind::Bts, 2, budget, Mode::Bernoulli).unwrap();
            let mut rng = RngStream::from_seed(seed);
            let t = run_trajectory(&instance, policy.as_mut(), budget, Mode::Bernoulli, &mut rng)
                .unwrap();
            let b = pseudo_regret(&instance, &t, Mode::Bernoulli);
            s1 += b.regret;
            q1 += b.regret * b.regret;
            s2 += b.pull_decomposition;
            q2 += b.pull_decomposition * b.pull_decomposition;
        }
        let n = runs as f64;
        let (m1, m2) = (s1 / n, s2 / n);
        let se1 = ((q1 / n - m1 * m1) / n).sqrt();
        let se2 = ((q2 / n - m2 * m2) / n).sqrt();
        let combined = (se1 * se1 + se2 * se2).sqrt();
        assert!(
            (m1 - m2).abs() <= 4.0 * combined,
            "means {m1} vs {m2}, combined se {combined}"
        );
    }

    #[test]
    fn checkpoints_match_fresh_runs_on_the_same_stream() {
        let instance = bernoulli_instance(&[(0.6, 0.5), (0.35, 0.45)]);
        let checkpoints = [5, 20, 60];
        for seed in 0..50 {
            let mut policy = build_policy(&PolicyKind::Bts, 2, 60, Mode::Bernoulli).unwrap();
            let mut rng = RngStream::from_seed(seed);
            let all = run_checkpointed(
                &instance,
                policy.as_mut(),
                &checkpoints,
                Mode::Bernoulli,
                &mut rng,
            )
            .unwrap();
            assert_eq!(all.len(), checkpoints.len());
            for (t, &b) in all.iter().zip(&checkpoints) {
                let mut fresh_policy =
                    build_policy(&PolicyKind::Bts, 2, b, Mode::Bernoulli).unwrap();
                let mut fresh_rng = RngStream::from_seed(seed);
                let fresh = run_trajectory(
                    &instance,
                    fresh_policy.as_mut(),
                    b,
                    Mode::Bernoulli,
                    &mut fresh_rng,
                )
                .unwrap();
                assert_eq!(t, &fresh, "seed {seed} budget {b}");
            }
        }
    }

    #[test]
    fn checkpoints_match_fresh_runs_in_general_mode() {
        let instance = BanditInstance::new(vec![
            ArmModel::new(
                DistributionSpec::multinomial(vec![0.2, 0.9], vec![0.5, 0.5]),
                DistributionSpec::multinomial(vec![0.3, 0.8], vec![0.4, 0.6]),
            ),
            ArmModel::new(
                DistributionSpec::bernoulli(0.4),
                DistributionSpec::fixed(0.7),
            ),
        ])
        .unwrap();
        let checkpoints = [3, 11, 40];
        for seed in 100..130 {
            let mut policy = build_policy(&PolicyKind::Bts, 2, 40, Mode::General).unwrap();
            let mut rng = RngStream::from_seed(seed);
            let all = run_checkpointed(
                &instance,
                policy.as_mut(),
                &checkpoints,
                Mode::General,
                &mut rng,
            )
            .unwrap();
            for (t, &b) in all.iter().zip(&checkpoints) {
                let mut fresh_policy = build_policy(&PolicyKind::Bts, 2, b, Mode::General).unwrap();
                let mut fresh_rng = RngStream::from_seed(seed);
                let fresh = run_trajectory(
                    &instance,
                    fresh_policy.as_mut(),
                    b,
                    Mode::General,
                    &mut fresh_rng,
                )
                .unwrap();
                assert_eq!(t, &fresh, "seed {seed} budget {b}");
            }
        }
    }

    #[test]
    fn round_cap_formula() {
        assert_eq!(round_cap(10, 0.5), 2000);
        assert_eq!(round_cap(1, 1.0), 100);
    }

    #[test]
    fn round_cap_reports_runaway_runs() {
        // Costs are almost always zero, so a tiny cap trips before the
        // budget drains.
        let instance = BanditInstance::new(vec![
            ArmModel::new(
                DistributionSpec::bernoulli(0.5),
                DistributionSpec::multinomial(vec![0.0, 1.0], vec![0.999_999, 1e-6]),
            ),
            ArmModel::new(
                DistributionSpec::bernoulli(0.5),
                DistributionSpec::multinomial(vec![0.0, 1.0], vec![0.999_999, 1e-6]),
            ),
        ])
        .unwrap();
        let mut policy = build_policy(&PolicyKind::KubeVariant, 2, 1, Mode::General).unwrap();
        let mut rng = RngStream::from_seed(0);
        match run_checkpointed_capped(
            &instance,
            policy.as_mut(),
            &[1],
            Mode::General,
            &mut rng,
            50,
        ) {
            Err(EvalError::RoundCapExceeded { cap: 50, .. }) => {}
            other => panic!("expected round cap error, got {other:?}"),
        }
    }
}
