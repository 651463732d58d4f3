//! Seed derivation and experiment execution.

use crate::eval::{pseudo_regret, run_checkpointed};
use crate::policy::build_policy;
use crate::rng::RngStream;

use super::config::{ExperimentConfig, ResolvedExperiment, ResolvedPolicy};
use super::HarnessError;

/// One output record: a single run of one policy evaluated at one budget.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub policy: String,
    pub budget: u64,
    pub run: u64,
    pub seed: u64,
    pub regret: f64,
    pub total_reward: f64,
    pub total_cost: f64,
    pub stopping_time: u64,
    pub pulls_optimal: u64,
    pub pulls: Vec<u64>,
}

/// A run that aborted (runaway round cap); carried alongside the good rows
/// rather than poisoning the whole experiment.
#[derive(Clone, Debug)]
pub struct RowError {
    pub policy: String,
    pub budget: u64,
    pub run: u64,
    pub seed: u64,
    pub message: String,
}

#[derive(Clone, Debug, Default)]
pub struct ExperimentOutput {
    /// Sorted by (policy position in config, budget, run).
    pub rows: Vec<ResultRow>,
    pub errors: Vec<RowError>,
}

/// SplitMix64 finalizer: the standard 64-bit avalanche used to spread seed
/// material.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives the per-run stream seed from the experiment coordinates.
///
/// Defined bit-exactly as repeated SplitMix64 finalization,
///
/// ```text
/// h0 = mix(base_seed ^ 0x9e3779b97f4a7c15)
/// h1 = mix(h0 ^ policy_id)
/// h2 = mix(h1 ^ budget)
/// seed = mix(h2 ^ run_index)
/// ```
///
/// where `policy_id` is the policy's zero-based position in the config's
/// policy list. Distinct coordinate tuples collide only with avalanche
/// probability (~2^-64).
pub fn derive_seed(base_seed: u64, policy_id: u64, budget: u64, run_index: u64) -> u64 {
    let h = mix(base_seed ^ 0x9e37_79b9_7f4a_7c15);
    let h = mix(h ^ policy_id);
    let h = mix(h ^ budget);
    mix(h ^ run_index)
}

/// One schedulable unit: a single seeded run producing one row per budget it
/// is evaluated at.
struct WorkItem<'a> {
    policy: &'a ResolvedPolicy,
    run: u64,
    /// Budgets recorded by this run; the run plays to the last one.
    budgets: Vec<u64>,
}

fn plan(resolved: &ResolvedExperiment) -> Vec<WorkItem<'_>> {
    let mut items = Vec::new();
    for policy in &resolved.policies {
        let checkpointed = resolved
            .checkpoint_budgets
            .as_ref()
            .filter(|_| !policy.kind.needs_budget_in_advance());
        for run in 0..resolved.runs {
            match checkpointed {
                Some(cb) => items.push(WorkItem {
                    policy,
                    run,
                    budgets: cb.clone(),
                }),
                None => {
                    for &budget in &resolved.budgets {
                        items.push(WorkItem {
                            policy,
                            run,
                            budgets: vec![budget],
                        });
                    }
                }
            }
        }
    }
    items
}

fn execute(resolved: &ResolvedExperiment, item: &WorkItem<'_>) -> Result<Vec<ResultRow>, RowError> {
    let final_budget = *item.budgets.last().expect("planned items have budgets");
    let seed = derive_seed(
        resolved.base_seed,
        item.policy.policy_id,
        final_budget,
        item.run,
    );
    let row_error = |message: String| RowError {
        policy: item.policy.label.clone(),
        budget: final_budget,
        run: item.run,
        seed,
        message,
    };

    let mut rng = RngStream::from_seed(seed);
    let mut policy = build_policy(
        &item.policy.kind,
        resolved.instance.k(),
        final_budget,
        resolved.mode,
    )
    .map_err(|e| row_error(e.to_string()))?;
    let trajectories = run_checkpointed(
        &resolved.instance,
        policy.as_mut(),
        &item.budgets,
        resolved.mode,
        &mut rng,
    )
    .map_err(|e| row_error(e.to_string()))?;

    Ok(trajectories
        .into_iter()
        .map(|t| {
            let breakdown = pseudo_regret(&resolved.instance, &t, resolved.mode);
            ResultRow {
                policy: item.policy.label.clone(),
                budget: t.budget,
                run: item.run,
                seed,
                regret: breakdown.regret,
                total_reward: t.total_reward,
                total_cost: t.total_cost,
                stopping_time: t.stopping_time,
                pulls_optimal: t.pulls[resolved.instance.optimal_arm()],
                pulls: t.pulls,
            }
        })
        .collect())
}

fn assemble(
    resolved: &ResolvedExperiment,
    results: Vec<(usize, Result<Vec<ResultRow>, RowError>)>,
) -> ExperimentOutput {
    let mut keyed_rows = Vec::new();
    let mut keyed_errors = Vec::new();
    for (policy_idx, result) in results {
        match result {
            Ok(rows) => {
                for row in rows {
                    keyed_rows.push((policy_idx, row));
                }
            }
            Err(err) => keyed_errors.push((policy_idx, err)),
        }
    }
    keyed_rows.sort_by_key(|(idx, row)| (*idx, row.budget, row.run));
    keyed_errors.sort_by_key(|(idx, err)| (*idx, err.budget, err.run));
    let _ = resolved;
    ExperimentOutput {
        rows: keyed_rows.into_iter().map(|(_, r)| r).collect(),
        errors: keyed_errors.into_iter().map(|(_, e)| e).collect(),
    }
}

/// Runs the whole experiment on the current thread.
pub fn run_experiment_sequential(config: &ExperimentConfig) -> Result<ExperimentOutput, HarnessError> {
    let resolved = config.validate()?;
    let items = plan(&resolved);
    let results = items
        .iter()
        .map(|item| (item.policy.policy_id as usize, execute(&resolved, item)))
        .collect();
    Ok(assemble(&resolved, results))
}

/// Runs the experiment across a worker pool (`threads = None` uses the
/// default pool size) and returns rows in the same canonical order as the
/// sequential runner. Built without the `parallel` feature this falls back
/// to sequential execution.
#[cfg(feature = "parallel")]
pub fn run_experiment(
    config: &ExperimentConfig,
    threads: Option<usize>,
) -> Result<ExperimentOutput, HarnessError> {
    use rayon::prelude::*;

    let resolved = config.validate()?;
    let items = plan(&resolved);
    let map = |item: &WorkItem<'_>| (item.policy.policy_id as usize, execute(&resolved, item));
    let results: Vec<_> = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| HarnessError::ThreadPool(e.to_string()))?
            .install(|| items.par_iter().map(map).collect()),
        None => items.par_iter().map(map).collect(),
    };
    Ok(assemble(&resolved, results))
}

#[cfg(not(feature = "parallel"))]
pub fn run_experiment(
    config: &ExperimentConfig,
    _threads: Option<usize>,
) -> Result<ExperimentOutput, HarnessError> {
    run_experiment_sequential(config)
}
