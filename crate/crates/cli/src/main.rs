//! `bbsim`: run budgeted-bandit experiments, print bound constants,
//! aggregate result files, and emit generated instance specs.
//!
//! Exit codes: 0 on success, 1 for configuration problems (unreadable or
//! invalid config, bad flags), 2 for runtime failures (I/O on outputs,
//! runaway runs).

use std::fs::File;
use std::io::{BufReader, BufWriter, Write as _};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};

use budgeted_bandits::harness::{
    aggregate, read_rows_csv, run_experiment, write_aggregate_csv, write_rows_csv,
    ExperimentConfig,
};
use budgeted_bandits::theory::{bts_ln_budget_constant, gaps, ucb_bv1_ln_budget_constant};
use budgeted_bandits::{generate_instance, BanditInstance, Family, Mode};

#[derive(Parser)]
#[command(name = "bbsim", version, about = "Budgeted multi-armed bandit simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file and write raw result
    /// rows as CSV.
    Run(RunArgs),
    /// Print the per-arm gap quantities and the two ln-budget regret
    /// coefficients for a config's instance.
    Bounds(BoundsArgs),
    /// Reduce a raw results CSV to per-(policy, budget) mean and standard
    /// deviation of regret.
    Aggregate(AggregateArgs),
    /// Emit a generated instance spec as JSON on stdout.
    GenInstance(GenInstanceArgs),
    /// Estimate the value of always pulling one arm by Monte Carlo.
    #[cfg(feature = "oracle-cli")]
    Oracle(OracleArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output path for the raw rows CSV.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads (default: all cores; 1 forces single-threaded).
    #[arg(long)]
    threads: Option<usize>,
    /// Override the config's base_seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    config: PathBuf,
    /// Gap parameter in (0, 1); defaults to 1/sqrt(2), the value at which
    /// the posterior-sampling coefficient is usually quoted.
    #[arg(long, default_value_t = std::f64::consts::FRAC_1_SQRT_2)]
    gamma: f64,
}

#[derive(Args)]
struct AggregateArgs {
    /// Raw rows CSV produced by `run`.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GenInstanceArgs {
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    arms: usize,
    #[arg(long, value_enum)]
    family: FamilyArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Bernoulli,
    Multinomial,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Bernoulli => Family::Bernoulli,
            FamilyArg::Multinomial => Family::Multinomial,
        }
    }
}

#[cfg(feature = "oracle-cli")]
#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    config: PathBuf,
    /// Arm to pull every round (0-based).
    #[arg(long)]
    arm: usize,
    #[arg(long)]
    budget: u64,
    #[arg(long, default_value_t = 100_000)]
    episodes: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

const EXIT_CONFIG: u8 = 1;
const EXIT_RUNTIME: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Bounds(args) => cmd_bounds(args),
        Command::Aggregate(args) => cmd_aggregate(args),
        Command::GenInstance(args) => cmd_gen_instance(args),
        #[cfg(feature = "oracle-cli")]
        Command::Oracle(args) => cmd_oracle(args),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}

/// Loads and validates a config file; failures here are exit-code-1
/// problems, reported directly.
fn load_config(path: &PathBuf) -> Result<ExperimentConfig, ExitCode> {
    match ExperimentConfig::from_path(path) {
        Ok(config) => match config.validate() {
            Ok(_) => Ok(config),
            Err(err) => {
                eprintln!("config error: {err}");
                Err(ExitCode::from(EXIT_CONFIG))
            }
        },
        Err(err) => {
            eprintln!("config error: {err}");
            Err(ExitCode::from(EXIT_CONFIG))
        }
    }
}

fn cmd_run(args: RunArgs) -> anyhow::Result<ExitCode> {
    let mut config = match load_config(&args.config) {
        Ok(c) => c,
        Err(code) => return Ok(code),
    };
    if let Some(seed) = args.seed {
        config.base_seed = seed;
    }
    if config.mode == Mode::General {
        eprintln!(
            "note: general mode scores against an upper bound on the optimum; \
             the regret column is upper-bound regret"
        );
    }
    let output = run_experiment(&config, args.threads)?;
    let file = File::create(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    write_rows_csv(BufWriter::new(file), &output.rows)?;
    eprintln!(
        "wrote {} rows to {}",
        output.rows.len(),
        args.out.display()
    );
    if output.errors.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        for err in &output.errors {
            eprintln!(
                "run error: policy={} budget={} run={} seed={}: {}",
                err.policy, err.budget, err.run, err.seed, err.message
            );
        }
        Ok(ExitCode::from(EXIT_RUNTIME))
    }
}

fn cmd_bounds(args: BoundsArgs) -> anyhow::Result<ExitCode> {
    let config = match load_config(&args.config) {
        Ok(c) => c,
        Err(code) => return Ok(code),
    };
    let instance = config.build_instance()?;
    let budget = *config.budgets.last().expect("validated nonempty");
    let report = match gaps(&instance, args.gamma, budget) {
        Ok(r) => r,
        Err(err) => {
            eprintln!("config error: {err}");
            return Ok(ExitCode::from(EXIT_CONFIG));
        }
    };

    let out = std::io::stdout();
    let mut out = out.lock();
    writeln!(
        out,
        "instance: {} arms, optimal arm {} (ratio {:.6}), min mean cost {:.6}",
        instance.k(),
        instance.optimal_arm() + 1,
        instance.optimal_ratio(),
        instance.min_mean_cost()
    )?;
    writeln!(out, "gamma = {:.6}, budget = {budget}", report.gamma)?;
    writeln!(out)?;
    let header = format!(
        "{:>4} {:>12} {:>12} {:>12} {:>14}  phi_regime (argument)",
        "arm", "gap", "delta_gap", "eps_gap", "pull_bound"
    );
    writeln!(out, "{header}")?;
    for arm in &report.arms {
        writeln!(
            out,
            "{:>4} {:>12.6} {:>12.6} {:>12.6} {:>14.2}  {} ({:.3e})",
            arm.arm + 1,
            arm.gap,
            arm.delta_gap,
            arm.epsilon_gap,
            arm.pull_bound,
            arm.phi_regime,
            arm.phi_argument
        )?;
    }
    writeln!(out)?;
    let bts = bts_ln_budget_constant(&instance, args.gamma)
        .expect("gamma validated by the gap report");
    let ucb = ucb_bv1_ln_budget_constant(&instance);
    writeln!(out, "ln-budget coefficients:")?;
    writeln!(out, "  posterior sampling (bts): {:>14.4}", bts.value)?;
    writeln!(out, "  ucb_bv1:                  {:>14.4}", ucb.value)?;
    for (name, constant) in [("bts", &bts), ("ucb_bv1", &ucb)] {
        if !constant.excluded_arms.is_empty() {
            let arms: Vec<String> = constant
                .excluded_arms
                .iter()
                .map(|a| (a + 1).to_string())
                .collect();
            writeln!(
                out,
                "  warning: {name}: arms {{{}}} tie the optimal ratio and were excluded; \
                 the bound is vacuous for them",
                arms.join(", ")
            )?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_aggregate(args: AggregateArgs) -> anyhow::Result<ExitCode> {
    let file = File::open(&args.input)
        .with_context(|| format!("opening {}", args.input.display()))?;
    let rows = read_rows_csv(BufReader::new(file))?;
    let aggregated = aggregate(&rows)?;
    let out = File::create(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    write_aggregate_csv(BufWriter::new(out), &aggregated)?;
    eprintln!(
        "aggregated {} rows into {} groups at {}",
        rows.len(),
        aggregated.len(),
        args.out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_gen_instance(args: GenInstanceArgs) -> anyhow::Result<ExitCode> {
    if args.arms < 2 {
        eprintln!("config error: an instance needs at least 2 arms");
        return Ok(ExitCode::from(EXIT_CONFIG));
    }
    let instance: BanditInstance =
        generate_instance(args.seed, args.arms, args.family.into())?;
    let spec = serde_json::json!({ "arms": instance.arms() });
    println!("{}", serde_json::to_string_pretty(&spec)?);
    Ok(ExitCode::SUCCESS)
}

#[cfg(feature = "oracle-cli")]
fn cmd_oracle(args: OracleArgs) -> anyhow::Result<ExitCode> {
    use budgeted_bandits_oracles::mc_policy_value;

    let config = match load_config(&args.config) {
        Ok(c) => c,
        Err(code) => return Ok(code),
    };
    let instance = config.build_instance()?;
    let estimate = mc_policy_value(
        &instance,
        args.arm,
        args.budget,
        config.mode,
        args.episodes,
        args.seed,
    )?;
    let reference = instance.ratio(args.arm) * args.budget as f64;
    println!(
        "fixed-arm {} value at budget {}: {:.6} +- {:.6} ({} episodes); closed-form reference {:.6}",
        args.arm, args.budget, estimate.value, estimate.standard_error, estimate.samples, reference
    );
    Ok(ExitCode::SUCCESS)
}
