use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cosim_cli::{
    cmd_benchmark, cmd_compare, cmd_convergence, cmd_mpc, cmd_run, cmd_validate, RunOptions,
};

/// Co-simulation runner for multi-source heating plants: validates and runs
/// scenario files, drives rolling-horizon MPC and rule-based baselines, and
/// emits KPI reports and plot-ready CSV data.
#[derive(Parser)]
#[command(name = "cosim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Scenario file (TOML)
    scenario: PathBuf,
    /// Output directory for reports and CSVs [default: out]
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the scenario's master seed
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the solver's absolute bound-gap tolerance
    #[arg(long)]
    gap: Option<f64>,
}

impl CommonArgs {
    fn options(&self) -> RunOptions {
        RunOptions { out: self.out.clone(), seed: self.seed, gap: self.gap }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Checks the scenario file (and all its variants) without running it
    Validate {
        /// Scenario file (TOML)
        scenario: PathBuf,
    },
    /// Runs the scenario as declared (rule-based control or open loop)
    Run {
        #[command(flatten)]
        args: CommonArgs,
    },
    /// Runs the scenario with the MPC controller active
    Mpc {
        #[command(flatten)]
        args: CommonArgs,
    },
    /// Runs the base scenario and every variant on identical data and
    /// reports KPI deltas
    Compare {
        #[command(flatten)]
        args: CommonArgs,
    },
    /// Reruns the scenario at finer coupling periods and reports final-value
    /// differences
    Convergence {
        #[command(flatten)]
        args: CommonArgs,
        /// Refinement factors applied to the base period
        #[arg(long, value_delimiter = ',', default_value = "1,2,4")]
        multipliers: Vec<u64>,
    },
    /// Prints formulation and solve timing tables
    Benchmark {
        /// Output directory for benchmark.csv
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Validate { scenario } => cmd_validate(scenario),
        Command::Run { args } => cmd_run(&args.scenario, &args.options()),
        Command::Mpc { args } => cmd_mpc(&args.scenario, &args.options()),
        Command::Compare { args } => cmd_compare(&args.scenario, &args.options()),
        Command::Convergence { args, multipliers } => {
            cmd_convergence(&args.scenario, multipliers, &args.options())
        }
        Command::Benchmark { out } => {
            cmd_benchmark(&RunOptions { out: out.clone(), ..Default::default() })
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
