//! `rmdp`: solve, check and simulate robust average-reward MDP instances.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rmdp_core::Orientation;

#[derive(Debug, Parser)]
#[command(name = "rmdp", version, about = "Robust average-reward MDP solver and verifier")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Global {
    /// Instance file (JSON).
    #[arg(long, global = true)]
    pub instance: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 1e-6)]
    pub tol: f64,
    /// Seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, conflicts_with = "csv")]
    pub json: bool,
    #[arg(long, global = true)]
    pub csv: bool,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fixed point of the discounted robust Bellman operator.
    SolveDiscounted {
        #[arg(long)]
        gamma: f64,
        #[arg(long, default_value = "sup-inf")]
        orientation: Orientation,
        /// Use policy iteration instead of value iteration.
        #[arg(long)]
        policy_iteration: bool,
    },
    /// Constant-gain solution by vanishing discount.
    SolveGain {
        #[arg(long, default_value = "sup-inf")]
        orientation: Orientation,
        /// Also extract a stationary controller policy with this slack.
        #[arg(long)]
        extract: Option<f64>,
        /// Solve both orientations and report the gap.
        #[arg(long)]
        duality: bool,
    },
    /// Span of the discounted value over a grid of discount factors.
    SpanCurve {
        #[arg(long, value_delimiter = ',', default_value = "0.9,0.99,0.999")]
        gammas: Vec<f64>,
        #[arg(long, default_value = "sup-inf")]
        orientation: Orientation,
    },
    /// Communication, unichain and overlap checks.
    CheckStructure {
        /// List counterexamples of failed checks.
        #[arg(long)]
        witnesses: bool,
    },
    /// Monte Carlo run of a controller/adversary pair.
    Simulate {
        /// Controller spec: a JSON file or inline JSON (default: the learner).
        #[arg(long)]
        controller: Option<String>,
        /// Adversary spec: a JSON file or inline JSON (default: first kernel everywhere).
        #[arg(long)]
        adversary: Option<String>,
        #[arg(long, default_value_t = 100_000)]
        steps: usize,
        #[arg(long, default_value_t = 4)]
        trajectories: usize,
        /// Initial distribution (default: uniform).
        #[arg(long, value_delimiter = ',')]
        mu: Option<Vec<f64>>,
        /// Running averages at each checkpoint, one column per trajectory.
        #[arg(long)]
        csv_out: Option<PathBuf>,
    },
    /// Exhaustive stationary-policy values next to the solver's gains.
    OracleCompare {
        /// Also compare discounted values at this discount.
        #[arg(long)]
        gamma: Option<f64>,
    },
    /// Learner against every extreme stationary adversary.
    HdSDemo {
        #[arg(long, default_value_t = rmdp_core::simulate::DEMO_STEPS)]
        steps: usize,
    },
    /// Load and validate an instance.
    Validate,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli.global, &cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
