//! `fde`: profiles, expansions and annulus runs for the radial fast diffusion equation.
//!
//! Exit codes: 0 completed or PASS, 2 FAIL, 3 INCONCLUSIVE, 1 usage or configuration error.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "fde", version, about = "Singular self-similar solutions of the fast diffusion equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the derived constants and regime flags.
    Constants(Common),
    /// Compute a profile and check its invariants and growth limits.
    Profile(Common),
    /// Compare the higher-order blow-up expansion with a computed profile.
    Expansion(Common),
    /// Run the annulus solver and write snapshots.
    Evolve(Common),
    /// Weighted L¹ contraction between two runs.
    Contract(Common),
    /// Convergence of a rescaled run to a profile.
    Converge(Common),
    /// Spatial and temporal refinement against the Barenblatt solution.
    ValidateBarenblatt(Common),
}

#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// JSON configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Overrides {
    /// Spatial dimension.
    #[arg(long)]
    pub n: Option<u32>,
    /// Diffusion exponent, 0 < m < (n-2)/n.
    #[arg(long)]
    pub m: Option<f64>,
    /// Self-similar exponent, negative.
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    /// Far-field amplitude of g.
    #[arg(long)]
    pub eta: Option<f64>,
    /// Profile index of the convergence target.
    #[arg(long)]
    pub lambda0: Option<f64>,
    /// Lower profile of the ordering band.
    #[arg(long)]
    pub lambda1: Option<f64>,
    /// Upper profile of the ordering band.
    #[arg(long)]
    pub lambda2: Option<f64>,
    /// Profile index inside weights.
    #[arg(long)]
    pub lambda3: Option<f64>,
    /// Exponent of the power weight.
    #[arg(long)]
    pub mu: Option<f64>,
    /// Outer radius of the annulus.
    #[arg(long = "R")]
    pub radius: Option<f64>,
    /// Number of grid nodes.
    #[arg(long = "N")]
    pub nodes: Option<usize>,
    /// Time step.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Final time.
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Far-field horizon in log r.
    #[arg(long)]
    pub smax: Option<f64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let result = match &cli.command {
        Command::Constants(c) => commands::constants(c),
        Command::Profile(c) => commands::profile(c),
        Command::Expansion(c) => commands::expansion(c),
        Command::Evolve(c) => commands::evolve(c),
        Command::Contract(c) => commands::contract(c),
        Command::Converge(c) => commands::converge(c),
        Command::ValidateBarenblatt(c) => commands::validate_barenblatt(c),
    };
    match result {
        Ok(outcome) => ExitCode::from(outcome.code()),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
