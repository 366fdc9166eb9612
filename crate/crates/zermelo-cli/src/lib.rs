//! Scenario-driven command line for the route-planning toolkit.

pub mod commands;
pub mod config;

use clap::{Parser, Subcommand};
use commands::{RunContext, EXIT_CONFIG, EXIT_INFEASIBLE};
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(
    name = "zermelo",
    version,
    about = "Time-optimal route planning through wind fields"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Newton-KKT refinement from the straight-line start
    Solve(CommonArgs),
    /// Graph search plus refinement of the K best candidates
    Global(CommonArgs),
    /// Finite-difference and bound-violation verification
    Verify(CommonArgs),
    /// Theoretical constants at the scenario's optimum
    Bounds(CommonArgs),
    /// Contraction rates over a ladder of starting radii
    Study(CommonArgs),
}

#[derive(clap::Args, Debug)]
pub struct CommonArgs {
    /// Scenario file (JSON)
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory
    #[arg(long)]
    pub out: PathBuf,
    /// Seed override for randomized steps
    #[arg(long)]
    pub seed: Option<u64>,
    /// Suppress progress output
    #[arg(long, default_value_t = false)]
    pub quiet: bool,
}

pub fn run(cli: Cli) -> i32 {
    let (name, args): (&str, &CommonArgs) = match &cli.command {
        Command::Solve(a) => ("solve", a),
        Command::Global(a) => ("global", a),
        Command::Verify(a) => ("verify", a),
        Command::Bounds(a) => ("bounds", a),
        Command::Study(a) => ("study", a),
    };
    let scenario = match config::load(&args.config) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{e}");
            return EXIT_CONFIG;
        }
    };
    let prep = match config::prepare(scenario, args.seed) {
        Ok(p) => p,
        Err(e @ config::ScenarioError::Infeasible { .. }) => {
            eprintln!("{e}");
            return EXIT_INFEASIBLE;
        }
        Err(e) => {
            eprintln!("{e}");
            return EXIT_CONFIG;
        }
    };
    let ctx = match RunContext::new(name, &args.config, &args.out, prep.seed, args.quiet) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("cannot start run: {e}");
            return EXIT_CONFIG;
        }
    };
    match &cli.command {
        Command::Solve(_) => commands::cmd_solve(ctx, &prep),
        Command::Global(_) => commands::cmd_global(ctx, &prep),
        Command::Verify(_) => commands::cmd_verify(ctx, &prep),
        Command::Bounds(_) => commands::cmd_bounds(ctx, &prep),
        Command::Study(_) => commands::cmd_study(ctx, &prep),
    }
}
