use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nilcmc::io::{cmd_curvature, cmd_solve, cmd_verify, exit_code_for, init_threads_from_env, RunConfig, EXIT_INVALID};

#[derive(Parser)]
#[command(name = "nilcmc", version, about = "CMC graphs in the Heisenberg spaces Nil(tau)")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(clap::Args)]
struct Io {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve the Dirichlet problem and write the solution and report.
    Solve(Io),
    /// Tabulate closed-form and oracle mean curvature of a cylinder, cone or graph.
    Curvature(Io),
    /// Run the invariant suite.
    Verify(Io),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_threads_from_env() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_INVALID as u8);
    }
    let (Cmd::Solve(io) | Cmd::Curvature(io) | Cmd::Verify(io)) = &cli.command;
    let cfg = match RunConfig::from_path(&io.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code_for(&e) as u8);
        }
    };
    let base = io.config.parent().unwrap_or(Path::new("."));
    let outcome = match &cli.command {
        Cmd::Solve(_) => cmd_solve(&cfg, base, &io.out),
        Cmd::Curvature(_) => cmd_curvature(&cfg, base, &io.out),
        Cmd::Verify(_) => cmd_verify(&cfg, base, &io.out),
    };
    if outcome.code == 0 {
        println!("{}", outcome.message);
    } else {
        eprintln!("error: {}", outcome.message);
    }
    ExitCode::from(outcome.code as u8)
}
