use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use kerrbit_cli::{run, worker_count, CliError, Subcommand};

/// Dispersive-regime bifurcation readout simulations.
#[derive(Parser)]
#[command(name = "kerrbit", version)]
struct Args {
    #[arg(value_enum)]
    subcommand: Subcommand,
    /// Configuration file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `[output] directory`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; overrides KERRBIT_WORKERS.
    #[arg(long)]
    workers: Option<usize>,
}

fn execute(args: &Args) -> Result<(), CliError> {
    if let Some(n) = worker_count(args.workers)? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    for path in run(args.subcommand, &args.config, args.out.as_deref())? {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = Args::parse();
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
