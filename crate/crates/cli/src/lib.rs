//! Configuration parsing, subcommand dispatch and artifact emission for the
//! `kerrbit` command-line tool.

pub mod commands;
pub mod config;
pub mod output;

use std::path::{Path, PathBuf};

pub use commands::{dispatch, RunContext, Subcommand};
pub use config::{parse_config, ConfigError, RunConfig};
pub use output::{config_hash, write_atomic, Artifact};

/// Environment variable holding the worker count.
pub const WORKERS_ENV: &str = "KERRBIT_WORKERS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] kerrbit::Error),
    #[error("{context}: {source}")]
    Io { context: String, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// 3 for numerical failures, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Model(e) if e.is_numerical() => 3,
            _ => 2,
        }
    }
}

/// Runs one subcommand on a configuration document and returns the rendered
/// artifacts.
pub fn render(cmd: Subcommand, text: &str) -> Result<Vec<Artifact>, CliError> {
    let config = parse_config(text)?;
    let hash = config_hash(text);
    Ok(dispatch(cmd, &RunContext { config: &config, config_sha256: &hash })?)
}

/// Worker count from the flag, else [`WORKERS_ENV`], else rayon's default.
pub fn worker_count(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var(WORKERS_ENV) {
            Ok(v) => Some(v.trim().parse().map_err(|_| CliError::Usage(format!("{WORKERS_ENV}={v} is not a count")))?),
            Err(_) => None,
        },
    };
    match n {
        Some(0) => Err(CliError::Usage("worker count must be positive".into())),
        n => Ok(n),
    }
}

/// Reads the configuration, runs the pipeline and writes every artifact
/// atomically into the output directory.
pub fn run(cmd: Subcommand, config_path: &Path, out: Option<&Path>) -> Result<Vec<PathBuf>, CliError> {
    let io = |context: String| move |source| CliError::Io { context, source };
    let text = std::fs::read_to_string(config_path).map_err(io(format!("reading {}", config_path.display())))?;
    let config = parse_config(&text)?;
    let dir = out
        .map(Path::to_path_buf)
        .or_else(|| config.output_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let artifacts = render(cmd, &text)?;
    artifacts
        .iter()
        .map(|a| write_atomic(&dir, a).map_err(io(format!("writing {}", dir.join(&a.file_name).display()))))
        .collect()
}
