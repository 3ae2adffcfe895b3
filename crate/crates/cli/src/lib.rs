//! `erdim` command-line front end: reads a JSON config, runs one subcommand
//! and writes a CSV file with `#` metadata lines.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid config or arguments,
//! 3 numerical failure.

mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};
use thiserror::Error;

use config::RunConfig;
use output::{write_atomic, Table};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "erdim", version, about = "Effective reservoir dimension estimates and checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Effective reservoir dimension for one parameter set.
    Estimate(Common),
    /// log2 d_ER over an (n gamma T, gamma tau) grid.
    Heatmap(Common),
    /// Finite-mode and continuum solutions of the qubit-in-a-band model.
    ExactRun(Common),
    /// Markov and two-level-reservoir fits of a sigma_z series.
    Fit(Common),
    /// Propagates one of the GKSL models.
    LindbladRun(Common),
    /// Schmidt entropies and truncation errors of a random timeline network.
    TrnVerify(Common),
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Worker threads for parallel sections.
    #[arg(long, env = "ERDIM_THREADS")]
    threads: Option<usize>,
    /// Overrides the seed in the config block.
    #[arg(long)]
    seed: Option<u64>,
}

/// Runs the tool on `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("erdim: {e}");
            e.exit_code()
        }
    }
}

fn missing_block(name: &str) -> CliError {
    CliError::Config(format!("missing field `{name}` (the subcommand's config block)"))
}

fn execute(command: Command) -> Result<(), CliError> {
    let (name, common) = match &command {
        Command::Estimate(c) => ("estimate", c),
        Command::Heatmap(c) => ("heatmap", c),
        Command::ExactRun(c) => ("exact-run", c),
        Command::Fit(c) => ("fit", c),
        Command::LindbladRun(c) => ("lindblad-run", c),
        Command::TrnVerify(c) => ("trn-verify", c),
    };
    let bytes = std::fs::read(&common.config)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", common.config.display())))?;
    let cfg = RunConfig::parse(&bytes)?;
    let hash = Sha256::digest(&bytes);
    let config_dir = common.config.parent().map(Path::to_path_buf).unwrap_or_default();

    let block_seed = match &command {
        Command::Fit(_) => cfg.fit.as_ref().and_then(|f| f.seed),
        Command::TrnVerify(_) => cfg.trn_verify.as_ref().and_then(|t| t.seed),
        _ => None,
    };
    let seed = common.seed.or(block_seed).unwrap_or(0);

    let job = || -> Result<Table, CliError> {
        match &command {
            Command::Estimate(_) => commands::estimate(cfg.estimate.as_ref().ok_or_else(|| missing_block(name))?),
            Command::Heatmap(_) => commands::heatmap_grid(cfg.heatmap.as_ref().ok_or_else(|| missing_block(name))?),
            Command::ExactRun(_) => commands::exact_run(cfg.exact_run.as_ref().ok_or_else(|| missing_block(name))?),
            Command::Fit(_) => {
                commands::fit(cfg.fit.as_ref().ok_or_else(|| missing_block(name))?, seed, &config_dir)
            }
            Command::LindbladRun(_) => {
                commands::lindblad_run(cfg.lindblad_run.as_ref().ok_or_else(|| missing_block(name))?)
            }
            Command::TrnVerify(_) => {
                commands::trn_verify(cfg.trn_verify.as_ref().ok_or_else(|| missing_block(name))?, seed)
            }
        }
    };
    let table = match common.threads {
        Some(0) => return Err(CliError::Config("`--threads` must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Io(format!("thread pool: {e}")))?
            .install(job)?,
        None => job()?,
    };

    let preamble = vec![
        ("erdim".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ("command".to_string(), name.to_string()),
        ("config_sha256".to_string(), format!("{hash:x}")),
        ("seed".to_string(), seed.to_string()),
    ];
    write_atomic(&common.out, &table.render(&preamble))
}
