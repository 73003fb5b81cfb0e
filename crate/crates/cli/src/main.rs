//! `conversum`: cross-lingual summarization pipeline driver.
//!
//! Subcommands wire the pipeline end to end: `generate` fills the
//! candidate cache, `score` ranks candidates with LaSE, `train` fits the
//! re-ranking scorer under the contrastive ranking loss, `evaluate`
//! reports LaSE/BERTScore over the test split, and `compare-llm` runs
//! the LLM comparison protocol.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage or config error.

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::{Overrides, PipelineConfig};

/// Errors split by exit class.
#[derive(Debug)]
pub enum CliError {
    /// Usage or configuration problems: exit code 2.
    Usage(String),
    /// Runtime failures: exit code 1.
    Runtime(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) | CliError::Runtime(msg) => f.write_str(msg),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "conversum",
    version,
    about = "Cross-lingual summarization: candidate generation, LaSE scoring, contrastive re-ranker training, evaluation and LLM comparison"
)]
struct Cli {
    /// Pipeline config file (canonical JSON).
    #[arg(long, global = true, default_value = "conversum.json")]
    config: PathBuf,

    /// Override the config's global seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Override the config's worker count.
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Fail on the first invalid record instead of skipping it.
    #[arg(long, global = true)]
    strict: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate diverse candidate summaries into the cache (idempotent).
    Generate,
    /// Rank cached candidates with LaSE and dump scored candidates.
    Score,
    /// Train the re-ranking scorer on the scored dumps.
    Train,
    /// Evaluate re-ranked (or baseline) picks on the test split.
    Evaluate {
        /// Use the generator's first beam instead of a trained scorer.
        #[arg(long)]
        baseline: bool,
    },
    /// Compare an LLM against the pipeline on configured language pairs.
    CompareLlm,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let overrides = Overrides {
        seed: cli.seed,
        workers: cli.workers,
        strict: cli.strict,
    };
    let config = PipelineConfig::load(&cli.config, &overrides)?;
    match cli.command {
        Command::Generate => commands::generate::run(&config),
        Command::Score => commands::score::run(&config),
        Command::Train => commands::train::run(&config),
        Command::Evaluate { baseline } => commands::evaluate::run(&config, baseline),
        Command::CompareLlm => commands::compare_llm::run(&config),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
