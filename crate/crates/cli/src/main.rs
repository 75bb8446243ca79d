//! `elated`: command-line access to cycles, heights, minimal numbers,
//! preimage sets, run certificates and the height 13 to 16 verifications.

mod cache;
mod commands;
mod output;

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use cache::Cache;
use output::Format;

const EXIT_DOMAIN: u8 = 2;
const EXIT_VERIFICATION: u8 = 3;
const EXIT_USAGE: u8 = 64;
const EXIT_IO: u8 = 74;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] elated::Error),
    #[error("{0}")]
    Usage(String),
    #[error("corrupt cache file {}: {reason}", path.display())]
    Cache { path: PathBuf, reason: String },
    #[error("cannot write {}: {reason}", path.display())]
    Io { path: PathBuf, reason: String },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_verification() => EXIT_VERIFICATION,
            CliError::Core(_) => EXIT_DOMAIN,
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Cache { .. } | CliError::Io { .. } => EXIT_IO,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "elated", version, about = "Elated and happy digit maps")]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    /// Directory for height-table caches (overrides ELATED_CACHE_DIR).
    #[arg(long, global = true, value_name = "PATH")]
    cache_dir: Option<PathBuf>,
    /// Numbers with more digits than this are shown in run-length form.
    #[arg(long, global = true, value_name = "N", default_value_t = elated::towerint::DEFAULT_DIGIT_CAP)]
    digit_cap: u64,
    /// Worker threads for searches.
    #[arg(long, global = true, value_name = "T")]
    threads: Option<usize>,
    /// Report wall-clock time (makes output nondeterministic).
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cycles of the elated map.
    Cycles {
        #[arg(long)]
        base: u32,
        #[arg(long, default_value_t = 2)]
        exp: u32,
        /// Descent bound; required for exponents other than 2.
        #[arg(long)]
        bound: Option<u64>,
    },
    /// Height of N, its orbit down to 1.
    Height {
        n: String,
        #[arg(long)]
        base: u32,
        /// Use the happy map instead of the elated map.
        #[arg(long)]
        happy: bool,
    },
    /// Smallest elated number of height K.
    Epsilon {
        k: u64,
        #[arg(long)]
        base: u32,
        /// Exclusive search limit (default base^20).
        #[arg(long)]
        limit: Option<String>,
    },
    /// Smallest happy number of height K.
    Sigma {
        k: u64,
        #[arg(long)]
        base: u32,
        #[arg(long)]
        limit: Option<String>,
    },
    /// Shortest fully basic numbers mapping to A.
    Preimage {
        a: String,
        #[arg(long)]
        base: u32,
        /// Force the periodic reduction and report the stripped set.
        #[arg(long)]
        reduced: bool,
    },
    /// Reduction constants a* and C.
    Constants {
        #[arg(long)]
        base: u32,
    },
    /// Certificate for a run of attracted or non-elated numbers.
    Sequence {
        #[arg(value_enum)]
        kind: SequenceKind,
        #[arg(long)]
        base: u32,
        #[arg(long)]
        length: usize,
        /// Cycle member the run is attracted to.
        #[arg(long)]
        target: Option<u64>,
        /// Largest witness shift to try.
        #[arg(long, default_value_t = elated::sequences::DEFAULT_CEILING)]
        ceiling: u64,
    },
    /// Verify the smallest elated numbers of heights 13 to K.
    VerifyTowers {
        #[arg(long, default_value_t = 16, value_parser = clap::value_parser!(u32).range(13..=16))]
        k: u32,
        /// Number of verification primes.
        #[arg(long, default_value_t = elated::towerint::DEFAULT_TRIALS)]
        primes: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SequenceKind {
    Attracted,
    Consecutive,
    Nonelated,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("elated: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let cache = Cache::new(cli.cache_dir.clone());
    let started = Instant::now();
    let (name, params, out) = commands::dispatch(&cli.command, &cache, cli.digit_cap)?;
    let timing = cli.timing.then(|| started.elapsed().as_millis());
    let stdout = io::stdout();
    let mut lock = stdout.lock();
    output::write(&mut lock, cli.format, name, &params, &out, timing)
        .and_then(|()| lock.flush())
        .map_err(|e| CliError::Io { path: PathBuf::from("<stdout>"), reason: e.to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_code_families() {
        assert_eq!(CliError::Core(elated::Error::Verification("x".into())).exit_code(), EXIT_VERIFICATION);
        assert_eq!(CliError::Core(elated::Error::DivisibilityViolated("x".into())).exit_code(), EXIT_VERIFICATION);
        assert_eq!(CliError::Core(elated::Error::Zero).exit_code(), EXIT_DOMAIN);
        assert_eq!(CliError::Usage("x".into()).exit_code(), EXIT_USAGE);
        let cache = CliError::Cache { path: PathBuf::from("f"), reason: "r".into() };
        assert_eq!(cache.exit_code(), EXIT_IO);
    }
}
