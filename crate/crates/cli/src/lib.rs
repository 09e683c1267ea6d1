//! Command-line driver: reads a run configuration, runs one experiment
//! command and writes text reports and CSV tables.
//!
//! Exit codes: `0` when every check passes, `1` when a check fails, `2` for
//! configuration, I/O and usage errors.

pub mod commands;
pub mod config;
pub mod format;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;

pub use commands::{run, CliError, Command, Outcome, Report};
pub use config::{parse_config, ConfigError, RunConfig};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "staticprop", version, about = "Propagator experiments on static lattice Klein-Gordon models")]
pub struct Args {
    /// Experiment to run.
    #[arg(value_enum)]
    pub command: Command,
    /// Configuration file (`key = value` lines).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides `out` in the configuration.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Caps the global rayon pool from `STATICPROP_THREADS`.
pub fn configure_threads(value: Option<&str>) -> Result<(), CliError> {
    let Some(v) = value else { return Ok(()) };
    let n: usize = v.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| CliError::Threads(v.to_string()))?;
    // A second call in the same process finds the pool already built; the first setting stays.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn execute(args: &Args) -> Result<Outcome, CliError> {
    configure_threads(std::env::var("STATICPROP_THREADS").ok().as_deref())?;
    let text = std::fs::read_to_string(&args.config).map_err(|source| CliError::Io { path: args.config.clone(), source })?;
    let cfg = parse_config(&text)?;
    let dir = args.out.clone().or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("."));
    run(args.command, &cfg, &dir)
}

/// Parses `argv`, runs the command, prints the reports and returns the exit code.
pub fn main_with<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_PASS };
        }
    };
    match execute(&args) {
        Ok(outcome) => {
            for r in &outcome.reports {
                print!("{r}");
            }
            if outcome.passed() {
                EXIT_PASS
            } else {
                EXIT_FAIL
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}
