//! Batch front end for `orbitkit`.
//!
//! Exit statuses: 0 success, 1 I/O failure, 2 bad configuration or usage,
//! 3 theorem hypotheses violated, 4 numerical failure, 5 invariant breach or
//! failed validation. The thread count comes from `ORBITKIT_THREADS`.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::ffi::OsString;

use clap::Parser;

use crate::args::{Cli, Task};
use crate::config::ExperimentConfig;
use crate::error::CliError;

pub const THREADS_VAR: &str = "ORBITKIT_THREADS";

fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::config(THREADS_VAR, format!("`{raw}` is not a positive integer")))?;
    // a second run in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    init_threads()?;
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    match cli.command.merge(&mut cfg)? {
        Task::MapEval => commands::map_eval(&cfg),
        Task::Index => commands::index(&cfg),
        Task::Rotation => commands::rotation(&cfg),
        Task::Orbits => commands::orbits(&cfg),
        Task::Action => commands::action(&cfg),
        Task::PropertyP => commands::property_p(&cfg),
        Task::Validate(table) => commands::validate(&cfg, &table),
    }
}

/// Parses `args` (program name first), runs, and returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
