//! Command-line front end: argument parsing, run configuration, file output
//! and SVG plots.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod commands;
pub mod config;
pub mod numfmt;
pub mod plot;
pub mod potential_spec;

use std::ffi::OsString;
use std::io::Write as _;

use clap::Parser;
use liouville_core::Error;

use args::{Cli, Command};
use commands::Outcome;
use config::RunConfig;

/// Exit status when a run concludes that no solution exists.
pub const EXIT_NONEXISTENCE: i32 = 2;

/// Worker count from `LIOUVILLE_THREADS`, else the config.
fn configure_threads(cfg: &RunConfig) -> anyhow::Result<()> {
    let env = std::env::var("LIOUVILLE_THREADS").ok();
    let threads = match env.as_deref().map(str::trim).filter(|s| !s.is_empty()) {
        Some(s) => Some(s.parse::<usize>().map_err(|_| anyhow::anyhow!("LIOUVILLE_THREADS must be a count, got `{s}`"))?),
        None => cfg.threads,
    };
    if let Some(t) = threads.filter(|&t| t > 0) {
        // A second call in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    Ok(())
}

fn dispatch(cli: &Cli) -> anyhow::Result<Outcome> {
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    configure_threads(&cfg)?;
    match &cli.command {
        Command::Solve(a) => commands::solve(&cfg, a),
        Command::Scan(a) => commands::scan(&cfg, a),
        Command::Find(a) => commands::find(&cfg, a),
        Command::Verify(a) => commands::verify(&cfg, a),
        Command::Oracle(a) => commands::oracle(&cfg, a),
        Command::App(a) => commands::app(&cfg, a),
        Command::Plot(a) => commands::plot(&cfg, a),
    }
}

/// Errors that are themselves a nonexistence verdict.
fn is_nonexistence(e: &anyhow::Error) -> bool {
    matches!(
        e.downcast_ref::<Error>(),
        Some(Error::TargetOutsideBracket { .. } | Error::UnboundedEnergy { .. })
    )
}

/// Parses `argv` (program name first), runs the command and returns the exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(Outcome::Done) => 0,
        Ok(Outcome::Nonexistence) => EXIT_NONEXISTENCE,
        Err(e) if is_nonexistence(&e) => {
            let _ = writeln!(std::io::stdout(), "verdict: nonexistence");
            eprintln!("{e:#}");
            EXIT_NONEXISTENCE
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}
