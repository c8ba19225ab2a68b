//! Command-line front end: parses flags (optionally from a JSON config),
//! runs one subcommand, writes CSV or JSON and a run manifest.

pub mod args;
mod commands;
pub mod config;
mod output;

use std::ffi::OsString;
use std::io::Write;
use std::time::Instant;

use clap::Parser;
use serde_json::json;

use args::Cli;
pub use output::{fmt_f64, Outcome};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// A bad request caught after parsing (maps to exit 2).
#[derive(Debug)]
pub struct Usage(pub String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn is_usage(err: &anyhow::Error) -> bool {
    if err.downcast_ref::<Usage>().is_some() {
        return true;
    }
    use genplasma::Error as E;
    matches!(
        err.downcast_ref::<E>(),
        Some(E::InvalidConfig(_) | E::InvalidArgument(_) | E::CoincidentPoints { .. } | E::DimensionTooLarge(_))
    )
}

/// Runs the CLI on `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let argv = match config::merge(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return EXIT_USAGE;
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    if let Some(n) = cli.global.threads {
        // A second call in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let start = Instant::now();
    let result = commands::execute(&cli);
    let wall = start.elapsed().as_secs_f64();
    let code = match &result {
        Ok(o) if o.pass => EXIT_OK,
        Ok(_) => EXIT_VALIDATION,
        Err(e) if is_usage(e) => EXIT_USAGE,
        Err(_) => EXIT_VALIDATION,
    };
    let written = match &result {
        Ok(outcome) => {
            eprintln!("{}", outcome.summary);
            output::write(&cli.global, outcome)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            Ok(())
        }
    };
    if let Err(e) = written {
        eprintln!("error: {e:#}");
        return EXIT_VALIDATION;
    }
    let manifest = json!({
        "command": cli.command.name(),
        "params": cli.command,
        "global": cli.global,
        "versions": {
            "genplasma": genplasma::VERSION,
            "genplasma-cli": env!("CARGO_PKG_VERSION"),
        },
        "seed": cli.global.seed,
        "wall_time_seconds": wall,
        "exit_code": code,
    });
    if let Err(e) = output::write_manifest(&cli.global, &manifest) {
        eprintln!("error: writing manifest: {e:#}");
    }
    let _ = std::io::stderr().flush();
    code
}
