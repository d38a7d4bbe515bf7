//! The `pacing` command line and its experiment pipelines.
//!
//! Every pipeline returns a plain report struct; [`report::ExperimentReport`]
//! wraps one with its configuration and seeds, and `pacing report` melts it
//! into a long-format CSV. Report rows carry the SHA-256 of their source
//! instance's JSON. Pipelines run on a rayon pool sized by `PACING_WORKERS`.

pub mod commands;
pub mod exit;
pub mod gap;
pub mod misreport;
pub mod report;
pub mod scalability;
pub mod store;
pub mod study;

use std::ffi::OsString;

use clap::Parser;

pub use exit::{CliError, CliResult, Exit};

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match commands::Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                Exit::Parse.code()
            } else {
                Exit::Ok.code()
            };
            let _ = e.print();
            return code;
        }
    };
    match commands::execute(cli) {
        Ok(exit) => exit.code(),
        Err(e) => {
            eprintln!("error: {e}");
            e.exit.code()
        }
    }
}
