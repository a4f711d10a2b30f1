//! The `ftforge` command line: dataset generation, cut-set extraction,
//! inference, scoring and experiment sweeps.

pub mod args;
pub mod commands;
pub mod error;
pub mod experiment;
pub mod report;

use std::ffi::OsString;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use crate::args::{Cli, Command};
use crate::error::{CliError, CliResult};

/// Environment variable capping the number of worker threads.
pub const THREADS_VAR: &str = "FTFORGE_THREADS";

fn configure_threads() -> CliResult<()> {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::usage(format!("{THREADS_VAR} must be a positive integer, got `{value}`")))?;
    #[cfg(feature = "parallel")]
    {
        // Fails only if the pool already exists, which is harmless here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

/// Prints a line to stdout. A closed pipe (`ftforge mcs data.csv | head`)
/// is not an error.
pub(crate) fn emit(line: std::fmt::Arguments) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout().lock(), "{line}");
}

fn dispatch(cli: &Cli) -> CliResult<()> {
    configure_threads()?;
    match &cli.command {
        Command::Generate(a) => commands::generate(a),
        Command::Mcs(a) => commands::mcs(a),
        Command::Infer(a) => commands::infer(a),
        Command::Eval(a) => commands::eval(a),
        Command::Experiment(a) => {
            let outcome = experiment::experiment(a)?;
            emit(format_args!("{} runs ({} resumed, {} failed)", outcome.total, outcome.resumed, outcome.failed));
            Ok(())
        }
    }
}

/// Parses `args` and runs the command. Exit status 0 is success, 1 a usage
/// error and 2 a data or validation error.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
