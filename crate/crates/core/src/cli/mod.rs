//! The `spotfolio` command line: `fit`, `solve`, `simulate` and `compare`.
//!
//! Every command writes JSON (or CSV with `--format csv`) to stdout and
//! diagnostics to stderr. Exit codes: 0 on success, 2 for bad input or I/O,
//! 3 when the job is infeasible, 4 for numerical failures.

mod args;
mod commands;
mod sweep;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

pub use args::{Cli, Command, Mechanism, OutputFormat};
pub use sweep::{SweepParam, SweepSpec};

use crate::error::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

/// Exit status for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Infeasible(_) | Error::InfeasibleRecovery { .. } | Error::NeverEnters(_) => {
            EXIT_INFEASIBLE
        }
        Error::Numerical(_) | Error::NoRoot { .. } | Error::UndefinedConditional(_) => {
            EXIT_NUMERICAL
        }
        Error::InvalidParameter(_)
        | Error::OutOfRange { .. }
        | Error::Parse { .. }
        | Error::Format(_)
        | Error::EmptyData(_)
        | Error::DegenerateData(_)
        | Error::Precondition(_)
        | Error::Io { .. } => EXIT_INPUT,
    }
}

/// Runs an already parsed command line, writing results to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<(), Error> {
    match &cli.command {
        Command::Fit(a) => commands::fit(a, out),
        Command::Solve(a) => commands::solve(a, out),
        Command::Simulate(a) => commands::simulate(a, out),
        Command::Compare(a) => commands::compare(a, out),
    }
}

/// Parses `argv`, runs the command against stdout and returns the exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match run(&cli, &mut lock) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = lock.flush();
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
