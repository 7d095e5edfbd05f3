mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;

use crate::args::Cli;
use crate::output::Failure;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Refused { diagnostic, output }) => {
            eprintln!("{diagnostic}");
            if let Err(Failure::Config(d) | Failure::Refused { diagnostic: d, .. }) =
                output::emit(output.as_deref(), &diagnostic)
            {
                eprintln!("{d}");
            }
            ExitCode::from(2)
        }
        Err(Failure::Config(diagnostic)) => {
            eprintln!("{diagnostic}");
            ExitCode::from(1)
        }
    }
}
