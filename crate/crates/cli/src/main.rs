use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    tempwit_cli::main_with(tempwit_cli::Cli::parse())
}
