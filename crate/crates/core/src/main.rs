use std::process::ExitCode;

use clap::Parser;
use jc_magnus::cli::{run, Cli};

fn main() -> ExitCode {
    run(Cli::parse())
}
