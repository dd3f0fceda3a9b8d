use std::process::ExitCode;

use clap::Parser;
use compdyn_cli::{run, Cli};

fn main() -> ExitCode {
    // usage errors exit with status 2 from inside `parse`
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
