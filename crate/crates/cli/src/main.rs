use std::process::ExitCode;

use clap::Parser;
use pdm_cli::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match pdm_cli::run(&cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("pdm-spectra {}: error: {e}", cli.command.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
