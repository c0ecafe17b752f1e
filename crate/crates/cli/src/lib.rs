//! Command-line front end for the `pdm-core` library: spectra tables, sampled
//! potentials and wavefunctions, and the verification suite.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod verify;

pub use config::{Cli, Command, RunConfig};
pub use error::{CliError, Result};

/// Run one parsed command and return the process exit code.
pub fn run(command: &Command) -> Result<i32> {
    let config = command.options().resolve()?;
    let (text, code) = match command {
        Command::Spectrum(_) => (commands::cmd_spectrum(&config)?, 0),
        Command::Potential(_) => (commands::cmd_potential(&config)?, 0),
        Command::Wavefunction(_) => (commands::cmd_wavefunction(&config)?, 0),
        Command::Verify(_) => {
            let report = verify::run_verify(&config)?;
            let code = if report.pass { 0 } else { 1 };
            (commands::render_verify(&config, &report)?, code)
        }
    };
    output::emit(&config, &text)?;
    Ok(code)
}
