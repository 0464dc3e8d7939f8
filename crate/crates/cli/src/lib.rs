//! Command-line front end for `whirly-core`: one flag table shared by every
//! command, JSON config files, set shorthands and JSON/CSV reports.

pub mod config;
pub mod dispatch;
pub mod error;
pub mod render;
pub mod set_input;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;

pub use config::{Command, Format, RunConfig};
pub use dispatch::{plan, run, Outcome};
pub use error::CliError;
pub use set_input::{parse_set, parse_shorthand};

#[derive(Debug, Parser)]
#[command(name = "whirly-lab", version, about = "Run and verify whirly-action experiments")]
pub struct Cli {
    #[command(flatten)]
    pub run: RunConfig,
    /// JSON config file; flags on the command line override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

impl Cli {
    pub fn into_config(self) -> Result<RunConfig, CliError> {
        match &self.config {
            None => Ok(self.run),
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| error::usage(format!("cannot read config {}: {e}", path.display())))?;
                Ok(self.run.over(RunConfig::from_json(&text)?))
            }
        }
    }
}

/// Parses `args` (including the program name) and runs them.
pub fn run_args<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    exit_code: 2,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome {
                    exit_code: 0,
                    stdout: text,
                    stderr: String::new(),
                }
            };
        }
    };
    match cli.into_config() {
        Ok(cfg) => run(&cfg),
        Err(e) => Outcome::failure(&e),
    }
}
