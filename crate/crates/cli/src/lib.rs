//! The `phidro` command-line tool.

pub mod args;
pub mod commands;
pub mod config;
pub mod emit;

use std::collections::BTreeMap;

use clap::Parser;

use args::{Cli, Command};
use config::Resolver;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl From<phidro::Error> for CliError {
    fn from(e: phidro::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Usage(e.to_string())
        }
    }
}

/// Parses `argv` and runs the chosen subcommand.
pub fn run<I, T>(argv: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) if e.use_stderr() => return Err(CliError::Usage(e.render().to_string())),
        Err(e) => {
            print!("{}", e.render());
            return Ok(());
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("`threads` must be at least 1".into()));
        }
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let file = match &cli.config {
        Some(p) => config::load_config(p)?,
        None => BTreeMap::new(),
    };
    let resolver = Resolver::new(file);
    let common = commands::Common {
        seed: cli.seed,
        format: cli.format,
    };
    match cli.command {
        Command::InnerSolve(a) => commands::inner_solve(a, &common, resolver),
        Command::Density(a) => commands::density(a, &common, resolver),
        Command::EstimatorStats(a) => commands::estimator_stats(a, &common, resolver),
        Command::Train(a) => commands::train(a, &common, resolver),
        Command::AttackEval(a) => commands::attack_eval(a, &common, resolver),
        Command::Regfx(a) => commands::regfx(a, &common, resolver),
        Command::Rl(a) => commands::rl(a, &common, resolver),
        Command::Pricing(a) => commands::pricing(a, &common, resolver),
    }
}
