//! `flowline solve|verify|frontal|identities --config <path>`.

mod config;
mod report;
mod tasks;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use flowline::FlowError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Command {
    Solve,
    Verify,
    Frontal,
    Identities,
}

/// Flows through k samples of a worldline family: solve, verify, certify.
#[derive(Debug, Parser)]
#[command(name = "flowline", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output file; overrides `output.path` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for randomized checks; overrides `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides law tolerances (verify, identities), the Newton tolerance
    /// (solve) or the certificate threshold (frontal).
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Debug)]
pub struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        CliError {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<FlowError> for CliError {
    fn from(err: FlowError) -> Self {
        let code = match &err {
            e if e.is_inversion_failure() => 2,
            FlowError::Localization(_) => 4,
            _ => 1,
        };
        CliError {
            code,
            message: err.to_string(),
        }
    }
}

fn run(args: Args) -> Result<u8, CliError> {
    let config = config::load(&args.config)?;
    let out = args.out.clone().or_else(|| config.output.path.clone());
    if let Some(tol) = args.tol {
        if !(tol >= 0.0) {
            return Err(CliError::validation("--tol must be a nonnegative number"));
        }
    }
    let ctx = tasks::Context {
        seed: args.seed.unwrap_or(config.seed),
        tolerance: args.tol,
        config,
    };
    let outcome = match args.command {
        Command::Solve => tasks::solve(&ctx)?,
        Command::Verify => tasks::verify(&ctx)?,
        Command::Frontal => tasks::frontal(&ctx)?,
        Command::Identities => tasks::identities(&ctx)?,
    };
    let text = outcome.report.render();
    print!("{text}");
    let write = |path: &PathBuf, body: &str| {
        std::fs::write(path, body).map_err(|e| CliError::validation(format!("cannot write {}: {e}", path.display())))
    };
    match (&outcome.samples, &out) {
        (Some(csv), Some(path)) => write(path, csv)?,
        (Some(csv), None) => print!("\n{csv}"),
        (None, Some(path)) => write(path, &text)?,
        (None, None) => {}
    }
    Ok(outcome.exit_code)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(args) => args,
        Err(err) => {
            let _ = err.print();
            let code = if err.use_stderr() { 1 } else { 0 };
            return ExitCode::from(code);
        }
    };
    match run(args) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {}", err.message);
            ExitCode::from(err.code)
        }
    }
}
