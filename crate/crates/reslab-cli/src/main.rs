//! `reslab`: runs JSON experiment specifications and the acceptance suite.

mod artifacts;
mod commands;
mod spec;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use reslab::acceptance::{self, CriterionId};

use crate::artifacts::{write_atomic, ArtifactPlan};
use crate::commands::Status;
use crate::spec::{parse_spec, SchemaError};

const EXIT_FAIL: u8 = 1;
const EXIT_SCHEMA: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "reslab", version, about = "Dynamical determinant and resonance experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one experiment specification.
    Run {
        /// JSON experiment specification.
        #[arg(long)]
        spec: PathBuf,
        /// Directory for relative artifact paths.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Replaces the governing tolerance of the checks.
        #[arg(long)]
        tol: Option<f64>,
        /// Replaces the seed of the specification.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run acceptance criteria and print a Markdown summary.
    Repro {
        /// Comma-separated criterion ids such as AC1,AC4; all by default.
        #[arg(long, value_delimiter = ',')]
        criteria: Vec<String>,
        /// Replaces the governing tolerance of every selected criterion.
        #[arg(long)]
        tol: Option<f64>,
        /// Also writes the summary to `repro.md` in this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_SCHEMA);
    }
    match cli.command {
        Command::Run { spec, out, tol, seed } => run(spec, out, tol, seed),
        Command::Repro { criteria, tol, out } => repro(&criteria, tol, out),
    }
}

/// Caps the global thread pool at `RESLAB_THREADS`.
fn configure_threads() -> anyhow::Result<()> {
    let Ok(value) = std::env::var("RESLAB_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| anyhow::anyhow!("RESLAB_THREADS must be a positive integer, got {value:?}"))?;
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    Ok(())
}

fn run(spec_path: PathBuf, out: PathBuf, tol: Option<f64>, seed: Option<u64>) -> ExitCode {
    let parsed = std::fs::read_to_string(&spec_path)
        .map_err(|source| SchemaError::Read {
            path: spec_path.clone(),
            source,
        })
        .and_then(|text| parse_spec(&text, seed));
    let spec = match parsed {
        Ok(s) => s,
        Err(e) => {
            eprintln!("schema error: {e}");
            return ExitCode::from(EXIT_SCHEMA);
        }
    };
    if let Some(t) = tol {
        if !(t >= 0.0) {
            eprintln!("schema error: --tol must be non-negative");
            return ExitCode::from(EXIT_SCHEMA);
        }
    }
    let output = match commands::execute(&spec, tol) {
        Ok(o) => o,
        Err(e) => {
            let invalid = matches!(e.downcast_ref::<reslab::Error>(), Some(reslab::Error::InvalidParameter(_)));
            eprintln!("{}: {e}", if invalid { "schema error" } else { "error" });
            return ExitCode::from(if invalid { EXIT_SCHEMA } else { EXIT_FAIL });
        }
    };
    for check in &output.checks {
        println!("{}", check.line());
    }
    let plan = ArtifactPlan::new(&spec, &out);
    let report = serde_json::json!({
        "command": spec.command().as_str(),
        "seed": spec.seed,
        "checks": output.checks,
        "data": output.data,
    });
    let written = plan.write(output.csv.as_deref(), &report);
    if let Err(e) = written {
        eprintln!("error: cannot write artifacts: {e}");
        return ExitCode::from(EXIT_FAIL);
    }
    if output.checks.iter().any(|c| c.status == Status::Fail) {
        ExitCode::from(EXIT_FAIL)
    } else {
        ExitCode::SUCCESS
    }
}

fn repro(criteria: &[String], tol: Option<f64>, out: Option<PathBuf>) -> ExitCode {
    let ids: Result<Vec<CriterionId>, _> = if criteria.is_empty() {
        Ok(CriterionId::all())
    } else {
        criteria.iter().map(|s| s.parse()).collect()
    };
    let ids = match ids {
        Ok(ids) => ids,
        Err(e) => {
            eprintln!("schema error: {e}");
            return ExitCode::from(EXIT_SCHEMA);
        }
    };
    let mut outcomes = Vec::new();
    for id in ids {
        let outcome = acceptance::run(id, tol);
        eprintln!("{}", outcome.line());
        outcomes.push(outcome);
    }
    let summary = acceptance::markdown(&outcomes);
    print!("{summary}");
    if let Some(dir) = out {
        if let Err(e) = write_atomic(&dir.join("repro.md"), summary.as_bytes()) {
            eprintln!("error: cannot write summary: {e}");
            return ExitCode::from(EXIT_FAIL);
        }
    }
    if outcomes.iter().all(|o| o.passed) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAIL)
    }
}
