mod commands;
mod error;
mod run_config;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use commands::analysis::{run_goodness, run_pattern, run_sweep, GoodnessArgs, PatternArgs, SweepArgs};
use commands::audit::{run_classify, run_geometry_audit, ClassifyArgs, GeometryAuditArgs};
use commands::identity::{run_circle, run_identity, run_render, CircleArgs, IdentityArgs, RenderArgs};
use error::CliError;

/// Sandpile identities on elliptical lattice domains.
#[derive(Debug, Parser)]
#[command(name = "ellipse-sandpile", version)]
struct Cli {
    /// Worker threads; 0 uses every core. Outputs do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute, audit and cache identities.
    Identity(IdentityArgs),
    /// Draw an SPG1 grain file as a PPM image.
    Render(RenderArgs),
    /// Locate a matrix relative to the integer superharmonic set.
    Classify(ClassifyArgs),
    /// Run the pattern and goodness pipeline over several k, as CSV.
    Sweep(SweepArgs),
    /// Check the ellipse geometry bounds.
    GeometryAudit(GeometryAuditArgs),
    /// Identity of a disc and its background density.
    Circle(CircleArgs),
    /// Detect the period lattice and pattern of an identity.
    Pattern(PatternArgs),
    /// Count r-good points of an identity.
    Goodness(GoodnessArgs),
}

fn run(cli: Cli) -> Result<(), CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global()
        .map_err(|e| CliError::config(format!("thread pool: {e}")))?;
    match cli.command {
        Command::Identity(a) => run_identity(a),
        Command::Render(a) => run_render(a),
        Command::Classify(a) => run_classify(a),
        Command::Sweep(a) => run_sweep(a),
        Command::GeometryAudit(a) => run_geometry_audit(a),
        Command::Circle(a) => run_circle(a),
        Command::Pattern(a) => run_pattern(a),
        Command::Goodness(a) => run_goodness(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError::new(error::EXIT_CONFIG, "Usage", e.to_string().trim());
            eprintln!("{}", err.to_json());
            return ExitCode::from(error::EXIT_CONFIG as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", err.to_json());
            ExitCode::from(err.code as u8)
        }
    }
}
