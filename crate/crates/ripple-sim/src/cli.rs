//! Command-line interface: one subcommand per experiment plus `validate`.
//!
//! Exit codes: 0 success, 1 validation failure, 2 config error, 3 i/o error.

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use std::fs;
use std::path::PathBuf;

use crate::error::SimError;
use crate::sweep::{self, Experiment, OutputFormat, Overrides, SweepConfig, SweepSpec};
use crate::validate::{self, ValidateOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION_FAILURE: i32 = 1;
pub const EXIT_CONFIG_ERROR: i32 = 2;
pub const EXIT_IO_ERROR: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "ripple-sim",
    version,
    about = "Berry curvature, Chern transition, and fidelity ripples of a driven qubit"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON sweep configuration; defaults are used when absent.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output file (stdout when omitted); overrides the config.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Output format; overrides the config.
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,

    /// Worker threads for grid evaluation; overrides the config.
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Base delta2/delta1 for experiments that do not sweep it.
    #[arg(long = "d2-ratio", global = true)]
    d2_ratio: Option<f64>,

    /// Ramp duration in units of 1/delta1; overrides the config protocol.
    #[arg(long = "ramp-time", global = true)]
    ramp_time: Option<f64>,

    /// Ramp step count; overrides the config protocol.
    #[arg(long, global = true)]
    steps: Option<usize>,

    /// Simpson node count for Chern quadrature.
    #[arg(long, global = true)]
    nodes: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Curvature profile over theta: closed-form, spectral, and dynamic.
    Curvature,
    /// Chern number over a d2_ratio grid (the topological transition).
    Chern,
    /// Fidelity of the equal superposition after the full ramp, per grid point.
    FidelitySweep,
    /// Dump one ramp trajectory (t, theta, state amplitudes, <sigma_y>).
    Ramp,
    /// Run every cross-module oracle and report pass/fail per check.
    Validate,
}

impl Command {
    fn experiment(&self) -> Experiment {
        match self {
            Command::Curvature => Experiment::Curvature,
            Command::Chern => Experiment::Chern,
            Command::FidelitySweep => Experiment::Fidelity,
            Command::Ramp => Experiment::Ramp,
            Command::Validate => Experiment::Validate,
        }
    }
}

fn exit_code_for(err: &SimError) -> i32 {
    match err {
        SimError::Io(_) => EXIT_IO_ERROR,
        _ => EXIT_CONFIG_ERROR,
    }
}

/// Parse `args` (argv[0] included) and run; returns the process exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_CONFIG_ERROR,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

pub fn run() -> i32 {
    run_from(std::env::args_os())
}

fn load_config(path: Option<&PathBuf>) -> Result<SweepConfig, SimError> {
    match path {
        None => Ok(SweepConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| SimError::Config(format!("cannot read {}: {e}", p.display())))?;
            SweepConfig::from_json(&text)
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32, SimError> {
    let config = load_config(cli.config.as_ref())?;
    let overrides = Overrides {
        d2_ratio: cli.d2_ratio,
        ramp_time: cli.ramp_time,
        steps: cli.steps,
        nodes: cli.nodes,
        workers: cli.workers,
        format: cli.format,
    };

    if matches!(cli.command, Command::Validate) {
        let defaults = ValidateOptions::default();
        let opts = ValidateOptions {
            chern_nodes: cli.nodes.unwrap_or(defaults.chern_nodes),
            total_time: cli.ramp_time.unwrap_or(config.protocol.total_time),
            steps: cli.steps.unwrap_or(config.protocol.steps),
            ..defaults
        };
        let report = validate::validate(&opts);
        print!("{}", report.render());
        return Ok(if report.all_passed() {
            EXIT_OK
        } else {
            EXIT_VALIDATION_FAILURE
        });
    }

    let spec = SweepSpec::resolve(cli.command.experiment(), &config, &overrides)?;
    let result = sweep::run_sweep(&spec)?;
    let out_path = cli
        .out
        .clone()
        .or_else(|| spec.output_path.as_ref().map(PathBuf::from));
    sweep::emit(&result, spec.format, out_path.as_deref())?;
    if let Some(p) = out_path {
        eprintln!(
            "wrote {} rows to {} in {:.1} ms",
            result.rows.len(),
            p.display(),
            result.metadata.wall_ms
        );
    }
    Ok(EXIT_OK)
}
