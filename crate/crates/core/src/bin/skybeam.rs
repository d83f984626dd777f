use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use skybeam::config::{BackendKind, RunConfig};
use skybeam::pipeline::{self, ProblemChoice, StageOutput};
use skybeam::{Error, Result};

#[derive(Parser)]
#[command(name = "skybeam", version, about = "Solar-farm power beaming to aircraft: coverage, optimization, reports")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Time step, seconds.
    #[arg(long)]
    dt: Option<i64>,
    /// Cruise altitude in metres; repeat for several.
    #[arg(long)]
    altitude: Vec<f64>,
    #[arg(long)]
    backend: Option<BackendKind>,
    /// Farm penetration rate; repeat for a grid.
    #[arg(long = "rho-farm")]
    rho_farm: Vec<f64>,
    /// Flight penetration rate; repeat for a grid.
    #[arg(long = "rho-flight")]
    rho_flight: Vec<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Check the config and inputs, print the effective parameters and hash.
    Validate(Common),
    /// Compute (or reuse cached) coverage for every altitude.
    Coverage(Common),
    /// Optimize departure shifts.
    Schedule(Common),
    /// Sweep farm and flight penetration rates.
    Choice(Common),
    /// Report a saved plan or an external solver's values file.
    Report {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        solution: PathBuf,
        #[arg(long, default_value = "schedule")]
        problem: ProblemChoice,
    },
    /// Write the MILP in LP or MPS format.
    ExportModel {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "schedule")]
        problem: ProblemChoice,
    },
}

fn load(c: &Common) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(&c.config)?;
    if let Some(dt) = c.dt {
        cfg.dt_s = dt;
    }
    if !c.altitude.is_empty() {
        cfg.altitudes_m = c.altitude.clone();
    }
    if let Some(b) = c.backend {
        cfg.backend = b;
    }
    if !c.rho_farm.is_empty() {
        cfg.penetration.rho_farm = c.rho_farm.clone();
    }
    if !c.rho_flight.is_empty() {
        cfg.penetration.rho_flight = c.rho_flight.clone();
    }
    if let Some(out) = &c.out {
        cfg.out_dir = std::env::current_dir()
            .map_err(|e| Error::Config(e.to_string()))?
            .join(out);
    }
    Ok(cfg)
}

fn finish(out: StageOutput) -> ExitCode {
    for f in &out.files {
        println!("{}", f.display());
    }
    if out.degraded {
        ExitCode::from(4)
    } else {
        ExitCode::SUCCESS
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    Ok(match cli.command {
        Command::Validate(c) => {
            let report = pipeline::validate(&load(&c)?)?;
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            ExitCode::SUCCESS
        }
        Command::Coverage(c) => finish(pipeline::run_coverage(&load(&c)?)?),
        Command::Schedule(c) => finish(pipeline::run_schedule(&load(&c)?)?),
        Command::Choice(c) => finish(pipeline::run_choice(&load(&c)?)?),
        Command::Report {
            common,
            solution,
            problem,
        } => finish(pipeline::run_report(&load(&common)?, &solution, problem)?),
        Command::ExportModel { common, problem } => finish(pipeline::run_export(&load(&common)?, problem)?),
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", pipeline::error_json(&e));
            ExitCode::from(pipeline::exit_code(&e))
        }
    }
}
