//! Thin CLI over the harness: one trajectory emitter plus the
//! verification runners. Exit codes: 0 pass, 1 verification fail,
//! 2 config/input error. `SERE_LOG` (off|info|debug) controls logging.

use clap::{Args, Parser, Subcommand, ValueEnum};
use sere::harness::config::{ExperimentConfig, ExperimentKind};
use sere::harness::report::ReportFormat;
use sere::harness::run::{run_experiment, simulate_trajectory, trajectory_csv};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "sere", about = "Hawkes-modulated switching processes and their limit theorems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit one trajectory as CSV (time,value,state)
    Simulate(Common),
    /// Verify the event-rate law of large numbers
    VerifyLln(Common),
    /// Verify an averaging-regime limit (traffic, summation or operator)
    VerifyAveraging(Common),
    /// Verify a diffusion-regime limit (summation, traffic or operator)
    VerifyDiffusion(Common),
    /// Estimate ruin probabilities over a ladder of initial capitals
    Ruin(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment config (flat TOML)
    #[arg(long)]
    config: PathBuf,
    /// Override the config seed
    #[arg(long)]
    seed: Option<u64>,
    /// Output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Worker threads (0 = all cores); the output never depends on this
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(
        env_logger::Env::new().filter_or("SERE_LOG", "off"),
    )
    .init();
    let cli = Cli::parse();
    match dispatch(&cli.command) {
        Ok(passed) => {
            if passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn load(common: &Common, allowed: &dyn Fn(ExperimentKind) -> bool) -> sere::Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::from_path(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if !allowed(cfg.kind) {
        return Err(sere::SereError::InvalidConfig(format!(
            "config kind `{}` does not match this subcommand",
            cfg.kind.as_str()
        )));
    }
    Ok(cfg)
}

fn write_out(common: &Common, text: &str) -> sere::Result<()> {
    match &common.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn verify(common: &Common, allowed: &dyn Fn(ExperimentKind) -> bool) -> sere::Result<bool> {
    let cfg = load(common, allowed)?;
    let report = run_experiment(&cfg, common.jobs)?;
    let format = match common.format {
        Format::Csv => ReportFormat::Csv,
        Format::Json => ReportFormat::Json,
    };
    write_out(common, &report.render(format)?)?;
    Ok(report.passed)
}

fn dispatch(cmd: &Command) -> sere::Result<bool> {
    match cmd {
        Command::Simulate(common) => {
            let cfg = load(common, &|_| true)?;
            let traj = simulate_trajectory(&cfg)?;
            let text = match common.format {
                Format::Csv => trajectory_csv(&traj),
                Format::Json => {
                    let mut s = serde_json::to_string_pretty(&serde_json::json!({
                        "time": traj.times,
                        "value": traj.values,
                        "state": traj.states,
                    }))
                    .map_err(|e| sere::SereError::InvalidConfig(e.to_string()))?;
                    s.push('\n');
                    s
                }
            };
            write_out(common, &text)?;
            Ok(true)
        }
        Command::VerifyLln(common) => verify(common, &|k| k == ExperimentKind::Lln),
        Command::VerifyAveraging(common) => verify(common, &|k| k.is_averaging()),
        Command::VerifyDiffusion(common) => verify(common, &|k| k.is_diffusion()),
        Command::Ruin(common) => verify(common, &|k| k == ExperimentKind::Ruin),
    }
}
