use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fpt_core::harness::{apply_seed, run_experiment, run_preset, ExperimentConfig, Preset};
use fpt_core::Result;

#[derive(Parser)]
#[command(
    name = "fpt",
    version,
    about = "Feedback-induced criticality: spectra, trajectories, bath comparison"
)]
struct Cli {
    /// Config file (`key = value unit` lines). Its `run` key is replaced by the subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overriding `output_dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Trajectory seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Do not list written files.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// D(ω), S(ω) and H(ω) on a frequency grid.
    Spectrum,
    /// Critical gain and stability roots.
    Critical,
    /// Variance against G/G_crit, with optional exponent fit.
    VarianceSweep,
    /// One stochastic trajectory.
    Traj,
    /// Trajectory ensemble with a reducer.
    Ensemble,
    /// Matched-kernel feedback against the bosonic bath.
    BathCompare,
    /// Map BEC parameters onto the spin model.
    BecMap,
    /// Run a named preset: fig2a, fig2b, fig3 or figS2.
    Preset { name: String },
}

fn load(cli: &Cli, run: &str) -> Result<ExperimentConfig> {
    let text = match &cli.config {
        Some(p) => std::fs::read_to_string(p)?,
        None => String::new(),
    };
    let mut body: String = text
        .lines()
        .filter(|l| l.split_once('=').map_or(true, |(k, _)| k.trim() != "run"))
        .flat_map(|l| [l, "\n"])
        .collect();
    body.push_str(&format!("run = {run}\n"));
    let mut cfg = ExperimentConfig::parse(&body)?;
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        apply_seed(&mut cfg, seed);
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<Vec<PathBuf>> {
    let kind = match &cli.cmd {
        Cmd::Spectrum => "spectrum",
        Cmd::Critical => "critical",
        Cmd::VarianceSweep => "variance_sweep",
        Cmd::Traj => "trajectory",
        Cmd::Ensemble => "ensemble",
        Cmd::BathCompare => "bath_compare",
        Cmd::BecMap => "bec_map",
        Cmd::Preset { name } => {
            let preset = Preset::from_name(name)?;
            let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
            return run_preset(preset, &out, cli.seed);
        }
    };
    run_experiment(&load(cli, kind)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(paths) => {
            if !cli.quiet {
                for p in paths {
                    println!("{}", p.display());
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            let rec = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{rec}");
            ExitCode::from(1)
        }
    }
}
