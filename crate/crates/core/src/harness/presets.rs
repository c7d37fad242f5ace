use std::path::Path;

use super::config::{ExperimentConfig, RunKind};
use crate::error::{Error, Result};
use crate::kernels::FeedbackKernel;
use crate::spectral::{critical_gain, ModelParams};
use crate::trajectory::{InitialState, Reducer, TrajectoryConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// `s = 0.5` trajectories just below and above threshold.
    Fig2a,
    /// `s = 20` trajectories at `G/G_crit ∈ {0.5, 1.5}`.
    Fig2b,
    /// Variance sweeps and exponent fits for `s ∈ {0.5, 1, 2, 5, 20}`.
    Fig3,
    /// Full-SME ensemble `⟨S_x⟩` against `G` for one spin.
    FigS2,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Fig2a, Preset::Fig2b, Preset::Fig3, Preset::FigS2];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig2a => "fig2a",
            Preset::Fig2b => "fig2b",
            Preset::Fig3 => "fig3",
            Preset::FigS2 => "figS2",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == name)
            .ok_or_else(|| Error::Config(format!("unknown preset `{name}`")))
    }
}

pub const FIG3_EXPONENTS: [f64; 5] = [0.5, 1.0, 2.0, 5.0, 20.0];

/// Sixteen `G/G_crit` values from 0.8 to 0.999, geometric in the distance to threshold.
pub fn fig3_ratios() -> Vec<f64> {
    (0..16)
        .map(|i| 1.0 - 0.2 * (0.001f64 / 0.2).powf(i as f64 / 15.0))
        .collect()
}

fn power_law(s: f64) -> Result<FeedbackKernel<f64>> {
    FeedbackKernel::normalized_power_law(1.0, s)
}

fn trajectories(
    prefix: &str,
    s: f64,
    cases: &[(&str, f64)],
    t_max: f64,
    horizon: f64,
    out: &Path,
) -> Result<Vec<ExperimentConfig>> {
    let kernel = power_law(s)?;
    let model = ModelParams::fig2();
    let gc = critical_gain(&model, &kernel)?;
    cases
        .iter()
        .map(|(tag, r)| {
            let mut traj = TrajectoryConfig::reduced(0.01, t_max, 1);
            traj.memory_horizon = horizon;
            traj.record_every = 5;
            Ok(ExperimentConfig {
                label: format!("{prefix}_{tag}"),
                output_dir: out.to_path_buf(),
                model: model.with_gain(r * gc),
                kernel: kernel.clone(),
                run: RunKind::Trajectory(traj),
            })
        })
        .collect()
}

/// Experiment configs making up a preset, writing into `out`.
pub fn preset_configs(p: Preset, out: &Path) -> Result<Vec<ExperimentConfig>> {
    match p {
        Preset::Fig2a => trajectories("fig2a", 0.5, &[("below", 0.95), ("above", 1.05)], 100.0, 100.0, out),
        Preset::Fig2b => trajectories("fig2b", 20.0, &[("below", 0.5), ("above", 1.5)], 60.0, 20.0, out),
        Preset::Fig3 => FIG3_EXPONENTS
            .iter()
            .map(|&s| {
                Ok(ExperimentConfig {
                    label: format!("fig3_s{s}"),
                    output_dir: out.to_path_buf(),
                    model: ModelParams::fig2(),
                    kernel: power_law(s)?,
                    run: RunKind::VarianceSweep {
                        g_ratios: fig3_ratios(),
                        fit: true,
                    },
                })
            })
            .collect(),
        Preset::FigS2 => {
            let mut traj = TrajectoryConfig::full_sme(0.005, 20.0, 1, 5);
            traj.memory_horizon = 20.0;
            traj.initial_state = InitialState::CoherentTilt(0.02);
            traj.record_every = 20;
            Ok(vec![ExperimentConfig {
                label: "figS2".into(),
                output_dir: out.to_path_buf(),
                model: ModelParams::fig_s2(),
                kernel: power_law(1.0)?,
                run: RunKind::Ensemble {
                    traj,
                    n_traj: 100,
                    reducer: Reducer::MeanObservable,
                    g_ratios: vec![0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0, 2.5, 3.0],
                },
            }])
        }
    }
}
