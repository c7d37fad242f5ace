//! Configuration, presets and CSV emission.

pub mod bec;
pub mod config;
pub mod presets;

pub use bec::{bec_to_model, BecMapping, BecParams};
pub use config::{ExperimentConfig, RunKind};
pub use presets::{fig3_ratios, preset_configs, Preset};

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::bath::{bath_char_poly, bath_noise_spectrum, bath_soft_mode, geometric_grid, matched_kernel, Cutoff};
use crate::error::{Error, Result};
use crate::spectral::{
    char_poly, critical_gain, fit_critical_exponent, noise_spectrum, quadrature_variance, stability_roots,
    StabilityRoot,
};
use crate::trajectory::{ensemble, ensemble_map, run_trajectory, Reducer, SummaryKind, TrajectoryRecord};

/// Format used for every numeric CSV cell; 17 significant digits round-trip `f64`.
pub fn num(x: f64) -> String {
    format!("{x:.17e}")
}

/// A CSV body plus `result.*` header lines.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub results: Vec<(String, String)>,
}

impl Table {
    fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            ..Self::default()
        }
    }

    fn row(&mut self, values: &[f64]) {
        self.rows.push(values.iter().map(|v| num(*v)).collect());
    }

    fn result(&mut self, key: &str, value: impl ToString) {
        self.results.push((key.to_string(), value.to_string()));
    }
}

fn timestamp() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

/// Render a table with the metadata header: version, timestamp, config echo, results.
pub fn render_csv(header_config: &str, table: &Table) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# fpt-core output");
    let _ = writeln!(s, "# meta.version = {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(s, "# meta.timestamp = {}", timestamp());
    for line in header_config.lines() {
        let _ = writeln!(s, "# {line}");
    }
    for (k, v) in &table.results {
        let _ = writeln!(s, "# result.{k} = {v}");
    }
    let _ = writeln!(s, "{}", table.columns.join(","));
    for r in &table.rows {
        let _ = writeln!(s, "{}", r.join(","));
    }
    s
}

/// Non-comment lines of an emitted CSV: column header plus data.
pub fn csv_data(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

fn write(cfg: &ExperimentConfig, kind: &str, header: &str, table: &Table) -> Result<PathBuf> {
    std::fs::create_dir_all(&cfg.output_dir)?;
    let path = cfg.output_dir.join(format!("{}_{kind}.csv", cfg.label));
    std::fs::write(&path, render_csv(header, table))?;
    Ok(path)
}

fn grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 || !(hi > lo) || lo < 0.0 {
        return Err(Error::Config(
            "frequency grid needs 0 <= omega_min < omega_max and points >= 2".into(),
        ));
    }
    Ok((0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect())
}

fn root_cells(root: &StabilityRoot<f64>) -> (&'static str, f64) {
    match root {
        StabilityRoot::SoftMode(w) => ("soft_mode", *w),
        StabilityRoot::Growth(l) => ("growth", *l),
    }
}

/// Run one experiment and write its CSV files; returns the paths written.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let header = cfg.to_config_string()?;
    let p = &cfg.model;
    let k = &cfg.kernel;
    p.validate()?;
    match &cfg.run {
        RunKind::Spectrum {
            omega_min,
            omega_max,
            points,
        } => {
            let mut t = Table::new(&["omega", "D_re", "D_im", "S", "H_re", "H_im"]);
            for w in grid(*omega_min, *omega_max, *points)? {
                let d = char_poly(p, k, w)?;
                let h = k.transform(w)?;
                t.row(&[w, d.re, d.im, noise_spectrum(p, k, w)?, h.re, h.im]);
            }
            match critical_gain(p, k) {
                Ok(gc) => t.result("g_crit", num(gc)),
                Err(e) => t.result("g_crit", e.kind()),
            }
            match stability_roots(p, k) {
                Ok(r) => {
                    let (kind, v) = root_cells(&r);
                    t.result(kind, num(v));
                }
                Err(e) => t.result("root", e.kind()),
            }
            match quadrature_variance(p, k) {
                Ok(v) => t.result("variance", num(v.value)),
                Err(e) => t.result("variance", e.kind()),
            }
            t.result("adiabatic_advisory", p.adiabatic_advisory());
            Ok(vec![write(cfg, "spectrum", &header, &t)?])
        }
        RunKind::Critical { g_ratios } => {
            let gc = critical_gain(p, k)?;
            let mut t = Table::new(&["G_over_Gc", "G", "root_kind", "root"]);
            t.result("g_crit", num(gc));
            t.result("char_poly_at_g_crit", num(char_poly(&p.with_gain(gc), k, 0.0)?.re));
            for &r in g_ratios {
                let (kind, v) = root_cells(&stability_roots(&p.with_gain(r * gc), k)?);
                t.rows.push(vec![num(r), num(r * gc), kind.into(), num(v)]);
            }
            Ok(vec![write(cfg, "critical", &header, &t)?])
        }
        RunKind::VarianceSweep { g_ratios, fit } => {
            let gc = critical_gain(p, k)?;
            let mut t = Table::new(&["G_over_Gc", "G", "variance", "quad_error"]);
            t.result("g_crit", num(gc));
            let mut curve = Vec::with_capacity(g_ratios.len());
            for &r in g_ratios {
                let v = quadrature_variance(&p.with_gain(r * gc), k)?;
                curve.push((r * gc, v.value));
                t.row(&[r, r * gc, v.value, v.error]);
            }
            let mut out = vec![write(cfg, "sweep", &header, &t)?];
            if *fit {
                let f = fit_critical_exponent(&curve, gc)?;
                let se = f.std_errors.unwrap_or([f64::NAN; 3]);
                let mut ft = Table::new(&["A", "alpha", "B", "se_A", "se_alpha", "se_B", "residual", "g_crit"]);
                ft.row(&[f.a, f.alpha, f.b, se[0], se[1], se[2], f.residual, f.g_crit_used]);
                out.push(write(cfg, "fit", &header, &ft)?);
            }
            Ok(out)
        }
        RunKind::Trajectory(tc) => {
            let rec = run_trajectory(p, k, tc)?;
            Ok(vec![write(cfg, "traj", &header, &trajectory_table(&rec))?])
        }
        RunKind::Ensemble {
            traj,
            n_traj,
            reducer,
            g_ratios,
        } => {
            if g_ratios.is_empty() {
                let summary = ensemble(p, k, traj, *n_traj, *reducer)?;
                let mut t = match &summary.kind {
                    SummaryKind::Mean(m) => {
                        let mut cols = vec!["t".to_string()];
                        for c in &m.channels {
                            cols.push(format!("{c}_mean"));
                            cols.push(format!("{c}_stderr"));
                        }
                        let mut t = Table {
                            columns: cols,
                            ..Table::default()
                        };
                        for i in 0..m.times.len() {
                            let mut row = vec![m.times[i]];
                            for c in 0..m.channels.len() {
                                row.push(m.mean[c][i]);
                                row.push(m.stderr[c][i]);
                            }
                            t.row(&row);
                        }
                        t
                    }
                    SummaryKind::Frequency(f) | SummaryKind::Growth(f) => {
                        let mut t = Table::new(&["index", "value"]);
                        for (i, v) in f.values.iter().enumerate() {
                            t.row(&[i as f64, *v]);
                        }
                        t.result("mean", num(f.mean));
                        t.result("std_dev", num(f.std_dev));
                        t.result("relative_spread", num(f.relative_spread));
                        t
                    }
                };
                t.result("n_ok", summary.n_ok);
                t.result("n_failed", summary.n_failed);
                Ok(vec![write(cfg, "ensemble", &header, &t)?])
            } else {
                if *reducer != Reducer::MeanObservable {
                    return Err(Error::Config(
                        "an ensemble G curve needs ensemble.reducer = mean".into(),
                    ));
                }
                let gc = critical_gain(p, k)?;
                let mut t = Table::new(&[
                    "G_over_Gc",
                    "G",
                    "primary_mean",
                    "primary_stderr",
                    "abs_primary_mean",
                    "abs_primary_stderr",
                    "n_ok",
                    "n_failed",
                ]);
                t.result("g_crit", num(gc));
                for &r in g_ratios {
                    let runs = ensemble_map(&p.with_gain(r * gc), k, traj, *n_traj, |rec| Ok(late_average(&rec)))?;
                    let ok: Vec<(f64, f64)> = runs.into_iter().filter_map(|r| r.ok()).collect();
                    let failed = *n_traj - ok.len();
                    let (m, se) = mean_stderr(ok.iter().map(|v| v.0));
                    let (ma, sea) = mean_stderr(ok.iter().map(|v| v.1));
                    t.row(&[r, r * gc, m, se, ma, sea, ok.len() as f64, failed as f64]);
                }
                Ok(vec![write(cfg, "ensemble", &header, &t)?])
            }
        }
        RunKind::BathCompare {
            bath,
            omega_min,
            omega_max,
            points,
        } => {
            if bath.cutoff != Cutoff::Exponential {
                return Err(Error::InvalidParameter(
                    "bath comparison tabulates beta and needs the exponential cutoff".into(),
                ));
            }
            let times = geometric_grid(1e-4 / bath.omega_c, 1.002, 400.0 / bath.omega_c);
            let matched = matched_kernel(bath, p.omega_r, p.feedback_coupling(), &times, 2.0)?;
            let mut t = Table::new(&[
                "omega",
                "feedback_D_re",
                "feedback_D_im",
                "bath_D_re",
                "bath_D_im",
                "J",
                "bath_noise",
                "feedback_noise",
            ]);
            for w in grid(*omega_min, *omega_max, *points)? {
                let fd = char_poly(p, &matched, w)?;
                let bd = bath_char_poly(p.omega_r, bath, w)?;
                t.row(&[
                    w,
                    fd.re,
                    fd.im,
                    bd.re,
                    bd.im,
                    bath.spectral_function(w)?,
                    bath_noise_spectrum(p.omega_r, bath, w)?,
                    noise_spectrum(p, &matched, w)?,
                ]);
            }
            match stability_roots(p, &matched) {
                Ok(r) => {
                    let (kind, v) = root_cells(&r);
                    t.result(&format!("feedback_{kind}"), num(v));
                }
                Err(e) => t.result("feedback_root", e.kind()),
            }
            match bath_soft_mode(p.omega_r, bath) {
                Ok(v) => t.result("bath_soft_mode", num(v)),
                Err(e) => t.result("bath_soft_mode", e.kind()),
            }
            Ok(vec![write(cfg, "bath", &header, &t)?])
        }
        RunKind::BecMap(b) => {
            let m = bec_to_model(b)?;
            let mut t = Table::new(&["quantity", "value"]);
            for (name, v) in [
                ("delta", m.model.delta),
                ("omega_r", m.model.omega_r),
                ("g", m.model.g),
                ("g_signed", m.g_signed),
                ("kappa", m.model.kappa),
                ("theta", m.model.theta),
                ("feedback_scale", m.feedback_scale),
                ("v0_in_gain_units", m.v0_in_gain_units),
            ] {
                t.rows.push(vec![name.into(), num(v)]);
            }
            Ok(vec![write(cfg, "bec", &header, &t)?])
        }
    }
}

fn trajectory_table(rec: &TrajectoryRecord<f64>) -> Table {
    let mut cols = vec!["t".to_string()];
    cols.extend(rec.channel_names().iter().map(|c| c.to_string()));
    cols.push("photocurrent".into());
    cols.push("I_c".into());
    let mut t = Table {
        columns: cols,
        ..Table::default()
    };
    let chans = rec.channels();
    for i in 0..rec.times.len() {
        let mut row = vec![rec.times[i]];
        row.extend(chans.iter().map(|c| c[i]));
        row.push(rec.photocurrent[i]);
        row.push(rec.i_c[i]);
        t.row(&row);
    }
    t.result("truncated", rec.truncated);
    t
}

/// Mean of the primary channel and of its magnitude over the last quarter of the record.
fn late_average(rec: &TrajectoryRecord<f64>) -> (f64, f64) {
    let y = rec.primary();
    let tail = &y[y.len() - (y.len() / 4).max(1)..];
    let n = tail.len() as f64;
    (
        tail.iter().sum::<f64>() / n,
        tail.iter().map(|v| v.abs()).sum::<f64>() / n,
    )
}

fn mean_stderr(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let v: Vec<f64> = values.collect();
    let n = v.len() as f64;
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let m = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (m, f64::NAN);
    }
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

/// Run every experiment of a preset. `seed` overrides trajectory seeds.
pub fn run_preset(preset: Preset, out: &Path, seed: Option<u64>) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let mut exponents = Table::new(&["s", "alpha", "se_alpha", "A", "B", "residual"]);
    for mut cfg in preset_configs(preset, out)? {
        if let Some(s) = seed {
            apply_seed(&mut cfg, s);
        }
        written.extend(run_experiment(&cfg)?);
        if preset == Preset::Fig3 {
            if let (RunKind::VarianceSweep { .. }, crate::kernels::KernelShape::PowerLaw { s, .. }) =
                (&cfg.run, cfg.kernel.shape())
            {
                let fit_path = written.last().expect("sweep writes a fit file");
                let text = std::fs::read_to_string(fit_path)?;
                let row: Vec<f64> = csv_data(&text)[1]
                    .split(',')
                    .map(|c| c.parse().unwrap_or(f64::NAN))
                    .collect();
                exponents.row(&[*s, row[1], row[4], row[0], row[2], row[6]]);
            }
        }
    }
    if preset == Preset::Fig3 {
        std::fs::create_dir_all(out)?;
        let path = out.join("fig3_exponents.csv");
        std::fs::write(&path, render_csv("preset = fig3\n", &exponents))?;
        written.push(path);
    }
    Ok(written)
}

/// Replace the trajectory seed of any stochastic run.
pub fn apply_seed(cfg: &mut ExperimentConfig, seed: u64) {
    match &mut cfg.run {
        RunKind::Trajectory(t) | RunKind::Ensemble { traj: t, .. } => t.seed = seed,
        _ => {}
    }
}
