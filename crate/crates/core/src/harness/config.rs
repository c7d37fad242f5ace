//! Flat `key = value unit` experiment configuration.
//!
//! Frequencies and rates carry the unit `wR`, times `1/wR`, angles `rad`; the unit is
//! mandatory for those keys. Unknown keys are rejected, `meta.*` and `result.*` lines
//! are ignored so that CSV headers parse back.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use super::bec::BecParams;
use crate::bath::{BathSpec, Cutoff};
use crate::error::{Error, Result};
use crate::kernels::{Convention, FeedbackKernel, KernelShape};
use crate::spectral::ModelParams;
use crate::trajectory::{Engine, InitialState, Reducer, TrajectoryConfig};

#[derive(Debug, Clone, PartialEq)]
pub enum RunKind {
    /// `D(ω)`, `S(ω)` and `H(ω)` on a grid.
    Spectrum {
        omega_min: f64,
        omega_max: f64,
        points: usize,
    },
    /// Critical gain plus the soft-mode / growth root at each `G/G_crit`.
    Critical {
        g_ratios: Vec<f64>,
    },
    VarianceSweep {
        g_ratios: Vec<f64>,
        fit: bool,
    },
    Trajectory(TrajectoryConfig<f64>),
    /// With `g_ratios` empty the ensemble runs once at `model.gain`.
    Ensemble {
        traj: TrajectoryConfig<f64>,
        n_traj: usize,
        reducer: Reducer,
        g_ratios: Vec<f64>,
    },
    /// Feedback with the matched kernel against the bath, on the spectrum grid.
    BathCompare {
        bath: BathSpec<f64>,
        omega_min: f64,
        omega_max: f64,
        points: usize,
    },
    BecMap(BecParams),
}

impl RunKind {
    pub fn name(&self) -> &'static str {
        match self {
            RunKind::Spectrum { .. } => "spectrum",
            RunKind::Critical { .. } => "critical",
            RunKind::VarianceSweep { .. } => "variance_sweep",
            RunKind::Trajectory(_) => "trajectory",
            RunKind::Ensemble { .. } => "ensemble",
            RunKind::BathCompare { .. } => "bath_compare",
            RunKind::BecMap(_) => "bec_map",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub label: String,
    pub output_dir: PathBuf,
    pub model: ModelParams<f64>,
    pub kernel: FeedbackKernel<f64>,
    pub run: RunKind,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            label: "run".into(),
            output_dir: PathBuf::from("."),
            model: ModelParams::fig2(),
            kernel: FeedbackKernel::normalized_power_law(1.0, 0.5).expect("valid default kernel"),
            run: RunKind::Spectrum {
                omega_min: 0.0,
                omega_max: 3.0,
                points: 301,
            },
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Unit {
    None,
    Freq,
    Time,
    Angle,
}

impl Unit {
    fn token(self) -> &'static str {
        match self {
            Unit::None => "",
            Unit::Freq => "wR",
            Unit::Time => "1/wR",
            Unit::Angle => "rad",
        }
    }
}

const UNITS: &[(&str, Unit)] = &[
    ("model.delta", Unit::Freq),
    ("model.omega_r", Unit::Freq),
    ("model.g", Unit::Freq),
    ("model.kappa", Unit::Freq),
    ("model.gain", Unit::Freq),
    ("model.theta", Unit::Angle),
    ("kernel.h0", Unit::Freq),
    ("kernel.t0", Unit::Time),
    ("kernel.amplitude", Unit::Freq),
    ("kernel.rate", Unit::Freq),
    ("kernel.period", Unit::Time),
    ("spectrum.omega_min", Unit::Freq),
    ("spectrum.omega_max", Unit::Freq),
    ("traj.dt", Unit::Time),
    ("traj.t_max", Unit::Time),
    ("traj.memory_horizon", Unit::Time),
    ("bath.kappa_r", Unit::Freq),
    ("bath.omega_c", Unit::Freq),
];

const PLAIN_KEYS: &[&str] = &[
    "label",
    "output_dir",
    "run",
    "model.eta",
    "model.n_spins",
    "kernel.type",
    "kernel.s",
    "kernel.weight",
    "kernel.exponent",
    "kernel.terms",
    "kernel.delta_weight",
    "kernel.convention",
    "spectrum.points",
    "critical.g_ratios",
    "sweep.g_ratios",
    "sweep.fit",
    "traj.engine",
    "traj.seed",
    "traj.fock_dim",
    "traj.initial",
    "traj.tilt",
    "traj.noise",
    "traj.record_every",
    "traj.record_noise",
    "ensemble.n_traj",
    "ensemble.reducer",
    "ensemble.g_ratios",
    "bath.s",
    "bath.cutoff",
    "bec.omega_1",
    "bec.omega_pump",
    "bec.g_1",
    "bec.delta_a",
    "bec.omega_pump_rabi",
    "bec.n_atoms",
    "bec.k_1",
    "bec.m_a",
    "bec.v0_scale",
    "bec.kappa",
];

fn unit_of(key: &str) -> Option<Unit> {
    if let Some((_, u)) = UNITS.iter().find(|(k, _)| *k == key) {
        return Some(*u);
    }
    PLAIN_KEYS.contains(&key).then_some(Unit::None)
}

fn cfg_err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("line {line}: {msg}"))
}

/// Raw values after key and unit checks.
struct Raw(BTreeMap<String, (usize, String)>);

impl Raw {
    fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let n = i + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, rest) = line
                .split_once('=')
                .ok_or_else(|| cfg_err(n, "expected `key = value`"))?;
            let key = key.trim();
            if key.starts_with("meta.") || key.starts_with("result.") {
                continue;
            }
            let unit = unit_of(key).ok_or_else(|| cfg_err(n, format!("unknown key `{key}`")))?;
            let rest = rest.trim();
            let value = if unit == Unit::None {
                rest.to_string()
            } else {
                let (v, u) = rest
                    .rsplit_once(char::is_whitespace)
                    .ok_or_else(|| cfg_err(n, format!("`{key}` needs the unit {}", unit.token())))?;
                if u != unit.token() {
                    return Err(cfg_err(
                        n,
                        format!("`{key}` has unit `{u}`, expected `{}`", unit.token()),
                    ));
                }
                v.trim().to_string()
            };
            if map.insert(key.to_string(), (n, value)).is_some() {
                return Err(cfg_err(n, format!("duplicate key `{key}`")));
            }
        }
        Ok(Raw(map))
    }

    fn text(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(|(_, v)| v.as_str())
    }

    fn line(&self, key: &str) -> usize {
        self.0.get(key).map_or(0, |(n, _)| *n)
    }

    fn f64(&self, key: &str, default: f64) -> Result<f64> {
        match self.text(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| cfg_err(self.line(key), format!("`{key}`: `{v}` is not a number"))),
        }
    }

    fn uint<U: std::str::FromStr>(&self, key: &str, default: U) -> Result<U> {
        match self.text(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| cfg_err(self.line(key), format!("`{key}`: `{v}` is not a non-negative integer"))),
        }
    }

    fn boolean(&self, key: &str, default: bool) -> Result<bool> {
        match self.text(key) {
            None => Ok(default),
            Some("true") => Ok(true),
            Some("false") => Ok(false),
            Some(v) => Err(cfg_err(
                self.line(key),
                format!("`{key}`: expected true or false, got `{v}`"),
            )),
        }
    }

    fn list(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.text(key) {
            None => Ok(default.to_vec()),
            Some("") => Ok(Vec::new()),
            Some(v) => v
                .split(',')
                .map(|p| {
                    p.trim()
                        .parse()
                        .map_err(|_| cfg_err(self.line(key), format!("`{key}`: `{p}` is not a number")))
                })
                .collect(),
        }
    }
}

const DEFAULT_RATIOS: [f64; 9] = [0.1, 0.3, 0.5, 0.7, 0.8, 0.9, 0.95, 0.99, 0.999];

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let raw = Raw::parse(text)?;
        let d = ExperimentConfig::default();
        let dm = d.model;
        let model = ModelParams {
            delta: raw.f64("model.delta", dm.delta)?,
            omega_r: raw.f64("model.omega_r", dm.omega_r)?,
            g: raw.f64("model.g", dm.g)?,
            kappa: raw.f64("model.kappa", dm.kappa)?,
            gain: raw.f64("model.gain", dm.gain)?,
            theta: raw.f64("model.theta", dm.theta)?,
            eta: raw.f64("model.eta", dm.eta)?,
            n_spins: raw.uint("model.n_spins", dm.n_spins)?,
        };
        model.validate()?;
        let kernel = parse_kernel(&raw)?;
        let run_name = raw.text("run").unwrap_or("spectrum").to_string();
        let run = parse_run(&raw, &run_name)?;
        Ok(Self {
            label: raw.text("label").unwrap_or(&d.label).to_string(),
            output_dir: raw.text("output_dir").map_or(d.output_dir, PathBuf::from),
            model,
            kernel,
            run,
        })
    }

    /// Config text that parses back to `self`; floats use shortest round-trip formatting.
    pub fn to_config_string(&self) -> Result<String> {
        let mut s = String::new();
        let mut put = |k: &str, v: String, u: Unit| {
            if u == Unit::None {
                let _ = writeln!(s, "{k} = {v}");
            } else {
                let _ = writeln!(s, "{k} = {v} {}", u.token());
            }
        };
        put("label", self.label.clone(), Unit::None);
        put("output_dir", self.output_dir.display().to_string(), Unit::None);
        put("run", self.run.name().into(), Unit::None);
        let m = &self.model;
        put("model.delta", e(m.delta), Unit::Freq);
        put("model.omega_r", e(m.omega_r), Unit::Freq);
        put("model.g", e(m.g), Unit::Freq);
        put("model.kappa", e(m.kappa), Unit::Freq);
        put("model.gain", e(m.gain), Unit::Freq);
        put("model.theta", e(m.theta), Unit::Angle);
        put("model.eta", e(m.eta), Unit::None);
        put("model.n_spins", m.n_spins.to_string(), Unit::None);
        for (k, v, u) in kernel_entries(&self.kernel)? {
            put(&k, v, u);
        }
        match &self.run {
            RunKind::Spectrum {
                omega_min,
                omega_max,
                points,
            } => {
                put("spectrum.omega_min", e(*omega_min), Unit::Freq);
                put("spectrum.omega_max", e(*omega_max), Unit::Freq);
                put("spectrum.points", points.to_string(), Unit::None);
            }
            RunKind::Critical { g_ratios } => put("critical.g_ratios", list(g_ratios), Unit::None),
            RunKind::VarianceSweep { g_ratios, fit } => {
                put("sweep.g_ratios", list(g_ratios), Unit::None);
                put("sweep.fit", fit.to_string(), Unit::None);
            }
            RunKind::Trajectory(t) => {
                for (k, v, u) in traj_entries(t) {
                    put(k, v, u);
                }
            }
            RunKind::Ensemble {
                traj,
                n_traj,
                reducer,
                g_ratios,
            } => {
                for (k, v, u) in traj_entries(traj) {
                    put(k, v, u);
                }
                put("ensemble.n_traj", n_traj.to_string(), Unit::None);
                let r = match reducer {
                    Reducer::MeanObservable => "mean",
                    Reducer::FrequencyFit => "frequency",
                    Reducer::GrowthFit => "growth",
                };
                put("ensemble.reducer", r.into(), Unit::None);
                put("ensemble.g_ratios", list(g_ratios), Unit::None);
            }
            RunKind::BathCompare {
                bath,
                omega_min,
                omega_max,
                points,
            } => {
                put("bath.s", e(bath.s), Unit::None);
                put("bath.kappa_r", e(bath.kappa_r), Unit::Freq);
                put("bath.omega_c", e(bath.omega_c), Unit::Freq);
                let c = match bath.cutoff {
                    Cutoff::Hard => "hard",
                    Cutoff::Exponential => "exponential",
                };
                put("bath.cutoff", c.into(), Unit::None);
                put("spectrum.omega_min", e(*omega_min), Unit::Freq);
                put("spectrum.omega_max", e(*omega_max), Unit::Freq);
                put("spectrum.points", points.to_string(), Unit::None);
            }
            RunKind::BecMap(b) => {
                put("bec.omega_1", e(b.omega_1), Unit::None);
                put("bec.omega_pump", e(b.omega_pump), Unit::None);
                put("bec.g_1", e(b.g_1), Unit::None);
                put("bec.delta_a", e(b.delta_a), Unit::None);
                put("bec.omega_pump_rabi", e(b.omega_pump_rabi), Unit::None);
                put("bec.n_atoms", b.n_atoms.to_string(), Unit::None);
                put("bec.k_1", e(b.k_1), Unit::None);
                put("bec.m_a", e(b.m_a), Unit::None);
                put("bec.v0_scale", e(b.v0_scale), Unit::None);
                put("bec.kappa", e(b.kappa), Unit::None);
            }
        }
        Ok(s)
    }

    /// Recover the config echoed in a CSV header (`# key = value` lines).
    pub fn from_csv_header(csv: &str) -> Result<Self> {
        let body: String = csv
            .lines()
            .take_while(|l| l.starts_with('#'))
            .filter_map(|l| l.strip_prefix('#'))
            .filter(|l| l.contains('='))
            .map(|l| format!("{}\n", l.trim()))
            .collect();
        Self::parse(&body)
    }
}

fn e(x: f64) -> String {
    format!("{x:e}")
}

fn list(v: &[f64]) -> String {
    v.iter().map(|x| e(*x)).collect::<Vec<_>>().join(", ")
}

fn kernel_entries(k: &FeedbackKernel<f64>) -> Result<Vec<(String, String, Unit)>> {
    let mut out = Vec::new();
    let mut add = |k: &str, v: String, u: Unit| out.push((k.to_string(), v, u));
    match k.shape() {
        KernelShape::PowerLaw { h0, t0, s } => {
            add("kernel.type", "power_law".into(), Unit::None);
            add("kernel.h0", e(*h0), Unit::Freq);
            add("kernel.t0", e(*t0), Unit::Time);
            add("kernel.s", e(*s), Unit::None);
        }
        KernelShape::Exponential { amplitude, rate } => {
            add("kernel.type", "exponential".into(), Unit::None);
            add("kernel.amplitude", e(*amplitude), Unit::Freq);
            add("kernel.rate", e(*rate), Unit::Freq);
        }
        KernelShape::DeltaPulse { weight } => {
            add("kernel.type", "delta".into(), Unit::None);
            add("kernel.weight", e(*weight), Unit::None);
        }
        KernelShape::Comb {
            period,
            exponent,
            weight,
            term_count,
        } => {
            add("kernel.type", "comb".into(), Unit::None);
            add("kernel.period", e(*period), Unit::Time);
            add("kernel.exponent", e(*exponent), Unit::None);
            add("kernel.weight", e(*weight), Unit::None);
            add("kernel.terms", term_count.to_string(), Unit::None);
        }
        KernelShape::Sum(parts) => match parts.as_slice() {
            [a, b] => match (a, b) {
                (KernelShape::DeltaPulse { weight }, KernelShape::PowerLaw { h0, t0, s }) => {
                    add("kernel.type", "delta_power_law".into(), Unit::None);
                    add("kernel.delta_weight", e(*weight), Unit::None);
                    add("kernel.h0", e(*h0), Unit::Freq);
                    add("kernel.t0", e(*t0), Unit::Time);
                    add("kernel.s", e(*s), Unit::None);
                }
                _ => return Err(Error::Config("only delta + power-law sums are expressible".into())),
            },
            _ => return Err(Error::Config("only delta + power-law sums are expressible".into())),
        },
        KernelShape::Tabulated { .. } => {
            return Err(Error::Config(
                "tabulated kernels are not expressible in config files".into(),
            ))
        }
    }
    if k.convention() == Convention::Conjugate {
        add("kernel.convention", "conjugate".into(), Unit::None);
    }
    Ok(out)
}

fn parse_kernel(raw: &Raw) -> Result<FeedbackKernel<f64>> {
    let line = raw.line("kernel.type");
    let power = || -> Result<FeedbackKernel<f64>> {
        let s = raw.f64("kernel.s", 0.5)?;
        let t0 = raw.f64("kernel.t0", 1.0)?;
        FeedbackKernel::power_law(raw.f64("kernel.h0", s)?, t0, s)
    };
    let kernel = match raw.text("kernel.type").unwrap_or("power_law") {
        "power_law" => power()?,
        "exponential" => FeedbackKernel::exponential(raw.f64("kernel.amplitude", 1.0)?, raw.f64("kernel.rate", 1.0)?)?,
        "delta" => FeedbackKernel::delta(raw.f64("kernel.weight", 1.0)?)?,
        "comb" => FeedbackKernel::comb(
            raw.f64("kernel.period", 1.0)?,
            raw.f64("kernel.exponent", 1.0)?,
            raw.f64("kernel.weight", 1.0)?,
            raw.uint("kernel.terms", 100)?,
        )?,
        "delta_power_law" => FeedbackKernel::sum(vec![
            FeedbackKernel::delta(raw.f64("kernel.delta_weight", 0.0)?)?,
            power()?,
        ])?,
        other => return Err(cfg_err(line, format!("unknown kernel.type `{other}`"))),
    };
    Ok(match raw.text("kernel.convention").unwrap_or("integral") {
        "integral" => kernel,
        "conjugate" => kernel.with_convention(Convention::Conjugate),
        other => {
            return Err(cfg_err(
                raw.line("kernel.convention"),
                format!("unknown kernel.convention `{other}`"),
            ))
        }
    })
}

fn traj_entries(t: &TrajectoryConfig<f64>) -> Vec<(&'static str, String, Unit)> {
    let engine = match t.engine {
        Engine::Reduced => "reduced",
        Engine::FullSme => "full_sme",
    };
    let (initial, tilt) = match t.initial_state {
        InitialState::GroundState => ("ground", 0.0),
        InitialState::CoherentTilt(eps) => ("tilt", eps),
    };
    vec![
        ("traj.engine", engine.into(), Unit::None),
        ("traj.dt", e(t.dt), Unit::Time),
        ("traj.t_max", e(t.t_max), Unit::Time),
        ("traj.seed", t.seed.to_string(), Unit::None),
        ("traj.fock_dim", t.fock_dim.to_string(), Unit::None),
        ("traj.memory_horizon", e(t.memory_horizon), Unit::Time),
        ("traj.initial", initial.into(), Unit::None),
        ("traj.tilt", e(tilt), Unit::None),
        ("traj.noise", t.noise.to_string(), Unit::None),
        ("traj.record_every", t.record_every.to_string(), Unit::None),
        ("traj.record_noise", t.record_noise.to_string(), Unit::None),
    ]
}

fn parse_traj(raw: &Raw) -> Result<TrajectoryConfig<f64>> {
    let d = TrajectoryConfig::<f64>::reduced(0.01, 100.0, 1);
    let engine = match raw.text("traj.engine").unwrap_or("reduced") {
        "reduced" => Engine::Reduced,
        "full_sme" => Engine::FullSme,
        other => {
            return Err(cfg_err(
                raw.line("traj.engine"),
                format!("unknown traj.engine `{other}`"),
            ))
        }
    };
    let initial_state = match raw.text("traj.initial").unwrap_or("ground") {
        "ground" => InitialState::GroundState,
        "tilt" => InitialState::CoherentTilt(raw.f64("traj.tilt", 0.01)?),
        other => {
            return Err(cfg_err(
                raw.line("traj.initial"),
                format!("unknown traj.initial `{other}`"),
            ))
        }
    };
    Ok(TrajectoryConfig {
        engine,
        dt: raw.f64("traj.dt", d.dt)?,
        t_max: raw.f64("traj.t_max", d.t_max)?,
        seed: raw.uint("traj.seed", d.seed)?,
        fock_dim: raw.uint("traj.fock_dim", d.fock_dim)?,
        memory_horizon: raw.f64("traj.memory_horizon", d.memory_horizon)?,
        initial_state,
        noise: raw.boolean("traj.noise", d.noise)?,
        record_every: raw.uint("traj.record_every", d.record_every)?,
        record_noise: raw.boolean("traj.record_noise", d.record_noise)?,
    })
}

fn parse_run(raw: &Raw, name: &str) -> Result<RunKind> {
    let grid = || -> Result<(f64, f64, usize)> {
        Ok((
            raw.f64("spectrum.omega_min", 0.0)?,
            raw.f64("spectrum.omega_max", 3.0)?,
            raw.uint("spectrum.points", 301)?,
        ))
    };
    Ok(match name {
        "spectrum" => {
            let (omega_min, omega_max, points) = grid()?;
            RunKind::Spectrum {
                omega_min,
                omega_max,
                points,
            }
        }
        "critical" => RunKind::Critical {
            g_ratios: raw.list("critical.g_ratios", &DEFAULT_RATIOS)?,
        },
        "variance_sweep" => RunKind::VarianceSweep {
            g_ratios: raw.list("sweep.g_ratios", &super::presets::fig3_ratios())?,
            fit: raw.boolean("sweep.fit", true)?,
        },
        "trajectory" => RunKind::Trajectory(parse_traj(raw)?),
        "ensemble" => RunKind::Ensemble {
            traj: parse_traj(raw)?,
            n_traj: raw.uint("ensemble.n_traj", 20)?,
            reducer: match raw.text("ensemble.reducer").unwrap_or("mean") {
                "mean" => Reducer::MeanObservable,
                "frequency" => Reducer::FrequencyFit,
                "growth" => Reducer::GrowthFit,
                other => {
                    return Err(cfg_err(
                        raw.line("ensemble.reducer"),
                        format!("unknown ensemble.reducer `{other}`"),
                    ))
                }
            },
            g_ratios: raw.list("ensemble.g_ratios", &[])?,
        },
        "bath_compare" => {
            let (omega_min, omega_max, points) = grid()?;
            RunKind::BathCompare {
                bath: BathSpec::new(
                    raw.f64("bath.s", 1.0)?,
                    raw.f64("bath.kappa_r", 0.1)?,
                    raw.f64("bath.omega_c", 2.0)?,
                    match raw.text("bath.cutoff").unwrap_or("exponential") {
                        "hard" => Cutoff::Hard,
                        "exponential" => Cutoff::Exponential,
                        other => {
                            return Err(cfg_err(
                                raw.line("bath.cutoff"),
                                format!("unknown bath.cutoff `{other}`"),
                            ))
                        }
                    },
                )?,
                omega_min,
                omega_max,
                points,
            }
        }
        "bec_map" => {
            let d = BecParams::default();
            RunKind::BecMap(BecParams {
                omega_1: raw.f64("bec.omega_1", d.omega_1)?,
                omega_pump: raw.f64("bec.omega_pump", d.omega_pump)?,
                g_1: raw.f64("bec.g_1", d.g_1)?,
                delta_a: raw.f64("bec.delta_a", d.delta_a)?,
                omega_pump_rabi: raw.f64("bec.omega_pump_rabi", d.omega_pump_rabi)?,
                n_atoms: raw.uint("bec.n_atoms", d.n_atoms)?,
                k_1: raw.f64("bec.k_1", d.k_1)?,
                m_a: raw.f64("bec.m_a", d.m_a)?,
                v0_scale: raw.f64("bec.v0_scale", d.v0_scale)?,
                kappa: raw.f64("bec.kappa", d.kappa)?,
            })
        }
        other => return Err(cfg_err(raw.line("run"), format!("unknown run `{other}`"))),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn units_are_mandatory() {
        let err = ExperimentConfig::parse("model.kappa = 100\n").unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        let err = ExperimentConfig::parse("model.kappa = 100 rad\n").unwrap_err();
        assert!(err.to_string().contains("expected `wR`"));
        let ok = ExperimentConfig::parse("model.kappa = 50 wR\n").unwrap();
        assert_eq!(ok.model.kappa, 50.0);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = ExperimentConfig::parse("model.kapa = 1 wR\n").unwrap_err();
        assert!(err.to_string().contains("unknown key"));
        assert!(ExperimentConfig::parse("meta.anything = 3\n").is_ok());
    }

    #[test]
    fn text_round_trip() {
        let cfg = ExperimentConfig {
            run: RunKind::Ensemble {
                traj: TrajectoryConfig::full_sme(0.005, 2.0, 4, 5),
                n_traj: 8,
                reducer: Reducer::GrowthFit,
                g_ratios: vec![0.5, 1.0 / 3.0],
            },
            ..ExperimentConfig::default()
        };
        let text = cfg.to_config_string().unwrap();
        assert_eq!(ExperimentConfig::parse(&text).unwrap(), cfg);
    }
}
