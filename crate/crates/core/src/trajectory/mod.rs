//! Stochastic conditional-dynamics engines and ensemble reducers.

mod ensemble;
mod memory;
mod reduced;
mod sme;

pub use ensemble::{ensemble, ensemble_map, EnsembleSummary, FitSummary, MeanSeries, Reducer, SummaryKind};
pub use memory::MemoryWeights;
pub use reduced::run_reduced;
pub use sme::{run_full_sme, SpinSystem};

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::kernels::FeedbackKernel;
use crate::scalar::Real;
use crate::spectral::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Reduced,
    FullSme,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialState<T> {
    GroundState,
    /// Reduced engine: `X(0) = ε`. Full SME: spin rotated so that `⟨S_x⟩ = ε`.
    CoherentTilt(T),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryConfig<T> {
    pub engine: Engine,
    pub dt: T,
    pub t_max: T,
    pub seed: u64,
    /// Cavity truncation for the full SME.
    pub fock_dim: usize,
    /// Longest kernel lookback kept explicitly.
    pub memory_horizon: T,
    pub initial_state: InitialState<T>,
    /// Switch the measurement noise off for deterministic checks.
    pub noise: bool,
    /// Keep every n-th step in the record.
    pub record_every: usize,
    /// Reduced engine: also store the complex field-noise drive.
    pub record_noise: bool,
}

impl<T: Real> TrajectoryConfig<T> {
    pub fn reduced(dt: T, t_max: T, seed: u64) -> Self {
        Self {
            engine: Engine::Reduced,
            dt,
            t_max,
            seed,
            fock_dim: 6,
            memory_horizon: T::lit(40.0),
            initial_state: InitialState::GroundState,
            noise: true,
            record_every: 1,
            record_noise: false,
        }
    }

    pub fn full_sme(dt: T, t_max: T, seed: u64, fock_dim: usize) -> Self {
        Self {
            engine: Engine::FullSme,
            fock_dim,
            ..Self::reduced(dt, t_max, seed)
        }
    }

    pub fn validate(&self, params: &ModelParams<T>, kernel: &FeedbackKernel<T>) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.dt > T::zero()) || !(self.t_max > T::zero()) || !self.t_max.is_finite() {
            return bad("dt and t_max must be positive".into());
        }
        if self.record_every == 0 {
            return bad("record_every must be at least 1".into());
        }
        if self.engine == Engine::FullSme {
            if !(self.dt * params.kappa < T::lit(0.1)) {
                return bad(format!("dt*kappa = {} must stay below 0.1", self.dt * params.kappa));
            }
            if self.fock_dim < 2 {
                return bad("fock_dim must be at least 2".into());
            }
            if params.n_spins != 1 {
                return bad("the full SME engine supports a single spin only".into());
            }
        }
        if let Some(t0) = kernel.power_law_t0() {
            if self.memory_horizon < T::lit(20.0) * t0 {
                return bad(format!("memory_horizon must be at least 20*t0 = {}", T::lit(20.0) * t0));
            }
        }
        Ok(())
    }

    pub(crate) fn steps(&self) -> usize {
        (self.t_max / self.dt).round().to_f64_lossy() as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Observables<T> {
    Matter { x: Vec<T> },
    Spin { sx: Vec<T>, sy: Vec<T>, sz: Vec<T> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord<T> {
    pub times: Vec<T>,
    pub observables: Observables<T>,
    /// Homodyne record `r(t)`.
    pub photocurrent: Vec<T>,
    /// Applied feedback signal `I_c(t)`.
    pub i_c: Vec<T>,
    /// Complex field-noise drive (reduced engine with `record_noise`), normalized so that
    /// its periodogram estimates `S(ω)`.
    pub noise_drive: Vec<Complex<T>>,
    pub seed: u64,
    pub stream: u64,
    /// The overflow guard stopped the run before `t_max`.
    pub truncated: bool,
}

impl<T: Real> TrajectoryRecord<T> {
    /// `X_c` for the reduced engine, `⟨S_x⟩_c` for the full SME.
    pub fn primary(&self) -> &[T] {
        match &self.observables {
            Observables::Matter { x } => x,
            Observables::Spin { sx, .. } => sx,
        }
    }

    pub fn channel_names(&self) -> Vec<&'static str> {
        match &self.observables {
            Observables::Matter { .. } => vec!["X_c"],
            Observables::Spin { .. } => vec!["Sx_c", "Sy_c", "Sz_c"],
        }
    }

    pub fn channels(&self) -> Vec<&[T]> {
        match &self.observables {
            Observables::Matter { x } => vec![x],
            Observables::Spin { sx, sy, sz } => vec![sx, sy, sz],
        }
    }
}

pub(crate) fn make_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Run one trajectory with the configured engine on stream 0 of `cfg.seed`.
pub fn run_trajectory<T: Real>(
    params: &ModelParams<T>,
    kernel: &FeedbackKernel<T>,
    cfg: &TrajectoryConfig<T>,
) -> Result<TrajectoryRecord<T>> {
    run_stream(params, kernel, cfg, 0)
}

pub(crate) fn run_stream<T: Real>(
    params: &ModelParams<T>,
    kernel: &FeedbackKernel<T>,
    cfg: &TrajectoryConfig<T>,
    stream: u64,
) -> Result<TrajectoryRecord<T>> {
    match cfg.engine {
        Engine::Reduced => reduced::run_reduced_stream(params, kernel, cfg, stream),
        Engine::FullSme => sme::run_full_sme_stream(params, kernel, cfg, stream),
    }
}
