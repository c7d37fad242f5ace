use rayon::prelude::*;

use super::{run_stream, TrajectoryConfig, TrajectoryRecord};
use crate::error::{Error, Result};
use crate::kernels::FeedbackKernel;
use crate::numerics::fits::{autocorrelation, dominant_frequency, fit_damped_sinusoid, fit_exponential_growth};
use crate::scalar::Real;
use crate::spectral::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reducer {
    /// Mean and standard error of every observable channel.
    MeanObservable,
    /// Damped-sinusoid fit to the autocorrelation of the primary channel.
    FrequencyFit,
    /// Exponential growth rate of `|primary|` over the second half of the record.
    GrowthFit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeanSeries<T> {
    pub times: Vec<T>,
    pub channels: Vec<String>,
    pub mean: Vec<Vec<T>>,
    pub stderr: Vec<Vec<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitSummary<T> {
    /// One fitted value per successful trajectory, in stream order.
    pub values: Vec<T>,
    pub mean: T,
    pub std_dev: T,
    /// `std_dev / |mean|`.
    pub relative_spread: T,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SummaryKind<T> {
    Mean(MeanSeries<T>),
    Frequency(FitSummary<T>),
    Growth(FitSummary<T>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSummary<T> {
    pub n_ok: usize,
    pub n_failed: usize,
    /// Error kinds of the failed trajectories.
    pub failures: Vec<&'static str>,
    pub kind: SummaryKind<T>,
}

/// Run `n_traj` trajectories on streams `0..n_traj` of `cfg.seed` in parallel and apply `f`
/// to each record. Results come back in stream order regardless of thread count.
pub fn ensemble_map<T, R, F>(
    params: &ModelParams<T>,
    kernel: &FeedbackKernel<T>,
    cfg: &TrajectoryConfig<T>,
    n_traj: usize,
    f: F,
) -> Result<Vec<Result<R>>>
where
    T: Real,
    R: Send,
    F: Fn(TrajectoryRecord<T>) -> Result<R> + Sync,
{
    if n_traj == 0 {
        return Err(Error::InvalidParameter("n_traj must be positive".into()));
    }
    params.validate()?;
    cfg.validate(params, kernel)?;
    Ok((0..n_traj as u64)
        .into_par_iter()
        .map(|stream| run_stream(params, kernel, cfg, stream).and_then(&f))
        .collect())
}

pub fn ensemble<T: Real>(
    params: &ModelParams<T>,
    kernel: &FeedbackKernel<T>,
    cfg: &TrajectoryConfig<T>,
    n_traj: usize,
    reducer: Reducer,
) -> Result<EnsembleSummary<T>> {
    if n_traj < 2 {
        return Err(Error::InvalidParameter(
            "an ensemble needs at least 2 trajectories".into(),
        ));
    }
    match reducer {
        Reducer::MeanObservable => {
            let runs = ensemble_map(params, kernel, cfg, n_traj, Ok)?;
            let (ok, failures) = split(runs);
            let full: Vec<_> = ok.into_iter().filter(|r| !r.truncated).collect();
            let n_failed = n_traj - full.len();
            let mut failures = failures;
            failures.extend(std::iter::repeat_n("Truncated", n_failed - failures.len()));
            Ok(EnsembleSummary {
                n_ok: full.len(),
                n_failed,
                failures,
                kind: SummaryKind::Mean(mean_series(&full)?),
            })
        }
        Reducer::FrequencyFit => {
            let runs = ensemble_map(params, kernel, cfg, n_traj, |r| frequency_of(&r))?;
            let (values, failures) = split(runs);
            Ok(EnsembleSummary {
                n_ok: values.len(),
                n_failed: failures.len(),
                failures,
                kind: SummaryKind::Frequency(fit_summary(values)?),
            })
        }
        Reducer::GrowthFit => {
            let runs = ensemble_map(params, kernel, cfg, n_traj, |r| growth_of(&r))?;
            let (values, failures) = split(runs);
            Ok(EnsembleSummary {
                n_ok: values.len(),
                n_failed: failures.len(),
                failures,
                kind: SummaryKind::Growth(fit_summary(values)?),
            })
        }
    }
}

fn split<R>(runs: Vec<Result<R>>) -> (Vec<R>, Vec<&'static str>) {
    let mut ok = Vec::new();
    let mut bad = Vec::new();
    for r in runs {
        match r {
            Ok(v) => ok.push(v),
            Err(e) => bad.push(e.kind()),
        }
    }
    (ok, bad)
}

fn mean_series<T: Real>(records: &[TrajectoryRecord<T>]) -> Result<MeanSeries<T>> {
    let first = records
        .first()
        .ok_or_else(|| Error::DegenerateData("no complete trajectories".into()))?;
    let n = T::from_usize(records.len());
    let len = first.times.len();
    let names = first.channel_names();
    let mut mean = Vec::new();
    let mut stderr = Vec::new();
    for ch in 0..names.len() {
        let mut m = vec![T::zero(); len];
        let mut sq = vec![T::zero(); len];
        for r in records {
            for (k, &v) in r.channels()[ch].iter().enumerate() {
                m[k] += v;
                sq[k] += v * v;
            }
        }
        let mut se = vec![T::zero(); len];
        for k in 0..len {
            m[k] /= n;
            let var = if records.len() > 1 {
                ((sq[k] - n * m[k] * m[k]) / (n - T::one())).max(T::zero())
            } else {
                T::zero()
            };
            se[k] = (var / n).sqrt();
        }
        mean.push(m);
        stderr.push(se);
    }
    Ok(MeanSeries {
        times: first.times.clone(),
        channels: names.into_iter().map(String::from).collect(),
        mean,
        stderr,
    })
}

fn fit_summary<T: Real>(values: Vec<T>) -> Result<FitSummary<T>> {
    if values.is_empty() {
        return Err(Error::DegenerateData("every trajectory fit failed".into()));
    }
    let n = T::from_usize(values.len());
    let mean = values.iter().copied().sum::<T>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (*v - mean) * (*v - mean)).sum::<T>() / (n - T::one())
    } else {
        T::zero()
    };
    let std_dev = var.sqrt();
    Ok(FitSummary {
        relative_spread: std_dev / mean.abs(),
        values,
        mean,
        std_dev,
    })
}

/// Oscillation frequency of the primary channel from its autocorrelation.
pub(crate) fn frequency_of<T: Real>(rec: &TrajectoryRecord<T>) -> Result<T> {
    if rec.truncated {
        return Err(Error::DegenerateData("trajectory diverged".into()));
    }
    let y = rec.primary();
    if y.len() < 64 {
        return Err(Error::DegenerateData("record too short for a frequency fit".into()));
    }
    // Discard the initial transient.
    let skip = y.len() / 10;
    let y = &y[skip..];
    let dt = rec.times[1] - rec.times[0];
    let acf = autocorrelation(y, y.len() / 4);
    let w0 = dominant_frequency(&acf, dt).ok_or_else(|| Error::DegenerateData("no spectral peak".into()))?;
    let periods = (T::lit(4.0) * T::TAU() / (w0 * dt)).ceil().to_f64_lossy() as usize;
    let lags = periods.clamp(16, acf.len());
    let t: Vec<T> = (0..lags).map(|k| dt * T::from_usize(k)).collect();
    let fit = fit_damped_sinusoid(&t, &acf[..lags])?;
    Ok(fit.frequency.abs())
}

/// Late-time exponential growth rate of `|primary|`.
pub(crate) fn growth_of<T: Real>(rec: &TrajectoryRecord<T>) -> Result<T> {
    let y = rec.primary();
    let n = y.len();
    if n < 16 {
        return Err(Error::DegenerateData("record too short for a growth fit".into()));
    }
    Ok(fit_exponential_growth(&rec.times[..n], y, T::half())?.rate)
}
