//! Adiabatically eliminated cavity: Heun integration of the conditional matter quadrature
//! with the feedback memory convolved explicitly.

use num_complex::Complex;
use num_traits::Zero;
use rand::Rng;
use rand_distr::StandardNormal;

use super::memory::MemoryWeights;
use super::{make_rng, InitialState, Observables, TrajectoryConfig, TrajectoryRecord};
use crate::error::Result;
use crate::kernels::FeedbackKernel;
use crate::scalar::{c, Real};
use crate::spectral::ModelParams;

const BLOW_UP: f64 = 1e150;

pub fn run_reduced<T: Real>(
    params: &ModelParams<T>,
    kernel: &FeedbackKernel<T>,
    cfg: &TrajectoryConfig<T>,
) -> Result<TrajectoryRecord<T>> {
    run_reduced_stream(params, kernel, cfg, 0)
}

pub(crate) fn run_reduced_stream<T: Real>(
    params: &ModelParams<T>,
    kernel: &FeedbackKernel<T>,
    cfg: &TrajectoryConfig<T>,
    stream: u64,
) -> Result<TrajectoryRecord<T>> {
    params.validate()?;
    cfg.validate(params, kernel)?;
    let dt = cfg.dt;
    let steps = cfg.steps();
    let horizon = ((cfg.memory_horizon / dt).ceil().to_f64_lossy() as usize).clamp(1, steps.max(1));
    let w = MemoryWeights::new(kernel, dt, horizon);
    let l = w.horizon_steps();

    let kappa = params.kappa;
    let denom = kappa * kappa + params.delta * params.delta;
    let sq2k = (T::two() * kappa).sqrt();
    let omega_sq = params.shifted_frequency_sq();
    let k_fb = params.feedback_coupling();
    let g_eff = params.effective_gain();
    let lo = Complex::from_polar(T::one(), -params.theta);
    let cav = c(kappa, params.delta);
    let u = lo * c(kappa, -params.delta) / (cav * sq2k);
    let ic_det = -T::two() * params.g * params.c_theta() / denom * sq2k;
    let noise_sd = (kappa / (T::two() * dt)).sqrt();
    let inv_sqrt2 = T::one() / T::two().sqrt();

    let mut rng = make_rng(cfg.seed, stream);
    let mut x_hist: Vec<T> = Vec::with_capacity(steps + 1);
    let mut f_hist: Vec<Complex<T>> = Vec::with_capacity(steps + 1);
    let cap = steps / cfg.record_every + 1;
    let mut rec = TrajectoryRecord {
        times: Vec::with_capacity(cap),
        observables: Observables::Matter {
            x: Vec::with_capacity(cap),
        },
        photocurrent: Vec::with_capacity(cap),
        i_c: Vec::with_capacity(cap),
        noise_drive: Vec::new(),
        seed: cfg.seed,
        stream,
        truncated: false,
    };

    let mut x = match cfg.initial_state {
        InitialState::GroundState => T::zero(),
        InitialState::CoherentTilt(eps) => eps,
    };
    let mut v = T::zero();
    x_hist.push(x);
    let mut dropped_sum = T::zero();
    // Memory of X_n excluding the X_n term itself; coefficient of X_n is `lead`.
    let mut rest = T::zero();
    let mut lead = w.end[0];

    for n in 0..=steps {
        let mem = lead * x + rest;
        let f = if cfg.noise {
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            c(T::lit(a), T::lit(b)) * noise_sd
        } else {
            Complex::zero()
        };
        f_hist.push(f);
        let mut conv = Complex::zero();
        // Step average of (h * f) for piecewise-constant f.
        for j in 0..=n.min(l) {
            conv += f_hist[n - j] * w.head[j];
        }
        let drive = (f * T::two() * params.g / cav + u * conv * g_eff * sq2k) * (-params.omega_r);
        let force = drive.re;

        if n % cfg.record_every == 0 {
            let t = dt * T::from_usize(n);
            let x0 = -T::two() * params.g * params.c_theta() * x / denom;
            let r = sq2k * (x0 + (lo * f / cav).re) - (lo * f).re / sq2k;
            let ic = ic_det * mem + sq2k * (u * conv).re;
            rec.times.push(t);
            if let Observables::Matter { x: xs } = &mut rec.observables {
                xs.push(x);
            }
            rec.photocurrent.push(r);
            rec.i_c.push(ic);
            if cfg.record_noise {
                rec.noise_drive.push(drive * inv_sqrt2);
            }
        }
        if n == steps {
            break;
        }

        let acc = -omega_sq * x + k_fb * mem + force;
        let xp = x + dt * v;
        let vp = v + dt * acc;

        // History for step n+1, excluding X_{n+1}.
        let m = (n + 1).min(l);
        let mut next_rest = T::zero();
        for j in 1..m {
            next_rest += w.head[j] * x_hist[n + 1 - j];
        }
        next_rest += w.end[m] * x_hist[n + 1 - m];
        if n + 1 > l {
            dropped_sum += x_hist[n - l];
            let count = T::from_usize(n + 1 - l);
            next_rest += dropped_sum / count * w.tail_integral(dt * T::from_usize(n + 1));
        }
        let next_lead = w.head[0];
        let accp = -omega_sq * xp + k_fb * (next_lead * xp + next_rest) + force;

        x += dt * T::half() * (v + vp);
        v += dt * T::half() * (acc + accp);
        rest = next_rest;
        lead = next_lead;
        if !(x.abs() < T::lit(BLOW_UP)) || !v.is_finite() {
            rec.truncated = true;
            break;
        }
        x_hist.push(x);
    }
    Ok(rec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trajectory::TrajectoryConfig;

    #[test]
    fn free_oscillation_without_noise_or_feedback() {
        let p = ModelParams::<f64> {
            g: 0.0,
            ..ModelParams::fig2()
        };
        let k = FeedbackKernel::exponential(1.0, 1.0).unwrap();
        let mut cfg = TrajectoryConfig::reduced(1e-3, 10.0, 1);
        cfg.noise = false;
        cfg.initial_state = InitialState::CoherentTilt(0.1);
        let rec = run_reduced(&p, &k, &cfg).unwrap();
        for (t, x) in rec.times.iter().zip(rec.primary()) {
            assert!((x - 0.1 * t.cos()).abs() < 1e-6, "t={t} x={x}");
        }
    }

    #[test]
    fn same_seed_same_record() {
        let p = ModelParams::<f64>::fig2().with_gain(0.1);
        let k = FeedbackKernel::normalized_power_law(1.0, 1.0).unwrap();
        let cfg = TrajectoryConfig::reduced(0.05, 20.0, 9);
        let a = run_reduced(&p, &k, &cfg).unwrap();
        let b = run_reduced(&p, &k, &cfg).unwrap();
        assert_eq!(a, b);
    }
}
