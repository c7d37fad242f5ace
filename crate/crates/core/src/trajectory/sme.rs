//! Conditional density matrix of one spin coupled to a truncated cavity under homodyne
//! detection and delayed feedback, advanced with a second-order Kraus map.

use num_complex::Complex;
use num_traits::Zero;
use rand::Rng;
use rand_distr::StandardNormal;

use super::memory::MemoryWeights;
use super::{make_rng, InitialState, Observables, TrajectoryConfig, TrajectoryRecord};
use crate::error::{Error, Result};
use crate::kernels::FeedbackKernel;
use crate::numerics::cmat::CMat;
use crate::scalar::{c, Real};
use crate::spectral::ModelParams;

const TOP_LEVEL_LIMIT: f64 = 1e-6;
const POSITIVITY_SHIFT: f64 = 1e-8;

/// Operators on spin-½ ⊗ Fock(d). Spin index 0 is `|↑⟩`.
#[derive(Debug, Clone)]
pub struct SpinSystem<T> {
    pub fock_dim: usize,
    pub a: CMat<T>,
    pub s_x: CMat<T>,
    pub s_y: CMat<T>,
    pub s_z: CMat<T>,
    /// `δ a†a + ω_R S_z + g σ_x (a + a†)`.
    pub h0: CMat<T>,
    /// Feedback coupling operator `σ_x`.
    pub sigma_x: CMat<T>,
}

impl<T: Real> SpinSystem<T> {
    pub fn new(params: &ModelParams<T>, fock_dim: usize) -> Self {
        let d = fock_dim;
        let one = Complex::new(T::one(), T::zero());
        let mut af = CMat::zeros(d);
        for k in 1..d {
            af[(k - 1, k)] = one * T::from_usize(k).sqrt();
        }
        let mut px = CMat::zeros(2);
        px[(0, 1)] = one;
        px[(1, 0)] = one;
        let mut py = CMat::zeros(2);
        py[(0, 1)] = c(T::zero(), -T::one());
        py[(1, 0)] = c(T::zero(), T::one());
        let mut pz = CMat::zeros(2);
        pz[(0, 0)] = one;
        pz[(1, 1)] = -one;
        let id_s = CMat::identity(2);
        let id_f = CMat::identity(d);
        let a = id_s.kron(&af);
        let sigma_x = px.kron(&id_f);
        let s_x = sigma_x.scale_re(T::half());
        let s_y = py.kron(&id_f).scale_re(T::half());
        let s_z = pz.kron(&id_f).scale_re(T::half());
        let ad = a.adjoint();
        let n_op = &ad * &a;
        let x_field = &a + &ad;
        let mut h0 = n_op.scale_re(params.delta);
        h0.add_scaled(&s_z, one * params.omega_r);
        h0.add_scaled(&(&sigma_x * &x_field), one * params.g);
        Self {
            fock_dim,
            a,
            s_x,
            s_y,
            s_z,
            h0,
            sigma_x,
        }
    }

    pub fn dim(&self) -> usize {
        2 * self.fock_dim
    }

    /// Initial density matrix with the cavity in vacuum.
    pub fn initial_state(&self, state: InitialState<T>) -> Result<CMat<T>> {
        let (up, down) = match state {
            InitialState::GroundState => (T::zero(), T::one()),
            InitialState::CoherentTilt(eps) => {
                if !(eps.abs() <= T::half()) {
                    return Err(Error::InvalidParameter(format!(
                        "spin tilt {eps} must satisfy |eps| <= 1/2"
                    )));
                }
                let phi = (T::two() * eps).asin();
                ((phi * T::half()).sin(), (phi * T::half()).cos())
            }
        };
        let d = self.fock_dim;
        let mut psi = vec![Complex::<T>::zero(); self.dim()];
        psi[0] = c(up, T::zero());
        psi[d] = c(down, T::zero());
        let mut rho = CMat::zeros(self.dim());
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                rho[(i, j)] = psi[i] * psi[j].conj();
            }
        }
        Ok(rho)
    }

    /// Population of the highest retained Fock level.
    pub fn top_population(&self, rho: &CMat<T>) -> T {
        let d = self.fock_dim;
        rho[(d - 1, d - 1)].re + rho[(2 * d - 1, 2 * d - 1)].re
    }
}

pub fn run_full_sme<T: Real>(
    params: &ModelParams<T>,
    kernel: &FeedbackKernel<T>,
    cfg: &TrajectoryConfig<T>,
) -> Result<TrajectoryRecord<T>> {
    run_full_sme_stream(params, kernel, cfg, 0)
}

pub(crate) fn run_full_sme_stream<T: Real>(
    params: &ModelParams<T>,
    kernel: &FeedbackKernel<T>,
    cfg: &TrajectoryConfig<T>,
    stream: u64,
) -> Result<TrajectoryRecord<T>> {
    params.validate()?;
    cfg.validate(params, kernel)?;
    let sys = SpinSystem::new(params, cfg.fock_dim);
    let n = sys.dim();
    let dt = cfg.dt;
    let steps = cfg.steps();
    let horizon = ((cfg.memory_horizon / dt).ceil().to_f64_lossy() as usize).clamp(1, steps.max(1));
    let w = MemoryWeights::new(kernel, dt, horizon);
    let l = w.horizon_steps();

    let one = Complex::new(T::one(), T::zero());
    let i1 = c(T::zero(), T::one());
    let lo = Complex::from_polar(T::one(), -params.theta);
    let meas = sys.a.scale(lo * (T::two() * params.kappa * params.eta).sqrt());
    let lost = sys
        .a
        .scale_re((T::two() * params.kappa * (T::one() - params.eta)).sqrt());
    let meas_sq = &meas * &meas;
    let meas_dag = meas.adjoint();
    let quad_op = &meas + &meas_dag;
    let mut drift = CMat::identity(n);
    drift.add_scaled(&sys.h0, -i1 * dt);
    drift.add_scaled(&(&meas_dag * &meas), -one * (T::half() * dt));
    drift.add_scaled(&(&lost.adjoint() * &lost), -one * (T::half() * dt));
    let has_loss = params.eta < T::one();
    let sq2k = (T::two() * params.kappa).sqrt();
    let sqdt = dt.sqrt();

    let mut rng = make_rng(cfg.seed, stream);
    let mut rho = sys.initial_state(cfg.initial_state)?;
    let mut r_hist: Vec<T> = Vec::with_capacity(steps + 1);
    let cap = steps / cfg.record_every + 1;
    let mut sx = Vec::with_capacity(cap);
    let mut sy = Vec::with_capacity(cap);
    let mut sz = Vec::with_capacity(cap);
    let mut rec = TrajectoryRecord {
        times: Vec::with_capacity(cap),
        observables: Observables::Spin {
            sx: Vec::new(),
            sy: Vec::new(),
            sz: Vec::new(),
        },
        photocurrent: Vec::with_capacity(cap),
        i_c: Vec::with_capacity(cap),
        noise_drive: Vec::new(),
        seed: cfg.seed,
        stream,
        truncated: false,
    };
    let shift = CMat::identity(n).scale_re(T::lit(POSITIVITY_SHIFT));

    for step in 0..=steps {
        let t = dt * T::from_usize(step);
        let mut ic = T::zero();
        for j in 0..step.min(l) {
            ic += w.cells[j] * r_hist[step - 1 - j];
        }
        ic *= sq2k;
        let dw = if cfg.noise {
            let z: f64 = rng.sample(StandardNormal);
            T::lit(z) * sqdt
        } else {
            T::zero()
        };
        let dy = quad_op.expect(&rho).re * dt + dw;
        let r = dy / (T::two() * dt);
        if step % cfg.record_every == 0 {
            rec.times.push(t);
            sx.push(sys.s_x.expect(&rho).re);
            sy.push(sys.s_y.expect(&rho).re);
            sz.push(sys.s_z.expect(&rho).re);
            rec.photocurrent.push(r);
            rec.i_c.push(ic);
        }
        if step == steps {
            break;
        }
        r_hist.push(r);

        let mut m = drift.clone();
        m.add_scaled(&sys.sigma_x, -i1 * (params.gain * ic * dt));
        m.add_scaled(&meas, one * dy);
        m.add_scaled(&meas_sq, one * (T::half() * (dy * dy - dt)));
        let mut next = (&m * &rho).mul_adjoint(&m);
        if has_loss {
            next.add_scaled(&(&lost * &rho).mul_adjoint(&lost), one * dt);
        }
        let tr = next.trace().re;
        if !(tr > T::zero()) || !tr.is_finite() {
            return Err(Error::NonPhysicalState {
                time: (t + dt).to_f64_lossy(),
                reason: format!("trace {tr}"),
            });
        }
        rho = next.scale_re(T::one() / tr);
        rho.hermitize();
        if !(&rho + &shift).is_positive_definite() {
            return Err(Error::NonPhysicalState {
                time: (t + dt).to_f64_lossy(),
                reason: "negative eigenvalue".into(),
            });
        }
        let top = sys.top_population(&rho);
        if top > T::lit(TOP_LEVEL_LIMIT) {
            return Err(Error::TruncationOverflow {
                population: top.to_f64_lossy(),
                time: (t + dt).to_f64_lossy(),
            });
        }
    }
    rec.observables = Observables::Spin { sx, sy, sz };
    Ok(rec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trajectory::TrajectoryConfig;

    #[test]
    fn ground_state_expectations() {
        let p = ModelParams::<f64>::fig_s2();
        let sys = SpinSystem::new(&p, 4);
        let rho = sys.initial_state(InitialState::GroundState).unwrap();
        assert!((sys.s_z.expect(&rho).re + 0.5).abs() < 1e-15);
        let tilt = sys.initial_state(InitialState::CoherentTilt(0.2)).unwrap();
        assert!((sys.s_x.expect(&tilt).re - 0.2).abs() < 1e-14);
    }

    #[test]
    fn trajectory_keeps_unit_trace() {
        let p = ModelParams::<f64>::fig_s2();
        let k = FeedbackKernel::exponential(1.0, 2.0).unwrap();
        let cfg = TrajectoryConfig::full_sme(0.005, 1.0, 3, 5);
        let rec = run_full_sme(&p, &k, &cfg).unwrap();
        assert_eq!(rec.times.len(), 201);
        assert!(rec.primary().iter().all(|v| v.abs() <= 0.5 + 1e-12));
    }
}
