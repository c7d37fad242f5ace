//! Spin-boson / Caldeira–Leggett side of the comparison: spectral functions, the memory
//! kernels β and γ, and the bath characteristic equation.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::kernels::{small_omega_im_slope, FeedbackKernel, KernelShape};
use crate::numerics::optimize::linear_regression;
use crate::numerics::quad::{integrate, QuadOptions};
use crate::numerics::roots::{bisect, scan_brackets};
use crate::scalar::{c, Real};
use crate::spectral::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cutoff {
    /// `P_c = 1[ω ≤ ω_c]`.
    Hard,
    /// `P_c = e^{−ω/ω_c}`.
    Exponential,
}

/// `J(ω) = κ_R (ω/ω_c)^s P_c(ω)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathSpec<T> {
    pub s: T,
    pub kappa_r: T,
    pub omega_c: T,
    pub cutoff: Cutoff,
}

fn quad_opts<T: Real>() -> QuadOptions<T> {
    QuadOptions {
        abs_tol: T::lit(1e-15),
        rel_tol: T::lit(1e-12).max(T::lit(64.0) * T::epsilon()),
        max_panels: 20_000,
    }
}

impl<T: Real> BathSpec<T> {
    pub fn new(s: T, kappa_r: T, omega_c: T, cutoff: Cutoff) -> Result<Self> {
        let b = Self {
            s,
            kappa_r,
            omega_c,
            cutoff,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_c > T::zero() && self.omega_c.is_finite()) {
            return Err(Error::InvalidParameter("omega_c must be positive".into()));
        }
        if !(self.kappa_r >= T::zero() && self.kappa_r.is_finite()) {
            return Err(Error::InvalidParameter("kappa_R must be non-negative".into()));
        }
        if !(self.s > T::zero() && self.s.is_finite()) {
            return Err(Error::InvalidParameter("bath exponent s must be positive".into()));
        }
        Ok(())
    }

    pub fn spectral_function(&self, omega: T) -> Result<T> {
        if omega < T::zero() {
            return Err(Error::NegativeFrequency(omega.to_f64_lossy()));
        }
        Ok(self.j(omega))
    }

    fn j(&self, omega: T) -> T {
        if omega <= T::zero() {
            return T::zero();
        }
        let x = omega / self.omega_c;
        match self.cutoff {
            Cutoff::Hard if omega > self.omega_c => T::zero(),
            Cutoff::Hard => self.kappa_r * x.powf(self.s),
            Cutoff::Exponential => self.kappa_r * x.powf(self.s) * (-x).exp(),
        }
    }

    /// `β(t) = (1/π) ∫₀^∞ J(ω) sin ωt dω`.
    pub fn beta_kernel(&self, t: T) -> Result<T> {
        if t < T::zero() {
            return Err(Error::NegativeTime(t.to_f64_lossy()));
        }
        if t == T::zero() || self.kappa_r == T::zero() {
            return Ok(T::zero());
        }
        let v = match self.cutoff {
            Cutoff::Hard => self.hard_transform(self.s, t, |x| x.sin())?,
            Cutoff::Exponential => self.exp_transform(self.s, t)?.im,
        };
        Ok(self.kappa_r * v / T::PI())
    }

    /// `γ(t) = (2/π) ∫₀^∞ (J(ω)/ω) cos ωt dω`, with `dγ/dt = −2β`.
    pub fn gamma_kernel(&self, t: T) -> Result<T> {
        if t < T::zero() {
            return Err(Error::NegativeTime(t.to_f64_lossy()));
        }
        if self.kappa_r == T::zero() {
            return Ok(T::zero());
        }
        let p = self.s - T::one();
        let v = match self.cutoff {
            Cutoff::Hard => self.hard_transform(p, t, |x| x.cos())?,
            Cutoff::Exponential => self.exp_transform(p, t)?.re,
        };
        Ok(T::two() * self.kappa_r * v / (T::PI() * self.omega_c))
    }

    /// `∫₀^{ω_c} (ω/ω_c)^p f(ωt) dω` with `ω = ω_c u^{1/(p+1)}` absorbing the endpoint power.
    fn hard_transform(&self, p: T, t: T, f: impl Fn(T) -> T) -> Result<T> {
        let q = p + T::one();
        let wc = self.omega_c;
        let half_periods = (wc * t / T::PI()).floor().to_f64_lossy() as usize;
        let breaks: Vec<T> = (1..=half_periods.min(100_000))
            .map(|k| (T::from_usize(k) * T::PI() / (wc * t)).powf(q))
            .collect();
        let r = integrate(
            |u: T| f(wc * u.powf(T::one() / q) * t),
            T::zero(),
            T::one(),
            &breaks,
            &quad_opts(),
        )?;
        Ok(wc * r.value / q)
    }

    /// `ω_c^{-p} ∫₀^∞ ω^p e^{−ω/ω_c} e^{iωt} dω = ω_c Γ(p+1) (1 − iω_c t)^{−(p+1)}`, with the
    /// ray rotated onto the real axis and `Γ` by quadrature.
    fn exp_transform(&self, p: T, t: T) -> Result<Complex<T>> {
        let q = p + T::one();
        let g = gamma_by_quadrature(q)?;
        let r = c(T::one(), -self.omega_c * t);
        Ok(r.powc(c(-q, T::zero())) * (self.omega_c * g))
    }

    /// Closed-form `β(t)` of the Ohmic hard-cutoff bath (ignores `s`).
    pub fn ohmic_hard_beta_closed_form(&self, t: T) -> T {
        let wc = self.omega_c;
        if t == T::zero() {
            return T::zero();
        }
        self.kappa_r / (T::PI() * wc) * ((wc * t).sin() / (t * t) - wc * (wc * t).cos() / t)
    }

    /// `B(ω) = ∫₀^∞ β(t) e^{−iωt} dt`, from `J` by a principal-value integral.
    pub fn transform_b(&self, omega: T) -> Result<Complex<T>> {
        let w = omega.abs();
        let jw = self.j(w);
        let sub = jw * w;
        // P∫₀^∞ dν/(ν²−ω²) = 0, so subtracting J(|ω|)|ω| removes the pole exactly.
        let f = |nu: T| {
            let den = nu * nu - w * w;
            if den == T::zero() {
                T::zero()
            } else {
                (self.j(nu) * nu - sub) / den
            }
        };
        let top = match self.cutoff {
            Cutoff::Hard => T::lit(4.0) * self.omega_c.max(w),
            Cutoff::Exponential => T::lit(80.0) * self.omega_c + T::two() * w,
        };
        let mut breaks = vec![self.omega_c];
        if w > T::zero() {
            breaks.push(w);
        }
        let opts = quad_opts();
        let body = integrate(f, T::zero(), top, &breaks, &opts)?;
        let tail = integrate(
            |u: T| {
                if u == T::zero() {
                    T::zero()
                } else {
                    f(top / u) * top / (u * u)
                }
            },
            T::zero(),
            T::one(),
            &[],
            &opts,
        )?;
        let re = (body.value + tail.value) / T::PI();
        Ok(c(re, -T::half() * jw * omega.signum()))
    }
}

/// `Γ(q) = ∫₀^∞ y^{q−1} e^{−y} dy` for `q > 0`.
fn gamma_by_quadrature<T: Real>(q: T) -> Result<T> {
    if !(q > T::zero()) {
        return Err(Error::InvalidParameter(
            "gamma integral needs a positive argument".into(),
        ));
    }
    let opts = quad_opts();
    // On [0, 1] substitute y = u^{1/q}.
    let head = integrate(|u: T| (-u.powf(T::one() / q)).exp(), T::zero(), T::one(), &[], &opts)?.value / q;
    let top = T::lit(80.0) + T::lit(4.0) * q;
    let peak = (q - T::one()).max(T::one());
    let tail = integrate(|y: T| y.powf(q - T::one()) * (-y).exp(), T::one(), top, &[peak], &opts)?.value;
    Ok(head + tail)
}

/// `ω² − ω_R² + 4ω_R B(ω)`.
pub fn bath_char_poly<T: Real>(omega_r: T, bath: &BathSpec<T>, omega: T) -> Result<Complex<T>> {
    let b = bath.transform_b(omega)?;
    Ok(c(omega * omega - omega_r * omega_r, T::zero()) + b * (T::lit(4.0) * omega_r))
}

/// Density `4π ω_R² J(ω)` multiplying `δ(ω+ω′)`; zero for `ω < 0`.
pub fn bath_noise_spectrum<T: Real>(omega_r: T, bath: &BathSpec<T>, omega: T) -> Result<T> {
    Ok(T::lit(4.0) * T::PI() * omega_r * omega_r * bath.j(omega))
}

/// Real root of `Re bath_char_poly` in `(0, 3ω_R]` closest to `ω_R`.
pub fn bath_soft_mode<T: Real>(omega_r: T, bath: &BathSpec<T>) -> Result<T> {
    let window = T::lit(3.0) * omega_r;
    let f = |w: T| -> Result<T> { Ok(bath_char_poly(omega_r, bath, w)?.re) };
    let mut best: Option<T> = None;
    for (a, b) in scan_brackets(f, T::zero(), window, 300)? {
        let r = bisect(f, a, b, T::lit(1e-10))?;
        if best.is_none_or(|w| (r - omega_r).abs() < (w - omega_r).abs()) {
            best = Some(r);
        }
    }
    best.ok_or(Error::NoBracket {
        window: window.to_f64_lossy(),
    })
}

/// Sample times for tabulating a smooth, decaying `β`: spacing `dt0` near zero growing by
/// `ratio` per sample up to `t_end`.
pub fn geometric_grid<T: Real>(dt0: T, ratio: T, t_end: T) -> Vec<T> {
    let mut out = vec![T::zero()];
    let mut t = T::zero();
    let mut dt = dt0;
    while t < t_end {
        t += dt;
        out.push(t);
        dt *= ratio;
    }
    out
}

/// Feedback kernel `h = 4ω_R β / K` tabulated on `times`, so that `K·H(ω) = 4ω_R B(ω)`.
pub fn matched_kernel<T: Real>(
    bath: &BathSpec<T>,
    omega_r: T,
    feedback_coupling: T,
    times: &[T],
    tail_exponent: T,
) -> Result<FeedbackKernel<T>> {
    if feedback_coupling == T::zero() {
        return Err(Error::InvalidParameter(
            "matched kernel needs a nonzero feedback coupling".into(),
        ));
    }
    let scale = T::lit(4.0) * omega_r / feedback_coupling;
    let values = times
        .iter()
        .map(|&t| Ok(bath.beta_kernel(t)? * scale))
        .collect::<Result<Vec<T>>>()?;
    FeedbackKernel::tabulated(times.to_vec(), values, tail_exponent)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathMapping<T> {
    pub bath: BathSpec<T>,
    pub exponent: T,
    pub plain_slope: T,
    pub residual: T,
}

const MAP_RESIDUAL_LIMIT: f64 = 0.05;

/// Effective bath with `J(ω) = −K Im H(ω)/(2ω_R)` at low frequency.
///
/// Only power-law kernels with `s < 1` map onto a bath exponent; anything whose `Im H` is
/// analytic (slope 1) is reported as `PoorFit`.
pub fn kernel_bath_map<T: Real>(kernel: &FeedbackKernel<T>, params: &ModelParams<T>) -> Result<BathMapping<T>> {
    let k = params.feedback_coupling();
    if k == T::zero() {
        return Err(Error::InvalidParameter(
            "bath mapping needs a nonzero feedback coupling".into(),
        ));
    }
    let scale = kernel.memory_time();
    let range = (T::lit(1e-4) / scale, T::lit(1e-1) / scale);
    if let KernelShape::PowerLaw { t0, .. } = kernel.shape() {
        let est = small_omega_im_slope(kernel, range)?;
        if est.residual > T::lit(MAP_RESIDUAL_LIMIT) || est.exponent > T::lit(0.99) {
            return Err(Error::PoorFit {
                residual: est.residual.to_f64_lossy(),
                exponent: est.exponent.to_f64_lossy(),
            });
        }
        let omega_c = T::one() / *t0;
        let bath = BathSpec::new(
            est.exponent,
            k.abs() * est.amplitude * omega_c.powf(est.exponent) / (T::two() * params.omega_r),
            omega_c,
            Cutoff::Exponential,
        )?;
        return Ok(BathMapping {
            bath,
            exponent: est.exponent,
            plain_slope: est.plain_slope,
            residual: est.residual,
        });
    }
    let n = 41;
    let mut lx = Vec::with_capacity(n);
    let mut ly = Vec::with_capacity(n);
    for i in 0..n {
        let w = range.0 * (range.1 / range.0).powf(T::from_usize(i) / T::from_usize(n - 1));
        let im = kernel.transform(w)?.im.abs();
        if im > T::zero() {
            lx.push(w.ln());
            ly.push(im.ln());
        }
    }
    let (icpt, slope) =
        linear_regression(&lx, &ly).ok_or_else(|| Error::DegenerateData("Im H vanishes on the grid".into()))?;
    let rss: T = lx.iter().zip(&ly).map(|(x, y)| (icpt + slope * *x - *y).powi(2)).sum();
    Err(Error::PoorFit {
        residual: (rss / T::from_usize(lx.len().max(1))).sqrt().to_f64_lossy(),
        exponent: slope.to_f64_lossy(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectral_function_values() {
        let b = BathSpec::<f64>::new(1.0, 0.3, 2.0, Cutoff::Hard).unwrap();
        assert_eq!(b.spectral_function(0.0).unwrap(), 0.0);
        assert!((b.spectral_function(1.0).unwrap() - 0.15).abs() < 1e-15);
        assert!(matches!(b.spectral_function(-1.0), Err(Error::NegativeFrequency(_))));
        let e = BathSpec::new(0.5, 0.3, 2.0, Cutoff::Exponential).unwrap();
        assert!((e.spectral_function(2.0).unwrap() - 0.3 / std::f64::consts::E).abs() < 1e-15);
    }

    #[test]
    fn ohmic_hard_beta_matches_closed_form() {
        let b = BathSpec::<f64>::new(1.0, 0.2, 3.0, Cutoff::Hard).unwrap();
        for t in [0.05, 0.7, 3.0, 25.0] {
            let q = b.beta_kernel(t).unwrap();
            let exact = b.ohmic_hard_beta_closed_form(t);
            assert!((q - exact).abs() <= 1e-8 * exact.abs().max(1e-12), "t={t}");
        }
    }

    #[test]
    fn gamma_function_by_quadrature() {
        assert!((gamma_by_quadrature(0.5f64).unwrap() - std::f64::consts::PI.sqrt()).abs() < 1e-11);
        assert!((gamma_by_quadrature(5.0f64).unwrap() - 24.0).abs() < 1e-10);
    }

    #[test]
    fn zero_coupling_is_bare_oscillator() {
        let b = BathSpec::new(1.0, 0.0, 3.0, Cutoff::Exponential).unwrap();
        let d = bath_char_poly(1.0, &b, 0.7).unwrap();
        assert!((d - Complex::new(0.49 - 1.0, 0.0)).norm() < 1e-15);
        assert_eq!(b.gamma_kernel(1.0).unwrap(), 0.0);
    }
}
