//! Linearized frequency-domain theory of the feedback-coupled oscillator.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::kernels::FeedbackKernel;
use crate::numerics::optimize::{levenberg_marquardt, linear_regression, LmOptions};
use crate::numerics::quad::{integrate, QuadOptions};
use crate::numerics::roots::{bisect, scan_brackets};
use crate::scalar::{c, Real};

/// Physical parameters in units of `ω_R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams<T> {
    pub delta: T,
    pub omega_r: T,
    pub g: T,
    pub kappa: T,
    /// Feedback gain `G`.
    pub gain: T,
    /// Local-oscillator phase.
    pub theta: T,
    /// Detector efficiency.
    pub eta: T,
    pub n_spins: u64,
}

impl<T: Real> Default for ModelParams<T> {
    fn default() -> Self {
        Self::fig2()
    }
}

impl<T: Real> ModelParams<T> {
    /// `g = ω_R`, `κ = 100 ω_R`, `δ = ω_R`, `θ = π/2`, no feedback.
    pub fn fig2() -> Self {
        Self {
            delta: T::one(),
            omega_r: T::one(),
            g: T::one(),
            kappa: T::lit(100.0),
            gain: T::zero(),
            theta: T::FRAC_PI_2(),
            eta: T::one(),
            n_spins: 1,
        }
    }

    /// Single-spin parameters: `g = 0.1 ω_R`, `κ = 10 ω_R`, `δ = ω_R`, `θ = π/2`.
    pub fn fig_s2() -> Self {
        Self {
            g: T::lit(0.1),
            kappa: T::lit(10.0),
            ..Self::fig2()
        }
    }

    pub fn with_gain(mut self, gain: T) -> Self {
        self.gain = gain;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.kappa > T::zero()
            && self.omega_r > T::zero()
            && self.g >= T::zero()
            && self.eta > T::zero()
            && self.eta <= T::one()
            && self.n_spins >= 1
            && [self.delta, self.gain, self.theta].iter().all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(
                "need kappa > 0, omega_R > 0, g >= 0, eta in (0, 1], N >= 1 and finite delta, G, theta".into(),
            ))
        }
    }

    /// Raised when `κ < 10 ω_R`: adiabatic elimination of the cavity is then inaccurate.
    pub fn adiabatic_advisory(&self) -> bool {
        self.kappa < T::lit(10.0) * self.omega_r
    }

    pub fn c_theta(&self) -> T {
        self.delta * self.theta.cos() + self.kappa * self.theta.sin()
    }

    /// `√η · G`.
    pub fn effective_gain(&self) -> T {
        self.eta.sqrt() * self.gain
    }

    fn denom(&self) -> T {
        self.kappa * self.kappa + self.delta * self.delta
    }

    /// `Ω² = ω_R² − 4ω_R g²δ/(κ²+δ²)`: squared frequency without feedback.
    pub fn shifted_frequency_sq(&self) -> T {
        self.omega_r * self.omega_r - T::lit(4.0) * self.omega_r * self.g * self.g * self.delta / self.denom()
    }

    /// Coefficient `K` of `H(ω)` in `D(ω)`.
    pub fn feedback_coupling(&self) -> T {
        T::lit(4.0) * self.omega_r * self.effective_gain() * self.g * self.kappa * self.c_theta() / self.denom()
    }
}

fn d_from_h<T: Real>(p: &ModelParams<T>, omega_sq: Complex<T>, h: Complex<T>) -> Complex<T> {
    omega_sq - p.shifted_frequency_sq() + h * p.feedback_coupling()
}

fn s_from_h<T: Real>(p: &ModelParams<T>, h: Complex<T>) -> T {
    let pref = T::PI() * p.omega_r * p.omega_r * p.kappa / p.denom();
    let lo = Complex::from_polar(T::one(), -p.theta);
    let amp = c(T::two() * p.g, T::zero()) + c(p.kappa, -p.delta) * lo * h * p.effective_gain();
    pref * amp.norm_sqr()
}

/// `D(ω) = ω² − ω_R² + 4ω_R g²δ/(κ²+δ²) + 4ω_R √η G g κ C_θ H(ω)/(κ²+δ²)`.
pub fn char_poly<T: Real>(p: &ModelParams<T>, kernel: &FeedbackKernel<T>, omega: T) -> Result<Complex<T>> {
    p.validate()?;
    let h = kernel.transform(omega)?;
    Ok(d_from_h(p, c(omega * omega, T::zero()), h))
}

/// `S(ω) = π ω_R² κ/(κ²+δ²) · |2g + √η G (κ − iδ) e^{−iθ} H(ω)|²`.
pub fn noise_spectrum<T: Real>(p: &ModelParams<T>, kernel: &FeedbackKernel<T>, omega: T) -> Result<T> {
    p.validate()?;
    Ok(s_from_h(p, kernel.transform(omega)?))
}

/// `G_crit = [ω_R(κ²+δ²) − 4g²δ] / [4 g κ C_θ H(0) √η]`.
pub fn critical_gain<T: Real>(p: &ModelParams<T>, kernel: &FeedbackKernel<T>) -> Result<T> {
    p.validate()?;
    let den = T::lit(4.0) * p.g * p.kappa * p.c_theta() * kernel.h_zero()? * p.eta.sqrt();
    if den == T::zero() || !den.is_finite() {
        return Err(Error::DegenerateGeometry);
    }
    Ok((p.omega_r * p.denom() - T::lit(4.0) * p.g * p.g * p.delta) / den)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StabilityRoot<T> {
    /// Positive real root of `Re D(ω) = 0` (stable regime).
    SoftMode(T),
    /// `λ > 0` with `D(−iλ) = 0` (unstable regime).
    Growth(T),
}

impl<T: Real> StabilityRoot<T> {
    pub fn soft_mode(&self) -> Option<T> {
        match self {
            StabilityRoot::SoftMode(w) => Some(*w),
            StabilityRoot::Growth(_) => None,
        }
    }

    pub fn growth_rate(&self) -> Option<T> {
        match self {
            StabilityRoot::Growth(l) => Some(*l),
            StabilityRoot::SoftMode(_) => None,
        }
    }
}

const SCAN_POINTS: usize = 300;

/// Soft-mode frequency below threshold, growth rate above.
///
/// Modes go as `e^{iωt}`, so a growing mode `e^{λt}` sits at `ω = −iλ`, where
/// `D(−iλ) = −λ² − Ω² + K·L(λ)` with `L` the Laplace transform of `h`.
pub fn stability_roots<T: Real>(p: &ModelParams<T>, kernel: &FeedbackKernel<T>) -> Result<StabilityRoot<T>> {
    p.validate()?;
    let window = T::lit(3.0) * p.omega_r;
    let tol = T::lit(1e-8);
    let d0 = d_from_h(p, c(T::zero(), T::zero()), c(kernel.h_zero()?, T::zero())).re;
    if d0 > T::zero() {
        let k = p.feedback_coupling();
        let omega_sq = p.shifted_frequency_sq();
        let f = |l: T| -> Result<T> { Ok(-l * l - omega_sq + k * kernel.laplace(l)?) };
        let brackets = scan_brackets(f, T::zero(), window, SCAN_POINTS)?;
        let &(a, b) = brackets.first().ok_or(Error::NoBracket {
            window: window.to_f64_lossy(),
        })?;
        return Ok(StabilityRoot::Growth(bisect(f, a, b, tol)?));
    }
    let f = |w: T| -> Result<T> { Ok(char_poly(p, kernel, w)?.re) };
    let brackets = scan_brackets(f, T::zero(), window, SCAN_POINTS)?;
    let mut best: Option<T> = None;
    for (a, b) in brackets {
        let r = bisect(f, a, b, tol)?;
        if best.is_none_or(|w| (r - p.omega_r).abs() < (w - p.omega_r).abs()) {
            best = Some(r);
        }
    }
    best.map(StabilityRoot::SoftMode).ok_or(Error::NoBracket {
        window: window.to_f64_lossy(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceEstimate<T> {
    pub value: T,
    /// Quadrature error estimate (absolute).
    pub error: T,
}

/// `⟨X²⟩ = (1/4π²) ∫ S(ω)/|D(ω)|² dω` over the whole real line.
pub fn quadrature_variance<T: Real>(p: &ModelParams<T>, kernel: &FeedbackKernel<T>) -> Result<VarianceEstimate<T>> {
    p.validate()?;
    let h0 = kernel.h_zero()?;
    let d0 = d_from_h(p, c(T::zero(), T::zero()), c(h0, T::zero())).re;
    if d0 >= T::zero() {
        return Err(Error::UnstableRegime {
            gain: p.gain.to_f64_lossy(),
            critical: critical_gain(p, kernel).map(|g| g.to_f64_lossy()).unwrap_or(f64::NAN),
        });
    }
    if p.g == T::zero() && p.effective_gain() == T::zero() {
        return Ok(VarianceEstimate {
            value: T::zero(),
            error: T::zero(),
        });
    }
    let w_star = stability_roots(p, kernel)?.soft_mode().unwrap_or(p.omega_r);
    let d_star = char_poly(p, kernel, w_star)?;
    if d_star.im.abs() <= T::eps() * T::lit(16.0) * p.omega_r * p.omega_r {
        return Err(Error::Undamped);
    }

    let norm = T::one() / (T::lit(4.0) * T::PI() * T::PI());
    // Both half-lines at once: H(−ω) = conj(H(ω)) and |D(−ω)| = |D(ω)|.
    let failure = std::cell::RefCell::new(None);
    let both = |w: T| -> T {
        let h = match kernel.transform(w) {
            Ok(h) => h,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                return T::zero();
            }
        };
        let d = d_from_h(p, c(w * w, T::zero()), h);
        (s_from_h(p, h) + s_from_h(p, h.conj())) / d.norm_sqr() * norm
    };

    let scale = w_star.max(p.omega_r).max(p.shifted_frequency_sq().abs().sqrt());
    let upper = T::lit(10.0) * scale;
    let mut breaks = Vec::new();
    for k in 1..=12 {
        breaks.push(w_star.min(p.omega_r) * T::lit(10.0).powi(-k));
    }
    for k in 1..=8 {
        let e = T::lit(10.0).powi(-k);
        breaks.push(w_star * (T::one() - e));
        breaks.push(w_star * (T::one() + e));
    }
    breaks.push(w_star);
    breaks.push(T::two() * scale);
    let opts = QuadOptions {
        abs_tol: T::min_positive_value(),
        rel_tol: T::lit(1e-8).max(T::eps() * T::lit(100.0)),
        max_panels: 20_000,
    };
    let body = integrate(both, T::zero(), upper, &breaks, &opts)?;
    let tail = integrate(
        |u: T| {
            if u <= T::zero() {
                T::zero()
            } else {
                both(upper / u) * upper / (u * u)
            }
        },
        T::zero(),
        T::one(),
        &[T::lit(0.1), T::lit(0.5)],
        &opts,
    )?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let value = body.value + tail.value;
    if !value.is_finite() {
        return Err(Error::QuadratureNonConvergence {
            estimate: f64::INFINITY,
            tolerance: opts.rel_tol.to_f64_lossy(),
        });
    }
    Ok(VarianceEstimate {
        value,
        error: body.error + tail.error,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalFit<T> {
    pub a: T,
    pub b: T,
    pub alpha: T,
    pub g_crit_used: T,
    /// RMS relative residual.
    pub residual: T,
    /// Standard errors of `(A, α, B)` from the fit covariance.
    pub std_errors: Option<[T; 3]>,
}

/// Fit `⟨X²⟩ = A/|1 − G/G_crit|^α + B` with `G_crit` held fixed.
///
/// Residuals are relative to the model value; `B ≥ 0`.
pub fn fit_critical_exponent<T: Real>(curve: &[(T, T)], g_crit: T) -> Result<CriticalFit<T>> {
    if curve.len() < 8 {
        return Err(Error::DegenerateData(format!(
            "need at least 8 points, got {}",
            curve.len()
        )));
    }
    if !(g_crit > T::zero()) {
        return Err(Error::InvalidParameter("critical gain must be positive".into()));
    }
    let mut pts: Vec<(T, T)> = curve.iter().map(|&(g, v)| ((T::one() - g / g_crit).abs(), v)).collect();
    if pts
        .iter()
        .any(|&(x, v)| !(x > T::zero()) || !v.is_finite() || !(v > T::zero()))
    {
        return Err(Error::DegenerateData(
            "points must lie off threshold with positive variance".into(),
        ));
    }
    // Ascending in distance from threshold, i.e. descending variance.
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    let (vmin, vmax) = pts.iter().fold((T::infinity(), T::neg_infinity()), |(lo, hi), p| {
        (lo.min(p.1), hi.max(p.1))
    });
    if vmax - vmin <= T::lit(1e-9) * vmax {
        return Err(Error::DegenerateData("flat variance curve".into()));
    }
    if pts.windows(2).any(|w| w[1].1 > w[0].1) {
        return Err(Error::DegenerateData("variance must increase towards threshold".into()));
    }

    // Initial guess from finite differences: dV/dx = −αA x^{−α−1}.
    let mut lx = Vec::new();
    let mut ld = Vec::new();
    for w in pts.windows(2) {
        let dv = (w[0].1 - w[1].1) / (w[1].0 - w[0].0);
        if dv > T::zero() {
            lx.push(((w[0].0 * w[1].0).sqrt()).ln());
            ld.push(dv.ln());
        }
    }
    let (icpt, slope) = linear_regression(&lx, &ld).unwrap_or((T::zero(), -T::two()));
    let alpha0 = (-slope - T::one()).max(T::lit(0.05)).min(T::lit(10.0));
    let a0 = (icpt.exp() / alpha0).max(T::lit(1e-300));
    let b0 = pts
        .iter()
        .map(|&(x, v)| v - a0 * x.powf(-alpha0))
        .fold(T::infinity(), T::min)
        .max(T::zero());

    let model = |q: &[T], x: T| q[0] * x.powf(-q[1]) + q[2];
    let fit = levenberg_marquardt(
        |q: &[T]| Ok(pts.iter().map(|&(x, v)| (model(q, x) - v) / model(q, x)).collect()),
        &[a0, alpha0, b0],
        &[T::min_positive_value(), T::lit(1e-6), T::zero()],
        &[T::infinity(), T::lit(20.0), T::infinity()],
        &LmOptions {
            max_iterations: 2000,
            ..LmOptions::default()
        },
    )?;
    let q = &fit.params;
    if !(q[0] > T::zero()) || !(q[1] > T::zero()) {
        return Err(Error::DegenerateData("fit collapsed to zero amplitude".into()));
    }
    Ok(CriticalFit {
        a: q[0],
        alpha: q[1],
        b: q[2],
        g_crit_used: g_crit,
        residual: (fit.rss / T::from_usize(pts.len())).sqrt(),
        std_errors: fit.std_errors.map(|e| [e[0], e[1], e[2]]),
    })
}

/// Sampled spectra and derived quantities for one parameter set.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralResult<T> {
    pub omegas: Vec<T>,
    pub d_values: Vec<Complex<T>>,
    pub s_values: Vec<T>,
    pub g_crit: Option<T>,
    pub soft_mode_frequency: Option<T>,
    pub growth_rate: Option<T>,
    pub variance: Option<VarianceEstimate<T>>,
}

/// Evaluate `D`, `S`, the critical gain, the stability root and, below threshold, the
/// variance. Failures of the optional pieces leave them `None`.
pub fn analyze<T: Real>(p: &ModelParams<T>, kernel: &FeedbackKernel<T>, omegas: &[T]) -> Result<SpectralResult<T>> {
    p.validate()?;
    let mut d_values = Vec::with_capacity(omegas.len());
    let mut s_values = Vec::with_capacity(omegas.len());
    for &w in omegas {
        let h = kernel.transform(w)?;
        d_values.push(d_from_h(p, c(w * w, T::zero()), h));
        s_values.push(s_from_h(p, h));
    }
    let root = stability_roots(p, kernel).ok();
    Ok(SpectralResult {
        omegas: omegas.to_vec(),
        d_values,
        s_values,
        g_crit: critical_gain(p, kernel).ok(),
        soft_mode_frequency: root.and_then(|r| r.soft_mode()),
        growth_rate: root.and_then(|r| r.growth_rate()),
        variance: quadrature_variance(p, kernel).ok(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn k20() -> FeedbackKernel<f64> {
        FeedbackKernel::normalized_power_law(1.0, 20.0).unwrap()
    }

    #[test]
    fn bare_oscillator() {
        let p = ModelParams::<f64> {
            g: 0.0,
            ..ModelParams::fig2()
        };
        let d = char_poly(&p, &k20(), 0.5).unwrap();
        assert_relative_eq!(d.re, 0.25 - 1.0, max_relative = 1e-15);
        assert_eq!(
            stability_roots(&p, &k20())
                .unwrap()
                .soft_mode()
                .map(|w| (w - 1.0).abs() < 1e-8),
            Some(true)
        );
    }

    #[test]
    fn markovian_noise_level() {
        let p = ModelParams::<f64>::fig2();
        assert_relative_eq!(
            noise_spectrum(&p, &k20(), 3.0).unwrap(),
            4.0 * std::f64::consts::PI * 100.0 / 10001.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn critical_gain_value() {
        let p = ModelParams::<f64>::fig2();
        assert_relative_eq!(critical_gain(&p, &k20()).unwrap(), 0.249925, max_relative = 1e-12);
    }

    #[test]
    fn growth_above_threshold() {
        let p = ModelParams::<f64>::fig2().with_gain(0.4);
        let r = stability_roots(&p, &k20()).unwrap();
        assert!(r.growth_rate().unwrap() > 0.0);
    }

    #[test]
    fn zero_coupling_has_zero_variance() {
        let p = ModelParams::<f64> {
            g: 0.0,
            ..ModelParams::fig2()
        };
        assert_eq!(quadrature_variance(&p, &k20()).unwrap().value, 0.0);
    }

    #[test]
    fn no_feedback_is_undamped() {
        let p = ModelParams::<f64>::fig2();
        assert_eq!(quadrature_variance(&p, &k20()), Err(Error::Undamped));
    }
}
