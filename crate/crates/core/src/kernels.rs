//! Causal feedback responses `h(t)` and their one-sided transforms
//! `H(ω) = ∫₀^∞ h(t) e^{-iωt} dt`.

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::numerics::fits::fit_power_plus_linear;
use crate::numerics::optimize::linear_regression;
use crate::numerics::quad::{integrate, QuadOptions};
use crate::scalar::{c, Real};

/// Sign convention for `H(ω)`.
///
/// `Integral` is the direct one-sided transform. `Conjugate` returns `conj(H(ω))`, which
/// is what the closed form `h(0) t0 e^{-iωt0} E_{s+1}(iωt0)` evaluates to for real `ω`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Convention {
    #[default]
    Integral,
    Conjugate,
}

#[derive(Debug, Clone, PartialEq)]
pub enum KernelShape<T> {
    /// `h0 (t0/(t+t0))^{s+1}`.
    PowerLaw {
        h0: T,
        t0: T,
        s: T,
    },
    /// `amplitude · e^{-rate t}`.
    Exponential {
        amplitude: T,
        rate: T,
    },
    /// `weight · δ(t - 0⁺)`.
    DeltaPulse {
        weight: T,
    },
    /// `weight · Σ_{n=1}^{term_count} δ(t - n·period)/n^{exponent+1}`.
    Comb {
        period: T,
        exponent: T,
        weight: T,
        term_count: usize,
    },
    /// Linear interpolation through `(times, values)`, then
    /// `v_L (t_L/t)^{tail_exponent+1}` beyond the last sample.
    Tabulated {
        times: Vec<T>,
        values: Vec<T>,
        tail_exponent: T,
    },
    Sum(Vec<KernelShape<T>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeedbackKernel<T> {
    shape: KernelShape<T>,
    convention: Convention,
    quad: QuadOptions<T>,
}

impl<T: Real> FeedbackKernel<T> {
    pub fn new(shape: KernelShape<T>) -> Result<Self> {
        validate(&shape)?;
        Ok(Self {
            shape,
            convention: Convention::Integral,
            quad: QuadOptions {
                abs_tol: T::lit(1e-15),
                rel_tol: T::lit(1e-11).max(T::eps() * T::lit(64.0)),
                max_panels: 4000,
            },
        })
    }

    pub fn power_law(h0: T, t0: T, s: T) -> Result<Self> {
        Self::new(KernelShape::PowerLaw { h0, t0, s })
    }

    /// Power law with `h(0) = s`, so that `H(0) = t0`.
    pub fn normalized_power_law(t0: T, s: T) -> Result<Self> {
        Self::power_law(s, t0, s)
    }

    pub fn exponential(amplitude: T, rate: T) -> Result<Self> {
        Self::new(KernelShape::Exponential { amplitude, rate })
    }

    pub fn delta(weight: T) -> Result<Self> {
        Self::new(KernelShape::DeltaPulse { weight })
    }

    pub fn comb(period: T, exponent: T, weight: T, term_count: usize) -> Result<Self> {
        Self::new(KernelShape::Comb {
            period,
            exponent,
            weight,
            term_count,
        })
    }

    pub fn tabulated(times: Vec<T>, values: Vec<T>, tail_exponent: T) -> Result<Self> {
        Self::new(KernelShape::Tabulated {
            times,
            values,
            tail_exponent,
        })
    }

    pub fn sum(parts: Vec<FeedbackKernel<T>>) -> Result<Self> {
        Self::new(KernelShape::Sum(parts.into_iter().map(|k| k.shape).collect()))
    }

    pub fn with_convention(mut self, convention: Convention) -> Self {
        self.convention = convention;
        self
    }

    pub fn with_quadrature(mut self, opts: QuadOptions<T>) -> Self {
        self.quad = opts;
        self
    }

    pub fn shape(&self) -> &KernelShape<T> {
        &self.shape
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    /// `h(t)`. Distributions (delta pulses, combs) cannot be sampled pointwise.
    pub fn eval_h(&self, t: T) -> Result<T> {
        if t < T::zero() {
            return Err(Error::NegativeTime(t.to_f64_lossy()));
        }
        eval_shape(&self.shape, t)
    }

    /// `H(ω)` in the configured convention.
    pub fn transform(&self, omega: T) -> Result<Complex<T>> {
        let h = transform_shape(&self.shape, c(omega, T::zero()), &self.quad)?;
        Ok(match self.convention {
            Convention::Integral => h,
            Convention::Conjugate => h.conj(),
        })
    }

    /// `H(0)`, real for every supported shape.
    pub fn h_zero(&self) -> Result<T> {
        Ok(self.transform(T::zero())?.re)
    }

    /// Laplace transform `∫₀^∞ h(t) e^{-λt} dt` for `λ ≥ 0`.
    pub fn laplace(&self, lambda: T) -> Result<T> {
        Ok(transform_shape(&self.shape, c(T::zero(), -lambda), &self.quad)?.re)
    }

    /// Characteristic memory time: `t0`, `1/rate`, the comb span or the table length.
    pub fn memory_time(&self) -> T {
        memory_time(&self.shape)
    }

    /// Smallest power-law time scale `t0` in the kernel, if any.
    pub fn power_law_t0(&self) -> Option<T> {
        fn walk<T: Real>(s: &KernelShape<T>) -> Option<T> {
            match s {
                KernelShape::PowerLaw { t0, .. } => Some(*t0),
                KernelShape::Sum(parts) => parts.iter().filter_map(walk).reduce(T::min),
                _ => None,
            }
        }
        walk(&self.shape)
    }

    /// Point impulses `(time, weight)` from delta and comb components.
    pub fn impulses(&self) -> Vec<(T, T)> {
        let mut out = Vec::new();
        collect_impulses(&self.shape, &mut out);
        out
    }

    /// `h(t)` of the non-impulsive components.
    pub fn smooth_h(&self, t: T) -> T {
        smooth_h(&self.shape, t)
    }

    /// `∫_a^∞ h(t) dt` of the non-impulsive components.
    pub fn smooth_integral_from(&self, a: T) -> T {
        smooth_integral_from(&self.shape, a)
    }
}

fn validate<T: Real>(shape: &KernelShape<T>) -> Result<()> {
    let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
    match shape {
        KernelShape::PowerLaw { h0, t0, s } => {
            if !(h0.is_finite() && *t0 > T::zero() && t0.is_finite() && *s > T::zero() && s.is_finite()) {
                return bad("power law needs finite h0, t0 > 0 and s > 0");
            }
        }
        KernelShape::Exponential { amplitude, rate } => {
            if !(amplitude.is_finite() && *rate > T::zero() && rate.is_finite()) {
                return bad("exponential kernel needs a finite amplitude and rate > 0");
            }
        }
        KernelShape::DeltaPulse { weight } => {
            if !weight.is_finite() {
                return bad("delta weight must be finite");
            }
        }
        KernelShape::Comb {
            period,
            exponent,
            weight,
            term_count,
        } => {
            if !(*period > T::zero() && *exponent > T::zero() && weight.is_finite() && *term_count >= 1) {
                return bad("comb needs period > 0, exponent > 0 and term_count >= 1");
            }
        }
        KernelShape::Tabulated {
            times,
            values,
            tail_exponent,
        } => {
            if times.len() < 2 || times.len() != values.len() {
                return bad("tabulated kernel needs at least two (time, value) samples");
            }
            if times[0] != T::zero() {
                return bad("tabulated kernel must start at t = 0");
            }
            if times.windows(2).any(|w| !(w[1] > w[0])) {
                return bad("tabulated times must be strictly increasing");
            }
            if values.iter().any(|v| !v.is_finite()) || !(*tail_exponent > T::zero()) {
                return bad("tabulated values must be finite and tail_exponent > 0");
            }
        }
        KernelShape::Sum(parts) => {
            if parts.is_empty() {
                return bad("composite kernel needs at least one part");
            }
            for p in parts {
                validate(p)?;
            }
        }
    }
    Ok(())
}

fn eval_shape<T: Real>(shape: &KernelShape<T>, t: T) -> Result<T> {
    match shape {
        KernelShape::DeltaPulse { .. } | KernelShape::Comb { .. } => Err(Error::PointwiseDeltaEvaluation),
        KernelShape::Sum(parts) => parts.iter().map(|p| eval_shape(p, t)).sum(),
        _ => Ok(smooth_h(shape, t)),
    }
}

fn smooth_h<T: Real>(shape: &KernelShape<T>, t: T) -> T {
    match shape {
        KernelShape::PowerLaw { h0, t0, s } => *h0 * (*t0 / (t + *t0)).powf(*s + T::one()),
        KernelShape::Exponential { amplitude, rate } => *amplitude * (-*rate * t).exp(),
        KernelShape::DeltaPulse { .. } | KernelShape::Comb { .. } => T::zero(),
        KernelShape::Tabulated {
            times,
            values,
            tail_exponent,
        } => tabulated_h(times, values, *tail_exponent, t),
        KernelShape::Sum(parts) => parts.iter().map(|p| smooth_h(p, t)).sum(),
    }
}

fn tabulated_h<T: Real>(times: &[T], values: &[T], tail: T, t: T) -> T {
    let last = times.len() - 1;
    if t >= times[last] {
        return values[last] * (times[last] / t).powf(tail + T::one());
    }
    let k = times.partition_point(|&x| x <= t).saturating_sub(1).min(last - 1);
    let (a, b) = (times[k], times[k + 1]);
    values[k] + (values[k + 1] - values[k]) * (t - a) / (b - a)
}

fn smooth_integral_from<T: Real>(shape: &KernelShape<T>, a: T) -> T {
    match shape {
        KernelShape::PowerLaw { h0, t0, s } => *h0 * t0.powf(*s + T::one()) * (a + *t0).powf(-*s) / *s,
        KernelShape::Exponential { amplitude, rate } => *amplitude * (-*rate * a).exp() / *rate,
        KernelShape::DeltaPulse { .. } | KernelShape::Comb { .. } => T::zero(),
        KernelShape::Tabulated {
            times,
            values,
            tail_exponent,
        } => {
            let last = times.len() - 1;
            let tl = times[last];
            let from = a.max(tl);
            let mut acc =
                values[last] * tl.powf(*tail_exponent + T::one()) * from.powf(-*tail_exponent) / *tail_exponent;
            for k in 0..last {
                let (x0, x1) = (times[k], times[k + 1]);
                if x1 <= a {
                    continue;
                }
                let lo = x0.max(a);
                let v_lo = tabulated_h(times, values, *tail_exponent, lo);
                acc += (v_lo + values[k + 1]) * T::half() * (x1 - lo);
            }
            acc
        }
        KernelShape::Sum(parts) => parts.iter().map(|p| smooth_integral_from(p, a)).sum(),
    }
}

fn collect_impulses<T: Real>(shape: &KernelShape<T>, out: &mut Vec<(T, T)>) {
    match shape {
        KernelShape::DeltaPulse { weight } => out.push((T::zero(), *weight)),
        KernelShape::Comb {
            period,
            exponent,
            weight,
            term_count,
        } => {
            for n in 1..=*term_count {
                let nf = T::from_usize(n);
                out.push((*period * nf, *weight / nf.powf(*exponent + T::one())));
            }
        }
        KernelShape::Sum(parts) => parts.iter().for_each(|p| collect_impulses(p, out)),
        _ => {}
    }
}

fn memory_time<T: Real>(shape: &KernelShape<T>) -> T {
    match shape {
        KernelShape::PowerLaw { t0, .. } => *t0,
        KernelShape::Exponential { rate, .. } => T::one() / *rate,
        KernelShape::DeltaPulse { .. } => T::zero(),
        KernelShape::Comb { period, term_count, .. } => *period * T::from_usize(*term_count),
        KernelShape::Tabulated { times, .. } => times[times.len() - 1],
        KernelShape::Sum(parts) => parts.iter().map(memory_time).fold(T::zero(), T::max),
    }
}

/// `∫₀^∞ h(t) e^{-iνt} dt` for complex `ν` with `Im ν ≤ 0`.
fn transform_shape<T: Real>(shape: &KernelShape<T>, nu: Complex<T>, quad: &QuadOptions<T>) -> Result<Complex<T>> {
    let i = c(T::zero(), T::one());
    match shape {
        KernelShape::PowerLaw { h0, t0, s } => {
            if nu.is_zero() {
                return Ok(c(*h0 * *t0 / *s, T::zero()));
            }
            let p = *s + T::one();
            power_law_transform(*h0 * t0.powf(p), *t0, p, T::zero(), nu, quad)
        }
        KernelShape::Exponential { amplitude, rate } => Ok(c(*amplitude, T::zero()) / (i * nu + *rate)),
        KernelShape::DeltaPulse { weight } => Ok(c(*weight, T::zero())),
        KernelShape::Comb {
            period,
            exponent,
            weight,
            term_count,
        } => {
            let mut acc = Complex::zero();
            for n in 1..=*term_count {
                let nf = T::from_usize(n);
                acc = acc + (-i * nu * *period * nf).exp() / nf.powf(*exponent + T::one());
            }
            if nu.is_zero() {
                // Integral-test estimate of the truncated remainder.
                acc = acc + (T::from_usize(*term_count) + T::half()).powf(-*exponent) / *exponent;
            }
            Ok(acc * *weight)
        }
        KernelShape::Tabulated {
            times,
            values,
            tail_exponent,
        } => {
            let mut acc: Complex<T> = Complex::zero();
            for k in 0..times.len() - 1 {
                acc = acc + linear_segment(times[k], times[k + 1], values[k], values[k + 1], nu);
            }
            let last = times.len() - 1;
            let p = *tail_exponent + T::one();
            let tl = times[last];
            let tail = if nu.is_zero() {
                c(values[last] * tl / *tail_exponent, T::zero())
            } else {
                power_law_transform(values[last] * tl.powf(p), T::zero(), p, tl, nu, quad)?
            };
            Ok(acc + tail)
        }
        KernelShape::Sum(parts) => {
            let mut acc = Complex::zero();
            for p in parts {
                acc = acc + transform_shape(p, nu, quad)?;
            }
            Ok(acc)
        }
    }
}

/// Exact transform of the linear interpolant between `(a, va)` and `(b, vb)`.
fn linear_segment<T: Real>(a: T, b: T, va: T, vb: T, nu: Complex<T>) -> Complex<T> {
    let d = b - a;
    let z = c(nu.im, -nu.re); // -iν
    let x = z * d;
    let (phi1, psi) = if x.norm() < T::lit(1e-2) {
        let x2 = x * x;
        let x3 = x2 * x;
        let x4 = x3 * x;
        (
            x * T::half() + x2 / T::lit(6.0) + x3 / T::lit(24.0) + x4 / T::lit(120.0) + T::one(),
            x / T::lit(3.0) + x2 / T::lit(8.0) + x3 / T::lit(30.0) + x4 / T::lit(144.0) + T::half(),
        )
    } else {
        let ex = x.exp();
        ((ex - T::one()) / x, (ex * (x - T::one()) + T::one()) / (x * x))
    };
    let slope = (vb - va) / d;
    (z * a).exp() * (phi1 * (va * d) + psi * (slope * d * d))
}

/// `∫_start^∞ c (t + shift)^{-p} e^{-iνt} dt` for `p > 1`, `ν ≠ 0`, `Im ν ≤ 0`.
///
/// Adaptive quadrature on `[start, T]` plus the integration-by-parts series
/// `e^{-iνT} Σ_k f^{(k)}(T)/(iν)^{k+1}` for the remainder, with `T` pushed out until the
/// first omitted term is below tolerance.
fn power_law_transform<T: Real>(
    coef: T,
    shift: T,
    p: T,
    start: T,
    nu: Complex<T>,
    quad: &QuadOptions<T>,
) -> Result<Complex<T>> {
    let i = c(T::zero(), T::one());
    let mag = nu.norm();
    let u0 = start + shift;
    let f = |t: T| coef * (t + shift).powf(-p);
    // Scale of the answer: min(H(0), f(start)/|ν|).
    let scale = (coef * u0.powf(T::one() - p) / (p - T::one())).min(f(start) / mag);
    let tol = quad.abs_tol.max(quad.rel_tol * scale);
    let max_terms = 8;

    let mut u_end = u0.max(T::two() * (p + T::from_usize(max_terms)) / mag);
    let mut tail;
    loop {
        let t_end = u_end - shift;
        let damp = (-i * nu * t_end).exp();
        let mut sum = Complex::zero();
        let mut term_mag = coef * u_end.powf(-p) / mag;
        let mut deriv = coef * u_end.powf(-p);
        let mut inv = Complex::new(T::one(), T::zero()) / (i * nu);
        let mut err = T::infinity();
        for k in 0..=max_terms {
            let next_mag = term_mag * (p + T::from_usize(k)) / (u_end * mag);
            sum = sum + inv * deriv;
            if k == max_terms || next_mag >= term_mag {
                err = next_mag * damp.norm();
                break;
            }
            deriv = -deriv * (p + T::from_usize(k)) / u_end;
            inv = inv / (i * nu);
            term_mag = next_mag;
        }
        tail = damp * sum;
        if err <= tol * T::lit(0.1) || u_end > T::lit(1e300) {
            break;
        }
        u_end = u_end * T::two();
    }
    let t_end = u_end - shift;
    if t_end <= start {
        return Ok(tail);
    }

    let mut breaks = Vec::new();
    let half_period = T::PI() / mag;
    let mut u = u0 * T::two();
    while u - shift < t_end && u - u0 < half_period {
        breaks.push(u - shift);
        u = u * T::two();
    }
    let mut t = breaks.last().copied().unwrap_or(start) + half_period;
    while t < t_end {
        breaks.push(t);
        t += half_period;
    }
    let opts = QuadOptions {
        abs_tol: tol * T::lit(0.5),
        rel_tol: T::zero(),
        max_panels: quad.max_panels.max(breaks.len() * 4 + 64),
    };
    let body = integrate(|t: T| (-i * nu * t).exp() * f(t), start, t_end, &breaks, &opts)?;
    Ok(body.value + tail)
}

/// Estimated small-frequency exponent of `|Im H(ω)|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeEstimate<T> {
    /// Exponent `p` of the fit `|Im H| ≈ a ω^p + b ω`.
    pub exponent: T,
    /// Plain log–log regression slope over the same grid.
    pub plain_slope: T,
    pub amplitude: T,
    pub linear_coefficient: T,
    /// RMS relative residual of the two-term fit.
    pub residual: T,
}

/// Small-ω scaling exponent of `Im H` for a power-law kernel.
///
/// `|Im H|` carries an analytic `O(ω)` term next to the `ω^s` singular part, so a bare
/// log–log slope is biased towards 1 as `s → 1`; the exponent is obtained from a
/// two-term fit instead and the bare slope is kept as a diagnostic.
pub fn small_omega_im_slope<T: Real>(kernel: &FeedbackKernel<T>, range: (T, T)) -> Result<SlopeEstimate<T>> {
    if !matches!(kernel.shape(), KernelShape::PowerLaw { .. }) {
        return Err(Error::NonPowerLawKernel);
    }
    let (lo, hi) = range;
    let decades = if lo > T::zero() && hi > lo {
        (hi / lo).log10()
    } else {
        T::zero()
    };
    if decades < T::one() {
        return Err(Error::RangeTooNarrow {
            decades: decades.to_f64_lossy(),
        });
    }
    let n = 41;
    let omegas: Vec<T> = (0..n)
        .map(|k| lo * (hi / lo).powf(T::from_usize(k) / T::from_usize(n - 1)))
        .collect();
    let mut ys = Vec::with_capacity(n);
    for &w in &omegas {
        ys.push(kernel.transform(w)?.im.abs());
    }
    let lx: Vec<T> = omegas.iter().map(|w| w.ln()).collect();
    let ly: Vec<T> = ys.iter().map(|y| y.ln()).collect();
    let (_, plain_slope) =
        linear_regression(&lx, &ly).ok_or_else(|| Error::DegenerateData("flat frequency grid".into()))?;
    let fit = fit_power_plus_linear(&omegas, &ys, (T::lit(0.01), T::lit(0.999)))?;
    Ok(SlopeEstimate {
        exponent: fit.exponent,
        plain_slope,
        amplitude: fit.amplitude,
        linear_coefficient: fit.linear,
        residual: fit.residual,
    })
}
