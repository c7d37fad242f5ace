//! Curve fits used by the ensemble reducers.

use num_complex::Complex;
use rustfft::FftPlanner;

use super::optimize::{golden_min, levenberg_marquardt, linear_lstsq, linear_regression, LmOptions};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DampedSinusoid<T> {
    pub amplitude: T,
    /// Angular frequency.
    pub frequency: T,
    pub decay: T,
    pub phase: T,
    pub rss: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthEstimate<T> {
    pub rate: T,
    pub intercept: T,
}

fn fft_f64(data: &mut [Complex<f64>]) {
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(data.len()).process(data);
}

/// Biased sample autocorrelation (mean removed) up to `max_lag`, via zero-padded FFT.
pub fn autocorrelation<T: Real>(y: &[T], max_lag: usize) -> Vec<T> {
    let n = y.len();
    if n == 0 {
        return Vec::new();
    }
    let mean = y.iter().map(|v| v.to_f64_lossy()).sum::<f64>() / n as f64;
    let len = (2 * n).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = y
        .iter()
        .map(|v| Complex::new(v.to_f64_lossy() - mean, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(len)
        .collect();
    fft_f64(&mut buf);
    for v in buf.iter_mut() {
        *v = Complex::new(v.norm_sqr(), 0.0);
    }
    // Inverse transform through conjugation.
    for v in buf.iter_mut() {
        *v = v.conj();
    }
    fft_f64(&mut buf);
    (0..=max_lag.min(n - 1))
        .map(|k| T::lit(buf[k].re / (len as f64 * n as f64)))
        .collect()
}

/// Angular frequency of the largest non-DC peak of a uniformly sampled series.
pub fn dominant_frequency<T: Real>(y: &[T], dt: T) -> Option<T> {
    let n = y.len();
    if n < 4 {
        return None;
    }
    let len = (4 * n).next_power_of_two();
    let mean = y.iter().map(|v| v.to_f64_lossy()).sum::<f64>() / n as f64;
    let mut buf: Vec<Complex<f64>> = y
        .iter()
        .map(|v| Complex::new(v.to_f64_lossy() - mean, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(len)
        .collect();
    fft_f64(&mut buf);
    let power: Vec<f64> = buf[..len / 2].iter().map(|c| c.norm_sqr()).collect();
    let (k, _) = power
        .iter()
        .enumerate()
        .skip(1)
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap_or(std::cmp::Ordering::Equal))?;
    // Parabolic refinement on the log spectrum.
    let mut shift = 0.0;
    if k + 1 < power.len() && power[k - 1] > 0.0 && power[k + 1] > 0.0 {
        let (a, b, c) = (power[k - 1].ln(), power[k].ln(), power[k + 1].ln());
        let den = a - 2.0 * b + c;
        if den.abs() > 0.0 {
            shift = (0.5 * (a - c) / den).clamp(-0.5, 0.5);
        }
    }
    let w = 2.0 * std::f64::consts::PI * (k as f64 + shift) / (len as f64 * dt.to_f64_lossy());
    Some(T::lit(w))
}

/// Least-squares fit of `A e^{-γ t} cos(ω t + φ)` to samples on a uniform grid.
pub fn fit_damped_sinusoid<T: Real>(t: &[T], y: &[T]) -> Result<DampedSinusoid<T>> {
    if t.len() != y.len() || t.len() < 6 {
        return Err(Error::DegenerateData(
            "damped-sinusoid fit needs at least 6 samples".into(),
        ));
    }
    let dt = t[1] - t[0];
    let w0 = dominant_frequency(y, dt).ok_or_else(|| Error::DegenerateData("no spectral peak".into()))?;
    let t0 = t[0];
    let basis = |w: T, g: T, ti: T| {
        let e = (-g * (ti - t0)).exp();
        (e * (w * (ti - t0)).cos(), e * (w * (ti - t0)).sin())
    };
    // Start with the linear amplitudes at zero decay.
    let rows: Vec<Vec<T>> = t
        .iter()
        .map(|&ti| {
            let (c, s) = basis(w0, T::zero(), ti);
            vec![c, s]
        })
        .collect();
    let ab = linear_lstsq(&rows, y).ok_or_else(|| Error::DegenerateData("singular sinusoid basis".into()))?;
    let span = t[t.len() - 1] - t0;
    let nyquist = T::PI() / dt;
    let big = T::lit(1e3) * (w0 + T::one() / span);
    let fit = levenberg_marquardt(
        |p: &[T]| {
            Ok(t.iter()
                .zip(y)
                .map(|(&ti, &yi)| {
                    let (c, s) = basis(p[2], p[3], ti);
                    p[0] * c + p[1] * s - yi
                })
                .collect())
        },
        &[ab[0], ab[1], w0, T::zero()],
        &[-T::infinity(), -T::infinity(), T::zero(), -big],
        &[T::infinity(), T::infinity(), nyquist, big],
        &LmOptions::default(),
    )?;
    let (a, b) = (fit.params[0], fit.params[1]);
    Ok(DampedSinusoid {
        amplitude: (a * a + b * b).sqrt(),
        frequency: fit.params[2],
        decay: fit.params[3],
        phase: (-b).atan2(a),
        rss: fit.rss,
    })
}

/// Rate of exponential growth from a straight-line fit of `ln|y|` over the trailing
/// `window` fraction of the samples.
pub fn fit_exponential_growth<T: Real>(t: &[T], y: &[T], window: T) -> Result<GrowthEstimate<T>> {
    let n = t.len().min(y.len());
    let start = n - ((T::from_usize(n) * window).to_f64_lossy() as usize).min(n);
    let (xs, ls): (Vec<T>, Vec<T>) = t[start..n]
        .iter()
        .zip(&y[start..n])
        .filter(|(_, v)| v.abs() > T::zero() && v.is_finite())
        .map(|(&ti, v)| (ti, v.abs().ln()))
        .unzip();
    let (intercept, rate) = linear_regression(&xs, &ls)
        .ok_or_else(|| Error::DegenerateData("growth fit needs two distinct samples".into()))?;
    Ok(GrowthEstimate { rate, intercept })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerPlusLinear<T> {
    pub exponent: T,
    pub amplitude: T,
    pub linear: T,
    /// RMS relative residual.
    pub residual: T,
}

/// Fit `y ≈ a x^p + b x` with relative residuals; `(a, b)` are solved linearly for each
/// trial `p` and `p` is located by a coarse scan followed by golden-section refinement.
pub fn fit_power_plus_linear<T: Real>(x: &[T], y: &[T], p_range: (T, T)) -> Result<PowerPlusLinear<T>> {
    if x.len() != y.len() || x.len() < 4 || y.iter().any(|v| !(*v > T::zero())) {
        return Err(Error::DegenerateData("power fit needs >= 4 positive samples".into()));
    }
    let solve = |p: T| -> Option<(T, T, T)> {
        let rows: Vec<Vec<T>> = x
            .iter()
            .zip(y)
            .map(|(&xi, &yi)| vec![xi.powf(p) / yi, xi / yi])
            .collect();
        let ones = vec![T::one(); x.len()];
        let ab = linear_lstsq(&rows, &ones)?;
        let rss: T = rows
            .iter()
            .map(|r| {
                let e = r[0] * ab[0] + r[1] * ab[1] - T::one();
                e * e
            })
            .sum();
        Some((ab[0], ab[1], rss))
    };
    let cost = |p: T| solve(p).map(|v| v.2).unwrap_or_else(T::infinity);
    let (lo, hi) = p_range;
    let n = 60;
    let step = (hi - lo) / T::from_usize(n);
    let (best, _) = (0..=n)
        .map(|k| {
            let p = lo + step * T::from_usize(k);
            (k, cost(p))
        })
        .fold((0, T::infinity()), |acc, v| if v.1 < acc.1 { v } else { acc });
    let a = (lo + step * T::from_usize(best.saturating_sub(1))).max(lo);
    let b = (lo + step * T::from_usize(best + 1)).min(hi);
    let (p, _) = golden_min(cost, a, b, T::lit(1e-9).max(T::eps().sqrt()));
    let (amp, lin, rss) = solve(p).ok_or_else(|| Error::DegenerateData("singular power fit".into()))?;
    Ok(PowerPlusLinear {
        exponent: p,
        amplitude: amp,
        linear: lin,
        residual: (rss / T::from_usize(x.len())).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_damped_cosine() {
        let t: Vec<f64> = (0..800).map(|k| k as f64 * 0.05).collect();
        let y: Vec<f64> = t
            .iter()
            .map(|&t| 1.7 * (-0.03 * t).exp() * (0.83 * t + 0.4).cos())
            .collect();
        let f = fit_damped_sinusoid(&t, &y).unwrap();
        assert!((f.frequency - 0.83).abs() < 1e-8, "{f:?}");
        assert!((f.decay - 0.03).abs() < 1e-8);
        assert!((f.amplitude - 1.7).abs() < 1e-8);
        assert!((f.phase - 0.4).abs() < 1e-8);
    }

    #[test]
    fn autocorrelation_of_cosine() {
        let y: Vec<f64> = (0..4096).map(|k| (0.1 * k as f64).cos()).collect();
        let c = autocorrelation(&y, 10);
        assert!((c[0] - 0.5).abs() < 1e-2);
        assert!((c[10] / c[0] - 1f64.cos()).abs() < 1e-2);
    }

    #[test]
    fn separates_power_from_linear_term() {
        let x: Vec<f64> = (0..30).map(|k| 1e-4 * 100f64.powf(k as f64 / 29.0)).collect();
        let y: Vec<f64> = x.iter().map(|&x| 2.0 * x.powf(0.9) + 5.0 * x).collect();
        let f = fit_power_plus_linear(&x, &y, (0.01, 0.999)).unwrap();
        assert!((f.exponent - 0.9).abs() < 1e-6, "{f:?}");
    }

    #[test]
    fn growth_rate_from_log_fit() {
        let t: Vec<f64> = (0..100).map(|k| k as f64 * 0.1).collect();
        let y: Vec<f64> = t.iter().map(|&t| -3.0 * (0.7 * t).exp()).collect();
        let g = fit_exponential_growth(&t, &y, 0.5).unwrap();
        assert!((g.rate - 0.7).abs() < 1e-12);
    }
}
