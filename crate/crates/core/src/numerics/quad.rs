//! Globally adaptive Gauss–Kronrod (7/15) quadrature on finite intervals.
//!
//! The integrator works for real and complex integrands through [`QuadValue`]. Callers
//! supply initial breakpoints (oscillation half-periods, peaks, kinks); the adaptive loop
//! then bisects whichever panel carries the largest error estimate until the global
//! estimate meets `max(abs_tol, rel_tol * |I|)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::Real;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss-7 weights for XGK[1], XGK[3], XGK[5] and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Values the integrator can accumulate.
pub trait QuadValue<T: Real>: Copy + Zero + Add<Output = Self> + Sub<Output = Self> + Mul<T, Output = Self> {
    fn magnitude(&self) -> T;
}

impl<T: Real> QuadValue<T> for Complex<T> {
    #[inline]
    fn magnitude(&self) -> T {
        self.norm()
    }
}

impl<T: Real> QuadValue<T> for T {
    #[inline]
    fn magnitude(&self) -> T {
        self.abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_panels: usize,
}

impl<T: Real> Default for QuadOptions<T> {
    fn default() -> Self {
        Self {
            abs_tol: T::lit(1e-12),
            rel_tol: T::lit(1e-10),
            max_panels: 20_000,
        }
    }
}

impl<T: Real> QuadOptions<T> {
    pub fn new(abs_tol: T, rel_tol: T) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult<V, T> {
    pub value: V,
    pub error: T,
    pub panels: usize,
}

struct Panel<V, T> {
    a: T,
    b: T,
    value: V,
    error: T,
}

impl<V, T: PartialOrd> PartialEq for Panel<V, T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<V, T: PartialOrd> Eq for Panel<V, T> {}
impl<V, T: PartialOrd> PartialOrd for Panel<V, T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<V, T: PartialOrd> Ord for Panel<V, T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.partial_cmp(&other.error).unwrap_or(Ordering::Equal)
    }
}

/// One Gauss–Kronrod 7/15 application on `[a, b]`: (Kronrod value, |K - G|).
pub fn gk15<T, V, F>(f: &mut F, a: T, b: T) -> (V, T)
where
    T: Real,
    V: QuadValue<T>,
    F: FnMut(T) -> V,
{
    let centre = (a + b) * T::half();
    let half = (b - a) * T::half();
    let fc = f(centre);
    let mut kronrod = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    for j in 0..7 {
        let dx = half * T::lit(XGK[j]);
        let f1 = f(centre - dx);
        let f2 = f(centre + dx);
        let pair = f1 + f2;
        kronrod = kronrod + pair * T::lit(WGK[j]);
        if j % 2 == 1 {
            gauss = gauss + pair * T::lit(WG[j / 2]);
        }
    }
    let k = kronrod * half;
    let g = gauss * half;
    (k, (k - g).magnitude())
}

/// Adaptive integral of `f` over `[a, b]` with optional interior breakpoints.
///
/// Breakpoints outside `(a, b)` are ignored; they need not be sorted.
pub fn integrate<T, V, F>(mut f: F, a: T, b: T, breakpoints: &[T], opts: &QuadOptions<T>) -> Result<QuadResult<V, T>>
where
    T: Real,
    V: QuadValue<T>,
    F: FnMut(T) -> V,
{
    if a == b {
        return Ok(QuadResult {
            value: V::zero(),
            error: T::zero(),
            panels: 0,
        });
    }
    let (lo, hi, sign) = if a < b { (a, b, T::one()) } else { (b, a, -T::one()) };
    let mut cuts: Vec<T> = breakpoints.iter().copied().filter(|&x| x > lo && x < hi).collect();
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap_or(Ordering::Equal));
    cuts.dedup();

    let mut heap = BinaryHeap::new();
    let mut total = V::zero();
    let mut total_err = T::zero();
    let mut left = lo;
    for &right in cuts.iter().chain(std::iter::once(&hi)) {
        let (v, e) = gk15(&mut f, left, right);
        total = total + v;
        total_err += e;
        heap.push(Panel {
            a: left,
            b: right,
            value: v,
            error: e,
        });
        left = right;
    }

    let target = |total: &V| opts.abs_tol.max(opts.rel_tol * total.magnitude());
    while total_err > target(&total) {
        if heap.len() >= opts.max_panels {
            return Err(Error::QuadratureNonConvergence {
                estimate: total_err.to_f64_lossy(),
                tolerance: target(&total).to_f64_lossy(),
            });
        }
        let worst = match heap.pop() {
            Some(p) => p,
            None => break,
        };
        let mid = (worst.a + worst.b) * T::half();
        if mid <= worst.a || mid >= worst.b {
            // Panel cannot be split further in this precision.
            return Err(Error::QuadratureNonConvergence {
                estimate: total_err.to_f64_lossy(),
                tolerance: target(&total).to_f64_lossy(),
            });
        }
        let (v1, e1) = gk15(&mut f, worst.a, mid);
        let (v2, e2) = gk15(&mut f, mid, worst.b);
        total = total - worst.value + v1 + v2;
        total_err = total_err - worst.error + e1 + e2;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }

    // Re-sum to shed the drift accumulated by incremental updates.
    let mut value = V::zero();
    let mut error = T::zero();
    for p in heap.iter() {
        value = value + p.value;
        error += p.error;
    }
    Ok(QuadResult {
        value: value * sign,
        error,
        panels: heap.len(),
    })
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, computed by Newton iteration.
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    let mut nodes = vec![0.0f64; n];
    let mut weights = vec![0.0f64; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (
        nodes.into_iter().map(T::lit).collect(),
        weights.into_iter().map(T::lit).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x: f64| x.powi(5) - 3.0 * x * x, 0.0, 2.0, &[], &QuadOptions::default()).unwrap();
        assert_relative_eq!(r.value, 64.0 / 6.0 - 8.0, max_relative = 1e-14);
    }

    #[test]
    fn oscillatory_complex_integrand() {
        // \int_0^{10} e^{-i 3 t} dt
        let w = 3.0f64;
        let r: QuadResult<Complex<f64>, f64> = integrate(
            |t: f64| Complex::new(0.0, -w * t).exp(),
            0.0,
            10.0,
            &[],
            &QuadOptions::new(1e-14, 1e-13),
        )
        .unwrap();
        let exact = (Complex::new(0.0, -w * 10.0).exp() - 1.0) / Complex::new(0.0, -w);
        assert!((r.value - exact).norm() < 1e-12);
    }

    #[test]
    fn endpoint_singularity_converges() {
        let r = integrate(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, &[], &QuadOptions::new(1e-10, 1e-10)).unwrap();
        assert_relative_eq!(r.value, 2.0, max_relative = 1e-8);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let r = integrate(|x: f64| x, 1.0, 0.0, &[0.5], &QuadOptions::default()).unwrap();
        assert_relative_eq!(r.value, -0.5, max_relative = 1e-14);
    }

    #[test]
    fn gauss_legendre_integrates_degree_2n_minus_1() {
        let (x, w) = gauss_legendre::<f64>(6);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(10)).sum();
        assert_relative_eq!(s, 2.0 / 11.0, max_relative = 1e-13);
        assert_relative_eq!(w.iter().sum::<f64>(), 2.0, max_relative = 1e-14);
    }

    #[test]
    fn budget_exhaustion_reports_estimate() {
        let opts = QuadOptions {
            abs_tol: 1e-300,
            rel_tol: 0.0,
            max_panels: 4,
        };
        let err = integrate(|x: f64| (1.0 / x).sin(), 1e-6, 1.0, &[], &opts).unwrap_err();
        assert!(matches!(err, Error::QuadratureNonConvergence { .. }));
    }
}
