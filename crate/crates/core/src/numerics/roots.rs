use crate::error::{Error, Result};
use crate::scalar::Real;

/// Bisection on a bracket with `f(lo)` and `f(hi)` of opposite sign.
///
/// Stops when the bracket is narrower than `rel_tol * max(|lo|, |hi|, tiny)`.
pub fn bisect<T, F>(mut f: F, mut lo: T, mut hi: T, rel_tol: T) -> Result<T>
where
    T: Real,
    F: FnMut(T) -> Result<T>,
{
    let mut f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo == T::zero() {
        return Ok(lo);
    }
    if f_hi == T::zero() {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::NoBracket {
            window: hi.to_f64_lossy(),
        });
    }
    let tiny = T::min_positive_value().sqrt();
    for _ in 0..400 {
        let mid = (lo + hi) * T::half();
        if (hi - lo) <= rel_tol * lo.abs().max(hi.abs()).max(tiny) || mid == lo || mid == hi {
            return Ok(mid);
        }
        let f_mid = f(mid)?;
        if f_mid == T::zero() {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) * T::half())
}

/// All sign-change brackets of `f` over an evenly spaced scan of `[a, b]`.
pub fn scan_brackets<T, F>(mut f: F, a: T, b: T, points: usize) -> Result<Vec<(T, T)>>
where
    T: Real,
    F: FnMut(T) -> Result<T>,
{
    let n = points.max(2);
    let step = (b - a) / T::from_usize(n - 1);
    let mut out = Vec::new();
    let mut x_prev = a;
    let mut f_prev = f(a)?;
    for k in 1..n {
        let x = a + step * T::from_usize(k);
        let fx = f(x)?;
        if f_prev == T::zero() {
            out.push((x_prev, x_prev));
        } else if fx.signum() != f_prev.signum() && fx != T::zero() {
            out.push((x_prev, x));
        }
        x_prev = x;
        f_prev = fx;
    }
    if f_prev == T::zero() {
        out.push((x_prev, x_prev));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisection_finds_sqrt_two() {
        let r = bisect(|x: f64| Ok(x * x - 2.0), 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn missing_bracket_is_reported() {
        let e = bisect(|x: f64| Ok(x * x + 1.0), 0.0, 3.0, 1e-8).unwrap_err();
        assert!(matches!(e, Error::NoBracket { .. }));
    }

    #[test]
    fn scan_finds_every_crossing() {
        let b = scan_brackets(|x: f64| Ok(x.sin()), 0.1, 10.0, 300).unwrap();
        assert_eq!(b.len(), 3);
    }
}
