//! Small dense solvers: 1-D bounded minimisation, linear least squares and a bounded
//! Levenberg–Marquardt fitter with finite-difference Jacobians.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Solve `a x = b` in place by Gaussian elimination with partial pivoting.
/// `a` is row-major `n x n`. Returns `None` for a (numerically) singular system.
pub fn solve_dense<T: Real>(mut a: Vec<T>, mut b: Vec<T>, n: usize) -> Option<Vec<T>> {
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| {
            a[i * n + col]
                .abs()
                .partial_cmp(&a[j * n + col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if a[pivot * n + col].abs() <= T::min_positive_value() {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            b.swap(col, pivot);
        }
        let diag = a[col * n + col];
        for row in (col + 1)..n {
            let factor = a[row * n + col] / diag;
            if factor == T::zero() {
                continue;
            }
            for k in col..n {
                let v = a[col * n + k];
                a[row * n + k] -= factor * v;
            }
            let v = b[col];
            b[row] -= factor * v;
        }
    }
    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in (row + 1)..n {
            acc -= a[row * n + k] * x[k];
        }
        x[row] = acc / a[row * n + row];
    }
    if x.iter().all(|v| v.is_finite()) {
        Some(x)
    } else {
        None
    }
}

/// Inverse of a small dense matrix (row-major), `None` when singular.
pub fn invert<T: Real>(a: &[T], n: usize) -> Option<Vec<T>> {
    let mut inv = vec![T::zero(); n * n];
    for col in 0..n {
        let mut e = vec![T::zero(); n];
        e[col] = T::one();
        let x = solve_dense(a.to_vec(), e, n)?;
        for row in 0..n {
            inv[row * n + col] = x[row];
        }
    }
    Some(inv)
}

/// Ordinary least squares for `y ≈ Σ_j c_j basis_j` (columns given row by row).
pub fn linear_lstsq<T: Real>(rows: &[Vec<T>], y: &[T]) -> Option<Vec<T>> {
    let p = rows.first()?.len();
    let mut ata = vec![T::zero(); p * p];
    let mut aty = vec![T::zero(); p];
    for (row, &yi) in rows.iter().zip(y) {
        for i in 0..p {
            aty[i] += row[i] * yi;
            for j in 0..p {
                ata[i * p + j] += row[i] * row[j];
            }
        }
    }
    solve_dense(ata, aty, p)
}

/// Slope and intercept of the straight-line fit `y = a + b x`.
pub fn linear_regression<T: Real>(x: &[T], y: &[T]) -> Option<(T, T)> {
    let n = T::from_usize(x.len());
    if x.len() < 2 {
        return None;
    }
    let mx = x.iter().copied().sum::<T>() / n;
    let my = y.iter().copied().sum::<T>() / n;
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    for (&xi, &yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
    }
    if sxx == T::zero() {
        return None;
    }
    let slope = sxy / sxx;
    Some((my - slope * mx, slope))
}

/// Golden-section search for the minimum of a unimodal `f` on `[a, b]`.
pub fn golden_min<T, F>(mut f: F, mut a: T, mut b: T, x_tol: T) -> (T, T)
where
    T: Real,
    F: FnMut(T) -> T,
{
    let inv_phi = T::lit(0.618_033_988_749_894_9);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > x_tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = (a + b) * T::half();
    let fx = f(x);
    (x, fx)
}

#[derive(Debug, Clone)]
pub struct LmOptions<T> {
    pub max_iterations: usize,
    pub x_tol: T,
    pub f_tol: T,
}

impl<T: Real> Default for LmOptions<T> {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            x_tol: T::lit(1e-12),
            f_tol: T::lit(1e-14),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LmResult<T> {
    pub params: Vec<T>,
    pub residuals: Vec<T>,
    /// Sum of squared residuals.
    pub rss: T,
    pub iterations: usize,
    /// Standard errors `sqrt(diag(s² (JᵀJ)⁻¹))`, `s² = rss / (n - p)`.
    pub std_errors: Option<Vec<T>>,
}

fn jacobian<T, F>(f: &mut F, p: &[T], r0: &[T], lower: &[T], upper: &[T]) -> Result<Vec<Vec<T>>>
where
    T: Real,
    F: FnMut(&[T]) -> Result<Vec<T>>,
{
    let m = r0.len();
    let mut jac = vec![vec![T::zero(); p.len()]; m];
    let h0 = T::eps().sqrt();
    for j in 0..p.len() {
        let h = h0 * p[j].abs().max(T::lit(1e-4));
        let mut up = p.to_vec();
        let mut dn = p.to_vec();
        up[j] = (p[j] + h).min(upper[j]);
        dn[j] = (p[j] - h).max(lower[j]);
        let span = up[j] - dn[j];
        if span <= T::zero() {
            continue;
        }
        let r_up = if up[j] == p[j] { r0.to_vec() } else { f(&up)? };
        let r_dn = if dn[j] == p[j] { r0.to_vec() } else { f(&dn)? };
        for i in 0..m {
            jac[i][j] = (r_up[i] - r_dn[i]) / span;
        }
    }
    Ok(jac)
}

/// Box-constrained Levenberg–Marquardt on a residual vector.
pub fn levenberg_marquardt<T, F>(
    mut residual: F,
    p0: &[T],
    lower: &[T],
    upper: &[T],
    opts: &LmOptions<T>,
) -> Result<LmResult<T>>
where
    T: Real,
    F: FnMut(&[T]) -> Result<Vec<T>>,
{
    let n = p0.len();
    let clamp = |p: &mut Vec<T>| {
        for j in 0..n {
            p[j] = p[j].max(lower[j]).min(upper[j]);
        }
    };
    let mut p = p0.to_vec();
    clamp(&mut p);
    let mut r = residual(&p)?;
    let mut cost: T = r.iter().map(|&v| v * v).sum();
    if !cost.is_finite() {
        return Err(Error::DegenerateData("non-finite residual at initial guess".into()));
    }
    let mut lambda = T::lit(1e-3);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iterations {
        iterations += 1;
        let jac = jacobian(&mut residual, &p, &r, lower, upper)?;
        let mut jtj = vec![T::zero(); n * n];
        let mut jtr = vec![T::zero(); n];
        for (row, &ri) in jac.iter().zip(&r) {
            for a in 0..n {
                jtr[a] += row[a] * ri;
                for b in 0..n {
                    jtj[a * n + b] += row[a] * row[b];
                }
            }
        }
        let grad_norm = jtr.iter().fold(T::zero(), |m, &g| m.max(g.abs()));
        if grad_norm <= T::eps() * T::eps() {
            converged = true;
            break;
        }
        let mut improved = false;
        for _ in 0..60 {
            let mut a = jtj.clone();
            for d in 0..n {
                let diag = jtj[d * n + d].max(T::lit(1e-30));
                a[d * n + d] += lambda * diag;
            }
            let neg: Vec<T> = jtr.iter().map(|&g| -g).collect();
            let Some(mut step) = solve_dense(a.clone(), neg.clone(), n) else {
                lambda *= T::lit(10.0);
                continue;
            };
            // Freeze parameters sitting on a bound that the step pushes further out.
            let blocked: Vec<usize> = (0..n)
                .filter(|&j| (p[j] <= lower[j] && step[j] < T::zero()) || (p[j] >= upper[j] && step[j] > T::zero()))
                .collect();
            if !blocked.is_empty() {
                let mut a = a;
                let mut rhs = neg;
                for &j in &blocked {
                    for k in 0..n {
                        a[j * n + k] = T::zero();
                        a[k * n + j] = T::zero();
                    }
                    a[j * n + j] = T::one();
                    rhs[j] = T::zero();
                }
                match solve_dense(a, rhs, n) {
                    Some(s) => step = s,
                    None => {
                        lambda *= T::lit(10.0);
                        continue;
                    }
                }
            }
            let mut trial: Vec<T> = p.iter().zip(&step).map(|(&a, &b)| a + b).collect();
            clamp(&mut trial);
            let r_trial = match residual(&trial) {
                Ok(v) => v,
                Err(_) => {
                    lambda *= T::lit(10.0);
                    continue;
                }
            };
            let c_trial: T = r_trial.iter().map(|&v| v * v).sum();
            if c_trial.is_finite() && c_trial <= cost {
                let step_norm = p.iter().zip(&trial).fold(T::zero(), |m, (&a, &b)| {
                    m.max((a - b).abs() / a.abs().max(T::lit(1e-12)))
                });
                let rel_drop = (cost - c_trial) / cost.max(T::min_positive_value());
                p = trial;
                r = r_trial;
                cost = c_trial;
                lambda = (lambda / T::lit(3.0)).max(T::lit(1e-15));
                improved = true;
                if step_norm <= opts.x_tol || rel_drop <= opts.f_tol {
                    converged = true;
                }
                break;
            }
            lambda *= T::lit(4.0);
            if lambda > T::lit(1e20) {
                break;
            }
        }
        if converged || !improved {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence { iterations });
    }

    let jac = jacobian(&mut residual, &p, &r, lower, upper)?;
    let m = r.len();
    let std_errors = if m > n {
        let mut jtj = vec![T::zero(); n * n];
        for row in &jac {
            for a in 0..n {
                for b in 0..n {
                    jtj[a * n + b] += row[a] * row[b];
                }
            }
        }
        invert(&jtj, n).map(|inv| {
            let s2 = cost / T::from_usize(m - n);
            (0..n).map(|d| (s2 * inv[d * n + d]).abs().sqrt()).collect()
        })
    } else {
        None
    };
    Ok(LmResult {
        params: p,
        residuals: r,
        rss: cost,
        iterations,
        std_errors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_solver_matches_hand_solution() {
        let x = solve_dense(vec![2.0f64, 1.0, 1.0, 3.0], vec![3.0, 5.0], 2).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-14 && (x[1] - 1.4).abs() < 1e-14);
    }

    #[test]
    fn golden_section_finds_parabola_minimum() {
        let (x, _) = golden_min(|x: f64| (x - 0.3).powi(2), -1.0, 2.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-9);
    }

    #[test]
    fn lm_recovers_exponential_decay() {
        let t: Vec<f64> = (0..30).map(|k| k as f64 * 0.1).collect();
        let y: Vec<f64> = t.iter().map(|&t| 2.0 * (-1.3 * t).exp()).collect();
        let fit = levenberg_marquardt(
            |p: &[f64]| Ok(t.iter().zip(&y).map(|(&t, &y)| p[0] * (-p[1] * t).exp() - y).collect()),
            &[1.0, 0.5],
            &[0.0, 0.0],
            &[10.0, 10.0],
            &LmOptions::default(),
        )
        .unwrap();
        assert!((fit.params[0] - 2.0).abs() < 1e-8);
        assert!((fit.params[1] - 1.3).abs() < 1e-8);
    }

    #[test]
    fn regression_slope() {
        let (a, b) = linear_regression(&[0.0f64, 1.0, 2.0], &[1.0, 3.0, 5.0]).unwrap();
        assert!((a - 1.0).abs() < 1e-14 && (b - 2.0).abs() < 1e-14);
    }
}
