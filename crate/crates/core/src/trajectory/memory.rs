use crate::kernels::FeedbackKernel;
use crate::numerics::quad::gauss_legendre;
use crate::scalar::Real;

/// Discretized convolution weights on a uniform grid of step `dt`.
///
/// For a history `X_n, X_{n-1}, …` interpolated linearly between nodes,
/// `∫₀^{t_n} h(τ) X(t_n − τ) dτ ≈ Σ_{j<m} head[j] X_{n−j} + end[m] X_{n−m}` with
/// `m = min(n, L)`. The same `head` weights give the step average of `h * f` for an input
/// held constant over each step. `cells[j] = ∫_{j dt}^{(j+1) dt} h` serve strictly causal
/// sums over past steps.
#[derive(Debug, Clone)]
pub struct MemoryWeights<T> {
    pub dt: T,
    pub head: Vec<T>,
    pub end: Vec<T>,
    pub cells: Vec<T>,
    tail_base: T,
    kernel: FeedbackKernel<T>,
}

impl<T: Real> MemoryWeights<T> {
    pub fn new(kernel: &FeedbackKernel<T>, dt: T, horizon_steps: usize) -> Self {
        let l = horizon_steps.max(1);
        let (nodes, wts) = gauss_legendre::<T>(8);
        // rising[j]: ∫ over [(j-1)dt, j dt] of h · (τ-(j-1)dt)/dt; falling[j] over [j dt, (j+1)dt].
        let mut rising = vec![T::zero(); l + 1];
        let mut falling = vec![T::zero(); l + 1];
        let mut cells = vec![T::zero(); l];
        for j in 0..l {
            let a = dt * T::from_usize(j);
            let mut up = T::zero();
            let mut down = T::zero();
            let mut total = T::zero();
            for (x, w) in nodes.iter().zip(&wts) {
                let frac = (*x + T::one()) * T::half();
                let hv = kernel.smooth_h(a + frac * dt) * *w * dt * T::half();
                up += hv * frac;
                down += hv * (T::one() - frac);
                total += hv;
            }
            falling[j] = down;
            rising[j + 1] = up;
            cells[j] = total;
        }
        let mut head = vec![T::zero(); l + 1];
        let mut end = vec![T::zero(); l + 1];
        for j in 0..=l {
            head[j] = falling[j] + rising[j];
            end[j] = rising[j];
        }
        for (tau, w) in kernel.impulses() {
            let pos = tau / dt;
            let j = pos.floor().to_f64_lossy() as usize;
            if j > l {
                continue;
            }
            let frac = pos - T::from_usize(j);
            let cell = j.min(l - 1);
            cells[cell] += w;
            // Linear interpolation between neighbouring nodes.
            let (w0, w1) = (w * (T::one() - frac), w * frac);
            head[j] += w0;
            end[j] += w0;
            if j < l && w1 != T::zero() {
                head[j + 1] += w1;
                end[j + 1] += w1;
            }
        }
        Self {
            dt,
            head,
            end,
            cells,
            tail_base: kernel.smooth_integral_from(dt * T::from_usize(l)),
            kernel: kernel.clone(),
        }
    }

    pub fn horizon_steps(&self) -> usize {
        self.cells.len()
    }

    /// `∫_{L dt}^{t} h` for the smooth part, used with the mean of the dropped history.
    pub fn tail_integral(&self, t: T) -> T {
        (self.tail_base - self.kernel.smooth_integral_from(t)).max(T::zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_integrate_constant_history() {
        let k = FeedbackKernel::exponential(1.0, 0.5).unwrap();
        let w = MemoryWeights::new(&k, 0.01, 2000);
        let total: f64 = w.head[..2000].iter().sum::<f64>() + w.end[2000];
        let exact = 2.0 * (1.0 - (-10.0f64).exp());
        assert!((total - exact).abs() < 1e-10);
        let cells: f64 = w.cells.iter().sum();
        assert!((cells - exact).abs() < 1e-10);
    }

    #[test]
    fn delta_lands_on_the_current_node() {
        let k = FeedbackKernel::delta(2.0).unwrap();
        let w = MemoryWeights::new(&k, 0.1, 10);
        assert_eq!(w.head[0], 2.0);
        assert_eq!(w.end[0], 2.0);
        assert_eq!(w.cells[0], 2.0);
    }
}
