//! Radial grid and trapezoid quadrature helpers.

use crate::scalar::Scalar;

/// Nodes `0, dx, 2dx, …` closed with `R`. The last cell is shorter when `R/dx` is not an integer.
pub fn radial_grid<T: Scalar>(radius: T, dx: T) -> Vec<T> {
    let tol = dx * T::of(1e-9);
    let mut xs = Vec::new();
    let mut k = 0usize;
    loop {
        let x = dx * T::of(k as f64);
        if x >= radius - tol {
            break;
        }
        xs.push(x);
        k += 1;
    }
    xs.push(radius);
    xs
}

/// Trapezoid rule on (possibly non-uniform) nodes.
pub fn trapezoid<T: Scalar>(xs: &[T], ys: &[T]) -> T {
    debug_assert_eq!(xs.len(), ys.len());
    let half = T::of(0.5);
    xs.windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| (x[1] - x[0]) * (y[0] + y[1]) * half)
        .sum()
}

/// Running integral of the piecewise-linear interpolant through `(xs, ys)`.
///
/// At the nodes it reproduces the cumulative trapezoid rule; between nodes it is the
/// exact integral of the interpolant, so `at` is continuous and monotone for non-negative data.
#[derive(Debug, Clone)]
pub struct PrefixIntegral<T> {
    xs: Vec<T>,
    ys: Vec<T>,
    cum: Vec<T>,
}

impl<T: Scalar> PrefixIntegral<T> {
    pub fn new(xs: Vec<T>, ys: Vec<T>) -> Self {
        assert!(xs.len() >= 2 && xs.len() == ys.len(), "need at least two samples");
        let mut cum = Vec::with_capacity(xs.len());
        cum.push(T::zero());
        let half = T::of(0.5);
        for i in 1..xs.len() {
            let prev = cum[i - 1];
            cum.push(prev + (xs[i] - xs[i - 1]) * (ys[i] + ys[i - 1]) * half);
        }
        Self { xs, ys, cum }
    }

    pub fn xs(&self) -> &[T] {
        &self.xs
    }

    pub fn total(&self) -> T {
        *self.cum.last().expect("non-empty")
    }

    /// ∫ from the first node to `x`, with `x` clamped to the node range.
    pub fn at(&self, x: T) -> T {
        let n = self.xs.len();
        if !(x > self.xs[0]) {
            return T::zero();
        }
        if x >= self.xs[n - 1] {
            return self.total();
        }
        // index of the cell containing x
        let i = self.xs.partition_point(|&xi| xi <= x) - 1;
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let t = x - x0;
        let y = y0 + (y1 - y0) * t / (x1 - x0);
        self.cum[i] + t * (y0 + y) * T::of(0.5)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn grid_closes_at_radius() {
        let g = radial_grid(25.0, 0.5);
        assert_eq!(g.len(), 51);
        assert_eq!(g[0], 0.0);
        assert_eq!(*g.last().unwrap(), 25.0);
        let g = radial_grid(1.0, 0.3);
        assert_eq!(g.len(), 5);
        assert_relative_eq!(g[3], 0.9, epsilon = 1e-12);
        assert_eq!(g[4], 1.0);
    }

    #[test]
    fn trapezoid_is_exact_for_linear() {
        let xs = radial_grid(3.0, 0.7);
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x + 1.0).collect();
        assert_relative_eq!(trapezoid(&xs, &ys), 12.0, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn prefix_is_monotone_and_continuous(a in 0.0f64..10.0, b in 0.0f64..10.0) {
            let xs = radial_grid(10.0f64, 0.37);
            let ys: Vec<f64> = xs.iter().map(|&x| x * (-0.2 * x).exp()).collect();
            let pi = PrefixIntegral::new(xs, ys);
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(pi.at(lo) <= pi.at(hi) + 1e-12);
            let eps = 1e-9;
            prop_assert!((pi.at(lo + eps) - pi.at(lo)).abs() < 1e-7);
        }
    }
}
