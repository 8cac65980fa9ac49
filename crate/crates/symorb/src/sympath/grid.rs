//! Uniform periodic grids, trigonometric interpolation, and the Fourier
//! collocation differentiation matrix.

use nalgebra::DMatrix;
use std::f64::consts::PI;

/// Uniform grid `t_j = j * period / n` on a circle of circumference `period`.
#[derive(Debug, Clone)]
pub struct PeriodicGrid {
    pub n: usize,
    pub period: f64,
}

impl PeriodicGrid {
    pub fn new(n: usize, period: f64) -> Self {
        assert!(n >= 4 && period > 0.0);
        Self { n, period }
    }

    pub fn node(&self, j: usize) -> f64 {
        self.period * j as f64 / self.n as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.node(j)).collect()
    }

    /// Spectral differentiation matrix on this grid.
    ///
    /// Exact on trigonometric polynomials resolved by the grid; antisymmetric
    /// for odd `n`. Odd sizes are preferred internally because they carry no
    /// Nyquist mode.
    pub fn diff_matrix(&self) -> DMatrix<f64> {
        let n = self.n;
        let scale = PI / self.period;
        let mut d = DMatrix::zeros(n, n);
        for j in 0..n {
            for k in 0..n {
                if j == k {
                    continue;
                }
                let idx = j as isize - k as isize;
                let sign = if idx % 2 == 0 { 1.0 } else { -1.0 };
                let arg = PI * idx as f64 / n as f64;
                d[(j, k)] = if n % 2 == 1 {
                    sign * scale / arg.sin()
                } else {
                    sign * scale / arg.tan()
                };
            }
        }
        d
    }

    /// Evaluates the trigonometric interpolant of `values` at `t`.
    pub fn interp(&self, values: &[f64], t: f64) -> f64 {
        debug_assert_eq!(values.len(), self.n);
        let n = self.n as f64;
        let mut acc = 0.0;
        for (j, &v) in values.iter().enumerate() {
            let s = (t - self.node(j)) / self.period;
            acc += v * dirichlet_kernel(s, self.n);
        }
        let _ = n;
        acc
    }
}

/// Periodic cardinal function: 1 at grid node 0, 0 at the others.
///
/// `s` is measured in periods. Odd `n` uses the conjugate-symmetric kernel
/// `sin(n pi s) / (n sin(pi s))`; even `n` the cotangent variant.
pub fn dirichlet_kernel(s: f64, n: usize) -> f64 {
    let sn = s - s.round();
    if sn.abs() < 1e-15 {
        return 1.0;
    }
    let x = PI * sn;
    if n % 2 == 1 {
        (n as f64 * x).sin() / (n as f64 * x.sin())
    } else {
        (n as f64 * x).sin() / (n as f64 * x.tan())
    }
}

/// Smallest odd integer `>= n`.
pub fn next_odd(n: usize) -> usize {
    if n % 2 == 0 {
        n + 1
    } else {
        n
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn differentiation_is_exact_on_resolved_modes() {
        for &n in &[33usize, 64] {
            let grid = PeriodicGrid::new(n, 1.0);
            let d = grid.diff_matrix();
            for m in 1..=3u32 {
                let f: Vec<f64> = grid
                    .nodes()
                    .iter()
                    .map(|&t| (2.0 * PI * m as f64 * t).sin())
                    .collect();
                let fv = nalgebra::DVector::from_vec(f);
                let df = &d * &fv;
                for (j, &t) in grid.nodes().iter().enumerate() {
                    let exact = 2.0 * PI * m as f64 * (2.0 * PI * m as f64 * t).cos();
                    assert_relative_eq!(df[j], exact, epsilon = 1e-9, max_relative = 1e-9);
                }
            }
        }
    }

    #[test]
    fn interpolation_reproduces_band_limited_samples() {
        for &n in &[31usize, 32] {
            let grid = PeriodicGrid::new(n, 2.0);
            let f = |t: f64| (PI * t).cos() + 0.3 * (3.0 * PI * t).sin();
            let vals: Vec<f64> = grid.nodes().iter().map(|&t| f(t)).collect();
            for &t in &[0.13, 0.77, 1.42, 1.999] {
                assert_relative_eq!(grid.interp(&vals, t), f(t), epsilon = 1e-11);
            }
        }
    }

    #[test]
    fn diff_matrix_antisymmetric_for_odd_n() {
        let grid = PeriodicGrid::new(17, 1.0);
        let d = grid.diff_matrix();
        assert!((&d + &d.transpose()).norm() < 1e-12);
    }
}
