//! Discrete Fourier transforms of real periodic samples.
//!
//! Plain `O(n²)` transforms with a twiddle table; grids here are at most a
//! few thousand points and each transform runs a handful of times.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use num_complex::Complex64;

use crate::math;

fn twiddles(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|j| {
            let a = TAU * j as f64 / n as f64;
            Complex64::new(math::cos(a), -math::sin(a))
        })
        .collect()
}

/// Normalized coefficients `ĉ_k = (1/n)Σ_j x_j e^{−2πijk/n}` for
/// `k = 0..=n/2`.
pub fn fourier_coefficients(x: &[f64]) -> Vec<Complex64> {
    let n = x.len();
    let tw = twiddles(n);
    (0..=n / 2)
        .map(|k| {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut idx = 0usize;
            for &v in x {
                acc += tw[idx] * v;
                idx += k;
                if idx >= n {
                    idx -= n;
                }
            }
            acc / n as f64
        })
        .collect()
}

/// Real trigonometric interpolant of periodic samples.
#[derive(Clone, Debug)]
pub struct FourierSeries {
    n: usize,
    coeffs: Vec<Complex64>,
}

impl FourierSeries {
    pub fn from_samples(x: &[f64]) -> Self {
        FourierSeries { n: x.len(), coeffs: fourier_coefficients(x) }
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    fn weight(&self, k: usize) -> f64 {
        if k == 0 || (self.n.is_multiple_of(2) && k == self.n / 2) {
            1.0
        } else {
            2.0
        }
    }

    pub fn eval(&self, theta: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let a = k as f64 * theta;
                self.weight(k) * (c.re * math::cos(a) - c.im * math::sin(a))
            })
            .sum()
    }

    /// Samples of the derivative on the original grid; the Nyquist mode is
    /// dropped.
    pub fn derivative_samples(&self) -> Vec<f64> {
        let n = self.n;
        let tw = twiddles(n);
        (0..n)
            .map(|j| {
                let mut acc = 0.0;
                for (k, c) in self.coeffs.iter().enumerate().skip(1) {
                    if n.is_multiple_of(2) && k == n / 2 {
                        continue;
                    }
                    // d/dθ Re(c e^{ikθ}) = Re(ik c e^{ikθ}); tw holds e^{−i…}
                    let e = tw[(j * k) % n].conj();
                    acc += 2.0 * k as f64 * -(c * e).im;
                }
                acc
            })
            .collect()
    }
}

/// Derivative of periodic samples on `[0, 2π)` by Fourier differentiation.
pub fn spectral_derivative(x: &[f64]) -> Vec<f64> {
    FourierSeries::from_samples(x).derivative_samples()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::periodic_grid;

    #[test]
    fn interpolates_and_differentiates_analytic_data() {
        let g = periodic_grid(128);
        let f = |t: f64| math::exp(math::cos(2.0 * t));
        let df = |t: f64| -2.0 * math::sin(2.0 * t) * f(t);
        let x: Vec<f64> = g.iter().map(|&t| f(t)).collect();
        let s = FourierSeries::from_samples(&x);
        for t in [0.1, 1.7, 4.0] {
            assert!((s.eval(t) - f(t)).abs() < 1e-13);
        }
        let d = s.derivative_samples();
        for (t, v) in g.iter().zip(&d) {
            assert!((v - df(*t)).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_has_single_mode() {
        let c = fourier_coefficients(&[3.0; 16]);
        assert!((c[0].re - 3.0).abs() < 1e-15);
        assert!(c[1..].iter().all(|z| z.norm() < 1e-15));
    }
}
