//! Quadrature on uniform periodic grids.

use alloc::vec::Vec;
use core::f64::consts::TAU;

/// `n` equispaced points `2πj/n`, `j = 0..n`.
pub fn periodic_grid(n: usize) -> Vec<f64> {
    (0..n).map(|j| TAU * j as f64 / n as f64).collect()
}

/// `(1/2π)∫ f dθ` by the periodic trapezoid rule from samples on
/// [`periodic_grid`].
pub fn periodic_mean(values: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for &v in values {
        let y = v - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum / values.len() as f64
}

/// Cumulative integrals `∫₀^{θ_j} f` on the closed grid `θ_j = jh`,
/// `j = 0..=n`, from samples `f` and `df = f'` at the same points.
///
/// Trapezoid prefix sums with the first Euler–Maclaurin correction, so the
/// error is `O(h⁴)` at every node.
pub fn cumulative_integral(f: &[f64], df: &[f64], h: f64) -> Vec<f64> {
    assert_eq!(f.len(), df.len());
    let mut out = Vec::with_capacity(f.len());
    let mut acc = 0.0;
    let mut comp = 0.0;
    out.push(0.0);
    for j in 1..f.len() {
        let y = 0.5 * h * (f[j - 1] + f[j]) - comp;
        let t = acc + y;
        comp = (t - acc) - y;
        acc = t;
        out.push(acc - h * h / 12.0 * (df[j] - df[0]));
    }
    out
}
