//! Second-order jets `t0 + λ t1 + λ² t2` of matrix families at `λ = 0`.

use core::ops::Mul;

use crate::mat2::{Mat2, ALG_TOL};

/// Value, first and second Taylor coefficient of `λ ↦ T_λ` at `λ = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet2 {
    pub t0: Mat2,
    pub t1: Mat2,
    pub t2: Mat2,
}

impl Jet2 {
    pub const IDENTITY: Jet2 = Jet2 { t0: Mat2::IDENTITY, t1: Mat2::ZERO, t2: Mat2::ZERO };

    pub const fn new(t0: Mat2, t1: Mat2, t2: Mat2) -> Self {
        Jet2 { t0, t1, t2 }
    }

    /// Jet of `sign · exp(λP + λ²Q)`, i.e. `sign·(1, P, Q + P²/2)`.
    pub fn from_generators(sign: f64, p: &Mat2, q: &Mat2) -> Self {
        Jet2 {
            t0: Mat2::scalar(sign),
            t1: p.scale(sign),
            t2: (*q + (*p * *p).scale(0.5)).scale(sign),
        }
    }

    /// Coefficients of `det(t0 + λ t1 + λ² t2)` at orders `λ⁰, λ¹, λ²`.
    pub fn det_coefficients(&self) -> [f64; 3] {
        [
            self.t0.det(),
            self.t0.mixed_det(&self.t1),
            self.t1.det() + self.t0.mixed_det(&self.t2),
        ]
    }

    /// Whether the truncated polynomial has unit determinant through order `λ²`.
    pub fn is_unimodular(&self) -> bool {
        let [d0, d1, d2] = self.det_coefficients();
        let t1 = self.t1.max_abs();
        let scale = 1.0f64.max(t1 * t1).max(self.t2.max_abs());
        (d0 - 1.0).abs() <= ALG_TOL * scale
            && d1.abs() <= ALG_TOL * scale
            && d2.abs() <= ALG_TOL * scale
    }

    pub fn conjugate_by(&self, m: &Mat2, m_inv: &Mat2) -> Jet2 {
        Jet2 {
            t0: *m * self.t0 * *m_inv,
            t1: *m * self.t1 * *m_inv,
            t2: *m * self.t2 * *m_inv,
        }
    }

    pub fn max_abs_diff(&self, other: &Jet2) -> f64 {
        (self.t0 - other.t0)
            .max_abs()
            .max((self.t1 - other.t1).max_abs())
            .max((self.t2 - other.t2).max_abs())
    }
}

/// Truncated product: `(ab)⁰ = a⁰b⁰`, `(ab)¹ = a¹b⁰ + a⁰b¹`,
/// `(ab)² = a²b⁰ + a¹b¹ + a⁰b²`.
pub fn jet_mul(a: &Jet2, b: &Jet2) -> Jet2 {
    Jet2 {
        t0: a.t0 * b.t0,
        t1: a.t1 * b.t0 + a.t0 * b.t1,
        t2: a.t2 * b.t0 + a.t1 * b.t1 + a.t0 * b.t2,
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, rhs: Jet2) -> Jet2 {
        jet_mul(&self, &rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn anderson_jet(v: f64, eps: f64) -> Jet2 {
        Jet2::new(
            Mat2::new(0.0, -1.0, 1.0, 0.0),
            Mat2::new(v, 0.0, 0.0, 0.0),
            Mat2::new(-eps, 0.0, 0.0, 0.0),
        )
    }

    #[test]
    fn identity_is_neutral() {
        assert_eq!(Jet2::IDENTITY * Jet2::IDENTITY, Jet2::IDENTITY);
    }

    #[test]
    fn truncated_product_of_exponentials() {
        let p = Mat2::new(0.1, 0.2, 0.3, -0.1);
        let p2 = Mat2::new(-0.4, 0.5, 0.6, 0.4);
        let a = Jet2::new(Mat2::IDENTITY, p, Mat2::ZERO);
        let b = Jet2::new(Mat2::IDENTITY, p2, Mat2::ZERO);
        let ab = a * b;
        assert_eq!(ab.t1, p + p2);
        assert_eq!(ab.t2, p * p2);
    }

    #[test]
    fn anderson_pair_matches_hand_expansion() {
        // [[λv2 − ελ², −1],[1, 0]]·[[λv1 − ελ², −1],[1, 0]] expanded by hand
        let (v1, v2, eps) = (0.7, -1.3, 0.4);
        let got = anderson_jet(v2, eps) * anderson_jet(v1, eps);
        let want = Jet2::new(
            Mat2::scalar(-1.0),
            Mat2::new(0.0, -v2, v1, 0.0),
            Mat2::new(v1 * v2, eps, -eps, 0.0),
        );
        assert!(got.max_abs_diff(&want) < 1e-15);
        assert!(got.is_unimodular());
    }

    #[test]
    fn non_unimodular_jet_detected() {
        let j = Jet2::new(Mat2::IDENTITY, Mat2::diag(1.0, 0.0), Mat2::ZERO);
        assert!(!j.is_unimodular());
    }
}
