//! Real 2×2 matrices and the closed-form exponential on sl(2,R).

use core::ops::{Add, AddAssign, Mul, Neg, Sub};

use crate::math;

/// Tolerance for algebraic identities (tracelessness, det-through-order-2).
pub const ALG_TOL: f64 = 1e-10;
/// Tolerance for round trips such as `S_T ∘ S_T⁻¹`.
pub const ROUNDTRIP_TOL: f64 = 1e-12;
/// Tolerance on `|det − 1|` for transfer-matrix values.
pub const SL2_TOL: f64 = 1e-12;

/// A real 2×2 matrix stored row-major.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Mat2 {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

impl Mat2 {
    pub const ZERO: Mat2 = Mat2::new(0.0, 0.0, 0.0, 0.0);
    pub const IDENTITY: Mat2 = Mat2::new(1.0, 0.0, 0.0, 1.0);

    pub const fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Mat2 { a11, a12, a21, a22 }
    }

    pub const fn from_rows(rows: [[f64; 2]; 2]) -> Self {
        Mat2::new(rows[0][0], rows[0][1], rows[1][0], rows[1][1])
    }

    pub const fn to_rows(self) -> [[f64; 2]; 2] {
        [[self.a11, self.a12], [self.a21, self.a22]]
    }

    pub const fn diag(d1: f64, d2: f64) -> Self {
        Mat2::new(d1, 0.0, 0.0, d2)
    }

    pub fn scalar(s: f64) -> Self {
        Mat2::diag(s, s)
    }

    /// Counter-clockwise rotation by `phi`.
    pub fn rotation(phi: f64) -> Self {
        let (s, c) = (math::sin(phi), math::cos(phi));
        Mat2::new(c, -s, s, c)
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    pub fn transpose(&self) -> Self {
        Mat2::new(self.a11, self.a21, self.a12, self.a22)
    }

    /// `det(A + B) − det A − det B`, the bilinear part of the determinant.
    pub fn mixed_det(&self, other: &Mat2) -> f64 {
        self.a11 * other.a22 + self.a22 * other.a11 - self.a12 * other.a21 - self.a21 * other.a12
    }

    /// Adjugate; equals the inverse when `det = 1`.
    pub fn adjugate(&self) -> Self {
        Mat2::new(self.a22, -self.a12, -self.a21, self.a11)
    }

    /// Inverse, or `None` for a singular matrix.
    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        Some(self.adjugate().scale(1.0 / d))
    }

    pub fn scale(&self, s: f64) -> Self {
        Mat2::new(self.a11 * s, self.a12 * s, self.a21 * s, self.a22 * s)
    }

    pub fn frobenius(&self) -> f64 {
        math::sqrt(self.a11 * self.a11 + self.a12 * self.a12 + self.a21 * self.a21 + self.a22 * self.a22)
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.a11.abs().max(self.a12.abs()).max(self.a21.abs()).max(self.a22.abs())
    }

    pub fn mul_vec(&self, v: [f64; 2]) -> [f64; 2] {
        [self.a11 * v[0] + self.a12 * v[1], self.a21 * v[0] + self.a22 * v[1]]
    }

    /// `self · x · self⁻¹`, or `None` if `self` is singular.
    pub fn conjugate(&self, x: &Mat2) -> Option<Mat2> {
        Some(*self * *x * self.inverse()?)
    }

    /// Traceless part `X − (Tr X / 2)·1`.
    pub fn traceless_part(&self) -> Self {
        let h = 0.5 * self.trace();
        Mat2::new(self.a11 - h, self.a12, self.a21, self.a22 - h)
    }

    pub fn is_finite(&self) -> bool {
        self.a11.is_finite() && self.a12.is_finite() && self.a21.is_finite() && self.a22.is_finite()
    }

    /// Distance to the nearest of `±1` together with that sign.
    pub fn sign_of_identity(&self) -> (f64, f64) {
        let plus = (*self - Mat2::IDENTITY).max_abs();
        let minus = (*self + Mat2::IDENTITY).max_abs();
        if plus <= minus {
            (1.0, plus)
        } else {
            (-1.0, minus)
        }
    }

    pub fn commutator(&self, other: &Mat2) -> Mat2 {
        *self * *other - *other * *self
    }

    /// Rescales a matrix with positive determinant onto SL(2,R).
    pub fn project_sl2(&self) -> Option<Mat2> {
        let d = self.det();
        if !(d > 0.0) || !d.is_finite() {
            return None;
        }
        Some(self.scale(1.0 / math::sqrt(d)))
    }
}

/// Exponential of a matrix via its traceless part.
///
/// For traceless `X` one has `X² = −det(X)·1`, so
/// `exp X = c(δ)·1 + s(δ)·X` with `δ = −det X` and `c, s` the
/// cosh/cos (resp. sinh/sin) branches. Near `δ = 0` a short series is used;
/// for `δ > 1` the two eigen-projectors are weighted separately.
pub fn exp_traceless(x: &Mat2) -> Mat2 {
    let t = 0.5 * x.trace();
    let y = x.traceless_part();
    let delta = -y.det();
    if delta > 1.0 {
        // spectral projectors avoid the cancellation in cosh r − sinh r
        let r = math::sqrt(delta);
        let (ep, em) = (math::exp(t + r), math::exp(t - r));
        let k = 0.5 / r;
        return Mat2::new(
            k * (ep * (y.a11 + r) + em * (r - y.a11)),
            k * y.a12 * (ep - em),
            k * y.a21 * (ep - em),
            k * (ep * (y.a22 + r) + em * (r - y.a22)),
        );
    }
    let (c, s) = if delta.abs() < 1e-8 {
        (
            1.0 + delta / 2.0 + delta * delta / 24.0,
            1.0 + delta / 6.0 + delta * delta / 120.0,
        )
    } else if delta > 0.0 {
        let r = math::sqrt(delta);
        (math::cosh(r), math::sinh(r) / r)
    } else {
        let r = math::sqrt(-delta);
        (math::cos(r), math::sin(r) / r)
    };
    let e = Mat2::scalar(c) + y.scale(s);
    if t == 0.0 {
        e
    } else {
        e.scale(math::exp(t))
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        Mat2::new(self.a11 + o.a11, self.a12 + o.a12, self.a21 + o.a21, self.a22 + o.a22)
    }
}

impl AddAssign for Mat2 {
    fn add_assign(&mut self, o: Mat2) {
        *self = *self + o;
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        Mat2::new(self.a11 - o.a11, self.a12 - o.a12, self.a21 - o.a21, self.a22 - o.a22)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.scale(-1.0)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        Mat2::new(
            self.a11 * o.a11 + self.a12 * o.a21,
            self.a11 * o.a12 + self.a12 * o.a22,
            self.a21 * o.a11 + self.a22 * o.a21,
            self.a21 * o.a12 + self.a22 * o.a22,
        )
    }
}

impl Mul<f64> for Mat2 {
    type Output = Mat2;
    fn mul(self, s: f64) -> Mat2 {
        self.scale(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series_exp(x: &Mat2) -> Mat2 {
        let mut term = Mat2::IDENTITY;
        let mut sum = Mat2::IDENTITY;
        for k in 1..40 {
            term = (term * *x).scale(1.0 / k as f64);
            sum += term;
        }
        sum
    }

    #[test]
    fn exp_matches_series_on_all_branches() {
        let cases = [
            Mat2::new(0.0, -0.7, 0.7, 0.0),
            Mat2::new(0.4, 0.3, 0.9, -0.4),
            Mat2::new(0.0, 1.3, 0.0, 0.0),
            Mat2::new(1e-5, 2e-5, -3e-5, -1e-5),
            Mat2::new(0.2, -1.0, 0.5, 0.1),
        ];
        for x in cases {
            let d = (exp_traceless(&x) - series_exp(&x)).max_abs();
            assert!(d < 1e-13, "{x:?}: {d}");
        }
    }

    #[test]
    fn exp_of_traceless_has_unit_det() {
        let x = Mat2::new(0.3, 2.0, -1.1, -0.3);
        assert!((exp_traceless(&x).det() - 1.0).abs() < SL2_TOL);
    }

    #[test]
    fn square_of_traceless_is_scalar() {
        let p = Mat2::new(0.3, 2.0, -1.1, -0.3);
        let d = (p * p - Mat2::scalar(-p.det())).max_abs();
        assert!(d < ALG_TOL);
    }

    #[test]
    fn sign_of_identity_picks_nearest() {
        assert_eq!(Mat2::scalar(-1.0).sign_of_identity(), (-1.0, 0.0));
        assert_eq!(Mat2::IDENTITY.sign_of_identity(), (1.0, 0.0));
    }
}
