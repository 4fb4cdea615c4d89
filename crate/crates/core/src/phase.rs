//! Projective action of SL(2,R) on angles, `e_{S_T(θ)} = T e_θ / ‖T e_θ‖`.

use core::f64::consts::{PI, TAU};

use crate::mat2::Mat2;
use crate::math;

/// An angle in `[0, 2π)`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Default)]
pub struct Phase(f64);

impl Phase {
    /// Reduces any finite angle into `[0, 2π)`.
    pub fn new(theta: f64) -> Self {
        Phase(wrap_tau(theta))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Projective fold into `[0, π)`.
    pub fn folded(self) -> f64 {
        let t = self.0 % PI;
        if t >= PI {
            0.0
        } else {
            t
        }
    }

    pub fn unit_vector(self) -> [f64; 2] {
        [math::cos(self.0), math::sin(self.0)]
    }

    pub fn from_vector(v: [f64; 2]) -> Self {
        Phase::new(math::atan2(v[1], v[0]))
    }
}

fn wrap_tau(theta: f64) -> f64 {
    let mut t = theta % TAU;
    if t < 0.0 {
        t += TAU;
    }
    // `-tiny % TAU + TAU` can round up to exactly TAU
    if t >= TAU {
        t = 0.0;
    }
    t
}

/// Signed distance between two angles on the circle, in `(−π, π]`.
pub fn circle_distance(a: f64, b: f64) -> f64 {
    let d = wrap_tau(a - b);
    if d > PI {
        d - TAU
    } else {
        d
    }
}

/// `S_T(θ)`: the angle of `T e_θ`.
pub fn phase_action(t: &Mat2, theta: Phase) -> Phase {
    Phase::from_vector(t.mul_vec(theta.unit_vector()))
}

/// `S_T⁻¹(θ) = S_{T⁻¹}(θ)`. Uses the adjugate, which is the inverse up to a
/// positive factor and therefore acts identically on angles.
pub fn phase_action_inverse(t: &Mat2, theta: Phase) -> Phase {
    let adj = if t.det() >= 0.0 { t.adjugate() } else { -t.adjugate() };
    phase_action(&adj, theta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_rotation() {
        assert!((phase_action(&Mat2::IDENTITY, Phase::new(1.2)).value() - 1.2).abs() < 1e-15);
        let r = Mat2::rotation(0.3);
        assert!((phase_action(&r, Phase::new(1.0)).value() - 1.3).abs() < 1e-14);
        assert!((phase_action_inverse(&r, Phase::new(1.3)).value() - 1.0).abs() < 1e-14);
        assert!((phase_action_inverse(&Mat2::IDENTITY, Phase::new(0.5)).value() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn diagonal_closed_form() {
        // tan θ' = (a22 sin θ)/(a11 cos θ) = 1/4 at θ = π/4
        let t = Mat2::diag(2.0, 0.5);
        let got = phase_action(&t, Phase::new(PI / 4.0)).value();
        assert!((got - 0.244_978_663_126_864_1).abs() < 1e-15);
    }

    #[test]
    fn minus_identity_shifts_by_pi() {
        let got = phase_action(&Mat2::scalar(-1.0), Phase::new(0.25)).value();
        assert!((got - (0.25 + PI)).abs() < 1e-14);
        assert!((Phase::new(got).folded() - 0.25).abs() < 1e-14);
    }

    #[test]
    fn wrapping_stays_in_range() {
        for t in [-1e-18, -TAU, TAU, 7.0 * PI, -3.0] {
            let p = Phase::new(t).value();
            assert!((0.0..TAU).contains(&p), "{t} -> {p}");
        }
        assert!(circle_distance(0.1, TAU - 0.1) - 0.2 < 1e-15);
    }
}
