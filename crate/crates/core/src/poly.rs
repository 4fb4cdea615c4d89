//! The coefficients `α = ⟨v|X|v⟩`, `β = ⟨v̄|X|v⟩` with `v = (1, −i)ᵀ/√2`, the
//! phase polynomials `p(θ) = Im(α − β e^{2iθ})`, and trigonometric
//! polynomials in `2θ` of degree at most 2.

use core::ops::{Add, Mul};

use num_complex::Complex64;

use crate::error::CoreError;
use crate::mat2::{Mat2, ALG_TOL};
use crate::math;

/// `α`, `β` for a traceless generator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolyCoeff {
    pub alpha: Complex64,
    pub beta: Complex64,
}

/// `⟨v̄|X|v⟩ = vᵀ X v` for an arbitrary real matrix.
pub fn vbar_x_v(x: &Mat2) -> Complex64 {
    Complex64::new(0.5 * (x.a11 - x.a22), -0.5 * (x.a12 + x.a21))
}

/// `⟨v|X|v⟩ = v̄ᵀ X v` for an arbitrary real matrix.
pub fn v_x_v(x: &Mat2) -> Complex64 {
    Complex64::new(0.5 * (x.a11 + x.a22), 0.5 * (x.a21 - x.a12))
}

fn check_traceless(x: &Mat2) -> Result<(), CoreError> {
    let tr = x.trace();
    if tr.abs() > ALG_TOL * x.max_abs().max(1.0) {
        return Err(CoreError::NotTraceless { trace: tr });
    }
    Ok(())
}

/// `α = i(x₂₁ − x₁₂)/2`, `β = x₁₁ − i(x₁₂ + x₂₁)/2`.
pub fn poly_coeffs(x: &Mat2) -> Result<PolyCoeff, CoreError> {
    check_traceless(x)?;
    Ok(PolyCoeff { alpha: v_x_v(x), beta: vbar_x_v(x) })
}

/// `Im(α − β e^{2iθ})`.
pub fn p_of_theta(c: &PolyCoeff, theta: f64) -> f64 {
    TrigPoly::from_coeff(c).eval(theta)
}

/// `c0 + c2 cos2θ + s2 sin2θ + c4 cos4θ + s4 sin4θ`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct TrigPoly {
    pub c0: f64,
    pub c2: f64,
    pub s2: f64,
    pub c4: f64,
    pub s4: f64,
}

impl TrigPoly {
    pub const ZERO: TrigPoly = TrigPoly { c0: 0.0, c2: 0.0, s2: 0.0, c4: 0.0, s4: 0.0 };

    /// `p(θ) = Im α − Im β cos2θ − Re β sin2θ`.
    pub fn from_coeff(c: &PolyCoeff) -> Self {
        TrigPoly { c0: c.alpha.im, c2: -c.beta.im, s2: -c.beta.re, c4: 0.0, s4: 0.0 }
    }

    pub fn eval(&self, theta: f64) -> f64 {
        let (s2, c2) = (math::sin(2.0 * theta), math::cos(2.0 * theta));
        let (s4, c4) = (2.0 * s2 * c2, c2 * c2 - s2 * s2);
        self.c0 + self.c2 * c2 + self.s2 * s2 + self.c4 * c4 + self.s4 * s4
    }

    pub fn derivative(&self) -> Self {
        TrigPoly {
            c0: 0.0,
            c2: 2.0 * self.s2,
            s2: -2.0 * self.c2,
            c4: 4.0 * self.s4,
            s4: -4.0 * self.c4,
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        TrigPoly {
            c0: self.c0 * s,
            c2: self.c2 * s,
            s2: self.s2 * s,
            c4: self.c4 * s,
            s4: self.s4 * s,
        }
    }

    pub fn degree(&self) -> u32 {
        if self.c4 != 0.0 || self.s4 != 0.0 {
            2
        } else if self.c2 != 0.0 || self.s2 != 0.0 {
            1
        } else {
            0
        }
    }

    /// Product of two polynomials of degree ≤ 1; panics on higher degree.
    pub fn mul_linear(&self, o: &TrigPoly) -> TrigPoly {
        assert!(self.degree() <= 1 && o.degree() <= 1, "product would exceed degree 2");
        // cos² = (1 + cos4)/2, sin² = (1 − cos4)/2, sin·cos = sin4/2
        TrigPoly {
            c0: self.c0 * o.c0 + 0.5 * (self.c2 * o.c2 + self.s2 * o.s2),
            c2: self.c0 * o.c2 + self.c2 * o.c0,
            s2: self.c0 * o.s2 + self.s2 * o.c0,
            c4: 0.5 * (self.c2 * o.c2 - self.s2 * o.s2),
            s4: 0.5 * (self.c2 * o.s2 + self.s2 * o.c2),
        }
    }

    /// Minimum over an equispaced grid of `n` points on `[0, 2π)`.
    pub fn grid_min(&self, n: usize) -> f64 {
        (0..n)
            .map(|j| self.eval(core::f64::consts::TAU * j as f64 / n as f64))
            .fold(f64::INFINITY, f64::min)
    }
}

impl Add for TrigPoly {
    type Output = TrigPoly;
    fn add(self, o: TrigPoly) -> TrigPoly {
        TrigPoly {
            c0: self.c0 + o.c0,
            c2: self.c2 + o.c2,
            s2: self.s2 + o.s2,
            c4: self.c4 + o.c4,
            s4: self.s4 + o.s4,
        }
    }
}

impl Mul<f64> for TrigPoly {
    type Output = TrigPoly;
    fn mul(self, s: f64) -> TrigPoly {
        self.scale(s)
    }
}
