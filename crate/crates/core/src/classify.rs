//! Anomaly order, generators `(P_σ, Q_σ)`, degree, type and normal-form
//! basis change.

use alloc::vec::Vec;
use core::fmt;

use crate::error::CoreError;
use crate::family::FamilySpec;
use crate::mat2::{Mat2, ALG_TOL};
use crate::math;
use crate::measure::{mean_trig_polys_of, DIFFUSIVITY_GRID};
use crate::poly::{poly_coeffs, PolyCoeff};

/// Entry tolerance for `t0 = ±1` in order detection.
pub const ORDER_TOL: f64 = 1e-9;
/// Relative tolerance for `E(P) = 0` and `det E(P) = 0`.
pub const CLASSIFY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Degree {
    First,
    Second,
}

impl Degree {
    pub fn as_str(self) -> &'static str {
        match self {
            Degree::First => "first",
            Degree::Second => "second",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AnomalyType {
    Elliptic,
    Hyperbolic,
    Parabolic,
    Diffusive,
}

impl AnomalyType {
    pub fn as_str(self) -> &'static str {
        match self {
            AnomalyType::Elliptic => "elliptic",
            AnomalyType::Hyperbolic => "hyperbolic",
            AnomalyType::Parabolic => "parabolic",
            AnomalyType::Diffusive => "diffusive",
        }
    }

    pub fn degree(self) -> Degree {
        match self {
            AnomalyType::Diffusive => Degree::Second,
            _ => Degree::First,
        }
    }
}

impl fmt::Display for AnomalyType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Generators of one atom of the (hat-reduced) family in the report basis.
#[derive(Clone, Debug, PartialEq)]
pub struct AtomGenerators {
    pub weight: f64,
    pub sign: f64,
    pub p: Mat2,
    pub q: Mat2,
    pub p_coeff: PolyCoeff,
    pub q_coeff: PolyCoeff,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnomalyReport {
    pub order: u32,
    pub degree: Degree,
    pub anomaly_type: AnomalyType,
    /// Basis change `M`; generators are `M T¹ M⁻¹` etc.
    pub basis: Mat2,
    /// η (elliptic, signed by orientation), μ (hyperbolic), the sign `c`
    /// of the Jordan block (parabolic); `None` when diffusive.
    pub param: Option<f64>,
    pub per_atom: Vec<AtomGenerators>,
    /// `E(P)` before the basis change.
    pub mean_p: Mat2,
    pub det_mean_p: f64,
    /// Original transfer matrices per atom of the hat family.
    pub factors_per_atom: u32,
    /// `min_θ E(p²)` on the diagnostic grid (diffusive only).
    pub min_mean_p2: Option<f64>,
    pub is_critical_point: bool,
}

impl AnomalyReport {
    pub fn signs(&self) -> impl Iterator<Item = f64> + '_ {
        self.per_atom.iter().map(|a| a.sign)
    }

    /// `E(P)` in the report basis.
    pub fn mean_generator(&self) -> Mat2 {
        self.per_atom
            .iter()
            .fold(Mat2::ZERO, |acc, a| acc + a.p.scale(a.weight))
    }

    /// The `order`-fold product family of `f` conjugated into the report
    /// basis; `f` must be the family this report was computed from.
    pub fn frame_family(&self, f: &FamilySpec) -> Result<FamilySpec, CoreError> {
        f.hat_family(self.order)?.conjugated(&self.basis)
    }

    pub fn strictly_diffusive(&self) -> bool {
        matches!(self.min_mean_p2, Some(m) if m > ALG_TOL)
    }

    /// The same report expressed in another basis `new_basis`
    /// (absolute, i.e. relative to the original frame).
    pub fn rebased(&self, new_basis: &Mat2) -> Result<AnomalyReport, CoreError> {
        let old_inv = self
            .basis
            .inverse()
            .ok_or_else(|| CoreError::InvalidParameter("singular basis".into()))?;
        let n = *new_basis * old_inv;
        let n_inv = n
            .inverse()
            .ok_or_else(|| CoreError::InvalidParameter("singular basis".into()))?;
        let per_atom = self
            .per_atom
            .iter()
            .map(|a| generators(a.weight, a.sign, n * a.p * n_inv, n * a.q * n_inv))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(AnomalyReport { basis: *new_basis, per_atom, ..self.clone() })
    }
}

fn generators(weight: f64, sign: f64, p: Mat2, q: Mat2) -> Result<AtomGenerators, CoreError> {
    Ok(AtomGenerators {
        weight,
        sign,
        p,
        q,
        p_coeff: poly_coeffs(&p)?,
        q_coeff: poly_coeffs(&q)?,
    })
}

/// Smallest `k ≤ kmax` such that every atom of the k-fold product family
/// is `±1` at `λ = 0`, with the per-atom signs.
pub fn detect_order(f: &FamilySpec, kmax: u32) -> Option<(u32, Vec<f64>)> {
    for k in 1..=kmax {
        let hat = f.hat_family(k).ok()?;
        let signs: Option<Vec<f64>> = hat
            .atoms()
            .iter()
            .map(|a| {
                let (s, dist) = a.jet().t0.sign_of_identity();
                (dist <= ORDER_TOL).then_some(s)
            })
            .collect();
        if let Some(signs) = signs {
            return Some((k, signs));
        }
    }
    None
}

/// `P_σ = s_σ M t1 M⁻¹`, `Q_σ = s_σ M t2 M⁻¹ − P_σ²/2` for a family with
/// `t0 = s_σ·1`.
pub fn extract_generators(
    f: &FamilySpec,
    signs: &[f64],
    basis: &Mat2,
) -> Result<Vec<AtomGenerators>, CoreError> {
    if signs.len() != f.len() {
        return Err(CoreError::InvalidParameter("one sign per atom required".into()));
    }
    let inv = basis
        .inverse()
        .ok_or_else(|| CoreError::InvalidParameter("singular basis change".into()))?;
    f.atoms()
        .iter()
        .zip(signs)
        .map(|(a, &s)| {
            let j = a.jet();
            let p = (*basis * j.t1 * inv).scale(s);
            let q = (*basis * j.t2 * inv).scale(s) - (p * p).scale(0.5);
            generators(a.weight, s, p, q).map_err(|e| match e {
                CoreError::NotTraceless { trace } => CoreError::InvalidFamily(alloc::format!(
                    "generator of atom '{}' has trace {trace:e}; det drifts from 1",
                    a.label
                )),
                other => other,
            })
        })
        .collect()
}

/// Result of [`normal_form`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalForm {
    pub basis: Mat2,
    pub param: f64,
}

/// Basis change `M ∈ SL(2,R)` bringing `E(P)` to
/// `[[0, −η/2], [η/2, 0]]` (elliptic, η signed),
/// `diag(μ/2, −μ/2)` with μ > 0 (hyperbolic), or
/// `[[0, c], [0, 0]]` with `c = ±1` (parabolic).
pub fn normal_form(mean_p: &Mat2, ty: AnomalyType) -> Result<NormalForm, CoreError> {
    let x = mean_p.traceless_part();
    let d = x.det();
    let scale = x.frobenius();
    if scale == 0.0 {
        return Err(CoreError::TypeMismatch { expected: ty.as_str(), found: "zero mean generator" });
    }
    let detected = first_degree_type(&x);
    if detected != ty {
        return Err(CoreError::TypeMismatch { expected: ty.as_str(), found: detected.as_str() });
    }
    let (a, b, c) = (x.a11, x.a12, x.a21);
    let from_columns = |s: Mat2| -> Result<Mat2, CoreError> {
        let det = s.det();
        if !(det > 0.0) {
            return Err(CoreError::InvalidParameter("degenerate eigenbasis".into()));
        }
        Ok(s.adjugate().scale(1.0 / math::sqrt(det)))
    };
    match ty {
        AnomalyType::Elliptic => {
            let omega = math::sqrt(d);
            // columns of X + iω·1 are eigenvectors for iω
            let col1 = ([a, c], [omega, 0.0]);
            let col2 = ([b, -a], [0.0, omega]);
            let norm = |(re, im): ([f64; 2], [f64; 2])| re[0] * re[0] + re[1] * re[1] + im[0] * im[0] + im[1] * im[1];
            let (x_re, y_im) = if norm(col1) >= norm(col2) { col1 } else { col2 };
            let det_xy = x_re[0] * y_im[1] - x_re[1] * y_im[0];
            let (s, omega_s) = if -det_xy > 0.0 {
                (Mat2::new(x_re[0], -y_im[0], x_re[1], -y_im[1]), omega)
            } else {
                (Mat2::new(x_re[0], y_im[0], x_re[1], y_im[1]), -omega)
            };
            // rotations commute with the normal form; keep the triangular
            // factor of M = R·U so that rotation-form input gives M = 1
            let m = from_columns(s)?;
            let r = math::hypot(m.a11, m.a21);
            let (c1, s1) = (m.a11 / r, m.a21 / r);
            let u = Mat2::new(c1, s1, -s1, c1) * m;
            Ok(NormalForm { basis: Mat2::new(u.a11, u.a12, 0.0, u.a22), param: 2.0 * omega_s })
        }
        AnomalyType::Hyperbolic => {
            let nu = math::sqrt(-d);
            let pick = |m: Mat2| {
                let c1 = [m.a11, m.a21];
                let c2 = [m.a12, m.a22];
                if c1[0] * c1[0] + c1[1] * c1[1] >= c2[0] * c2[0] + c2[1] * c2[1] {
                    c1
                } else {
                    c2
                }
            };
            let up = pick(x + Mat2::scalar(nu));
            let mut um = pick(x - Mat2::scalar(nu));
            if up[0] * um[1] - up[1] * um[0] < 0.0 {
                um = [-um[0], -um[1]];
            }
            let s = Mat2::new(up[0], um[0], up[1], um[1]);
            Ok(NormalForm { basis: from_columns(s)?, param: 2.0 * nu })
        }
        AnomalyType::Parabolic => {
            let s2 = if a * a + c * c >= b * b + a * a { [1.0, 0.0] } else { [0.0, 1.0] };
            let mut s1 = x.mul_vec(s2);
            let mut sign = 1.0;
            if s1[0] * s2[1] - s1[1] * s2[0] < 0.0 {
                s1 = [-s1[0], -s1[1]];
                sign = -1.0;
            }
            let s = Mat2::new(s1[0], s2[0], s1[1], s2[1]);
            Ok(NormalForm { basis: from_columns(s)?, param: sign })
        }
        AnomalyType::Diffusive => {
            Err(CoreError::TypeMismatch { expected: "first degree", found: "diffusive" })
        }
    }
}

fn first_degree_type(x: &Mat2) -> AnomalyType {
    let d = x.det();
    let f2 = x.frobenius() * x.frobenius();
    if d.abs() <= CLASSIFY_TOL * f2 {
        AnomalyType::Parabolic
    } else if d > 0.0 {
        AnomalyType::Elliptic
    } else {
        AnomalyType::Hyperbolic
    }
}

/// Critical-point predicate: all `T_{0,σ}` commute and each has
/// `|Tr| < 2` or equals `±1`.
pub fn is_critical_point(f: &FamilySpec) -> bool {
    let t0: Vec<Mat2> = f.atoms().iter().map(|a| a.jet().t0).collect();
    let each = t0
        .iter()
        .all(|t| t.trace().abs() < 2.0 || t.sign_of_identity().1 <= ORDER_TOL);
    let commute = t0.iter().enumerate().all(|(i, a)| {
        t0[i + 1..].iter().all(|b| a.commutator(b).max_abs() <= ORDER_TOL)
    });
    each && commute
}

/// Full classification: order, degree, type, normal form and generators in
/// the normal-form basis.
pub fn classify_anomaly(f: &FamilySpec, kmax: u32) -> Result<AnomalyReport, CoreError> {
    let (order, signs) = detect_order(f, kmax).ok_or(CoreError::NotAnAnomaly { kmax })?;
    let hat = f.hat_family(order)?;
    let raw = extract_generators(&hat, &signs, &Mat2::IDENTITY)?;
    let mean_p = raw.iter().fold(Mat2::ZERO, |acc, a| acc + a.p.scale(a.weight));
    let scale = raw.iter().map(|a| a.p.frobenius()).fold(1.0, f64::max);
    let tol = CLASSIFY_TOL * scale;

    let (ty, nf) = if mean_p.frobenius() <= tol {
        let var: f64 = raw
            .iter()
            .map(|a| {
                let d = (a.p - mean_p).frobenius();
                a.weight * d * d
            })
            .sum();
        if var <= tol * tol {
            return Err(CoreError::Degenerate);
        }
        (AnomalyType::Diffusive, None)
    } else {
        let ty = first_degree_type(&mean_p);
        (ty, Some(normal_form(&mean_p, ty)?))
    };

    let (basis, per_atom, param) = match nf {
        Some(nf) => (nf.basis, extract_generators(&hat, &signs, &nf.basis)?, Some(nf.param)),
        None => (Mat2::IDENTITY, raw, None),
    };
    let min_mean_p2 = (ty == AnomalyType::Diffusive)
        .then(|| mean_trig_polys_of(&per_atom).p2.grid_min(DIFFUSIVITY_GRID));

    Ok(AnomalyReport {
        order,
        degree: ty.degree(),
        anomaly_type: ty,
        basis,
        param,
        per_atom,
        mean_p,
        det_mean_p: mean_p.det(),
        factors_per_atom: hat.factors_per_atom(),
        min_mean_p2,
        is_critical_point: is_critical_point(f),
    })
}
