//! Built-in families: the Anderson model at the band center, the random
//! dimer model, and synthetic families for each anomaly type.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::CoreError;
use crate::family::{Atom, Factor, FamilySpec};
use crate::jet::Jet2;
use crate::mat2::Mat2;

/// Anderson transfer matrices `[[λv − ελ², −1], [1, 0]]` for a potential
/// taking value `v` with probability `w` for each `(v, w)`.
pub fn anderson(values: &[(f64, f64)], eps: f64) -> Result<FamilySpec, CoreError> {
    let t0 = Mat2::new(0.0, -1.0, 1.0, 0.0);
    let t2 = Mat2::new(-eps, 0.0, 0.0, 0.0);
    let atoms = values
        .iter()
        .map(|&(v, w)| Atom::from_jet(w, format!("v={v}"), Jet2::new(t0, Mat2::new(v, 0.0, 0.0, 0.0), t2)))
        .collect();
    FamilySpec::new("anderson", atoms, 1)
}

fn check_e(e: f64) -> Result<(), CoreError> {
    if !(-1.0..=1.0).contains(&e) {
        return Err(CoreError::InvalidParameter(format!("dimer parameter e must lie in [−1, 1], got {e}")));
    }
    Ok(())
}

/// Dimer transfer matrix `T_σ = A_σ²` at energy `1/√2 + λ`, with
/// `A_σ = [[x_σ − λ, −1], [1, 0]]` and `x_σ = (σ − 1)/√2`.
fn dimer_factor(sigma: f64) -> Factor {
    let x = (sigma - 1.0) / core::f64::consts::SQRT_2;
    Factor::Poly(vec![
        Mat2::new(x * x - 1.0, -x, x, -1.0),
        Mat2::new(-2.0 * x, 1.0, -1.0, 0.0),
        Mat2::new(1.0, 0.0, 0.0, 0.0),
    ])
}

fn dimer_sides(e: f64) -> impl Iterator<Item = (f64, f64)> {
    [(1.0, 0.5 * (1.0 + e)), (-1.0, 0.5 * (1.0 - e))]
        .into_iter()
        .filter(|&(_, w)| w > 0.0)
}

fn sigma_label(s: f64) -> String {
    if s > 0.0 { "σ=+1".into() } else { "σ=-1".into() }
}

/// Random dimer model at `v = 1/√2` with `E(σ) = e`, where each random
/// symbol is repeated twice: atoms are `T_σ²` and count as two dimer
/// transfer matrices. At λ = 0 every atom is `σ·1`.
pub fn dimer(e: f64) -> Result<FamilySpec, CoreError> {
    check_e(e)?;
    let atoms = dimer_sides(e)
        .map(|(s, w)| Atom::new(w, sigma_label(s), vec![dimer_factor(s), dimer_factor(s)]))
        .collect();
    FamilySpec::new("dimer", atoms, 2)
}

/// Dimer model with i.i.d. symbols, one dimer transfer matrix per atom.
pub fn dimer_iid(e: f64) -> Result<FamilySpec, CoreError> {
    check_e(e)?;
    let atoms = dimer_sides(e)
        .map(|(s, w)| Atom::new(w, sigma_label(s), vec![dimer_factor(s)]))
        .collect();
    FamilySpec::new("dimer-iid", atoms, 1)
}

fn positive(name: &str, x: f64) -> Result<(), CoreError> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(CoreError::InvalidParameter(format!("{name} must be > 0, got {x}")));
    }
    Ok(())
}

fn generator_family(name: &str, ps: Vec<(f64, String, Mat2)>) -> Result<FamilySpec, CoreError> {
    let atoms = ps
        .into_iter()
        .map(|(w, l, p)| Atom::from_generators(w, l, 1.0, p, Mat2::ZERO))
        .collect();
    FamilySpec::new(name, atoms, 1)
}

fn fair_signs<F: Fn(f64) -> Mat2>(p: F) -> Vec<(f64, String, Mat2)> {
    [1.0, -1.0].iter().map(|&s| (0.5, sigma_label(s), p(s))).collect()
}

/// `exp(λP_σ)` with `P_σ = [[σd, −η/2], [η/2, −σd]]`, fair σ.
pub fn synthetic_elliptic(eta: f64, d: f64) -> Result<FamilySpec, CoreError> {
    positive("eta", eta)?;
    positive("d", d)?;
    generator_family(
        "synthetic-elliptic",
        fair_signs(|s| Mat2::new(s * d, -0.5 * eta, 0.5 * eta, -s * d)),
    )
}

/// `exp(λP_σ)` with `P_σ = [[μ/2, σc], [σc, −μ/2]]`, fair σ.
pub fn synthetic_hyperbolic(mu: f64, c: f64) -> Result<FamilySpec, CoreError> {
    positive("mu", mu)?;
    positive("c", c)?;
    generator_family(
        "synthetic-hyperbolic",
        fair_signs(|s| Mat2::new(0.5 * mu, s * c, s * c, -0.5 * mu)),
    )
}

/// `exp(λP_σ)` with `P_σ = [[0, 1], [σd, 0]]`, fair σ.
pub fn synthetic_parabolic(d: f64) -> Result<FamilySpec, CoreError> {
    positive("d", d)?;
    generator_family("synthetic-parabolic", fair_signs(|s| Mat2::new(0.0, 1.0, s * d, 0.0)))
}

/// `exp(λP)` with `P = [[σ¹, −σ²], [σ², −σ¹]]` over two independent fair
/// signs.
pub fn synthetic_diffusive() -> Result<FamilySpec, CoreError> {
    let mut ps = Vec::new();
    for s1 in [1.0, -1.0] {
        for s2 in [1.0, -1.0] {
            ps.push((0.25, format!("({s1:+},{s2:+})"), Mat2::new(s1, -s2, s2, -s1)));
        }
    }
    generator_family("synthetic-diffusive", ps)
}

/// A named parameter of a catalog entry.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParamSpec {
    pub name: &'static str,
    pub default: f64,
    pub help: &'static str,
}

#[derive(Clone, Copy, Debug)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub help: &'static str,
    pub params: &'static [ParamSpec],
    build: fn(&[f64]) -> Result<FamilySpec, CoreError>,
}

impl CatalogEntry {
    /// Builds the family; `overrides` replace defaults by name.
    pub fn build(&self, overrides: &[(&str, f64)]) -> Result<FamilySpec, CoreError> {
        let mut vals: Vec<f64> = self.params.iter().map(|p| p.default).collect();
        for (k, v) in overrides {
            let i = self
                .params
                .iter()
                .position(|p| p.name == *k)
                .ok_or_else(|| CoreError::InvalidParameter(format!("entry '{}' has no parameter '{k}'", self.name)))?;
            vals[i] = *v;
        }
        (self.build)(&vals)
    }
}

const ANDERSON_PARAMS: &[ParamSpec] = &[
    ParamSpec { name: "v0", default: -1.0, help: "first potential value" },
    ParamSpec { name: "v1", default: 1.0, help: "second potential value" },
    ParamSpec { name: "p1", default: 0.5, help: "probability of v1" },
    ParamSpec { name: "eps", default: 0.0, help: "energy offset E = eps·λ²" },
];
const DIMER_PARAMS: &[ParamSpec] = &[ParamSpec { name: "e", default: 0.0, help: "mean of σ, in [−1, 1]" }];

fn build_anderson(v: &[f64]) -> Result<FamilySpec, CoreError> {
    let p1 = v[2];
    if !(0.0..=1.0).contains(&p1) {
        return Err(CoreError::InvalidParameter(format!("p1 must lie in [0, 1], got {p1}")));
    }
    let vals: Vec<(f64, f64)> = [(v[0], 1.0 - p1), (v[1], p1)].into_iter().filter(|x| x.1 > 0.0).collect();
    anderson(&vals, v[3])
}

pub const CATALOG: &[CatalogEntry] = &[
    CatalogEntry {
        name: "anderson",
        help: "Anderson model at the band center with a two-valued potential",
        params: ANDERSON_PARAMS,
        build: build_anderson,
    },
    CatalogEntry {
        name: "dimer",
        help: "random dimer model at v = 1/√2, symbols repeated in pairs",
        params: DIMER_PARAMS,
        build: |v| dimer(v[0]),
    },
    CatalogEntry {
        name: "dimer-iid",
        help: "random dimer model at v = 1/√2 with i.i.d. symbols",
        params: DIMER_PARAMS,
        build: |v| dimer_iid(v[0]),
    },
    CatalogEntry {
        name: "synthetic-elliptic",
        help: "P_σ = [[σd, −η/2], [η/2, −σd]]",
        params: &[
            ParamSpec { name: "eta", default: 1.0, help: "rotation speed" },
            ParamSpec { name: "d", default: 1.0, help: "noise amplitude" },
        ],
        build: |v| synthetic_elliptic(v[0], v[1]),
    },
    CatalogEntry {
        name: "synthetic-hyperbolic",
        help: "P_σ = [[μ/2, σc], [σc, −μ/2]]",
        params: &[
            ParamSpec { name: "mu", default: 1.0, help: "expansion rate" },
            ParamSpec { name: "c", default: 1.0, help: "noise amplitude" },
        ],
        build: |v| synthetic_hyperbolic(v[0], v[1]),
    },
    CatalogEntry {
        name: "synthetic-parabolic",
        help: "P_σ = [[0, 1], [σd, 0]]",
        params: &[ParamSpec { name: "d", default: 1.0, help: "noise amplitude" }],
        build: |v| synthetic_parabolic(v[0]),
    },
    CatalogEntry {
        name: "synthetic-diffusive",
        help: "P = [[σ¹, −σ²], [σ², −σ¹]] over two fair signs",
        params: &[],
        build: |_| synthetic_diffusive(),
    },
];

pub fn lookup(name: &str) -> Option<&'static CatalogEntry> {
    CATALOG.iter().find(|e| e.name == name)
}

/// `(7 − 2e − e²)` helper used by the dimer closed forms.
#[doc(hidden)]
pub fn dimer_det(e: f64) -> f64 {
    7.0 - 2.0 * e - e * e
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math;

    #[test]
    fn dimer_atoms_square_to_sign() {
        let f = dimer(0.3).unwrap();
        for a in f.atoms() {
            let (s, dist) = a.jet().t0.sign_of_identity();
            assert!(dist < 1e-14);
            assert_eq!(s > 0.0, a.label.contains('+'));
        }
        assert!((dimer_det(0.0) - 7.0).abs() < 1e-15);
        assert!(math::sqrt(dimer_det(0.0)) > 2.6);
    }

    #[test]
    fn extreme_dimer_drops_empty_atom() {
        assert_eq!(dimer(1.0).unwrap().len(), 1);
        assert!(dimer(1.5).is_err());
    }

    #[test]
    fn lookup_and_override() {
        let e = lookup("anderson").unwrap();
        let f = e.build(&[("v0", 0.0)]).unwrap();
        assert_eq!(f.len(), 2);
        assert!(e.build(&[("zz", 1.0)]).is_err());
    }
}
