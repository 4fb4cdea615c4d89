//! Finitely supported random families `(T_{λ,σ}, p)` and their k-fold
//! products.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::CoreError;
use crate::jet::{jet_mul, Jet2};
use crate::mat2::{exp_traceless, Mat2};
use crate::rng::ChainRng;

/// Largest number of atoms a hat family may have.
pub const HAT_ATOM_LIMIT: usize = 1_000_000;
/// Tolerance on the total weight.
pub const WEIGHT_TOL: f64 = 1e-12;

/// One matrix-valued function of `λ` that can be evaluated exactly.
#[derive(Clone, Debug, PartialEq)]
pub enum Factor {
    /// `Σ_i λ^i c_i`.
    Poly(Vec<Mat2>),
    /// `sign · exp(λP + λ²Q)` with `P`, `Q` traceless.
    Exp { sign: f64, p: Mat2, q: Mat2 },
}

impl Factor {
    pub fn eval(&self, lambda: f64) -> Mat2 {
        match self {
            Factor::Poly(coeffs) => coeffs
                .iter()
                .rev()
                .fold(Mat2::ZERO, |acc, c| acc.scale(lambda) + *c),
            Factor::Exp { sign, p, q } => {
                exp_traceless(&(p.scale(lambda) + q.scale(lambda * lambda))).scale(*sign)
            }
        }
    }

    pub fn jet(&self) -> Jet2 {
        match self {
            Factor::Poly(c) => {
                let get = |i: usize| c.get(i).copied().unwrap_or(Mat2::ZERO);
                Jet2::new(get(0), get(1), get(2))
            }
            Factor::Exp { sign, p, q } => Jet2::from_generators(*sign, p, q),
        }
    }

    fn conjugated(&self, m: &Mat2, m_inv: &Mat2) -> Factor {
        let conj = |x: &Mat2| *m * *x * *m_inv;
        match self {
            Factor::Poly(c) => Factor::Poly(c.iter().map(conj).collect()),
            Factor::Exp { sign, p, q } => Factor::Exp { sign: *sign, p: conj(p), q: conj(q) },
        }
    }
}

/// A support point `σ` of the distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub weight: f64,
    pub label: String,
    /// Factors in order of application: `T = F_n ⋯ F_1` for `[F_1, …, F_n]`.
    pub factors: Vec<Factor>,
    jet: Jet2,
}

impl Atom {
    pub fn new(weight: f64, label: impl Into<String>, factors: Vec<Factor>) -> Self {
        let jet = factors
            .iter()
            .fold(Jet2::IDENTITY, |acc, f| jet_mul(&f.jet(), &acc));
        Atom { weight, label: label.into(), factors, jet }
    }

    /// Atom given by its polynomial coefficients `T0 + λT1 + λ²T2`.
    pub fn from_jet(weight: f64, label: impl Into<String>, jet: Jet2) -> Self {
        Atom::new(weight, label, alloc::vec![Factor::Poly(alloc::vec![jet.t0, jet.t1, jet.t2])])
    }

    /// Atom `sign · exp(λP + λ²Q)`.
    pub fn from_generators(weight: f64, label: impl Into<String>, sign: f64, p: Mat2, q: Mat2) -> Self {
        Atom::new(weight, label, alloc::vec![Factor::Exp { sign, p, q }])
    }

    pub fn jet(&self) -> &Jet2 {
        &self.jet
    }

    /// `T_{λ,σ}`, rescaled onto SL(2,R) to absorb truncation in user jets.
    pub fn eval(&self, lambda: f64) -> Result<Mat2, CoreError> {
        let t = self
            .factors
            .iter()
            .fold(Mat2::IDENTITY, |acc, f| f.eval(lambda) * acc);
        t.project_sl2().ok_or(CoreError::NotInSl2 { lambda })
    }
}

/// Immutable random family.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilySpec {
    pub name: String,
    atoms: Vec<Atom>,
    factors_per_atom: u32,
}

impl FamilySpec {
    /// Validates weights, atom count and jet unimodularity.
    ///
    /// `factors_per_atom` counts how many transfer matrices of the
    /// underlying model each atom stands for; Lyapunov exponents are
    /// reported per such factor.
    pub fn new(name: impl Into<String>, atoms: Vec<Atom>, factors_per_atom: u32) -> Result<Self, CoreError> {
        if atoms.is_empty() {
            return Err(CoreError::InvalidFamily("no atoms".into()));
        }
        if factors_per_atom == 0 {
            return Err(CoreError::InvalidFamily("factors_per_atom must be ≥ 1".into()));
        }
        let mut total = 0.0;
        for a in &atoms {
            if !(a.weight > 0.0) || !a.weight.is_finite() {
                return Err(CoreError::InvalidFamily(format!(
                    "atom '{}' has non-positive weight {}",
                    a.label, a.weight
                )));
            }
            if !a.jet.is_unimodular() {
                let [d0, d1, d2] = a.jet.det_coefficients();
                return Err(CoreError::InvalidFamily(format!(
                    "atom '{}' is not in SL(2,R) through order λ²: det coefficients ({d0}, {d1}, {d2})",
                    a.label
                )));
            }
            total += a.weight;
        }
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(CoreError::InvalidFamily(format!("weights sum to {total}, not 1")));
        }
        Ok(FamilySpec { name: name.into(), atoms, factors_per_atom })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn factors_per_atom(&self) -> u32 {
        self.factors_per_atom
    }

    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.atoms.iter().map(|a| a.weight)
    }

    /// `Σ weight · g(atom)`.
    pub fn expect<G: Fn(&Atom) -> Mat2>(&self, g: G) -> Mat2 {
        self.atoms
            .iter()
            .fold(Mat2::ZERO, |acc, a| acc + g(a).scale(a.weight))
    }

    /// All atom matrices at coupling `λ`.
    pub fn matrices_at(&self, lambda: f64) -> Result<Vec<Mat2>, CoreError> {
        self.atoms.iter().map(|a| a.eval(lambda)).collect()
    }

    /// The family `M T_{λ,σ} M⁻¹`.
    pub fn conjugated(&self, m: &Mat2) -> Result<FamilySpec, CoreError> {
        let m_inv = m
            .inverse()
            .ok_or_else(|| CoreError::InvalidParameter("singular basis change".into()))?;
        let atoms = self
            .atoms
            .iter()
            .map(|a| {
                let factors = a.factors.iter().map(|f| f.conjugated(m, &m_inv)).collect();
                Atom::new(a.weight, a.label.clone(), factors)
            })
            .collect();
        Ok(FamilySpec { name: self.name.clone(), atoms, factors_per_atom: self.factors_per_atom })
    }

    /// Family over `Σ^k` with product weights and matrices
    /// `T_{σ(k)} ⋯ T_{σ(1)}`. Atom index `Σ_i idx(σ(i))·n^{i−1}`.
    pub fn hat_family(&self, k: u32) -> Result<FamilySpec, CoreError> {
        if k == 0 {
            return Err(CoreError::InvalidParameter("hat order must be ≥ 1".into()));
        }
        if k == 1 {
            return Ok(self.clone());
        }
        let n = self.atoms.len();
        let count = (n as u128).checked_pow(k).unwrap_or(u128::MAX);
        if count > HAT_ATOM_LIMIT as u128 {
            return Err(CoreError::HatTooLarge { k, atoms: count, limit: HAT_ATOM_LIMIT });
        }
        let count = count as usize;
        let mut atoms = Vec::with_capacity(count);
        let mut digits = alloc::vec![0usize; k as usize];
        for _ in 0..count {
            // digits[0] is σ(1), the first factor applied
            let mut weight = 1.0;
            let mut factors = Vec::new();
            let mut label = String::new();
            for (pos, &d) in digits.iter().enumerate().rev() {
                let a = &self.atoms[d];
                weight *= a.weight;
                if pos + 1 != digits.len() {
                    label.push('·');
                }
                label.push_str(&a.label);
            }
            for &d in digits.iter() {
                factors.extend(self.atoms[d].factors.iter().cloned());
            }
            atoms.push(Atom::new(weight, label, factors));
            for d in digits.iter_mut() {
                *d += 1;
                if *d < n {
                    break;
                }
                *d = 0;
            }
        }
        // renormalize the rounding in product weights
        let total: f64 = atoms.iter().map(|a| a.weight).sum();
        for a in atoms.iter_mut() {
            a.weight /= total;
        }
        FamilySpec::new(
            format!("{}^{}", self.name, k),
            atoms,
            self.factors_per_atom * k,
        )
    }

    pub fn sampler(&self) -> AtomSampler {
        AtomSampler::new(self.weights())
    }

    /// Deterministic i.i.d. code of length `n` from stream `(seed, 0)`.
    pub fn sample_code(&self, seed: u64, n: usize) -> Vec<usize> {
        let sampler = self.sampler();
        let mut rng = ChainRng::new(seed, 0);
        (0..n).map(|_| sampler.sample(rng.uniform())).collect()
    }
}

/// Inverse-CDF sampler over atom weights.
#[derive(Clone, Debug)]
pub struct AtomSampler {
    cumulative: Vec<f64>,
}

impl AtomSampler {
    pub fn new(weights: impl Iterator<Item = f64>) -> Self {
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = weights
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        if let Some(last) = cumulative.last_mut() {
            *last = f64::INFINITY;
        }
        AtomSampler { cumulative }
    }

    /// Index of the atom selected by `u ∈ [0, 1)`.
    #[inline]
    pub fn sample(&self, u: f64) -> usize {
        if self.cumulative.len() <= 8 {
            self.cumulative.iter().position(|&c| u < c).unwrap_or(0)
        } else {
            self.cumulative.partition_point(|&c| c <= u)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_atoms() -> FamilySpec {
        let p = Mat2::new(0.2, -0.5, 0.5, -0.2);
        FamilySpec::new(
            "t",
            alloc::vec![
                Atom::from_generators(0.3, "a", 1.0, p, Mat2::ZERO),
                Atom::from_generators(0.7, "b", -1.0, -p, Mat2::new(0.1, 0.0, 0.0, -0.1)),
            ],
            1,
        )
        .unwrap()
    }

    #[test]
    fn rejects_bad_families() {
        assert!(FamilySpec::new("e", alloc::vec![], 1).is_err());
        let a = Atom::from_generators(0.6, "a", 1.0, Mat2::ZERO, Mat2::ZERO);
        assert!(FamilySpec::new("w", alloc::vec![a.clone()], 1).is_err());
        let bad = Atom::from_jet(1.0, "x", Jet2::new(Mat2::IDENTITY, Mat2::IDENTITY, Mat2::ZERO));
        assert!(FamilySpec::new("d", alloc::vec![bad], 1).is_err());
    }

    #[test]
    fn hat_of_order_one_is_identity() {
        let f = two_atoms();
        assert_eq!(f.hat_family(1).unwrap(), f);
    }

    #[test]
    fn hat_composes_in_code_order() {
        let f = two_atoms();
        let h = f.hat_family(2).unwrap();
        assert_eq!(h.len(), 4);
        assert_eq!(h.factors_per_atom(), 2);
        // index 1 = (σ(2), σ(1)) = (a, b): T_a T_b
        let lam = 0.3;
        let want = f.atoms()[0].eval(lam).unwrap() * f.atoms()[1].eval(lam).unwrap();
        let got = h.atoms()[1].eval(lam).unwrap();
        assert!((want - got).max_abs() < 1e-14);
        assert_eq!(h.atoms()[1].label, "a·b");
        assert!((h.atoms()[1].weight - 0.21).abs() < 1e-15);
    }

    #[test]
    fn hat_guard() {
        let f = two_atoms();
        assert!(matches!(f.hat_family(30), Err(CoreError::HatTooLarge { .. })));
    }

    #[test]
    fn expectation_of_constant() {
        let f = two_atoms();
        let c = Mat2::new(1.0, 2.0, 3.0, 4.0);
        assert!((f.expect(|_| c) - c).max_abs() < 1e-15);
    }

    #[test]
    fn empty_code() {
        assert!(two_atoms().sample_code(1, 0).is_empty());
    }

    #[test]
    fn code_is_deterministic() {
        let f = two_atoms();
        assert_eq!(f.sample_code(99, 1000), f.sample_code(99, 1000));
        assert_ne!(f.sample_code(99, 1000), f.sample_code(100, 1000));
    }

    #[test]
    fn sampler_uses_binary_search_for_large_supports() {
        let s = AtomSampler::new((0..20).map(|_| 0.05));
        assert_eq!(s.sample(0.0), 0);
        assert_eq!(s.sample(0.051), 1);
        assert_eq!(s.sample(0.999_999), 19);
    }
}
