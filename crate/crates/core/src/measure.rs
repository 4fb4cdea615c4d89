//! Lowest-order invariant densities ρ₀, the zero sets of `E(p)`, and
//! empirical phase histograms.

use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::classify::{AnomalyReport, AnomalyType, AtomGenerators};
use crate::error::CoreError;
use crate::family::FamilySpec;
use crate::mat2::ALG_TOL;
use crate::math;
use crate::phase::{phase_action, Phase};
use crate::poly::TrigPoly;
use crate::quad::{cumulative_integral, periodic_grid, periodic_mean};
use crate::rng::ChainRng;
use crate::spectral::{spectral_derivative, FourierSeries};
use crate::walk::{random_start, walk};

/// Grid used for the strict-diffusivity test.
pub const DIFFUSIVITY_GRID: usize = 2048;
/// Smallest grid accepted by [`rho0_diffusive`].
pub const MIN_DIFFUSIVE_GRID: usize = 2048;
/// Refinement factor of the cumulative-integral grid.
pub const REFINE: usize = 4;

/// `E(p)`, `E(p²)`, `E(p∂p)`, `E(q)` as trigonometric polynomials.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanTrigPolys {
    pub p: TrigPoly,
    pub p2: TrigPoly,
    pub p_dp: TrigPoly,
    pub q: TrigPoly,
}

pub fn mean_trig_polys(report: &AnomalyReport) -> MeanTrigPolys {
    mean_trig_polys_of(&report.per_atom)
}

pub(crate) fn mean_trig_polys_of(atoms: &[AtomGenerators]) -> MeanTrigPolys {
    let mut m = MeanTrigPolys {
        p: TrigPoly::ZERO,
        p2: TrigPoly::ZERO,
        p_dp: TrigPoly::ZERO,
        q: TrigPoly::ZERO,
    };
    for a in atoms {
        let p = TrigPoly::from_coeff(&a.p_coeff);
        let q = TrigPoly::from_coeff(&a.q_coeff);
        m.p = m.p + p * a.weight;
        m.p2 = m.p2 + p.mul_linear(&p) * a.weight;
        m.p_dp = m.p_dp + p.mul_linear(&p.derivative()) * a.weight;
        m.q = m.q + q * a.weight;
    }
    m
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DensityKind {
    Elliptic,
    Diffusive,
}

/// ρ₀ sampled on `n` equispaced points of `[0, 2π)`, normalized to
/// `(1/2π)∫ρ₀ = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityProfile {
    pub kind: DensityKind,
    pub theta: Vec<f64>,
    pub rho0: Vec<f64>,
    /// κ and K (diffusive only).
    pub kappa: Option<Vec<f64>>,
    pub big_k: Option<Vec<f64>>,
    /// Integration constant `C` of the unnormalized solution; 0 when elliptic.
    pub big_c: f64,
    /// Normalization: `ρ₀ = c · (unnormalized solution)`.
    pub c: f64,
}

impl DensityProfile {
    pub fn len(&self) -> usize {
        self.rho0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho0.is_empty()
    }

    /// `(1/2π)∫ρ₀ g dθ`.
    pub fn average<G: Fn(f64) -> f64>(&self, g: G) -> f64 {
        let v: Vec<f64> = self.theta.iter().zip(&self.rho0).map(|(&t, &r)| r * g(t)).collect();
        periodic_mean(&v)
    }

    /// `(1/2π)∫ρ₀ e^{2ijθ} dθ`.
    pub fn moment(&self, j: i32) -> Complex64 {
        let w = 2.0 * j as f64;
        Complex64::new(self.average(|t| math::cos(w * t)), self.average(|t| math::sin(w * t)))
    }

    /// Trigonometric interpolant of ρ₀.
    pub fn series(&self) -> FourierSeries {
        FourierSeries::from_samples(&self.rho0)
    }

    /// Grid points in `[0, π)` with their ρ₀ values.
    pub fn folded(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.theta
            .iter()
            .copied()
            .zip(self.rho0.iter().copied())
            .filter(|&(t, _)| t < PI)
    }
}

/// `ρ₀ = c / E(p)` for an elliptic first-degree anomaly, in the report's
/// basis.
pub fn rho0_elliptic(report: &AnomalyReport, n: usize) -> Result<DensityProfile, CoreError> {
    if report.anomaly_type != AnomalyType::Elliptic {
        return Err(CoreError::TypeMismatch {
            expected: "elliptic",
            found: report.anomaly_type.as_str(),
        });
    }
    if n == 0 {
        return Err(CoreError::InvalidParameter("grid must be non-empty".into()));
    }
    let ep = mean_trig_polys(report).p;
    let theta = periodic_grid(n);
    let vals: Vec<f64> = theta.iter().map(|&t| ep.eval(t)).collect();
    let min_abs = vals.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
    let same_sign = vals.iter().all(|&v| v > 0.0) || vals.iter().all(|&v| v < 0.0);
    if !same_sign || min_abs <= ALG_TOL {
        return Err(CoreError::ZeroCrossing(min_abs));
    }
    let raw: Vec<f64> = vals.iter().map(|v| 1.0 / v).collect();
    let c = 1.0 / periodic_mean(&raw);
    Ok(DensityProfile {
        kind: DensityKind::Elliptic,
        theta,
        rho0: raw.iter().map(|r| c * r).collect(),
        kappa: None,
        big_k: None,
        big_c: 0.0,
        c,
    })
}

/// Periodic positive solution of the Fokker–Planck first integral
/// `½E(p²)ρ′ + ½E(p∂p)ρ − E(q)ρ = const` on `n ≥ 2048` points.
pub fn rho0_diffusive(report: &AnomalyReport, n: usize) -> Result<DensityProfile, CoreError> {
    if report.anomaly_type != AnomalyType::Diffusive {
        return Err(CoreError::TypeMismatch {
            expected: "diffusive",
            found: report.anomaly_type.as_str(),
        });
    }
    if n < MIN_DIFFUSIVE_GRID {
        return Err(CoreError::InvalidParameter(alloc::format!(
            "diffusive density needs at least {MIN_DIFFUSIVE_GRID} grid points, got {n}"
        )));
    }
    let m = mean_trig_polys(report);
    let min_p2 = m.p2.grid_min(DIFFUSIVITY_GRID);
    if !(min_p2 > ALG_TOL) {
        return Err(CoreError::NonStrictlyDiffusive(min_p2));
    }
    let (p2, dp2) = (m.p2, m.p2.derivative());
    let (q, dq) = (m.q, m.q.derivative());

    let big_n = n * REFINE;
    let h = TAU / big_n as f64;
    let th: Vec<f64> = (0..=big_n).map(|j| j as f64 * h).collect();

    // κ' = 2E(q)/E(p²)
    let g: Vec<f64> = th.iter().map(|&t| 2.0 * q.eval(t) / p2.eval(t)).collect();
    let dg: Vec<f64> = th
        .iter()
        .map(|&t| {
            let (a, b) = (p2.eval(t), q.eval(t));
            2.0 * (dq.eval(t) * a - b * dp2.eval(t)) / (a * a)
        })
        .collect();
    let kappa = cumulative_integral(&g, &dg, h);

    // K' = 2E(p²)^{-1/2} e^{-κ}
    let f: Vec<f64> = th
        .iter()
        .zip(&kappa)
        .map(|(&t, &k)| 2.0 / math::sqrt(p2.eval(t)) * math::exp(-k))
        .collect();
    let df: Vec<f64> = th
        .iter()
        .zip(&f)
        .zip(&g)
        .map(|((&t, &fv), &gv)| fv * (-0.5 * dp2.eval(t) / p2.eval(t) - gv))
        .collect();
    let big_k = cumulative_integral(&f, &df, h);

    let kappa_end = kappa[big_n];
    let big_c = (math::exp(-kappa_end) - 1.0) / big_k[big_n];

    let idx = (0..n).map(|j| j * REFINE);
    let raw: Vec<f64> = idx
        .clone()
        .map(|i| math::exp(kappa[i]) / math::sqrt(p2.eval(th[i])) * (big_c * big_k[i] + 1.0))
        .collect();
    let c = 1.0 / periodic_mean(&raw);
    Ok(DensityProfile {
        kind: DensityKind::Diffusive,
        theta: periodic_grid(n),
        rho0: raw.iter().map(|r| c * r).collect(),
        kappa: Some(idx.clone().map(|i| kappa[i]).collect()),
        big_k: Some(idx.map(|i| big_k[i]).collect()),
        big_c,
        c,
    })
}

/// Sup norm over the grid of
/// `½E(p²)ρ₀′ + ½E(p∂p)ρ₀ − E(q)ρ₀ − c·C`, with ρ₀′ from spectral
/// differentiation.
pub fn first_integral_residual(report: &AnomalyReport, profile: &DensityProfile) -> f64 {
    let m = mean_trig_polys(report);
    let d = spectral_derivative(&profile.rho0);
    let target = profile.c * profile.big_c;
    profile
        .theta
        .iter()
        .zip(&profile.rho0)
        .zip(&d)
        .map(|((&t, &r), &dr)| {
            (0.5 * m.p2.eval(t) * dr + 0.5 * m.p_dp.eval(t) * r - m.q.eval(t) * r - target).abs()
        })
        .fold(0.0, f64::max)
}

/// `|Σ_σ w_σ (1/2π)∫ρ₀(θ) e^{2ijS_{λ,σ}(θ)} − (1/2π)∫ρ₀ e^{2ijθ}|` for the
/// family in the density's frame.
pub fn stationarity_defect(
    frame: &FamilySpec,
    profile: &DensityProfile,
    lambda: f64,
    j: i32,
) -> Result<f64, CoreError> {
    let mats = frame.matrices_at(lambda)?;
    let w = 2.0 * j as f64;
    let mut pushed = Complex64::new(0.0, 0.0);
    for (a, t) in frame.atoms().iter().zip(&mats) {
        let v: Vec<Complex64> = profile
            .theta
            .iter()
            .zip(&profile.rho0)
            .map(|(&th, &r)| {
                let s = phase_action(t, Phase::new(th)).value();
                Complex64::new(math::cos(w * s), math::sin(w * s)) * r
            })
            .collect();
        let re: Vec<f64> = v.iter().map(|z| z.re).collect();
        let im: Vec<f64> = v.iter().map(|z| z.im).collect();
        pushed += Complex64::new(periodic_mean(&re), periodic_mean(&im)) * a.weight;
    }
    Ok((pushed - profile.moment(j)).norm())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stability {
    Stable,
    Unstable,
    /// Double zero (parabolic).
    SemiStable,
}

impl Stability {
    pub fn as_str(self) -> &'static str {
        match self {
            Stability::Stable => "stable",
            Stability::Unstable => "unstable",
            Stability::SemiStable => "semi-stable",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SupportPoint {
    pub theta: f64,
    pub stability: Stability,
}

/// Zeros of `E(p)` on `[0, 2π)` in increasing order, with stability for
/// the averaged dynamics `θ ↦ θ + λE(p)(θ)` at coupling sign `lambda_sign`.
pub fn support_points(report: &AnomalyReport, lambda_sign: f64) -> Result<Vec<SupportPoint>, CoreError> {
    match report.anomaly_type {
        AnomalyType::Hyperbolic | AnomalyType::Parabolic => {}
        other => {
            return Err(CoreError::TypeMismatch { expected: "hyperbolic or parabolic", found: other.as_str() })
        }
    }
    let ep = mean_trig_polys(report).p;
    let dep = ep.derivative();
    // E(p) = A + R cos(2θ − φ)
    let r = math::hypot(ep.c2, ep.s2);
    let phi = math::atan2(ep.s2, ep.c2);
    let ratio = (-ep.c0 / r).clamp(-1.0, 1.0);
    let double = report.anomaly_type == AnomalyType::Parabolic;
    let base = math::acos(ratio);
    let halves: Vec<f64> = if double {
        alloc::vec![0.5 * (phi + if ratio > 0.0 { 0.0 } else { PI })]
    } else {
        alloc::vec![0.5 * (phi + base), 0.5 * (phi - base)]
    };
    let mut pts: Vec<SupportPoint> = halves
        .iter()
        .flat_map(|&h| [h, h + PI])
        .map(|t| {
            let theta = Phase::new(t).value();
            let stability = if double {
                Stability::SemiStable
            } else if lambda_sign * dep.eval(theta) < 0.0 {
                Stability::Stable
            } else {
                Stability::Unstable
            };
            SupportPoint { theta, stability }
        })
        .collect();
    pts.sort_by(|a, b| a.theta.total_cmp(&b.theta));
    Ok(pts)
}

/// Normalized phase histogram on `[0, π)`: bin heights have mean 1, so they
/// compare directly with ρ₀.
#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    pub counts: Vec<u64>,
    pub density: Vec<f64>,
}

impl Histogram {
    pub fn from_counts(counts: Vec<u64>) -> Self {
        let total: u64 = counts.iter().sum();
        let bins = counts.len() as f64;
        let density = counts.iter().map(|&c| c as f64 * bins / total.max(1) as f64).collect();
        Histogram { counts, density }
    }

    pub fn centers(&self) -> Vec<f64> {
        let b = self.counts.len() as f64;
        (0..self.counts.len()).map(|i| PI * (i as f64 + 0.5) / b).collect()
    }

    pub fn sup_distance<G: Fn(f64) -> f64>(&self, g: G) -> f64 {
        self.centers()
            .iter()
            .zip(&self.density)
            .map(|(&t, &d)| (d - g(t)).abs())
            .fold(0.0, f64::max)
    }

    /// `(1/π)∫₀^π |h − g|` with `g` sampled at bin centers.
    pub fn l1_distance<G: Fn(f64) -> f64>(&self, g: G) -> f64 {
        let c = self.centers();
        c.iter().zip(&self.density).map(|(&t, &d)| (d - g(t)).abs()).sum::<f64>() / c.len() as f64
    }

    /// Fraction of samples within distance `r` (mod π) of any of `points`.
    pub fn mass_near(&self, points: &[f64], r: f64) -> f64 {
        let total: u64 = self.counts.iter().sum();
        let near: u64 = self
            .centers()
            .iter()
            .zip(&self.counts)
            .filter(|(&t, _)| {
                points.iter().any(|&p| {
                    let d = Phase::new(t - p).folded();
                    d.min(PI - d) <= r
                })
            })
            .map(|(_, &c)| c)
            .sum();
        near as f64 / total.max(1) as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EmpiricalParams {
    pub lambda: f64,
    pub seed: u64,
    pub chains: u32,
    pub burn_in: u64,
    pub steps: u64,
    pub bins: usize,
}

/// Bin counts of one chain on the frame family.
pub fn empirical_chain(frame: &FamilySpec, p: &EmpiricalParams, chain: u32) -> Result<Vec<u64>, CoreError> {
    if p.bins == 0 {
        return Err(CoreError::InvalidParameter("bins must be ≥ 1".into()));
    }
    let mats = frame.matrices_at(p.lambda)?;
    let sampler = frame.sampler();
    let mut rng = ChainRng::new(p.seed, u64::from(chain));
    let v0 = random_start(&mut rng);
    let v = walk(&mats, &sampler, &mut rng, v0, p.burn_in, |_| {});
    let mut counts = alloc::vec![0u64; p.bins];
    let scale = p.bins as f64 / PI;
    walk(&mats, &sampler, &mut rng, v, p.steps, |v| {
        let t = Phase::from_vector(v).folded();
        let b = ((t * scale) as usize).min(p.bins - 1);
        counts[b] += 1;
    });
    Ok(counts)
}

/// Merges per-chain counts in chain order.
pub fn merge_counts(chains: &[Vec<u64>]) -> Histogram {
    let bins = chains.first().map_or(0, Vec::len);
    let mut counts = alloc::vec![0u64; bins];
    for c in chains {
        for (a, b) in counts.iter_mut().zip(c) {
            *a += b;
        }
    }
    Histogram::from_counts(counts)
}

/// Empirical invariant measure of the phase dynamics in the report frame,
/// folded to `[0, π)`.
pub fn empirical_density(
    f: &FamilySpec,
    report: &AnomalyReport,
    p: &EmpiricalParams,
) -> Result<Histogram, CoreError> {
    let frame = report.frame_family(f)?;
    let chains = (0..p.chains.max(1))
        .map(|c| empirical_chain(&frame, p, c))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(merge_counts(&chains))
}
