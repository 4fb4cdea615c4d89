//! Monte-Carlo Lyapunov exponents, Birkhoff sums `I_j`, and the
//! perturbative coefficients of elliptic, hyperbolic, parabolic and
//! diffusive anomalies.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::classify::{normal_form, AnomalyReport, AnomalyType};
use crate::error::CoreError;
use crate::family::{AtomSampler, FamilySpec};
use crate::mat2::Mat2;
use crate::math;
use crate::measure::{rho0_diffusive, DensityKind, DensityProfile};
use crate::poly::vbar_x_v;
use crate::rng::ChainRng;
use crate::walk::{random_start, walk};

pub const RENORM_EVERY: u32 = 32;
/// Norm bound that triggers halving of the renormalization interval.
pub const OVERFLOW_LIMIT: f64 = 1e300;
/// Smallest accepted chain length.
pub const MIN_STEPS: u64 = 10_000;
/// Quadratic coefficients below `−NEG_TOL` are reported as errors.
pub const NEG_TOL: f64 = 1e-12;
/// `Nλ²` below this marks an `I_j` estimate as unreliable.
pub const SHORT_RUN: f64 = 100.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McParams {
    pub lambda: f64,
    pub seed: u64,
    pub chains: u32,
    pub steps: u64,
    pub renorm_every: u32,
    /// Report per atom of the given family instead of per original factor.
    pub raw: bool,
}

impl McParams {
    pub fn new(lambda: f64, seed: u64, chains: u32, steps: u64) -> Self {
        McParams { lambda, seed, chains, steps, renorm_every: RENORM_EVERY, raw: false }
    }
}

/// Accumulated `log‖·‖` of one chain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChainResult {
    pub log_norm: f64,
    pub renorm_every: u32,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LyapEstimate {
    pub lambda: f64,
    pub gamma: f64,
    pub stderr: f64,
    pub chains: u32,
    pub steps_per_chain: u64,
    pub seed: u64,
    /// Divisor applied per step (`factors_per_atom`, or 1 when raw).
    pub factors_per_step: u32,
    pub per_original_factor: bool,
    /// Smallest renormalization interval any chain needed.
    pub renorm_every: u32,
}

impl LyapEstimate {
    pub fn renorm_halved(&self, requested: u32) -> bool {
        self.renorm_every < requested
    }
}

/// A prepared Monte-Carlo run. Chains are independent; [`McPlan::finish`]
/// reduces them in chain order, so any schedule gives identical bits.
#[derive(Clone, Debug)]
pub struct McPlan {
    mats: Vec<Mat2>,
    sampler: AtomSampler,
    params: McParams,
    divisor: u32,
}

impl McPlan {
    pub fn new(f: &FamilySpec, params: McParams) -> Result<Self, CoreError> {
        if params.steps < MIN_STEPS {
            return Err(CoreError::InvalidParameter(alloc::format!(
                "steps must be ≥ {MIN_STEPS}, got {}",
                params.steps
            )));
        }
        if params.chains == 0 || params.renorm_every == 0 {
            return Err(CoreError::InvalidParameter("chains and renorm interval must be ≥ 1".into()));
        }
        if !params.lambda.is_finite() {
            return Err(CoreError::InvalidParameter("λ must be finite".into()));
        }
        Ok(McPlan {
            mats: f.matrices_at(params.lambda)?,
            sampler: f.sampler(),
            params,
            divisor: if params.raw { 1 } else { f.factors_per_atom() },
        })
    }

    pub fn params(&self) -> &McParams {
        &self.params
    }

    pub fn run_chain(&self, chain: u32) -> ChainResult {
        let mut r = self.params.renorm_every;
        loop {
            if let Some(log_norm) = self.log_norm(chain, r) {
                return ChainResult { log_norm, renorm_every: r };
            }
            if r == 1 {
                return ChainResult { log_norm: f64::NAN, renorm_every: r };
            }
            r /= 2;
        }
    }

    fn log_norm(&self, chain: u32, r: u32) -> Option<f64> {
        let mut rng = ChainRng::new(self.params.seed, u64::from(chain));
        let mut v = random_start(&mut rng);
        let r = u64::from(r);
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        let mut add = |x: f64| {
            let y = x - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        };
        for n in 0..self.params.steps {
            v = self.mats[self.sampler.sample(rng.uniform())].mul_vec(v);
            if (n + 1) % r == 0 || n + 1 == self.params.steps {
                let nrm = math::hypot(v[0], v[1]);
                if !(nrm < OVERFLOW_LIMIT && nrm > 1.0 / OVERFLOW_LIMIT) {
                    return None;
                }
                add(math::ln(nrm));
                v = [v[0] / nrm, v[1] / nrm];
            }
        }
        Some(sum)
    }

    pub fn finish(&self, results: &[ChainResult]) -> LyapEstimate {
        let p = &self.params;
        let denom = p.steps as f64 * f64::from(self.divisor);
        let g: Vec<f64> = results.iter().map(|c| c.log_norm / denom).collect();
        let m = g.len() as f64;
        let mean = g.iter().sum::<f64>() / m;
        let stderr = if g.len() > 1 {
            let var = g.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (m - 1.0);
            math::sqrt(var / m)
        } else {
            0.0
        };
        LyapEstimate {
            lambda: p.lambda,
            gamma: mean,
            stderr,
            chains: results.len() as u32,
            steps_per_chain: p.steps,
            seed: p.seed,
            factors_per_step: self.divisor,
            per_original_factor: !p.raw,
            renorm_every: results.iter().map(|c| c.renorm_every).min().unwrap_or(p.renorm_every),
        }
    }
}

/// Top Lyapunov exponent by direct iteration of `e_θ`, chains run in order.
pub fn mc_gamma(f: &FamilySpec, params: McParams) -> Result<LyapEstimate, CoreError> {
    let plan = McPlan::new(f, params)?;
    let res: Vec<ChainResult> = (0..params.chains).map(|c| plan.run_chain(c)).collect();
    Ok(plan.finish(&res))
}

/// Birkhoff averages of `e^{2iθ_n}` and `e^{4iθ_n}` in the report frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OscSums {
    pub lambda: f64,
    pub steps: u64,
    pub i1: Complex64,
    pub i2: Complex64,
    /// `Nλ² < 100`: the estimate is not yet in its asymptotic regime.
    pub short_run: bool,
}

pub fn osc_sums(
    f: &FamilySpec,
    report: &AnomalyReport,
    lambda: f64,
    seed: u64,
    burn_in: u64,
    steps: u64,
) -> Result<OscSums, CoreError> {
    if steps == 0 {
        return Err(CoreError::InvalidParameter("steps must be ≥ 1".into()));
    }
    let frame = report.frame_family(f)?;
    let mats = frame.matrices_at(lambda)?;
    let sampler = frame.sampler();
    let mut rng = ChainRng::new(seed, 0);
    let v0 = random_start(&mut rng);
    let v = walk(&mats, &sampler, &mut rng, v0, burn_in, |_| {});
    let mut s1 = Complex64::new(0.0, 0.0);
    let mut s2 = Complex64::new(0.0, 0.0);
    walk(&mats, &sampler, &mut rng, v, steps, |v| {
        let r2 = v[0] * v[0] + v[1] * v[1];
        let z = Complex64::new((v[0] * v[0] - v[1] * v[1]) / r2, 2.0 * v[0] * v[1] / r2);
        s1 += z;
        s2 += z * z;
    });
    let n = steps as f64;
    Ok(OscSums {
        lambda,
        steps,
        i1: s1 / n,
        i2: s2 / n,
        short_run: n * lambda * lambda < SHORT_RUN,
    })
}

/// `½ E Re[2λβI₁ + λ²(|β|² + ⟨v̄|PᵀP + 2Q|v⟩I₁ − β²I₂)]` per original
/// factor, from the report's generators.
pub fn gamma_from_ij(report: &AnomalyReport, i1: Complex64, i2: Complex64, lambda: f64) -> f64 {
    let sum: f64 = report
        .per_atom
        .iter()
        .map(|a| {
            let b = a.p_coeff.beta;
            let m = vbar_x_v(&(a.p.transpose() * a.p + a.q.scale(2.0)));
            let t = b * i1 * (2.0 * lambda) + (b.norm_sqr() + m * i1 - b * b * i2) * (lambda * lambda);
            a.weight * t.re
        })
        .sum();
    0.5 * sum / f64::from(report.factors_per_atom)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoeffOrder {
    Linear,
    Quadratic,
    /// Only `γ = O(λ^{3/2})` is known.
    ThreeHalvesBound,
}

impl CoeffOrder {
    pub fn as_str(self) -> &'static str {
        match self {
            CoeffOrder::Linear => "linear",
            CoeffOrder::Quadratic => "quadratic",
            CoeffOrder::ThreeHalvesBound => "three-halves-bound",
        }
    }

    pub fn exponent(self) -> f64 {
        match self {
            CoeffOrder::Linear => 1.0,
            CoeffOrder::Quadratic => 2.0,
            CoeffOrder::ThreeHalvesBound => 1.5,
        }
    }

    pub fn for_type(ty: AnomalyType) -> Self {
        match ty {
            AnomalyType::Elliptic | AnomalyType::Diffusive => CoeffOrder::Quadratic,
            AnomalyType::Hyperbolic => CoeffOrder::Linear,
            AnomalyType::Parabolic => CoeffOrder::ThreeHalvesBound,
        }
    }
}

/// Leading coefficient `a` in `γ(λ) ≈ a λ^order`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PerturbativeCoeff {
    pub order: CoeffOrder,
    pub value: f64,
    pub per_original_factor: bool,
    /// Hyperbolic only: `r_σ(π/2) ≠ 0` for every atom.
    pub nondegenerate: Option<bool>,
}

fn mismatch(expected: &'static str, r: &AnomalyReport) -> CoreError {
    CoreError::TypeMismatch { expected, found: r.anomaly_type.as_str() }
}

fn quadratic(value: f64) -> Result<PerturbativeCoeff, CoreError> {
    if value < -NEG_TOL {
        return Err(CoreError::NegativeQuadratic(value));
    }
    Ok(PerturbativeCoeff {
        order: CoeffOrder::Quadratic,
        value,
        per_original_factor: true,
        nondegenerate: None,
    })
}

/// The report re-expressed in the normal-form basis of its own `E(P)`,
/// which is a no-op for reports straight from classification.
fn in_normal_frame(report: &AnomalyReport, ty: AnomalyType) -> Result<AnomalyReport, CoreError> {
    let nf = normal_form(&report.mean_generator(), ty)?;
    if (nf.basis - Mat2::IDENTITY).max_abs() <= 1e-12 {
        return Ok(report.clone());
    }
    report.rebased(&(nf.basis * report.basis))
}

/// `½E|β_σ|²` per original factor, in the rotation normal form.
pub fn coeff_elliptic(report: &AnomalyReport) -> Result<PerturbativeCoeff, CoreError> {
    if report.anomaly_type != AnomalyType::Elliptic {
        return Err(mismatch("elliptic", report));
    }
    let r = in_normal_frame(report, AnomalyType::Elliptic)?;
    let e: f64 = r.per_atom.iter().map(|a| a.weight * a.p_coeff.beta.norm_sqr()).sum();
    quadratic(0.5 * e / f64::from(r.factors_per_atom))
}

/// `|μ|/2` per original factor.
pub fn coeff_hyperbolic(report: &AnomalyReport) -> Result<PerturbativeCoeff, CoreError> {
    if report.anomaly_type != AnomalyType::Hyperbolic {
        return Err(mismatch("hyperbolic", report));
    }
    let r = in_normal_frame(report, AnomalyType::Hyperbolic)?;
    let mu = normal_form(&r.mean_generator(), AnomalyType::Hyperbolic)?.param;
    let scale = r.per_atom.iter().map(|a| a.p.frobenius()).fold(1.0, f64::max);
    // r_σ(π/2) = Im α_σ + Im β_σ
    let nondegenerate = r
        .per_atom
        .iter()
        .all(|a| (a.p_coeff.alpha.im + a.p_coeff.beta.im).abs() > 1e-9 * scale);
    Ok(PerturbativeCoeff {
        order: CoeffOrder::Linear,
        value: 0.5 * mu.abs() / f64::from(r.factors_per_atom),
        per_original_factor: true,
        nondegenerate: Some(nondegenerate),
    })
}

/// Parabolic anomalies only admit the bound `γ = O(λ^{3/2})`; the value is 0.
pub fn coeff_parabolic(report: &AnomalyReport) -> Result<PerturbativeCoeff, CoreError> {
    if report.anomaly_type != AnomalyType::Parabolic {
        return Err(mismatch("parabolic", report));
    }
    Ok(PerturbativeCoeff {
        order: CoeffOrder::ThreeHalvesBound,
        value: 0.0,
        per_original_factor: true,
        nondegenerate: None,
    })
}

/// `½ Re (1/2π)∫ρ₀[E|β|² + E⟨v̄|PᵀP + 2Q|v⟩e^{2iθ} − E(β²)e^{4iθ}]` per
/// original factor.
pub fn coeff_second_degree(
    report: &AnomalyReport,
    profile: &DensityProfile,
) -> Result<PerturbativeCoeff, CoreError> {
    if report.anomaly_type != AnomalyType::Diffusive {
        return Err(mismatch("diffusive", report));
    }
    if profile.kind != DensityKind::Diffusive {
        return Err(CoreError::InvalidParameter("density profile is not diffusive".into()));
    }
    let (i1, i2) = (profile.moment(1), profile.moment(2));
    let mut e_b2 = 0.0;
    let mut e_m = Complex64::new(0.0, 0.0);
    let mut e_bb = Complex64::new(0.0, 0.0);
    for a in &report.per_atom {
        let b = a.p_coeff.beta;
        e_b2 += a.weight * b.norm_sqr();
        e_m += vbar_x_v(&(a.p.transpose() * a.p + a.q.scale(2.0))) * a.weight;
        e_bb += b * b * a.weight;
    }
    let v = 0.5 * (e_b2 + (e_m * i1).re - (e_bb * i2).re);
    quadratic(v / f64::from(report.factors_per_atom))
}

/// Coefficient for whatever type the report has; diffusive densities use a
/// grid of `grid` points.
pub fn perturbative_coeff(report: &AnomalyReport, grid: usize) -> Result<PerturbativeCoeff, CoreError> {
    match report.anomaly_type {
        AnomalyType::Elliptic => coeff_elliptic(report),
        AnomalyType::Hyperbolic => coeff_hyperbolic(report),
        AnomalyType::Parabolic => coeff_parabolic(report),
        AnomalyType::Diffusive => coeff_second_degree(report, &rho0_diffusive(report, grid)?),
    }
}

/// Least-squares fit of `log γ = log a + s log λ`.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerFit {
    pub exponent: f64,
    pub prefactor: f64,
    /// λ values dropped because γ ≤ 0.
    pub dropped: Vec<f64>,
}

pub fn fit_power_law(points: &[(f64, f64)]) -> Option<PowerFit> {
    let mut dropped = Vec::new();
    let mut xy = Vec::new();
    for &(l, g) in points {
        if g > 0.0 && l > 0.0 {
            xy.push((math::ln(l), math::ln(g)));
        } else {
            dropped.push(l);
        }
    }
    if xy.len() < 2 {
        return None;
    }
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let s = sxy / sxx;
    Some(PowerFit { exponent: s, prefactor: math::exp(my - s * mx), dropped })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub estimates: Vec<LyapEstimate>,
    pub fit: Option<PowerFit>,
    pub order: CoeffOrder,
    /// `a` minimizing `Σ(γ − aλ^p)²` at the declared exponent `p`.
    pub fitted_coefficient: f64,
}

impl SweepResult {
    pub fn from_estimates(estimates: Vec<LyapEstimate>, order: CoeffOrder) -> Result<Self, CoreError> {
        if estimates.windows(2).any(|w| !(w[1].lambda < w[0].lambda)) {
            return Err(CoreError::InvalidParameter("λ ladder must be strictly decreasing".into()));
        }
        let pts: Vec<(f64, f64)> = estimates.iter().map(|e| (e.lambda, e.gamma)).collect();
        let p = order.exponent();
        let (num, den) = pts.iter().fold((0.0, 0.0), |(a, b), &(l, g)| {
            let lp = math::powf(l.abs(), p);
            (a + g * lp, b + lp * lp)
        });
        Ok(SweepResult {
            fit: fit_power_law(&pts),
            estimates,
            order,
            fitted_coefficient: num / den,
        })
    }

    pub fn exponent(&self) -> Option<f64> {
        self.fit.as_ref().map(|f| f.exponent)
    }
}

pub fn check_ladder(ladder: &[f64]) -> Result<(), CoreError> {
    if ladder.is_empty() || ladder.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(CoreError::InvalidParameter("λ ladder must be non-empty and strictly decreasing".into()));
    }
    Ok(())
}

/// [`mc_gamma`] over a strictly decreasing ladder; `base.lambda` is ignored.
pub fn sweep(f: &FamilySpec, ladder: &[f64], base: McParams, order: CoeffOrder) -> Result<SweepResult, CoreError> {
    check_ladder(ladder)?;
    let est = ladder
        .iter()
        .map(|&l| mc_gamma(f, McParams { lambda: l, ..base }))
        .collect::<Result<Vec<_>, _>>()?;
    SweepResult::from_estimates(est, order)
}

/// Fitted log-log slope of γ̂ over the ladder for a parabolic family.
pub fn parabolic_scaling_check(
    f: &FamilySpec,
    report: &AnomalyReport,
    ladder: &[f64],
    base: McParams,
) -> Result<PowerFit, CoreError> {
    if report.anomaly_type != AnomalyType::Parabolic {
        return Err(mismatch("parabolic", report));
    }
    sweep(f, ladder, base, CoeffOrder::ThreeHalvesBound)?
        .fit
        .ok_or_else(|| CoreError::InvalidParameter("fewer than two positive estimates".into()))
}
