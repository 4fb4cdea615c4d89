//! One function per subcommand. Each returns the primary document and,
//! for CSV commands, a JSON summary.

use anomaly_core::catalog::{self, CatalogEntry};
use anomaly_core::classify::{classify_anomaly, AnomalyReport, AnomalyType, CLASSIFY_TOL, ORDER_TOL};
use anomaly_core::family::FamilySpec;
use anomaly_core::lyapunov::{perturbative_coeff, CoeffOrder, LyapEstimate, McParams, PerturbativeCoeff, SweepResult};
use anomaly_core::mat2::Mat2;
use anomaly_core::measure::{
    first_integral_residual, rho0_diffusive, rho0_elliptic, support_points, DensityKind, DensityProfile,
};
use anomaly_core::CoreError;
use serde::Serialize;

use crate::config::{FamilySource, Format, InlineFamily, Mode, Rows, Settings};
use crate::error::CliError;
use crate::format::{fmt17, to_csv, to_json};
use crate::mc::{mc_gamma_par, sweep_par, with_threads};

/// What a command produced. `primary` goes to `--out` (or stdout);
/// `summary`, if any, goes to stdout when `--out` is set.
#[derive(Clone, Debug, PartialEq)]
pub struct Output {
    pub primary: String,
    pub summary: Option<String>,
}

impl Output {
    fn json<T: Serialize>(v: &T) -> Self {
        Output { primary: to_json(v), summary: None }
    }
}

fn rows(m: &Mat2) -> Rows {
    m.to_rows()
}

#[derive(Serialize)]
struct AtomJson {
    label: String,
    weight: f64,
    sign: f64,
    #[serde(rename = "P")]
    p: Rows,
    #[serde(rename = "Q")]
    q: Rows,
}

#[derive(Serialize)]
struct Tolerances {
    order: f64,
    classify: f64,
}

#[derive(Serialize)]
pub struct ReportJson {
    family: String,
    order: u32,
    degree: &'static str,
    #[serde(rename = "type")]
    anomaly_type: &'static str,
    basis: Rows,
    param: Option<f64>,
    mean_p: Rows,
    det_mean_p: f64,
    factors_per_atom: u32,
    min_mean_p2: Option<f64>,
    is_critical_point: bool,
    atoms: Vec<AtomJson>,
    tolerances: Tolerances,
}

impl ReportJson {
    pub fn new(f: &FamilySpec, r: &AnomalyReport) -> Result<Self, CliError> {
        let hat = f.hat_family(r.order)?;
        Ok(ReportJson {
            family: f.name.clone(),
            order: r.order,
            degree: r.degree.as_str(),
            anomaly_type: r.anomaly_type.as_str(),
            basis: rows(&r.basis),
            param: r.param,
            mean_p: rows(&r.mean_p),
            det_mean_p: r.det_mean_p,
            factors_per_atom: r.factors_per_atom,
            min_mean_p2: r.min_mean_p2,
            is_critical_point: r.is_critical_point,
            atoms: hat
                .atoms()
                .iter()
                .zip(&r.per_atom)
                .map(|(a, g)| AtomJson { label: a.label.clone(), weight: g.weight, sign: g.sign, p: rows(&g.p), q: rows(&g.q) })
                .collect(),
            tolerances: Tolerances { order: ORDER_TOL, classify: CLASSIFY_TOL },
        })
    }
}

#[derive(Serialize)]
pub struct LyapJson {
    lambda: f64,
    gamma: f64,
    stderr: f64,
    chains: u32,
    steps: u64,
    seed: u64,
    factors_per_step: u32,
    per_original_factor: bool,
    renorm_every: u32,
    renorm_halved: bool,
}

impl From<&LyapEstimate> for LyapJson {
    fn from(e: &LyapEstimate) -> Self {
        LyapJson {
            lambda: e.lambda,
            gamma: e.gamma,
            stderr: e.stderr,
            chains: e.chains,
            steps: e.steps_per_chain,
            seed: e.seed,
            factors_per_step: e.factors_per_step,
            per_original_factor: e.per_original_factor,
            renorm_every: e.renorm_every,
            renorm_halved: e.renorm_halved(anomaly_core::lyapunov::RENORM_EVERY),
        }
    }
}

#[derive(Serialize)]
pub struct CoeffJson {
    order: &'static str,
    value: f64,
    exponent: f64,
    #[serde(rename = "type")]
    anomaly_type: &'static str,
    per_original_factor: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    nondegenerate: Option<bool>,
}

impl CoeffJson {
    fn new(c: &PerturbativeCoeff, ty: AnomalyType) -> Self {
        CoeffJson {
            order: c.order.as_str(),
            value: c.value,
            exponent: c.order.exponent(),
            anomaly_type: ty.as_str(),
            per_original_factor: c.per_original_factor,
            nondegenerate: c.nondegenerate,
        }
    }
}

fn classify(s: &Settings) -> Result<(FamilySpec, AnomalyReport), CliError> {
    let f = s.family()?;
    let r = classify_anomaly(&f, s.kmax)?;
    Ok((f, r))
}

fn mc_params(s: &Settings, lambda: f64) -> McParams {
    McParams::new(lambda, s.seed, s.chains, s.steps)
}

fn only_json(s: &Settings, cmd: &str) -> Result<(), CliError> {
    match s.format {
        Some(Format::Csv) => Err(CliError::validation(format!("'{cmd}' only writes JSON"))),
        _ => Ok(()),
    }
}

pub fn cmd_classify(s: &Settings) -> Result<Output, CliError> {
    only_json(s, "classify")?;
    let (f, r) = classify(s)?;
    Ok(Output::json(&ReportJson::new(&f, &r)?))
}

/// Extra fields for a classification failure (the critical-point flag).
pub fn classify_failure_details(s: &Settings) -> Option<serde_json::Value> {
    let f = s.family().ok()?;
    Some(serde_json::json!({
        "family": f.name,
        "is_critical_point": anomaly_core::classify::is_critical_point(&f),
    }))
}

#[derive(Serialize)]
struct DensitySummary {
    family: String,
    #[serde(rename = "type")]
    anomaly_type: &'static str,
    kind: &'static str,
    frame: Rows,
    grid: usize,
    c: f64,
    #[serde(rename = "C")]
    big_c: f64,
    mean: f64,
    min: f64,
    max: f64,
    first_integral_residual: f64,
}

#[derive(Serialize)]
struct DensityJson {
    #[serde(flatten)]
    summary: DensitySummary,
    theta: Vec<f64>,
    rho0: Vec<f64>,
    kappa: Option<Vec<f64>>,
    #[serde(rename = "K")]
    big_k: Option<Vec<f64>>,
}

#[derive(Serialize)]
struct SupportJson {
    family: String,
    #[serde(rename = "type")]
    anomaly_type: &'static str,
    frame: Rows,
    lambda_sign: f64,
    support: Vec<SupportPointJson>,
}

#[derive(Serialize)]
struct SupportPointJson {
    theta: f64,
    stability: &'static str,
}

fn density_csv(p: &DensityProfile) -> Result<String, CliError> {
    let opt = |v: &Option<Vec<f64>>, i: usize| v.as_ref().map(|v| fmt17(v[i])).unwrap_or_default();
    let rows = (0..p.len()).map(|i| vec![fmt17(p.theta[i]), fmt17(p.rho0[i]), opt(&p.kappa, i), opt(&p.big_k, i)]);
    Ok(to_csv(&["theta", "rho0", "kappa", "K"], rows)?)
}

/// ρ₀ on the grid for elliptic and diffusive families; the attracting and
/// repelling directions for hyperbolic and parabolic ones (JSON only).
pub fn cmd_density(s: &Settings) -> Result<Output, CliError> {
    let (f, r) = classify(s)?;
    let profile = match r.anomaly_type {
        AnomalyType::Elliptic => rho0_elliptic(&r, s.grid)?,
        AnomalyType::Diffusive => rho0_diffusive(&r, s.grid)?,
        AnomalyType::Hyperbolic | AnomalyType::Parabolic => {
            if s.format == Some(Format::Csv) {
                return Err(CoreError::TypeMismatch { expected: "elliptic or diffusive", found: r.anomaly_type.as_str() }.into());
            }
            let sign = if s.lambda < 0.0 { -1.0 } else { 1.0 };
            let pts = support_points(&r, sign)?;
            return Ok(Output::json(&SupportJson {
                family: f.name.clone(),
                anomaly_type: r.anomaly_type.as_str(),
                frame: rows(&r.basis),
                lambda_sign: sign,
                support: pts
                    .iter()
                    .map(|p| SupportPointJson { theta: p.theta, stability: p.stability.as_str() })
                    .collect(),
            }));
        }
    };
    let summary = DensitySummary {
        family: f.name.clone(),
        anomaly_type: r.anomaly_type.as_str(),
        kind: match profile.kind {
            DensityKind::Elliptic => "elliptic",
            DensityKind::Diffusive => "diffusive",
        },
        frame: rows(&r.basis),
        grid: profile.len(),
        c: profile.c,
        big_c: profile.big_c,
        mean: profile.average(|_| 1.0),
        min: profile.rho0.iter().copied().fold(f64::INFINITY, f64::min),
        max: profile.rho0.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        first_integral_residual: first_integral_residual(&r, &profile),
    };
    match s.format.unwrap_or(Format::Csv) {
        Format::Csv => Ok(Output { primary: density_csv(&profile)?, summary: Some(to_json(&summary)) }),
        Format::Json => Ok(Output::json(&DensityJson {
            summary,
            theta: profile.theta,
            rho0: profile.rho0,
            kappa: profile.kappa,
            big_k: profile.big_k,
        })),
    }
}

#[derive(Serialize)]
struct BothJson {
    family: String,
    mc: LyapJson,
    perturbative: CoeffJson,
    /// `value · |λ|^exponent`.
    predicted_gamma: f64,
    ratio: f64,
}

pub fn cmd_gamma(s: &Settings) -> Result<Output, CliError> {
    only_json(s, "gamma")?;
    let f = s.family()?;
    let coeff = |f: &FamilySpec| -> Result<(PerturbativeCoeff, AnomalyType), CliError> {
        let r = classify_anomaly(f, s.kmax)?;
        Ok((perturbative_coeff(&r, s.grid)?, r.anomaly_type))
    };
    let mc = || -> Result<LyapEstimate, CliError> {
        let p = mc_params(s, s.lambda);
        Ok(with_threads(s.threads, || mc_gamma_par(&f, p))??)
    };
    match s.mode {
        Mode::Perturbative => {
            let (c, ty) = coeff(&f)?;
            Ok(Output::json(&CoeffJson::new(&c, ty)))
        }
        Mode::Mc => Ok(Output::json(&LyapJson::from(&mc()?))),
        Mode::Both => {
            let (c, ty) = coeff(&f)?;
            let est = mc()?;
            let predicted = c.value * s.lambda.abs().powf(c.order.exponent());
            Ok(Output::json(&BothJson {
                family: f.name.clone(),
                mc: LyapJson::from(&est),
                perturbative: CoeffJson::new(&c, ty),
                predicted_gamma: predicted,
                ratio: est.gamma / predicted,
            }))
        }
    }
}

#[derive(Serialize)]
struct FitJson {
    family: String,
    #[serde(rename = "type")]
    anomaly_type: &'static str,
    order: &'static str,
    expected_exponent: f64,
    exponent: Option<f64>,
    prefactor: Option<f64>,
    dropped: Vec<f64>,
    fitted_coefficient: f64,
    perturbative_value: f64,
}

#[derive(Serialize)]
struct SweepJson {
    #[serde(flatten)]
    fit: FitJson,
    estimates: Vec<LyapJson>,
}

fn sweep_csv(r: &SweepResult) -> Result<String, CliError> {
    let rows = r.estimates.iter().map(|e| {
        vec![
            fmt17(e.lambda),
            fmt17(e.gamma),
            fmt17(e.stderr),
            e.chains.to_string(),
            e.steps_per_chain.to_string(),
            e.seed.to_string(),
        ]
    });
    Ok(to_csv(&["lambda", "gamma", "stderr", "chains", "steps", "seed"], rows)?)
}

pub fn cmd_sweep(s: &Settings) -> Result<Output, CliError> {
    let ladder = s
        .ladder
        .as_deref()
        .ok_or_else(|| CliError::validation("sweep needs --ladder X1,X2,..."))?;
    let (f, r) = classify(s)?;
    let order = CoeffOrder::for_type(r.anomaly_type);
    let value = perturbative_coeff(&r, s.grid)?.value;
    let base = mc_params(s, ladder[0]);
    let res = with_threads(s.threads, || sweep_par(&f, ladder, base, order))??;
    let fit = FitJson {
        family: f.name.clone(),
        anomaly_type: r.anomaly_type.as_str(),
        order: order.as_str(),
        expected_exponent: order.exponent(),
        exponent: res.fit.as_ref().map(|x| x.exponent),
        prefactor: res.fit.as_ref().map(|x| x.prefactor),
        dropped: res.fit.as_ref().map(|x| x.dropped.clone()).unwrap_or_default(),
        fitted_coefficient: res.fitted_coefficient,
        perturbative_value: value,
    };
    match s.format.unwrap_or(Format::Csv) {
        Format::Csv => Ok(Output { primary: sweep_csv(&res)?, summary: Some(to_json(&fit)) }),
        Format::Json => Ok(Output::json(&SweepJson { fit, estimates: res.estimates.iter().map(LyapJson::from).collect() })),
    }
}

#[derive(Serialize)]
struct ParamJson {
    name: &'static str,
    default: f64,
    help: &'static str,
}

#[derive(Serialize)]
struct EntryJson {
    name: &'static str,
    help: &'static str,
    params: Vec<ParamJson>,
}

impl From<&CatalogEntry> for EntryJson {
    fn from(e: &CatalogEntry) -> Self {
        EntryJson {
            name: e.name,
            help: e.help,
            params: e.params.iter().map(|p| ParamJson { name: p.name, default: p.default, help: p.help }).collect(),
        }
    }
}

#[derive(Serialize)]
struct MaterializedJson {
    family: FamilySource,
}

/// No name: every entry. An exact name: the built family as a config
/// document (`{"family": {"inline": ...}}`). A prefix: matching entries.
pub fn cmd_catalog(s: &Settings, name: Option<&str>) -> Result<Output, CliError> {
    only_json(s, "catalog")?;
    let Some(name) = name else {
        let all: Vec<EntryJson> = catalog::CATALOG.iter().map(EntryJson::from).collect();
        return Ok(Output::json(&all));
    };
    if let Some(entry) = catalog::lookup(name) {
        let params = s.family.as_ref().map(|f| f.params.clone()).unwrap_or_default();
        let src = FamilySource { catalog: Some(entry.name.into()), params, inline: None };
        let f = src.build()?;
        return Ok(Output::json(&MaterializedJson {
            family: FamilySource { inline: Some(InlineFamily::from_family(&f)), ..Default::default() },
        }));
    }
    let hits: Vec<EntryJson> = catalog::CATALOG
        .iter()
        .filter(|e| e.name.starts_with(name))
        .map(EntryJson::from)
        .collect();
    if hits.is_empty() {
        return Err(CliError::validation(format!("unknown catalog entry '{name}'")));
    }
    Ok(Output::json(&hits))
}
