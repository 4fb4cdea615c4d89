//! Run configuration: JSON file schema, command-line overrides and the
//! inline family format.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anomaly_core::catalog;
use anomaly_core::family::{Atom, Factor, FamilySpec};
use anomaly_core::mat2::Mat2;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_CHAINS: u32 = 8;
pub const DEFAULT_STEPS: u64 = 1_000_000;
pub const DEFAULT_LAMBDA: f64 = 0.05;
pub const DEFAULT_GRID: usize = 2048;
pub const DEFAULT_KMAX: u32 = 4;
pub const MIN_GRID: usize = 16;
pub const THREADS_ENV: &str = "ANOMALY_THREADS";

pub type Rows = [[f64; 2]; 2];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Mc,
    Perturbative,
    Both,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub family: Option<FamilySource>,
    pub lambda: Option<f64>,
    pub ladder: Option<Vec<f64>>,
    pub seed: Option<u64>,
    pub chains: Option<u32>,
    pub steps: Option<u64>,
    pub grid: Option<usize>,
    pub kmax: Option<u32>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub threads: Option<usize>,
    pub mode: Option<Mode>,
}

/// Exactly one of `catalog` (with optional `params`) or `inline`.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySource {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub catalog: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inline: Option<InlineFamily>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineFamily {
    #[serde(default = "inline_name")]
    pub name: String,
    #[serde(default = "one")]
    pub factors_per_atom: u32,
    pub atoms: Vec<AtomConfig>,
}

fn inline_name() -> String {
    "inline".into()
}

fn one() -> u32 {
    1
}

/// `T0 + λT1 + λ²T2`, `sign·exp(λP + λ²Q)`, or a product of factors
/// applied left to right.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AtomConfig {
    Jet(JetAtom),
    Generator(GeneratorAtom),
    Product(ProductAtom),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JetAtom {
    pub weight: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(rename = "T0")]
    pub t0: Rows,
    #[serde(rename = "T1")]
    pub t1: Rows,
    #[serde(rename = "T2", default)]
    pub t2: Rows,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorAtom {
    pub weight: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub sign: f64,
    #[serde(rename = "P")]
    pub p: Rows,
    #[serde(rename = "Q", default)]
    pub q: Rows,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProductAtom {
    pub weight: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub factors: Vec<FactorConfig>,
}

/// `{"poly": [C0, C1, ...]}` is `Σ λ^i C_i`, evaluated exactly.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FactorConfig {
    Poly(PolyFactor),
    Exp(ExpFactor),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyFactor {
    pub poly: Vec<Rows>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpFactor {
    pub sign: f64,
    #[serde(rename = "P")]
    pub p: Rows,
    #[serde(rename = "Q", default)]
    pub q: Rows,
}

impl FactorConfig {
    fn to_factor(&self) -> Result<Factor, CliError> {
        match self {
            FactorConfig::Poly(PolyFactor { poly }) => {
                if poly.is_empty() {
                    return Err(CliError::validation("polynomial factor has no coefficients"));
                }
                Ok(Factor::Poly(poly.iter().map(|r| Mat2::from_rows(*r)).collect()))
            }
            FactorConfig::Exp(ExpFactor { sign, p, q }) => Ok(Factor::Exp {
                sign: check_sign(*sign)?,
                p: traceless(p, "P")?,
                q: traceless(q, "Q")?,
            }),
        }
    }

    fn from_factor(f: &Factor) -> Self {
        match f {
            Factor::Poly(c) => FactorConfig::Poly(PolyFactor { poly: c.iter().map(|m| m.to_rows()).collect() }),
            Factor::Exp { sign, p, q } => {
                FactorConfig::Exp(ExpFactor { sign: *sign, p: p.to_rows(), q: q.to_rows() })
            }
        }
    }
}

fn check_sign(s: f64) -> Result<f64, CliError> {
    if s == 1.0 || s == -1.0 {
        Ok(s)
    } else {
        Err(CliError::validation(format!("sign must be +1 or -1, got {s}")))
    }
}

fn traceless(r: &Rows, name: &str) -> Result<Mat2, CliError> {
    let m = Mat2::from_rows(*r);
    let scale = m.max_abs().max(1.0);
    if m.trace().abs() > 1e-12 * scale {
        return Err(CliError::validation(format!("{name} must be traceless, trace is {}", m.trace())));
    }
    Ok(m)
}

impl AtomConfig {
    fn to_atom(&self, index: usize) -> Result<Atom, CliError> {
        let label = |l: &Option<String>| l.clone().unwrap_or_else(|| format!("#{index}"));
        Ok(match self {
            AtomConfig::Jet(a) => Atom::new(
                a.weight,
                label(&a.label),
                vec![Factor::Poly(vec![Mat2::from_rows(a.t0), Mat2::from_rows(a.t1), Mat2::from_rows(a.t2)])],
            ),
            AtomConfig::Generator(a) => Atom::from_generators(
                a.weight,
                label(&a.label),
                check_sign(a.sign)?,
                traceless(&a.p, "P")?,
                traceless(&a.q, "Q")?,
            ),
            AtomConfig::Product(a) => {
                if a.factors.is_empty() {
                    return Err(CliError::validation(format!("atom {index} has no factors")));
                }
                let fs = a.factors.iter().map(FactorConfig::to_factor).collect::<Result<_, _>>()?;
                Atom::new(a.weight, label(&a.label), fs)
            }
        })
    }

    fn from_atom(a: &Atom) -> Self {
        let label = Some(a.label.clone());
        match a.factors.as_slice() {
            [Factor::Exp { sign, p, q }] => AtomConfig::Generator(GeneratorAtom {
                weight: a.weight,
                label,
                sign: *sign,
                p: p.to_rows(),
                q: q.to_rows(),
            }),
            fs => AtomConfig::Product(ProductAtom {
                weight: a.weight,
                label,
                factors: fs.iter().map(FactorConfig::from_factor).collect(),
            }),
        }
    }
}

impl InlineFamily {
    pub fn build(&self) -> Result<FamilySpec, CliError> {
        let atoms = self
            .atoms
            .iter()
            .enumerate()
            .map(|(i, a)| a.to_atom(i))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(FamilySpec::new(self.name.clone(), atoms, self.factors_per_atom)?)
    }

    /// Inline description that rebuilds `f` exactly.
    pub fn from_family(f: &FamilySpec) -> Self {
        InlineFamily {
            name: f.name.clone(),
            factors_per_atom: f.factors_per_atom(),
            atoms: f.atoms().iter().map(AtomConfig::from_atom).collect(),
        }
    }
}

impl FamilySource {
    pub fn build(&self) -> Result<FamilySpec, CliError> {
        match (&self.catalog, &self.inline) {
            (Some(name), None) => {
                let entry = catalog::lookup(name)
                    .ok_or_else(|| CliError::validation(format!("unknown catalog entry '{name}'")))?;
                let ov: Vec<(&str, f64)> = self.params.iter().map(|(k, v)| (k.as_str(), *v)).collect();
                Ok(entry.build(&ov)?)
            }
            (None, Some(inline)) => {
                if !self.params.is_empty() {
                    return Err(CliError::validation("'params' only applies to catalog families"));
                }
                inline.build()
            }
            (Some(_), Some(_)) => Err(CliError::validation("family has both 'catalog' and 'inline'")),
            (None, None) => Err(CliError::validation("family needs 'catalog' or 'inline'")),
        }
    }
}

/// Values given on the command line; `None` falls back to the config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub config: Option<PathBuf>,
    pub family: Option<String>,
    pub params: Vec<(String, f64)>,
    pub lambda: Option<f64>,
    pub ladder: Option<Vec<f64>>,
    pub seed: Option<u64>,
    pub chains: Option<u32>,
    pub steps: Option<u64>,
    pub grid: Option<usize>,
    pub kmax: Option<u32>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub threads: Option<usize>,
    pub mode: Option<Mode>,
}

/// Fully resolved settings for one command.
#[derive(Clone, Debug)]
pub struct Settings {
    pub family: Option<FamilySource>,
    pub lambda: f64,
    pub ladder: Option<Vec<f64>>,
    pub seed: u64,
    pub chains: u32,
    pub steps: u64,
    pub grid: usize,
    pub kmax: u32,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub threads: Option<usize>,
    pub mode: Mode,
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path.display().to_string(), e))?;
    Ok(serde_json::from_str(&text)?)
}

/// `threads_env` is the value of `ANOMALY_THREADS`, if set.
pub fn resolve(o: Overrides, threads_env: Option<&str>) -> Result<Settings, CliError> {
    let cfg = match &o.config {
        Some(p) => load_config(p)?,
        None => RunConfig::default(),
    };
    let mut family = cfg.family;
    if let Some(name) = o.family {
        family = Some(FamilySource { catalog: Some(name), ..Default::default() });
    }
    if !o.params.is_empty() {
        let fam = family.get_or_insert_with(Default::default);
        if fam.inline.is_some() {
            return Err(CliError::validation("--param only applies to catalog families"));
        }
        for (k, v) in o.params {
            fam.params.insert(k, v);
        }
    }
    let env_threads = match threads_env {
        Some(s) if !s.trim().is_empty() => Some(
            s.trim()
                .parse::<usize>()
                .map_err(|_| CliError::validation(format!("{THREADS_ENV} must be a positive integer, got '{s}'")))?,
        ),
        _ => None,
    };
    let s = Settings {
        family,
        lambda: o.lambda.or(cfg.lambda).unwrap_or(DEFAULT_LAMBDA),
        ladder: o.ladder.or(cfg.ladder),
        seed: o.seed.or(cfg.seed).unwrap_or(DEFAULT_SEED),
        chains: o.chains.or(cfg.chains).unwrap_or(DEFAULT_CHAINS),
        steps: o.steps.or(cfg.steps).unwrap_or(DEFAULT_STEPS),
        grid: o.grid.or(cfg.grid).unwrap_or(DEFAULT_GRID),
        kmax: o.kmax.or(cfg.kmax).unwrap_or(DEFAULT_KMAX),
        out: o.out.or(cfg.out),
        format: o.format.or(cfg.format),
        threads: o.threads.or(cfg.threads).or(env_threads),
        mode: o.mode.or(cfg.mode).unwrap_or(Mode::Both),
    };
    s.validate()?;
    Ok(s)
}

impl Settings {
    fn validate(&self) -> Result<(), CliError> {
        if !self.lambda.is_finite() {
            return Err(CliError::validation("lambda must be finite"));
        }
        if self.chains == 0 {
            return Err(CliError::validation("chains must be ≥ 1"));
        }
        if self.grid < MIN_GRID || !self.grid.is_multiple_of(2) {
            return Err(CliError::validation(format!("grid must be even and ≥ {MIN_GRID}, got {}", self.grid)));
        }
        if self.kmax == 0 {
            return Err(CliError::validation("kmax must be ≥ 1"));
        }
        if self.threads == Some(0) {
            return Err(CliError::validation("threads must be ≥ 1"));
        }
        if let Some(l) = &self.ladder {
            if l.iter().any(|x| !x.is_finite()) {
                return Err(CliError::validation("ladder values must be finite"));
            }
        }
        Ok(())
    }

    pub fn family(&self) -> Result<FamilySpec, CliError> {
        self.family
            .as_ref()
            .ok_or_else(|| CliError::validation("no family given (use --family NAME or a config with 'family')"))?
            .build()
    }
}

/// `k=v` with a finite float value.
pub fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected NAME=VALUE, got '{s}'"))?;
    let v: f64 = v.trim().parse().map_err(|_| format!("'{v}' is not a number"))?;
    if !v.is_finite() {
        return Err(format!("'{s}' is not finite"));
    }
    Ok((k.trim().to_string(), v))
}

/// Comma-separated floats.
pub fn parse_ladder(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| format!("'{x}' is not a number")))
        .collect()
}
