//! Flat `key = value` run configuration.
//!
//! ```text
//! # right panel of the two-level comparison
//! model = open
//! e1.intercept = 1
//! e1.slope = -0.5
//! e2.slope = 1
//! gamma1.intercept = 1
//! gamma2.intercept = 1
//! coupling = 0+0.05i
//! range.min = 0
//! range.max = 1.2
//! grid.n = 1201
//! ```
//!
//! Every key is validated before any computation runs; unknown or repeated
//! keys are rejected with the offending line number.

use num_complex::Complex64;
use std::collections::BTreeMap;
use thiserror::Error;

use crate::ep::{SearchBox, DEFAULT_EP_TOL};
use crate::model::{AffineLaw, ComplexScalar, CouplingModel, ModelKind, ParamTrajectory, PtVariant};
use crate::scattering::{LineSource, ResonancePair};
use crate::sweep::{fig1_presets, ExportFormat};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key `{key}`")]
    Duplicate { line: usize, key: String },
    #[error("line {line}: bad value for `{key}`: {msg}")]
    BadValue { line: usize, key: String, msg: String },
    #[error("{0}")]
    Invalid(String),
}

const KEYS: &[&str] = &[
    "preset",
    "model",
    "e.intercept",
    "e.slope",
    "e1.intercept",
    "e1.slope",
    "e2.intercept",
    "e2.slope",
    "gamma.intercept",
    "gamma.slope",
    "gamma1.intercept",
    "gamma1.slope",
    "gamma2.intercept",
    "gamma2.slope",
    "coupling",
    "coupling.model",
    "range.min",
    "range.max",
    "grid.n",
    "tol",
    "output",
    "format",
    "search",
    "box.p_min",
    "box.p_max",
    "box.q_min",
    "box.q_max",
    "mean.energy",
    "mean.gamma",
    "lineshape.kind",
    "lineshape.e1",
    "lineshape.g1",
    "lineshape.e2",
    "lineshape.g2",
    "lineshape.e_d",
    "lineshape.g_d",
    "lineshape.at",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchMode {
    OneD,
    TwoD,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LineSpec {
    Fixed(LineSource),
    /// Eigenvalues of the trajectory at this parameter value.
    FromTrajectory(f64),
}

/// Validated run configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub trajectory: ParamTrajectory,
    pub range: Option<(f64, f64)>,
    pub grid_n: Option<usize>,
    pub tol: f64,
    pub output: Option<String>,
    pub format: ExportFormat,
    pub search: SearchMode,
    pub search_box: Option<SearchBox>,
    pub mean_energy: f64,
    pub mean_gamma: f64,
    pub line: Option<LineSpec>,
}

struct Entry {
    line: usize,
    value: String,
}

struct Raw(BTreeMap<String, Entry>);

impl Raw {
    fn get(&self, key: &str) -> Option<&Entry> {
        self.0.get(key)
    }

    fn has(&self, key: &str) -> bool {
        self.0.contains_key(key)
    }

    fn bad(&self, key: &str, msg: impl Into<String>) -> ConfigError {
        ConfigError::BadValue {
            line: self.0.get(key).map_or(0, |e| e.line),
            key: key.to_string(),
            msg: msg.into(),
        }
    }

    fn real(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.get(key) {
            None => Ok(None),
            Some(e) => match e.value.parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(Some(x)),
                _ => Err(self.bad(key, format!("`{}` is not a finite number", e.value))),
            },
        }
    }

    fn real_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        Ok(self.real(key)?.unwrap_or(default))
    }

    fn law(&self, prefix: &str, default: AffineLaw) -> Result<AffineLaw, ConfigError> {
        Ok(AffineLaw::new(
            self.real_or(&format!("{prefix}.intercept"), default.intercept)?,
            self.real_or(&format!("{prefix}.slope"), default.slope)?,
        ))
    }

    fn text(&self, key: &str) -> Option<&str> {
        self.get(key).map(|e| e.value.as_str())
    }
}

/// Parses `re+imi`, `re-imi`, `re`, or `imi` (e.g. `0+0.05i`, `-0.05i`).
pub fn parse_complex(s: &str) -> Option<Complex64> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return None;
    }
    let Some(body) = s.strip_suffix('i') else {
        return s.parse::<f64>().ok().map(|re| Complex64::new(re, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let parse_im = |t: &str| match t {
        "" | "+" => Some(1.0),
        "-" => Some(-1.0),
        t => t.parse::<f64>().ok(),
    };
    match split {
        Some(k) => {
            let re = body[..k].parse::<f64>().ok()?;
            let im = parse_im(&body[k..])?;
            Some(Complex64::new(re, im))
        }
        None => parse_im(body).map(|im| Complex64::new(0.0, im)),
    }
}

fn tokenize(text: &str) -> Result<Raw, ConfigError> {
    let mut map: BTreeMap<String, Entry> = BTreeMap::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((k, v)) = content.split_once('=') else {
            return Err(ConfigError::Syntax { line });
        };
        let (key, value) = (k.trim(), v.trim());
        if key.is_empty() || value.is_empty() {
            return Err(ConfigError::Syntax { line });
        }
        if !KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey {
                line,
                key: key.to_string(),
            });
        }
        if map.contains_key(key) {
            return Err(ConfigError::Duplicate {
                line,
                key: key.to_string(),
            });
        }
        map.insert(
            key.to_string(),
            Entry {
                line,
                value: value.to_string(),
            },
        );
    }
    Ok(Raw(map))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let raw = tokenize(text)?;

        let presets = fig1_presets();
        let (base, preset_range) = match raw.text("preset") {
            None => (None, None),
            Some("fig1-left") => (Some(presets.left.trajectory), Some((presets.left.a_min, presets.left.a_max))),
            Some("fig1-right") => (Some(presets.right.trajectory), Some((presets.right.a_min, presets.right.a_max))),
            Some(other) => return Err(raw.bad("preset", format!("unknown preset `{other}`"))),
        };

        let kind = match raw.text("model") {
            Some(s) => s.parse::<ModelKind>().map_err(|e| raw.bad("model", e.to_string()))?,
            None => base.map(|t| t.kind).unwrap_or(ModelKind::Open),
        };
        let is_pt = kind != ModelKind::Open;
        let family_keys: &[&str] = if is_pt {
            &["e1.intercept", "e1.slope", "e2.intercept", "e2.slope", "gamma1.intercept", "gamma1.slope", "gamma2.intercept", "gamma2.slope"]
        } else {
            &["e.intercept", "e.slope", "gamma.intercept", "gamma.slope"]
        };
        if let Some(k) = family_keys.iter().find(|k| raw.has(k)) {
            return Err(raw.bad(k, format!("not used by model `{}`", kind.as_str())));
        }

        let coupling_value = match raw.get("coupling") {
            Some(e) => {
                let z = parse_complex(&e.value).ok_or_else(|| raw.bad("coupling", format!("`{}` is not a complex literal", e.value)))?;
                ComplexScalar::try_from_complex(z).map_err(|e| raw.bad("coupling", e.to_string()))?
            }
            None => base.map(|t| t.coupling.base()).unwrap_or(ComplexScalar::ZERO),
        };
        let coupling = match raw.text("coupling.model") {
            None => match base.map(|t| t.coupling) {
                Some(CouplingModel::GaussianFalloff { .. }) => CouplingModel::GaussianFalloff { base: coupling_value },
                _ => CouplingModel::Constant { value: coupling_value },
            },
            Some("constant") => CouplingModel::Constant { value: coupling_value },
            Some("gaussian") => CouplingModel::GaussianFalloff { base: coupling_value },
            Some(other) => return Err(raw.bad("coupling.model", format!("`{other}` (expected constant or gaussian)"))),
        };

        let zero = AffineLaw::default();
        let trajectory = if is_pt {
            let variant = if kind == ModelKind::PtBalanced {
                PtVariant::BalancedGainLoss
            } else {
                PtVariant::LossyOnly
            };
            let b = base.filter(|t| t.kind != ModelKind::Open);
            ParamTrajectory::pt(
                variant,
                raw.law("e", b.map_or(zero, |t| t.energy1))?,
                raw.law("gamma", b.map_or(zero, |t| t.width1))?,
                coupling,
            )
        } else {
            let b = base.filter(|t| t.kind == ModelKind::Open);
            ParamTrajectory::open(
                raw.law("e1", b.map_or(zero, |t| t.energy1))?,
                raw.law("e2", b.map_or(zero, |t| t.energy2))?,
                raw.law("gamma1", b.map_or(zero, |t| t.width1))?,
                raw.law("gamma2", b.map_or(zero, |t| t.width2))?,
                coupling,
            )
        };

        let range = match (raw.real("range.min")?, raw.real("range.max")?) {
            (Some(lo), Some(hi)) => Some((lo, hi)),
            (None, None) => preset_range,
            (Some(_), None) => return Err(raw.bad("range.min", "range.max is missing")),
            (None, Some(_)) => return Err(raw.bad("range.max", "range.min is missing")),
        };
        if let Some((lo, hi)) = range {
            if !(lo < hi) {
                return Err(raw.bad("range.max", "range.max must exceed range.min"));
            }
        }

        let grid_n = match raw.get("grid.n") {
            None => None,
            Some(e) => Some(e.value.parse::<usize>().map_err(|_| raw.bad("grid.n", format!("`{}` is not a count", e.value)))?),
        };
        let tol = raw.real_or("tol", DEFAULT_EP_TOL)?;
        if tol <= 0.0 {
            return Err(raw.bad("tol", "must be positive"));
        }
        let format = match raw.text("format") {
            None => ExportFormat::Csv,
            Some(s) => s.parse().map_err(|e: String| raw.bad("format", e))?,
        };
        let search = match raw.text("search") {
            None | Some("1d") => SearchMode::OneD,
            Some("2d") => SearchMode::TwoD,
            Some(other) => return Err(raw.bad("search", format!("`{other}` (expected 1d or 2d)"))),
        };
        let box_keys = ["box.p_min", "box.p_max", "box.q_min", "box.q_max"];
        let search_box = if box_keys.iter().any(|k| raw.has(k)) {
            let mut v = [0.0; 4];
            for (slot, k) in v.iter_mut().zip(box_keys) {
                *slot = raw.real(k)?.ok_or_else(|| ConfigError::Invalid(format!("`{k}` is required with a search box")))?;
            }
            if !(v[0] < v[1]) {
                return Err(raw.bad("box.p_max", "box.p_max must exceed box.p_min"));
            }
            if !(v[2] < v[3]) {
                return Err(raw.bad("box.q_max", "box.q_max must exceed box.q_min"));
            }
            Some(SearchBox {
                p_min: v[0],
                p_max: v[1],
                q_min: v[2],
                q_max: v[3],
            })
        } else {
            None
        };

        let line = match raw.text("lineshape.kind") {
            None => None,
            Some("pair") => {
                let need = |k: &str| raw.real(k)?.ok_or_else(|| ConfigError::Invalid(format!("`{k}` is required for lineshape.kind = pair")));
                let pair = ResonancePair::new(need("lineshape.e1")?, need("lineshape.g1")?, need("lineshape.e2")?, need("lineshape.g2")?)
                    .map_err(|e| raw.bad("lineshape.kind", e.to_string()))?;
                Some(LineSpec::Fixed(LineSource::Pair(pair)))
            }
            Some("double-pole") => {
                let e_d = raw.real("lineshape.e_d")?.unwrap_or(0.0);
                let g_d = raw.real("lineshape.g_d")?.ok_or_else(|| ConfigError::Invalid("`lineshape.g_d` is required for a double pole".into()))?;
                if g_d <= 0.0 {
                    return Err(raw.bad("lineshape.g_d", "must be positive"));
                }
                Some(LineSpec::Fixed(LineSource::DoublePole { e_d, g_d }))
            }
            Some("trajectory") => {
                let at = raw.real("lineshape.at")?.ok_or_else(|| ConfigError::Invalid("`lineshape.at` is required for lineshape.kind = trajectory".into()))?;
                Some(LineSpec::FromTrajectory(at))
            }
            Some(other) => return Err(raw.bad("lineshape.kind", format!("`{other}` (expected pair, double-pole or trajectory)"))),
        };

        Ok(RunConfig {
            trajectory,
            range,
            grid_n,
            tol,
            output: raw.text("output").map(str::to_string),
            format,
            search,
            search_box,
            mean_energy: raw.real_or("mean.energy", 0.0)?,
            mean_gamma: raw.real_or("mean.gamma", 0.0)?,
            line,
        })
    }
}
