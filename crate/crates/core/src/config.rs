//! Line-based `key = value` experiment configs with `#` comments.

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{parse_body, ConvexRing};
use crate::homotopy::RunConfig;
use crate::pde::Scheme;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Solve,
    Borell,
    HarmonicHomotopy,
    DataHomotopy,
    Theorem12,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Solve => "solve",
            ExperimentKind::Borell => "borell",
            ExperimentKind::HarmonicHomotopy => "harmonic-homotopy",
            ExperimentKind::DataHomotopy => "data-homotopy",
            ExperimentKind::Theorem12 => "theorem12",
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.replace('_', "-").as_str() {
            "solve" => ExperimentKind::Solve,
            "borell" => ExperimentKind::Borell,
            "harmonic-homotopy" => ExperimentKind::HarmonicHomotopy,
            "data-homotopy" | "initial-data-homotopy" => ExperimentKind::DataHomotopy,
            "theorem12" => ExperimentKind::Theorem12,
            _ => return Err(Error::invalid(format!("unknown experiment `{s}`"))),
        })
    }
}

/// Initial data of the `solve` experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialData {
    /// `u0 = 0` in the ring (the Borell problem).
    Zero,
    /// `Δu0 = poisson_c`.
    Poisson,
}

#[derive(Clone, Debug, Serialize)]
pub struct LabConfig {
    pub experiment: Option<ExperimentKind>,
    pub outer: String,
    pub inner: String,
    pub initial: InitialData,
    pub run: RunConfig,
    /// Rerun the data homotopy at `2ε`.
    pub sensitivity: bool,
    pub workers: Option<usize>,
    /// Directory that relative `support` paths are resolved against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl Default for LabConfig {
    fn default() -> Self {
        LabConfig {
            experiment: None,
            outer: "ball 0 0 2".into(),
            inner: "ball 0 0 1".into(),
            initial: InitialData::Zero,
            run: RunConfig::default(),
            sensitivity: true,
            workers: None,
            base_dir: None,
        }
    }
}

impl LabConfig {
    pub fn ring(&self) -> Result<ConvexRing> {
        let m = self.run.grid.angles;
        let dir = self.base_dir.as_deref();
        ConvexRing::new(parse_body(&self.outer, m, dir)?, parse_body(&self.inner, m, dir)?)
    }

    pub fn params(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

pub const KEYS: &[&str] = &[
    "experiment",
    "outer",
    "inner",
    "initial",
    "grid_n",
    "angles",
    "padding",
    "scheme",
    "dt",
    "t_end",
    "save_stride",
    "cg_tol",
    "levels",
    "qc_tol",
    "rank_tol",
    "probes",
    "pairs",
    "time_tol",
    "kappa_floor",
    "positivity_stride",
    "steps",
    "s_steps",
    "epsilon",
    "poisson_c",
    "force",
    "seed",
    "workers",
    "sensitivity",
];

/// Keys that every config file must set.
pub const REQUIRED: &[&str] = &["outer", "inner"];

fn number<T: FromStr>(value: &str) -> std::result::Result<T, String> {
    value.parse::<T>().map_err(|_| format!("cannot parse `{value}`"))
}

fn float(value: &str, ok: impl Fn(f64) -> bool, range: &str) -> std::result::Result<f64, String> {
    let v: f64 = number(value)?;
    if v.is_finite() && ok(v) {
        Ok(v)
    } else {
        Err(format!("{value} is out of range ({range})"))
    }
}

fn count(value: &str, min: usize) -> std::result::Result<usize, String> {
    let v: usize = number(value)?;
    if v >= min {
        Ok(v)
    } else {
        Err(format!("{value} is out of range (at least {min})"))
    }
}

fn boolean(value: &str) -> std::result::Result<bool, String> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("expected true or false, got `{value}`")),
    }
}

fn set(cfg: &mut LabConfig, key: &str, value: &str) -> std::result::Result<(), String> {
    let pos = |v: f64| v > 0.0;
    let run = &mut cfg.run;
    match key {
        "experiment" => cfg.experiment = Some(value.parse().map_err(|e: Error| e.to_string())?),
        "outer" => cfg.outer = value.to_string(),
        "inner" => cfg.inner = value.to_string(),
        "initial" => {
            cfg.initial = match value {
                "zero" => InitialData::Zero,
                "poisson" => InitialData::Poisson,
                _ => return Err(format!("initial must be zero or poisson, got `{value}`")),
            }
        }
        "grid_n" => run.grid.n = count(value, 16)?,
        "angles" => run.grid.angles = count(value, 16)?,
        "padding" => run.grid.padding = float(value, |v| (0.0..1.0).contains(&v), "[0, 1)")?,
        "scheme" => run.heat.scheme = value.parse::<Scheme>().map_err(|e| e.to_string())?,
        "dt" => run.heat.dt = float(value, pos, "> 0")?,
        "t_end" => run.heat.t_end = float(value, pos, "> 0")?,
        "save_stride" => run.heat.save_stride = count(value, 1)?,
        "cg_tol" => run.heat.cg_tol = float(value, |v| v > 0.0 && v < 1.0, "(0, 1)")?,
        "levels" => run.analysis.levels = count(value, 1)?,
        "qc_tol" => run.analysis.qc_tol = float(value, pos, "> 0")?,
        "rank_tol" => run.analysis.rank_tol = float(value, pos, "> 0")?,
        "probes" => run.analysis.probes = count(value, 4)?,
        "pairs" => run.analysis.pairs = count(value, 1)?,
        "time_tol" => run.analysis.time_tol = Some(float(value, pos, "> 0")?),
        "kappa_floor" => run.analysis.kappa_floor = Some(float(value, |v| v >= 0.0, ">= 0")?),
        "positivity_stride" => run.analysis.positivity_stride = count(value, 1)?,
        "steps" => run.steps = count(value, 1)?,
        "s_steps" => run.s_steps = count(value, 2)?,
        "epsilon" => run.epsilon = Some(float(value, pos, "> 0")?),
        "poisson_c" => run.poisson_c = float(value, |_| true, "finite")?,
        "force" => run.force = boolean(value)?,
        "seed" => run.analysis.seed = number(value)?,
        "workers" => cfg.workers = Some(count(value, 1)?),
        "sensitivity" => cfg.sensitivity = boolean(value)?,
        _ => return Err(format!("unknown key `{key}`")),
    }
    Ok(())
}

/// Parses config text. Errors carry the 1-based line number (0 for a
/// missing required key).
pub fn parse_config_str(text: &str, base_dir: Option<&Path>) -> Result<LabConfig> {
    let mut cfg = LabConfig {
        base_dir: base_dir.map(Path::to_path_buf),
        ..LabConfig::default()
    };
    let mut seen = HashSet::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let err = |message: String| Error::Config { line, message };
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| err(format!("expected `key = value`, got `{content}`")))?;
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(err(format!("unknown key `{key}`")));
        }
        if !seen.insert(key.to_string()) {
            return Err(err(format!("duplicate key `{key}`")));
        }
        if value.is_empty() {
            return Err(err(format!("key `{key}` has no value")));
        }
        set(&mut cfg, key, value).map_err(|m| err(format!("{key}: {m}")))?;
    }
    for key in REQUIRED {
        if !seen.contains(*key) {
            return Err(Error::Config {
                line: 0,
                message: format!("missing required key `{key}`"),
            });
        }
    }
    Ok(cfg)
}

pub fn parse_config(path: &Path) -> Result<LabConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
        line: 0,
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    parse_config_str(&text, path.parent())
}
