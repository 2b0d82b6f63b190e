//! Experiment reports (JSON schema v1).

use serde::Serialize;

use crate::convexity::{PositivityReport, RankTimeline, SpaceTimeLevel};

pub const SCHEMA_VERSION: u32 = 1;

/// One saved time of a rank timeline.
#[derive(Clone, Debug, Serialize)]
pub struct RankPoint {
    pub t: f64,
    pub rank: Option<usize>,
    pub rank_relaxed: Option<usize>,
    pub min_phi: Option<f64>,
    pub min_gauss: Option<f64>,
    pub min_eigenvalue: Option<f64>,
}

/// Per-level outcome of a space-time analysis.
#[derive(Clone, Debug, Serialize)]
pub struct LevelEntry {
    pub c: f64,
    /// `convex && strict && rank_monotone && rank_monotone_relaxed`.
    pub pass: bool,
    /// Space-time superlevel set passes the midpoint and slice tests.
    pub convex: bool,
    /// Smallest sampled principal curvature exceeds the floor.
    pub strict: bool,
    /// Worst hitting-time midpoint violation.
    pub worst_violation: f64,
    /// Worst slice hull depth.
    pub spatial_violation: f64,
    pub min_rank_series: Vec<RankPoint>,
    pub rank_monotone: bool,
    pub rank_monotone_relaxed: bool,
    pub rank_gaps: usize,
    pub min_gauss: Option<f64>,
    pub min_eigenvalue: Option<f64>,
    /// `(x, y, t)` of `min_eigenvalue`.
    pub argmin: Option<[f64; 3]>,
}

impl LevelEntry {
    pub fn from_parts(check: &SpaceTimeLevel, timeline: &RankTimeline, kappa_floor: f64) -> Self {
        let min = timeline.min_principal_curvature();
        let series = timeline
            .entries
            .iter()
            .map(|e| RankPoint {
                t: e.t,
                rank: e.min_rank,
                rank_relaxed: e.min_rank_relaxed,
                min_phi: e.min_phi,
                min_gauss: e.min_gauss,
                min_eigenvalue: e.min_eigenvalue,
            })
            .collect();
        let rank_gaps = timeline.entries.iter().filter(|e| e.min_rank.is_none()).count();
        let strict = min.as_ref().is_some_and(|m| m.min_eigenvalue > kappa_floor);
        LevelEntry {
            c: check.c,
            pass: check.pass && strict && timeline.monotone && timeline.monotone_relaxed,
            convex: check.pass,
            strict,
            worst_violation: check.midpoint_violation,
            spatial_violation: check.spatial_violation,
            min_rank_series: series,
            rank_monotone: timeline.monotone,
            rank_monotone_relaxed: timeline.monotone_relaxed,
            rank_gaps,
            min_gauss: min.as_ref().map(|m| m.min_gauss),
            min_eigenvalue: min.as_ref().map(|m| m.min_eigenvalue),
            argmin: min.map(|m| m.location),
        }
    }
}

/// Minima of `u_t` and `|∇u|` over `t ≥ from`.
#[derive(Clone, Debug, Serialize)]
pub struct PositivitySummary {
    pub from: f64,
    pub min_ut: f64,
    pub min_grad: f64,
    pub probes: usize,
    pub series: Vec<[f64; 3]>,
}

impl PositivitySummary {
    pub fn new(report: &PositivityReport, from: f64) -> Self {
        let (min_ut, min_grad) = report.minima_from(from);
        PositivitySummary {
            from,
            min_ut,
            min_grad,
            probes: report.probes,
            series: report.entries.iter().map(|e| [e.t, e.min_ut, e.min_grad]).collect(),
        }
    }

    pub fn positive(&self) -> bool {
        self.min_ut > 0.0 && self.min_grad > 0.0
    }
}

/// Result of a full space-time analysis of one solution.
#[derive(Clone, Debug, Serialize)]
pub struct SpaceTimeAnalysis {
    pub pass: bool,
    /// Every level passes the space-time convexity test.
    pub convex: bool,
    /// Every level has sampled principal curvatures above the floor.
    pub strict: bool,
    /// Every rank timeline is nondecreasing at both thresholds.
    pub rank_monotone: bool,
    pub time_tolerance: f64,
    pub space_tolerance: f64,
    pub kappa_floor: f64,
    pub min_eigenvalue: Option<f64>,
    pub min_gauss: Option<f64>,
    pub argmin: Option<[f64; 3]>,
    pub per_level: Vec<LevelEntry>,
    pub positivity: PositivitySummary,
}

/// One rung of a homotopy ladder.
#[derive(Clone, Debug, Serialize)]
pub struct StepReport {
    pub index: usize,
    /// Homotopy parameter (`t_k` or `s`).
    pub parameter: f64,
    pub pass: bool,
    pub error: Option<String>,
    pub min_curvature: Option<f64>,
    pub min_gauss: Option<f64>,
    pub argmin: Option<Vec<f64>>,
    /// Worst spatial hull depth over the ladder (harmonic steps).
    pub spatial_violation: Option<f64>,
    pub skipped_probes: usize,
    /// Error against a closed form or reference run, where one exists.
    pub reference_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analysis: Option<SpaceTimeAnalysis>,
}

/// Checks on initial data: range, `Δu0 ≥ 0` and spatial quasiconcavity.
#[derive(Clone, Debug, Serialize)]
pub struct InitialDataChecks {
    pub min_laplacian: f64,
    pub in_range: bool,
    pub quasiconcave: bool,
    pub worst_violation: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub experiment: String,
    pub params: serde_json::Value,
    /// Values resolved from defaults at run time (epsilon, floors, tolerances).
    pub resolved: serde_json::Map<String, serde_json::Value>,
    pub pass: bool,
    pub failures: Vec<String>,
    pub notes: Vec<String>,
    pub per_level: Vec<LevelEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analysis: Option<SpaceTimeAnalysis>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_data: Option<InitialDataChecks>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub steps: Vec<StepReport>,
    pub wall_time: f64,
}

impl ExperimentReport {
    pub fn new(experiment: &str, params: serde_json::Value) -> Self {
        ExperimentReport {
            schema_version: SCHEMA_VERSION,
            experiment: experiment.to_string(),
            params,
            resolved: serde_json::Map::new(),
            pass: true,
            failures: Vec::new(),
            notes: Vec::new(),
            per_level: Vec::new(),
            analysis: None,
            initial_data: None,
            steps: Vec::new(),
            wall_time: 0.0,
        }
    }

    pub fn fail(&mut self, reason: impl Into<String>) {
        self.pass = false;
        self.failures.push(reason.into());
    }

    pub fn resolve(&mut self, key: &str, value: impl Serialize) {
        self.resolved.insert(
            key.to_string(),
            serde_json::to_value(value).unwrap_or(serde_json::Value::Null),
        );
    }

    /// Pretty JSON with `wall_time` zeroed, for determinism comparisons.
    pub fn to_json_without_wall_time(&self) -> String {
        let mut copy = self.clone();
        copy.wall_time = 0.0;
        serde_json::to_string_pretty(&copy).expect("report serializes")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Field documentation printed by `schema`.
pub fn schema_text() -> String {
    format!(
        "\
ringlab report schema v{SCHEMA_VERSION}

experiment        string   borell | harmonic_homotopy | initial_data_homotopy | theorem12 | solve
schema_version    integer  {SCHEMA_VERSION}
params            object   the full run configuration, defaults filled in
resolved          object   values derived at run time (epsilon, kappa_floor, time_tol, ...)
pass              bool     overall verdict
failures          [string] reasons for a failing verdict
notes             [string] informational remarks
per_level         array    one entry per ladder level:
  c                    level value
  pass                 convex, strict and both rank flags hold
  convex               hitting-time midpoint test and slice hull test pass
  strict               min_eigenvalue exceeds kappa_floor
  worst_violation      largest hitting-time midpoint violation
  spatial_violation    largest hull depth of a slice level curve
  min_rank_series      [{{t, rank, rank_relaxed, min_phi, min_gauss, min_eigenvalue}}]
  rank_monotone        minimal rank nondecreasing in t at rank_tol
  rank_monotone_relaxed  same at 10 x rank_tol
  rank_gaps            saved times without a usable probe
  min_gauss            smallest Gauss curvature of the space-time level surface
  min_eigenvalue       smallest principal curvature
  argmin               [x, y, t] of min_eigenvalue
analysis          object   (space-time runs) tolerances, minima and positivity series
initial_data      object   (theorem12) min_laplacian, in_range, quasiconcave, worst_violation, pass
steps             array    (homotopies) {{index, parameter, pass, error, min_curvature, min_gauss,
                           argmin, spatial_violation, skipped_probes, reference_error, analysis}}
wall_time         number   seconds; the only field that varies between identical runs
"
    )
}
