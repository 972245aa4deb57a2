//! Named, seeded experiments and the line-delimited report.
//!
//! An experiment id selects a check and its parameters, e.g.
//! `quadric-holonomy-(2,3)` or `ambient-vs-beg-sphere-5`. Each check returns
//! measured values and gates; a record passes when every gate holds.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ambient::AmbientError;
use crate::geometry::{GeometryError, MetricSpec};
use crate::homogeneous::{HomogeneousError, LoopId};
use crate::lie::{LieError, RepresentationKind, Variant};
use crate::tractor::{PathSpec, TractorError};

mod suites;

pub use suites::{random_short_arc, CHART_REGISTRY};

/// Seed used when neither the config nor the command line gives one.
pub const DEFAULT_SEED: u64 = 20_240_611;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("unknown experiment id {0}")]
    UnknownId(String),
    #[error("experiment {id} needs {what}")]
    Missing { id: String, what: &'static str },
    #[error("invalid config: {0}")]
    Config(String),
    #[error("reading {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Tractor(#[from] TractorError),
    #[error(transparent)]
    Ambient(#[from] AmbientError),
    #[error(transparent)]
    Homogeneous(#[from] HomogeneousError),
    #[error(transparent)]
    Lie(#[from] LieError),
}

/// One experiment request. Everything except `id` is optional and falls
/// back to the experiment's own defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub id: String,
    #[serde(default)]
    pub signature: Option<[usize; 2]>,
    #[serde(default)]
    pub chart: Option<String>,
    #[serde(default, rename = "loop")]
    pub loop_id: Option<LoopId>,
    #[serde(default)]
    pub variant: Option<Variant>,
    #[serde(default)]
    pub representation: Option<RepresentationKind>,
    /// Replaces the tolerance of the experiment's primary gate.
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
    /// RK4 steps per unit parameter.
    #[serde(default)]
    pub steps: Option<usize>,
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub path: Option<PathSpec>,
    /// Custom metric; chart-based experiments use it when the id names its
    /// label.
    #[serde(default)]
    pub metric: Option<MetricSpec>,
}

impl ExperimentConfig {
    pub fn new(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<(), ExperimentError> {
        if let Some(t) = self.tolerance {
            if !(t > 0.0) {
                return Err(ExperimentError::Config(format!("{}: tolerance must be positive", self.id)));
            }
        }
        if self.steps == Some(0) || self.samples == Some(0) {
            return Err(ExperimentError::Config(format!("{}: counts must be positive", self.id)));
        }
        Ok(())
    }
}

/// A config file: optional global seed and step count, then experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub steps: Option<usize>,
    #[serde(default)]
    pub experiment: Vec<ExperimentConfig>,
}

impl ConfigFile {
    /// Parse TOML, or JSON when the text starts with `{`.
    pub fn parse(text: &str) -> Result<Self, ExperimentError> {
        if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))
        } else {
            toml::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))
        }
    }

    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        let text = std::fs::read_to_string(path).map_err(|source| ExperimentError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Experiments with the global seed and steps filled in where unset.
    pub fn resolved(&self) -> Vec<ExperimentConfig> {
        self.experiment
            .iter()
            .map(|c| {
                let mut c = c.clone();
                c.seed = c.seed.or(self.seed);
                c.steps = c.steps.or(self.steps);
                c
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

/// Where the expected value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Basis {
    /// Stated outright in the source result being reproduced.
    Stated,
    /// Follows from it or from a standard identity.
    Derived,
    /// Holds by construction of the artifact.
    Construction,
}

/// The invariant a failing record violated and the two compared values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub invariant: String,
    pub measured: f64,
    pub expected: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub id: String,
    pub status: Status,
    /// The proposition this record bears on.
    pub proposition: String,
    pub claim: String,
    pub basis: Basis,
    /// Name of the gate the summary reports.
    pub primary: String,
    pub measured: BTreeMap<String, f64>,
    pub expected: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub halving_estimate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violated: Option<Violation>,
    /// Only filled on request, so default reports stay byte-stable.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

impl ReportRecord {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Gate {
    Below(f64),
    AtLeast(f64),
    Equals(f64),
}

impl Gate {
    fn holds(self, v: f64) -> bool {
        match self {
            Gate::Below(t) => v < t,
            Gate::AtLeast(t) => v >= t,
            Gate::Equals(t) => v == t,
        }
    }

    fn describe(self) -> String {
        match self {
            Gate::Below(t) => format!("< {t:e}"),
            Gate::AtLeast(t) => format!(">= {t}"),
            Gate::Equals(t) => format!("= {t}"),
        }
    }
}

/// What a check hands back before gating.
#[derive(Debug, Clone, Default)]
pub(crate) struct Outcome {
    pub gates: Vec<(String, f64, Gate)>,
    pub info: Vec<(String, f64)>,
    pub matrix: Option<DMatrix<f64>>,
    pub halving: Option<f64>,
}

impl Outcome {
    pub fn gate(&mut self, name: &str, value: f64, gate: Gate) {
        self.gates.push((name.to_string(), value, gate));
    }

    pub fn info(&mut self, name: &str, value: f64) {
        self.info.push((name.to_string(), value));
    }

    pub fn halving(&mut self, est: Option<f64>) {
        if let Some(e) = est {
            self.halving = Some(self.halving.map_or(e, |h: f64| h.max(e)));
        }
    }
}

/// Static description of an experiment family.
pub(crate) struct Family {
    pub prefix: &'static str,
    pub proposition: &'static str,
    pub claim: &'static str,
    pub basis: Basis,
}

fn record_from(id: &str, family: &Family, outcome: Result<Outcome, ExperimentError>, tol: Option<f64>) -> ReportRecord {
    let mut rec = ReportRecord {
        id: id.to_string(),
        status: Status::Pass,
        proposition: family.proposition.to_string(),
        claim: family.claim.to_string(),
        basis: family.basis,
        primary: String::new(),
        measured: BTreeMap::new(),
        expected: BTreeMap::new(),
        matrix: None,
        halving_estimate: None,
        violated: None,
        wall_time_s: None,
    };
    match outcome {
        Ok(mut out) => {
            if let (Some(t), Some(first)) = (tol, out.gates.iter_mut().find(|g| matches!(g.2, Gate::Below(_)))) {
                first.2 = Gate::Below(t);
            }
            rec.primary = out.gates.first().map(|g| g.0.clone()).unwrap_or_default();
            for (name, value, gate) in &out.gates {
                rec.measured.insert(name.clone(), *value);
                rec.expected.insert(name.clone(), gate.describe());
                if rec.violated.is_none() && !gate.holds(*value) {
                    rec.status = Status::Fail;
                    rec.violated = Some(Violation {
                        invariant: name.clone(),
                        measured: *value,
                        expected: gate.describe(),
                    });
                }
            }
            for (name, value) in out.info {
                rec.measured.insert(name, value);
            }
            rec.matrix = out
                .matrix
                .map(|m| (0..m.nrows()).map(|r| m.row(r).iter().copied().collect()).collect());
            rec.halving_estimate = out.halving;
        }
        Err(e) => {
            rec.status = Status::Fail;
            rec.violated = Some(Violation {
                invariant: format!("error: {e}"),
                measured: f64::NAN,
                expected: "no error".into(),
            });
        }
    }
    rec
}

/// Run one experiment. Numeric failures become fail records; only
/// unresolvable configs are errors.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ReportRecord, ExperimentError> {
    cfg.validate()?;
    let (family, check) = suites::resolve(cfg)?;
    let outcome = check(cfg);
    Ok(record_from(&cfg.id, family, outcome, cfg.tolerance))
}

/// Same as [`run_experiment`], optionally recording wall time.
pub fn run_timed(cfg: &ExperimentConfig, timing: bool) -> Result<ReportRecord, ExperimentError> {
    let start = Instant::now();
    let mut rec = run_experiment(cfg)?;
    if timing {
        rec.wall_time_s = Some(start.elapsed().as_secs_f64());
    }
    Ok(rec)
}

/// Run independent experiments in parallel; records come back in
/// experiment-id order.
pub fn run_all(cfgs: &[ExperimentConfig], timing: bool) -> Result<Vec<ReportRecord>, ExperimentError> {
    let mut records = cfgs
        .par_iter()
        .map(|c| run_timed(c, timing))
        .collect::<Result<Vec<_>, _>>()?;
    records.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(records)
}

/// Experiment ids grouped by the command-line subcommand that runs them.
pub fn suite(group: &str) -> Option<Vec<&'static str>> {
    let ids: Vec<&'static str> = match group {
        "check-groups" => vec!["group-suite-(1,2)", "group-suite-(2,3)"],
        "curvature" => vec![
            "flat-tractor-flatness",
            "sphere-flatness-3",
            "sphere-flatness-4",
            "sphere-flatness-5",
            "curvature-structure-product_sphere(2,2)",
            "curvature-structure-poly_generic(2,3)",
            "tau-compatibility",
        ],
        "transport" => vec![
            "metric-preservation-flat(2,3)",
            "metric-preservation-sphere(5)",
            "metric-preservation-product_sphere(2,3)",
            "metric-preservation-poly_generic(2,3)",
            "conformal-invariance-poly_generic(2,3)",
        ],
        "holonomy" => vec!["contractible-holonomy-sphere(3)", "contractible-holonomy-(2,3)", "mc-flatness-(1,2)", "mc-flatness-(2,3)"],
        "quadric-demo" => vec![
            "quadric-holonomy-(1,2)",
            "quadric-holonomy-(2,3)",
            "associated-holonomy-(1,2)",
            "associated-holonomy-(2,3)",
            "line-monodromy-(1,2)",
            "line-monodromy-(2,3)",
        ],
        "ambient-check" => vec!["ambient-vs-beg-flat-2-3", "ambient-vs-beg-sphere-4", "ambient-vs-beg-sphere-5", "ambient-vs-beg-poly_generic(2,3)"],
        "all" => {
            let mut all = Vec::new();
            for g in ["check-groups", "curvature", "transport", "holonomy", "quadric-demo", "ambient-check"] {
                all.extend(suite(g).expect("known group"));
            }
            all
        }
        _ => return None,
    };
    Some(ids)
}

fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v == v.trunc() && v.abs() < 1e6 {
        format!("{v}")
    } else {
        format!("{v:.3e}")
    }
}

/// One JSON record per line, then a plain-text summary grouped by
/// proposition.
pub fn emit_report(records: &[ReportRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("records serialize"));
        out.push('\n');
    }
    out.push_str(&summary_table(records));
    out
}

/// Only the JSON lines.
pub fn emit_json(records: &[ReportRecord]) -> String {
    records
        .iter()
        .map(|r| serde_json::to_string(r).expect("records serialize") + "\n")
        .collect()
}

pub fn summary_table(records: &[ReportRecord]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<58} {:<6} {:<42} key result", "proposition", "status", "experiment");
    let mut sorted: Vec<&ReportRecord> = records.iter().collect();
    sorted.sort_by(|a, b| a.proposition.cmp(&b.proposition).then(a.id.cmp(&b.id)));
    for r in sorted {
        let key = match &r.violated {
            Some(v) => format!("{} = {} (expected {})", v.invariant, fmt_num(v.measured), v.expected),
            None => r
                .measured
                .get(&r.primary)
                .map(|v| format!("{} = {}", r.primary, fmt_num(*v)))
                .unwrap_or_default(),
        };
        let status = if r.passed() { "pass" } else { "FAIL" };
        let _ = writeln!(out, "{:<58} {:<6} {:<42} {}", r.proposition, status, r.id, key);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report_is_header_only() {
        let text = emit_report(&[]);
        assert_eq!(text.lines().count(), 1);
        assert!(text.starts_with("proposition"));
    }

    #[test]
    fn config_parses_from_toml_and_json() {
        let toml_text = r#"
            seed = 7
            [[experiment]]
            id = "quadric-holonomy-(1,2)"
            tolerance = 1e-4
            [[experiment]]
            id = "mc-flatness-(1,2)"
            variant = "SP_line"
            representation = "det_twisted_standard"
            loop = "control-excursion"
        "#;
        let file = ConfigFile::parse(toml_text).unwrap();
        let cfgs = file.resolved();
        assert_eq!(cfgs[0].seed, Some(7));
        assert_eq!(cfgs[1].variant, Some(Variant::SPLine));
        assert_eq!(cfgs[1].loop_id, Some(LoopId::ControlExcursion));
        let json = serde_json::to_string(&file).unwrap();
        assert_eq!(ConfigFile::parse(&json).unwrap(), file);
        assert!(ConfigFile::parse("[[experiment]]\nid = 3").is_err());
    }

    #[test]
    fn unknown_ids_and_bad_tolerances_are_errors() {
        assert!(matches!(run_experiment(&ExperimentConfig::new("nope")), Err(ExperimentError::UnknownId(_))));
        let mut cfg = ExperimentConfig::new("flat-tractor-flatness");
        cfg.tolerance = Some(-1.0);
        assert!(matches!(run_experiment(&cfg), Err(ExperimentError::Config(_))));
    }

    #[test]
    fn failing_record_names_the_invariant() {
        let mut cfg = ExperimentConfig::new("quadric-holonomy-(1,2)");
        cfg.tolerance = Some(1e-30);
        let rec = run_experiment(&cfg).unwrap();
        assert_eq!(rec.status, Status::Fail);
        let v = rec.violated.unwrap();
        assert_eq!(v.invariant, "holonomy_plus_identity");
        assert!(v.measured > 0.0);
    }

    #[test]
    fn numeric_errors_become_fail_records() {
        let rec = run_experiment(&ExperimentConfig::new("quadric-holonomy-(0,4)")).unwrap();
        assert_eq!(rec.status, Status::Fail);
        assert!(rec.violated.unwrap().invariant.contains("topology"));
    }

    #[test]
    fn reports_are_byte_stable() {
        let cfgs: Vec<ExperimentConfig> = ["mc-flatness-(1,2)", "group-suite-(1,2)"]
            .iter()
            .map(|id| {
                let mut c = ExperimentConfig::new(*id);
                c.samples = Some(50);
                c
            })
            .collect();
        let a = emit_report(&run_all(&cfgs, false).unwrap());
        let b = emit_report(&run_all(&cfgs, false).unwrap());
        assert_eq!(a, b);
        assert!(!a.contains("wall_time"));
    }

    #[test]
    fn custom_metric_from_config() {
        let text = r#"
            [[experiment]]
            id = "curvature-structure-warped"
            samples = 3
            [experiment.metric]
            label = "warped"
            p = 2
            q = 1
            [[experiment.metric.entries]]
            i = 0
            j = 0
            numerator = [{ coeff = 0.3, powers = [0, 1, 1] }]
            [[experiment.metric.entries]]
            i = 1
            j = 2
            numerator = [{ coeff = 0.2, powers = [2, 0, 0] }]
        "#;
        let cfgs = ConfigFile::parse(text).unwrap().resolved();
        let rec = run_experiment(&cfgs[0]).unwrap();
        assert!(rec.passed(), "{rec:?}");
        assert!(rec.measured["max_curvature_entry"] > 1e-3);
    }

    #[test]
    fn every_suite_id_resolves() {
        for id in suite("all").unwrap() {
            assert!(suites::resolve(&ExperimentConfig::new(id)).is_ok(), "{id}");
        }
    }
}
