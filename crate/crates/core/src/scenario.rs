//! Scenario files and suite runs.
//!
//! A scenario is a TOML or JSON document:
//!
//! ```toml
//! id = "z3_rotation"
//! dim = 1
//! seed = 7
//! exponents = [1, 2, "inf"]
//! checks = ["property_star", "regular_isomorphism"]
//! space = [["x0", 0.5], ["x1", 0.25], ["x2", 0.25]]
//! space2 = [0.2, 0.3, 0.5]                        # optional second weighting
//! group = [[0, 1, 2], [1, 2, 0], [2, 0, 1]]       # Cayley table, identity at 0
//! action = [[0, 1, 2], [1, 2, 0], [2, 0, 1]]      # action[g][x] = α_g(x)
//!
//! [[element]]
//! g = 0
//! coeff = [1, 2, 3]                               # one value per atom
//! ```
//!
//! Per-atom coefficient values are a real number or an `[re, im]` pair when
//! `dim = 1`, and otherwise a `dim×dim` matrix given as rows whose entries are
//! real numbers or `[re, im]` pairs.

use std::collections::BTreeSet;
use std::path::Path;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{Coefficient, SymbolicElement};
use crate::measure::{FiniteGroup, GroupAction, MeasureSpace};
use crate::par::Execution;
use crate::verify::{self, CheckError, CheckReport};
use crate::{Complex64, Exponent};

pub const KNOWN_CHECKS: &[&str] = &[
    "character_symmetry",
    "formula_agreement",
    "interpolation",
    "measure_isomorphism",
    "property_double_star",
    "property_star",
    "property_star_failure_search",
    "regular_isomorphism",
    "trajectory_norm",
];

const DEFAULT_TRIALS: usize = 32;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Parse { line: Option<usize>, message: String },
    #[error("invalid field `{field}`: {reason}")]
    Validation { field: String, reason: String },
}

impl ScenarioError {
    fn invalid(field: impl Into<String>, reason: impl ToString) -> Self {
        ScenarioError::Validation {
            field: field.into(),
            reason: reason.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, ScenarioError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    fn value(self) -> Complex64 {
        match self {
            Entry::Real(r) => Complex64::new(r, 0.0),
            Entry::Complex([re, im]) => Complex64::new(re, im),
        }
    }

    fn from_complex(z: Complex64) -> Self {
        if z.im == 0.0 {
            Entry::Real(z.re)
        } else {
            Entry::Complex([z.re, z.im])
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AtomValue {
    Scalar(Entry),
    Matrix(Vec<Vec<Entry>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermSpec {
    pub g: usize,
    pub coeff: Vec<AtomValue>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Tolerances {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub svd: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power: Option<f64>,
}

impl Tolerances {
    /// Fields set in `other` win.
    pub fn overlay(self, other: Tolerances) -> Tolerances {
        Tolerances {
            exact: other.exact.or(self.exact),
            svd: other.svd.or(self.svd),
            power: other.power.or(self.power),
        }
    }

    fn for_exponent(&self, p: Exponent) -> Option<f64> {
        if p.is_infinite() || p.is(1.0) {
            self.exact
        } else if p.is(2.0) {
            self.svd
        } else {
            self.power
        }
    }

    fn is_empty(&self) -> bool {
        self.exact.is_none() && self.svd.is_none() && self.power.is_none()
    }
}

/// The on-disk scenario schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub id: String,
    pub dim: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub exponents: Vec<Exponent>,
    #[serde(default)]
    pub checks: Vec<String>,
    pub space: Vec<(String, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space2: Option<Vec<f64>>,
    pub group: Vec<Vec<usize>>,
    pub action: Vec<Vec<usize>>,
    #[serde(default)]
    pub element: Vec<TermSpec>,
    #[serde(default, skip_serializing_if = "Tolerances::is_empty")]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    /// Ground-truth freeness label, verified at load when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub free: Option<bool>,
}

/// A validated scenario with its objects built.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub id: String,
    pub dim: usize,
    pub seed: u64,
    pub exponents: Vec<Exponent>,
    pub checks: Vec<String>,
    pub action: Arc<GroupAction>,
    pub element: SymbolicElement,
    pub space2: Option<MeasureSpace>,
    pub tolerances: Tolerances,
    pub trials: usize,
}

fn parse_coefficient(
    field: &str,
    space: &Arc<MeasureSpace>,
    dim: usize,
    values: &[AtomValue],
) -> Result<Coefficient> {
    if values.len() != space.len() {
        return Err(ScenarioError::invalid(
            field,
            format!("{} atom values for {} atoms", values.len(), space.len()),
        ));
    }
    let mut blocks = Vec::with_capacity(values.len());
    for (x, v) in values.iter().enumerate() {
        let block = match v {
            AtomValue::Scalar(e) if dim == 1 => DMatrix::from_element(1, 1, e.value()),
            AtomValue::Scalar(_) => {
                return Err(ScenarioError::invalid(
                    format!("{field}[{x}]"),
                    format!("scalar given but dim = {dim}"),
                ))
            }
            AtomValue::Matrix(rows) => {
                if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                    return Err(ScenarioError::invalid(
                        format!("{field}[{x}]"),
                        format!("expected a {dim}x{dim} matrix"),
                    ));
                }
                DMatrix::from_fn(dim, dim, |i, j| rows[i][j].value())
            }
        };
        if block.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(ScenarioError::invalid(format!("{field}[{x}]"), "non-finite entry"));
        }
        blocks.push(block);
    }
    Coefficient::new(space.clone(), blocks).map_err(|e| ScenarioError::invalid(field, e))
}

fn coefficient_to_spec(a: &Coefficient) -> Vec<AtomValue> {
    a.blocks()
        .iter()
        .map(|b| {
            if a.dim() == 1 {
                AtomValue::Scalar(Entry::from_complex(b[(0, 0)]))
            } else {
                AtomValue::Matrix(
                    (0..b.nrows())
                        .map(|i| (0..b.ncols()).map(|j| Entry::from_complex(b[(i, j)])).collect())
                        .collect(),
                )
            }
        })
        .collect()
}

impl ScenarioFile {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let line = e.span().map(|s| text[..s.start.min(text.len())].lines().count().max(1));
            ScenarioError::Parse {
                line,
                message: e.message().to_string(),
            }
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| ScenarioError::Parse {
            line: Some(e.line()),
            message: e.to_string(),
        })
    }

    /// Validates every cross-reference and builds the objects.
    pub fn build(&self) -> Result<Scenario> {
        let space = MeasureSpace::new(self.space.iter().cloned())
            .map(Arc::new)
            .map_err(|e| ScenarioError::invalid("space", e))?;
        let group = FiniteGroup::from_cayley(self.group.clone())
            .map(Arc::new)
            .map_err(|e| ScenarioError::invalid("group", e))?;
        for (g, perm) in self.action.iter().enumerate() {
            if let Some(&bad) = perm.iter().find(|&&x| x >= space.len()) {
                return Err(ScenarioError::invalid(
                    format!("action[{g}]"),
                    format!("atom index {bad} out of range for {} atoms", space.len()),
                ));
            }
        }
        let action = GroupAction::new(group.clone(), space.clone(), self.action.clone())
            .map(Arc::new)
            .map_err(|e| ScenarioError::invalid("action", e))?;
        if self.dim == 0 {
            return Err(ScenarioError::invalid("dim", "must be at least 1"));
        }
        let mut element = SymbolicElement::zero(action.clone(), self.dim);
        for (i, term) in self.element.iter().enumerate() {
            if term.g >= group.order() {
                return Err(ScenarioError::invalid(
                    format!("element[{i}].g"),
                    format!("group element {} out of range for order {}", term.g, group.order()),
                ));
            }
            let a = parse_coefficient(&format!("element[{i}].coeff"), &space, self.dim, &term.coeff)?;
            element
                .add_term(term.g, a)
                .map_err(|e| ScenarioError::invalid(format!("element[{i}]"), e))?;
        }
        let space2 = match &self.space2 {
            Some(w) => Some(
                space
                    .reweighted(w)
                    .map_err(|e| ScenarioError::invalid("space2", e))?,
            ),
            None => None,
        };
        for c in &self.checks {
            if !KNOWN_CHECKS.contains(&c.as_str()) {
                return Err(ScenarioError::invalid(
                    "checks",
                    format!("unknown check {c:?}; known: {}", KNOWN_CHECKS.join(", ")),
                ));
            }
        }
        for (name, tol) in [
            ("tolerances.exact", self.tolerances.exact),
            ("tolerances.svd", self.tolerances.svd),
            ("tolerances.power", self.tolerances.power),
        ] {
            if tol.is_some_and(|t| !(t.is_finite() && t >= 0.0)) {
                return Err(ScenarioError::invalid(name, "must be a finite non-negative number"));
            }
        }
        if let Some(expected) = self.free {
            let actual = action.check_metrically_free().free;
            if actual != expected {
                return Err(ScenarioError::invalid(
                    "free",
                    format!("declared {expected} but the action is {}", if actual { "free" } else { "not free" }),
                ));
            }
        }
        Ok(Scenario {
            id: self.id.clone(),
            dim: self.dim,
            seed: self.seed,
            exponents: self.exponents.clone(),
            checks: self.checks.clone(),
            action,
            element,
            space2,
            tolerances: self.tolerances,
            trials: self.trials.unwrap_or(DEFAULT_TRIALS),
        })
    }
}

impl Scenario {
    pub fn to_file(&self) -> ScenarioFile {
        let space = self.action.space();
        ScenarioFile {
            id: self.id.clone(),
            dim: self.dim,
            seed: self.seed,
            exponents: self.exponents.clone(),
            checks: self.checks.clone(),
            space: space
                .labels()
                .iter()
                .cloned()
                .zip(space.weights().iter().copied())
                .collect(),
            space2: self.space2.as_ref().map(|s| s.weights().to_vec()),
            group: self.action.group().cayley().to_vec(),
            action: self.action.perms().to_vec(),
            element: self
                .element
                .terms()
                .iter()
                .map(|(&g, a)| TermSpec {
                    g,
                    coeff: coefficient_to_spec(a),
                })
                .collect(),
            tolerances: self.tolerances,
            trials: Some(self.trials),
            free: Some(self.action.check_metrically_free().free),
        }
    }
}

/// Loads a `.toml` or `.json` scenario; other extensions are tried as TOML.
pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let file = match path.extension().and_then(|e| e.to_str()) {
        Some("json") => ScenarioFile::from_json(&text)?,
        _ => ScenarioFile::from_toml(&text)?,
    };
    file.build()
}

/// One line of a scenario report: a check outcome or a refusal.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum SuiteEntry {
    Report(CheckReport),
    Refused {
        check_name: String,
        scenario_id: String,
        p: Exponent,
        refused: String,
    },
}

impl SuiteEntry {
    fn key(&self) -> (&str, f64) {
        match self {
            SuiteEntry::Report(r) => (&r.check_name, r.p.sort_key()),
            SuiteEntry::Refused { check_name, p, .. } => (check_name, p.sort_key()),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub refused: usize,
    /// `(check, p)` pairs where the check is undefined at that exponent.
    pub skipped: usize,
}

impl Summary {
    fn add(&mut self, e: &SuiteEntry) {
        self.total += 1;
        match e {
            SuiteEntry::Report(r) if r.passed => self.passed += 1,
            SuiteEntry::Report(_) => self.failed += 1,
            SuiteEntry::Refused { .. } => self.refused += 1,
        }
    }

    fn merge(&mut self, o: &Summary) {
        self.total += o.total;
        self.passed += o.passed;
        self.failed += o.failed;
        self.refused += o.refused;
        self.skipped += o.skipped;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub scenario_id: String,
    pub summary: Summary,
    pub reports: Vec<SuiteEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub summary: Summary,
    pub scenarios: Vec<ScenarioReport>,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.summary.failed == 0
    }
}

/// Equality checks take their tolerance from the overrides when given.
fn apply_overrides(mut r: CheckReport, tol: &Tolerances) -> CheckReport {
    let equality = matches!(
        r.check_name.as_str(),
        "character_symmetry" | "formula_agreement" | "measure_isomorphism" | "trajectory_norm"
    ) || (r.check_name == "regular_isomorphism" && r.details["mode"] == "equality");
    if let (true, Some(base)) = (equality, tol.for_exponent(r.p)) {
        r.tolerance = base * 1f64.max(r.lhs.abs()).max(r.rhs.abs());
        r.passed = (r.lhs - r.rhs).abs() <= r.tolerance;
    }
    r
}

fn run_check(s: &Scenario, name: &str, p: Exponent) -> std::result::Result<CheckReport, CheckError> {
    let b = &s.element;
    match name {
        "character_symmetry" => verify::check_character_symmetry(b, p),
        "formula_agreement" => verify::check_formula_agreement(b, p),
        "interpolation" => verify::check_interpolation(b, p),
        "measure_isomorphism" => match &s.space2 {
            Some(sp) => verify::check_measure_isomorphism(b, sp, p),
            None => Err(CheckError::AtomMismatch),
        },
        "property_double_star" => verify::check_property_double_star(b, p),
        "property_star" => verify::check_property_star(b, p),
        "property_star_failure_search" => {
            verify::check_property_star_failure_search(&s.action, s.dim, p, s.trials, s.seed)
        }
        "regular_isomorphism" => verify::check_regular_isomorphism(b, p),
        "trajectory_norm" => verify::check_trajectory_norm(b, p),
        other => unreachable!("check {other} was validated at load"),
    }
}

/// Runs every requested `(check, p)` pair. Pairs where the check is undefined
/// at `p` are counted as skipped rather than reported. Entries are ordered by check name,
/// then by exponent with ∞ last, whatever the execution strategy.
pub fn run(s: &Scenario, overrides: &Tolerances, exec: Execution) -> ScenarioReport {
    let checks: BTreeSet<&str> = s.checks.iter().map(String::as_str).collect();
    let mut exps = s.exponents.clone();
    exps.sort_by(|a, b| a.sort_key().total_cmp(&b.sort_key()));
    exps.dedup();
    let jobs: Vec<(&str, Exponent)> = checks
        .iter()
        .flat_map(|&c| exps.iter().map(move |&p| (c, p)))
        .collect();
    let tol = s.tolerances.overlay(*overrides);
    let outcomes: Vec<Option<SuiteEntry>> = exec.map(&jobs, |&(name, p)| match run_check(s, name, p) {
        Ok(r) => Some(SuiteEntry::Report(apply_overrides(r, &tol).with_scenario(&s.id))),
        Err(CheckError::UnsupportedExponent(_)) => None,
        Err(e) => Some(SuiteEntry::Refused {
            check_name: name.to_string(),
            scenario_id: s.id.clone(),
            p,
            refused: refusal_reason(name, &e),
        }),
    });
    let skipped = outcomes.iter().filter(|o| o.is_none()).count();
    let mut reports: Vec<SuiteEntry> = outcomes.into_iter().flatten().collect();
    reports.sort_by(|a, b| {
        let (na, pa) = a.key();
        let (nb, pb) = b.key();
        na.cmp(nb).then(pa.total_cmp(&pb))
    });
    let mut summary = Summary { skipped, ..Summary::default() };
    for r in &reports {
        summary.add(r);
    }
    ScenarioReport {
        scenario_id: s.id.clone(),
        summary,
        reports,
    }
}

fn refusal_reason(name: &str, e: &CheckError) -> String {
    match (name, e) {
        ("measure_isomorphism", CheckError::AtomMismatch) => "scenario has no space2".to_string(),
        _ => e.to_string(),
    }
}

/// Runs several scenarios; scenario reports keep the input order.
pub fn run_suite(scenarios: &[Scenario], overrides: &Tolerances, exec: Execution) -> SuiteReport {
    // Parallelism goes to the scenario level; each scenario runs its checks in order.
    let inner = if scenarios.len() > 1 { Execution::Sequential } else { exec };
    let reports = exec.map(scenarios, |s| run(s, overrides, inner));
    let mut summary = Summary::default();
    for r in &reports {
        summary.merge(&r.summary);
    }
    SuiteReport {
        summary,
        scenarios: reports,
    }
}
