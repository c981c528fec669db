//! Experiment configuration: a TOML document with top-level keys and one
//! `[[model]]` section per subordinator component.
//!
//! ```toml
//! seed = 42
//! xi = 1.0
//! horizon = 2000.0
//! delta = { exponent = 0.6 }
//! alpha = [1.0]
//! replications = 500
//! init = "stationary"
//!
//! [[model]]
//! kind = "compound_poisson"
//! rate = 1.0
//! jobs = { kind = "exponential", rate = 2.0 }
//! ```
//!
//! Parsing is two-stage: serde handles syntax and types, then [`validate`]
//! checks values and cross-field rules. Both stages report the line of the
//! offending entry.
//!
//! [`validate`]: ExperimentConfig::validate

use std::fmt;
use std::path::Path;

use levyq_core::levy::DEFAULT_EPS;
use levyq_core::{InverseCdfTable, JobDistribution, SubordinatorSpec};
use serde::{Deserialize, Serialize};

pub const DEFAULT_TABLE_SIZE: usize = 4096;
pub const DEFAULT_LEVEL: f64 = 0.95;
pub const DEFAULT_DOUBLINGS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub xi: f64,
    pub horizon: f64,
    #[serde(default)]
    pub delta: DeltaSpec,
    /// Grid widths compared by `consistency` and `resample`; defaults to
    /// the single resolved `delta`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deltas: Option<Vec<f64>>,
    pub alpha: Vec<f64>,
    #[serde(default = "default_one")]
    pub k: usize,
    /// Resampling sizes compared by `resample`; defaults to `[k]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_values: Option<Vec<usize>>,
    #[serde(default = "default_one")]
    pub replications: usize,
    #[serde(default = "default_level")]
    pub level: f64,
    #[serde(default)]
    pub init: Init,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burn_in_time: Option<f64>,
    #[serde(default = "default_eps")]
    pub truncation_eps: f64,
    #[serde(default = "default_table_size")]
    pub table_size: usize,
    #[serde(default = "default_doublings")]
    pub doublings: usize,
    pub model: Vec<ModelSection>,
}

fn default_one() -> usize {
    1
}
fn default_level() -> f64 {
    DEFAULT_LEVEL
}
fn default_eps() -> f64 {
    DEFAULT_EPS
}
fn default_table_size() -> usize {
    DEFAULT_TABLE_SIZE
}
fn default_doublings() -> usize {
    DEFAULT_DOUBLINGS
}

/// Grid width: a number, `"auto"` for the variance-balancing heuristic, or
/// `{ exponent = g }` for `Δ = (ξT)^{-g}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged, expecting = "a positive number, \"auto\", or { exponent = <number> }")]
pub enum DeltaSpec {
    Fixed(f64),
    Auto(AutoKeyword),
    Exponent { exponent: f64 },
}

impl Default for DeltaSpec {
    fn default() -> Self {
        DeltaSpec::Auto(AutoKeyword::Auto)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoKeyword {
    Auto,
}

/// Initial workload: `"stationary"`, `"burn_in"` or `{ fixed = v0 }`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Init {
    Stationary,
    #[default]
    BurnIn,
    Fixed(f64),
}

impl fmt::Display for Init {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Init::Stationary => f.write_str("stationary"),
            Init::BurnIn => f.write_str("burn_in"),
            Init::Fixed(v) => write!(f, "fixed({v})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSection {
    Gamma { shape: f64, rate: f64 },
    InverseGaussian { mean: f64, shape: f64 },
    CompoundPoisson { rate: f64, jobs: JobSection },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum JobSection {
    Exponential { rate: f64 },
    Deterministic { size: f64 },
    Tabulated { probabilities: Vec<f64>, quantiles: Vec<f64> },
}

/// One step of a path into the document, e.g. `model[1].shape`.
#[derive(Debug, Clone, PartialEq)]
pub enum PathSeg {
    Key(&'static str),
    Index(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldPath(pub Vec<PathSeg>);

impl FieldPath {
    fn key(k: &'static str) -> Self {
        FieldPath(vec![PathSeg::Key(k)])
    }

    fn then(mut self, seg: PathSeg) -> Self {
        self.0.push(seg);
        self
    }
}

impl fmt::Display for FieldPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, seg) in self.0.iter().enumerate() {
            match seg {
                PathSeg::Key(k) if i == 0 => f.write_str(k)?,
                PathSeg::Key(k) => write!(f, ".{k}")?,
                PathSeg::Index(j) => write!(f, "[{j}]")?,
            }
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{}", format_located(*.line, .message))]
    Syntax { line: Option<usize>, message: String },
    #[error("{}", format_located(*.line, &format!("`{field}`: {message}")))]
    Field {
        line: Option<usize>,
        field: FieldPath,
        message: String,
    },
    #[error("cannot serialize config: {0}")]
    Serialize(#[from] toml::ser::Error),
}

fn format_located(line: Option<usize>, message: &str) -> String {
    match line {
        Some(l) => format!("line {l}: {message}"),
        None => message.to_string(),
    }
}

fn line_of(source: &str, offset: usize) -> usize {
    source[..offset.min(source.len())].matches('\n').count() + 1
}

/// Line of the entry at `path` in `source`, falling back to the nearest
/// enclosing entry that exists.
fn locate(source: &str, path: &FieldPath) -> Option<usize> {
    let doc = toml::de::DeTable::parse(source).ok()?;
    let mut best = None;
    let mut table = Some(doc.get_ref());
    let mut array: Option<&toml::de::DeArray> = None;
    for seg in &path.0 {
        let next = match (seg, table, array) {
            (PathSeg::Key(k), Some(t), _) => t.get(*k),
            (PathSeg::Index(i), _, Some(a)) => a.get(*i),
            _ => None,
        };
        let Some(v) = next else { break };
        best = Some(line_of(source, v.span().start));
        table = v.get_ref().as_table();
        array = v.get_ref().as_array();
    }
    best
}

fn issue(field: FieldPath, message: impl Into<String>) -> (FieldPath, String) {
    (field, message.into())
}

fn check_positive(field: FieldPath, v: f64, out: &mut Vec<(FieldPath, String)>) {
    if !(v.is_finite() && v > 0.0) {
        out.push(issue(field, format!("must be positive and finite, got {v}")));
    }
}

fn check_positive_list(field: &'static str, xs: &[f64], increasing: bool, out: &mut Vec<(FieldPath, String)>) {
    if xs.is_empty() {
        out.push(issue(FieldPath::key(field), "must not be empty"));
    }
    for (i, &x) in xs.iter().enumerate() {
        check_positive(FieldPath::key(field).then(PathSeg::Index(i)), x, out);
        if increasing && i > 0 && !(x > xs[i - 1]) {
            out.push(issue(
                FieldPath::key(field).then(PathSeg::Index(i)),
                "values must be strictly increasing",
            ));
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(source: &str) -> Result<Self, ConfigError> {
        let config: Self = toml::from_str(source).map_err(|e| ConfigError::Syntax {
            line: e.span().map(|s| line_of(source, s.start)),
            message: e.message().trim().to_string(),
        })?;
        if let Some((field, message)) = config.issues().into_iter().next() {
            return Err(ConfigError::Field {
                line: locate(source, &field),
                field,
                message,
            });
        }
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let source = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&source)
    }

    pub fn to_toml_string(&self) -> Result<String, ConfigError> {
        Ok(toml::to_string(self)?)
    }

    /// Checks value ranges and cross-field rules; the first problem is
    /// reported.
    pub fn validate(&self) -> Result<(), ConfigError> {
        match self.issues().into_iter().next() {
            None => Ok(()),
            Some((field, message)) => Err(ConfigError::Field {
                line: None,
                field,
                message,
            }),
        }
    }

    fn issues(&self) -> Vec<(FieldPath, String)> {
        let mut out = Vec::new();
        if self.seed > i64::MAX as u64 {
            out.push(issue(FieldPath::key("seed"), "must fit in a signed 64-bit TOML integer"));
        }
        check_positive(FieldPath::key("xi"), self.xi, &mut out);
        check_positive(FieldPath::key("horizon"), self.horizon, &mut out);
        match self.delta {
            DeltaSpec::Fixed(d) => check_positive(FieldPath::key("delta"), d, &mut out),
            DeltaSpec::Exponent { exponent } => check_positive(
                FieldPath::key("delta").then(PathSeg::Key("exponent")),
                exponent,
                &mut out,
            ),
            DeltaSpec::Auto(_) => {}
        }
        if let Some(ds) = &self.deltas {
            check_positive_list("deltas", ds, false, &mut out);
        }
        check_positive_list("alpha", &self.alpha, true, &mut out);
        for (name, v) in [("k", self.k), ("replications", self.replications), ("doublings", self.doublings)] {
            if v == 0 {
                out.push(issue(FieldPath::key(name), "must be at least 1"));
            }
        }
        if let Some(ks) = &self.k_values {
            if ks.is_empty() {
                out.push(issue(FieldPath::key("k_values"), "must not be empty"));
            }
            for (i, &k) in ks.iter().enumerate() {
                if k == 0 {
                    out.push(issue(FieldPath::key("k_values").then(PathSeg::Index(i)), "must be at least 1"));
                }
            }
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            out.push(issue(FieldPath::key("level"), format!("must lie in (0, 1), got {}", self.level)));
        }
        if let Init::Fixed(v) = self.init {
            if !(v.is_finite() && v >= 0.0) {
                out.push(issue(
                    FieldPath::key("init").then(PathSeg::Key("fixed")),
                    format!("initial workload must be nonnegative and finite, got {v}"),
                ));
            }
        }
        if let Some(t) = self.burn_in_time {
            check_positive(FieldPath::key("burn_in_time"), t, &mut out);
        }
        check_positive(FieldPath::key("truncation_eps"), self.truncation_eps, &mut out);
        if self.table_size < levyq_core::levy::MIN_TABLE_SIZE {
            out.push(issue(
                FieldPath::key("table_size"),
                format!("must be at least {}", levyq_core::levy::MIN_TABLE_SIZE),
            ));
        }
        if self.model.is_empty() {
            out.push(issue(FieldPath::key("model"), "at least one [[model]] section is required"));
        }
        for (i, section) in self.model.iter().enumerate() {
            if let Err(e) = section.to_spec() {
                out.push(issue(FieldPath::key("model").then(PathSeg::Index(i)), e.to_string()));
            }
        }
        if out.is_empty() {
            if let Err(e) = self.input_spec().and_then(levyq_core::NetInputModel::new) {
                out.push(issue(FieldPath::key("model"), e.to_string()));
            }
        }
        out
    }

    /// The configured subordinator (sum of all sections).
    pub fn input_spec(&self) -> levyq_core::Result<SubordinatorSpec> {
        let parts = self
            .model
            .iter()
            .map(ModelSection::to_spec)
            .collect::<levyq_core::Result<Vec<_>>>()?;
        if parts.len() == 1 {
            Ok(parts.into_iter().next().expect("one part"))
        } else {
            SubordinatorSpec::sum(parts)
        }
    }

    /// Grid widths for multi-Δ experiments.
    pub fn delta_list(&self, resolved: f64) -> Vec<f64> {
        self.deltas.clone().unwrap_or_else(|| vec![resolved])
    }

    pub fn k_list(&self) -> Vec<usize> {
        self.k_values.clone().unwrap_or_else(|| vec![self.k])
    }

    /// The canonical Gamma + inverse Gaussian storage model.
    pub fn canonical() -> Self {
        Self {
            seed: 1,
            xi: 1.0,
            horizon: 100.0,
            delta: DeltaSpec::default(),
            deltas: None,
            alpha: (1..=100).map(|i| 0.1 * i as f64).collect(),
            k: 1,
            k_values: None,
            replications: 1,
            level: DEFAULT_LEVEL,
            init: Init::BurnIn,
            burn_in_time: None,
            truncation_eps: DEFAULT_EPS,
            table_size: DEFAULT_TABLE_SIZE,
            doublings: DEFAULT_DOUBLINGS,
            model: vec![
                ModelSection::Gamma { shape: 2.0, rate: 5.0 },
                ModelSection::InverseGaussian { mean: 0.4, shape: 1.0 },
            ],
        }
    }
}

impl ModelSection {
    pub fn to_spec(&self) -> levyq_core::Result<SubordinatorSpec> {
        match self {
            ModelSection::Gamma { shape, rate } => SubordinatorSpec::gamma(*shape, *rate),
            ModelSection::InverseGaussian { mean, shape } => {
                SubordinatorSpec::inverse_gaussian(*mean, *shape)
            }
            ModelSection::CompoundPoisson { rate, jobs } => {
                SubordinatorSpec::compound_poisson(*rate, jobs.to_distribution()?)
            }
        }
    }

    pub fn from_spec(spec: &SubordinatorSpec) -> Option<Vec<Self>> {
        match spec {
            SubordinatorSpec::Gamma { shape, rate } => Some(vec![ModelSection::Gamma {
                shape: *shape,
                rate: *rate,
            }]),
            SubordinatorSpec::InverseGaussian { mean, shape } => {
                Some(vec![ModelSection::InverseGaussian {
                    mean: *mean,
                    shape: *shape,
                }])
            }
            SubordinatorSpec::CompoundPoisson(cp) => Some(vec![ModelSection::CompoundPoisson {
                rate: cp.rate,
                jobs: JobSection::from_distribution(&cp.jobs),
            }]),
            SubordinatorSpec::Sum(parts) => {
                let mut out = Vec::new();
                for p in parts {
                    out.extend(Self::from_spec(p)?);
                }
                Some(out)
            }
            SubordinatorSpec::TruncatedCp { .. } => None,
        }
    }
}

impl JobSection {
    pub fn to_distribution(&self) -> levyq_core::Result<JobDistribution> {
        let d = match self {
            JobSection::Exponential { rate } => JobDistribution::Exponential { rate: *rate },
            JobSection::Deterministic { size } => JobDistribution::Deterministic { size: *size },
            JobSection::Tabulated {
                probabilities,
                quantiles,
            } => JobDistribution::Tabulated(InverseCdfTable::new(
                probabilities.clone(),
                quantiles.clone(),
            )?),
        };
        d.validate()?;
        Ok(d)
    }

    pub fn from_distribution(d: &JobDistribution) -> Self {
        match d {
            JobDistribution::Exponential { rate } => JobSection::Exponential { rate: *rate },
            JobDistribution::Deterministic { size } => JobSection::Deterministic { size: *size },
            JobDistribution::Tabulated(t) => JobSection::Tabulated {
                probabilities: t.probabilities().to_vec(),
                quantiles: t.quantiles().collect(),
            },
        }
    }
}
