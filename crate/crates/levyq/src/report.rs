//! CSV output. Floats are written with 17 significant digits so that values
//! survive a text round trip bit for bit.

use std::io::{Read, Write};

use levyq_core::GridObservations;

pub const ROW_HEADER: [&str; 14] = [
    "experiment",
    "replication",
    "alpha",
    "delta",
    "xi",
    "horizon",
    "n",
    "phi_hat",
    "sigma_hat_sq",
    "ci_lo",
    "ci_hi",
    "phi_true",
    "phi_eps",
    "seed",
];

pub const SUMMARY_HEADER: [&str; 3] = ["experiment", "key", "value"];

pub const GRID_HEADER: [&str; 3] = ["i", "t", "v"];

pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub experiment: String,
    pub replication: usize,
    pub alpha: f64,
    pub delta: f64,
    pub xi: f64,
    pub horizon: f64,
    pub n: usize,
    pub phi_hat: f64,
    pub sigma_hat_sq: Option<f64>,
    pub ci_lo: Option<f64>,
    pub ci_hi: Option<f64>,
    pub phi_true: Option<f64>,
    pub phi_eps: Option<f64>,
    pub seed: u64,
}

impl Row {
    fn record(&self) -> [String; 14] {
        [
            self.experiment.clone(),
            self.replication.to_string(),
            fmt_float(self.alpha),
            fmt_float(self.delta),
            fmt_float(self.xi),
            fmt_float(self.horizon),
            self.n.to_string(),
            fmt_float(self.phi_hat),
            fmt_opt(self.sigma_hat_sq),
            fmt_opt(self.ci_lo),
            fmt_opt(self.ci_hi),
            fmt_opt(self.phi_true),
            fmt_opt(self.phi_eps),
            self.seed.to_string(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Float(f64),
    Int(u64),
    Text(String),
}

impl Value {
    fn render(&self) -> String {
        match self {
            Value::Float(x) => fmt_float(*x),
            Value::Int(i) => i.to_string(),
            Value::Text(s) => s.clone(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Float(x) => Some(*x),
            Value::Int(i) => Some(*i as f64),
            Value::Text(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryEntry {
    pub experiment: String,
    pub key: String,
    pub value: Value,
}

/// Per-estimate rows plus a key/value summary block.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentReport {
    pub rows: Vec<Row>,
    pub summary: Vec<SummaryEntry>,
}

impl ExperimentReport {
    pub fn note(&mut self, experiment: &str, key: impl Into<String>, value: Value) {
        self.summary.push(SummaryEntry {
            experiment: experiment.to_string(),
            key: key.into(),
            value,
        });
    }

    pub fn note_f64(&mut self, experiment: &str, key: impl Into<String>, value: f64) {
        self.note(experiment, key, Value::Float(value));
    }

    /// First summary value under `key`, searching all experiments.
    pub fn summary_value(&self, key: &str) -> Option<&Value> {
        self.summary.iter().find(|e| e.key == key).map(|e| &e.value)
    }

    pub fn summary_f64(&self, key: &str) -> Option<f64> {
        self.summary_value(key).and_then(Value::as_f64)
    }

    pub fn extend(&mut self, other: ExperimentReport) {
        self.rows.extend(other.rows);
        self.summary.extend(other.summary);
    }

    pub fn write_rows<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(ROW_HEADER)?;
        for row in &self.rows {
            w.write_record(row.record())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_summary<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(SUMMARY_HEADER)?;
        for e in &self.summary {
            w.write_record([e.experiment.as_str(), e.key.as_str(), &e.value.render()])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn write_grid<W: Write>(grid: &GridObservations, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(GRID_HEADER)?;
    for (i, v) in grid.values().iter().enumerate() {
        w.write_record([i.to_string(), fmt_float(grid.time(i)), fmt_float(*v)])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, thiserror::Error)]
pub enum GridReadError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("grid header must be `i,t,v`, found `{0}`")]
    Header(String),
    #[error("row {row}: {message}")]
    Row { row: usize, message: String },
    #[error("grid needs at least two points")]
    TooShort,
    #[error(transparent)]
    Observations(#[from] levyq_core::Error),
}

/// Reads an `i,t,v` grid. The width is taken from the second time stamp and
/// every other time stamp must match `iΔ`. Returns the grid and the time of
/// its last point.
pub fn read_grid<R: Read>(input: R) -> Result<(GridObservations, f64), GridReadError> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != GRID_HEADER {
        return Err(GridReadError::Header(header.iter().collect::<Vec<_>>().join(",")));
    }
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let bad = |message: String| GridReadError::Row { row: row + 1, message };
        let field = |j: usize| rec.get(j).unwrap_or("").trim();
        let i: usize = field(0).parse().map_err(|e| bad(format!("index: {e}")))?;
        if i != row {
            return Err(bad(format!("expected index {row}, found {i}")));
        }
        let t: f64 = field(1).parse().map_err(|e| bad(format!("time: {e}")))?;
        let v: f64 = field(2).parse().map_err(|e| bad(format!("value: {e}")))?;
        times.push(t);
        values.push(v);
    }
    if times.len() < 2 {
        return Err(GridReadError::TooShort);
    }
    let delta = times[1] - times[0];
    for (i, &t) in times.iter().enumerate() {
        let expected = i as f64 * delta;
        if (t - expected).abs() > 1e-9 * expected.max(1.0) {
            return Err(GridReadError::Row {
                row: i + 1,
                message: format!("time {t} is off the grid {expected}"),
            });
        }
    }
    let horizon = *times.last().expect("nonempty");
    Ok((GridObservations::from_values(delta, values)?, horizon))
}
