//! Report envelopes and their long-format rendering.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::gap::GapReport;
use crate::misreport::MisreportReport;
use crate::scalability::ScalabilityReport;
use crate::study::{EmpiricalReport, WarmStartReport};

/// Provenance of a report. No clock readings, so reruns are byte-identical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seeds: Vec<u64>,
    pub config: Value,
}

impl Metadata {
    pub fn new(command: &str, seeds: Vec<u64>, config: impl Serialize) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seeds,
            config: serde_json::to_value(config).unwrap_or(Value::Null),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "report", content = "body", rename_all = "snake_case")]
pub enum ReportBody {
    Gap(GapReport),
    Misreport(MisreportReport),
    Scalability(ScalabilityReport),
    WarmStart(WarmStartReport),
    Empirical(EmpiricalReport),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub metadata: Metadata,
    #[serde(flatten)]
    pub body: ReportBody,
}

/// One measurement of one row of a report table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LongRow {
    pub table: String,
    pub row: usize,
    /// `key=value` pairs identifying the row, joined by `;`.
    pub keys: String,
    pub metric: String,
    pub value: Option<f64>,
}

/// Numeric columns that identify a row rather than measure something.
const NUMERIC_KEYS: &[&str] = &[
    "n",
    "m",
    "seed",
    "beta",
    "nu",
    "sigma",
    "step",
    "alpha_min",
    "factor",
    "bidder",
    "good",
    "focal",
];

fn key_text(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(x) => Some(x.to_string()),
        Value::Null => Some(String::new()),
        _ => None,
    }
}

fn melt(table: &str, rows: &Value, out: &mut Vec<LongRow>) {
    let Some(rows) = rows.as_array() else { return };
    for (r, row) in rows.iter().enumerate() {
        let Some(obj) = row.as_object() else { continue };
        let mut keys = Vec::new();
        let mut metrics = Vec::new();
        for (name, v) in obj {
            let is_key = NUMERIC_KEYS.contains(&name.as_str());
            if !is_key && (v.is_number() || v.is_null()) {
                metrics.push((name.clone(), v.as_f64()));
            } else if let Some(text) = key_text(v) {
                keys.push(format!("{name}={text}"));
            }
        }
        let keys = keys.join(";");
        for (metric, value) in metrics {
            out.push(LongRow {
                table: table.into(),
                row: r,
                keys: keys.clone(),
                metric,
                value,
            });
        }
    }
}

impl ExperimentReport {
    pub fn new(metadata: Metadata, body: ReportBody) -> Self {
        Self { metadata, body }
    }

    pub fn kind(&self) -> &'static str {
        match self.body {
            ReportBody::Gap(_) => "gap",
            ReportBody::Misreport(_) => "misreport",
            ReportBody::Scalability(_) => "scalability",
            ReportBody::WarmStart(_) => "warm_start",
            ReportBody::Empirical(_) => "empirical",
        }
    }

    /// Every table of the report, one row per numeric cell. String and
    /// boolean columns, and the identifying numeric columns, become keys.
    pub fn long_rows(&self) -> Vec<LongRow> {
        let body = serde_json::to_value(&self.body).expect("reports serialize");
        let mut out = Vec::new();
        let tables = body["body"].as_object().cloned().unwrap_or_default();
        for (name, v) in &tables {
            if v.is_array() {
                melt(name, v, &mut out);
            } else if v.is_object() {
                melt(name, &Value::Array(vec![v.clone()]), &mut out);
            }
        }
        out
    }
}
