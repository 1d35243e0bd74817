//! Report documents and their JSON and CSV encodings.
//!
//! Reals are rounded to 12 significant digits; magnitudes below `1e-15` are
//! written as 0. Parsing an emitted document gives back the rounded document.

use serde::{Deserialize, Serialize};

use super::config::Format;
use crate::bounds::BoundReport;
use crate::montecarlo::EstimateWithCI;
use crate::risk::RiskSummary;

pub const SCHEMA_VERSION: &str = "1";

/// Values smaller than this in magnitude are rendered as 0.
pub const ZERO_FLOOR: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Report {
    Bound(BoundReport),
    Risk {
        label: String,
        #[serde(flatten)]
        summary: RiskSummary,
    },
    Estimate {
        label: String,
        #[serde(flatten)]
        estimate: EstimateWithCI,
    },
}

impl Report {
    pub fn risk(label: &str, summary: RiskSummary) -> Self {
        Report::Risk { label: label.to_string(), summary }
    }

    pub fn estimate(label: &str, estimate: EstimateWithCI) -> Self {
        Report::Estimate { label: label.to_string(), estimate }
    }

    /// False only for a bound check whose measurement exceeds the bound.
    pub fn passed(&self) -> bool {
        match self {
            Report::Bound(b) => b.passed(),
            _ => true,
        }
    }

    fn reals(&self) -> Vec<f64> {
        match self {
            Report::Bound(b) => {
                let mut v: Vec<f64> = b.inputs.values().copied().collect();
                v.push(b.bound_value);
                v.extend(b.measured_value);
                v.extend(b.slack);
                v
            }
            Report::Risk { summary: s, .. } => {
                vec![s.expected_empirical, s.expected_population, s.gen_error, s.abs_gen_error, s.excess_risk]
            }
            Report::Estimate { estimate: e, .. } => vec![e.mean, e.std_error, e.ci95.0, e.ci95.1],
        }
    }

    /// The report as it reads back after emission.
    pub fn rounded(&self) -> Self {
        match self {
            Report::Bound(b) => {
                let mut b = b.clone();
                for v in b.inputs.values_mut() {
                    *v = round_real(*v);
                }
                b.bound_value = round_real(b.bound_value);
                b.measured_value = b.measured_value.map(round_real);
                b.slack = b.slack.map(round_real);
                Report::Bound(b)
            }
            Report::Risk { label, summary: s } => Report::Risk {
                label: label.clone(),
                summary: RiskSummary {
                    expected_empirical: round_real(s.expected_empirical),
                    expected_population: round_real(s.expected_population),
                    gen_error: round_real(s.gen_error),
                    abs_gen_error: round_real(s.abs_gen_error),
                    excess_risk: round_real(s.excess_risk),
                },
            },
            Report::Estimate { label, estimate: e } => Report::Estimate {
                label: label.clone(),
                estimate: EstimateWithCI {
                    mean: round_real(e.mean),
                    std_error: round_real(e.std_error),
                    trials: e.trials,
                    ci95: (round_real(e.ci95.0), round_real(e.ci95.1)),
                },
            },
        }
    }
}

/// `x` rounded to 12 significant digits, with tiny magnitudes flushed to 0.
pub fn round_real(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    if x.abs() < ZERO_FLOOR {
        return 0.0;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema_version: String,
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_at_unix: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub reports: Vec<Report>,
}

impl ReportDocument {
    pub fn new(command: &str, reports: Vec<Report>) -> Self {
        Self { schema_version: SCHEMA_VERSION.to_string(), command: command.to_string(), generated_at_unix: None, seed: None, reports }
    }

    pub fn all_passed(&self) -> bool {
        self.reports.iter().all(Report::passed)
    }

    pub fn rounded(&self) -> Self {
        Self { reports: self.reports.iter().map(Report::rounded).collect(), ..self.clone() }
    }
}

#[derive(Debug)]
pub enum ReportError {
    Empty,
    NonFinite { report: usize, value: f64 },
    Json(serde_json::Error),
    Csv(String),
}

impl std::fmt::Display for ReportError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ReportError::Empty => write!(f, "no reports to emit"),
            ReportError::NonFinite { report, value } => write!(f, "report {report} holds a non-finite value {value}"),
            ReportError::Json(e) => write!(f, "json: {e}"),
            ReportError::Csv(e) => write!(f, "csv: {e}"),
        }
    }
}

impl std::error::Error for ReportError {}

pub fn emit(doc: &ReportDocument, format: Format) -> Result<Vec<u8>, ReportError> {
    if doc.reports.is_empty() {
        return Err(ReportError::Empty);
    }
    for (i, r) in doc.reports.iter().enumerate() {
        if let Some(&value) = r.reals().iter().find(|v| !v.is_finite()) {
            return Err(ReportError::NonFinite { report: i, value });
        }
    }
    let doc = doc.rounded();
    match format {
        Format::Json => {
            let mut out = serde_json::to_vec_pretty(&doc).map_err(ReportError::Json)?;
            out.push(b'\n');
            Ok(out)
        }
        Format::Csv => emit_csv(&doc),
    }
}

pub fn parse(bytes: &[u8], format: Format) -> Result<ReportDocument, ReportError> {
    match format {
        Format::Json => serde_json::from_slice(bytes).map_err(ReportError::Json),
        Format::Csv => parse_csv(bytes),
    }
}

pub const CSV_HEADER: [&str; 23] = [
    "schema_version",
    "command",
    "generated_at_unix",
    "seed",
    "kind",
    "label",
    "name",
    "paper_anchor",
    "inputs",
    "bound_value",
    "measured_value",
    "satisfied",
    "slack",
    "expected_empirical",
    "expected_population",
    "gen_error",
    "abs_gen_error",
    "excess_risk",
    "mean",
    "std_error",
    "trials",
    "ci95_lo",
    "ci95_hi",
];

fn col(name: &str) -> usize {
    CSV_HEADER.iter().position(|h| *h == name).expect("known column")
}

fn fmt_real(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-6..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn emit_csv(doc: &ReportDocument) -> Result<Vec<u8>, ReportError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
    let csv_err = |e: csv::Error| ReportError::Csv(e.to_string());
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for report in &doc.reports {
        let mut row = vec![String::new(); CSV_HEADER.len()];
        row[col("schema_version")] = doc.schema_version.clone();
        row[col("command")] = doc.command.clone();
        if let Some(t) = doc.generated_at_unix {
            row[col("generated_at_unix")] = t.to_string();
        }
        if let Some(s) = doc.seed {
            row[col("seed")] = s.to_string();
        }
        let mut set = |name: &str, value: String| row[col(name)] = value;
        match report {
            Report::Bound(b) => {
                set("kind", "bound".into());
                set("name", b.name.clone());
                set("paper_anchor", b.paper_anchor.clone());
                let inputs: Vec<String> = b.inputs.iter().map(|(k, v)| format!("{k}={}", fmt_real(*v))).collect();
                set("inputs", inputs.join(";"));
                set("bound_value", fmt_real(b.bound_value));
                if let Some(m) = b.measured_value {
                    set("measured_value", fmt_real(m));
                }
                if let Some(s) = b.satisfied {
                    set("satisfied", s.to_string());
                }
                if let Some(s) = b.slack {
                    set("slack", fmt_real(s));
                }
            }
            Report::Risk { label, summary: s } => {
                set("kind", "risk".into());
                set("label", label.clone());
                set("expected_empirical", fmt_real(s.expected_empirical));
                set("expected_population", fmt_real(s.expected_population));
                set("gen_error", fmt_real(s.gen_error));
                set("abs_gen_error", fmt_real(s.abs_gen_error));
                set("excess_risk", fmt_real(s.excess_risk));
            }
            Report::Estimate { label, estimate: e } => {
                set("kind", "estimate".into());
                set("label", label.clone());
                set("mean", fmt_real(e.mean));
                set("std_error", fmt_real(e.std_error));
                set("trials", e.trials.to_string());
                set("ci95_lo", fmt_real(e.ci95.0));
                set("ci95_hi", fmt_real(e.ci95.1));
            }
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| ReportError::Csv(e.to_string()))
}

fn parse_csv(bytes: &[u8]) -> Result<ReportDocument, ReportError> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(bytes);
    let header = r.headers().map_err(|e| ReportError::Csv(e.to_string()))?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(ReportError::Csv("unexpected header row".into()));
    }
    let bad = |msg: String| ReportError::Csv(msg);
    let mut doc: Option<ReportDocument> = None;
    for (line, record) in r.records().enumerate() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        let get = |name: &str| record.get(col(name)).unwrap_or("");
        let real = |name: &str| -> Result<f64, ReportError> {
            get(name).parse::<f64>().map_err(|e| bad(format!("row {}: `{name}`: {e}", line + 1)))
        };
        let opt_real = |name: &str| -> Result<Option<f64>, ReportError> {
            if get(name).is_empty() {
                Ok(None)
            } else {
                real(name).map(Some)
            }
        };
        let opt_u64 = |name: &str| -> Result<Option<u64>, ReportError> {
            match get(name) {
                "" => Ok(None),
                s => s.parse().map(Some).map_err(|e| bad(format!("row {}: `{name}`: {e}", line + 1))),
            }
        };
        let report = match get("kind") {
            "bound" => {
                let mut inputs = indexmap::IndexMap::new();
                for pair in get("inputs").split(';').filter(|p| !p.is_empty()) {
                    let (k, v) = pair.split_once('=').ok_or_else(|| bad(format!("row {}: bad input `{pair}`", line + 1)))?;
                    let v = v.parse::<f64>().map_err(|e| bad(format!("row {}: input `{k}`: {e}", line + 1)))?;
                    inputs.insert(k.to_string(), v);
                }
                let satisfied = match get("satisfied") {
                    "" => None,
                    "true" => Some(true),
                    "false" => Some(false),
                    other => return Err(bad(format!("row {}: satisfied = `{other}`", line + 1))),
                };
                Report::Bound(BoundReport {
                    name: get("name").to_string(),
                    paper_anchor: get("paper_anchor").to_string(),
                    inputs,
                    bound_value: real("bound_value")?,
                    measured_value: opt_real("measured_value")?,
                    satisfied,
                    slack: opt_real("slack")?,
                })
            }
            "risk" => Report::risk(
                get("label"),
                RiskSummary {
                    expected_empirical: real("expected_empirical")?,
                    expected_population: real("expected_population")?,
                    gen_error: real("gen_error")?,
                    abs_gen_error: real("abs_gen_error")?,
                    excess_risk: real("excess_risk")?,
                },
            ),
            "estimate" => Report::estimate(
                get("label"),
                EstimateWithCI {
                    mean: real("mean")?,
                    std_error: real("std_error")?,
                    trials: opt_u64("trials")?.ok_or_else(|| bad(format!("row {}: missing trials", line + 1)))?,
                    ci95: (real("ci95_lo")?, real("ci95_hi")?),
                },
            ),
            other => return Err(bad(format!("row {}: unknown kind `{other}`", line + 1))),
        };
        let doc = doc.get_or_insert_with(|| ReportDocument::new(get("command"), Vec::new()));
        doc.schema_version = get("schema_version").to_string();
        doc.generated_at_unix = opt_u64("generated_at_unix")?;
        doc.seed = opt_u64("seed")?;
        doc.reports.push(report);
    }
    doc.ok_or(ReportError::Empty)
}
