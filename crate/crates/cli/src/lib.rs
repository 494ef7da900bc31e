//! Batch verification front-end: job files in, deterministic reports out.
//!
//! A job fixes the suite, the prime context and a seed; the seed fully
//! determines every randomized input, so identical jobs produce
//! byte-identical report bodies (wall-clock timing is reported separately
//! and never enters the body).

pub mod gen;
pub mod payload;
pub mod suites;

use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug)]
pub enum CliError {
    JobParse(String),
    Setup(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::JobParse(m) => write!(f, "JobParseError: {m}"),
            CliError::Setup(m) => write!(f, "setup error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

/// A verification job. Unknown fields and unknown suite names are rejected.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Job {
    pub schema: u32,
    pub suite: String,
    pub p: u64,
    #[serde(rename = "N")]
    pub n: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub cases: Option<u32>,
    /// Witt length for the witt-laws / comparison / overconvergence suites.
    #[serde(default)]
    pub witt_length: Option<usize>,
    /// Geometry for the cohomology suite: "A1" or "Gm".
    #[serde(default)]
    pub geometry: Option<String>,
    #[serde(default)]
    pub window: Option<i64>,
}

pub const SUITES: &[&str] = &[
    "witt-laws",
    "homotopy",
    "comparison",
    "functoriality",
    "cohomology",
    "overconvergence",
    "all",
];

impl Job {
    pub fn from_json(s: &str) -> Result<Job, CliError> {
        let job: Job = serde_json::from_str(s).map_err(|e| CliError::JobParse(e.to_string()))?;
        if job.schema != SCHEMA_VERSION {
            return Err(CliError::JobParse(format!("unsupported schema {}", job.schema)));
        }
        if !SUITES.contains(&job.suite.as_str()) {
            return Err(CliError::JobParse(format!("unknown suite `{}`", job.suite)));
        }
        Ok(job)
    }
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct CaseResult {
    pub id: String,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<serde_json::Value>,
}

impl CaseResult {
    pub fn pass(id: impl Into<String>) -> CaseResult {
        CaseResult { id: id.into(), status: "pass".into(), detail: None }
    }

    pub fn pass_with(id: impl Into<String>, detail: serde_json::Value) -> CaseResult {
        CaseResult { id: id.into(), status: "pass".into(), detail: Some(detail) }
    }

    pub fn fail(id: impl Into<String>, detail: serde_json::Value) -> CaseResult {
        CaseResult { id: id.into(), status: "fail".into(), detail: Some(detail) }
    }

    pub fn from_check(id: impl Into<String>, r: Result<(), String>) -> CaseResult {
        match r {
            Ok(()) => CaseResult::pass(id),
            Err(detail) => CaseResult::fail(id, serde_json::Value::String(detail)),
        }
    }

    pub fn passed(&self) -> bool {
        self.status == "pass"
    }
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

/// Everything that must be byte-identical across reruns of the same job.
#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct ReportBody {
    pub schema: u32,
    pub suite: String,
    pub p: u64,
    #[serde(rename = "N")]
    pub n: u32,
    pub seed: u64,
    pub precision_note: String,
    pub cases: Vec<CaseResult>,
    pub summary: Summary,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub body: ReportBody,
    pub wall_ms: u128,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.body.summary.failed == 0
    }
}

pub fn make_body(
    suite: &str,
    p: u64,
    n: u32,
    seed: u64,
    precision_note: String,
    cases: Vec<CaseResult>,
) -> ReportBody {
    let passed = cases.iter().filter(|c| c.passed()).count();
    let summary = Summary { total: cases.len(), passed, failed: cases.len() - passed };
    ReportBody {
        schema: SCHEMA_VERSION,
        suite: suite.to_string(),
        p,
        n,
        seed,
        precision_note,
        cases,
        summary,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Format, String> {
        match s {
            "json" => Ok(Format::Json),
            "text" => Ok(Format::Text),
            other => Err(format!("unknown format `{other}` (expected json|text)")),
        }
    }
}

/// Canonical serialization of the report body.
pub fn emit(body: &ReportBody, format: Format) -> Vec<u8> {
    match format {
        Format::Json => {
            let mut out = serde_json::to_vec_pretty(body).expect("report serializes");
            out.push(b'\n');
            out
        }
        Format::Text => {
            let mut s = String::new();
            s.push_str(&format!(
                "suite: {} (p={}, N={}, seed={})\n",
                body.suite, body.p, body.n, body.seed
            ));
            s.push_str(&format!("precision: {}\n", body.precision_note));
            for c in &body.cases {
                match &c.detail {
                    Some(d) => s.push_str(&format!("case {}: {} {}\n", c.id, c.status, d)),
                    None => s.push_str(&format!("case {}: {}\n", c.id, c.status)),
                }
            }
            s.push_str(&format!(
                "summary: {}/{} passed\n",
                body.summary.passed, body.summary.total
            ));
            s.into_bytes()
        }
    }
}

/// Run a job: dispatch to the named suite.
pub fn run(job: &Job) -> Result<Report, CliError> {
    let start = std::time::Instant::now();
    let cases = suites::dispatch(job)?;
    let note = suites::precision_note(job);
    let body = make_body(&job.suite, job.p, job.n, job.seed, note, cases);
    Ok(Report { body, wall_ms: start.elapsed().as_millis() })
}
