//! CSV and JSON output.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::config::BatchConfig;
use crate::run::RunRow;
use crate::summary::Summary;

pub const SCHEMA_VERSION: u32 = 1;

pub const CSV_COLUMNS: [&str; 8] = ["problem", "solver", "outer", "inner", "seconds", "kkt", "objective", "status"];

/// Everything needed to reproduce and re-tabulate a batch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub config: BatchConfig,
    pub records: Vec<RunRow>,
    pub summary: Option<Summary>,
}

impl Report {
    pub fn new(config: BatchConfig, records: Vec<RunRow>, summary: Option<Summary>) -> Self {
        Self { schema_version: SCHEMA_VERSION, config, records, summary }
    }
}

/// One CSV row per record; an empty slice writes only the header.
pub fn write_csv<W: Write>(out: W, rows: &[RunRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    let opt = |v: Option<f64>| v.map_or(String::new(), |v| format!("{v:e}"));
    for r in rows {
        w.write_record([
            r.problem.clone(),
            r.solver.as_str().to_string(),
            r.outer.to_string(),
            r.inner.to_string(),
            format!("{:.6}", r.seconds),
            opt(r.kkt),
            opt(r.objective),
            r.status.as_str().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write>(out: W, report: &Report) -> serde_json::Result<()> {
    serde_json::to_writer_pretty(out, report)
}

#[derive(Debug, thiserror::Error)]
pub enum ReadError {
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("unsupported schema version {0} (expected {SCHEMA_VERSION})")]
    Schema(u32),
}

pub fn read_json<R: Read>(input: R) -> Result<Report, ReadError> {
    let report: Report = serde_json::from_reader(input)?;
    if report.schema_version != SCHEMA_VERSION {
        return Err(ReadError::Schema(report.schema_version));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SolverKind;
    use irsplit::RunStatus;

    #[test]
    fn header_only_for_no_rows() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &[]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "problem,solver,outer,inner,seconds,kkt,objective,status\n");
    }

    #[test]
    fn json_roundtrip() {
        let rows = vec![RunRow {
            problem: "p".into(),
            solver: SolverKind::Fista,
            seed: 3,
            outer: 10,
            inner: 12,
            seconds: 0.25,
            kkt: Some(1e-7),
            objective: None,
            status: RunStatus::Converged,
            error: None,
        }];
        let summary = crate::summary::summarize(&rows).ok();
        let report = Report::new(BatchConfig::default(), rows, summary);
        let mut buf = Vec::new();
        write_json(&mut buf, &report).unwrap();
        assert_eq!(read_json(buf.as_slice()).unwrap(), report);
        let mut wrong = report.clone();
        wrong.schema_version = 99;
        let text = serde_json::to_string(&wrong).unwrap();
        assert!(matches!(read_json(text.as_bytes()), Err(ReadError::Schema(99))));
    }
}
