//! Result tables: per-problem rows, ratio columns and a geometric-mean row.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::config::SolverKind;
use crate::run::RunRow;

/// `exp(mean(log v))`; `None` for an empty slice or any value ≤ 0.
pub fn geometric_mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() || values.iter().any(|v| !(*v > 0.0)) {
        return None;
    }
    Some((values.iter().map(|v| v.ln()).sum::<f64>() / values.len() as f64).exp())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub outer: f64,
    pub inner: f64,
    pub seconds: f64,
}

impl Metrics {
    fn of(row: &RunRow) -> Self {
        Self { outer: row.outer as f64, inner: row.inner as f64, seconds: row.seconds }
    }

    fn ratio(&self, den: &Metrics) -> Metrics {
        Metrics { outer: self.outer / den.outer, inner: self.inner / den.inner, seconds: self.seconds / den.seconds }
    }
}

/// Geometric means per metric; a field is `None` when no converged row had a
/// positive value.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MeanMetrics {
    pub outer: Option<f64>,
    pub inner: Option<f64>,
    pub seconds: Option<f64>,
}

impl MeanMetrics {
    fn of(ms: &[Metrics]) -> Self {
        let col = |f: fn(&Metrics) -> f64| geometric_mean(&ms.iter().map(f).collect::<Vec<_>>());
        Self { outer: col(|m| m.outer), inner: col(|m| m.inner), seconds: col(|m| m.seconds) }
    }

    fn ratio(&self, den: &MeanMetrics) -> MeanMetrics {
        let r = |a: Option<f64>, b: Option<f64>| Some(a? / b?);
        MeanMetrics { outer: r(self.outer, den.outer), inner: r(self.inner, den.inner), seconds: r(self.seconds, den.seconds) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemRow {
    pub problem: String,
    /// Converged metrics per solver; failed or unconverged runs are absent.
    pub solvers: BTreeMap<SolverKind, Metrics>,
    /// `solver / reference` for each ratio column present on this problem.
    pub ratios: BTreeMap<String, Metrics>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub solvers: Vec<SolverKind>,
    pub problems: Vec<ProblemRow>,
    pub geometric_mean: BTreeMap<SolverKind, MeanMetrics>,
    /// Ratio of geometric means, same keys as [`ProblemRow::ratios`].
    pub geometric_mean_ratios: BTreeMap<String, MeanMetrics>,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SummaryError {
    #[error("no records to summarize")]
    EmptyInput,
}

/// Ratio columns: the inertial method against each other solver present.
const PAIRS: [(SolverKind, SolverKind); 2] =
    [(SolverKind::AdmmInertial, SolverKind::AdmmPlain), (SolverKind::AdmmInertial, SolverKind::Fista)];

fn ratio_key(num: SolverKind, den: SolverKind) -> String {
    format!("{}/{}", num.as_str(), den.as_str())
}

/// Builds the table. When a problem/solver pair appears more than once the
/// last row wins.
pub fn summarize(rows: &[RunRow]) -> Result<Summary, SummaryError> {
    if rows.is_empty() {
        return Err(SummaryError::EmptyInput);
    }
    let mut solvers: Vec<SolverKind> = rows.iter().map(|r| r.solver).collect();
    solvers.sort();
    solvers.dedup();

    let mut order: Vec<String> = Vec::new();
    let mut cells: BTreeMap<String, BTreeMap<SolverKind, Metrics>> = BTreeMap::new();
    for row in rows {
        if !order.contains(&row.problem) {
            order.push(row.problem.clone());
        }
        let entry = cells.entry(row.problem.clone()).or_default();
        if row.converged() {
            entry.insert(row.solver, Metrics::of(row));
        } else {
            entry.remove(&row.solver);
        }
    }

    let problems: Vec<ProblemRow> = order
        .into_iter()
        .map(|problem| {
            let solvers = cells.remove(&problem).unwrap_or_default();
            let ratios = PAIRS
                .iter()
                .filter_map(|&(n, d)| Some((ratio_key(n, d), solvers.get(&n)?.ratio(solvers.get(&d)?))))
                .collect();
            ProblemRow { problem, solvers, ratios }
        })
        .collect();

    let geometric_mean: BTreeMap<SolverKind, MeanMetrics> = solvers
        .iter()
        .map(|s| {
            let ms: Vec<Metrics> = problems.iter().filter_map(|p| p.solvers.get(s).copied()).collect();
            (*s, MeanMetrics::of(&ms))
        })
        .collect();
    let geometric_mean_ratios = PAIRS
        .iter()
        .filter_map(|&(n, d)| Some((ratio_key(n, d), geometric_mean.get(&n)?.ratio(geometric_mean.get(&d)?))))
        .collect();

    Ok(Summary { solvers, problems, geometric_mean, geometric_mean_ratios })
}

impl Summary {
    /// Plain-text table of one metric.
    pub fn table(&self, metric: &str) -> String {
        let pick = |m: &Metrics| match metric {
            "inner" => m.inner,
            "seconds" => m.seconds,
            _ => m.outer,
        };
        let pick_mean = |m: &MeanMetrics| match metric {
            "inner" => m.inner,
            "seconds" => m.seconds,
            _ => m.outer,
        };
        let fmt = |v: Option<f64>| match v {
            Some(v) if metric == "seconds" => format!("{v:.4}"),
            Some(v) if v.fract() == 0.0 => format!("{v:.0}"),
            Some(v) => format!("{v:.3}"),
            None => "-".into(),
        };
        let ratio_keys: Vec<&String> = self.geometric_mean_ratios.keys().collect();
        let mut out = String::new();
        let _ = write!(out, "{:<28}", metric);
        for s in &self.solvers {
            let _ = write!(out, " {:>14}", s.as_str());
        }
        for k in &ratio_keys {
            let _ = write!(out, " {:>26}", k);
        }
        out.push('\n');
        for p in &self.problems {
            let _ = write!(out, "{:<28}", p.problem);
            for s in &self.solvers {
                let _ = write!(out, " {:>14}", fmt(p.solvers.get(s).map(pick)));
            }
            for k in &ratio_keys {
                let _ = write!(out, " {:>26}", fmt(p.ratios.get(*k).map(pick)));
            }
            out.push('\n');
        }
        let _ = write!(out, "{:<28}", "geometric mean");
        for s in &self.solvers {
            let v = self.geometric_mean.get(s).and_then(pick_mean);
            let text = match v {
                Some(v) if metric == "seconds" => format!("{v:.4}"),
                Some(v) => format!("{v:.2}"),
                None => "-".into(),
            };
            let _ = write!(out, " {:>14}", text);
        }
        for k in &ratio_keys {
            let v = pick_mean(&self.geometric_mean_ratios[*k]);
            let _ = write!(out, " {:>26}", v.map_or("-".into(), |v| format!("{v:.3}")));
        }
        out.push('\n');
        out
    }
}
