//! Plot-ready CSV and JSON renderings of experiment results.
//!
//! Floats are written in Rust's shortest round-trip form, so identical
//! results always render to identical bytes.

use std::io;

use serde_json::{json, Value};

use super::{ExperimentResult, MetricRow};
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 11] = [
    "distribution",
    "n",
    "metric",
    "trials",
    "seed",
    "estimate",
    "std_error",
    "ci95_lo",
    "ci95_hi",
    "diag_violations",
    "runtime_ms",
];

/// Placeholder for undefined or unrecorded values.
pub const MISSING: &str = "NA";

fn export_err(e: impl std::fmt::Display) -> Error {
    Error::Export(e.to_string())
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| MISSING.to_string(), |v| v.to_string())
}

fn csv_record(result: &ExperimentResult, row: &MetricRow, record_runtime: bool) -> [String; 11] {
    [
        result.distribution.clone(),
        row.n.to_string(),
        row.metric.name().to_string(),
        result.trials.to_string(),
        result.seed.to_string(),
        opt(Some(row.estimate).filter(|x| !x.is_nan())),
        opt(row.std_error),
        opt(row.ci95.map(|c| c.0)),
        opt(row.ci95.map(|c| c.1)),
        row.diag_violations.to_string(),
        if record_runtime {
            row.runtime_ms.to_string()
        } else {
            MISSING.to_string()
        },
    ]
}

/// Writes a header and one row per `(metric, n)` of every result.
///
/// Wall-clock runtimes vary between runs, so they are only written when
/// `record_runtime` is set; otherwise the column holds `NA` and the output
/// is a pure function of the configuration.
pub fn write_csv<W: io::Write>(
    results: &[ExperimentResult],
    out: W,
    record_runtime: bool,
) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(CSV_HEADER).map_err(export_err)?;
    for result in results {
        for row in &result.rows {
            writer
                .write_record(csv_record(result, row, record_runtime))
                .map_err(export_err)?;
        }
    }
    writer.flush().map_err(export_err)
}

pub fn to_csv_string(results: &[ExperimentResult], record_runtime: bool) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(results, &mut buf, record_runtime)?;
    String::from_utf8(buf).map_err(export_err)
}

/// The same rows as [`write_csv`] as a JSON array of objects, with `null`
/// for missing values, followed by each experiment's diagnostics.
pub fn to_json(results: &[ExperimentResult], record_runtime: bool) -> Value {
    let experiments: Vec<Value> = results
        .iter()
        .map(|result| {
            let rows: Vec<Value> = result
                .rows
                .iter()
                .map(|row| {
                    json!({
                        "distribution": result.distribution,
                        "n": row.n,
                        "metric": row.metric.name(),
                        "trials": result.trials,
                        "seed": result.seed,
                        "estimate": row.estimate,
                        "std_error": row.std_error,
                        "ci95_lo": row.ci95.map(|c| c.0),
                        "ci95_hi": row.ci95.map(|c| c.1),
                        "trials_used": row.trials_used,
                        "diag_violations": row.diag_violations,
                        "runtime_ms": record_runtime.then_some(row.runtime_ms),
                    })
                })
                .collect();
            json!({
                "distribution": result.distribution,
                "seed": result.seed,
                "trials": result.trials,
                "rows": rows,
                "diagnostics": result.diagnostics,
            })
        })
        .collect();
    Value::Array(experiments)
}
