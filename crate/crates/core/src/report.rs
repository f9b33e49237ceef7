//! CSV and JSON output formats.
//!
//! CSV files open with a `# percolade-v1 <kind>` schema line and a
//! `# config: <json>` provenance line, followed by a header row. Sidecar JSON
//! documents echo the full configuration and the software version.

use std::io::Write;

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::Result;
use crate::experiments::{EstimateRow, HistogramBin};
use crate::lattice::CrossingEstimate;

pub const SCHEMA: &str = "percolade-v1";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const ESTIMATE_HEADER: [&str; 6] = ["value", "mean", "std_error", "trials", "ci_low", "ci_high"];
pub const CROSSING_HEADER: [&str; 6] = ["d", "event", "trials", "p_hat", "ci_low", "ci_high"];
pub const HISTOGRAM_HEADER: [&str; 3] = ["bin_low", "bin_high", "count"];

fn write_csv<W: Write>(
    mut out: W,
    kind: &str,
    config: &Value,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<()> {
    writeln!(out, "# {SCHEMA} {kind}")?;
    writeln!(out, "# config: {}", serde_json::to_string(config)?)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_estimate_csv<W: Write>(out: W, kind: &str, config: &Value, rows: &[EstimateRow]) -> Result<()> {
    write_csv(
        out,
        kind,
        config,
        &ESTIMATE_HEADER,
        rows.iter().map(|r| {
            vec![
                r.value.to_string(),
                r.mean.to_string(),
                r.std_error.to_string(),
                r.trials.to_string(),
                r.ci_low.to_string(),
                r.ci_high.to_string(),
            ]
        }),
    )
}

pub fn write_crossing_csv<W: Write>(out: W, config: &Value, rows: &[CrossingEstimate]) -> Result<()> {
    write_csv(
        out,
        "crossings",
        config,
        &CROSSING_HEADER,
        rows.iter().map(|r| {
            vec![
                r.d.to_string(),
                r.event.as_str().to_string(),
                r.trials.to_string(),
                r.p_hat.to_string(),
                r.ci_low.to_string(),
                r.ci_high.to_string(),
            ]
        }),
    )
}

pub fn write_histogram_csv<W: Write>(out: W, config: &Value, bins: &[HistogramBin]) -> Result<()> {
    write_csv(
        out,
        "cascade-histogram",
        config,
        &HISTOGRAM_HEADER,
        bins.iter()
            .map(|b| vec![b.low.to_string(), b.high.to_string(), b.count.to_string()]),
    )
}

/// Provenance document: schema, software version, command, config echo and result.
pub fn sidecar<T: Serialize>(command: &str, config: &Value, result: &T) -> Result<Value> {
    Ok(json!({
        "schema": SCHEMA,
        "software": "percolade",
        "version": VERSION,
        "command": command,
        "config": config,
        "result": serde_json::to_value(result)?,
    }))
}
