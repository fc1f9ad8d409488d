use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde_json::Value;
use sha2::{Digest, Sha256};

use super::timing::{BenchReport, TimingMode};
use super::{format_predicates, BenchError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(format!("unknown report format {other:?} (expected csv or json)")),
        }
    }
}

/// Mean of the samples after dropping the first `warmup`; `None` if none remain.
pub fn mean_after_warmup(samples: &[f64], warmup: usize) -> Option<f64> {
    let kept = samples.get(warmup..)?;
    if kept.is_empty() {
        return None;
    }
    Some(kept.iter().sum::<f64>() / kept.len() as f64)
}

/// JSON text with object keys sorted at every level.
fn canonical_json(v: &Value, out: &mut String) {
    match v {
        Value::Object(m) => {
            let mut keys: Vec<&String> = m.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&Value::String(k.clone()).to_string());
                out.push(':');
                canonical_json(&m[k], out);
            }
            out.push('}');
        }
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                canonical_json(item, out);
            }
            out.push(']');
        }
        other => out.push_str(&other.to_string()),
    }
}

/// SHA-256 (hex) of the row multiset: rows are canonicalized, sorted and
/// hashed newline-separated, so row order does not matter.
pub fn checksum(rows: &[Value]) -> String {
    let mut lines: Vec<String> = rows
        .iter()
        .map(|r| {
            let mut s = String::new();
            canonical_json(r, &mut s);
            s
        })
        .collect();
    lines.sort_unstable();
    let mut hasher = Sha256::new();
    for l in &lines {
        hasher.update(l.as_bytes());
        hasher.update(b"\n");
    }
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for b in digest {
        let _ = write!(hex, "{b:02x}");
    }
    hex
}

const CSV_HEADER: [&str; 7] = [
    "expression_id",
    "mode",
    "mean_seconds",
    "run_index",
    "seconds",
    "predicates",
    "checksum",
];

/// Writes the report. CSV holds one row per run and mode plus one mean row
/// per expression and mode (blank `run_index`/`seconds`).
pub fn write_report<W: Write>(report: &BenchReport, out: W, format: ReportFormat) -> Result<(), BenchError> {
    match format {
        ReportFormat::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, report)?;
            out.write_all(b"\n")?;
            out.flush()?;
        }
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(CSV_HEADER)?;
            for e in &report.expressions {
                let id = e.expression_id.to_string();
                let shared_predicates = match e.runs.first() {
                    Some(first) if e.runs.iter().all(|r| r.predicates == first.predicates) => {
                        format_predicates(&first.predicates)
                    }
                    _ => String::new(),
                };
                for mode in [TimingMode::Total, TimingMode::ExprOnly] {
                    for (r, secs) in e.runs.iter().zip(e.samples(mode)) {
                        w.write_record([
                            id.as_str(),
                            mode.label(),
                            "",
                            &r.index.to_string(),
                            &secs.to_string(),
                            &format_predicates(&r.predicates),
                            &r.checksum,
                        ])?;
                    }
                    let mean = e.mean(mode).map(|m| m.to_string()).unwrap_or_default();
                    w.write_record([
                        id.as_str(),
                        mode.label(),
                        &mean,
                        "",
                        "",
                        &shared_predicates,
                        e.stable_checksum().unwrap_or(""),
                    ])?;
                }
            }
            w.flush()?;
        }
    }
    Ok(())
}

pub fn emit_report(report: &BenchReport, path: &Path, format: ReportFormat) -> Result<(), BenchError> {
    let file = File::create(path)?;
    write_report(report, BufWriter::new(file), format)
}
