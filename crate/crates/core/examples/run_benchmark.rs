// Runs the twelve-expression benchmark against an in-memory backend with
// a short protocol and prints the CSV report.

use std::error::Error;
use std::sync::Arc;

use lazydf::backend::MemoryCatalog;
use lazydf::bench::{run_bench, write_report, BenchConfig, BenchReport, MonotonicClock, ReportFormat};
use lazydf::frame::Session;
use lazydf::wisconsin::{self, GenConfig};

pub fn run_example() -> Result<BenchReport, Box<dyn Error>> {
    let catalog = Arc::new(MemoryCatalog::default());
    for ds in ["Data", "leftData", "rightData"] {
        catalog.load(ds, wisconsin::records(&GenConfig::new(2_000, 3))?.map(|r| r.to_json()))?;
    }
    let session = Session::memory(catalog);
    let config = BenchConfig {
        runs: 4,
        warmup: 1,
        seed: 11,
        ..BenchConfig::default()
    };
    let report = run_bench(&session, &config, &MonotonicClock::default())?;
    write_report(&report, std::io::stdout().lock(), ReportFormat::Csv)?;
    Ok(report)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    let report = run_example()?;
    for e in &report.expressions {
        eprintln!(
            "{:>2} {:<70} total {:.6}s expr {:.6}s",
            e.expression_id,
            e.description,
            e.mean_total_seconds.unwrap_or(f64::NAN),
            e.mean_expr_seconds.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
