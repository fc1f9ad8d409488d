// Writes a Wisconsin relation as JSON lines and CSV and checks a few of
// its selectivity guarantees.

use std::collections::BTreeMap;
use std::error::Error;

use lazydf::wisconsin::{self, Format, GenConfig};

#[derive(Debug)]
pub struct Generated {
    pub json_lines: usize,
    pub csv_lines: usize,
    pub json_bytes: u64,
    /// Records per `onePercent` value.
    pub one_percent_counts: BTreeMap<i64, usize>,
}

pub fn run_example() -> Result<Generated, Box<dyn Error>> {
    let dir = std::env::temp_dir().join(format!("lazydf-gen-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;

    let config = GenConfig::new(1_000, 42);
    let json_path = dir.join("wisconsin.json");
    let summary = wisconsin::generate(&config, &json_path)?;
    println!("{} records, {} bytes -> {}", summary.records_written, summary.bytes, json_path.display());

    let csv_path = dir.join("wisconsin.csv");
    wisconsin::generate(&config.clone().with_format(Format::Csv), &csv_path)?;

    let json = std::fs::read_to_string(&json_path)?;
    let mut one_percent_counts = BTreeMap::new();
    for line in json.lines() {
        let row: serde_json::Value = serde_json::from_str(line)?;
        *one_percent_counts.entry(row["onePercent"].as_i64().unwrap_or(-1)).or_default() += 1;
    }
    println!("first record: {}", json.lines().next().unwrap_or_default());

    let csv_lines = std::fs::read_to_string(&csv_path)?.lines().count();
    std::fs::remove_dir_all(&dir)?;
    Ok(Generated {
        json_lines: json.lines().count(),
        csv_lines,
        json_bytes: summary.bytes,
        one_percent_counts,
    })
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    let g = run_example()?;
    println!("{} JSON lines, {} CSV lines (with header)", g.json_lines, g.csv_lines);
    Ok(())
}
