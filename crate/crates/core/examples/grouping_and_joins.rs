// Grouped aggregates, sorting, joins and summaries over generated data.

use std::error::Error;
use std::sync::Arc;

use lazydf::ast::{AggFn, Aggregation, Expr};
use lazydf::backend::MemoryCatalog;
use lazydf::frame::Session;
use lazydf::wisconsin::{self, GenConfig};
use serde_json::Value;

#[derive(Debug)]
pub struct Results {
    pub groups: Vec<Value>,
    pub top: Vec<Value>,
    pub joined: u64,
    pub ten_max: Value,
}

pub fn run_example() -> Result<Results, Box<dyn Error>> {
    let catalog = Arc::new(MemoryCatalog::default());
    catalog.load("Data", wisconsin::records(&GenConfig::new(1_000, 9))?.map(|r| r.to_json()))?;
    catalog.load("Small", wisconsin::records(&GenConfig::new(100, 4))?.map(|r| r.to_json()))?;
    let session = Session::memory(catalog);
    let df = session.open("Data")?;

    let by_four = df.groupby("four")?.aggs(vec![
        Aggregation::count_star("cnt"),
        Aggregation::of(AggFn::Min, Expr::col("unique1"), "lowest"),
        Aggregation::of(AggFn::Max, Expr::col("unique1"), "highest"),
    ])?;
    println!("{}", by_four.explain()?);
    let groups = by_four.collect()?;

    let top = df.sort_values("unique1", false)?.select(&["unique1", "stringu1"])?.head(3)?;

    let small = session.open("Small")?;
    let joined_frame = df.merge(&small, "unique1", "unique1", "inner")?;
    println!("{}", session.dialect().render_query(&joined_frame.count_plan()?)?);
    let joined = joined_frame.count()?;

    let summary = df.describe(&["ten"])?;
    Ok(Results {
        groups,
        top,
        joined,
        ten_max: summary["ten"].max.clone(),
    })
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    let r = run_example()?;
    println!("{} groups, join {} rows, max(ten) {}", r.groups.len(), r.joined, r.ten_max);
    for row in &r.top {
        println!("{row}");
    }
    Ok(())
}
