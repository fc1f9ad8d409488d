// Builds a query step by step, inspecting the statement after each step;
// nothing is sent until `head`.

use std::error::Error;
use std::sync::Arc;

use lazydf::backend::MemoryCatalog;
use lazydf::frame::Session;
use lazydf::wisconsin::{self, GenConfig};

/// Statements shown along the way, and the rows `head(2)` returned.
#[derive(Debug)]
pub struct Walkthrough {
    pub after_selection: String,
    pub after_projection: String,
    pub requests_before_head: u64,
    pub requests_after_head: u64,
    pub rows: Vec<serde_json::Value>,
}

pub fn run_example() -> Result<Walkthrough, Box<dyn Error>> {
    let catalog = Arc::new(MemoryCatalog::default());
    catalog.load("Data", wisconsin::records(&GenConfig::new(1_000, 7))?.map(|r| r.to_json()))?;
    let session = Session::memory(catalog);

    let df = session.open("Data")?;
    let selected = df.filter(&df.col("ten")?.eq(5))?;
    let after_selection = selected.explain()?;
    println!("{after_selection}");

    let projected = selected.select(&["two", "four"])?;
    let after_projection = projected.explain()?;
    println!("{after_projection}");
    let requests_before_head = session.request_count();

    let rows = projected.head(2)?;
    for row in &rows {
        println!("{row}");
    }
    Ok(Walkthrough {
        after_selection,
        after_projection,
        requests_before_head,
        requests_after_head: session.request_count(),
        rows,
    })
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    let w = run_example()?;
    println!("requests: {} before head, {} after", w.requests_before_head, w.requests_after_head);
    Ok(())
}
