// Materializes a filtered, projected frame into a new dataset and queries
// the result right away.

use std::error::Error;
use std::sync::Arc;

use lazydf::backend::MemoryCatalog;
use lazydf::frame::{PersistPolicy, Session};
use lazydf::wisconsin::{self, GenConfig};

#[derive(Debug)]
pub struct Persisted {
    pub source_count: u64,
    pub target_count: u64,
    pub target_query: String,
    pub create_or_fail_rejected_existing: bool,
}

pub fn run_example() -> Result<Persisted, Box<dyn Error>> {
    let catalog = Arc::new(MemoryCatalog::default());
    catalog.load("Data", wisconsin::records(&GenConfig::new(1_000, 5))?.map(|r| r.to_json()))?;
    catalog.apply_ddl(&wisconsin::closed_type("WisconsinType"))?;
    let session = Session::memory(catalog);

    let df = session.open("Data")?;
    let low = df
        .filter(&(df.col("onePercent")?.lt(10) & df.col("two")?.eq(0)))?
        .select(&["unique1", "onePercent"])?;
    let source_count = low.count()?;

    let target = low.persist("Demo.lowOnePercent", &PersistPolicy::Append)?;
    let target_query = target.explain()?;
    let target_count = target.count()?;
    println!("{target_query} -> {target_count} rows");

    let policy = PersistPolicy::CreateOrFail {
        type_name: "WisconsinType".into(),
        primary_key: "unique2".into(),
    };
    df.persist("Demo.copy", &policy)?;
    let create_or_fail_rejected_existing = df.persist("Demo.copy", &policy).is_err();

    Ok(Persisted {
        source_count,
        target_count,
        target_query,
        create_or_fail_rejected_existing,
    })
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    let p = run_example()?;
    println!("source {} rows, target {} rows", p.source_count, p.target_count);
    Ok(())
}
