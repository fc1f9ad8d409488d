// Renders the DDL that sets up the benchmark datasets and applies it to an
// in-memory catalog.

use std::error::Error;
use std::path::PathBuf;

use lazydf::ast::DatasetRef;
use lazydf::backend::MemoryCatalog;
use lazydf::dialect::{DdlRequest, Dialect};
use lazydf::wisconsin::{self, GenConfig};

pub fn run_example() -> Result<Vec<String>, Box<dyn Error>> {
    let dir = std::env::temp_dir().join(format!("lazydf-ddl-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let path: PathBuf = dir.join("data.json");
    wisconsin::generate(&GenConfig::new(100, 2), &path)?;

    let data = DatasetRef::unqualified("Data")?;
    let requests = vec![
        wisconsin::closed_type("WisconsinType"),
        wisconsin::keyed_dataset(data.clone(), "WisconsinType", false),
        DdlRequest::secondary_index("tenIdx", data.clone(), "ten"),
        DdlRequest::LoadDataset {
            dataset: data,
            path: format!("localhost://{}", path.display()),
            format: "json".into(),
        },
    ];

    let dialect = Dialect::sqlpp();
    let catalog = MemoryCatalog::default();
    let mut texts = Vec::new();
    for r in &requests {
        let text = dialect.render_ddl(r)?;
        println!("{text}\n");
        catalog.apply_ddl(r)?;
        texts.push(text);
    }
    println!("Data holds {} records; index on ten: {}", catalog.records("Data")?.len(), catalog.has_index("Data", Some("ten")));
    std::fs::remove_dir_all(&dir)?;
    Ok(texts)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()?;
    Ok(())
}
