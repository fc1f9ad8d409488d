// Calls a server-side function by name: the dialect learns the name, the
// backend supplies the implementation.

use std::error::Error;
use std::sync::Arc;

use lazydf::backend::{MemoryBackend, MemoryCatalog};
use lazydf::dialect::Dialect;
use lazydf::frame::{FrameError, Session};
use serde_json::{json, Value};

#[derive(Debug)]
pub struct Scored {
    pub query: String,
    pub rows: Vec<Value>,
    pub unknown_rejected: bool,
}

pub fn run_example() -> Result<Scored, Box<dyn Error>> {
    let catalog = Arc::new(MemoryCatalog::default());
    catalog.load(
        "Tweets",
        [
            json!({"id": 1, "text": "great game tonight"}),
            json!({"id": 2, "text": "awful traffic"}),
            json!({"id": 3, "text": "great coffee, awful line"}),
        ],
    )?;
    catalog.register_function("sentiment", |args: &[Value]| {
        let text = args.first().and_then(Value::as_str).ok_or("sentiment expects a string")?;
        let score = text.matches("great").count() as i64 - text.matches("awful").count() as i64;
        Ok(json!(score))
    });

    let dialect = Dialect::sqlpp().with_function("sentiment", "sentiment");
    let session = Session::new(Arc::new(MemoryBackend::new(catalog)), dialect);
    let tweets = session.open("Tweets")?;
    let scored = tweets.with_column("score", &tweets.col("text")?.call("sentiment")?)?;
    let query = scored.explain()?;
    println!("{query}");
    let rows = scored.collect()?;
    for r in &rows {
        println!("{r}");
    }

    let unknown_rejected = matches!(
        tweets.col("text")?.call("toxicity"),
        Err(FrameError::UnknownFunction { .. })
    );
    Ok(Scored {
        query,
        rows,
        unknown_rejected,
    })
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()?;
    Ok(())
}
