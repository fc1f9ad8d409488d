// Serves an in-memory catalog over HTTP and queries it through the REST
// client, the same way a remote database would be used.

use std::error::Error;
use std::sync::Arc;
use std::time::Duration;

use lazydf::backend::{HttpBackend, HttpConfig, MemoryCatalog, OracleServer};
use lazydf::dialect::Dialect;
use lazydf::frame::Session;
use lazydf::wisconsin::{self, GenConfig};
use serde_json::Value;

#[derive(Debug)]
pub struct Answers {
    pub count: u64,
    pub max_unique1: Value,
    pub groups: usize,
    pub requests: u64,
    pub served: u64,
}

pub fn run_example() -> Result<Answers, Box<dyn Error>> {
    let catalog = Arc::new(MemoryCatalog::default());
    catalog.load("Data", wisconsin::records(&GenConfig::new(500, 1))?.map(|r| r.to_json()))?;
    let server = OracleServer::start(catalog, "127.0.0.1:0")?;
    println!("serving on {}", server.base_url());

    let config = HttpConfig::new(server.base_url()).with_timeout(Duration::from_secs(10));
    let session = Session::new(Arc::new(HttpBackend::new(config)?), Dialect::sqlpp());
    let df = session.open("Data")?;

    let count = df.filter(&df.col("twenty")?.lt(10))?.count()?;
    let max_unique1 = df.col("unique1")?.max()?;
    let groups = df.groupby("ten")?.agg("four", "max")?.collect()?.len();
    println!("count={count} max={max_unique1} groups={groups}");

    let answers = Answers {
        count,
        max_unique1,
        groups,
        requests: session.request_count(),
        served: server.served(),
    };
    server.shutdown();
    Ok(answers)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    let a = run_example()?;
    println!("{} requests sent, {} served", a.requests, a.served);
    Ok(())
}
