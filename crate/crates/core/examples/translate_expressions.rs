// Prints the SQL++ and ANSI SQL statements of the twelve benchmark
// expressions without running them.

use std::error::Error;
use std::sync::Arc;

use lazydf::backend::MemoryBackend;
use lazydf::bench::{describe, BenchDatasets, BenchFrames, Expression};
use lazydf::dialect::Dialect;
use lazydf::frame::Session;

#[derive(Debug)]
pub struct Translation {
    pub id: u8,
    pub sqlpp: String,
    pub ansi: String,
}

fn statements(dialect: Dialect) -> Result<Vec<String>, Box<dyn Error>> {
    let session = Session::new(Arc::new(MemoryBackend::new(Arc::default())), dialect);
    let frames = BenchFrames::open(&session, &BenchDatasets::default())?;
    let mut out = Vec::new();
    for e in Expression::all_fixed() {
        out.push(e.action(&frames)?.statement()?);
    }
    Ok(out)
}

pub fn run_example() -> Result<Vec<Translation>, Box<dyn Error>> {
    let sqlpp = statements(Dialect::sqlpp())?;
    let ansi = statements(Dialect::ansi())?;
    let mut out = Vec::new();
    for (i, (s, a)) in sqlpp.into_iter().zip(ansi).enumerate() {
        let id = i as u8 + 1;
        println!("{id:>2}. {}\n    SQL++: {s}\n    ANSI:  {a}", describe(id));
        out.push(Translation { id, sqlpp: s, ansi: a });
    }
    Ok(out)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()?;
    Ok(())
}
