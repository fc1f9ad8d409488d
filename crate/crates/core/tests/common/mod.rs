#![allow(dead_code)]

pub mod brute;

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use lazydf::backend::{Backend, BackendError, MemoryBackend, MemoryCatalog, QueryResult, Request};
use lazydf::dialect::Dialect;
use lazydf::frame::Session;
use lazydf::bench::{Expression, Outcome};
use lazydf::wisconsin::{self, GenConfig};
use serde_json::Value;

use brute::Answer;

pub const DATASETS: [&str; 3] = ["Data", "leftData", "rightData"];

/// Generated rows for `n` records.
pub fn wisconsin_rows(n: u64, seed: u64) -> Vec<Value> {
    wisconsin::records(&GenConfig::new(n, seed))
        .expect("valid config")
        .map(|r| r.to_json())
        .collect()
}

/// A catalog with the same generated relation in all three benchmark
/// datasets, plus the rows keyed by dataset name.
pub fn fixture(n: u64, seed: u64) -> (Arc<MemoryCatalog>, HashMap<String, Vec<Value>>) {
    let rows = wisconsin_rows(n, seed);
    let catalog = Arc::new(MemoryCatalog::default());
    let mut data = HashMap::new();
    for ds in DATASETS {
        catalog.load(ds, rows.iter().cloned()).expect("load");
        data.insert(ds.to_owned(), rows.clone());
    }
    (catalog, data)
}

/// Brute-force answer for a bound expression.
pub fn brute_answer(e: &Expression, data: &HashMap<String, Vec<Value>>) -> Answer {
    let p: Vec<i64> = e.predicates.iter().map(|p| p.value).collect();
    brute::expression(e.id, &p, &data["Data"], &data["leftData"], &data["rightData"])
}

/// Whether a library outcome equals the brute-force answer: scalars
/// exactly, rows as multisets.
pub fn agrees(outcome: &Outcome, answer: &Answer) -> bool {
    match (outcome, answer) {
        (Outcome::Scalar(a), Answer::Scalar(b)) => a == b,
        (Outcome::Rows(a), Answer::Rows(b)) => brute::multiset(a) == brute::multiset(b),
        _ => false,
    }
}

/// Memory backend that keeps the text of every request it receives.
pub struct Recorder {
    inner: MemoryBackend,
    texts: Mutex<Vec<String>>,
}

impl Recorder {
    pub fn new(catalog: Arc<MemoryCatalog>) -> Arc<Self> {
        Arc::new(Self {
            inner: MemoryBackend::new(catalog),
            texts: Mutex::default(),
        })
    }

    pub fn texts(&self) -> Vec<String> {
        self.texts.lock().unwrap().clone()
    }
}

impl Backend for Recorder {
    fn execute(&self, request: &Request) -> Result<QueryResult, BackendError> {
        self.texts.lock().unwrap().push(request.text.clone());
        self.inner.execute(request)
    }

    fn request_count(&self) -> u64 {
        self.inner.request_count()
    }
}

/// SQL++ session over a recording backend.
pub fn recorded_session(catalog: Arc<MemoryCatalog>) -> (Session, Arc<Recorder>) {
    let rec = Recorder::new(catalog);
    (Session::new(rec.clone(), Dialect::sqlpp()), rec)
}

/// The brute-force answer in the library's outcome type, e.g. for checksums.
pub fn as_outcome(answer: Answer) -> Outcome {
    match answer {
        Answer::Scalar(v) => Outcome::Scalar(v),
        Answer::Rows(r) => Outcome::Rows(r),
    }
}
