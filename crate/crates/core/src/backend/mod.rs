//! Query execution: an HTTP client for a remote query service and an
//! in-memory reference executor, both behind the [`Backend`] trait.

mod eval;
mod http;
mod memory;
mod server;

use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::dialect::parse::Statement;

pub use eval::{total_cmp, values_equal, Udf};
pub use http::{HttpBackend, HttpConfig, PayloadEncoding, DEFAULT_PATH, ENDPOINT_ENV};
pub use memory::{CatalogOptions, MemoryBackend, MemoryCatalog};
pub use server::OracleServer;

/// One statement to submit.
#[derive(Debug, Clone)]
pub struct Request {
    /// Rendered statement text; what goes over the wire.
    pub text: String,
    /// The structured statement the text was rendered from, when known.
    /// Backends that cannot parse the text (the memory backend with ANSI
    /// output) use it instead.
    pub statement: Option<Statement>,
}

impl Request {
    pub fn text(text: impl Into<String>) -> Self {
        Self {
            text: text.into(),
            statement: None,
        }
    }

    pub fn with_statement(text: impl Into<String>, statement: Statement) -> Self {
        Self {
            text: text.into(),
            statement: Some(statement),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum QueryStatus {
    Success,
    Error,
}

/// Outcome of a statement the service accepted and answered.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryResult {
    pub status: QueryStatus,
    pub rows: Vec<Value>,
    pub error: Option<String>,
    /// Client-measured round trip.
    pub elapsed: Duration,
}

impl QueryResult {
    pub fn success(rows: Vec<Value>, elapsed: Duration) -> Self {
        Self {
            status: QueryStatus::Success,
            rows,
            error: None,
            elapsed,
        }
    }

    pub fn error(message: impl Into<String>, elapsed: Duration) -> Self {
        Self {
            status: QueryStatus::Error,
            rows: Vec::new(),
            error: Some(message.into()),
            elapsed,
        }
    }

    pub fn is_error(&self) -> bool {
        self.status == QueryStatus::Error
    }
}

/// Failure to obtain an answer at all. Every variant carries the statement.
#[derive(Debug, Error)]
pub enum BackendError {
    #[error("transport failure: {message} (statement: {statement})")]
    Transport { statement: String, message: String },
    #[error("HTTP status {status}: {body} (statement: {statement})")]
    HttpStatus {
        statement: String,
        status: u16,
        body: String,
    },
    #[error("malformed response body: {message} (statement: {statement})")]
    MalformedBody { statement: String, message: String },
    #[error("no response within {after:?} (statement: {statement})")]
    Timeout { statement: String, after: Duration },
}

impl BackendError {
    pub fn statement(&self) -> &str {
        match self {
            BackendError::Transport { statement, .. }
            | BackendError::HttpStatus { statement, .. }
            | BackendError::MalformedBody { statement, .. }
            | BackendError::Timeout { statement, .. } => statement,
        }
    }
}

/// Errors raised by the in-memory executor and catalog.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExecError {
    #[error("cannot find dataset {0}")]
    MissingDataset(String),
    #[error("dataset {0} already exists")]
    DatasetExists(String),
    #[error("type {0} already exists")]
    TypeExists(String),
    #[error("cannot find type {0}")]
    UnknownType(String),
    #[error("cannot find field {0:?}")]
    UnknownColumn(String),
    #[error("cannot find function {0}")]
    UnknownFunction(String),
    #[error("function {name} failed: {message}")]
    Function { name: String, message: String },
    #[error("arithmetic error: {0}")]
    Arithmetic(String),
    #[error("duplicate primary key {key} in {dataset}")]
    DuplicateKey { dataset: String, key: String },
    #[error("invalid record: {0}")]
    InvalidRecord(String),
    #[error("load failed: {0}")]
    Load(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

/// Something that executes statements and counts how many it was sent.
pub trait Backend: Send + Sync {
    /// Submits one statement. The request counter increments exactly once,
    /// whatever the outcome.
    fn execute(&self, request: &Request) -> Result<QueryResult, BackendError>;

    fn request_count(&self) -> u64;
}

impl<B: Backend + ?Sized> Backend for std::sync::Arc<B> {
    fn execute(&self, request: &Request) -> Result<QueryResult, BackendError> {
        (**self).execute(request)
    }

    fn request_count(&self) -> u64 {
        (**self).request_count()
    }
}
