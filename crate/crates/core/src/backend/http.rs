use std::io::ErrorKind;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

use serde_json::Value;
use url::Url;

use super::{Backend, BackendError, QueryResult, Request};

pub const DEFAULT_PATH: &str = "/query/service";
pub const ENDPOINT_ENV: &str = "LAZYDF_ENDPOINT";

const MAX_BODY_BYTES: u64 = 1 << 30;

/// How the statement is carried in the POST body.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PayloadEncoding {
    /// `application/x-www-form-urlencoded`, as the AsterixDB query service accepts.
    #[default]
    Form,
    Json,
}

/// Where and how to talk to a query service. Path and field names are
/// configuration so other services with a similar contract can be targeted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpConfig {
    pub base_url: String,
    pub path: String,
    pub statement_field: String,
    pub results_field: String,
    pub timeout: Duration,
    pub encoding: PayloadEncoding,
}

impl HttpConfig {
    pub fn new(base_url: impl Into<String>) -> Self {
        Self {
            base_url: base_url.into(),
            path: DEFAULT_PATH.to_owned(),
            statement_field: "statement".to_owned(),
            results_field: "results".to_owned(),
            timeout: Duration::from_secs(300),
            encoding: PayloadEncoding::Form,
        }
    }

    /// Config for the endpoint named by `LAZYDF_ENDPOINT`, if set.
    pub fn from_env() -> Option<Self> {
        std::env::var(ENDPOINT_ENV)
            .ok()
            .filter(|s| !s.trim().is_empty())
            .map(Self::new)
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    pub fn with_path(mut self, path: impl Into<String>) -> Self {
        self.path = path.into();
        self
    }

    pub fn with_encoding(mut self, encoding: PayloadEncoding) -> Self {
        self.encoding = encoding;
        self
    }

    /// Full service URL: base URL with the path appended.
    pub fn service_url(&self) -> Result<Url, url::ParseError> {
        let base = self.base_url.trim_end_matches('/');
        let path = if self.path.starts_with('/') || self.path.is_empty() {
            self.path.clone()
        } else {
            format!("/{}", self.path)
        };
        Url::parse(&format!("{base}{path}"))
    }
}

/// Client for a REST query service. Safe to share across threads; the
/// request counter is atomic.
#[derive(Debug)]
pub struct HttpBackend {
    config: HttpConfig,
    url: Url,
    agent: ureq::Agent,
    counter: AtomicU64,
}

impl HttpBackend {
    pub fn new(config: HttpConfig) -> Result<Self, url::ParseError> {
        let url = config.service_url()?;
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(config.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(Self {
            config,
            url,
            agent,
            counter: AtomicU64::new(0),
        })
    }

    pub fn config(&self) -> &HttpConfig {
        &self.config
    }

    pub fn url(&self) -> &Url {
        &self.url
    }

    fn transport_error(&self, statement: &str, e: ureq::Error) -> BackendError {
        let timed_out = match &e {
            ureq::Error::Timeout(_) => true,
            ureq::Error::Io(io) => matches!(io.kind(), ErrorKind::TimedOut | ErrorKind::WouldBlock),
            _ => false,
        };
        if timed_out {
            BackendError::Timeout {
                statement: statement.to_owned(),
                after: self.config.timeout,
            }
        } else {
            BackendError::Transport {
                statement: statement.to_owned(),
                message: e.to_string(),
            }
        }
    }

    fn interpret(&self, statement: &str, status: u16, body: &str, elapsed: Duration) -> Result<QueryResult, BackendError> {
        let ok = (200..300).contains(&status);
        let parsed: Result<Value, _> = serde_json::from_str(body);
        if let Ok(v) = &parsed {
            if let Some(message) = error_message(v) {
                return Ok(QueryResult::error(message, elapsed));
            }
        }
        if !ok {
            return Err(BackendError::HttpStatus {
                statement: statement.to_owned(),
                status,
                body: body.chars().take(512).collect(),
            });
        }
        let malformed = |message: String| BackendError::MalformedBody {
            statement: statement.to_owned(),
            message,
        };
        let v = parsed.map_err(|e| malformed(format!("not JSON: {e}")))?;
        match v.get(&self.config.results_field) {
            Some(Value::Array(rows)) => Ok(QueryResult::success(rows.clone(), elapsed)),
            Some(other) => Err(malformed(format!(
                "field {:?} is not a list: {other}",
                self.config.results_field
            ))),
            None => Err(malformed(format!("missing field {:?}", self.config.results_field))),
        }
    }
}

/// Extracts the message of an error payload such as
/// `{"errors":[{"code":1,"msg":"..."}]}`.
fn error_message(v: &Value) -> Option<String> {
    let errors = v.get("errors")?.as_array()?;
    if errors.is_empty() {
        return None;
    }
    let msgs: Vec<String> = errors
        .iter()
        .map(|e| match e {
            Value::Object(m) => m
                .get("msg")
                .or_else(|| m.get("message"))
                .and_then(Value::as_str)
                .map_or_else(|| e.to_string(), str::to_owned),
            Value::String(s) => s.clone(),
            other => other.to_string(),
        })
        .collect();
    Some(msgs.join("; "))
}

impl Backend for HttpBackend {
    fn execute(&self, request: &Request) -> Result<QueryResult, BackendError> {
        self.counter.fetch_add(1, Ordering::SeqCst);
        let statement = request.text.as_str();
        let started = Instant::now();
        let post = self.agent.post(self.url.as_str());
        let sent = match self.config.encoding {
            PayloadEncoding::Form => post.send_form([(self.config.statement_field.as_str(), statement)]),
            PayloadEncoding::Json => {
                let mut body = serde_json::Map::new();
                body.insert(self.config.statement_field.clone(), Value::from(statement));
                post.header("Content-Type", "application/json")
                    .send(Value::Object(body).to_string())
            }
        };
        let mut response = sent.map_err(|e| self.transport_error(statement, e))?;
        let status = response.status().as_u16();
        let body = response
            .body_mut()
            .with_config()
            .limit(MAX_BODY_BYTES)
            .read_to_string()
            .map_err(|e| self.transport_error(statement, e))?;
        self.interpret(statement, status, &body, started.elapsed())
    }

    fn request_count(&self) -> u64 {
        self.counter.load(Ordering::SeqCst)
    }
}
