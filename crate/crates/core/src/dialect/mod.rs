//! Rendering of logical plans and DDL into concrete query languages.
//!
//! Two dialects ship with the crate: SQL++ (the default, matching the
//! AsterixDB query service) and ANSI SQL. A [`Dialect`] is an immutable value
//! holding the function registry and the identifier/literal conventions; it
//! never consults global state, so one value can be shared across threads.

mod ddl;
pub mod parse;
mod render;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::ast::{is_identifier, LogicalPlan};

pub use ddl::{DdlRequest, FieldDecl, FieldType};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DialectKind {
    SqlPlusPlus,
    Ansi,
}

impl fmt::Display for DialectKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DialectKind::SqlPlusPlus => "sqlpp",
            DialectKind::Ansi => "ansi",
        })
    }
}

impl FromStr for DialectKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "sqlpp" | "sql++" => Ok(DialectKind::SqlPlusPlus),
            "ansi" | "sql" => Ok(DialectKind::Ansi),
            other => Err(format!("unknown dialect {other:?} (expected sqlpp or ansi)")),
        }
    }
}

/// How identifiers are quoted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quoting {
    /// Quote with the given character only when the name is not a plain
    /// identifier or collides with a reserved word.
    WhenNeeded(char),
    /// Always quote with the given character.
    Always(char),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RenderError {
    #[error("function {name:?} is not registered in the {dialect} dialect (available: {})", available.join(", "))]
    UnknownFunction {
        name: String,
        dialect: DialectKind,
        available: Vec<String>,
    },
    #[error("{feature} is not supported by the {dialect} dialect")]
    Unsupported {
        dialect: DialectKind,
        feature: &'static str,
    },
    #[error("invalid DDL request: {0}")]
    InvalidDdl(String),
}

/// A query language: function registry plus rendering conventions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dialect {
    kind: DialectKind,
    functions: BTreeMap<String, String>,
    quoting: Quoting,
}

const SQLPP_FUNCTIONS: &[(&str, &str)] = &[
    ("abs", "ABS"),
    ("length", "LENGTH"),
    ("lower", "LOWER"),
    ("trim", "TRIM"),
    ("upper", "UPPER"),
];

const ANSI_FUNCTIONS: &[(&str, &str)] = &[
    ("abs", "ABS"),
    ("length", "CHAR_LENGTH"),
    ("lower", "LOWER"),
    ("trim", "TRIM"),
    ("upper", "UPPER"),
];

impl Dialect {
    pub fn sqlpp() -> Self {
        Self {
            kind: DialectKind::SqlPlusPlus,
            functions: registry(SQLPP_FUNCTIONS),
            quoting: Quoting::WhenNeeded('`'),
        }
    }

    pub fn ansi() -> Self {
        Self {
            kind: DialectKind::Ansi,
            functions: registry(ANSI_FUNCTIONS),
            quoting: Quoting::Always('"'),
        }
    }

    pub fn for_kind(kind: DialectKind) -> Self {
        match kind {
            DialectKind::SqlPlusPlus => Self::sqlpp(),
            DialectKind::Ansi => Self::ansi(),
        }
    }

    /// Registers (or remaps) a function, e.g. a server-side UDF.
    pub fn with_function(mut self, logical: &str, target: &str) -> Self {
        self.functions
            .insert(logical.to_ascii_lowercase(), target.to_owned());
        self
    }

    pub fn kind(&self) -> DialectKind {
        self.kind
    }

    pub fn quoting(&self) -> Quoting {
        self.quoting
    }

    /// Logical function names this dialect can translate.
    pub fn function_names(&self) -> Vec<String> {
        self.functions.keys().cloned().collect()
    }

    /// Target-language name for a logical function.
    pub fn resolve_function(&self, name: &str) -> Result<&str, RenderError> {
        self.functions
            .get(&name.to_ascii_lowercase())
            .map(String::as_str)
            .ok_or_else(|| RenderError::UnknownFunction {
                name: name.to_owned(),
                dialect: self.kind,
                available: self.function_names(),
            })
    }

    /// Renders a query plan as one `;`-terminated statement.
    pub fn render_query(&self, plan: &LogicalPlan) -> Result<String, RenderError> {
        render::render_statement(self, plan)
    }

    pub fn render_ddl(&self, request: &DdlRequest) -> Result<String, RenderError> {
        ddl::render(self, request)
    }

    pub(crate) fn quote_ident(&self, name: &str, out: &mut String) {
        let needs = match self.quoting {
            Quoting::Always(_) => true,
            Quoting::WhenNeeded(_) => !is_identifier(name) || is_reserved(name),
        };
        if !needs {
            out.push_str(name);
            return;
        }
        let q = match self.quoting {
            Quoting::Always(q) | Quoting::WhenNeeded(q) => q,
        };
        out.push(q);
        for c in name.chars() {
            if c == q {
                out.push(q);
            }
            out.push(c);
        }
        out.push(q);
    }
}

impl Default for Dialect {
    fn default() -> Self {
        Self::sqlpp()
    }
}

fn registry(entries: &[(&str, &str)]) -> BTreeMap<String, String> {
    entries
        .iter()
        .map(|(k, v)| ((*k).to_owned(), (*v).to_owned()))
        .collect()
}

const RESERVED: &[&str] = &[
    "all", "and", "as", "asc", "between", "by", "case", "create", "dataset", "desc", "distinct",
    "else", "end", "every", "exists", "false", "from", "group", "having", "in", "index", "inner",
    "insert", "into", "is", "join", "key", "left", "let", "like", "limit", "missing", "not",
    "null", "offset", "on", "or", "order", "outer", "primary", "right", "select", "some", "then",
    "true", "type", "union", "value", "when", "where", "with",
];

pub(crate) fn is_reserved(name: &str) -> bool {
    let lower = name.to_ascii_lowercase();
    RESERVED.binary_search(&lower.as_str()).is_ok()
}

/// Collapses whitespace runs to single spaces and trims the ends. Token
/// order and case are preserved; used for golden comparisons.
pub fn canonicalize(query: &str) -> String {
    query.split_whitespace().collect::<Vec<_>>().join(" ")
}
