use std::collections::BTreeMap;
use std::fmt;

use serde_json::Value;

use crate::ast::{is_identifier, DatasetRef, LogicalPlan, OutputShape};

use super::render::{render_plan_into, BINDING};
use super::{Dialect, DialectKind, RenderError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldType {
    Int64,
    Double,
    String,
    Boolean,
}

impl FieldType {
    pub fn sqlpp_name(self) -> &'static str {
        match self {
            FieldType::Int64 => "int64",
            FieldType::Double => "double",
            FieldType::String => "string",
            FieldType::Boolean => "boolean",
        }
    }

    fn ansi_name(self) -> &'static str {
        match self {
            FieldType::Int64 => "BIGINT",
            FieldType::Double => "DOUBLE PRECISION",
            FieldType::String => "VARCHAR",
            FieldType::Boolean => "BOOLEAN",
        }
    }

    pub fn from_sqlpp_name(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "int64" | "bigint" => Some(FieldType::Int64),
            "double" => Some(FieldType::Double),
            "string" => Some(FieldType::String),
            "boolean" => Some(FieldType::Boolean),
            _ => None,
        }
    }

    /// Whether a JSON value conforms to this type.
    pub fn admits(self, v: &Value) -> bool {
        match self {
            FieldType::Int64 => v.is_i64(),
            FieldType::Double => v.is_number(),
            FieldType::String => v.is_string(),
            FieldType::Boolean => v.is_boolean(),
        }
    }
}

impl fmt::Display for FieldType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.sqlpp_name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldDecl {
    pub name: String,
    pub ty: FieldType,
}

impl FieldDecl {
    pub fn new(name: impl Into<String>, ty: FieldType) -> Self {
        Self {
            name: name.into(),
            ty,
        }
    }
}

/// Schema and data-definition statements.
#[derive(Debug, Clone, PartialEq)]
pub enum DdlRequest {
    CreateType {
        name: String,
        fields: Vec<FieldDecl>,
        open: bool,
    },
    CreateDataset {
        dataset: DatasetRef,
        type_name: String,
        primary_key: String,
        /// Rendered as the `WITH {...}` clause; key order is deterministic.
        storage_options: BTreeMap<String, Value>,
    },
    CreateIndex {
        /// Optional for primary indexes.
        name: Option<String>,
        dataset: DatasetRef,
        /// Required for secondary indexes.
        field: Option<String>,
        primary: bool,
    },
    LoadDataset {
        dataset: DatasetRef,
        path: String,
        format: String,
    },
    /// Materializes the result of `source` into `target`.
    Persist {
        source: LogicalPlan,
        target: DatasetRef,
    },
}

impl DdlRequest {
    pub fn create_type(name: &str, fields: Vec<FieldDecl>, open: bool) -> Self {
        DdlRequest::CreateType {
            name: name.to_owned(),
            fields,
            open,
        }
    }

    pub fn primary_index(dataset: DatasetRef) -> Self {
        DdlRequest::CreateIndex {
            name: None,
            dataset,
            field: None,
            primary: true,
        }
    }

    pub fn secondary_index(name: &str, dataset: DatasetRef, field: &str) -> Self {
        DdlRequest::CreateIndex {
            name: Some(name.to_owned()),
            dataset,
            field: Some(field.to_owned()),
            primary: false,
        }
    }

    fn validate(&self) -> Result<(), RenderError> {
        let ident = |s: &str| {
            if is_identifier(s) {
                Ok(())
            } else {
                Err(RenderError::InvalidDdl(format!("invalid identifier {s:?}")))
            }
        };
        match self {
            DdlRequest::CreateType { name, fields, .. } => {
                ident(name)?;
                let mut seen = std::collections::BTreeSet::new();
                for f in fields {
                    ident(&f.name)?;
                    if !seen.insert(&f.name) {
                        return Err(RenderError::InvalidDdl(format!("duplicate field {:?}", f.name)));
                    }
                }
                Ok(())
            }
            DdlRequest::CreateDataset {
                type_name,
                primary_key,
                ..
            } => {
                ident(type_name)?;
                ident(primary_key)
            }
            DdlRequest::CreateIndex {
                name,
                field,
                primary,
                ..
            } => {
                if let Some(n) = name {
                    ident(n)?;
                }
                if let Some(f) = field {
                    ident(f)?;
                }
                if !primary && (name.is_none() || field.is_none()) {
                    return Err(RenderError::InvalidDdl(
                        "secondary index needs a name and a field".into(),
                    ));
                }
                Ok(())
            }
            DdlRequest::LoadDataset { path, format, .. } => {
                if path.is_empty() || format.is_empty() {
                    return Err(RenderError::InvalidDdl("load needs a path and a format".into()));
                }
                Ok(())
            }
            DdlRequest::Persist { source, .. } => match source.output_shape() {
                OutputShape::Records => Ok(()),
                other => Err(RenderError::InvalidDdl(format!(
                    "only record-producing plans can be persisted, got {other:?} rows"
                ))),
            },
        }
    }
}

pub(super) fn render(d: &Dialect, req: &DdlRequest) -> Result<String, RenderError> {
    req.validate()?;
    let ansi = d.kind() == DialectKind::Ansi;
    let unsupported = |feature| RenderError::Unsupported {
        dialect: d.kind(),
        feature,
    };
    let mut out = String::new();
    match req {
        DdlRequest::CreateType { name, fields, open } => {
            if ansi && *open {
                return Err(unsupported("open record types"));
            }
            out.push_str("CREATE TYPE ");
            d.quote_ident(name, &mut out);
            match (ansi, open) {
                (true, _) => out.push_str(" AS ("),
                (false, true) => out.push_str(" AS {"),
                (false, false) => out.push_str(" AS CLOSED {"),
            }
            for (i, f) in fields.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                d.quote_ident(&f.name, &mut out);
                if ansi {
                    out.push(' ');
                    out.push_str(f.ty.ansi_name());
                } else {
                    out.push_str(": ");
                    out.push_str(f.ty.sqlpp_name());
                }
            }
            out.push_str(if ansi { ")" } else { "}" });
        }
        DdlRequest::CreateDataset {
            dataset,
            type_name,
            primary_key,
            storage_options,
        } => {
            if ansi {
                if !storage_options.is_empty() {
                    return Err(unsupported("dataset storage options"));
                }
                out.push_str("CREATE TABLE ");
                dataset_name(d, dataset, &mut out);
                out.push_str(" OF ");
                d.quote_ident(type_name, &mut out);
                out.push_str(" (PRIMARY KEY (");
                d.quote_ident(primary_key, &mut out);
                out.push_str("))");
            } else {
                out.push_str("CREATE DATASET ");
                dataset_name(d, dataset, &mut out);
                out.push('(');
                d.quote_ident(type_name, &mut out);
                out.push_str(") PRIMARY KEY ");
                d.quote_ident(primary_key, &mut out);
                if !storage_options.is_empty() {
                    out.push_str(" WITH ");
                    let obj = Value::Object(
                        storage_options
                            .iter()
                            .map(|(k, v)| (k.clone(), v.clone()))
                            .collect(),
                    );
                    write_json(&obj, &mut out);
                }
            }
        }
        DdlRequest::CreateIndex {
            name,
            dataset,
            field,
            primary,
        } => {
            if *primary {
                if ansi {
                    return Err(unsupported("primary indexes"));
                }
                out.push_str("CREATE PRIMARY INDEX ");
                if let Some(n) = name {
                    d.quote_ident(n, &mut out);
                    out.push(' ');
                }
                out.push_str("ON ");
                dataset_name(d, dataset, &mut out);
            } else {
                out.push_str("CREATE INDEX ");
                d.quote_ident(name.as_deref().unwrap_or_default(), &mut out);
                out.push_str(" ON ");
                dataset_name(d, dataset, &mut out);
                out.push_str(if ansi { " (" } else { "(" });
                d.quote_ident(field.as_deref().unwrap_or_default(), &mut out);
                out.push(')');
            }
        }
        DdlRequest::LoadDataset {
            dataset,
            path,
            format,
        } => {
            if ansi {
                return Err(unsupported("LOAD DATASET"));
            }
            out.push_str("LOAD DATASET ");
            dataset_name(d, dataset, &mut out);
            out.push_str(" USING localfs ((");
            write_json(&Value::from("path"), &mut out);
            out.push('=');
            write_json(&Value::from(path.as_str()), &mut out);
            out.push_str("), (");
            write_json(&Value::from("format"), &mut out);
            out.push('=');
            write_json(&Value::from(format.as_str()), &mut out);
            out.push_str("))");
        }
        DdlRequest::Persist { source, target } => {
            out.push_str("INSERT INTO ");
            dataset_name(d, target, &mut out);
            out.push_str(if ansi { " SELECT t.* FROM (" } else { " SELECT VALUE t FROM (" });
            render_plan_into(d, source, &mut out)?;
            out.push_str(") ");
            out.push_str(BINDING);
        }
    }
    out.push(';');
    Ok(out)
}

fn dataset_name(d: &Dialect, ds: &DatasetRef, out: &mut String) {
    if let Some(dv) = ds.dataverse() {
        d.quote_ident(dv, out);
        out.push('.');
    }
    d.quote_ident(ds.name(), out);
}

/// JSON with `": "` and `", "` separators, as written in AsterixDB DDL.
fn write_json(v: &Value, out: &mut String) {
    match v {
        Value::Object(map) => {
            out.push('{');
            for (i, (k, v)) in map.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(&Value::from(k.as_str()).to_string());
                out.push_str(": ");
                write_json(v, out);
            }
            out.push('}');
        }
        Value::Array(items) => {
            out.push('[');
            for (i, v) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_json(v, out);
            }
            out.push(']');
        }
        scalar => out.push_str(&scalar.to_string()),
    }
}
