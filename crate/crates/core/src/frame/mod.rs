//! Lazy, Pandas-style frames.
//!
//! A [`Frame`] is a logical plan plus a handle to a [`Session`] (backend and
//! dialect). Building frames never talks to the backend; only the terminal
//! actions ([`Frame::head`], [`Frame::count`], [`Frame::collect`],
//! [`ColumnRef::max`], [`ColumnRef::min`], [`Frame::describe`],
//! [`Frame::persist`]) submit statements.

mod column;

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde_json::Value;
use thiserror::Error;

use crate::ast::{
    AggArg, AggFn, Aggregation, DatasetRef, Expr, JoinKind, LogicalPlan, OutputShape, PlanNode,
    ProjectItem, ShapeError, SortOrder,
};
use crate::backend::{Backend, BackendError, MemoryBackend, MemoryCatalog, Request};
use crate::dialect::parse::Statement;
use crate::dialect::{DdlRequest, Dialect, RenderError};

pub use column::{BooleanMask, ColumnRef, Operand};

/// Alias given to the group key column, as in `GROUP BY t.k AS grp_id`.
pub const GROUP_KEY_ALIAS: &str = "grp_id";
/// Default row count for [`Frame::head`] callers that do not care.
pub const DEFAULT_HEAD: u64 = 5;

#[derive(Debug, Error)]
pub enum FrameError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("mask or column belongs to a different frame")]
    CrossFrame,
    #[error("function {name:?} is not registered (available: {})", available.join(", "))]
    UnknownFunction { name: String, available: Vec<String> },
    #[error(transparent)]
    Shape(#[from] ShapeError),
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error("query failed: {message} (statement: {statement})")]
    Query { statement: String, message: String },
    #[error("unexpected result for {statement}: {message}")]
    UnexpectedResult { statement: String, message: String },
}

/// Backend handle, dialect and frame-id source shared by related frames.
#[derive(Clone)]
pub struct Session {
    backend: Arc<dyn Backend>,
    dialect: Arc<Dialect>,
    ids: Arc<AtomicU64>,
}

impl std::fmt::Debug for Session {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Session")
            .field("dialect", &self.dialect.kind())
            .field("requests", &self.backend.request_count())
            .finish()
    }
}

impl Session {
    pub fn new(backend: Arc<dyn Backend>, dialect: Dialect) -> Self {
        Self {
            backend,
            dialect: Arc::new(dialect),
            ids: Arc::new(AtomicU64::new(1)),
        }
    }

    /// SQL++ session over an in-memory catalog.
    pub fn memory(catalog: Arc<MemoryCatalog>) -> Self {
        Self::new(Arc::new(MemoryBackend::new(catalog)), Dialect::sqlpp())
    }

    pub fn dialect(&self) -> &Dialect {
        &self.dialect
    }

    pub fn backend(&self) -> &Arc<dyn Backend> {
        &self.backend
    }

    /// Statements submitted through this session's backend so far.
    pub fn request_count(&self) -> u64 {
        self.backend.request_count()
    }

    /// Opens `dataset` (`name` or `dataverse.name`). Issues no request; a
    /// missing dataset surfaces at the first terminal action.
    pub fn open(&self, dataset: &str) -> Result<Frame, FrameError> {
        let ds: DatasetRef = dataset.parse()?;
        Ok(self.frame(LogicalPlan::scan_dataset(ds)))
    }

    pub fn open_in(&self, dataverse: &str, dataset: &str) -> Result<Frame, FrameError> {
        Ok(self.frame(LogicalPlan::scan(dataverse, dataset)?))
    }

    /// Wraps an existing plan.
    pub fn frame(&self, plan: LogicalPlan) -> Frame {
        Frame {
            id: self.ids.fetch_add(1, Ordering::Relaxed),
            plan,
            session: self.clone(),
        }
    }

    fn same_as(&self, other: &Session) -> bool {
        std::ptr::eq(
            Arc::as_ptr(&self.backend) as *const (),
            Arc::as_ptr(&other.backend) as *const (),
        ) && Arc::ptr_eq(&self.dialect, &other.dialect)
    }

    /// Renders and submits one statement.
    fn submit(&self, text: String, statement: Statement) -> Result<Vec<Value>, FrameError> {
        let request = Request::with_statement(text, statement);
        let result = self.backend.execute(&request)?;
        if result.is_error() {
            return Err(FrameError::Query {
                statement: request.text,
                message: result.error.unwrap_or_default(),
            });
        }
        Ok(result.rows)
    }

    fn run(&self, plan: &LogicalPlan) -> Result<(String, Vec<Value>), FrameError> {
        let text = self.dialect.render_query(plan)?;
        let rows = self.submit(text.clone(), Statement::Query(plan.clone()))?;
        Ok((text, rows))
    }
}

/// What each result row of a frame looks like.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowShape {
    Records,
    SingleColumn,
    Scalar,
}

/// How [`Frame::persist`] treats the target dataset.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum PersistPolicy {
    /// Insert only; the target must exist or the backend must create it on
    /// demand. One request.
    #[default]
    Append,
    /// Create the target with the given (already declared) type and key,
    /// failing if it exists, then insert. Two requests.
    CreateOrFail {
        type_name: String,
        primary_key: String,
    },
}

/// Per-column summary returned by [`Frame::describe`].
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnSummary {
    pub count: Value,
    pub min: Value,
    pub max: Value,
}

/// A lazy frame. Cheap to clone; every operation returns a new frame and
/// leaves its input untouched.
#[derive(Clone)]
pub struct Frame {
    id: u64,
    plan: LogicalPlan,
    session: Session,
}

impl std::fmt::Debug for Frame {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Frame")
            .field("id", &self.id)
            .field("query", &self.explain().unwrap_or_else(|e| e.to_string()))
            .finish()
    }
}

impl Frame {
    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn plan(&self) -> &LogicalPlan {
        &self.plan
    }

    pub fn session(&self) -> &Session {
        &self.session
    }

    pub fn row_shape(&self) -> RowShape {
        match self.plan.output_shape() {
            OutputShape::Records | OutputShape::Pairs => RowShape::Records,
            OutputShape::Values => RowShape::SingleColumn,
            OutputShape::Scalar => RowShape::Scalar,
        }
    }

    fn derive(&self, plan: LogicalPlan) -> Frame {
        self.session.frame(plan)
    }

    /// `df['name']`.
    pub fn col(&self, name: &str) -> Result<ColumnRef, FrameError> {
        if name.is_empty() {
            return Err(FrameError::Usage("column name must not be empty".into()));
        }
        Ok(ColumnRef::new(self.clone(), Expr::col(name)))
    }

    /// A constant column, for [`Frame::with_column`].
    pub fn lit(&self, value: impl Into<crate::ast::Literal>) -> ColumnRef {
        ColumnRef::new(self.clone(), Expr::lit(value))
    }

    pub(crate) fn owns(&self, source: u64, mixed: bool) -> Result<(), FrameError> {
        if mixed || source != self.id {
            Err(FrameError::CrossFrame)
        } else {
            Ok(())
        }
    }

    /// `df[['a', 'b']]`.
    pub fn select(&self, names: &[&str]) -> Result<Frame, FrameError> {
        if names.is_empty() {
            return Err(FrameError::Usage("select needs at least one column".into()));
        }
        if names.iter().any(|n| n.is_empty()) {
            return Err(FrameError::Usage("column name must not be empty".into()));
        }
        let items = names.iter().map(|n| ProjectItem::new(Expr::col(*n))).collect();
        Ok(self.derive(self.plan.project(items)?))
    }

    /// `df[mask]`. The mask must have been built from this frame.
    pub fn filter(&self, mask: &BooleanMask) -> Result<Frame, FrameError> {
        self.owns(mask.source(), mask.is_mixed())?;
        Ok(self.derive(self.plan.filter(mask.expr().clone())?))
    }

    pub fn sort_values(&self, key: &str, ascending: bool) -> Result<Frame, FrameError> {
        let order = if ascending {
            SortOrder::Asc
        } else {
            SortOrder::Desc
        };
        Ok(self.derive(self.plan.sort(self.col(key)?.into_expr(), order)?))
    }

    pub fn groupby(&self, key: &str) -> Result<GroupBy, FrameError> {
        Ok(GroupBy {
            frame: self.clone(),
            key: self.col(key)?.into_expr(),
        })
    }

    /// Inner join on `left_on = right_on`; any other `how` is rejected.
    pub fn merge(&self, right: &Frame, left_on: &str, right_on: &str, how: &str) -> Result<Frame, FrameError> {
        let kind: JoinKind = how.parse()?;
        if !self.session.same_as(&right.session) {
            return Err(FrameError::Usage("cannot merge frames from different sessions".into()));
        }
        let plan = self.plan.join(&right.plan, Expr::col(left_on), Expr::col(right_on), kind)?;
        Ok(self.derive(plan))
    }

    /// Adds `column AS name` to the projection (or projects `t.*` plus the
    /// new column when nothing is projected yet).
    pub fn with_column(&self, name: &str, column: &ColumnRef) -> Result<Frame, FrameError> {
        self.owns(column.source(), column.is_mixed())?;
        let item = ProjectItem::aliased(column.expr().clone(), name);
        let plan = match self.plan.node() {
            PlanNode::Project { input, items } if !items.iter().any(|i| i.expr.contains_aggregate()) => {
                if items.iter().any(|i| i.output_name() == Some(name)) {
                    return Err(FrameError::Usage(format!("column {name:?} already exists")));
                }
                let mut items = items.clone();
                items.push(item);
                input.project(items)?
            }
            _ => self.plan.project(vec![ProjectItem::new(Expr::Wildcard), item])?,
        };
        Ok(self.derive(plan))
    }

    /// The statement a terminal action would build on; sends nothing.
    pub fn explain(&self) -> Result<String, FrameError> {
        Ok(self.session.dialect.render_query(&self.plan)?)
    }

    /// First `n` rows (`LIMIT n`). One request.
    pub fn head(&self, n: u64) -> Result<Vec<Value>, FrameError> {
        Ok(self.session.run(&self.head_plan(n)?)?.1)
    }

    /// The plan [`Frame::head`] submits.
    pub fn head_plan(&self, n: u64) -> Result<LogicalPlan, FrameError> {
        if n == 0 {
            return Err(FrameError::Usage("head needs n >= 1".into()));
        }
        Ok(self.plan.limit(n)?)
    }

    /// All rows. One request.
    pub fn collect(&self) -> Result<Vec<Value>, FrameError> {
        Ok(self.session.run(&self.plan)?.1)
    }

    /// `len(df)`, computed by the backend. One request.
    pub fn count(&self) -> Result<u64, FrameError> {
        let (statement, rows) = self.session.run(&self.count_plan()?)?;
        match rows.as_slice() {
            [v] => scalar_of(v).as_u64().ok_or_else(|| FrameError::UnexpectedResult {
                statement,
                message: format!("count is not a non-negative integer: {v}"),
            }),
            _ => Err(FrameError::UnexpectedResult {
                statement,
                message: format!("expected one row, got {}", rows.len()),
            }),
        }
    }

    /// The plan [`Frame::count`] submits.
    pub fn count_plan(&self) -> Result<LogicalPlan, FrameError> {
        Ok(self.plan.count_all()?)
    }

    /// COUNT/MIN/MAX for each named column in a single aggregate query.
    pub fn describe(&self, columns: &[&str]) -> Result<BTreeMap<String, ColumnSummary>, FrameError> {
        if columns.is_empty() {
            return Err(FrameError::Usage("describe needs at least one column".into()));
        }
        let mut items = Vec::new();
        for (i, c) in columns.iter().enumerate() {
            let e = self.col(c)?.into_expr();
            for f in [AggFn::Count, AggFn::Min, AggFn::Max] {
                items.push(ProjectItem::aliased(
                    Expr::agg(f, Some(e.clone())),
                    format!("c{i}_{}", f.name()),
                ));
            }
        }
        let (statement, rows) = self.session.run(&self.plan.project(items)?)?;
        let Some(Value::Object(row)) = rows.first() else {
            return Err(FrameError::UnexpectedResult {
                statement,
                message: "expected one summary record".into(),
            });
        };
        let get = |i: usize, f: AggFn| row.get(&format!("c{i}_{}", f.name())).cloned().unwrap_or(Value::Null);
        Ok(columns
            .iter()
            .enumerate()
            .map(|(i, c)| {
                (
                    (*c).to_owned(),
                    ColumnSummary {
                        count: get(i, AggFn::Count),
                        min: get(i, AggFn::Min),
                        max: get(i, AggFn::Max),
                    },
                )
            })
            .collect())
    }

    /// Materializes this frame into `target` and returns a frame over it.
    /// Issues one request under [`PersistPolicy::Append`], two under
    /// [`PersistPolicy::CreateOrFail`].
    pub fn persist(&self, target: &str, policy: &PersistPolicy) -> Result<Frame, FrameError> {
        let target: DatasetRef = target.parse()?;
        let dialect = &self.session.dialect;
        let insert = DdlRequest::Persist {
            source: self.plan.clone(),
            target: target.clone(),
        };
        let insert_text = dialect.render_ddl(&insert)?;
        if let PersistPolicy::CreateOrFail {
            type_name,
            primary_key,
        } = policy
        {
            let create = DdlRequest::CreateDataset {
                dataset: target.clone(),
                type_name: type_name.clone(),
                primary_key: primary_key.clone(),
                storage_options: BTreeMap::new(),
            };
            let text = dialect.render_ddl(&create)?;
            self.session.submit(text, Statement::Ddl(create))?;
        }
        self.session.submit(insert_text, Statement::Ddl(insert))?;
        Ok(self.session.frame(LogicalPlan::scan_dataset(target)))
    }
}

/// Single-value rows may arrive bare (`SELECT VALUE`) or wrapped in a
/// one-field record (`SELECT MAX(...)`).
pub(crate) fn scalar_of(v: &Value) -> &Value {
    match v {
        Value::Object(m) if m.len() == 1 => m.values().next().expect("one field"),
        other => other,
    }
}

/// `df.groupby(key)`.
#[derive(Debug, Clone)]
pub struct GroupBy {
    frame: Frame,
    key: Expr,
}

impl GroupBy {
    /// Rows per group, as `cnt`.
    pub fn count(&self) -> Result<Frame, FrameError> {
        self.aggs(vec![Aggregation::count_star("cnt")])
    }

    /// `groupby(key)[column].agg(name)`; the output column is named after
    /// the function (`max`, `min`, `count`).
    pub fn agg(&self, column: &str, func: &str) -> Result<Frame, FrameError> {
        let f = AggFn::from_name(func)
            .ok_or_else(|| FrameError::Usage(format!("unsupported aggregation {func:?} (expected count, max or min)")))?;
        let arg = self.frame.col(column)?.into_expr();
        self.aggs(vec![Aggregation {
            func: f,
            arg: AggArg::Expr(Box::new(arg)),
            alias: f.name().to_ascii_lowercase(),
        }])
    }

    pub fn aggs(&self, aggs: Vec<Aggregation>) -> Result<Frame, FrameError> {
        let plan = self
            .frame
            .plan
            .group_agg(self.key.clone(), GROUP_KEY_ALIAS, aggs)?;
        Ok(self.frame.derive(plan))
    }
}
