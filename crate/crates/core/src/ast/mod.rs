//! Logical plans and scalar expressions accumulated by frame operations.

mod expr;
mod plan;

use thiserror::Error;

pub use expr::{AggArg, AggFn, ArithOp, BoolOp, CompareOp, Descendants, Expr, Literal};
pub use plan::{
    is_identifier, Aggregation, DatasetRef, JoinKind, LogicalPlan, NodeSpec, OutputShape,
    PlanNode, ProjectItem, SortOrder,
};

/// Rejected plan construction.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ShapeError {
    #[error("invalid identifier {0:?}")]
    InvalidIdentifier(String),
    #[error("limit must be at least 1")]
    ZeroLimit,
    #[error("{0} may appear at most once on any path of a plan")]
    RepeatedOnPath(&'static str),
    #[error("a count is final; nothing can be stacked on it")]
    AboveCount,
    #[error("{op} needs record input, got {shape:?} rows")]
    IncompatibleInput {
        op: &'static str,
        shape: OutputShape,
    },
    #[error("projection needs at least one item")]
    EmptyProjection,
    #[error("duplicate output name {0:?}")]
    DuplicateName(String),
    #[error("projection mixes aggregates with per-row expressions")]
    MixedAggregates,
    #[error("aggregate not allowed in {0}")]
    MisplacedAggregate(&'static str),
    #[error("wildcard not allowed in {0}")]
    MisplacedWildcard(&'static str),
    #[error("{0} needs a column argument, not *")]
    StarArgument(AggFn),
    #[error("unsupported join kind {0:?} (only inner joins are supported)")]
    UnsupportedJoin(String),
}
