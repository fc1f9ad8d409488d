//! Immutable logical query plans.
//!
//! A [`LogicalPlan`] is a cheap handle (`Arc`) over a [`PlanNode`]. Deriving a
//! plan wraps the parent handle; the parent is never touched, so any frame
//! built earlier keeps rendering the same query.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::expr::{AggArg, AggFn, Expr};
use super::ShapeError;

/// Returns true for `[A-Za-z_][A-Za-z0-9_]*`.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn check_identifier(s: &str) -> Result<(), ShapeError> {
    if is_identifier(s) {
        Ok(())
    } else {
        Err(ShapeError::InvalidIdentifier(s.to_owned()))
    }
}

/// A dataset name, optionally qualified by its dataverse (`demo.LiveTweets`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct DatasetRef {
    dataverse: Option<String>,
    name: String,
}

impl DatasetRef {
    pub fn new(dataverse: &str, name: &str) -> Result<Self, ShapeError> {
        check_identifier(dataverse)?;
        check_identifier(name)?;
        Ok(Self {
            dataverse: Some(dataverse.to_owned()),
            name: name.to_owned(),
        })
    }

    /// A dataset in the backend's default dataverse.
    pub fn unqualified(name: &str) -> Result<Self, ShapeError> {
        check_identifier(name)?;
        Ok(Self {
            dataverse: None,
            name: name.to_owned(),
        })
    }

    pub fn dataverse(&self) -> Option<&str> {
        self.dataverse.as_deref()
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

impl fmt::Display for DatasetRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.dataverse {
            Some(dv) => write!(f, "{dv}.{}", self.name),
            None => f.write_str(&self.name),
        }
    }
}

impl FromStr for DatasetRef {
    type Err = ShapeError;

    fn from_str(s: &str) -> Result<Self, ShapeError> {
        match s.split_once('.') {
            Some((dv, name)) => DatasetRef::new(dv, name),
            None => DatasetRef::unqualified(s),
        }
    }
}

impl TryFrom<String> for DatasetRef {
    type Error = ShapeError;

    fn try_from(s: String) -> Result<Self, ShapeError> {
        s.parse()
    }
}

impl From<DatasetRef> for String {
    fn from(d: DatasetRef) -> String {
        d.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SortOrder {
    Asc,
    Desc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JoinKind {
    Inner,
    Left,
    Right,
    Outer,
}

impl FromStr for JoinKind {
    type Err = ShapeError;

    fn from_str(s: &str) -> Result<Self, ShapeError> {
        match s.to_ascii_lowercase().as_str() {
            "inner" => Ok(JoinKind::Inner),
            "left" => Ok(JoinKind::Left),
            "right" => Ok(JoinKind::Right),
            "outer" => Ok(JoinKind::Outer),
            _ => Err(ShapeError::UnsupportedJoin(s.to_owned())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectItem {
    pub expr: Expr,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alias: Option<String>,
}

impl ProjectItem {
    pub fn new(expr: Expr) -> Self {
        Self { expr, alias: None }
    }

    pub fn aliased(expr: Expr, alias: impl Into<String>) -> Self {
        Self {
            expr,
            alias: Some(alias.into()),
        }
    }

    /// Field name this item produces in a result record. `None` for the
    /// wildcard (which contributes every input field) and for unnamed
    /// computed expressions, whose names are positional (`$1`, `$2`, ...).
    pub fn output_name(&self) -> Option<&str> {
        match (&self.alias, &self.expr) {
            (Some(a), _) => Some(a),
            (None, Expr::Column { name }) => Some(name),
            _ => None,
        }
    }
}

/// One aggregate of a grouped query, e.g. `COUNT(*) AS cnt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregation {
    pub func: AggFn,
    pub arg: AggArg,
    pub alias: String,
}

impl Aggregation {
    pub fn count_star(alias: impl Into<String>) -> Self {
        Self {
            func: AggFn::Count,
            arg: AggArg::Star,
            alias: alias.into(),
        }
    }

    pub fn of(func: AggFn, expr: Expr, alias: impl Into<String>) -> Self {
        Self {
            func,
            arg: AggArg::Expr(Box::new(expr)),
            alias: alias.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum PlanNode {
    Scan {
        dataset: DatasetRef,
    },
    Filter {
        input: LogicalPlan,
        predicate: Expr,
    },
    Project {
        input: LogicalPlan,
        items: Vec<ProjectItem>,
    },
    /// Single-expression projection: each row becomes a bare value.
    ProjectValue {
        input: LogicalPlan,
        item: Expr,
    },
    Limit {
        input: LogicalPlan,
        count: u64,
    },
    GroupAgg {
        input: LogicalPlan,
        key: Expr,
        key_alias: String,
        aggs: Vec<Aggregation>,
    },
    Sort {
        input: LogicalPlan,
        key: Expr,
        order: SortOrder,
    },
    Join {
        left: LogicalPlan,
        right: LogicalPlan,
        left_key: Expr,
        right_key: Expr,
        kind: JoinKind,
    },
    CountAll {
        input: LogicalPlan,
    },
}

/// A node to stack on top of an existing plan.
#[derive(Debug, Clone, PartialEq)]
pub enum NodeSpec {
    Filter(Expr),
    Project(Vec<ProjectItem>),
    ProjectValue(Expr),
    Limit(u64),
    GroupAgg {
        key: Expr,
        key_alias: String,
        aggs: Vec<Aggregation>,
    },
    Sort {
        key: Expr,
        order: SortOrder,
    },
    Join {
        right: LogicalPlan,
        left_key: Expr,
        right_key: Expr,
        kind: JoinKind,
    },
    CountAll,
}

/// What a plan's result rows look like.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputShape {
    /// Records (field name → value).
    Records,
    /// Bare values, one per row.
    Values,
    /// `{l, r}` pairs produced by a join.
    Pairs,
    /// A single count.
    Scalar,
}

/// Operators that may appear at most once on any root-to-leaf path.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct PathFlags {
    count_all: bool,
    group_agg: bool,
    sort: bool,
    join: bool,
}

impl PathFlags {
    fn union(self, other: PathFlags) -> PathFlags {
        PathFlags {
            count_all: self.count_all || other.count_all,
            group_agg: self.group_agg || other.group_agg,
            sort: self.sort || other.sort,
            join: self.join || other.join,
        }
    }
}

#[derive(Debug)]
struct PlanInner {
    node: PlanNode,
    flags: PathFlags,
    shape: OutputShape,
}

/// Immutable, shape-checked logical plan.
#[derive(Clone)]
pub struct LogicalPlan(Arc<PlanInner>);

impl fmt::Debug for LogicalPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.node.fmt(f)
    }
}

impl PartialEq for LogicalPlan {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.node == other.0.node
    }
}

impl Serialize for LogicalPlan {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.node.serialize(s)
    }
}

impl<'de> Deserialize<'de> for LogicalPlan {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let node = PlanNode::deserialize(d)?;
        LogicalPlan::from_node(node).map_err(serde::de::Error::custom)
    }
}

impl LogicalPlan {
    /// Root of every query: a full scan of `dataverse.dataset`.
    pub fn scan(dataverse: &str, dataset: &str) -> Result<Self, ShapeError> {
        Ok(Self::scan_dataset(DatasetRef::new(dataverse, dataset)?))
    }

    pub fn scan_dataset(dataset: DatasetRef) -> Self {
        LogicalPlan(Arc::new(PlanInner {
            node: PlanNode::Scan { dataset },
            flags: PathFlags::default(),
            shape: OutputShape::Records,
        }))
    }

    pub fn node(&self) -> &PlanNode {
        &self.0.node
    }

    pub fn output_shape(&self) -> OutputShape {
        self.0.shape
    }

    /// Stacks `spec` on top of this plan. `self` is left unchanged.
    pub fn compose(&self, spec: NodeSpec) -> Result<LogicalPlan, ShapeError> {
        let node = match spec {
            NodeSpec::Filter(predicate) => PlanNode::Filter {
                input: self.clone(),
                predicate,
            },
            NodeSpec::Project(items) => PlanNode::Project {
                input: self.clone(),
                items,
            },
            NodeSpec::ProjectValue(item) => PlanNode::ProjectValue {
                input: self.clone(),
                item,
            },
            NodeSpec::Limit(count) => PlanNode::Limit {
                input: self.clone(),
                count,
            },
            NodeSpec::GroupAgg {
                key,
                key_alias,
                aggs,
            } => PlanNode::GroupAgg {
                input: self.clone(),
                key,
                key_alias,
                aggs,
            },
            NodeSpec::Sort { key, order } => PlanNode::Sort {
                input: self.clone(),
                key,
                order,
            },
            NodeSpec::Join {
                right,
                left_key,
                right_key,
                kind,
            } => PlanNode::Join {
                left: self.clone(),
                right,
                left_key,
                right_key,
                kind,
            },
            NodeSpec::CountAll => PlanNode::CountAll {
                input: self.clone(),
            },
        };
        Self::from_node(node)
    }

    pub fn filter(&self, predicate: Expr) -> Result<Self, ShapeError> {
        self.compose(NodeSpec::Filter(predicate))
    }

    pub fn project(&self, items: Vec<ProjectItem>) -> Result<Self, ShapeError> {
        self.compose(NodeSpec::Project(items))
    }

    pub fn project_value(&self, item: Expr) -> Result<Self, ShapeError> {
        self.compose(NodeSpec::ProjectValue(item))
    }

    pub fn limit(&self, count: u64) -> Result<Self, ShapeError> {
        self.compose(NodeSpec::Limit(count))
    }

    pub fn group_agg(
        &self,
        key: Expr,
        key_alias: impl Into<String>,
        aggs: Vec<Aggregation>,
    ) -> Result<Self, ShapeError> {
        self.compose(NodeSpec::GroupAgg {
            key,
            key_alias: key_alias.into(),
            aggs,
        })
    }

    pub fn sort(&self, key: Expr, order: SortOrder) -> Result<Self, ShapeError> {
        self.compose(NodeSpec::Sort { key, order })
    }

    pub fn join(
        &self,
        right: &LogicalPlan,
        left_key: Expr,
        right_key: Expr,
        kind: JoinKind,
    ) -> Result<Self, ShapeError> {
        self.compose(NodeSpec::Join {
            right: right.clone(),
            left_key,
            right_key,
            kind,
        })
    }

    pub fn count_all(&self) -> Result<Self, ShapeError> {
        self.compose(NodeSpec::CountAll)
    }

    /// Checks `node` against its (already valid) children and wraps it.
    pub fn from_node(node: PlanNode) -> Result<Self, ShapeError> {
        let (flags, shape) = check_node(&node)?;
        Ok(LogicalPlan(Arc::new(PlanInner { node, flags, shape })))
    }

    /// Every dataset scanned by this plan, left to right.
    pub fn datasets(&self) -> Vec<&DatasetRef> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(p) = stack.pop() {
            match p.node() {
                PlanNode::Scan { dataset } => out.push(dataset),
                PlanNode::Join { left, right, .. } => {
                    stack.push(right);
                    stack.push(left);
                }
                PlanNode::Filter { input, .. }
                | PlanNode::Project { input, .. }
                | PlanNode::ProjectValue { input, .. }
                | PlanNode::Limit { input, .. }
                | PlanNode::GroupAgg { input, .. }
                | PlanNode::Sort { input, .. }
                | PlanNode::CountAll { input } => stack.push(input),
            }
        }
        out
    }

    /// Every expression stored in this plan (not descending into them).
    pub fn expressions(&self) -> Vec<&Expr> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(p) = stack.pop() {
            match p.node() {
                PlanNode::Scan { .. } => {}
                PlanNode::Filter { input, predicate } => {
                    out.push(predicate);
                    stack.push(input);
                }
                PlanNode::Project { input, items } => {
                    out.extend(items.iter().map(|i| &i.expr));
                    stack.push(input);
                }
                PlanNode::ProjectValue { input, item } => {
                    out.push(item);
                    stack.push(input);
                }
                PlanNode::GroupAgg {
                    input, key, aggs, ..
                } => {
                    out.push(key);
                    for a in aggs {
                        if let AggArg::Expr(e) = &a.arg {
                            out.push(e);
                        }
                    }
                    stack.push(input);
                }
                PlanNode::Sort { input, key, .. } => {
                    out.push(key);
                    stack.push(input);
                }
                PlanNode::Join {
                    left,
                    right,
                    left_key,
                    right_key,
                    ..
                } => {
                    out.push(left_key);
                    out.push(right_key);
                    stack.push(right);
                    stack.push(left);
                }
                PlanNode::Limit { input, .. } | PlanNode::CountAll { input } => stack.push(input),
            }
        }
        out
    }
}

fn check_scalar(expr: &Expr, context: &'static str) -> Result<(), ShapeError> {
    for e in expr.descendants() {
        match e {
            Expr::Aggregate { .. } => return Err(ShapeError::MisplacedAggregate(context)),
            Expr::Wildcard => return Err(ShapeError::MisplacedWildcard(context)),
            Expr::Column { name } if name.is_empty() => {
                return Err(ShapeError::InvalidIdentifier(String::new()))
            }
            Expr::Call { name, .. } if name.is_empty() => {
                return Err(ShapeError::InvalidIdentifier(String::new()))
            }
            _ => {}
        }
    }
    Ok(())
}

/// Checks an expression that may itself be an aggregate at the top.
fn check_projection_expr(expr: &Expr) -> Result<(), ShapeError> {
    match expr {
        Expr::Aggregate { func, arg } => check_agg_arg(*func, arg, "aggregate argument"),
        other => check_scalar(other, "projection"),
    }
}

fn check_agg_arg(func: AggFn, arg: &AggArg, context: &'static str) -> Result<(), ShapeError> {
    match arg {
        AggArg::Star if func != AggFn::Count => Err(ShapeError::StarArgument(func)),
        AggArg::Star => Ok(()),
        AggArg::Expr(e) => check_scalar(e, context),
    }
}

fn requires_records(input: &LogicalPlan, op: &'static str) -> Result<(), ShapeError> {
    match input.output_shape() {
        OutputShape::Records => Ok(()),
        shape => Err(ShapeError::IncompatibleInput { op, shape }),
    }
}

fn check_node(node: &PlanNode) -> Result<(PathFlags, OutputShape), ShapeError> {
    use OutputShape::*;
    let nested = |input: &LogicalPlan, op: &'static str, taken: fn(&PathFlags) -> bool| {
        if taken(&input.0.flags) {
            Err(ShapeError::RepeatedOnPath(op))
        } else {
            Ok(())
        }
    };
    let after_count = |input: &LogicalPlan| {
        if input.0.flags.count_all {
            Err(ShapeError::AboveCount)
        } else {
            Ok(())
        }
    };
    match node {
        PlanNode::Scan { .. } => Ok((PathFlags::default(), Records)),
        PlanNode::Filter { input, predicate } => {
            after_count(input)?;
            requires_records(input, "filter")?;
            check_scalar(predicate, "filter predicate")?;
            Ok((input.0.flags, Records))
        }
        PlanNode::Project { input, items } => {
            after_count(input)?;
            requires_records(input, "project")?;
            if items.is_empty() {
                return Err(ShapeError::EmptyProjection);
            }
            let mut names = BTreeSet::new();
            let mut aggregates = 0;
            for item in items {
                if let Some(alias) = &item.alias {
                    check_identifier(alias)?;
                }
                match &item.expr {
                    Expr::Wildcard => {
                        if item.alias.is_some() {
                            return Err(ShapeError::MisplacedWildcard("aliased projection"));
                        }
                    }
                    e => check_projection_expr(e)?,
                }
                if matches!(item.expr, Expr::Aggregate { .. }) {
                    aggregates += 1;
                }
                if let Some(name) = item.output_name() {
                    if !names.insert(name.to_owned()) {
                        return Err(ShapeError::DuplicateName(name.to_owned()));
                    }
                }
            }
            if aggregates != 0 && aggregates != items.len() {
                return Err(ShapeError::MixedAggregates);
            }
            Ok((input.0.flags, Records))
        }
        PlanNode::ProjectValue { input, item } => {
            after_count(input)?;
            requires_records(input, "value projection")?;
            check_projection_expr(item)?;
            Ok((input.0.flags, Values))
        }
        PlanNode::Limit { input, count } => {
            after_count(input)?;
            if *count == 0 {
                return Err(ShapeError::ZeroLimit);
            }
            Ok((input.0.flags, input.output_shape()))
        }
        PlanNode::GroupAgg {
            input,
            key,
            key_alias,
            aggs,
        } => {
            after_count(input)?;
            nested(input, "group-by", |f| f.group_agg)?;
            requires_records(input, "group-by")?;
            check_scalar(key, "group key")?;
            check_identifier(key_alias)?;
            if aggs.is_empty() {
                return Err(ShapeError::EmptyProjection);
            }
            let mut names = BTreeSet::from([key_alias.clone()]);
            for agg in aggs {
                check_identifier(&agg.alias)?;
                check_agg_arg(agg.func, &agg.arg, "aggregate argument")?;
                if !names.insert(agg.alias.clone()) {
                    return Err(ShapeError::DuplicateName(agg.alias.clone()));
                }
            }
            let flags = PathFlags {
                group_agg: true,
                ..input.0.flags
            };
            Ok((flags, Records))
        }
        PlanNode::Sort { input, key, .. } => {
            after_count(input)?;
            nested(input, "sort", |f| f.sort)?;
            requires_records(input, "sort")?;
            check_scalar(key, "sort key")?;
            let flags = PathFlags {
                sort: true,
                ..input.0.flags
            };
            Ok((flags, Records))
        }
        PlanNode::Join {
            left,
            right,
            left_key,
            right_key,
            kind,
        } => {
            if *kind != JoinKind::Inner {
                return Err(ShapeError::UnsupportedJoin(
                    format!("{kind:?}").to_ascii_lowercase(),
                ));
            }
            for side in [left, right] {
                after_count(side)?;
                nested(side, "join", |f| f.join)?;
                requires_records(side, "join")?;
            }
            check_scalar(left_key, "join key")?;
            check_scalar(right_key, "join key")?;
            let flags = PathFlags {
                join: true,
                ..left.0.flags.union(right.0.flags)
            };
            Ok((flags, Pairs))
        }
        PlanNode::CountAll { input } => {
            after_count(input)?;
            Ok((
                PathFlags {
                    count_all: true,
                    ..input.0.flags
                },
                Scalar,
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data() -> LogicalPlan {
        LogicalPlan::scan_dataset(DatasetRef::unqualified("Data").unwrap())
    }

    #[test]
    fn scan_validates_identifiers() {
        let p = LogicalPlan::scan("demo", "Data").unwrap();
        assert_eq!(
            p.node(),
            &PlanNode::Scan {
                dataset: DatasetRef::new("demo", "Data").unwrap()
            }
        );
        assert!(matches!(
            LogicalPlan::scan("", "Data"),
            Err(ShapeError::InvalidIdentifier(_))
        ));
        assert!(LogicalPlan::scan("bench", "ClosedData").is_ok());
        assert!(LogicalPlan::scan("bench", "Closed Data").is_err());
    }

    #[test]
    fn dataset_ref_parses_qualified_names() {
        let d: DatasetRef = "demo.negTweets".parse().unwrap();
        assert_eq!(d.dataverse(), Some("demo"));
        assert_eq!(d.name(), "negTweets");
        assert_eq!(d.to_string(), "demo.negTweets");
        assert!("a.b.c".parse::<DatasetRef>().is_err());
    }

    #[test]
    fn zero_limit_rejected() {
        assert_eq!(data().limit(0), Err(ShapeError::ZeroLimit));
    }

    #[test]
    fn compose_leaves_parent_untouched() {
        let base = data();
        let filtered = base.filter(Expr::col("ten").eq(Expr::lit(5))).unwrap();
        let projected = filtered
            .project(vec![ProjectItem::new(Expr::col("two"))])
            .unwrap();
        assert!(matches!(filtered.node(), PlanNode::Filter { .. }));
        match projected.node() {
            PlanNode::Project { input, .. } => assert_eq!(input, &filtered),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn repeated_operators_on_a_path_rejected() {
        let sorted = data().sort(Expr::col("a"), SortOrder::Asc).unwrap();
        assert_eq!(
            sorted.sort(Expr::col("b"), SortOrder::Asc),
            Err(ShapeError::RepeatedOnPath("sort"))
        );
        let counted = data().count_all().unwrap();
        assert_eq!(counted.limit(1), Err(ShapeError::AboveCount));
    }

    #[test]
    fn join_sides_may_each_sort_once() {
        let l = data().sort(Expr::col("a"), SortOrder::Asc).unwrap();
        let r = data().sort(Expr::col("a"), SortOrder::Desc).unwrap();
        let j = l
            .join(&r, Expr::col("a"), Expr::col("a"), JoinKind::Inner)
            .unwrap();
        assert_eq!(j.output_shape(), OutputShape::Pairs);
        assert!(matches!(
            j.filter(Expr::col("a").eq(Expr::lit(1))),
            Err(ShapeError::IncompatibleInput { .. })
        ));
        assert!(j.count_all().is_ok());
        assert_eq!(
            data().join(&data(), Expr::col("a"), Expr::col("a"), JoinKind::Left),
            Err(ShapeError::UnsupportedJoin("left".into()))
        );
    }

    #[test]
    fn projection_rules() {
        assert_eq!(data().project(vec![]), Err(ShapeError::EmptyProjection));
        assert_eq!(
            data().project(vec![
                ProjectItem::new(Expr::col("a")),
                ProjectItem::new(Expr::agg(AggFn::Max, Some(Expr::col("b"))))
            ]),
            Err(ShapeError::MixedAggregates)
        );
        assert_eq!(
            data().project(vec![
                ProjectItem::new(Expr::col("a")),
                ProjectItem::aliased(Expr::lit(1), "a")
            ]),
            Err(ShapeError::DuplicateName("a".into()))
        );
        assert_eq!(
            data().filter(Expr::agg(AggFn::Count, None).gt(Expr::lit(1))),
            Err(ShapeError::MisplacedAggregate("filter predicate"))
        );
        assert_eq!(
            data().project(vec![ProjectItem::new(Expr::agg(AggFn::Max, None))]),
            Err(ShapeError::StarArgument(AggFn::Max))
        );
    }

    #[test]
    fn serde_revalidates_shape() {
        let p = data()
            .filter(Expr::col("ten").eq(Expr::lit(3)))
            .unwrap()
            .limit(5)
            .unwrap();
        let json = serde_json::to_string(&p).unwrap();
        let back: LogicalPlan = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
        let bad = json.replace("\"count\":5", "\"count\":0");
        assert!(serde_json::from_str::<LogicalPlan>(&bad).is_err());
    }
}
