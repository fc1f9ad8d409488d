//! Scalar expression trees.
//!
//! Expressions are plain values. Deep trees are supported: every traversal in
//! this crate that may see user-built expressions (shape checks, rendering)
//! walks them with an explicit stack instead of recursion.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Constant value embedded in a query.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Literal {
    Int(i64),
    Bool(bool),
    Str(String),
}

impl From<i64> for Literal {
    fn from(v: i64) -> Self {
        Literal::Int(v)
    }
}

impl From<i32> for Literal {
    fn from(v: i32) -> Self {
        Literal::Int(v.into())
    }
}

impl From<bool> for Literal {
    fn from(v: bool) -> Self {
        Literal::Bool(v)
    }
}

impl From<&str> for Literal {
    fn from(v: &str) -> Self {
        Literal::Str(v.to_owned())
    }
}

impl From<String> for Literal {
    fn from(v: String) -> Self {
        Literal::Str(v)
    }
}

impl From<Literal> for serde_json::Value {
    fn from(lit: Literal) -> Self {
        match lit {
            Literal::Int(v) => v.into(),
            Literal::Bool(v) => v.into(),
            Literal::Str(v) => v.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompareOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoolOp {
    And,
    Or,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Aggregate function kinds understood by every dialect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AggFn {
    Count,
    Max,
    Min,
}

impl AggFn {
    pub fn name(self) -> &'static str {
        match self {
            AggFn::Count => "count",
            AggFn::Max => "max",
            AggFn::Min => "min",
        }
    }

    /// Parses the Pandas-style aggregate name (`"count"`, `"max"`, `"min"`).
    pub fn from_name(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "count" => Some(AggFn::Count),
            "max" => Some(AggFn::Max),
            "min" => Some(AggFn::Min),
            _ => None,
        }
    }
}

impl fmt::Display for AggFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Argument of an aggregate: `*` or a scalar expression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AggArg {
    Star,
    Expr(Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Expr {
    /// Field of the current row.
    Column { name: String },
    Literal { value: Literal },
    Compare {
        op: CompareOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Bool {
        op: BoolOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Not { operand: Box<Expr> },
    Arith {
        op: ArithOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    /// Call of a named function; the name is resolved through the dialect's
    /// function registry at render time.
    Call { name: String, args: Vec<Expr> },
    /// Aggregate over all input rows. Only legal as a whole projection item.
    Aggregate { func: AggFn, arg: AggArg },
    /// Every field of the current row (`t.*`). Only legal as a whole
    /// projection item.
    Wildcard,
}

impl Expr {
    pub fn col(name: impl Into<String>) -> Self {
        Expr::Column { name: name.into() }
    }

    pub fn lit(value: impl Into<Literal>) -> Self {
        Expr::Literal {
            value: value.into(),
        }
    }

    pub fn call(name: impl Into<String>, args: Vec<Expr>) -> Self {
        Expr::Call {
            name: name.into(),
            args,
        }
    }

    pub fn agg(func: AggFn, arg: Option<Expr>) -> Self {
        Expr::Aggregate {
            func,
            arg: match arg {
                Some(e) => AggArg::Expr(Box::new(e)),
                None => AggArg::Star,
            },
        }
    }

    pub fn compare(op: CompareOp, lhs: Expr, rhs: Expr) -> Self {
        Expr::Compare {
            op,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        }
    }

    pub fn arith(op: ArithOp, lhs: Expr, rhs: Expr) -> Self {
        Expr::Arith {
            op,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        }
    }

    pub fn eq(self, rhs: Expr) -> Self {
        Self::compare(CompareOp::Eq, self, rhs)
    }

    pub fn ne(self, rhs: Expr) -> Self {
        Self::compare(CompareOp::Ne, self, rhs)
    }

    pub fn lt(self, rhs: Expr) -> Self {
        Self::compare(CompareOp::Lt, self, rhs)
    }

    pub fn le(self, rhs: Expr) -> Self {
        Self::compare(CompareOp::Le, self, rhs)
    }

    pub fn gt(self, rhs: Expr) -> Self {
        Self::compare(CompareOp::Gt, self, rhs)
    }

    pub fn ge(self, rhs: Expr) -> Self {
        Self::compare(CompareOp::Ge, self, rhs)
    }

    pub fn and(self, rhs: Expr) -> Self {
        Expr::Bool {
            op: BoolOp::And,
            lhs: Box::new(self),
            rhs: Box::new(rhs),
        }
    }

    pub fn or(self, rhs: Expr) -> Self {
        Expr::Bool {
            op: BoolOp::Or,
            lhs: Box::new(self),
            rhs: Box::new(rhs),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Self {
        Expr::Not {
            operand: Box::new(self),
        }
    }

    /// Direct children, left to right.
    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Column { .. } | Expr::Literal { .. } | Expr::Wildcard => Vec::new(),
            Expr::Compare { lhs, rhs, .. }
            | Expr::Bool { lhs, rhs, .. }
            | Expr::Arith { lhs, rhs, .. } => vec![lhs, rhs],
            Expr::Not { operand } => vec![operand],
            Expr::Call { args, .. } => args.iter().collect(),
            Expr::Aggregate { arg, .. } => match arg {
                AggArg::Star => Vec::new(),
                AggArg::Expr(e) => vec![e],
            },
        }
    }

    /// Pre-order iterator over this node and all descendants.
    pub fn descendants(&self) -> Descendants<'_> {
        Descendants { stack: vec![self] }
    }

    pub fn contains_aggregate(&self) -> bool {
        self.descendants()
            .any(|e| matches!(e, Expr::Aggregate { .. }))
    }

    pub fn contains_wildcard(&self) -> bool {
        self.descendants().any(|e| matches!(e, Expr::Wildcard))
    }

    /// Names of functions called anywhere in the tree.
    pub fn function_names(&self) -> impl Iterator<Item = &str> {
        self.descendants().filter_map(|e| match e {
            Expr::Call { name, .. } => Some(name.as_str()),
            _ => None,
        })
    }

    /// Nesting depth; a leaf has depth 1.
    pub fn depth(&self) -> usize {
        let mut max = 0;
        let mut stack = vec![(self, 1usize)];
        while let Some((e, d)) = stack.pop() {
            max = max.max(d);
            stack.extend(e.children().into_iter().map(|c| (c, d + 1)));
        }
        max
    }
}

impl Expr {
    /// Moves boxed children out into `out`, leaving cheap placeholders.
    fn detach_children(&mut self, out: &mut Vec<Expr>) {
        match self {
            Expr::Column { .. } | Expr::Literal { .. } | Expr::Wildcard => {}
            Expr::Compare { lhs, rhs, .. }
            | Expr::Bool { lhs, rhs, .. }
            | Expr::Arith { lhs, rhs, .. } => {
                out.push(std::mem::replace(&mut **lhs, Expr::Wildcard));
                out.push(std::mem::replace(&mut **rhs, Expr::Wildcard));
            }
            Expr::Not { operand } => out.push(std::mem::replace(&mut **operand, Expr::Wildcard)),
            Expr::Call { args, .. } => out.append(args),
            Expr::Aggregate { arg, .. } => {
                if let AggArg::Expr(e) = arg {
                    out.push(std::mem::replace(&mut **e, Expr::Wildcard));
                }
            }
        }
    }
}

// Iterative drop so very deep trees do not exhaust the stack.
impl Drop for Expr {
    fn drop(&mut self) {
        let mut pending = Vec::new();
        self.detach_children(&mut pending);
        while let Some(mut e) = pending.pop() {
            e.detach_children(&mut pending);
        }
    }
}

pub struct Descendants<'a> {
    stack: Vec<&'a Expr>,
}

impl<'a> Iterator for Descendants<'a> {
    type Item = &'a Expr;

    fn next(&mut self) -> Option<&'a Expr> {
        let e = self.stack.pop()?;
        self.stack.extend(e.children().into_iter().rev());
        Some(e)
    }
}
