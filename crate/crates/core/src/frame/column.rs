use std::ops::{Add, BitAnd, BitOr, Div, Mul, Not, Sub};

use serde_json::Value;

use crate::ast::{AggFn, ArithOp, CompareOp, Expr, Literal, LogicalPlan, ProjectItem};

use super::{scalar_of, Frame, FrameError};

/// An expression over the rows of one frame: `df['ten']`, `df['a'] + 1`.
#[derive(Debug, Clone)]
pub struct ColumnRef {
    frame: Frame,
    expr: Expr,
    mixed: bool,
}

/// A boolean expression tied to the frame it was built from.
#[derive(Debug, Clone)]
pub struct BooleanMask {
    source: u64,
    expr: Expr,
    mixed: bool,
}

/// Right-hand side of a comparison or arithmetic operator.
#[derive(Debug, Clone)]
pub enum Operand {
    Literal(Literal),
    Column(ColumnRef),
}

macro_rules! literal_operand {
    ($($t:ty),*) => {$(
        impl From<$t> for Operand {
            fn from(v: $t) -> Self {
                Operand::Literal(v.into())
            }
        }
    )*};
}
literal_operand!(i64, i32, bool, &str, String);

impl From<ColumnRef> for Operand {
    fn from(c: ColumnRef) -> Self {
        Operand::Column(c)
    }
}

impl From<&ColumnRef> for Operand {
    fn from(c: &ColumnRef) -> Self {
        Operand::Column(c.clone())
    }
}

impl ColumnRef {
    pub(crate) fn new(frame: Frame, expr: Expr) -> Self {
        Self {
            frame,
            expr,
            mixed: false,
        }
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub(crate) fn into_expr(self) -> Expr {
        self.expr.clone()
    }

    pub fn source(&self) -> u64 {
        self.frame.id
    }

    pub(crate) fn is_mixed(&self) -> bool {
        self.mixed
    }

    /// Resolves an operand, noting whether it came from another frame.
    fn operand(&self, rhs: Operand) -> (Expr, bool) {
        match rhs {
            Operand::Literal(l) => (Expr::Literal { value: l }, self.mixed),
            Operand::Column(c) => {
                let mixed = self.mixed || c.mixed || c.frame.id != self.frame.id;
                (c.expr.clone(), mixed)
            }
        }
    }

    fn compare(&self, op: CompareOp, rhs: impl Into<Operand>) -> BooleanMask {
        let (r, mixed) = self.operand(rhs.into());
        BooleanMask {
            source: self.frame.id,
            expr: Expr::compare(op, self.expr.clone(), r),
            mixed,
        }
    }

    pub fn eq(&self, rhs: impl Into<Operand>) -> BooleanMask {
        self.compare(CompareOp::Eq, rhs)
    }

    pub fn ne(&self, rhs: impl Into<Operand>) -> BooleanMask {
        self.compare(CompareOp::Ne, rhs)
    }

    pub fn lt(&self, rhs: impl Into<Operand>) -> BooleanMask {
        self.compare(CompareOp::Lt, rhs)
    }

    pub fn le(&self, rhs: impl Into<Operand>) -> BooleanMask {
        self.compare(CompareOp::Le, rhs)
    }

    pub fn gt(&self, rhs: impl Into<Operand>) -> BooleanMask {
        self.compare(CompareOp::Gt, rhs)
    }

    pub fn ge(&self, rhs: impl Into<Operand>) -> BooleanMask {
        self.compare(CompareOp::Ge, rhs)
    }

    fn arith(&self, op: ArithOp, rhs: Operand) -> ColumnRef {
        let (r, mixed) = self.operand(rhs);
        ColumnRef {
            frame: self.frame.clone(),
            expr: Expr::arith(op, self.expr.clone(), r),
            mixed,
        }
    }

    /// Applies a registered function, e.g. `upper`. Fails immediately when
    /// the session's dialect does not know the name.
    pub fn call(&self, function: &str) -> Result<ColumnRef, FrameError> {
        let dialect = self.frame.session.dialect();
        if dialect.resolve_function(function).is_err() {
            return Err(FrameError::UnknownFunction {
                name: function.to_owned(),
                available: dialect.function_names(),
            });
        }
        Ok(ColumnRef {
            frame: self.frame.clone(),
            expr: Expr::call(function, vec![self.expr.clone()]),
            mixed: self.mixed,
        })
    }

    /// `df['c'].map(f)`: a single-column frame of `f(c)`.
    pub fn map(&self, function: &str) -> Result<Frame, FrameError> {
        let called = self.call(function)?;
        called.to_frame()
    }

    /// This expression as a single-column frame (`SELECT VALUE expr`).
    pub fn to_frame(&self) -> Result<Frame, FrameError> {
        self.frame.owns(self.frame.id, self.mixed)?;
        Ok(self.frame.derive(self.frame.plan.project_value(self.expr.clone())?))
    }

    /// The plan [`ColumnRef::max`] (`AggFn::Max`) or [`ColumnRef::min`]
    /// (`AggFn::Min`) submits.
    pub fn extreme_plan(&self, func: AggFn) -> Result<LogicalPlan, FrameError> {
        self.frame.owns(self.frame.id, self.mixed)?;
        Ok(self
            .frame
            .plan
            .project(vec![ProjectItem::new(Expr::agg(func, Some(self.expr.clone())))])?)
    }

    fn extreme(&self, func: AggFn) -> Result<Value, FrameError> {
        let plan = self.extreme_plan(func)?;
        let (statement, rows) = self.frame.session.run(&plan)?;
        match rows.as_slice() {
            [v] => Ok(scalar_of(v).clone()),
            _ => Err(FrameError::UnexpectedResult {
                statement,
                message: format!("expected one row, got {}", rows.len()),
            }),
        }
    }

    /// `df['c'].max()`. One request.
    pub fn max(&self) -> Result<Value, FrameError> {
        self.extreme(AggFn::Max)
    }

    /// `df['c'].min()`. One request.
    pub fn min(&self) -> Result<Value, FrameError> {
        self.extreme(AggFn::Min)
    }
}

macro_rules! arith_op {
    ($trait:ident, $method:ident, $op:expr) => {
        impl<R: Into<Operand>> $trait<R> for ColumnRef {
            type Output = ColumnRef;
            fn $method(self, rhs: R) -> ColumnRef {
                self.arith($op, rhs.into())
            }
        }

        impl<R: Into<Operand>> $trait<R> for &ColumnRef {
            type Output = ColumnRef;
            fn $method(self, rhs: R) -> ColumnRef {
                self.arith($op, rhs.into())
            }
        }
    };
}
arith_op!(Add, add, ArithOp::Add);
arith_op!(Sub, sub, ArithOp::Sub);
arith_op!(Mul, mul, ArithOp::Mul);
arith_op!(Div, div, ArithOp::Div);

impl BooleanMask {
    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn source(&self) -> u64 {
        self.source
    }

    pub(crate) fn is_mixed(&self) -> bool {
        self.mixed
    }

    fn combine(&self, other: &BooleanMask, and: bool) -> BooleanMask {
        let (l, r) = (self.expr.clone(), other.expr.clone());
        BooleanMask {
            source: self.source,
            expr: if and { l.and(r) } else { l.or(r) },
            mixed: self.mixed || other.mixed || self.source != other.source,
        }
    }

    /// `&` that rejects masks from different frames right away.
    pub fn and(&self, other: &BooleanMask) -> Result<BooleanMask, FrameError> {
        let m = self.combine(other, true);
        if m.mixed {
            Err(FrameError::CrossFrame)
        } else {
            Ok(m)
        }
    }

    /// `|` that rejects masks from different frames right away.
    pub fn or(&self, other: &BooleanMask) -> Result<BooleanMask, FrameError> {
        let m = self.combine(other, false);
        if m.mixed {
            Err(FrameError::CrossFrame)
        } else {
            Ok(m)
        }
    }
}

// The operator forms defer the cross-frame check to `Frame::filter`.
impl BitAnd for BooleanMask {
    type Output = BooleanMask;
    fn bitand(self, rhs: BooleanMask) -> BooleanMask {
        self.combine(&rhs, true)
    }
}

impl BitOr for BooleanMask {
    type Output = BooleanMask;
    fn bitor(self, rhs: BooleanMask) -> BooleanMask {
        self.combine(&rhs, false)
    }
}

impl Not for BooleanMask {
    type Output = BooleanMask;
    fn not(self) -> BooleanMask {
        BooleanMask {
            source: self.source,
            expr: self.expr.clone().not(),
            mixed: self.mixed,
        }
    }
}
