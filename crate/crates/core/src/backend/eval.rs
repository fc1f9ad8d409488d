//! Row-level expression evaluation for the in-memory executor.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::sync::Arc;

use serde_json::{Map, Number, Value};

use crate::ast::{ArithOp, BoolOp, CompareOp, Expr, Literal};

use super::ExecError;

/// A server-side scalar function: arguments in, value out.
pub type Udf = Arc<dyn Fn(&[Value]) -> Result<Value, String> + Send + Sync>;

pub(crate) struct EvalContext<'a> {
    pub strict_fields: bool,
    pub udfs: &'a BTreeMap<String, Udf>,
}

/// Rank of a JSON type in the executor's total order.
fn type_rank(v: &Value) -> u8 {
    match v {
        Value::Null => 0,
        Value::Bool(_) => 1,
        Value::Number(_) => 2,
        Value::String(_) => 3,
        Value::Array(_) => 4,
        Value::Object(_) => 5,
    }
}

fn cmp_numbers(a: &Number, b: &Number) -> Ordering {
    match (a.as_i64(), b.as_i64()) {
        (Some(x), Some(y)) => x.cmp(&y),
        _ => {
            let x = a.as_f64().unwrap_or(f64::NAN);
            let y = b.as_f64().unwrap_or(f64::NAN);
            x.total_cmp(&y)
        }
    }
}

/// Total order over JSON values: null < bool < number < string < array < object.
pub fn total_cmp(a: &Value, b: &Value) -> Ordering {
    match (a, b) {
        (Value::Bool(x), Value::Bool(y)) => x.cmp(y),
        (Value::Number(x), Value::Number(y)) => cmp_numbers(x, y),
        (Value::String(x), Value::String(y)) => x.cmp(y),
        (Value::Array(x), Value::Array(y)) => {
            for (p, q) in x.iter().zip(y) {
                let o = total_cmp(p, q);
                if o != Ordering::Equal {
                    return o;
                }
            }
            x.len().cmp(&y.len())
        }
        (Value::Object(x), Value::Object(y)) => {
            let mut xs: Vec<_> = x.iter().collect();
            let mut ys: Vec<_> = y.iter().collect();
            xs.sort_by(|p, q| p.0.cmp(q.0));
            ys.sort_by(|p, q| p.0.cmp(q.0));
            for ((kp, vp), (kq, vq)) in xs.iter().zip(&ys) {
                let o = kp.cmp(kq).then_with(|| total_cmp(vp, vq));
                if o != Ordering::Equal {
                    return o;
                }
            }
            xs.len().cmp(&ys.len())
        }
        _ => type_rank(a).cmp(&type_rank(b)),
    }
}

/// Equality used by joins and grouping: numbers compare by value.
pub fn values_equal(a: &Value, b: &Value) -> bool {
    total_cmp(a, b) == Ordering::Equal
}

/// SQL comparison: `None` (unknown) when either side is null or the types
/// are not comparable.
fn sql_compare(a: &Value, b: &Value) -> Option<Ordering> {
    match (a, b) {
        (Value::Bool(_), Value::Bool(_))
        | (Value::Number(_), Value::Number(_))
        | (Value::String(_), Value::String(_)) => Some(total_cmp(a, b)),
        _ => None,
    }
}

fn truth(v: &Value) -> Option<bool> {
    match v {
        Value::Bool(b) => Some(*b),
        _ => None,
    }
}

fn from_truth(t: Option<bool>) -> Value {
    t.map_or(Value::Null, Value::Bool)
}

fn arith(op: ArithOp, a: &Value, b: &Value) -> Result<Value, ExecError> {
    let (Value::Number(x), Value::Number(y)) = (a, b) else {
        return Ok(Value::Null);
    };
    if let (Some(x), Some(y)) = (x.as_i64(), y.as_i64()) {
        let exact = match op {
            ArithOp::Add => x.checked_add(y),
            ArithOp::Sub => x.checked_sub(y),
            ArithOp::Mul => x.checked_mul(y),
            ArithOp::Div => {
                if y == 0 {
                    return Ok(Value::Null);
                }
                if x % y == 0 {
                    x.checked_div(y)
                } else {
                    return Ok(float(x as f64 / y as f64));
                }
            }
        };
        return exact.map(Value::from).ok_or_else(|| {
            ExecError::Arithmetic(format!("integer overflow in {x} {op:?} {y}"))
        });
    }
    let (x, y) = (x.as_f64().unwrap_or(f64::NAN), y.as_f64().unwrap_or(f64::NAN));
    Ok(match op {
        ArithOp::Add => float(x + y),
        ArithOp::Sub => float(x - y),
        ArithOp::Mul => float(x * y),
        ArithOp::Div if y == 0.0 => Value::Null,
        ArithOp::Div => float(x / y),
    })
}

fn float(x: f64) -> Value {
    Number::from_f64(x).map_or(Value::Null, Value::Number)
}

fn builtin(name: &str, args: &[Value]) -> Option<Result<Value, String>> {
    let one = |f: &dyn Fn(&Value) -> Result<Value, String>| {
        if args.len() != 1 {
            return Err(format!("{name} expects 1 argument, got {}", args.len()));
        }
        if args[0].is_null() {
            return Ok(Value::Null);
        }
        f(&args[0])
    };
    let text = |v: &Value| match v {
        Value::String(s) => Ok(s.clone()),
        other => Err(format!("{name} expects a string, got {other}")),
    };
    Some(match name {
        "upper" => one(&|v| text(v).map(|s| Value::String(s.to_uppercase()))),
        "lower" => one(&|v| text(v).map(|s| Value::String(s.to_lowercase()))),
        "trim" => one(&|v| text(v).map(|s| Value::String(s.trim().to_owned()))),
        "length" => one(&|v| text(v).map(|s| Value::from(s.chars().count() as i64))),
        "abs" => one(&|v| match v {
            Value::Number(n) => match n.as_i64() {
                Some(i) => i
                    .checked_abs()
                    .map(Value::from)
                    .ok_or_else(|| "abs overflow".to_owned()),
                None => Ok(float(n.as_f64().unwrap_or(f64::NAN).abs())),
            },
            other => Err(format!("abs expects a number, got {other}")),
        }),
        _ => return None,
    })
}

impl EvalContext<'_> {
    fn column(&self, row: &Map<String, Value>, name: &str) -> Result<Value, ExecError> {
        match row.get(name) {
            Some(v) => Ok(v.clone()),
            None if self.strict_fields => Err(ExecError::UnknownColumn(name.to_owned())),
            None => Ok(Value::Null),
        }
    }

    fn call(&self, name: &str, args: &[Value]) -> Result<Value, ExecError> {
        let lower = name.to_ascii_lowercase();
        if let Some(f) = self.udfs.get(&lower) {
            return f(args).map_err(|m| ExecError::Function {
                name: name.to_owned(),
                message: m,
            });
        }
        match builtin(&lower, args) {
            Some(r) => r.map_err(|m| ExecError::Function {
                name: name.to_owned(),
                message: m,
            }),
            None => Err(ExecError::UnknownFunction(name.to_owned())),
        }
    }

    /// Evaluates a per-row expression. Iterative (post-order with an explicit
    /// value stack) so very deep predicates cannot overflow the call stack.
    pub fn eval(&self, expr: &Expr, row: &Value) -> Result<Value, ExecError> {
        enum Step<'e> {
            Visit(&'e Expr),
            Apply(&'e Expr),
        }
        let empty = Map::new();
        let fields = match row {
            Value::Object(m) => m,
            _ => &empty,
        };
        let mut work = vec![Step::Visit(expr)];
        let mut values: Vec<Value> = Vec::new();
        while let Some(step) = work.pop() {
            match step {
                Step::Visit(e) => match e {
                    Expr::Column { name } => values.push(self.column(fields, name)?),
                    Expr::Literal { value } => values.push(literal(value)),
                    Expr::Wildcard => values.push(row.clone()),
                    Expr::Aggregate { .. } => {
                        return Err(ExecError::Unsupported(
                            "aggregate evaluated outside an aggregation".to_owned(),
                        ))
                    }
                    _ => {
                        work.push(Step::Apply(e));
                        for child in e.children().into_iter().rev() {
                            work.push(Step::Visit(child));
                        }
                    }
                },
                Step::Apply(e) => {
                    let arity = e.children().len();
                    let args = values.split_off(values.len() - arity);
                    let v = match e {
                        Expr::Compare { op, .. } => {
                            from_truth(sql_compare(&args[0], &args[1]).map(|o| match op {
                                CompareOp::Eq => o == Ordering::Equal,
                                CompareOp::Ne => o != Ordering::Equal,
                                CompareOp::Lt => o == Ordering::Less,
                                CompareOp::Le => o != Ordering::Greater,
                                CompareOp::Gt => o == Ordering::Greater,
                                CompareOp::Ge => o != Ordering::Less,
                            }))
                        }
                        Expr::Bool { op, .. } => {
                            let (a, b) = (truth(&args[0]), truth(&args[1]));
                            from_truth(match op {
                                BoolOp::And => match (a, b) {
                                    (Some(false), _) | (_, Some(false)) => Some(false),
                                    (Some(true), Some(true)) => Some(true),
                                    _ => None,
                                },
                                BoolOp::Or => match (a, b) {
                                    (Some(true), _) | (_, Some(true)) => Some(true),
                                    (Some(false), Some(false)) => Some(false),
                                    _ => None,
                                },
                            })
                        }
                        Expr::Not { .. } => from_truth(truth(&args[0]).map(|b| !b)),
                        Expr::Arith { op, .. } => arith(*op, &args[0], &args[1])?,
                        Expr::Call { name, .. } => self.call(name, &args)?,
                        _ => unreachable!("leaf handled in Visit"),
                    };
                    values.push(v);
                }
            }
        }
        Ok(values.pop().unwrap_or(Value::Null))
    }
}

pub(crate) fn literal(l: &Literal) -> Value {
    Value::from(l.clone())
}
