//! Brute-force reference evaluator, written against plain JSON rows and
//! sharing no code with the library's executor.

use std::collections::HashMap;

use lazydf::ast::{AggArg, AggFn, ArithOp, BoolOp, CompareOp, Expr, Literal, PlanNode, SortOrder};
use serde_json::{json, Map, Value};

/// Result of a benchmark expression as computed by hand.
#[derive(Debug, Clone, PartialEq)]
pub enum Answer {
    Scalar(Value),
    Rows(Vec<Value>),
}

fn int(row: &Value, field: &str) -> i64 {
    row[field].as_i64().unwrap_or_else(|| panic!("{field} missing in {row}"))
}

/// The twelve benchmark expressions, spelled out directly over the rows.
/// `p` holds the predicate literals in placeholder order.
pub fn expression(id: u8, p: &[i64], main: &[Value], left: &[Value], right: &[Value]) -> Answer {
    match id {
        1 => Answer::Scalar(json!(main.len())),
        2 => Answer::Rows(
            main.iter()
                .take(5)
                .map(|r| json!({"two": r["two"], "four": r["four"]}))
                .collect(),
        ),
        3 => Answer::Scalar(json!(main
            .iter()
            .filter(|r| int(r, "ten") == p[0] && int(r, "twentyPercent") == p[1] && int(r, "two") == p[2])
            .count())),
        4 => {
            let mut groups: HashMap<i64, u64> = HashMap::new();
            for r in main {
                *groups.entry(int(r, "oddOnePercent")).or_default() += 1;
            }
            Answer::Rows(groups.into_iter().map(|(k, c)| json!({"grp_id": k, "cnt": c})).collect())
        }
        5 => Answer::Rows(
            main.iter()
                .take(5)
                .map(|r| Value::String(r["stringu1"].as_str().unwrap().to_uppercase()))
                .collect(),
        ),
        6 => Answer::Scalar(json!(main.iter().map(|r| int(r, "unique1")).max().unwrap())),
        7 => Answer::Scalar(json!(main.iter().map(|r| int(r, "unique1")).min().unwrap())),
        8 => {
            let mut groups: HashMap<i64, i64> = HashMap::new();
            for r in main {
                let m = groups.entry(int(r, "twenty")).or_insert(i64::MIN);
                *m = (*m).max(int(r, "four"));
            }
            Answer::Rows(groups.into_iter().map(|(k, m)| json!({"grp_id": k, "max": m})).collect())
        }
        9 => {
            let mut rows = main.to_vec();
            rows.sort_by_key(|r| std::cmp::Reverse(int(r, "unique1")));
            rows.truncate(5);
            Answer::Rows(rows)
        }
        10 => Answer::Rows(main.iter().filter(|r| int(r, "ten") == p[0]).take(5).cloned().collect()),
        11 => Answer::Scalar(json!(main
            .iter()
            .filter(|r| (p[0]..=p[1]).contains(&int(r, "onePercent")))
            .count())),
        12 => {
            let mut n = 0u64;
            for l in left {
                for r in right {
                    if l["unique1"] == r["unique1"] {
                        n += 1;
                    }
                }
            }
            Answer::Scalar(json!(n))
        }
        other => panic!("no expression {other}"),
    }
}

/// Sorted canonical text of each row: equal vectors mean equal multisets.
pub fn multiset(rows: &[Value]) -> Vec<String> {
    let mut v: Vec<String> = rows.iter().map(Value::to_string).collect();
    v.sort();
    v
}

fn lit(l: &Literal) -> Value {
    match l {
        Literal::Int(i) => json!(i),
        Literal::Bool(b) => json!(b),
        Literal::Str(s) => json!(s),
    }
}

/// Scalar expression over one row. Covers the integer/boolean subset the
/// property tests generate; `None` is SQL NULL.
pub fn eval(e: &Expr, row: &Value) -> Option<Value> {
    match e {
        Expr::Column { name } => row.get(name).filter(|v| !v.is_null()).cloned(),
        Expr::Literal { value } => Some(lit(value)),
        Expr::Compare { op, lhs, rhs } => {
            let (a, b) = (eval(lhs, row)?.as_i64()?, eval(rhs, row)?.as_i64()?);
            Some(json!(match op {
                CompareOp::Eq => a == b,
                CompareOp::Ne => a != b,
                CompareOp::Lt => a < b,
                CompareOp::Le => a <= b,
                CompareOp::Gt => a > b,
                CompareOp::Ge => a >= b,
            }))
        }
        Expr::Bool { op, lhs, rhs } => {
            let a = eval(lhs, row).and_then(|v| v.as_bool());
            let b = eval(rhs, row).and_then(|v| v.as_bool());
            match op {
                BoolOp::And => match (a, b) {
                    (Some(false), _) | (_, Some(false)) => Some(json!(false)),
                    (Some(true), Some(true)) => Some(json!(true)),
                    _ => None,
                },
                BoolOp::Or => match (a, b) {
                    (Some(true), _) | (_, Some(true)) => Some(json!(true)),
                    (Some(false), Some(false)) => Some(json!(false)),
                    _ => None,
                },
            }
        }
        Expr::Not { operand } => Some(json!(!eval(operand, row)?.as_bool()?)),
        Expr::Arith { op, lhs, rhs } => {
            let (a, b) = (eval(lhs, row)?.as_i64()?, eval(rhs, row)?.as_i64()?);
            Some(json!(match op {
                ArithOp::Add => a + b,
                ArithOp::Sub => a - b,
                ArithOp::Mul => a * b,
                ArithOp::Div => panic!("division is not generated"),
            }))
        }
        Expr::Call { name, args } if name.eq_ignore_ascii_case("upper") => {
            Some(json!(eval(&args[0], row)?.as_str()?.to_uppercase()))
        }
        other => panic!("brute evaluator does not handle {other:?}"),
    }
}

fn aggregate(func: AggFn, arg: &AggArg, rows: &[Value]) -> Value {
    let vals: Vec<i64> = match arg {
        AggArg::Star => return json!(rows.len()),
        AggArg::Expr(e) => rows.iter().filter_map(|r| eval(e, r)?.as_i64()).collect(),
    };
    match func {
        AggFn::Count => json!(vals.len()),
        AggFn::Max => vals.iter().max().map_or(Value::Null, |m| json!(m)),
        AggFn::Min => vals.iter().min().map_or(Value::Null, |m| json!(m)),
    }
}

/// Output field name; unnamed items are numbered `$1`, `$2`, ... among
/// themselves.
fn name_of(e: &Expr, alias: Option<&str>, unnamed: &mut usize) -> String {
    match (alias, e) {
        (Some(a), _) => a.to_owned(),
        (None, Expr::Column { name }) => name.clone(),
        _ => {
            *unnamed += 1;
            format!("${unnamed}")
        }
    }
}

/// Evaluates a plan bottom-up over named datasets.
pub fn run(node: &PlanNode, data: &HashMap<String, Vec<Value>>) -> Vec<Value> {
    match node {
        PlanNode::Scan { dataset } => data[dataset.name()].clone(),
        PlanNode::Filter { input, predicate } => run(input.node(), data)
            .into_iter()
            .filter(|r| eval(predicate, r) == Some(json!(true)))
            .collect(),
        PlanNode::Project { input, items } => {
            let rows = run(input.node(), data);
            if items.iter().all(|i| matches!(i.expr, Expr::Aggregate { .. })) {
                let (mut out, mut unnamed) = (Map::new(), 0);
                for i in items {
                    let Expr::Aggregate { func, arg } = &i.expr else { unreachable!() };
                    out.insert(name_of(&i.expr, i.alias.as_deref(), &mut unnamed), aggregate(*func, arg, &rows));
                }
                return vec![Value::Object(out)];
            }
            rows.iter()
                .map(|r| {
                    let (mut out, mut unnamed) = (Map::new(), 0);
                    for i in items {
                        if let Expr::Wildcard = i.expr {
                            out.extend(r.as_object().unwrap().clone());
                        } else {
                            let v = eval(&i.expr, r).unwrap_or(Value::Null);
                            out.insert(name_of(&i.expr, i.alias.as_deref(), &mut unnamed), v);
                        }
                    }
                    Value::Object(out)
                })
                .collect()
        }
        PlanNode::ProjectValue { input, item } => run(input.node(), data)
            .iter()
            .map(|r| eval(item, r).unwrap_or(Value::Null))
            .collect(),
        PlanNode::Limit { input, count } => {
            let mut rows = run(input.node(), data);
            rows.truncate(*count as usize);
            rows
        }
        PlanNode::Sort { input, key, order } => {
            let mut rows = run(input.node(), data);
            rows.sort_by_key(|r| eval(key, r).and_then(|v| v.as_i64()));
            if *order == SortOrder::Desc {
                rows.reverse();
            }
            rows
        }
        PlanNode::GroupAgg {
            input,
            key,
            key_alias,
            aggs,
        } => {
            let mut groups: Vec<(Value, Vec<Value>)> = Vec::new();
            for r in run(input.node(), data) {
                let k = eval(key, &r).unwrap_or(Value::Null);
                match groups.iter_mut().find(|(g, _)| *g == k) {
                    Some((_, members)) => members.push(r),
                    None => groups.push((k, vec![r])),
                }
            }
            groups
                .into_iter()
                .map(|(k, members)| {
                    let mut out = Map::new();
                    out.insert(key_alias.clone(), k);
                    for a in aggs {
                        out.insert(a.alias.clone(), aggregate(a.func, &a.arg, &members));
                    }
                    Value::Object(out)
                })
                .collect()
        }
        PlanNode::Join {
            left,
            right,
            left_key,
            right_key,
            ..
        } => {
            let (ls, rs) = (run(left.node(), data), run(right.node(), data));
            let mut out = Vec::new();
            for l in &ls {
                for r in &rs {
                    if let (Some(a), Some(b)) = (eval(left_key, l), eval(right_key, r)) {
                        if a == b {
                            out.push(json!({"l": l, "r": r}));
                        }
                    }
                }
            }
            out
        }
        PlanNode::CountAll { input } => vec![json!(run(input.node(), data).len())],
    }
}
