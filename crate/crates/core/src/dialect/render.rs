//! Plan → query text.
//!
//! A plan is first flattened into nested SELECT blocks. Each operator is
//! folded into the current block when the clause it needs is still free and
//! evaluation order allows it; otherwise the block becomes a subquery
//! (`FROM (...) t`) and a new block starts on top of it.

use crate::ast::{
    AggArg, AggFn, Aggregation, ArithOp, BoolOp, CompareOp, DatasetRef, Expr, Literal,
    LogicalPlan, PlanNode, ProjectItem, SortOrder,
};

use super::{Dialect, DialectKind, RenderError};

pub(crate) const BINDING: &str = "t";
pub(crate) const LEFT_BINDING: &str = "l";
pub(crate) const RIGHT_BINDING: &str = "r";

pub(crate) struct Block<'a> {
    from: From<'a>,
    predicates: Vec<&'a Expr>,
    group: Option<(&'a Expr, &'a str, &'a [Aggregation])>,
    select: Select<'a>,
    order: Option<(&'a Expr, SortOrder)>,
    limit: Option<u64>,
}

enum From<'a> {
    Dataset(&'a DatasetRef),
    Subquery(Box<Block<'a>>),
    Join {
        left: Box<Block<'a>>,
        right: Box<Block<'a>>,
        left_key: &'a Expr,
        right_key: &'a Expr,
    },
}

enum Select<'a> {
    /// The whole row (`SELECT VALUE t`).
    Row,
    CountAll,
    Value(&'a Expr),
    Items(&'a [ProjectItem]),
    Grouped,
    Pairs,
}

impl<'a> Block<'a> {
    fn over(from: From<'a>) -> Self {
        Block {
            from,
            predicates: Vec::new(),
            group: None,
            select: Select::Row,
            order: None,
            limit: None,
        }
    }

    fn subquery(self) -> Self {
        Block::over(From::Subquery(Box::new(self)))
    }

    fn is_bare_scan(&self) -> bool {
        matches!(self.from, From::Dataset(_))
            && self.predicates.is_empty()
            && self.group.is_none()
            && matches!(self.select, Select::Row)
            && self.order.is_none()
            && self.limit.is_none()
    }

    fn row_select(&self) -> bool {
        matches!(self.select, Select::Row) && self.group.is_none() && self.limit.is_none()
    }

    /// Block into which a new operator may be folded, given whether the
    /// operator can coexist with an existing ORDER BY.
    fn open_for(self, keeps_order: bool) -> Self {
        if self.row_select() && (keeps_order || self.order.is_none()) {
            self
        } else {
            self.subquery()
        }
    }
}

pub(crate) fn build(plan: &LogicalPlan) -> Block<'_> {
    match plan.node() {
        PlanNode::Scan { dataset } => Block::over(From::Dataset(dataset)),
        PlanNode::Filter { input, predicate } => {
            let mut b = build(input).open_for(true);
            b.predicates.push(predicate);
            b
        }
        PlanNode::Project { input, items } => {
            let mut b = build(input).open_for(true);
            b.select = Select::Items(items);
            b
        }
        PlanNode::ProjectValue { input, item } => {
            let mut b = build(input).open_for(true);
            b.select = Select::Value(item);
            b
        }
        PlanNode::GroupAgg {
            input,
            key,
            key_alias,
            aggs,
        } => {
            let mut b = build(input).open_for(false);
            b.group = Some((key, key_alias, aggs));
            b.select = Select::Grouped;
            b
        }
        PlanNode::Sort { input, key, order } => {
            let mut b = build(input).open_for(false);
            b.order = Some((key, *order));
            b
        }
        PlanNode::Limit { input, count } => {
            let mut b = build(input);
            if b.limit.is_some() {
                b = b.subquery();
            }
            b.limit = Some(*count);
            b
        }
        PlanNode::CountAll { input } => {
            let mut b = build(input).open_for(false);
            b.select = Select::CountAll;
            b
        }
        PlanNode::Join {
            left,
            right,
            left_key,
            right_key,
            ..
        } => {
            let mut b = Block::over(From::Join {
                left: Box::new(build(left)),
                right: Box::new(build(right)),
                left_key,
                right_key,
            });
            b.select = Select::Pairs;
            b
        }
    }
}

pub(crate) fn render_statement(dialect: &Dialect, plan: &LogicalPlan) -> Result<String, RenderError> {
    let mut out = String::new();
    render_plan_into(dialect, plan, &mut out)?;
    out.push(';');
    Ok(out)
}

/// Renders a plan without the statement terminator.
pub(crate) fn render_plan_into(
    dialect: &Dialect,
    plan: &LogicalPlan,
    out: &mut String,
) -> Result<(), RenderError> {
    for name in plan.expressions().into_iter().flat_map(Expr::function_names) {
        dialect.resolve_function(name)?;
    }
    let block = build(plan);
    Renderer { dialect }.block(&block, out)
}

struct Renderer<'d> {
    dialect: &'d Dialect,
}

impl Renderer<'_> {
    fn sqlpp(&self) -> bool {
        self.dialect.kind() == DialectKind::SqlPlusPlus
    }

    fn block(&self, b: &Block<'_>, out: &mut String) -> Result<(), RenderError> {
        out.push_str("SELECT ");
        self.select(b, out)?;
        out.push_str(" FROM ");
        let omit_binding = matches!(b.select, Select::CountAll)
            && matches!(b.from, From::Dataset(_))
            && b.predicates.is_empty();
        match &b.from {
            From::Dataset(d) => {
                self.dataset(d, out);
                if !omit_binding {
                    out.push(' ');
                    out.push_str(BINDING);
                }
            }
            From::Subquery(inner) => {
                out.push('(');
                self.block(inner, out)?;
                out.push_str(") ");
                out.push_str(BINDING);
            }
            From::Join {
                left,
                right,
                left_key,
                right_key,
            } => {
                self.join_side(left, LEFT_BINDING, out)?;
                out.push_str(" JOIN ");
                self.join_side(right, RIGHT_BINDING, out)?;
                out.push_str(" ON ");
                self.operand(left_key, LEFT_BINDING, Prec::Additive, out)?;
                out.push_str(" = ");
                self.operand(right_key, RIGHT_BINDING, Prec::Additive, out)?;
            }
        }
        if let Some((first, rest)) = b.predicates.split_first() {
            out.push_str(" WHERE ");
            if rest.is_empty() {
                self.expr(first, BINDING, out)?;
            } else {
                self.operand(first, BINDING, Prec::And, out)?;
                for p in rest {
                    out.push_str(" AND ");
                    self.operand(p, BINDING, Prec::Not, out)?;
                }
            }
        }
        if let Some((key, alias, _)) = b.group {
            out.push_str(" GROUP BY ");
            self.expr(key, BINDING, out)?;
            if self.sqlpp() {
                out.push_str(" AS ");
                self.dialect.quote_ident(alias, out);
            }
        }
        if let Some((key, order)) = b.order {
            out.push_str(" ORDER BY ");
            self.expr(key, BINDING, out)?;
            out.push_str(match order {
                SortOrder::Asc => " ASC",
                SortOrder::Desc => " DESC",
            });
        }
        if let Some(n) = b.limit {
            out.push_str(" LIMIT ");
            out.push_str(&n.to_string());
        }
        Ok(())
    }

    fn join_side(&self, side: &Block<'_>, binding: &str, out: &mut String) -> Result<(), RenderError> {
        match &side.from {
            From::Dataset(d) if side.is_bare_scan() => self.dataset(d, out),
            _ => {
                out.push('(');
                self.block(side, out)?;
                out.push(')');
            }
        }
        out.push(' ');
        out.push_str(binding);
        Ok(())
    }

    fn dataset(&self, d: &DatasetRef, out: &mut String) {
        if let Some(dv) = d.dataverse() {
            self.dialect.quote_ident(dv, out);
            out.push('.');
        }
        self.dialect.quote_ident(d.name(), out);
    }

    fn select(&self, b: &Block<'_>, out: &mut String) -> Result<(), RenderError> {
        let value = if self.sqlpp() { "VALUE " } else { "" };
        match b.select {
            Select::Row => {
                out.push_str(value);
                out.push_str(BINDING);
                if !self.sqlpp() {
                    out.push_str(".*");
                }
            }
            Select::CountAll => {
                out.push_str(value);
                out.push_str("COUNT(*)");
            }
            Select::Value(e) => {
                out.push_str(value);
                self.expr(e, BINDING, out)?;
            }
            Select::Items(items) => {
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    self.expr(&item.expr, BINDING, out)?;
                    if let Some(alias) = &item.alias {
                        out.push_str(" AS ");
                        self.dialect.quote_ident(alias, out);
                    }
                }
            }
            Select::Grouped => {
                let (key, alias, aggs) = b.group.expect("grouped select without group");
                if self.sqlpp() {
                    self.dialect.quote_ident(alias, out);
                } else {
                    self.expr(key, BINDING, out)?;
                    out.push_str(" AS ");
                    self.dialect.quote_ident(alias, out);
                }
                for agg in aggs {
                    out.push_str(", ");
                    self.aggregate(agg.func, &agg.arg, BINDING, out)?;
                    out.push_str(" AS ");
                    self.dialect.quote_ident(&agg.alias, out);
                }
            }
            Select::Pairs => {
                if self.sqlpp() {
                    out.push_str("l,r");
                } else {
                    out.push_str("l.*, r.*");
                }
            }
        }
        Ok(())
    }

    fn aggregate(&self, func: AggFn, arg: &AggArg, binding: &str, out: &mut String) -> Result<(), RenderError> {
        out.push_str(agg_keyword(func));
        out.push('(');
        match arg {
            AggArg::Star => out.push('*'),
            AggArg::Expr(e) => self.expr(e, binding, out)?,
        }
        out.push(')');
        Ok(())
    }

    /// Renders `e`, parenthesized when it binds looser than `context`.
    fn operand(&self, e: &Expr, binding: &str, context: Prec, out: &mut String) -> Result<(), RenderError> {
        if prec(e) < context {
            out.push('(');
            self.expr(e, binding, out)?;
            out.push(')');
            Ok(())
        } else {
            self.expr(e, binding, out)
        }
    }

    /// Iterative expression rendering; stack use is independent of depth.
    fn expr(&self, root: &Expr, binding: &str, out: &mut String) -> Result<(), RenderError> {
        enum Work<'e> {
            Node(&'e Expr),
            Text(&'static str),
        }
        let mut stack = vec![Work::Node(root)];
        while let Some(work) = stack.pop() {
            let e = match work {
                Work::Text(s) => {
                    out.push_str(s);
                    continue;
                }
                Work::Node(e) => e,
            };
            match e {
                Expr::Column { name } => {
                    out.push_str(binding);
                    out.push('.');
                    self.dialect.quote_ident(name, out);
                }
                Expr::Literal { value } => self.literal(value, out),
                Expr::Wildcard => {
                    out.push_str(binding);
                    out.push_str(".*");
                }
                Expr::Not { operand } => {
                    out.push_str("NOT (");
                    stack.push(Work::Text(")"));
                    stack.push(Work::Node(operand));
                }
                Expr::Compare { op, lhs, rhs } => {
                    let p = Prec::Compare;
                    // Comparisons do not chain: both sides need parentheses
                    // unless they bind tighter.
                    push_binary(&mut stack, lhs, rhs, compare_symbol(*op, self.sqlpp()), prec(lhs) <= p, prec(rhs) <= p);
                }
                Expr::Bool { op, lhs, rhs } => {
                    let (p, sym) = match op {
                        BoolOp::And => (Prec::And, " AND "),
                        BoolOp::Or => (Prec::Or, " OR "),
                    };
                    push_binary(&mut stack, lhs, rhs, sym, prec(lhs) < p, prec(rhs) <= p);
                }
                Expr::Arith { op, lhs, rhs } => {
                    let p = prec(e);
                    let sym = match op {
                        ArithOp::Add => " + ",
                        ArithOp::Sub => " - ",
                        ArithOp::Mul => " * ",
                        ArithOp::Div => " / ",
                    };
                    push_binary(&mut stack, lhs, rhs, sym, prec(lhs) < p, prec(rhs) <= p);
                }
                Expr::Call { name, args } => {
                    out.push_str(self.dialect.resolve_function(name)?);
                    out.push('(');
                    stack.push(Work::Text(")"));
                    for (i, arg) in args.iter().enumerate().rev() {
                        stack.push(Work::Node(arg));
                        if i > 0 {
                            stack.push(Work::Text(", "));
                        }
                    }
                }
                Expr::Aggregate { func, arg } => {
                    out.push_str(agg_keyword(*func));
                    out.push('(');
                    stack.push(Work::Text(")"));
                    match arg {
                        AggArg::Star => stack.push(Work::Text("*")),
                        AggArg::Expr(inner) => stack.push(Work::Node(inner)),
                    }
                }
            }
        }
        return Ok(());

        fn push_binary<'e>(
            stack: &mut Vec<Work<'e>>,
            lhs: &'e Expr,
            rhs: &'e Expr,
            sym: &'static str,
            paren_lhs: bool,
            paren_rhs: bool,
        ) {
            if paren_rhs {
                stack.push(Work::Text(")"));
            }
            stack.push(Work::Node(rhs));
            if paren_rhs {
                stack.push(Work::Text("("));
            }
            stack.push(Work::Text(sym));
            if paren_lhs {
                stack.push(Work::Text(")"));
            }
            stack.push(Work::Node(lhs));
            if paren_lhs {
                stack.push(Work::Text("("));
            }
        }
    }

    fn literal(&self, value: &Literal, out: &mut String) {
        match value {
            Literal::Int(v) => out.push_str(&v.to_string()),
            Literal::Bool(v) => out.push_str(match (v, self.sqlpp()) {
                (true, true) => "true",
                (false, true) => "false",
                (true, false) => "TRUE",
                (false, false) => "FALSE",
            }),
            Literal::Str(s) => {
                out.push('\'');
                for c in s.chars() {
                    if c == '\'' {
                        out.push('\'');
                    }
                    out.push(c);
                }
                out.push('\'');
            }
        }
    }
}

/// Binding strength, loosest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) enum Prec {
    Or,
    And,
    Not,
    Compare,
    Additive,
    Multiplicative,
    Primary,
}

pub(crate) fn prec(e: &Expr) -> Prec {
    match e {
        Expr::Bool { op: BoolOp::Or, .. } => Prec::Or,
        Expr::Bool { op: BoolOp::And, .. } => Prec::And,
        Expr::Not { .. } => Prec::Not,
        Expr::Compare { .. } => Prec::Compare,
        Expr::Arith {
            op: ArithOp::Add | ArithOp::Sub,
            ..
        } => Prec::Additive,
        Expr::Arith { .. } => Prec::Multiplicative,
        _ => Prec::Primary,
    }
}

fn compare_symbol(op: CompareOp, sqlpp: bool) -> &'static str {
    match op {
        CompareOp::Eq => " = ",
        CompareOp::Ne if sqlpp => " != ",
        CompareOp::Ne => " <> ",
        CompareOp::Lt => " < ",
        CompareOp::Le => " <= ",
        CompareOp::Gt => " > ",
        CompareOp::Ge => " >= ",
    }
}

fn agg_keyword(func: AggFn) -> &'static str {
    match func {
        AggFn::Count => "COUNT",
        AggFn::Max => "MAX",
        AggFn::Min => "MIN",
    }
}
