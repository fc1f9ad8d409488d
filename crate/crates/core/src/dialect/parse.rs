//! Parser for the SQL++ subset this crate renders.
//!
//! The in-memory oracle server receives statement text over HTTP, exactly as
//! a real query service would. This module turns that text back into a
//! [`Statement`]: a shape-checked [`LogicalPlan`] or a [`DdlRequest`]. It
//! accepts everything `Dialect::sqlpp()` emits (plus free whitespace and
//! keyword case); it is not a general SQL++ parser.

use std::collections::BTreeMap;

use serde_json::Value;
use thiserror::Error;

use crate::ast::{
    AggArg, AggFn, Aggregation, ArithOp, CompareOp, DatasetRef, Expr, JoinKind, Literal,
    LogicalPlan, ProjectItem, ShapeError, SortOrder,
};

use super::{DdlRequest, FieldDecl, FieldType};

/// A parsed statement.
#[derive(Debug, Clone, PartialEq)]
pub enum Statement {
    Query(LogicalPlan),
    Ddl(DdlRequest),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("statement is not a valid plan: {0}")]
    Shape(#[from] ShapeError),
}

pub fn parse_statement(text: &str) -> Result<Statement, ParseError> {
    let tokens = lex(text)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        end: text.len(),
    };
    let stmt = p.statement()?;
    p.eat(&Tok::Semi);
    if let Some(t) = p.tokens.get(p.pos) {
        return Err(p.error_at(t.offset, format!("unexpected {:?} after statement", t.tok)));
    }
    Ok(stmt)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Quoted(String),
    Int(String),
    Str(String),
    JsonStr(String),
    Sym(&'static str),
    Semi,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    offset: usize,
}

const SYMBOLS: &[&str] = &[
    "!=", "<>", "<=", ">=", "(", ")", ",", ".", "*", "=", "<", ">", "+", "-", "/", "{", "}", ":",
    "[", "]",
];

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |offset, message: &str| ParseError::Syntax {
        offset,
        message: message.to_owned(),
    };
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let tok = if c.is_ascii_alphabetic() || c == b'_' || c == b'$' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'$') {
                i += 1;
            }
            Tok::Ident(text[start..i].to_owned())
        } else if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            Tok::Int(text[start..i].to_owned())
        } else if c == b'\'' || c == b'`' {
            let q = c;
            let mut s = String::new();
            i += 1;
            loop {
                match text[i..].chars().next() {
                    None => return Err(err(start, "unterminated quoted text")),
                    Some(ch) if ch as u32 == q as u32 => {
                        if bytes.get(i + 1) == Some(&q) {
                            s.push(ch);
                            i += 2;
                        } else {
                            i += 1;
                            break;
                        }
                    }
                    Some(ch) => {
                        s.push(ch);
                        i += ch.len_utf8();
                    }
                }
            }
            if q == b'\'' {
                Tok::Str(s)
            } else {
                Tok::Quoted(s)
            }
        } else if c == b'"' {
            i += 1;
            while i < bytes.len() && bytes[i] != b'"' {
                if bytes[i] == b'\\' {
                    i += 1;
                }
                i += 1;
            }
            if i >= bytes.len() {
                return Err(err(start, "unterminated string"));
            }
            i += 1;
            let s: String = serde_json::from_str(&text[start..i])
                .map_err(|e| err(start, &format!("bad string literal: {e}")))?;
            Tok::JsonStr(s)
        } else if c == b';' {
            i += 1;
            Tok::Semi
        } else if let Some(sym) = SYMBOLS.iter().find(|s| text[i..].starts_with(**s)) {
            i += sym.len();
            Tok::Sym(sym)
        } else {
            return Err(err(start, &format!("unexpected character {:?}", text[i..].chars().next().unwrap_or(' '))));
        };
        out.push(Token { tok, offset: start });
    }
    Ok(out)
}

const CLAUSE_KEYWORDS: &[&str] = &[
    "where", "group", "order", "limit", "join", "on", "inner", "as", "from", "select", "and",
    "or", "not", "asc", "desc", "by", "value", "with", "primary",
];

fn is_clause_keyword(s: &str) -> bool {
    CLAUSE_KEYWORDS.iter().any(|k| k.eq_ignore_ascii_case(s))
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end: usize,
}

enum SelectClause {
    /// `SELECT VALUE <var>` – the whole row.
    Row,
    Value(Expr),
    Items(Vec<SelectItem>),
}

enum SelectItem {
    Expr(Expr, Option<String>),
    Bare(String),
}

enum FromTerm {
    Dataset(DatasetRef, String),
    Subquery(Box<Query>, String),
}

enum FromClause {
    Single(FromTerm),
    Join {
        left: FromTerm,
        right: FromTerm,
        left_key: Expr,
        right_key: Expr,
    },
}

struct Query {
    select: SelectClause,
    from: FromClause,
    predicate: Option<Expr>,
    group: Option<(Expr, String)>,
    order: Option<(Expr, SortOrder)>,
    limit: Option<u64>,
}

impl Parser {
    fn error_at(&self, offset: usize, message: String) -> ParseError {
        ParseError::Syntax { offset, message }
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        let offset = self.tokens.get(self.pos).map_or(self.end, |t| t.offset);
        self.error_at(offset, message.into())
    }

    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn peek_at(&self, ahead: usize) -> Option<&Tok> {
        self.tokens.get(self.pos + ahead).map(|t| &t.tok)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.pos)?.tok.clone();
        self.pos += 1;
        Some(t)
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_sym(&mut self, sym: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Sym(s)) if *s == sym) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, sym: &str) -> Result<(), ParseError> {
        if self.eat_sym(sym) {
            Ok(())
        } else {
            Err(self.error(format!("expected {sym:?}")))
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s.eq_ignore_ascii_case(kw))
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.at_keyword(kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            Err(self.error(format!("expected {}", kw.to_ascii_uppercase())))
        }
    }

    fn identifier(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) if !is_clause_keyword(s) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            Some(Tok::Quoted(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.error("expected identifier")),
        }
    }

    fn dataset_name(&mut self) -> Result<DatasetRef, ParseError> {
        let first = self.identifier()?;
        if self.eat_sym(".") {
            let second = self.identifier()?;
            Ok(DatasetRef::new(&first, &second)?)
        } else {
            Ok(DatasetRef::unqualified(&first)?)
        }
    }

    fn statement(&mut self) -> Result<Statement, ParseError> {
        if self.at_keyword("select") {
            let q = self.query()?;
            return Ok(Statement::Query(q.into_plan()?));
        }
        if self.eat_keyword("insert") {
            self.expect_keyword("into")?;
            let target = self.dataset_name()?;
            let q = self.query()?;
            return Ok(Statement::Ddl(DdlRequest::Persist {
                source: q.into_plan()?,
                target,
            }));
        }
        if self.eat_keyword("create") {
            return self.create().map(Statement::Ddl);
        }
        if self.eat_keyword("load") {
            self.expect_keyword("dataset")?;
            let dataset = self.dataset_name()?;
            self.expect_keyword("using")?;
            self.expect_keyword("localfs")?;
            self.expect_sym("(")?;
            let mut params = BTreeMap::new();
            loop {
                self.expect_sym("(")?;
                let key = self.json_string()?;
                self.expect_sym("=")?;
                let value = self.json_string()?;
                self.expect_sym(")")?;
                params.insert(key, value);
                if !self.eat_sym(",") {
                    break;
                }
            }
            self.expect_sym(")")?;
            let path = params
                .remove("path")
                .ok_or_else(|| self.error("LOAD DATASET needs a \"path\" parameter"))?;
            let format = params
                .remove("format")
                .ok_or_else(|| self.error("LOAD DATASET needs a \"format\" parameter"))?;
            return Ok(Statement::Ddl(DdlRequest::LoadDataset {
                dataset,
                path,
                format,
            }));
        }
        Err(self.error("expected SELECT, INSERT, CREATE or LOAD"))
    }

    fn json_string(&mut self) -> Result<String, ParseError> {
        match self.bump() {
            Some(Tok::JsonStr(s)) => Ok(s),
            _ => {
                self.pos -= 1;
                Err(self.error("expected double-quoted string"))
            }
        }
    }

    fn create(&mut self) -> Result<DdlRequest, ParseError> {
        if self.eat_keyword("type") {
            let name = self.identifier()?;
            self.expect_keyword("as")?;
            let open = if self.eat_keyword("closed") {
                false
            } else {
                self.eat_keyword("open");
                true
            };
            self.expect_sym("{")?;
            let mut fields = Vec::new();
            if !self.eat_sym("}") {
                loop {
                    let fname = self.identifier()?;
                    self.expect_sym(":")?;
                    let tname = self.identifier()?;
                    let ty = FieldType::from_sqlpp_name(&tname)
                        .ok_or_else(|| self.error(format!("unknown field type {tname:?}")))?;
                    fields.push(FieldDecl::new(fname, ty));
                    if !self.eat_sym(",") {
                        break;
                    }
                }
                self.expect_sym("}")?;
            }
            return Ok(DdlRequest::CreateType { name, fields, open });
        }
        if self.eat_keyword("dataset") {
            let dataset = self.dataset_name()?;
            self.expect_sym("(")?;
            let type_name = self.identifier()?;
            self.expect_sym(")")?;
            self.expect_keyword("primary")?;
            self.expect_keyword("key")?;
            let primary_key = self.identifier()?;
            let mut storage_options = BTreeMap::new();
            if self.eat_keyword("with") {
                match self.json()? {
                    Value::Object(map) => storage_options.extend(map),
                    _ => return Err(self.error("WITH expects an object")),
                }
            }
            return Ok(DdlRequest::CreateDataset {
                dataset,
                type_name,
                primary_key,
                storage_options,
            });
        }
        let primary = self.eat_keyword("primary");
        self.expect_keyword("index")?;
        let name = if self.at_keyword("on") {
            None
        } else {
            Some(self.identifier()?)
        };
        self.expect_keyword("on")?;
        let dataset = self.dataset_name()?;
        let field = if self.eat_sym("(") {
            let f = self.identifier()?;
            self.expect_sym(")")?;
            Some(f)
        } else {
            None
        };
        if !primary && (name.is_none() || field.is_none()) {
            return Err(self.error("secondary index needs a name and a field"));
        }
        Ok(DdlRequest::CreateIndex {
            name,
            dataset,
            field,
            primary,
        })
    }

    fn json(&mut self) -> Result<Value, ParseError> {
        if self.eat_sym("{") {
            let mut map = serde_json::Map::new();
            if !self.eat_sym("}") {
                loop {
                    let k = self.json_string()?;
                    self.expect_sym(":")?;
                    let v = self.json()?;
                    map.insert(k, v);
                    if !self.eat_sym(",") {
                        break;
                    }
                }
                self.expect_sym("}")?;
            }
            return Ok(Value::Object(map));
        }
        if self.eat_sym("[") {
            let mut items = Vec::new();
            if !self.eat_sym("]") {
                loop {
                    items.push(self.json()?);
                    if !self.eat_sym(",") {
                        break;
                    }
                }
                self.expect_sym("]")?;
            }
            return Ok(Value::Array(items));
        }
        let negative = self.eat_sym("-");
        match self.bump() {
            Some(Tok::JsonStr(s)) if !negative => Ok(Value::String(s)),
            Some(Tok::Int(digits)) => Ok(Value::from(int_value(&digits, negative).map_err(|m| self.error(m))?)),
            Some(Tok::Ident(s)) if !negative && s == "true" => Ok(Value::Bool(true)),
            Some(Tok::Ident(s)) if !negative && s == "false" => Ok(Value::Bool(false)),
            Some(Tok::Ident(s)) if !negative && s == "null" => Ok(Value::Null),
            _ => {
                self.pos -= 1;
                Err(self.error("expected JSON value"))
            }
        }
    }

    fn query(&mut self) -> Result<Query, ParseError> {
        self.expect_keyword("select")?;
        let select = if self.eat_keyword("value") {
            if matches!(self.peek(), Some(Tok::Ident(_)))
                && !matches!(self.peek_at(1), Some(Tok::Sym(".")) | Some(Tok::Sym("(")))
                && !self.at_keyword("not")
            {
                let var = self.identifier()?;
                if !matches!(var.to_ascii_lowercase().as_str(), "true" | "false") {
                    SelectClause::Row
                } else {
                    self.pos -= 1;
                    SelectClause::Value(self.expr()?)
                }
            } else {
                SelectClause::Value(self.expr()?)
            }
        } else {
            let mut items = Vec::new();
            loop {
                let bare = matches!(self.peek(), Some(Tok::Ident(s)) if !is_clause_keyword(s))
                    && matches!(self.peek_at(1), Some(Tok::Sym(",")) | Some(Tok::Ident(_)))
                    && !matches!(self.peek_at(1), Some(Tok::Ident(s)) if s.eq_ignore_ascii_case("as"));
                if bare {
                    items.push(SelectItem::Bare(self.identifier()?));
                } else {
                    let e = self.expr()?;
                    let alias = if self.eat_keyword("as") {
                        Some(self.identifier()?)
                    } else {
                        None
                    };
                    items.push(SelectItem::Expr(e, alias));
                }
                if !self.eat_sym(",") {
                    break;
                }
            }
            SelectClause::Items(items)
        };
        self.expect_keyword("from")?;
        let first = self.parse_from_term()?;
        let from = if self.eat_keyword("join") || (self.eat_keyword("inner") && self.eat_keyword("join")) {
            let right = self.parse_from_term()?;
            self.expect_keyword("on")?;
            let (left_alias, right_alias) = (first.alias().to_owned(), right.alias().to_owned());
            let (a, a_vars) = self.tracked_operand()?;
            self.expect_sym("=")?;
            let (b, b_vars) = self.tracked_operand()?;
            let (left_key, right_key) = if a_vars.iter().all(|v| *v == left_alias)
                && b_vars.iter().all(|v| *v == right_alias)
            {
                (a, b)
            } else if a_vars.iter().all(|v| *v == right_alias)
                && b_vars.iter().all(|v| *v == left_alias)
            {
                (b, a)
            } else {
                return Err(self.error("join condition must compare one key from each side"));
            };
            FromClause::Join {
                left: first,
                right,
                left_key,
                right_key,
            }
        } else {
            FromClause::Single(first)
        };
        let predicate = if self.eat_keyword("where") {
            Some(self.expr()?)
        } else {
            None
        };
        let group = if self.eat_keyword("group") {
            self.expect_keyword("by")?;
            let key = self.expr()?;
            let alias = if self.eat_keyword("as") {
                self.identifier()?
            } else {
                return Err(self.error("GROUP BY key needs an alias"));
            };
            Some((key, alias))
        } else {
            None
        };
        let order = if self.eat_keyword("order") {
            self.expect_keyword("by")?;
            let key = self.expr()?;
            let dir = if self.eat_keyword("desc") {
                SortOrder::Desc
            } else {
                self.eat_keyword("asc");
                SortOrder::Asc
            };
            Some((key, dir))
        } else {
            None
        };
        let limit = if self.eat_keyword("limit") {
            match self.bump() {
                Some(Tok::Int(d)) => Some(d.parse::<u64>().map_err(|e| self.error(format!("bad limit: {e}")))?),
                _ => return Err(self.error("LIMIT expects an integer")),
            }
        } else {
            None
        };
        Ok(Query {
            select,
            from,
            predicate,
            group,
            order,
            limit,
        })
    }

    fn parse_from_term(&mut self) -> Result<FromTerm, ParseError> {
        if self.eat_sym("(") {
            let q = self.query()?;
            self.expect_sym(")")?;
            self.eat_keyword("as");
            let alias = self.identifier()?;
            return Ok(FromTerm::Subquery(Box::new(q), alias));
        }
        let ds = self.dataset_name()?;
        self.eat_keyword("as");
        let alias = match self.peek() {
            Some(Tok::Ident(s)) if !is_clause_keyword(s) => self.identifier()?,
            _ => "t".to_owned(),
        };
        Ok(FromTerm::Dataset(ds, alias))
    }

    /// Parses an additive expression and reports the variables it uses.
    fn tracked_operand(&mut self) -> Result<(Expr, Vec<String>), ParseError> {
        let start = self.pos;
        let e = self.additive()?;
        let mut vars = Vec::new();
        for i in start..self.pos {
            if let (Tok::Ident(v), Some(Tok::Sym("."))) =
                (&self.tokens[i].tok, self.tokens.get(i + 1).map(|t| &t.tok))
            {
                vars.push(v.clone());
            }
        }
        Ok((e, vars))
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.conjunction()?;
        while self.eat_keyword("or") {
            let rhs = self.conjunction()?;
            lhs = lhs.or(rhs);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.negation()?;
        while self.eat_keyword("and") {
            let rhs = self.negation()?;
            lhs = lhs.and(rhs);
        }
        Ok(lhs)
    }

    fn negation(&mut self) -> Result<Expr, ParseError> {
        // Iterative so long NOT chains do not recurse.
        let mut nots = 0usize;
        while self.eat_keyword("not") {
            nots += 1;
        }
        let mut e = self.comparison()?;
        for _ in 0..nots {
            e = e.not();
        }
        Ok(e)
    }

    fn comparison(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.additive()?;
        let op = match self.peek() {
            Some(Tok::Sym("=")) => CompareOp::Eq,
            Some(Tok::Sym("!=")) | Some(Tok::Sym("<>")) => CompareOp::Ne,
            Some(Tok::Sym("<")) => CompareOp::Lt,
            Some(Tok::Sym("<=")) => CompareOp::Le,
            Some(Tok::Sym(">")) => CompareOp::Gt,
            Some(Tok::Sym(">=")) => CompareOp::Ge,
            _ => return Ok(lhs),
        };
        self.pos += 1;
        let rhs = self.additive()?;
        Ok(Expr::compare(op, lhs, rhs))
    }

    fn additive(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.multiplicative()?;
        loop {
            let op = if self.eat_sym("+") {
                ArithOp::Add
            } else if self.eat_sym("-") {
                ArithOp::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.multiplicative()?;
            lhs = Expr::arith(op, lhs, rhs);
        }
    }

    fn multiplicative(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.primary()?;
        loop {
            let op = if self.eat_sym("*") {
                ArithOp::Mul
            } else if self.eat_sym("/") {
                ArithOp::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.primary()?;
            lhs = Expr::arith(op, lhs, rhs);
        }
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        if self.eat_sym("-") {
            return match self.bump() {
                Some(Tok::Int(d)) => Ok(Expr::lit(int_value(&d, true).map_err(|m| self.error(m))?)),
                _ => Err(self.error("expected integer after unary minus")),
            };
        }
        if self.eat_sym("(") {
            let e = self.expr()?;
            self.expect_sym(")")?;
            return Ok(e);
        }
        match self.bump() {
            Some(Tok::Int(d)) => Ok(Expr::lit(int_value(&d, false).map_err(|m| self.error(m))?)),
            Some(Tok::Str(s)) => Ok(Expr::Literal {
                value: Literal::Str(s),
            }),
            Some(Tok::Ident(name)) => {
                let lower = name.to_ascii_lowercase();
                if lower == "true" || lower == "false" {
                    return Ok(Expr::lit(lower == "true"));
                }
                if self.eat_sym("(") {
                    return self.call(name);
                }
                if self.eat_sym(".") {
                    if self.eat_sym("*") {
                        return Ok(Expr::Wildcard);
                    }
                    let field = self.identifier()?;
                    return Ok(Expr::col(field));
                }
                self.pos -= 1;
                Err(self.error(format!("unbound name {name:?}")))
            }
            Some(Tok::Quoted(name)) => {
                self.pos -= 1;
                Err(self.error(format!("unbound name {name:?}")))
            }
            _ => {
                self.pos = self.pos.saturating_sub(1);
                Err(self.error("expected expression"))
            }
        }
    }

    fn call(&mut self, name: String) -> Result<Expr, ParseError> {
        if let Some(func) = AggFn::from_name(&name) {
            let arg = if self.eat_sym("*") {
                AggArg::Star
            } else {
                AggArg::Expr(Box::new(self.expr()?))
            };
            self.expect_sym(")")?;
            return Ok(Expr::Aggregate { func, arg });
        }
        let mut args = Vec::new();
        if !self.eat_sym(")") {
            loop {
                args.push(self.expr()?);
                if !self.eat_sym(",") {
                    break;
                }
            }
            self.expect_sym(")")?;
        }
        Ok(Expr::call(name, args))
    }
}

fn int_value(digits: &str, negative: bool) -> Result<i64, String> {
    let text = if negative {
        format!("-{digits}")
    } else {
        digits.to_owned()
    };
    text.parse::<i64>().map_err(|e| format!("integer {text} out of range: {e}"))
}

impl FromTerm {
    fn alias(&self) -> &str {
        match self {
            FromTerm::Dataset(_, a) | FromTerm::Subquery(_, a) => a,
        }
    }

    fn into_plan(self) -> Result<LogicalPlan, ParseError> {
        match self {
            FromTerm::Dataset(ds, _) => Ok(LogicalPlan::scan_dataset(ds)),
            FromTerm::Subquery(q, _) => q.into_plan(),
        }
    }
}

impl Query {
    /// Rebuilds the plan in block evaluation order:
    /// from → where → order → select → limit.
    fn into_plan(self) -> Result<LogicalPlan, ParseError> {
        let syntax = |m: &str| ParseError::Syntax {
            offset: 0,
            message: m.to_owned(),
        };
        let joined = matches!(self.from, FromClause::Join { .. });
        let mut plan = match self.from {
            FromClause::Single(term) => term.into_plan()?,
            FromClause::Join {
                left,
                right,
                left_key,
                right_key,
            } => {
                let l = left.into_plan()?;
                let r = right.into_plan()?;
                l.join(&r, left_key, right_key, JoinKind::Inner)?
            }
        };
        if let Some(p) = self.predicate {
            plan = plan.filter(p)?;
        }
        if let Some((key, order)) = self.order {
            plan = plan.sort(key, order)?;
        }
        match (self.select, self.group) {
            (SelectClause::Items(items), Some((key, alias))) => {
                let mut items = items.into_iter();
                match items.next() {
                    Some(SelectItem::Bare(name)) if name == alias => {}
                    _ => return Err(syntax("grouped SELECT must start with the group key alias")),
                }
                let mut aggs = Vec::new();
                for item in items {
                    match item {
                        SelectItem::Expr(Expr::Aggregate { func, ref arg }, Some(agg_alias)) => aggs.push(Aggregation {
                            func,
                            arg: arg.clone(),
                            alias: agg_alias,
                        }),
                        _ => return Err(syntax("grouped SELECT items must be aliased aggregates")),
                    }
                }
                plan = plan.group_agg(key, alias, aggs)?;
            }
            (_, Some(_)) => return Err(syntax("GROUP BY needs a SELECT list")),
            (SelectClause::Row, None) => {}
            (SelectClause::Value(Expr::Aggregate {
                func: AggFn::Count,
                arg: AggArg::Star,
            }), None) => {
                plan = plan.count_all()?;
            }
            (SelectClause::Value(e), None) => plan = plan.project_value(e)?,
            (SelectClause::Items(items), None) => {
                let pair = items.len() == 2
                    && items.iter().all(|i| matches!(i, SelectItem::Bare(_)));
                if joined {
                    if !pair {
                        return Err(syntax("a join must select its two bindings"));
                    }
                } else {
                    let mut out = Vec::with_capacity(items.len());
                    for item in items {
                        match item {
                            SelectItem::Expr(e, alias) => out.push(ProjectItem { expr: e, alias }),
                            SelectItem::Bare(name) => {
                                return Err(syntax(&format!("unbound name {name:?} in SELECT")))
                            }
                        }
                    }
                    plan = plan.project(out)?;
                }
            }
        }
        if let Some(n) = self.limit {
            plan = plan.limit(n)?;
        }
        Ok(plan)
    }
}
