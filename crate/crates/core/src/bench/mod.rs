//! The twelve-expression DataFrame benchmark: expression catalogue,
//! predicate draws, the timing loop and report output.

mod report;
mod timing;

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::ast::{AggFn, LogicalPlan};
use crate::frame::{Frame, FrameError, Session, DEFAULT_HEAD};

pub use report::{checksum, emit_report, mean_after_warmup, write_report, ReportFormat};
pub use timing::{
    run_bench, time_expression, BenchConfig, BenchReport, Clock, ExpressionReport, MonotonicClock,
    RunRecord, ScriptedClock, TimingMode,
};

pub const EXPRESSION_COUNT: u8 = 12;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("unknown expression id {0} (expected 1..=12)")]
    UnknownExpression(u8),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Dataset names the expressions read.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchDatasets {
    /// Used by expressions 1–11.
    pub main: String,
    /// Left and right inputs of the join in expression 12.
    pub left: String,
    pub right: String,
}

impl Default for BenchDatasets {
    fn default() -> Self {
        Self {
            main: "Data".into(),
            left: "leftData".into(),
            right: "rightData".into(),
        }
    }
}

/// Freshly opened frames for one run.
#[derive(Debug, Clone)]
pub struct BenchFrames {
    pub main: Frame,
    pub left: Frame,
    pub right: Frame,
}

impl BenchFrames {
    pub fn open(session: &Session, datasets: &BenchDatasets) -> Result<Self, FrameError> {
        Ok(Self {
            main: session.open(&datasets.main)?,
            left: session.open(&datasets.left)?,
            right: session.open(&datasets.right)?,
        })
    }
}

/// Named predicate literal, e.g. `x = 4`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Predicate {
    pub name: String,
    pub value: i64,
}

/// `x=4;y=2;z=0`.
pub fn format_predicates(p: &[Predicate]) -> String {
    p.iter()
        .map(|p| format!("{}={}", p.name, p.value))
        .collect::<Vec<_>>()
        .join(";")
}

/// Attribute and inclusive value range behind each predicate placeholder.
pub fn predicate_ranges(id: u8) -> Result<&'static [(&'static str, &'static str, i64, i64)], BenchError> {
    Ok(match id {
        3 => &[("x", "ten", 0, 9), ("y", "twentyPercent", 0, 4), ("z", "two", 0, 1)],
        10 => &[("x", "ten", 0, 9)],
        11 => &[("x", "onePercent", 0, 99), ("y", "onePercent", 0, 99)],
        1..=12 => &[],
        other => return Err(BenchError::UnknownExpression(other)),
    })
}

/// How an expression ends.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Terminal {
    /// `len(frame)` computed by the backend.
    Count,
    /// `len(frame)` computed by fetching the rows.
    CountRows,
    Head(u64),
    Collect,
    Max(String),
    Min(String),
}

/// A frame plus the terminal action applied to it.
#[derive(Debug, Clone)]
pub struct Action {
    pub frame: Frame,
    pub terminal: Terminal,
}

/// What an expression returned.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Scalar(Value),
    Rows(Vec<Value>),
}

impl Outcome {
    /// Order-insensitive SHA-256 of the result.
    pub fn checksum(&self) -> String {
        match self {
            Outcome::Scalar(v) => checksum(std::slice::from_ref(v)),
            Outcome::Rows(rows) => checksum(rows),
        }
    }
}

impl Action {
    /// The plan the terminal action submits.
    pub fn plan(&self) -> Result<LogicalPlan, FrameError> {
        match &self.terminal {
            Terminal::Count => self.frame.count_plan(),
            Terminal::CountRows | Terminal::Collect => Ok(self.frame.plan().clone()),
            Terminal::Head(n) => self.frame.head_plan(*n),
            Terminal::Max(c) => self.frame.col(c)?.extreme_plan(AggFn::Max),
            Terminal::Min(c) => self.frame.col(c)?.extreme_plan(AggFn::Min),
        }
    }

    /// The statement text the terminal action submits.
    pub fn statement(&self) -> Result<String, FrameError> {
        Ok(self.frame.session().dialect().render_query(&self.plan()?)?)
    }

    /// Runs the terminal action: exactly one request.
    pub fn execute(&self) -> Result<Outcome, FrameError> {
        Ok(match &self.terminal {
            Terminal::Count => Outcome::Scalar(self.frame.count()?.into()),
            Terminal::CountRows => Outcome::Scalar((self.frame.collect()?.len() as u64).into()),
            Terminal::Head(n) => Outcome::Rows(self.frame.head(*n)?),
            Terminal::Collect => Outcome::Rows(self.frame.collect()?),
            Terminal::Max(c) => Outcome::Scalar(self.frame.col(c)?.max()?),
            Terminal::Min(c) => Outcome::Scalar(self.frame.col(c)?.min()?),
        })
    }
}

/// One benchmark expression with its predicate literals bound.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expression {
    pub id: u8,
    pub predicates: Vec<Predicate>,
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.id, describe(self.id))?;
        if !self.predicates.is_empty() {
            write!(f, " [{}]", format_predicates(&self.predicates))?;
        }
        Ok(())
    }
}

/// Pandas spelling of each expression.
pub fn describe(id: u8) -> &'static str {
    match id {
        1 => "len(df)",
        2 => "df[['two','four']].head()",
        3 => "len(df[(df['ten'] == x) & (df['twentyPercent'] == y) & (df['two'] == z)])",
        4 => "df.groupby('oddOnePercent').agg('count')",
        5 => "df['stringu1'].map(str.upper).head()",
        6 => "df['unique1'].max()",
        7 => "df['unique1'].min()",
        8 => "df.groupby('twenty')['four'].agg('max')",
        9 => "df.sort_values('unique1', ascending=False).head()",
        10 => "df[df['ten'] == x].head()",
        11 => "len(df[(df['onePercent'] >= x) & (df['onePercent'] <= y)])",
        12 => "len(pd.merge(df, df2, left_on='unique1', right_on='unique1', how='inner'))",
        _ => "unknown",
    }
}

impl Expression {
    fn bind(id: u8, values: &[i64]) -> Result<Self, BenchError> {
        let ranges = predicate_ranges(id)?;
        if ranges.len() != values.len() {
            return Err(BenchError::Config(format!(
                "expression {id} takes {} predicate values, got {}",
                ranges.len(),
                values.len()
            )));
        }
        Ok(Self {
            id,
            predicates: ranges
                .iter()
                .zip(values)
                .map(|((name, _, _, _), v)| Predicate {
                    name: (*name).to_owned(),
                    value: *v,
                })
                .collect(),
        })
    }

    /// Explicit predicate values, in placeholder order.
    pub fn with_values(id: u8, values: &[i64]) -> Result<Self, BenchError> {
        Self::bind(id, values)
    }

    /// The literals used by the reference translations:
    /// 3 → (4, 2, 0), 10 → 5, 11 → (10, 20).
    pub fn fixed(id: u8) -> Result<Self, BenchError> {
        let values: &[i64] = match id {
            3 => &[4, 2, 0],
            10 => &[5],
            11 => &[10, 20],
            _ => &[],
        };
        Self::bind(id, values)
    }

    /// Draws every predicate uniformly from its attribute's range. For 11 the
    /// two draws are ordered so that `x <= y`.
    pub fn draw<R: Rng + ?Sized>(id: u8, rng: &mut R) -> Result<Self, BenchError> {
        let ranges = predicate_ranges(id)?;
        let mut values: Vec<i64> = ranges.iter().map(|(_, _, lo, hi)| rng.random_range(*lo..=*hi)).collect();
        if id == 11 {
            values.sort_unstable();
        }
        Self::bind(id, &values)
    }

    pub fn all_fixed() -> Vec<Expression> {
        (1..=EXPRESSION_COUNT)
            .map(|id| Self::fixed(id).expect("ids in range"))
            .collect()
    }

    fn value(&self, name: &str) -> i64 {
        self.predicates
            .iter()
            .find(|p| p.name == name)
            .map(|p| p.value)
            .expect("bound at construction")
    }

    /// Builds the expression on freshly opened frames. Sends nothing.
    pub fn action(&self, frames: &BenchFrames) -> Result<Action, FrameError> {
        let df = &frames.main;
        let (frame, terminal) = match self.id {
            1 => (df.clone(), Terminal::Count),
            2 => (df.select(&["two", "four"])?, Terminal::Head(DEFAULT_HEAD)),
            3 => {
                let mask = df.col("ten")?.eq(self.value("x"))
                    & df.col("twentyPercent")?.eq(self.value("y"))
                    & df.col("two")?.eq(self.value("z"));
                (df.filter(&mask)?, Terminal::Count)
            }
            4 => (df.groupby("oddOnePercent")?.count()?, Terminal::Collect),
            5 => (df.col("stringu1")?.map("upper")?, Terminal::Head(DEFAULT_HEAD)),
            6 => (df.clone(), Terminal::Max("unique1".into())),
            7 => (df.clone(), Terminal::Min("unique1".into())),
            8 => (df.groupby("twenty")?.agg("four", "max")?, Terminal::Collect),
            9 => (df.sort_values("unique1", false)?, Terminal::Head(DEFAULT_HEAD)),
            10 => (df.filter(&df.col("ten")?.eq(self.value("x")))?, Terminal::Head(DEFAULT_HEAD)),
            11 => {
                let one = df.col("onePercent")?;
                let mask = one.ge(self.value("x")) & one.le(self.value("y"));
                (df.filter(&mask)?, Terminal::CountRows)
            }
            12 => (
                frames.left.merge(&frames.right, "unique1", "unique1", "inner")?,
                Terminal::Count,
            ),
            other => return Err(FrameError::Usage(format!("unknown expression id {other}"))),
        };
        Ok(Action { frame, terminal })
    }
}
