use std::collections::VecDeque;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::frame::Session;

use super::report::mean_after_warmup;
use super::{describe, BenchDatasets, BenchError, BenchFrames, Expression, Predicate, EXPRESSION_COUNT};

/// Source of monotonic timestamps.
pub trait Clock {
    fn now(&self) -> Duration;
}

/// Wall-clock time since construction, from [`Instant`].
#[derive(Debug, Clone, Copy)]
pub struct MonotonicClock {
    origin: Instant,
}

impl Default for MonotonicClock {
    fn default() -> Self {
        Self {
            origin: Instant::now(),
        }
    }
}

impl Clock for MonotonicClock {
    fn now(&self) -> Duration {
        self.origin.elapsed()
    }
}

/// Replays a fixed sequence of timestamps; repeats the last one when
/// exhausted. Lets tests inject exact per-run durations.
#[derive(Debug, Default)]
pub struct ScriptedClock {
    marks: Mutex<VecDeque<Duration>>,
    last: Mutex<Duration>,
}

impl ScriptedClock {
    pub fn new(marks: impl IntoIterator<Item = Duration>) -> Self {
        Self {
            marks: Mutex::new(marks.into_iter().collect()),
            last: Mutex::default(),
        }
    }

    /// Timestamps for runs whose (total, expression-only) durations are
    /// given: each run reads the clock three times.
    pub fn for_runs(samples: &[(Duration, Duration)]) -> Self {
        let mut t = Duration::ZERO;
        let mut marks = Vec::with_capacity(samples.len() * 3);
        for (total, expr) in samples {
            let creation = total.saturating_sub(*expr);
            marks.push(t);
            marks.push(t + creation);
            marks.push(t + creation + *expr);
            t += creation + *expr + Duration::from_millis(1);
        }
        Self::new(marks)
    }
}

impl Clock for ScriptedClock {
    fn now(&self) -> Duration {
        let mut last = self.last.lock().expect("clock poisoned");
        if let Some(m) = self.marks.lock().expect("clock poisoned").pop_front() {
            *last = m;
        }
        *last
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TimingMode {
    /// Frame creation plus expression.
    Total,
    /// Expression on an already created frame.
    ExprOnly,
}

impl TimingMode {
    pub fn label(self) -> &'static str {
        match self {
            TimingMode::Total => "TOTAL",
            TimingMode::ExprOnly => "EXPR_ONLY",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchConfig {
    pub expressions: Vec<u8>,
    pub datasets: BenchDatasets,
    /// Runs per expression, warm-up included.
    pub runs: usize,
    /// Leading runs excluded from the mean.
    pub warmup: usize,
    pub seed: u64,
    /// Use the reference literals on every run instead of fresh draws.
    pub fixed_predicates: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            expressions: (1..=EXPRESSION_COUNT).collect(),
            datasets: BenchDatasets::default(),
            runs: 15,
            warmup: 5,
            seed: 0,
            fixed_predicates: false,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        if self.runs == 0 {
            return Err(BenchError::Config("runs must be at least 1".into()));
        }
        if self.warmup >= self.runs {
            return Err(BenchError::Config(format!(
                "warmup ({}) must be smaller than runs ({})",
                self.warmup, self.runs
            )));
        }
        if self.expressions.is_empty() {
            return Err(BenchError::Config("no expressions selected".into()));
        }
        if let Some(bad) = self.expressions.iter().find(|id| !(1..=EXPRESSION_COUNT).contains(*id)) {
            return Err(BenchError::UnknownExpression(*bad));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    /// 1-based; runs `1..=warmup` are warm-up.
    pub index: usize,
    pub total_seconds: f64,
    pub expr_seconds: f64,
    pub predicates: Vec<Predicate>,
    pub checksum: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpressionReport {
    pub expression_id: u8,
    pub description: String,
    pub warmup: usize,
    pub runs: Vec<RunRecord>,
    pub mean_total_seconds: Option<f64>,
    pub mean_expr_seconds: Option<f64>,
    /// Set when a run failed; `runs` then holds the runs completed before it.
    pub error: Option<String>,
}

impl ExpressionReport {
    pub fn is_partial(&self) -> bool {
        self.error.is_some()
    }

    pub fn samples(&self, mode: TimingMode) -> Vec<f64> {
        self.runs
            .iter()
            .map(|r| match mode {
                TimingMode::Total => r.total_seconds,
                TimingMode::ExprOnly => r.expr_seconds,
            })
            .collect()
    }

    pub fn mean(&self, mode: TimingMode) -> Option<f64> {
        match mode {
            TimingMode::Total => self.mean_total_seconds,
            TimingMode::ExprOnly => self.mean_expr_seconds,
        }
    }

    /// The checksum shared by every run, if they all agree.
    pub fn stable_checksum(&self) -> Option<&str> {
        let first = self.runs.first()?.checksum.as_str();
        self.runs.iter().all(|r| r.checksum == first).then_some(first)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub runs: usize,
    pub warmup: usize,
    pub seed: u64,
    pub fixed_predicates: bool,
    pub expressions: Vec<ExpressionReport>,
}

impl BenchReport {
    pub fn any_aborted(&self) -> bool {
        self.expressions.iter().any(ExpressionReport::is_partial)
    }
}

fn seconds(d: Duration) -> f64 {
    d.as_secs_f64()
}

/// Runs one expression `config.runs` times. Each run reads the clock before
/// opening fresh frames, after opening them, and after the terminal action
/// returns; TOTAL spans all three marks and EXPR_ONLY the last two, so
/// TOTAL >= EXPR_ONLY for every run.
pub fn time_expression(
    id: u8,
    session: &Session,
    config: &BenchConfig,
    clock: &dyn Clock,
    rng: &mut ChaCha8Rng,
) -> Result<ExpressionReport, BenchError> {
    let fixed = Expression::fixed(id)?;
    let mut report = ExpressionReport {
        expression_id: id,
        description: describe(id).to_owned(),
        warmup: config.warmup,
        runs: Vec::with_capacity(config.runs),
        mean_total_seconds: None,
        mean_expr_seconds: None,
        error: None,
    };
    for index in 1..=config.runs {
        let expr = if config.fixed_predicates {
            fixed.clone()
        } else {
            Expression::draw(id, rng)?
        };
        let m0 = clock.now();
        let frames = BenchFrames::open(session, &config.datasets);
        let m1 = clock.now();
        let outcome = frames.and_then(|f| expr.action(&f)?.execute());
        let m2 = clock.now();
        match outcome {
            Ok(outcome) => report.runs.push(RunRecord {
                index,
                total_seconds: seconds(m2.saturating_sub(m0)),
                expr_seconds: seconds(m2.saturating_sub(m1)),
                predicates: expr.predicates,
                checksum: outcome.checksum(),
            }),
            Err(e) => {
                report.error = Some(format!("run {index}: {e}"));
                break;
            }
        }
    }
    report.mean_total_seconds = mean_after_warmup(&report.samples(TimingMode::Total), config.warmup);
    report.mean_expr_seconds = mean_after_warmup(&report.samples(TimingMode::ExprOnly), config.warmup);
    Ok(report)
}

/// Times every configured expression, one after another.
pub fn run_bench(session: &Session, config: &BenchConfig, clock: &dyn Clock) -> Result<BenchReport, BenchError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut expressions = Vec::with_capacity(config.expressions.len());
    for id in &config.expressions {
        expressions.push(time_expression(*id, session, config, clock, &mut rng)?);
    }
    Ok(BenchReport {
        runs: config.runs,
        warmup: config.warmup,
        seed: config.seed,
        fixed_predicates: config.fixed_predicates,
        expressions,
    })
}
