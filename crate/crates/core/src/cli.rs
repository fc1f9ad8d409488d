//! Command-line entry point: data generation, translation, ad-hoc execution,
//! benchmarking and the in-process oracle server.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, CommandFactory, Parser, Subcommand};

use crate::ast::LogicalPlan;
use crate::backend::{Backend, HttpBackend, HttpConfig, MemoryCatalog, OracleServer, Request, ENDPOINT_ENV};
use crate::bench::{
    run_bench, write_report, BenchConfig, BenchFrames, BenchDatasets, Expression, MonotonicClock, ReportFormat,
    EXPRESSION_COUNT,
};
use crate::dialect::{Dialect, DialectKind};
use crate::frame::Session;
use crate::wisconsin::{self, Format, GenConfig, DEFAULT_STRING_LENGTH};

#[derive(Debug, Parser)]
#[command(name = "lazydf", version, about = "Lazy DataFrame translation, Wisconsin data and benchmark tools")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a Wisconsin relation as JSON lines or CSV.
    Gen(GenArgs),
    /// Print the query a benchmark expression or plan file translates to.
    Translate(TranslateArgs),
    /// Send one statement or benchmark expression to a backend.
    Exec(ExecArgs),
    /// Time the benchmark expressions against a backend.
    Bench(BenchArgs),
    /// Serve an in-memory catalog over the HTTP query contract.
    ServeOracle(ServeArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub records: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "json")]
    pub format: Format,
    #[arg(long, default_value_t = DEFAULT_STRING_LENGTH)]
    pub string_length: usize,
    #[arg(long, default_value_t = 0)]
    pub pad_bytes: usize,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["expr", "plan"])))]
pub struct TranslateArgs {
    /// Benchmark expression id (1-12), with the reference predicate literals.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=EXPRESSION_COUNT as i64))]
    pub expr: Option<u8>,
    /// JSON-encoded logical plan.
    #[arg(long)]
    pub plan: Option<PathBuf>,
    #[arg(long, default_value = "sqlpp")]
    pub dialect: DialectKind,
}

#[derive(Debug, Args)]
pub struct EndpointArgs {
    /// Base URL of the query service.
    #[arg(long, env = ENDPOINT_ENV)]
    pub endpoint: String,
    #[arg(long, default_value_t = 300)]
    pub timeout_secs: u64,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["statement", "expr"])))]
pub struct ExecArgs {
    /// Statement text, sent verbatim.
    pub statement: Option<String>,
    /// Benchmark expression id (1-12), with the reference predicate literals.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=EXPRESSION_COUNT as i64))]
    pub expr: Option<u8>,
    #[arg(long, default_value = "sqlpp")]
    pub dialect: DialectKind,
    #[command(flatten)]
    pub endpoint: EndpointArgs,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub endpoint: EndpointArgs,
    #[arg(long, default_value = "sqlpp")]
    pub dialect: DialectKind,
    #[arg(long, default_value_t = 15)]
    pub runs: usize,
    #[arg(long, default_value_t = 5)]
    pub warmup: usize,
    /// Seed for the per-run predicate draws.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Use the reference predicate literals on every run.
    #[arg(long)]
    pub fixed_predicates: bool,
    /// Comma-separated expression ids; all twelve when omitted.
    #[arg(long, value_delimiter = ',', value_parser = clap::value_parser!(u8).range(1..=EXPRESSION_COUNT as i64))]
    pub expressions: Vec<u8>,
    /// Report file; standard output when omitted.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    pub report_format: ReportFormat,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Port to listen on; 0 picks a free one.
    #[arg(long, default_value_t = 0)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    /// `dataset=path[:format]`; format is json (default) or csv.
    #[arg(long = "load", value_name = "DATASET=PATH[:FORMAT]")]
    pub loads: Vec<String>,
    /// Load a generated relation of this size into the benchmark datasets.
    #[arg(long)]
    pub wisconsin: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Parses `argv` (program name first) and runs the command. Returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() && !e.to_string().contains("Usage:") {
                eprintln!("\n{}", Cli::command().render_usage());
            }
            return e.exit_code();
        }
    };
    let stdout = io::stdout();
    match dispatch(cli.command, &mut stdout.lock()) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            1
        }
    }
}

/// Runs a parsed command, writing its primary output to `out`.
pub fn dispatch(command: Command, out: &mut dyn Write) -> Result<i32, String> {
    match command {
        Command::Gen(a) => gen(a, out),
        Command::Translate(a) => translate(a, out),
        Command::Exec(a) => exec(a, out),
        Command::Bench(a) => bench(a, out),
        Command::ServeOracle(a) => serve(a, out),
    }
    .map_err(|e| e.to_string())
}

type CmdResult = Result<i32, Box<dyn std::error::Error>>;

fn gen(a: GenArgs, out: &mut dyn Write) -> CmdResult {
    let mut config = GenConfig::new(a.records, a.seed).with_format(a.format);
    config.string_length = a.string_length;
    config.pad_bytes = a.pad_bytes;
    config.validate()?;
    match &a.out {
        Some(path) => {
            let summary = wisconsin::generate(&config, path)?;
            writeln!(
                out,
                "wrote {} records ({} bytes) to {}",
                summary.records_written,
                summary.bytes,
                path.display()
            )?;
        }
        None => {
            wisconsin::write_records(&config, BufWriter::new(out))?;
        }
    }
    Ok(0)
}

fn expression_statement(id: u8, session: &Session) -> Result<String, Box<dyn std::error::Error>> {
    let frames = BenchFrames::open(session, &BenchDatasets::default())?;
    Ok(Expression::fixed(id)?.action(&frames)?.statement()?)
}

fn translate(a: TranslateArgs, out: &mut dyn Write) -> CmdResult {
    let dialect = Dialect::for_kind(a.dialect);
    let text = match (a.expr, &a.plan) {
        (Some(id), _) => {
            let session = Session::new(Arc::new(crate::backend::MemoryBackend::new(Arc::default())), dialect);
            expression_statement(id, &session)?
        }
        (None, Some(path)) => {
            let plan: LogicalPlan = serde_json::from_reader(File::open(path)?)?;
            dialect.render_query(&plan)?
        }
        (None, None) => unreachable!("clap requires one source"),
    };
    writeln!(out, "{text}")?;
    Ok(0)
}

fn http_session(e: &EndpointArgs, kind: DialectKind) -> Result<Session, Box<dyn std::error::Error>> {
    let config = HttpConfig::new(e.endpoint.clone()).with_timeout(Duration::from_secs(e.timeout_secs));
    Ok(Session::new(Arc::new(HttpBackend::new(config)?), Dialect::for_kind(kind)))
}

fn exec(a: ExecArgs, out: &mut dyn Write) -> CmdResult {
    let session = http_session(&a.endpoint, a.dialect)?;
    let text = match (a.statement, a.expr) {
        (Some(s), _) => s,
        (None, Some(id)) => expression_statement(id, &session)?,
        (None, None) => unreachable!("clap requires one source"),
    };
    let result = session.backend().execute(&Request::text(text))?;
    if let Some(err) = result.error {
        return Err(err.into());
    }
    for row in &result.rows {
        writeln!(out, "{row}")?;
    }
    Ok(0)
}

fn bench(a: BenchArgs, out: &mut dyn Write) -> CmdResult {
    let config = BenchConfig {
        expressions: if a.expressions.is_empty() {
            (1..=EXPRESSION_COUNT).collect()
        } else {
            a.expressions
        },
        runs: a.runs,
        warmup: a.warmup,
        seed: a.seed,
        fixed_predicates: a.fixed_predicates,
        ..BenchConfig::default()
    };
    config.validate()?;
    let session = http_session(&a.endpoint, a.dialect)?;
    let report = run_bench(&session, &config, &MonotonicClock::default())?;
    match &a.report {
        Some(path) => write_report(&report, BufWriter::new(File::create(path)?), a.report_format)?,
        None => write_report(&report, BufWriter::new(&mut *out), a.report_format)?,
    }
    for e in &report.expressions {
        if let Some(err) = &e.error {
            eprintln!("expression {} aborted: {err}", e.expression_id);
        }
    }
    Ok(if report.any_aborted() { 1 } else { 0 })
}

fn parse_load(spec: &str) -> Result<(String, PathBuf, String), String> {
    let (dataset, rest) = spec
        .split_once('=')
        .ok_or_else(|| format!("expected DATASET=PATH[:FORMAT], got {spec:?}"))?;
    let (path, format) = match rest.rsplit_once(':') {
        Some((p, f)) if matches!(f, "json" | "jsonl" | "adm" | "csv") => (p, f),
        _ => (rest, "json"),
    };
    Ok((dataset.to_owned(), PathBuf::from(path), format.to_owned()))
}

/// Loads a generated relation into every benchmark dataset.
pub fn load_wisconsin(catalog: &MemoryCatalog, records: u64, seed: u64) -> Result<(), Box<dyn std::error::Error>> {
    let config = GenConfig::new(records, seed);
    let names = BenchDatasets::default();
    for ds in [&names.main, &names.left, &names.right] {
        catalog.load(ds, wisconsin::records(&config)?.map(|r| r.to_json()))?;
    }
    Ok(())
}

fn serve(a: ServeArgs, out: &mut dyn Write) -> CmdResult {
    let loads = a.loads.iter().map(|s| parse_load(s)).collect::<Result<Vec<_>, _>>()?;
    let catalog = Arc::new(MemoryCatalog::default());
    if let Some(n) = a.wisconsin {
        load_wisconsin(&catalog, n, a.seed)?;
    }
    for (dataset, path, format) in &loads {
        let n = catalog.load_file(dataset, path, format)?;
        eprintln!("loaded {n} records into {dataset}");
    }
    let server = OracleServer::start(catalog, &format!("{}:{}", a.host, a.port))?;
    writeln!(out, "{}", server.base_url())?;
    out.flush()?;
    server.wait();
    Ok(0)
}
