mod common;

use std::io::{BufRead, BufReader};
use std::process::{Child, Command, Output, Stdio};

use common::{as_outcome, brute_answer, wisconsin_rows};
use lazydf::bench::Expression;

fn lazydf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lazydf")).args(args).env_remove("LAZYDF_ENDPOINT").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// `serve-oracle` child process plus the base URL it printed.
struct Oracle {
    child: Child,
    url: String,
}

impl Oracle {
    fn start(args: &[&str]) -> Self {
        let mut child = Command::new(env!("CARGO_BIN_EXE_lazydf"))
            .arg("serve-oracle")
            .args(args)
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .unwrap();
        let mut line = String::new();
        BufReader::new(child.stdout.as_mut().unwrap()).read_line(&mut line).unwrap();
        Self {
            child,
            url: line.trim().to_owned(),
        }
    }
}

impl Drop for Oracle {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

#[test]
fn translate_prints_the_query() {
    let out = lazydf(&["translate", "--expr", "1", "--dialect", "sqlpp"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "SELECT VALUE COUNT(*) FROM Data;\n");

    for id in 1..=12u8 {
        let out = lazydf(&["translate", "--expr", &id.to_string()]);
        let golden = std::fs::read_to_string(format!("{}/golden/sqlpp/expr{id:02}.sqlpp", env!("CARGO_MANIFEST_DIR"))).unwrap();
        assert_eq!(
            lazydf::dialect::canonicalize(&stdout(&out)),
            lazydf::dialect::canonicalize(&golden),
            "expression {id}"
        );
    }
}

#[test]
fn translate_reads_plan_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("plan.json");
    let plan = lazydf::ast::LogicalPlan::scan_dataset("Data".parse().unwrap())
        .limit(3)
        .unwrap();
    std::fs::write(&path, serde_json::to_string(&plan).unwrap()).unwrap();
    let out = lazydf(&["translate", "--plan", path.to_str().unwrap(), "--dialect", "ansi"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout(&out), "SELECT t.* FROM \"Data\" t LIMIT 3;\n");

    std::fs::write(&path, r#"{"op":"limit","input":{"op":"count_all","input":{"op":"scan","dataset":"Data"}},"count":1}"#)
        .unwrap();
    let out = lazydf(&["translate", "--plan", path.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn gen_writes_the_requested_records() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.json");
    let out = lazydf(&["gen", "--records", "4", "--seed", "1", "--format", "json", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 4);

    let csv = lazydf(&["gen", "--records", "3", "--format", "csv", "--pad-bytes", "8", "--string-length", "12"]);
    let text = stdout(&csv);
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().next().unwrap().ends_with(",padding"));
}

#[test]
fn usage_errors_exit_nonzero_with_usage_text() {
    for args in [
        &[][..],
        &["frobnicate"],
        &["translate"],
        &["translate", "--expr", "0"],
        &["gen"],
        &["gen", "--records", "4", "--format", "parquet"],
        &["bench", "--runs", "3"],
        &["bench", "--endpoint", "http://x", "--report-format", "xml"],
    ] {
        let out = lazydf(args);
        assert!(!out.status.success(), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"), "{args:?}");
    }
    let out = lazydf(&["gen", "--records", "0"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn bench_against_the_oracle_matches_brute_force() {
    let oracle = Oracle::start(&["--wisconsin", "1000", "--seed", "4"]);
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.csv");
    let out = lazydf(&[
        "bench",
        "--endpoint",
        &oracle.url,
        "--runs",
        "15",
        "--warmup",
        "5",
        "--fixed-predicates",
        "--report",
        report.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let rows = wisconsin_rows(1_000, 4);
    let data = common::DATASETS.iter().map(|d| (d.to_string(), rows.clone())).collect();
    let mut reader = csv::Reader::from_path(&report).unwrap();
    let means: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).filter(|r| r[3].is_empty()).collect();
    assert_eq!(means.len(), 24);
    for m in &means {
        let id: u8 = m[0].parse().unwrap();
        let want = as_outcome(brute_answer(&Expression::fixed(id).unwrap(), &data)).checksum();
        assert_eq!(&m[6], want, "expression {id}");
        assert!(m[2].parse::<f64>().unwrap() > 0.0);
    }
}

#[test]
fn exec_uses_the_environment_endpoint() {
    let oracle = Oracle::start(&["--wisconsin", "200"]);
    let out = Command::new(env!("CARGO_BIN_EXE_lazydf"))
        .args(["exec", "--expr", "12"])
        .env("LAZYDF_ENDPOINT", &oracle.url)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout(&out), "200\n");

    let out = lazydf(&["exec", "--endpoint", &oracle.url, "SELECT VALUE t.ten FROM Data t WHERE t.unique2 = 3;"]);
    assert_eq!(stdout(&out).trim(), rows_ten(200, 0, 3));

    let out = lazydf(&["exec", "--endpoint", &oracle.url, "SELECT VALUE COUNT(*) FROM Missing;"]);
    assert!(!out.status.success());
}

fn rows_ten(n: u64, seed: u64, unique2: usize) -> String {
    wisconsin_rows(n, seed)[unique2]["ten"].to_string()
}

#[test]
fn serve_oracle_loads_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.csv");
    let gen = lazydf(&["gen", "--records", "30", "--format", "csv", "--out", path.to_str().unwrap()]);
    assert!(gen.status.success());
    let spec = format!("Data={}:csv", path.display());
    let oracle = Oracle::start(&["--load", &spec]);
    let out = lazydf(&["exec", "--endpoint", &oracle.url, "--expr", "1"]);
    assert_eq!(stdout(&out), "30\n");
}

#[test]
fn bench_exits_nonzero_when_expressions_abort() {
    let port = std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let out = lazydf(&[
        "bench",
        "--endpoint",
        &format!("http://127.0.0.1:{port}"),
        "--runs",
        "2",
        "--warmup",
        "1",
        "--expressions",
        "1,6",
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("aborted"));
}
