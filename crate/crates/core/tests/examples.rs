//! Every example runs to completion and produces what it describes.

macro_rules! example {
    ($name:ident) => {
        mod $name {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", stringify!($name), ".rs"));
        }
    };
}

example!(incremental_query);
example!(generate_wisconsin);
example!(translate_expressions);
example!(http_oracle);
example!(run_benchmark);
example!(persist_frame);
example!(schema_ddl);
example!(custom_function);
example!(grouping_and_joins);

use serde_json::json;

#[test]
fn incremental_query_sends_one_request() {
    let w = incremental_query::run_example().unwrap();
    assert_eq!(w.after_selection, "SELECT VALUE t FROM Data t WHERE t.ten = 5;");
    assert_eq!(w.after_projection, "SELECT t.two, t.four FROM Data t WHERE t.ten = 5;");
    assert_eq!((w.requests_before_head, w.requests_after_head), (0, 1));
    assert_eq!(w.rows.len(), 2);
    assert!(w.rows.iter().all(|r| r["two"] == json!(1)));
}

#[test]
fn generate_wisconsin_writes_both_formats() {
    let g = generate_wisconsin::run_example().unwrap();
    assert_eq!(g.json_lines, 1_000);
    assert_eq!(g.csv_lines, 1_001);
    assert!(g.json_bytes > 0);
    assert_eq!(g.one_percent_counts.len(), 100);
    assert!(g.one_percent_counts.values().all(|c| *c == 10));
}

#[test]
fn translate_expressions_covers_all_twelve() {
    let t = translate_expressions::run_example().unwrap();
    assert_eq!(t.len(), 12);
    assert!(t.iter().map(|x| x.id).eq(1..=12));
    assert_eq!(t[0].sqlpp, "SELECT VALUE COUNT(*) FROM Data;");
    assert_eq!(t[0].ansi, "SELECT COUNT(*) FROM \"Data\";");
}

#[test]
fn http_oracle_answers_over_http() {
    let a = http_oracle::run_example().unwrap();
    assert_eq!(a.count, 250);
    assert_eq!(a.max_unique1, json!(499));
    assert_eq!(a.groups, 10);
    assert_eq!((a.requests, a.served), (3, 3));
}

#[test]
fn run_benchmark_completes() {
    let r = run_benchmark::run_example().unwrap();
    assert!(!r.any_aborted());
    assert_eq!(r.expressions.len(), 12);
    assert!(r.expressions.iter().all(|e| e.runs.len() == 4 && e.mean_total_seconds.is_some()));
}

#[test]
fn persist_frame_round_trips() {
    let p = persist_frame::run_example().unwrap();
    assert_eq!(p.source_count, p.target_count);
    assert_eq!(p.target_count, 50);
    assert_eq!(p.target_query, "SELECT VALUE t FROM Demo.lowOnePercent t;");
    assert!(p.create_or_fail_rejected_existing);
}

#[test]
fn schema_ddl_renders_every_statement() {
    let texts = schema_ddl::run_example().unwrap();
    assert_eq!(texts.len(), 4);
    assert!(texts[0].starts_with("CREATE TYPE WisconsinType AS CLOSED"));
    assert_eq!(texts[1], "CREATE DATASET Data(WisconsinType) PRIMARY KEY unique2;");
    assert_eq!(texts[2], "CREATE INDEX tenIdx ON Data(ten);");
    assert!(texts[3].starts_with("LOAD DATASET Data USING localfs"));
}

#[test]
fn custom_function_scores_rows() {
    let s = custom_function::run_example().unwrap();
    assert_eq!(s.query, "SELECT t.*, sentiment(t.text) AS score FROM Tweets t;");
    let scores: Vec<_> = s.rows.iter().map(|r| r["score"].clone()).collect();
    assert_eq!(scores, [json!(1), json!(-1), json!(0)]);
    assert!(s.unknown_rejected);
}

#[test]
fn grouping_and_joins_match_hand_counts() {
    let r = grouping_and_joins::run_example().unwrap();
    assert_eq!(r.groups.len(), 4);
    assert!(r.groups.iter().all(|g| g["cnt"] == json!(250)));
    let top: Vec<_> = r.top.iter().map(|t| t["unique1"].clone()).collect();
    assert_eq!(top, [json!(999), json!(998), json!(997)]);
    assert_eq!(r.joined, 100);
    assert_eq!(r.ten_max, json!(9));
}
