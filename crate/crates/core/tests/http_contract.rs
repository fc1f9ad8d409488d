mod common;

use std::net::TcpListener;
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use common::{agrees, brute_answer, fixture};
use lazydf::backend::{
    Backend, BackendError, HttpBackend, HttpConfig, OracleServer, PayloadEncoding, Request, ENDPOINT_ENV,
};
use lazydf::bench::{BenchDatasets, BenchFrames, Expression};
use lazydf::dialect::Dialect;
use lazydf::frame::{FrameError, Session};
use serde_json::json;

/// Serves every request with `handler(body) -> (status, body)` on a
/// background thread; returns the base URL.
fn stub<F>(handler: F) -> String
where
    F: Fn(&str) -> (u16, String) + Send + 'static,
{
    let server = tiny_http::Server::http("127.0.0.1:0").unwrap();
    let url = format!("http://{}", server.server_addr().to_ip().unwrap());
    thread::spawn(move || {
        for mut req in server.incoming_requests() {
            let mut body = String::new();
            let _ = req.as_reader().read_to_string(&mut body);
            let (status, reply) = handler(&body);
            let _ = req.respond(tiny_http::Response::from_string(reply).with_status_code(status));
        }
    });
    url
}

fn backend(url: &str) -> HttpBackend {
    HttpBackend::new(HttpConfig::new(url).with_timeout(Duration::from_secs(5))).unwrap()
}

fn send(url: &str) -> Result<lazydf::backend::QueryResult, BackendError> {
    backend(url).execute(&Request::text("SELECT VALUE COUNT(*) FROM Data;"))
}

#[test]
fn oracle_server_matches_memory_execution() {
    let (catalog, data) = fixture(1_000, 31);
    let server = OracleServer::start(catalog.clone(), "127.0.0.1:0").unwrap();
    let http = Session::new(Arc::new(backend(&server.base_url())), Dialect::sqlpp());
    let memory = Session::memory(catalog);
    let (hf, mf) = (
        BenchFrames::open(&http, &BenchDatasets::default()).unwrap(),
        BenchFrames::open(&memory, &BenchDatasets::default()).unwrap(),
    );
    for e in Expression::all_fixed() {
        let over_http = e.action(&hf).unwrap().execute().unwrap();
        let direct = e.action(&mf).unwrap().execute().unwrap();
        assert_eq!(over_http, direct, "{e}");
        assert!(agrees(&over_http, &brute_answer(&e, &data)), "{e}");
    }
    assert_eq!(http.request_count(), 12);
    assert_eq!(server.served(), 12);
}

#[test]
fn json_payload_encoding_is_accepted_by_the_oracle() {
    let (catalog, _) = fixture(10, 1);
    let server = OracleServer::start(catalog, "127.0.0.1:0").unwrap();
    let config = HttpConfig::new(server.base_url()).with_encoding(PayloadEncoding::Json);
    let result = HttpBackend::new(config)
        .unwrap()
        .execute(&Request::text("SELECT VALUE COUNT(*) FROM Data;"))
        .unwrap();
    assert_eq!(result.rows, vec![json!(10)]);
}

#[test]
fn statement_is_sent_as_a_form_field() {
    let seen = Arc::new(Mutex::new(String::new()));
    let sink = seen.clone();
    let url = stub(move |body| {
        *sink.lock().unwrap() = body.to_owned();
        (200, r#"{"results":[42]}"#.into())
    });
    let result = send(&url).unwrap();
    assert_eq!(result.rows, vec![json!(42)]);
    let body = seen.lock().unwrap().clone();
    let fields: Vec<(String, String)> = url::form_urlencoded::parse(body.as_bytes()).into_owned().collect();
    assert_eq!(fields, [("statement".to_owned(), "SELECT VALUE COUNT(*) FROM Data;".to_owned())]);
}

#[test]
fn malformed_bodies_are_typed() {
    for reply in ["this is not json", r#"{"status":"success"}"#, r#"{"results":17}"#] {
        let url = stub(move |_| (200, reply.to_owned()));
        let err = send(&url).unwrap_err();
        assert!(matches!(err, BackendError::MalformedBody { .. }), "{reply}: {err:?}");
        assert_eq!(err.statement(), "SELECT VALUE COUNT(*) FROM Data;");
    }
}

#[test]
fn http_errors_are_typed() {
    let url = stub(|_| (500, "internal error".into()));
    match send(&url).unwrap_err() {
        BackendError::HttpStatus { status, body, .. } => {
            assert_eq!(status, 500);
            assert_eq!(body, "internal error");
        }
        other => panic!("expected HttpStatus, got {other:?}"),
    }
}

#[test]
fn query_errors_become_frame_errors() {
    let url = stub(|_| (400, r#"{"status":"fatal","errors":[{"code":1,"msg":"no such dataset"}]}"#.into()));
    let result = send(&url).unwrap();
    assert_eq!(result.error.as_deref(), Some("no such dataset"));

    let session = Session::new(Arc::new(backend(&url)), Dialect::sqlpp());
    match session.open("Data").unwrap().count() {
        Err(FrameError::Query { message, .. }) => assert_eq!(message, "no such dataset"),
        other => panic!("expected Query error, got {other:?}"),
    }
}

#[test]
fn unreachable_hosts_are_transport_errors() {
    let port = {
        let l = TcpListener::bind("127.0.0.1:0").unwrap();
        l.local_addr().unwrap().port()
    };
    let err = send(&format!("http://127.0.0.1:{port}")).unwrap_err();
    assert!(matches!(err, BackendError::Transport { .. }), "{err:?}");
}

#[test]
fn slow_services_time_out_near_the_limit() {
    let url = stub(|_| {
        thread::sleep(Duration::from_secs(4));
        (200, r#"{"results":[]}"#.into())
    });
    let b = HttpBackend::new(HttpConfig::new(&url).with_timeout(Duration::from_secs(1))).unwrap();
    let started = Instant::now();
    let err = b.execute(&Request::text("SELECT 1;")).unwrap_err();
    let elapsed = started.elapsed();
    assert!(matches!(err, BackendError::Timeout { .. }), "{err:?}");
    assert!(elapsed < Duration::from_secs(2), "{elapsed:?}");
    assert!(elapsed >= Duration::from_millis(900), "{elapsed:?}");
}

#[test]
fn latency_is_included_in_elapsed_time() {
    let url = stub(|_| {
        thread::sleep(Duration::from_millis(10));
        (200, r#"{"results":[1,2]}"#.into())
    });
    let result = send(&url).unwrap();
    assert_eq!(result.rows.len(), 2);
    assert!(result.elapsed >= Duration::from_millis(10));
}

#[test]
fn oracle_rejects_wrong_paths_and_methods() {
    let (catalog, _) = fixture(3, 1);
    let server = OracleServer::start(catalog, "127.0.0.1:0").unwrap();
    let wrong_path = HttpBackend::new(HttpConfig::new(server.base_url()).with_path("/elsewhere")).unwrap();
    let err = wrong_path.execute(&Request::text("SELECT VALUE COUNT(*) FROM Data;")).unwrap_err();
    assert!(matches!(err, BackendError::HttpStatus { status: 404, .. }), "{err:?}");

    let bad = backend(&server.base_url()).execute(&Request::text("SELEKT nonsense")).unwrap();
    assert!(bad.is_error());
}

#[test]
fn endpoint_comes_from_the_environment() {
    std::env::set_var(ENDPOINT_ENV, "http://127.0.0.1:19002");
    let config = HttpConfig::from_env().unwrap();
    std::env::remove_var(ENDPOINT_ENV);
    assert_eq!(config.service_url().unwrap().as_str(), "http://127.0.0.1:19002/query/service");
    assert!(HttpConfig::from_env().is_none());
}
