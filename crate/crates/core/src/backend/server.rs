use std::io;
use std::net::SocketAddr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;

use serde_json::{json, Value};
use tiny_http::{Header, Method, Response, Server};

use super::http::DEFAULT_PATH;
use super::{MemoryBackend, MemoryCatalog, QueryStatus, Request};

/// Serves a [`MemoryCatalog`] over the same HTTP contract the
/// [`HttpBackend`](super::HttpBackend) speaks, one request at a time.
pub struct OracleServer {
    server: Arc<Server>,
    addr: SocketAddr,
    served: Arc<AtomicU64>,
    worker: Option<JoinHandle<()>>,
}

impl OracleServer {
    /// Binds `addr` (use port 0 for an ephemeral port) and serves
    /// `POST /query/service` on a background thread.
    pub fn start(catalog: Arc<MemoryCatalog>, addr: &str) -> io::Result<Self> {
        Self::start_with_path(catalog, addr, DEFAULT_PATH)
    }

    pub fn start_with_path(catalog: Arc<MemoryCatalog>, addr: &str, path: &str) -> io::Result<Self> {
        let server = Arc::new(Server::http(addr).map_err(io::Error::other)?);
        let addr = server
            .server_addr()
            .to_ip()
            .ok_or_else(|| io::Error::other("oracle server is not bound to an IP address"))?;
        let served = Arc::new(AtomicU64::new(0));
        let backend = MemoryBackend::new(catalog);
        let worker = {
            let server = Arc::clone(&server);
            let served = Arc::clone(&served);
            let path = path.to_owned();
            std::thread::spawn(move || {
                for request in server.incoming_requests() {
                    served.fetch_add(1, Ordering::SeqCst);
                    // A client that hung up is not the server's problem.
                    let _ = handle(&backend, &path, request);
                }
            })
        };
        Ok(Self {
            server,
            addr,
            served,
            worker: Some(worker),
        })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    /// `http://ip:port`, suitable for `HttpConfig::new`.
    pub fn base_url(&self) -> String {
        format!("http://{}", self.addr)
    }

    /// HTTP requests received so far.
    pub fn served(&self) -> u64 {
        self.served.load(Ordering::SeqCst)
    }

    /// Blocks until the server stops (it does not stop on its own).
    pub fn wait(mut self) {
        if let Some(w) = self.worker.take() {
            let _ = w.join();
        }
    }

    pub fn shutdown(self) {}
}

impl Drop for OracleServer {
    fn drop(&mut self) {
        self.server.unblock();
        if let Some(w) = self.worker.take() {
            let _ = w.join();
        }
    }
}

fn json_response(status: u16, body: &Value) -> Response<io::Cursor<Vec<u8>>> {
    let header = Header::from_bytes("Content-Type", "application/json").expect("static header");
    Response::from_string(body.to_string())
        .with_status_code(status)
        .with_header(header)
}

fn fatal(message: &str) -> Value {
    json!({"status": "fatal", "errors": [{"code": 1, "msg": message}]})
}

fn handle(backend: &MemoryBackend, path: &str, mut request: tiny_http::Request) -> io::Result<()> {
    let url_path = request.url().split('?').next().unwrap_or("").to_owned();
    if url_path != path {
        return request.respond(Response::from_string("not found").with_status_code(404));
    }
    if *request.method() != Method::Post {
        return request.respond(Response::from_string("use POST").with_status_code(405));
    }
    let is_json = request.headers().iter().any(|h| {
        h.field.equiv("Content-Type") && h.value.as_str().contains("json")
    });
    let mut body = String::new();
    if let Err(e) = request.as_reader().read_to_string(&mut body) {
        return request.respond(json_response(400, &fatal(&format!("unreadable body: {e}"))));
    }
    let statement = if is_json {
        serde_json::from_str::<Value>(&body)
            .ok()
            .and_then(|v| v.get("statement").and_then(Value::as_str).map(str::to_owned))
    } else {
        url::form_urlencoded::parse(body.as_bytes())
            .find(|(k, _)| k == "statement")
            .map(|(_, v)| v.into_owned())
    };
    let Some(statement) = statement else {
        return request.respond(json_response(400, &fatal("missing statement parameter")));
    };
    let result = backend.run_statement(&Request::text(statement));
    let elapsed = format!("{:?}", result.elapsed);
    match result.status {
        QueryStatus::Success => request.respond(json_response(
            200,
            &json!({
                "status": "success",
                "results": result.rows,
                "metrics": {"elapsedTime": elapsed, "resultCount": result.rows.len()},
            }),
        )),
        QueryStatus::Error => {
            request.respond(json_response(400, &fatal(result.error.as_deref().unwrap_or("error"))))
        }
    }
}
