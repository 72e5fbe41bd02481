//! HTTP front for [`Api`] on a small pool of worker threads.

use std::sync::Arc;
use std::thread;

use tiny_http::{Header, Method, Request, Server};

use crate::api::Api;

const WORKERS: usize = 4;

pub struct Service {
    server: Arc<Server>,
    api: Arc<Api>,
}

impl Service {
    /// Binds to `addr`, e.g. `127.0.0.1:8080`; port 0 picks a free port.
    pub fn bind(addr: &str, api: Api) -> std::io::Result<Self> {
        let server = Server::http(addr).map_err(std::io::Error::other)?;
        Ok(Service {
            server: Arc::new(server),
            api: Arc::new(api),
        })
    }

    pub fn local_port(&self) -> Option<u16> {
        self.server.server_addr().to_ip().map(|a| a.port())
    }

    /// Serves until the process exits.
    pub fn run(self) {
        let handles: Vec<_> = (0..WORKERS)
            .map(|_| {
                let server = Arc::clone(&self.server);
                let api = Arc::clone(&self.api);
                thread::spawn(move || {
                    while let Ok(request) = server.recv() {
                        respond(&api, request);
                    }
                })
            })
            .collect();
        for h in handles {
            let _ = h.join();
        }
    }
}

fn header(name: &str, value: &str) -> Header {
    Header::from_bytes(name.as_bytes(), value.as_bytes()).expect("static header is valid")
}

fn respond(api: &Api, mut request: Request) {
    let cors = [
        header("Access-Control-Allow-Origin", "*"),
        header("Access-Control-Allow-Headers", "Content-Type"),
        header("Access-Control-Allow-Methods", "GET, POST, OPTIONS"),
    ];
    if *request.method() == Method::Options {
        let mut response = tiny_http::Response::empty(204);
        for h in cors {
            response.add_header(h);
        }
        let _ = request.respond(response);
        return;
    }
    let mut body = String::new();
    let result = if request.as_reader().read_to_string(&mut body).is_err() {
        crate::api::Response {
            status: 400,
            body: serde_json::json!({ "error": "bad_request", "message": "body is not UTF-8" }),
        }
    } else {
        api.handle(request.method().as_str(), request.url(), &body)
    };
    let mut text = serde_json::to_string(&result.body).expect("json values serialize");
    text.push('\n');
    let mut response = tiny_http::Response::from_string(text)
        .with_status_code(result.status)
        .with_header(header("Content-Type", "application/json"));
    for h in cors {
        response.add_header(h);
    }
    let _ = request.respond(response);
}
