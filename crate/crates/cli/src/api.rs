//! Request handling for `tag serve`, independent of the HTTP server so it can
//! be driven directly in tests.
//!
//! Routes:
//!
//! | method | path               | body / query                  |
//! |--------|--------------------|-------------------------------|
//! | GET    | `/api/sequence`    | `alpha`, `count`              |
//! | POST   | `/api/game/new`    | `{"alpha", "pile"}`           |
//! | POST   | `/api/game/move`   | `{"session_id", "take"}`      |
//! | GET    | `/api/game/hint`   | `session_id`                  |
//!
//! The human always moves first; the engine replies within the same request.
//! Errors are JSON documents `{"error": code, "message": text, ...}`.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use serde_json::{json, Value};
use tag_core::game::{BestMove, Outcome};
use tag_core::{initial_state, GameState, Horizon, Natural, Rational, Solver};

use crate::commands;

pub const DEFAULT_IDLE: Duration = Duration::from_secs(30 * 60);
const MAX_SEQUENCE_COUNT: usize = 10_000;

#[derive(Clone, Debug, PartialEq)]
pub struct Response {
    pub status: u16,
    pub body: Value,
}

impl Response {
    fn ok(body: Value) -> Self {
        Response { status: 200, body }
    }

    fn error(status: u16, code: &str, message: impl Into<String>) -> Self {
        Response {
            status,
            body: json!({ "error": code, "message": message.into() }),
        }
    }
}

struct Session {
    solver: Solver,
    state: GameState,
    winner: Option<&'static str>,
    last_used: Instant,
}

pub struct Api {
    sessions: Mutex<HashMap<String, Arc<Mutex<Session>>>>,
    next_id: AtomicU64,
    idle: Duration,
}

impl Default for Api {
    fn default() -> Self {
        Api::new(DEFAULT_IDLE)
    }
}

fn state_json(state: &GameState) -> Value {
    let legal = if state.is_terminal() {
        Value::Null
    } else {
        json!({ "min": "1", "max": state.legal_max().to_string() })
    };
    json!({
        "alpha": state.alpha,
        "pile": state.pile.to_string(),
        "cap": state.cap.to_string(),
        "legal_range": legal,
    })
}

fn outcome_str(o: Outcome) -> &'static str {
    match o {
        Outcome::N => "N",
        Outcome::P => "P",
    }
}

/// Accepts a JSON string or nonnegative integer.
fn natural_field(body: &Value, key: &str) -> Result<Natural, Response> {
    let bad = || Response::error(400, "bad_request", format!("`{key}` must be a nonnegative integer"));
    match &body[key] {
        Value::String(s) => s.trim().parse().map_err(|_| bad()),
        Value::Number(n) => n.as_u64().map(Natural::from).ok_or_else(bad),
        _ => Err(bad()),
    }
}

fn alpha_from(text: Option<&str>) -> Result<Rational, Response> {
    let text = text.ok_or_else(|| Response::error(400, "bad_request", "missing `alpha`"))?;
    let alpha: Rational = text
        .parse()
        .map_err(|e: tag_core::TagError| Response::error(400, "bad_alpha", e.to_string()))?;
    if alpha < Rational::one() {
        return Err(Response::error(400, "bad_alpha", format!("alpha must be at least 1, got {alpha}")));
    }
    Ok(alpha)
}

impl Api {
    pub fn new(idle: Duration) -> Self {
        Api {
            sessions: Mutex::new(HashMap::new()),
            next_id: AtomicU64::new(1),
            idle,
        }
    }

    /// Number of live sessions, after evicting idle ones.
    pub fn session_count(&self) -> usize {
        self.evict();
        self.sessions.lock().unwrap().len()
    }

    fn evict(&self) {
        let now = Instant::now();
        let mut sessions = self.sessions.lock().unwrap();
        sessions.retain(|_, s| {
            // A session busy in another request is in use, not idle.
            match s.try_lock() {
                Ok(s) => now.duration_since(s.last_used) < self.idle,
                Err(_) => true,
            }
        });
    }

    fn session(&self, id: Option<&str>) -> Result<Arc<Mutex<Session>>, Response> {
        let id = id.ok_or_else(|| Response::error(400, "bad_request", "missing `session_id`"))?;
        self.evict();
        self.sessions
            .lock()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| Response::error(404, "unknown_session", format!("no session `{id}`")))
    }

    /// Dispatches one request. `url` is the path with its query string.
    pub fn handle(&self, method: &str, url: &str, body: &str) -> Response {
        let (path, query) = url.split_once('?').unwrap_or((url, ""));
        let query: HashMap<String, String> = url::form_urlencoded::parse(query.as_bytes())
            .into_owned()
            .collect();
        let q = |k: &str| query.get(k).map(String::as_str);
        let result = match (method, path) {
            ("GET", "/api/sequence") => self.sequence(q("alpha"), q("count")),
            ("POST", "/api/game/new") => parse_body(body).and_then(|b| self.new_game(&b)),
            ("POST", "/api/game/move") => parse_body(body).and_then(|b| self.play_move(&b)),
            ("GET", "/api/game/hint") => self.hint(q("session_id")),
            (_, "/api/sequence" | "/api/game/new" | "/api/game/move" | "/api/game/hint") => Err(
                Response::error(405, "method_not_allowed", format!("{method} not allowed on {path}")),
            ),
            _ => Err(Response::error(404, "not_found", format!("no route {path}"))),
        };
        result.unwrap_or_else(|e| e)
    }

    fn sequence(&self, alpha: Option<&str>, count: Option<&str>) -> Result<Response, Response> {
        let alpha = alpha_from(alpha)?;
        let count: usize = match count {
            None => 20,
            Some(c) => c
                .parse()
                .map_err(|_| Response::error(400, "bad_request", "`count` must be a positive integer"))?,
        };
        if count == 0 || count > MAX_SEQUENCE_COUNT {
            return Err(Response::error(
                400,
                "bad_request",
                format!("`count` must be between 1 and {MAX_SEQUENCE_COUNT}"),
            ));
        }
        let doc = commands::sequence(&alpha, Horizon::Terms(count))
            .map_err(|e| Response::error(400, "bad_request", e.to_string()))?;
        Ok(Response::ok(serde_json::to_value(doc).expect("document serializes")))
    }

    fn new_game(&self, body: &Value) -> Result<Response, Response> {
        let alpha = alpha_from(body["alpha"].as_str())?;
        let pile = natural_field(body, "pile")?;
        let mut solver =
            Solver::new(&alpha).map_err(|e| Response::error(400, "bad_alpha", e.to_string()))?;
        let state = initial_state(&alpha, &pile);
        let class = solver.classify(&state);
        let winner = state.is_terminal().then_some("engine");
        let id = format!("g{:06}", self.next_id.fetch_add(1, Ordering::Relaxed));
        let body = json!({
            "session_id": id,
            "state": state_json(&state),
            "outcome_class": outcome_str(class.outcome),
            "finished": winner.is_some(),
            "winner": winner,
        });
        let session = Session {
            solver,
            state,
            winner,
            last_used: Instant::now(),
        };
        self.evict();
        self.sessions
            .lock()
            .unwrap()
            .insert(id, Arc::new(Mutex::new(session)));
        Ok(Response::ok(body))
    }

    fn play_move(&self, body: &Value) -> Result<Response, Response> {
        let session = self.session(body["session_id"].as_str())?;
        let take = natural_field(body, "take")?;
        let mut s = session.lock().unwrap();
        s.last_used = Instant::now();
        if s.winner.is_some() {
            return Err(Response::error(409, "game_over", "the game has finished"));
        }
        if !s.state.is_legal(&take) {
            let mut r = Response::error(
                400,
                "illegal_move",
                format!("take must be between 1 and {}", s.state.legal_max()),
            );
            r.body["legal_range"] = json!({ "min": "1", "max": s.state.legal_max().to_string() });
            r.body["state"] = state_json(&s.state);
            return Err(r);
        }
        s.state = s.state.apply(&take).expect("checked legal");
        let mut reply = Value::Null;
        let mut reply_theory = false;
        if s.state.is_terminal() {
            s.winner = Some("human");
        } else {
            let state = s.state.clone();
            let best = s.solver.best_move(&state);
            if let BestMove::Winning { basis, .. } = &best {
                reply_theory = *basis == tag_core::game::Basis::TheoryDerived;
            }
            let m = best.take().cloned().unwrap_or_else(|| Natural::from(1u32));
            s.state = state.apply(&m).expect("engine moves are legal");
            reply = Value::String(m.to_string());
            if s.state.is_terminal() {
                s.winner = Some("engine");
            }
        }
        let state = s.state.clone();
        let class = s.solver.classify(&state);
        Ok(Response::ok(json!({
            "state": state_json(&state),
            "human_move": take.to_string(),
            "engine_reply_move": reply,
            "engine_reply_theory_derived": reply_theory,
            "outcome_class": outcome_str(class.outcome),
            "finished": s.winner.is_some(),
            "winner": s.winner,
        })))
    }

    fn hint(&self, id: Option<&str>) -> Result<Response, Response> {
        let session = self.session(id)?;
        let mut s = session.lock().unwrap();
        s.last_used = Instant::now();
        let state = s.state.clone();
        if state.is_terminal() {
            return Ok(Response::ok(json!({
                "move": Value::Null,
                "zeckendorf_parts": [],
                "outcome_class": "P",
                "explanation": "no legal move remains",
            })));
        }
        let parts = s
            .solver
            .zeckendorf(&state.pile)
            .map_err(|e| Response::error(500, "internal", e.to_string()))?
            .parts;
        let smallest = parts[0].clone();
        let parts: Vec<String> = parts.iter().map(ToString::to_string).collect();
        let (mv, class, explanation) = match s.solver.best_move(&state) {
            BestMove::Winning { take, .. } if take == smallest => (
                take,
                "N",
                format!("take the smallest Zeckendorf part, {smallest}; it fits under the cap"),
            ),
            BestMove::Winning { take, .. } => (
                take,
                "N",
                "winning move found by game-tree search".to_string(),
            ),
            BestMove::Resign { .. } => (
                Natural::from(1u32),
                "P",
                format!(
                    "losing position: the smallest Zeckendorf part {smallest} exceeds the cap {}; take 1 to stall",
                    state.legal_max()
                ),
            ),
        };
        Ok(Response::ok(json!({
            "move": mv.to_string(),
            "zeckendorf_parts": parts,
            "outcome_class": class,
            "explanation": explanation,
        })))
    }
}

fn parse_body(body: &str) -> Result<Value, Response> {
    let value: Value = serde_json::from_str(body)
        .map_err(|e| Response::error(400, "bad_request", format!("invalid JSON body: {e}")))?;
    if value.is_object() {
        Ok(value)
    } else {
        Err(Response::error(400, "bad_request", "body must be a JSON object"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn idle_sessions_are_evicted() {
        let api = Api::new(Duration::from_millis(0));
        let r = api.handle("POST", "/api/game/new", r#"{"alpha":"2","pile":10}"#);
        assert_eq!(r.status, 200);
        assert_eq!(api.session_count(), 0);
        let id = r.body["session_id"].as_str().unwrap();
        let r = api.handle("GET", &format!("/api/game/hint?session_id={id}"), "");
        assert_eq!(r.status, 404);
    }

    #[test]
    fn session_ids_are_sequential() {
        let api = Api::default();
        let a = api.handle("POST", "/api/game/new", r#"{"alpha":"2","pile":10}"#);
        let b = api.handle("POST", "/api/game/new", r#"{"alpha":"2","pile":10}"#);
        assert_eq!(a.body["session_id"], "g000001");
        assert_eq!(b.body["session_id"], "g000002");
    }
}
