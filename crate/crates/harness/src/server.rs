//! The session protocol over HTTP.

use std::collections::HashMap;
use std::net::{Ipv4Addr, SocketAddr};
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use querygames::games::GameSpec;
use serde::Deserialize;
use serde_json::{json, Value};
use tokio::net::TcpListener;

use crate::session::{parse_answer, Message, Session};

pub const DEFAULT_PORT: u16 = 7878;

type Shared = Arc<Mutex<Session>>;

#[derive(Clone, Default)]
pub struct AppState {
    sessions: Arc<Mutex<HashMap<String, Shared>>>,
    next: Arc<Mutex<u64>>,
}

impl AppState {
    fn insert(&self, s: Session) -> String {
        let mut next = self.next.lock().unwrap();
        *next += 1;
        let id = format!("s{}{:08x}", *next, rand::random::<u32>());
        self.sessions.lock().unwrap().insert(id.clone(), Arc::new(Mutex::new(s)));
        id
    }

    fn get(&self, id: &str) -> Option<Shared> {
        self.sessions.lock().unwrap().get(id).cloned()
    }
}

fn reply(code: StatusCode, v: Value) -> Response {
    (code, Json(v)).into_response()
}

fn error(code: StatusCode, msg: impl ToString) -> Response {
    reply(code, serde_json::to_value(Message::error(msg)).unwrap())
}

fn with_id(id: &str, m: &Message) -> Value {
    let mut v = serde_json::to_value(m).unwrap();
    v["session_id"] = json!(id);
    v
}

fn not_found(id: &str) -> Response {
    error(StatusCode::NOT_FOUND, format!("no session {id:?}"))
}

async fn create(State(st): State<AppState>, body: Bytes) -> Response {
    let spec: GameSpec = match serde_json::from_slice(&body) {
        Ok(s) => s,
        Err(e) => return error(StatusCode::BAD_REQUEST, format!("malformed game: {e}")),
    };
    match Session::new(spec) {
        Ok(s) => {
            let m = s.current();
            let id = st.insert(s);
            reply(StatusCode::CREATED, with_id(&id, &m))
        }
        Err(e) => error(StatusCode::BAD_REQUEST, e),
    }
}

#[derive(Deserialize)]
struct Confirm {
    #[serde(rename = "type")]
    kind: String,
    codeword: Vec<u32>,
}

async fn answer(State(st): State<AppState>, Path(id): Path<String>, body: Bytes) -> Response {
    let Some(s) = st.get(&id) else { return not_found(&id) };
    let Ok(text) = std::str::from_utf8(&body) else {
        return error(StatusCode::BAD_REQUEST, "malformed answer: body is not UTF-8");
    };
    let mut s = s.lock().unwrap();
    if let Ok(c) = serde_json::from_str::<Confirm>(text) {
        if c.kind == "confirm" {
            let m = s.confirm(&c.codeword);
            return reply(StatusCode::OK, with_id(&id, &m));
        }
    }
    match parse_answer(text).and_then(|a| s.answer(a)) {
        Ok(m) => reply(StatusCode::OK, with_id(&id, &m)),
        Err(e) => {
            let mut v = with_id(&id, &Message::error(&e));
            v["current"] = serde_json::to_value(s.current()).unwrap();
            reply(StatusCode::UNPROCESSABLE_ENTITY, v)
        }
    }
}

async fn show(State(st): State<AppState>, Path(id): Path<String>) -> Response {
    let Some(s) = st.get(&id) else { return not_found(&id) };
    let s = s.lock().unwrap();
    let v = json!({
        "session_id": id,
        "spec": s.spec(),
        "state": s.status(),
        "message": s.current(),
        "transcript": s.transcript(),
        "consistency_checked": s.checking(),
    });
    reply(StatusCode::OK, v)
}

async fn remove(State(st): State<AppState>, Path(id): Path<String>) -> Response {
    match st.sessions.lock().unwrap().remove(&id) {
        Some(_) => StatusCode::NO_CONTENT.into_response(),
        None => not_found(&id),
    }
}

pub fn router() -> Router {
    Router::new()
        .route("/sessions", post(create))
        .route("/sessions/{id}", get(show).delete(remove))
        .route("/sessions/{id}/answer", post(answer))
        .with_state(AppState::default())
}

/// Binds on loopback; port 0 picks a free port.
pub async fn bind(port: u16) -> std::io::Result<TcpListener> {
    TcpListener::bind(SocketAddr::from((Ipv4Addr::LOCALHOST, port))).await
}

pub async fn serve(listener: TcpListener) -> std::io::Result<()> {
    axum::serve(listener, router()).await
}

/// The flag, else `QUERYGAMES_PORT`, else the default.
pub fn resolve_port(flag: Option<u16>, env: Option<&str>) -> Result<u16, String> {
    if let Some(p) = flag {
        return Ok(p);
    }
    match env {
        Some(v) => v.trim().parse().map_err(|_| format!("QUERYGAMES_PORT={v:?} is not a port")),
        None => Ok(DEFAULT_PORT),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn port_precedence() {
        assert_eq!(resolve_port(Some(9000), Some("9100")), Ok(9000));
        assert_eq!(resolve_port(None, Some("9100")), Ok(9100));
        assert_eq!(resolve_port(None, None), Ok(DEFAULT_PORT));
        assert!(resolve_port(None, Some("x")).is_err());
    }
}
