//! JSON-over-HTTP sessions: a surface plus its flip history.
//!
//! Each session sits behind its own lock; the store lock is only held to
//! look sessions up, insert them, or evict the least recently used one.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use dgonlab::algebra::ginzburg;
use dgonlab::mutation::{mutate, vertex_of};
use dgonlab::qsp::build_qsp;
use dgonlab::reduce::{arrow_cap, verify_commute_capped};
use dgonlab::{IsoMode, MutationMode, Surface};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::sync::Mutex;

use crate::commands::surface_value;
use crate::input::Failure;
use crate::views::{ginzburg_summary, mutation_view, qsp_view, render, to_value};

#[derive(Clone, Debug)]
pub struct ServerConfig {
    pub max_sessions: usize,
    pub state_dir: Option<PathBuf>,
    /// Arrow cap for isomorphism searches; larger inputs get 413.
    pub cap_arrows: usize,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig { max_sessions: 64, state_dir: None, cap_arrows: arrow_cap() }
    }
}

#[derive(Clone, Debug, Serialize)]
struct HistoryEntry {
    action: &'static str,
    arc: String,
    new_arc: String,
    #[serde(skip)]
    before: Surface,
}

struct Session {
    id: String,
    initial: Surface,
    current: Surface,
    history: Vec<HistoryEntry>,
}

impl Session {
    /// Re-run the recorded flips from the initial surface.
    fn replay(&self) -> Result<Surface, Failure> {
        let mut s = self.initial.clone();
        for h in &self.history {
            s = s.flip(&h.arc)?.0;
        }
        Ok(s)
    }
}

#[derive(Default)]
struct Store {
    sessions: HashMap<String, (u64, Arc<Mutex<Session>>)>,
    tick: u64,
    next_id: u64,
}

#[derive(Clone)]
pub struct AppState {
    config: Arc<ServerConfig>,
    store: Arc<std::sync::Mutex<Store>>,
}

pub struct ApiError(StatusCode, Failure);

impl From<Failure> for ApiError {
    fn from(f: Failure) -> Self {
        let status = match f.code.as_str() {
            "parse" | "invalid_surface" | "no_d_angulation" => StatusCode::BAD_REQUEST,
            "unknown_session" => StatusCode::NOT_FOUND,
            "unknown_arc" | "unknown_vertex" | "self_folded_triangle" | "degree_zero_loop" | "nothing_to_undo" => {
                StatusCode::CONFLICT
            }
            "too_large" => StatusCode::PAYLOAD_TOO_LARGE,
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        };
        ApiError(status, f)
    }
}

impl From<dgonlab::Error> for ApiError {
    fn from(e: dgonlab::Error) -> Self {
        Failure::from(e).into()
    }
}

fn respond(status: StatusCode, v: &Value) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], render(v)).into_response()
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        respond(self.0, &self.1.to_json())
    }
}

type ApiResult = Result<Response, ApiError>;

fn parse_body<T: for<'de> Deserialize<'de>>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body)
        .map_err(|e| ApiError(StatusCode::BAD_REQUEST, Failure::new("parse", e.to_string(), json!({ "at": "body" }))))
}

impl AppState {
    /// Fresh state, reloading any snapshots found in the state directory.
    pub fn new(config: ServerConfig) -> std::io::Result<AppState> {
        let state = AppState { config: Arc::new(config), store: Arc::default() };
        if let Some(dir) = &state.config.state_dir {
            std::fs::create_dir_all(dir)?;
            let mut files: Vec<PathBuf> =
                std::fs::read_dir(dir)?.filter_map(|e| e.ok().map(|e| e.path())).filter(|p| p.extension().is_some_and(|x| x == "json")).collect();
            files.sort();
            for path in files {
                let (Some(id), Ok(text)) = (path.file_stem().and_then(|s| s.to_str()), std::fs::read_to_string(&path)) else {
                    continue;
                };
                if let Ok(surface) = Surface::from_json(&text) {
                    state.insert(id.to_string(), surface);
                }
            }
        }
        Ok(state)
    }

    fn insert(&self, id: String, surface: Surface) -> Arc<Mutex<Session>> {
        let session = Arc::new(Mutex::new(Session { id: id.clone(), initial: surface.clone(), current: surface, history: Vec::new() }));
        let mut store = self.store.lock().expect("store lock");
        if let Some(n) = id.strip_prefix('s').and_then(|n| n.parse::<u64>().ok()) {
            store.next_id = store.next_id.max(n);
        }
        store.tick += 1;
        let tick = store.tick;
        store.sessions.insert(id, (tick, session.clone()));
        while store.sessions.len() > self.config.max_sessions.max(1) {
            let oldest = store.sessions.iter().min_by_key(|(_, (t, _))| *t).map(|(k, _)| k.clone()).expect("non-empty");
            store.sessions.remove(&oldest);
        }
        session
    }

    fn create(&self, surface: Surface) -> Arc<Mutex<Session>> {
        let id = {
            let mut store = self.store.lock().expect("store lock");
            store.next_id += 1;
            format!("s{}", store.next_id)
        };
        self.insert(id, surface)
    }

    fn get(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        let mut store = self.store.lock().expect("store lock");
        store.tick += 1;
        let tick = store.tick;
        match store.sessions.get_mut(id) {
            Some(entry) => {
                entry.0 = tick;
                Ok(entry.1.clone())
            }
            None => Err(Failure::new("unknown_session", format!("unknown session {id}"), json!({ "session": id })).into()),
        }
    }

    fn snapshot(&self, session: &Session) {
        if let Some(dir) = &self.config.state_dir {
            // Snapshots are best effort; the in-memory session stays authoritative.
            let _ = std::fs::write(dir.join(format!("{}.json", session.id)), session.current.to_json());
        }
    }
}

fn state_view(session: &Session) -> Result<Value, ApiError> {
    let s = &session.current;
    let qsp = build_qsp(s)?;
    let gamma = ginzburg(&qsp.quiver, &qsp.potential)?;
    Ok(json!({
        "id": session.id,
        "surface": surface_value(s),
        "report": to_value(&s.validate()?),
        "arcs": s.arcs(),
        "history": session.history,
        "qsp": qsp_view(&qsp),
        "ginzburg": to_value(&ginzburg_summary(&gamma)),
    }))
}

async fn create_session(State(app): State<AppState>, body: Bytes) -> ApiResult {
    let text = std::str::from_utf8(&body)
        .map_err(|e| ApiError(StatusCode::BAD_REQUEST, Failure::new("parse", e.to_string(), Value::Null)))?;
    let surface = Surface::from_json(text).map_err(|e| ApiError(StatusCode::BAD_REQUEST, e.into()))?;
    let report = surface.validate().map_err(|e| ApiError(StatusCode::BAD_REQUEST, e.into()))?;
    let session = app.create(surface);
    let session = session.lock().await;
    app.snapshot(&session);
    Ok(respond(StatusCode::CREATED, &json!({ "id": session.id, "report": report })))
}

async fn get_session(State(app): State<AppState>, Path(id): Path<String>) -> ApiResult {
    let session = app.get(&id)?;
    let session = session.lock().await;
    Ok(respond(StatusCode::OK, &state_view(&session)?))
}

#[derive(Deserialize)]
struct FlipBody {
    arc: String,
}

async fn flip(State(app): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult {
    let FlipBody { arc } = parse_body(&body)?;
    let session = app.get(&id)?;
    let mut session = session.lock().await;
    let (next, new_arc) = session.current.flip(&arc)?;
    let before = std::mem::replace(&mut session.current, next);
    session.history.push(HistoryEntry { action: "flip", arc, new_arc, before });
    app.snapshot(&session);
    Ok(respond(StatusCode::OK, &state_view(&session)?))
}

async fn undo(State(app): State<AppState>, Path(id): Path<String>) -> ApiResult {
    let session = app.get(&id)?;
    let mut session = session.lock().await;
    let last = session
        .history
        .pop()
        .ok_or_else(|| Failure::new("nothing_to_undo", "history is empty", json!({ "session": id })))?;
    session.current = last.before;
    debug_assert_eq!(session.replay().ok().as_ref(), Some(&session.current));
    app.snapshot(&session);
    Ok(respond(StatusCode::OK, &state_view(&session)?))
}

async fn get_qsp(State(app): State<AppState>, Path(id): Path<String>) -> ApiResult {
    let session = app.get(&id)?;
    let surface = session.lock().await.current.clone();
    Ok(respond(StatusCode::OK, &qsp_view(&build_qsp(&surface)?)))
}

#[derive(Deserialize)]
struct MutateBody {
    vertex: String,
    #[serde(default = "surface_mode")]
    mode: MutationMode,
}

fn surface_mode() -> MutationMode {
    MutationMode::Surface
}

async fn mutate_session(State(app): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult {
    let MutateBody { vertex, mode } = parse_body(&body)?;
    let session = app.get(&id)?;
    let surface = session.lock().await.current.clone();
    let value = tokio::task::spawn_blocking(move || -> Result<Value, ApiError> {
        let q = build_qsp(&surface)?;
        let v = vertex_of(&q.quiver, &vertex)?;
        Ok(mutation_view(&mutate(&q, v, mode)?))
    })
    .await
    .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, Failure::new("internal", e.to_string(), Value::Null)))??;
    Ok(respond(StatusCode::OK, &value))
}

#[derive(Deserialize)]
struct VerifyBody {
    arc: String,
    #[serde(default)]
    mode: IsoMode,
}

async fn verify(State(app): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult {
    let VerifyBody { arc, mode } = parse_body(&body)?;
    let session = app.get(&id)?;
    let surface = session.lock().await.current.clone();
    let cap = app.config.cap_arrows;
    let report = tokio::task::spawn_blocking(move || verify_commute_capped(&surface, &arc, mode, cap))
        .await
        .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, Failure::new("internal", e.to_string(), Value::Null)))??;
    Ok(respond(StatusCode::OK, &to_value(&report.without_timings())))
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/flip", post(flip))
        .route("/sessions/{id}/undo", post(undo))
        .route("/sessions/{id}/qsp", get(get_qsp))
        .route("/sessions/{id}/mutate", post(mutate_session))
        .route("/sessions/{id}/verify", post(verify))
        .with_state(state)
}

pub async fn serve(addr: &str, config: ServerConfig) -> std::io::Result<()> {
    let app = router(AppState::new(config)?);
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on {}", listener.local_addr()?);
    axum::serve(listener, app).await
}
