use std::path::PathBuf;
use std::process::Command;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use dgonlab::Surface;
use dgonlab_cli::server::{router, AppState, ServerConfig};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(format!("{name}.json"))
}

fn fixture(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap()
}

fn app_with(config: ServerConfig) -> Router {
    router(AppState::new(config).unwrap())
}

fn app() -> Router {
    app_with(ServerConfig::default())
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<String>) -> (StatusCode, String) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map_or_else(Body::empty, Body::from))
        .unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let bytes = res.into_body().collect().await.unwrap().to_bytes();
    (status, String::from_utf8(bytes.to_vec()).unwrap())
}

async fn call_json(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let (status, text) = call(app, method, uri, body.map(|b| b.to_string())).await;
    (status, serde_json::from_str(&text).unwrap_or_else(|e| panic!("{e}: {text}")))
}

async fn create(app: &Router, name: &str) -> String {
    let (status, text) = call(app, "POST", "/sessions", Some(fixture(name))).await;
    assert_eq!(status, StatusCode::CREATED, "{text}");
    let v: Value = serde_json::from_str(&text).unwrap();
    v["id"].as_str().unwrap().to_string()
}

fn cli(args: &[&str]) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_dgonlab")).args(args).output().unwrap();
    String::from_utf8(out.stdout).unwrap()
}

#[tokio::test]
async fn create_returns_the_topology_report() {
    let app = app();
    let (status, v) = call_json(&app, "POST", "/sessions", Some(serde_json::from_str(&fixture("ann4")).unwrap())).await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!((v["report"]["m"].as_u64(), v["report"]["n"].as_u64()), (Some(3), Some(3)));
    let again = create(&app, "ann4").await;
    assert_ne!(v["id"].as_str().unwrap(), again);
}

#[tokio::test]
async fn malformed_surfaces_are_bad_requests() {
    let app = app();
    let (status, v) = call_json(&app, "POST", "/sessions", None).await;
    assert_eq!((status, v["code"].as_str()), (StatusCode::BAD_REQUEST, Some("parse")));
    let (status, _) = call(&app, "POST", "/sessions", Some("{\"d\": 3".into())).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = call(&app, "POST", "/sessions", Some(r#"{"d":3,"faces":[[{"label":"x","kind":"arc","side":"+"}]]}"#.into())).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn unknown_sessions_are_not_found() {
    let app = app();
    for (method, uri) in [("GET", "/sessions/nope"), ("GET", "/sessions/nope/qsp"), ("POST", "/sessions/nope/undo")] {
        let (status, v) = call_json(&app, method, uri, None).await;
        assert_eq!((status, v["code"].as_str()), (StatusCode::NOT_FOUND, Some("unknown_session")), "{uri}");
    }
    let (status, _) = call_json(&app, "POST", "/sessions/nope/flip", Some(json!({ "arc": "1" }))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn flip_then_undo_restores_the_initial_state() {
    let app = app();
    let id = create(&app, "a3").await;
    let (_, initial) = call(&app, "GET", &format!("/sessions/{id}"), None).await;
    let (status, flipped) = call_json(&app, "POST", &format!("/sessions/{id}/flip"), Some(json!({ "arc": "1" }))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(flipped["history"].as_array().unwrap().len(), 1);
    assert_eq!(flipped["qsp"]["arrows"].as_array().unwrap().len(), 4);
    assert!(flipped["qsp"]["potential"].as_array().unwrap().is_empty());
    assert_eq!(flipped["ginzburg"]["d_squared_zero"], true);
    let (status, undone) = call(&app, "POST", &format!("/sessions/{id}/undo"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(undone, initial);
    let (status, v) = call_json(&app, "POST", &format!("/sessions/{id}/undo"), None).await;
    assert_eq!((status, v["code"].as_str()), (StatusCode::CONFLICT, Some("nothing_to_undo")));
}

#[tokio::test]
async fn flipping_d_minus_1_times_returns_to_the_start() {
    let app = app();
    let id = create(&app, "disk4").await;
    let start = Surface::from_json(&fixture("disk4")).unwrap();
    let mut arc = "1".to_string();
    let mut state = Value::Null;
    for _ in 0..start.d - 1 {
        let (status, v) = call_json(&app, "POST", &format!("/sessions/{id}/flip"), Some(json!({ "arc": arc }))).await;
        assert_eq!(status, StatusCode::OK);
        arc = v["history"].as_array().unwrap().last().unwrap()["new_arc"].as_str().unwrap().to_string();
        state = v;
    }
    let end = Surface::from_json(&state["surface"].to_string()).unwrap();
    assert_eq!(end.strip_generations().canonical(), start.canonical());
}

#[tokio::test]
async fn invalid_arcs_conflict() {
    let app = app();
    let id = create(&app, "a3").await;
    let (status, v) = call_json(&app, "POST", &format!("/sessions/{id}/flip"), Some(json!({ "arc": "99" }))).await;
    assert_eq!((status, v["code"].as_str()), (StatusCode::CONFLICT, Some("unknown_arc")));
    let (status, _) = call_json(&app, "POST", &format!("/sessions/{id}/flip"), Some(json!({ "wrong": 1 }))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn mutation_modes_on_a3() {
    let app = app();
    let id = create(&app, "a3").await;
    let uri = format!("/sessions/{id}/mutate");
    let (status, v) = call_json(&app, "POST", &uri, Some(json!({ "vertex": "1", "mode": "surface" }))).await;
    assert_eq!(status, StatusCode::OK);
    assert!(v["potential"].as_array().unwrap().is_empty());
    let (_, v) = call_json(&app, "POST", &uri, Some(json!({ "vertex": "1", "mode": "oppermann" }))).await;
    assert_eq!(v["potential"].as_array().unwrap().len(), 2);
    let (status, v) = call_json(&app, "POST", &uri, Some(json!({ "vertex": "9" }))).await;
    assert_eq!((status, v["code"].as_str()), (StatusCode::CONFLICT, Some("unknown_vertex")));
}

#[tokio::test]
async fn self_folded_verification_passes() {
    let app = app();
    let id = create(&app, "self4").await;
    let (status, v) =
        call_json(&app, "POST", &format!("/sessions/{id}/verify"), Some(json!({ "arc": "1", "mode": "sign-relaxed" }))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["passed"], true);
    assert!(!v["traces"][0]["steps"].as_array().unwrap().is_empty());
}

#[tokio::test]
async fn oversize_verification_is_refused_with_the_cap() {
    let app = app_with(ServerConfig { cap_arrows: 3, ..Default::default() });
    let id = create(&app, "disk4").await;
    let (status, v) = call_json(&app, "POST", &format!("/sessions/{id}/verify"), Some(json!({ "arc": "1" }))).await;
    assert_eq!(status, StatusCode::PAYLOAD_TOO_LARGE);
    assert_eq!(v["context"]["cap"], 3);
}

#[tokio::test]
async fn strict_verification_never_fails_with_a_server_error() {
    let app = app();
    for name in ["a3", "ann4", "pent5", "disk4", "self4"] {
        let id = create(&app, name).await;
        for arc in Surface::from_json(&fixture(name)).unwrap().arcs() {
            let (status, _) =
                call(&app, "POST", &format!("/sessions/{id}/verify"), Some(json!({ "arc": arc, "mode": "strict" }).to_string()))
                    .await;
            assert!(status == StatusCode::OK, "{name} {arc}: {status}");
        }
    }
}

#[tokio::test]
async fn payloads_match_the_command_line() {
    let app = app();
    let id = create(&app, "a3").await;
    let a3 = fixture_path("a3");
    let a3 = a3.to_str().unwrap();
    let (_, qsp) = call(&app, "GET", &format!("/sessions/{id}/qsp"), None).await;
    assert_eq!(qsp, cli(&["qsp", a3]));
    let (_, mutated) = call(&app, "POST", &format!("/sessions/{id}/mutate"), Some(r#"{"vertex":"1","mode":"surface"}"#.into())).await;
    assert_eq!(mutated, cli(&["mutate", a3, "--arc", "1"]));
    let (_, verified) = call(&app, "POST", &format!("/sessions/{id}/verify"), Some(r#"{"arc":"1"}"#.into())).await;
    assert_eq!(verified, cli(&["verify-commute", a3, "--arc", "1"]));
}

#[tokio::test]
async fn least_recently_used_session_is_evicted() {
    let app = app_with(ServerConfig { max_sessions: 2, ..Default::default() });
    let first = create(&app, "a3").await;
    let second = create(&app, "a3").await;
    call(&app, "GET", &format!("/sessions/{first}"), None).await;
    let _third = create(&app, "a3").await;
    assert_eq!(call(&app, "GET", &format!("/sessions/{first}"), None).await.0, StatusCode::OK);
    assert_eq!(call(&app, "GET", &format!("/sessions/{second}"), None).await.0, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn state_dir_snapshots_reload() {
    let dir = tempfile::tempdir().unwrap();
    let config = ServerConfig { state_dir: Some(dir.path().to_path_buf()), ..Default::default() };
    let app = app_with(config.clone());
    let id = create(&app, "a3").await;
    let (_, flipped) = call_json(&app, "POST", &format!("/sessions/{id}/flip"), Some(json!({ "arc": "2" }))).await;
    let reloaded = app_with(config);
    let (status, v) = call_json(&reloaded, "GET", &format!("/sessions/{id}"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["surface"], flipped["surface"]);
    let next = create(&reloaded, "a3").await;
    assert_ne!(next, id);
}
