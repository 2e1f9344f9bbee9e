//! Websocket and HTTP transport for [`Connection`].
//!
//! Routes:
//! - `GET /ws`: the drawing protocol. Each text frame holds one or more
//!   newline-separated JSON messages.
//! - `GET /health`: `{"status":"ok","version":..,"uptime_s":..}`.
//! - `GET /sessions/{id}/session.json | poses.jsonl | drawing.obj`: downloads
//!   for a live connection (its id is sent in the `hello` reply).
//! - anything else: static files from the UI directory, if configured.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde_json::json;
use tokio::sync::{mpsc, oneshot};
use tower_http::services::ServeDir;

use super::{Connection, ServerMessage};
use crate::io::{join_strokes, write_poses};
use crate::obj::to_obj;
use crate::session::SessionConfig;

#[derive(Debug, Clone, Default)]
pub struct ServerOptions {
    pub session: SessionConfig,
    pub static_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy)]
enum Export {
    Session,
    Poses,
    Obj,
}

struct ExportRequest {
    kind: Export,
    reply: oneshot::Sender<String>,
}

struct AppState {
    started: Instant,
    session: SessionConfig,
    next_id: AtomicU64,
    exports: Mutex<HashMap<u64, mpsc::Sender<ExportRequest>>>,
}

pub fn router(opts: ServerOptions) -> Router {
    let state = Arc::new(AppState {
        started: Instant::now(),
        session: opts.session,
        next_id: AtomicU64::new(1),
        exports: Mutex::new(HashMap::new()),
    });
    let app = Router::new()
        .route("/ws", get(ws_upgrade))
        .route("/health", get(health))
        .route("/sessions/{id}/{file}", get(download))
        .with_state(state);
    match opts.static_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app,
    }
}

/// Serves until the listener fails.
pub async fn serve(listener: tokio::net::TcpListener, opts: ServerOptions) -> std::io::Result<()> {
    axum::serve(listener, router(opts)).await
}

async fn health(State(state): State<Arc<AppState>>) -> Json<serde_json::Value> {
    Json(json!({
        "status": "ok",
        "version": env!("CARGO_PKG_VERSION"),
        "uptime_s": state.started.elapsed().as_secs_f64(),
    }))
}

async fn download(State(state): State<Arc<AppState>>, Path((id, file)): Path<(u64, String)>) -> Response {
    let (kind, mime) = match file.as_str() {
        "session.json" => (Export::Session, "application/json"),
        "poses.jsonl" => (Export::Poses, "application/x-ndjson"),
        "drawing.obj" => (Export::Obj, "model/obj"),
        _ => return StatusCode::NOT_FOUND.into_response(),
    };
    let sender = state.exports.lock().expect("export registry").get(&id).cloned();
    let Some(sender) = sender else {
        return (StatusCode::NOT_FOUND, format!("no live session {id}")).into_response();
    };
    let (reply, rx) = oneshot::channel();
    if sender.send(ExportRequest { kind, reply }).await.is_err() {
        return (StatusCode::NOT_FOUND, format!("session {id} closed")).into_response();
    }
    match rx.await {
        Ok(body) => ([(header::CONTENT_TYPE, mime)], body).into_response(),
        Err(_) => (StatusCode::NOT_FOUND, format!("session {id} closed")).into_response(),
    }
}

async fn ws_upgrade(ws: WebSocketUpgrade, State(state): State<Arc<AppState>>) -> Response {
    ws.on_upgrade(move |socket| client_loop(socket, state))
}

fn export(conn: &Connection, kind: Export) -> String {
    let s = conn.session();
    match kind {
        Export::Session => s.save(),
        Export::Poses => write_poses(&join_strokes(s.strokes().iter().map(|k| k.poses.as_slice()))),
        Export::Obj => to_obj(s.ribbons()),
    }
}

async fn send_all(socket: &mut WebSocket, out: Vec<ServerMessage>) -> bool {
    for m in out {
        let text = serde_json::to_string(&m).expect("server message serializes");
        if socket.send(Message::Text(text.into())).await.is_err() {
            return false;
        }
    }
    true
}

async fn client_loop(mut socket: WebSocket, state: Arc<AppState>) {
    let id = state.next_id.fetch_add(1, Ordering::Relaxed);
    let (tx, mut requests) = mpsc::channel(8);
    state.exports.lock().expect("export registry").insert(id, tx);
    let mut conn = match Connection::new(state.session) {
        Ok(c) => c.with_id(id),
        Err(e) => {
            tracing::error!("cannot start session: {e}");
            return;
        }
    };
    let t0 = Instant::now();
    let mut tick = tokio::time::interval(Duration::from_millis(20));
    tracing::debug!(id, "client connected");
    loop {
        tokio::select! {
            msg = socket.recv() => {
                let text = match msg {
                    Some(Ok(Message::Text(t))) => t,
                    Some(Ok(Message::Close(_))) | None | Some(Err(_)) => break,
                    Some(Ok(_)) => continue,
                };
                let now = t0.elapsed().as_secs_f64();
                let mut out = Vec::new();
                for line in text.as_str().lines().filter(|l| !l.trim().is_empty()) {
                    out.extend(conn.handle_text(line, now));
                }
                if !send_all(&mut socket, out).await {
                    break;
                }
            }
            _ = tick.tick() => {
                let out = conn.poll(t0.elapsed().as_secs_f64());
                if !send_all(&mut socket, out).await {
                    break;
                }
            }
            Some(req) = requests.recv() => {
                let _ = req.reply.send(export(&conn, req.kind));
            }
        }
    }
    state.exports.lock().expect("export registry").remove(&id);
    tracing::debug!(id, "client disconnected");
}
