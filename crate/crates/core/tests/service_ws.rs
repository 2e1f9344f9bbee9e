mod common;

use std::net::SocketAddr;
use std::time::Duration;

use futures::{SinkExt, StreamExt};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ribbon_brush::io::{join_strokes, write_poses};
use ribbon_brush::obj::to_obj;
use ribbon_brush::service::server::{router, ServerOptions};
use ribbon_brush::service::{ClientBody, ClientMessage, ServerBody, ServerMessage, METRICS_INTERVAL};
use ribbon_brush::session::{Session, SessionConfig, SessionEvent, TimedEvent};
use ribbon_brush::Pose;
use tokio::io::{AsyncReadExt, AsyncWriteExt};
use tokio::net::TcpStream;
use tokio_tungstenite::tungstenite::Message;
use tokio_tungstenite::{MaybeTlsStream, WebSocketStream};

type Ws = WebSocketStream<MaybeTlsStream<TcpStream>>;

async fn start(opts: ServerOptions) -> SocketAddr {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move { axum::serve(listener, router(opts)).await });
    addr
}

async fn connect(addr: SocketAddr) -> Ws {
    tokio_tungstenite::connect_async(format!("ws://{addr}/ws")).await.unwrap().0
}

async fn get(addr: SocketAddr, path: &str) -> (u16, String) {
    let mut sock = TcpStream::connect(addr).await.unwrap();
    sock.write_all(format!("GET {path} HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n").as_bytes()).await.unwrap();
    let mut buf = Vec::new();
    sock.read_to_end(&mut buf).await.unwrap();
    let text = String::from_utf8(buf).unwrap();
    let (head, body) = text.split_once("\r\n\r\n").unwrap();
    (head[9..12].parse().unwrap(), body.to_string())
}

fn line(seq: u64, body: ClientBody) -> String {
    serde_json::to_string(&ClientMessage { seq, body }).unwrap()
}

fn event(seq: u64, e: SessionEvent) -> String {
    line(seq, ClientBody::Event { event: TimedEvent::new(e) })
}

async fn send(ws: &mut Ws, lines: &[String]) {
    ws.send(Message::Text(lines.join("\n").into())).await.unwrap();
}

async fn recv(ws: &mut Ws) -> ServerMessage {
    loop {
        let msg = tokio::time::timeout(Duration::from_secs(10), ws.next()).await.expect("server reply").unwrap().unwrap();
        if let Message::Text(t) = msg {
            return serde_json::from_str(&t).unwrap();
        }
    }
}

/// Messages up to and including the one acknowledging `seq`.
async fn until_ack(ws: &mut Ws, seq: u64) -> Vec<ServerMessage> {
    let mut out = Vec::new();
    loop {
        let m = recv(ws).await;
        let done = m.ack == Some(seq);
        out.push(m);
        if done {
            return out;
        }
    }
}

async fn hello(ws: &mut Ws, seq: u64) -> u64 {
    send(ws, &[line(seq, ClientBody::Hello { client: Some("test".into()) })]).await;
    match until_ack(ws, seq).await.pop().unwrap().body {
        ServerBody::Hello { protocol, session_id, .. } => {
            assert_eq!(protocol, 1);
            session_id.unwrap()
        }
        other => panic!("expected hello, got {other:?}"),
    }
}

fn stroke(seed: u64) -> Vec<Pose> {
    let mut s = common::random_stream(&mut ChaCha8Rng::seed_from_u64(seed), 30, 0.0);
    for p in &mut s {
        p.trigger = true;
    }
    s
}

/// A begin/points/end script starting at `seq`, and the events it carries.
fn stroke_script(seq: u64, poses: &[Pose]) -> (Vec<String>, Vec<TimedEvent>) {
    let mut events = vec![SessionEvent::StrokeBegin { brush: None, width: None }];
    events.extend(poses.iter().map(|&pose| SessionEvent::StrokePoint { pose }));
    events.push(SessionEvent::StrokeEnd);
    let lines = events.iter().enumerate().map(|(i, e)| event(seq + i as u64, e.clone())).collect();
    (lines, events.into_iter().map(TimedEvent::new).collect())
}

#[tokio::test]
async fn health_reports_version() {
    let addr = start(ServerOptions::default()).await;
    let (code, body) = get(addr, "/health").await;
    assert_eq!(code, 200);
    let v: serde_json::Value = serde_json::from_str(&body).unwrap();
    assert_eq!(v["status"], "ok");
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
}

#[tokio::test]
async fn deltas_rebuild_the_offline_ribbon() {
    let addr = start(ServerOptions::default()).await;
    let mut ws = connect(addr).await;
    let id = hello(&mut ws, 1).await;
    let poses = stroke(1);
    let (lines, events) = stroke_script(2, &poses);
    let last = 1 + lines.len() as u64;
    send(&mut ws, &lines).await;
    let replies = until_ack(&mut ws, last).await;

    let offline = Session::replay(SessionConfig::default(), events.clone()).unwrap();
    let mut rulings = Vec::new();
    let mut quads = 0;
    for m in &replies {
        assert!(m.ack.is_none() || m.ack.unwrap() <= last);
        if let ServerBody::RibbonDelta { stroke_id, first_ruling, rulings: r, new_quads, divergence, .. } = &m.body {
            assert_eq!(*stroke_id, 0);
            assert_eq!(*first_ruling, rulings.len());
            assert_eq!(divergence.len(), *new_quads);
            rulings.extend(r.iter().cloned());
            quads += new_quads;
        }
    }
    let strip = offline.ribbons().next().unwrap();
    assert_eq!(rulings, strip.rulings);
    assert_eq!(quads, strip.quad_count());

    let (code, obj) = get(addr, &format!("/sessions/{id}/drawing.obj")).await;
    assert_eq!((code, obj), (200, to_obj(offline.ribbons())));
    let (code, jsonl) = get(addr, &format!("/sessions/{id}/poses.jsonl")).await;
    let expected = write_poses(&join_strokes(offline.strokes().iter().map(|s| s.poses.as_slice())));
    assert_eq!((code, jsonl), (200, expected));
    assert_eq!(get(addr, &format!("/sessions/{id}/other.txt")).await.0, 404);
    assert_eq!(get(addr, &format!("/sessions/{}/session.json", id + 100)).await.0, 404);

    // Undo answers with a snapshot of the now empty drawing.
    send(&mut ws, &[event(last + 1, SessionEvent::Undo)]).await;
    let snap = until_ack(&mut ws, last + 1).await.into_iter().find_map(|m| match m.body {
        ServerBody::Snapshot { strokes, correction_count, digest } => Some((strokes, correction_count, digest)),
        _ => None,
    });
    let (strokes, corrections, digest) = snap.expect("snapshot after undo");
    let mut offline = offline;
    offline.apply(TimedEvent::new(SessionEvent::Undo)).unwrap();
    assert!(strokes.is_empty());
    assert_eq!((corrections, digest), (1, offline.digest()));
}

#[tokio::test]
async fn bad_messages_get_errors_and_change_nothing() {
    let addr = start(ServerOptions::default()).await;
    let mut ws = connect(addr).await;
    let id = hello(&mut ws, 5).await;
    send(&mut ws, &[event(5, SessionEvent::Undo)]).await;
    let m = recv(&mut ws).await;
    assert!(matches!(m.body, ServerBody::Error { offending_seq: Some(5), .. }), "{m:?}");
    send(&mut ws, &["{not json".to_string()]).await;
    assert!(matches!(recv(&mut ws).await.body, ServerBody::Error { .. }));
    send(&mut ws, &[event(6, SessionEvent::StrokeEnd)]).await;
    assert!(matches!(recv(&mut ws).await.body, ServerBody::Error { offending_seq: Some(6), .. }));
    send(&mut ws, &[line(7, ClientBody::SetSurface { surface: "blob".into(), params: Default::default() })]).await;
    assert!(matches!(recv(&mut ws).await.body, ServerBody::Error { offending_seq: Some(7), .. }));
    let (_, body) = get(addr, &format!("/sessions/{id}/session.json")).await;
    assert_eq!(body, Session::new(SessionConfig::default()).unwrap().save());
}

#[tokio::test]
async fn connections_are_isolated() {
    let addr = start(ServerOptions::default()).await;
    let (mut a, mut b) = (connect(addr).await, connect(addr).await);
    let (ida, idb) = (hello(&mut a, 1).await, hello(&mut b, 1).await);
    assert_ne!(ida, idb);
    let (lines, _) = stroke_script(2, &stroke(2));
    let last = 1 + lines.len() as u64;
    send(&mut a, &lines).await;
    until_ack(&mut a, last).await;
    let (_, sa) = get(addr, &format!("/sessions/{ida}/session.json")).await;
    let (_, sb) = get(addr, &format!("/sessions/{idb}/session.json")).await;
    assert_eq!(Session::load(&sa, "a").unwrap().strokes().len(), 1);
    assert_eq!(sb, Session::new(SessionConfig::default()).unwrap().save());
}

#[tokio::test]
async fn metrics_updates_are_rate_limited() {
    let addr = start(ServerOptions::default()).await;
    let mut ws = connect(addr).await;
    hello(&mut ws, 1).await;
    send(&mut ws, &[line(2, ClientBody::SetSurface { surface: "square".into(), params: Default::default() })]).await;
    let poses = stroke(3);
    let (lines, _) = stroke_script(3, &poses);
    let last = 2 + lines.len() as u64;
    let t0 = tokio::time::Instant::now();
    // One message per frame so the server sees a steady stream.
    for l in &lines {
        send(&mut ws, std::slice::from_ref(l)).await;
    }
    let mut replies = until_ack(&mut ws, last).await;
    // Drain the trailing update that carries the finished stroke.
    let tail = tokio::time::timeout(Duration::from_millis(500), async {
        loop {
            let m = recv(&mut ws).await;
            let done = matches!(&m.body, ServerBody::MetricsUpdate { stroke_count: 1, .. });
            replies.push(m);
            if done {
                break;
            }
        }
    })
    .await;
    let secs = t0.elapsed().as_secs_f64();
    let updates: Vec<_> = replies.iter().filter(|m| matches!(m.body, ServerBody::MetricsUpdate { .. })).collect();
    assert!(tail.is_ok() || updates.iter().any(|m| matches!(m.body, ServerBody::MetricsUpdate { stroke_count: 1, .. })));
    assert!(!updates.is_empty());
    assert!(updates.len() as f64 <= secs / METRICS_INTERVAL + 2.0, "{} updates in {secs:.3}s", updates.len());
    let ServerBody::MetricsUpdate { accuracy, .. } = &updates.last().unwrap().body else { unreachable!() };
    assert!(accuracy.is_some());
}

#[tokio::test]
async fn static_files_are_served() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("index.html"), "<p>sandbox</p>").unwrap();
    let addr = start(ServerOptions { static_dir: Some(dir.path().to_path_buf()), ..Default::default() }).await;
    assert_eq!(get(addr, "/index.html").await, (200, "<p>sandbox</p>".to_string()));
    assert_eq!(get(addr, "/").await, (200, "<p>sandbox</p>".to_string()));
    assert_eq!(get(addr, "/missing.js").await.0, 404);
    assert_eq!(get(addr, "/health").await.0, 200);
}
