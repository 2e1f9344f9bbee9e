//! Wire protocol for live drawing clients.
//!
//! [`Connection`] is the whole per-client state machine, independent of any
//! transport: feed it client messages with the current time and send back
//! what it returns. The websocket server in [`server`] is a thin shell
//! around it.
//!
//! Every message is a JSON object with a `type` and a per-direction `seq`.
//! Server messages also carry `ack`, the highest client `seq` processed so far.

pub mod server;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::brush::{folded_angle, raw_quad_normal, BrushKind, Ruling};
use crate::error::Error;
use crate::geometry::Pose;
use crate::metrics::{accuracy_report_with, step_components, wrist_effort, AccuracyOptions, AccuracyReport, EffortReport, EffortWeights};
use crate::session::{Applied, Session, SessionConfig, SessionEvent, TimedEvent};
use crate::surface::ReferenceSurface;

pub const PROTOCOL_VERSION: u32 = 1;
/// Minimum spacing of `metrics_update` messages, in seconds.
pub const METRICS_INTERVAL: f64 = 0.1;
/// Coverage samples used for live accuracy.
pub const LIVE_COVERAGE_SAMPLES: usize = 2_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClientMessage {
    pub seq: u64,
    #[serde(flatten)]
    pub body: ClientBody,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClientBody {
    Hello {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        client: Option<String>,
    },
    SetBrush {
        brush: BrushKind,
    },
    SetSurface {
        surface: String,
        #[serde(default)]
        params: BTreeMap<String, f64>,
    },
    Event {
        event: TimedEvent,
    },
    /// Shorthand for a `stroke_point` event.
    Pose {
        pose: Pose,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServerMessage {
    pub seq: u64,
    pub ack: Option<u64>,
    #[serde(flatten)]
    pub body: ServerBody,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrokeGeometry {
    pub id: u64,
    pub brush: BrushKind,
    pub width: f64,
    pub rulings: Vec<Ruling>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerBody {
    Hello {
        version: String,
        protocol: u32,
        session: SessionConfig,
        /// Key for the download endpoints, when served over the network.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        session_id: Option<u64>,
    },
    RibbonDelta {
        stroke_id: u64,
        /// Index of the first ruling in `rulings` within the stroke.
        first_ruling: usize,
        rulings: Vec<Ruling>,
        new_quads: usize,
        /// Normal divergence of each new quad, radians.
        divergence: Vec<f64>,
        /// Wrist effort of the open stroke so far.
        effort: EffortReport,
    },
    MetricsUpdate {
        stroke_count: usize,
        correction_count: u64,
        elapsed_s: f64,
        effort: EffortReport,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        accuracy: Option<AccuracyReport>,
    },
    Error {
        message: String,
        offending_seq: Option<u64>,
    },
    Snapshot {
        strokes: Vec<StrokeGeometry>,
        correction_count: u64,
        digest: String,
    },
}

/// One client's protocol state. Connections share nothing.
#[derive(Debug, Clone)]
pub struct Connection {
    id: Option<u64>,
    session: Session,
    surface: Option<ReferenceSurface>,
    weights: EffortWeights,
    last_in: Option<u64>,
    out_seq: u64,
    stroke_effort: EffortReport,
    metrics_dirty: bool,
    last_metrics_at: Option<f64>,
}

impl Connection {
    pub fn new(config: SessionConfig) -> crate::Result<Self> {
        let weights = EffortWeights::default();
        Ok(Connection {
            id: None,
            session: Session::new(config)?,
            surface: None,
            weights,
            last_in: None,
            out_seq: 0,
            stroke_effort: EffortReport::zero(weights),
            metrics_dirty: false,
            last_metrics_at: None,
        })
    }

    pub fn with_id(mut self, id: u64) -> Self {
        self.id = Some(id);
        self
    }

    pub fn session(&self) -> &Session {
        &self.session
    }

    pub fn surface(&self) -> Option<&ReferenceSurface> {
        self.surface.as_ref()
    }

    fn send(&mut self, out: &mut Vec<ServerMessage>, body: ServerBody) {
        self.out_seq += 1;
        out.push(ServerMessage { seq: self.out_seq, ack: self.last_in, body });
    }

    fn error(&mut self, out: &mut Vec<ServerMessage>, message: String, offending_seq: Option<u64>) {
        self.send(out, ServerBody::Error { message, offending_seq });
    }

    /// Parses and handles one JSON message. Malformed input yields an error
    /// message and leaves the session untouched.
    pub fn handle_text(&mut self, text: &str, now: f64) -> Vec<ServerMessage> {
        match serde_json::from_str::<ClientMessage>(text) {
            Ok(msg) => self.handle(msg, now),
            Err(e) => {
                let mut out = Vec::new();
                let seq = serde_json::from_str::<serde_json::Value>(text).ok().and_then(|v| v.get("seq")?.as_u64());
                self.error(&mut out, format!("malformed message: {e}"), seq);
                out
            }
        }
    }

    pub fn handle(&mut self, msg: ClientMessage, now: f64) -> Vec<ServerMessage> {
        let mut out = Vec::new();
        if let Some(last) = self.last_in {
            if msg.seq <= last {
                self.error(&mut out, format!("out-of-order seq {} (last processed {last})", msg.seq), Some(msg.seq));
                return out;
            }
        }
        self.last_in = Some(msg.seq);
        let seq = msg.seq;
        match msg.body {
            ClientBody::Hello { .. } => {
                let body = ServerBody::Hello {
                    version: env!("CARGO_PKG_VERSION").to_string(),
                    protocol: PROTOCOL_VERSION,
                    session: self.session.config(),
                    session_id: self.id,
                };
                self.send(&mut out, body);
            }
            ClientBody::SetBrush { brush } => self.apply(TimedEvent::new(SessionEvent::SetBrush { brush }), seq, &mut out),
            ClientBody::SetSurface { surface, params } => match ReferenceSurface::from_name(&surface, &params) {
                Ok(s) => {
                    self.surface = Some(s);
                    self.metrics_dirty = true;
                }
                Err(e) => self.error(&mut out, e.to_string(), Some(seq)),
            },
            ClientBody::Event { event } => self.apply(event, seq, &mut out),
            ClientBody::Pose { pose } => self.apply(TimedEvent::new(SessionEvent::StrokePoint { pose }), seq, &mut out),
        }
        out.extend(self.poll(now));
        out
    }

    fn apply(&mut self, event: TimedEvent, seq: u64, out: &mut Vec<ServerMessage>) {
        let prev_pose = self.session.open_stroke().and_then(|(_, poses, _)| poses.last().copied());
        let applied = match self.session.apply(event) {
            Ok(a) => a,
            Err(e) => {
                let msg = match e {
                    Error::Protocol(m) => format!("protocol violation: {m}"),
                    other => other.to_string(),
                };
                self.error(out, msg, Some(seq));
                return;
            }
        };
        match &applied {
            Applied::Began { .. } => self.stroke_effort = EffortReport::zero(self.weights),
            Applied::Point { id, appended } => {
                let (_, poses, strip) = self.session.open_stroke().expect("stroke is open");
                let pose = *poses.last().expect("point was recorded");
                if let Some(prev) = prev_pose {
                    let c = step_components(prev.orientation, pose.orientation);
                    let step = EffortReport {
                        pitch_total: c.x.abs(),
                        yaw_total: c.y.abs(),
                        roll_total: c.z.abs(),
                        weighted_total: self.weights.cost(c),
                        step_count: 1,
                        weights: self.weights,
                    };
                    self.stroke_effort = self.stroke_effort.combine(&step);
                }
                if let Some(a) = appended {
                    let divergence = (strip.quad_count() - a.new_quads..strip.quad_count())
                        .map(|i| {
                            let q = strip.quad(i);
                            let up = poses[strip.rulings[i + 1].source_pose_index].frame().up;
                            raw_quad_normal(&q).try_normalize(1e-300).map_or(0.0, |n| folded_angle(n, up))
                        })
                        .collect();
                    let body = ServerBody::RibbonDelta {
                        stroke_id: *id,
                        first_ruling: a.first_ruling,
                        rulings: a.rulings.clone(),
                        new_quads: a.new_quads,
                        divergence,
                        effort: self.stroke_effort,
                    };
                    self.send(out, body);
                    self.metrics_dirty = true;
                }
            }
            Applied::Ended { .. } | Applied::BrushSet => self.metrics_dirty = true,
            Applied::Undone(_) | Applied::Redone(_) | Applied::Erased { .. } => {
                let body = self.snapshot();
                self.send(out, body);
                self.metrics_dirty = true;
            }
        }
    }

    /// Full geometry of the live strokes.
    pub fn snapshot(&self) -> ServerBody {
        ServerBody::Snapshot {
            strokes: self
                .session
                .strokes()
                .iter()
                .map(|s| StrokeGeometry { id: s.id, brush: s.brush, width: s.width, rulings: s.ribbon.rulings.clone() })
                .collect(),
            correction_count: self.session.correction_count(),
            digest: self.session.digest(),
        }
    }

    /// Current metrics of the live drawing.
    pub fn metrics(&self) -> ServerBody {
        let mut effort = EffortReport::zero(self.weights);
        for s in self.session.strokes() {
            let engaged: Vec<Pose> = s.poses.iter().filter(|p| p.trigger).copied().collect();
            if let Ok(e) = wrist_effort(&engaged, self.weights) {
                effort = effort.combine(&e);
            }
        }
        let accuracy = self.surface.as_ref().and_then(|surface| {
            let strips: Vec<_> = self.session.ribbons().filter(|r| r.quad_count() > 0).cloned().collect();
            if strips.is_empty() {
                return None;
            }
            let tau = strips.iter().map(|s| s.width).fold(f64::INFINITY, f64::min) / 2.0;
            let opts = AccuracyOptions { coverage_samples: LIVE_COVERAGE_SAMPLES, ..AccuracyOptions::new(tau) };
            accuracy_report_with(&strips, surface, &opts).ok()
        });
        ServerBody::MetricsUpdate {
            stroke_count: self.session.strokes().len(),
            correction_count: self.session.correction_count(),
            elapsed_s: self.session.elapsed(),
            effort,
            accuracy,
        }
    }

    /// Emits a pending `metrics_update` once the rate limit allows.
    pub fn poll(&mut self, now: f64) -> Vec<ServerMessage> {
        let mut out = Vec::new();
        let due = self.last_metrics_at.is_none_or(|t| now - t >= METRICS_INTERVAL);
        if self.metrics_dirty && due {
            let body = self.metrics();
            self.send(&mut out, body);
            self.metrics_dirty = false;
            self.last_metrics_at = Some(now);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{UnitQuat, Vec3};

    fn msg(seq: u64, body: ClientBody) -> ClientMessage {
        ClientMessage { seq, body }
    }

    fn ev(e: SessionEvent) -> ClientBody {
        ClientBody::Event { event: TimedEvent::new(e) }
    }

    fn pose(i: usize) -> ClientBody {
        ClientBody::Pose { pose: Pose::new(i as f64, Vec3::new(0.0, 0.0, 0.01 * i as f64), UnitQuat::IDENTITY, true) }
    }

    fn kinds(out: &[ServerMessage]) -> Vec<&'static str> {
        out.iter()
            .map(|m| match m.body {
                ServerBody::Hello { .. } => "hello",
                ServerBody::RibbonDelta { .. } => "ribbon_delta",
                ServerBody::MetricsUpdate { .. } => "metrics_update",
                ServerBody::Error { .. } => "error",
                ServerBody::Snapshot { .. } => "snapshot",
            })
            .collect()
    }

    #[test]
    fn first_normal_delta_has_one_quad() {
        let mut c = Connection::new(SessionConfig { brush: BrushKind::Normal, ..Default::default() }).unwrap();
        c.handle(msg(1, ev(SessionEvent::StrokeBegin { brush: None, width: None })), 0.0);
        assert!(kinds(&c.handle(msg(2, pose(0)), 0.01)).iter().all(|k| *k != "ribbon_delta"));
        let out = c.handle(msg(3, pose(1)), 0.02);
        let ServerBody::RibbonDelta { new_quads, rulings, first_ruling, .. } = &out[0].body else { panic!("{out:?}") };
        assert_eq!((*new_quads, rulings.len(), *first_ruling), (1, 2, 0));
        assert_eq!(out[0].ack, Some(3));
    }

    #[test]
    fn gated_pose_emits_nothing() {
        let mut c = Connection::new(SessionConfig::default()).unwrap();
        c.handle(msg(1, ev(SessionEvent::StrokeBegin { brush: None, width: None })), 0.0);
        c.handle(msg(2, pose(0)), 0.0);
        let near = ClientBody::Pose { pose: Pose::new(1.0, Vec3::new(0.0, 0.0, 0.001), UnitQuat::IDENTITY, true) };
        assert!(c.handle(msg(3, near), 0.0).is_empty());
    }

    #[test]
    fn undo_sends_snapshot() {
        let mut c = Connection::new(SessionConfig::default()).unwrap();
        c.handle(msg(1, ev(SessionEvent::StrokeBegin { brush: None, width: None })), 0.0);
        for i in 0..3 {
            c.handle(msg(2 + i as u64, pose(i)), 0.0);
        }
        c.handle(msg(5, ev(SessionEvent::StrokeEnd)), 0.0);
        let out = c.handle(msg(6, ev(SessionEvent::Undo)), 1.0);
        assert_eq!(kinds(&out), vec!["snapshot", "metrics_update"]);
        let ServerBody::Snapshot { strokes, correction_count, .. } = &out[0].body else { unreachable!() };
        assert!(strokes.is_empty());
        assert_eq!(*correction_count, 1);
        let ServerBody::MetricsUpdate { correction_count, .. } = &out[1].body else { unreachable!() };
        assert_eq!(*correction_count, 1);
    }

    #[test]
    fn errors_keep_connection_usable() {
        let mut c = Connection::new(SessionConfig::default()).unwrap();
        let out = c.handle_text("{not json", 0.0);
        assert_eq!(kinds(&out), vec!["error"]);
        let out = c.handle(msg(1, pose(0)), 0.0);
        let ServerBody::Error { offending_seq, .. } = &out[0].body else { panic!() };
        assert_eq!(*offending_seq, Some(1));
        let out = c.handle(msg(1, ClientBody::Hello { client: None }), 0.0);
        assert_eq!(kinds(&out), vec!["error"]);
        let out = c.handle(msg(2, ClientBody::Hello { client: None }), 0.0);
        assert_eq!(kinds(&out), vec!["hello"]);
        assert_eq!(out[0].seq, 4);
        assert_eq!(c.session().strokes().len(), 0);
        assert!(c.session().events().is_empty());
    }

    #[test]
    fn metrics_are_coalesced() {
        let mut c = Connection::new(SessionConfig::default()).unwrap();
        c.handle(msg(1, ev(SessionEvent::StrokeBegin { brush: None, width: None })), 0.0);
        let mut updates = 0;
        for i in 0..20 {
            let out = c.handle(msg(2 + i as u64, pose(i)), 0.01 * i as f64);
            updates += kinds(&out).iter().filter(|k| **k == "metrics_update").count();
        }
        // One update with the first delta at t = 0, the next once 100 ms have passed.
        assert_eq!(updates, 2);
        assert_eq!(kinds(&c.poll(0.5)), vec!["metrics_update"]);
        assert!(c.poll(0.9).is_empty());
    }

    #[test]
    fn wire_shape() {
        let m: ClientMessage =
            serde_json::from_str(r#"{"type":"event","seq":7,"event":{"type":"erase","id":2}}"#).unwrap();
        assert_eq!(m, msg(7, ev(SessionEvent::Erase { id: 2 })));
        let m: ClientMessage = serde_json::from_str(
            r#"{"type":"pose","seq":8,"pose":{"t":0.5,"p":[0,0,0],"q":[1,0,0,0],"trig":true}}"#,
        )
        .unwrap();
        assert!(matches!(m.body, ClientBody::Pose { .. }));
        let s = ServerMessage { seq: 1, ack: None, body: ServerBody::Error { message: "x".into(), offending_seq: None } };
        assert_eq!(
            serde_json::to_string(&s).unwrap(),
            r#"{"seq":1,"ack":null,"type":"error","message":"x","offending_seq":null}"#
        );
    }
}
