//! Drawing sessions: strokes, whole-stroke undo/redo/erase with correction
//! counting, and persistence.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::brush::{Appended, BrushKind, RibbonBuilder, RibbonStrip, DEFAULT_EPSILON, DEFAULT_WIDTH};
use crate::error::{Error, Result};
use crate::geometry::Pose;

pub const SESSION_FORMAT: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SessionEvent {
    StrokeBegin {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        brush: Option<BrushKind>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        width: Option<f64>,
    },
    StrokePoint {
        pose: Pose,
    },
    StrokeEnd,
    Undo,
    Redo,
    Erase {
        id: u64,
    },
    SetBrush {
        brush: BrushKind,
    },
}

/// An event with an optional wall-clock stamp in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimedEvent {
    #[serde(flatten)]
    pub event: SessionEvent,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub at: Option<f64>,
}

impl TimedEvent {
    pub fn new(event: SessionEvent) -> Self {
        TimedEvent { event, at: None }
    }

    pub fn at(event: SessionEvent, at: f64) -> Self {
        TimedEvent { event, at: Some(at) }
    }
}

impl From<SessionEvent> for TimedEvent {
    fn from(event: SessionEvent) -> Self {
        TimedEvent::new(event)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stroke {
    pub id: u64,
    pub brush: BrushKind,
    pub width: f64,
    pub poses: Vec<Pose>,
    pub ribbon: RibbonStrip,
}

#[derive(Debug, Clone, PartialEq)]
enum Action {
    Draw(Stroke),
    Erase(Stroke),
}

#[derive(Debug, Clone)]
struct OpenStroke {
    id: u64,
    poses: Vec<Pose>,
    builder: RibbonBuilder,
}

/// What applying an event did.
#[derive(Debug, Clone, PartialEq)]
pub enum Applied {
    Began { id: u64 },
    Point { id: u64, appended: Option<Appended> },
    Ended { id: u64 },
    /// `None` when the stack was empty and nothing happened.
    Undone(Option<u64>),
    Redone(Option<u64>),
    Erased { id: u64 },
    BrushSet,
}

impl Applied {
    /// Undo, redo or erase that changed the drawing.
    pub fn is_correction(&self) -> bool {
        matches!(self, Applied::Undone(Some(_)) | Applied::Redone(Some(_)) | Applied::Erased { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub brush: BrushKind,
    pub width: f64,
    pub epsilon: f64,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig { brush: BrushKind::Strip, width: DEFAULT_WIDTH, epsilon: DEFAULT_EPSILON }
    }
}

#[derive(Debug, Clone)]
pub struct Session {
    config: SessionConfig,
    brush: BrushKind,
    strokes: Vec<Stroke>,
    undo_stack: Vec<Action>,
    redo_stack: Vec<Action>,
    correction_count: u64,
    started_at: Option<f64>,
    last_at: Option<f64>,
    next_id: u64,
    open: Option<OpenStroke>,
    log: Vec<TimedEvent>,
}

/// Equality of observable state; the open stroke compares by id and poses.
impl PartialEq for Session {
    fn eq(&self, o: &Self) -> bool {
        self.config == o.config
            && self.brush == o.brush
            && self.strokes == o.strokes
            && self.undo_stack == o.undo_stack
            && self.redo_stack == o.redo_stack
            && self.correction_count == o.correction_count
            && self.started_at == o.started_at
            && self.last_at == o.last_at
            && self.next_id == o.next_id
            && self.open.as_ref().map(|s| (s.id, &s.poses)) == o.open.as_ref().map(|s| (s.id, &s.poses))
            && self.log == o.log
    }
}

impl Default for Session {
    fn default() -> Self {
        Session::new(SessionConfig::default()).expect("default config is valid")
    }
}

impl Session {
    pub fn new(config: SessionConfig) -> Result<Self> {
        RibbonBuilder::new(config.brush, config.width, config.epsilon)?;
        Ok(Session {
            config,
            brush: config.brush,
            strokes: Vec::new(),
            undo_stack: Vec::new(),
            redo_stack: Vec::new(),
            correction_count: 0,
            started_at: None,
            last_at: None,
            next_id: 0,
            open: None,
            log: Vec::new(),
        })
    }

    pub fn config(&self) -> SessionConfig {
        self.config
    }

    /// Brush used by the next stroke that does not name one.
    pub fn brush(&self) -> BrushKind {
        self.brush
    }

    /// Live strokes in id order.
    pub fn strokes(&self) -> &[Stroke] {
        &self.strokes
    }

    pub fn stroke(&self, id: u64) -> Option<&Stroke> {
        self.strokes.iter().find(|s| s.id == id)
    }

    pub fn correction_count(&self) -> u64 {
        self.correction_count
    }

    pub fn undo_depth(&self) -> usize {
        self.undo_stack.len()
    }

    pub fn redo_depth(&self) -> usize {
        self.redo_stack.len()
    }

    pub fn events(&self) -> &[TimedEvent] {
        &self.log
    }

    pub fn is_stroke_open(&self) -> bool {
        self.open.is_some()
    }

    /// Id, poses and ribbon-so-far of the open stroke.
    pub fn open_stroke(&self) -> Option<(u64, &[Pose], RibbonStrip)> {
        self.open.as_ref().map(|o| (o.id, o.poses.as_slice(), o.builder.strip()))
    }

    /// Seconds from the first stroke start to the latest stamped event.
    pub fn elapsed(&self) -> f64 {
        match (self.started_at, self.last_at) {
            (Some(a), Some(b)) => (b - a).max(0.0),
            _ => 0.0,
        }
    }

    pub fn ribbons(&self) -> impl Iterator<Item = &RibbonStrip> {
        self.strokes.iter().map(|s| &s.ribbon)
    }

    /// SHA-256 over the canonical bytes of every live ribbon, in id order.
    pub fn digest(&self) -> String {
        let mut bytes = Vec::new();
        for s in &self.strokes {
            bytes.extend_from_slice(&s.id.to_le_bytes());
            s.ribbon.write_canonical_bytes(&mut bytes);
        }
        hex::encode(Sha256::digest(&bytes))
    }

    fn insert_stroke(&mut self, stroke: Stroke) {
        let at = self.strokes.partition_point(|s| s.id < stroke.id);
        self.strokes.insert(at, stroke);
    }

    fn remove_stroke(&mut self, id: u64) -> Option<Stroke> {
        let at = self.strokes.iter().position(|s| s.id == id)?;
        Some(self.strokes.remove(at))
    }

    fn require_closed(&self, what: &str) -> Result<()> {
        match &self.open {
            Some(o) => Err(Error::Protocol(format!("{what} while stroke {} is open", o.id))),
            None => Ok(()),
        }
    }

    /// Applies one event. On error the session is unchanged.
    pub fn apply(&mut self, event: impl Into<TimedEvent>) -> Result<Applied> {
        let event = event.into();
        if let Some(at) = event.at {
            if !at.is_finite() {
                return Err(Error::Protocol(format!("non-finite event time {at}")));
            }
        }
        let applied = self.transition(&event.event)?;
        if let Some(at) = event.at {
            if self.started_at.is_none() && matches!(event.event, SessionEvent::StrokeBegin { .. }) {
                self.started_at = Some(at);
            }
            self.last_at = Some(self.last_at.map_or(at, |l| l.max(at)));
        }
        self.log.push(event);
        Ok(applied)
    }

    fn transition(&mut self, event: &SessionEvent) -> Result<Applied> {
        match event {
            SessionEvent::StrokeBegin { brush, width } => {
                self.require_closed("stroke_begin")?;
                let brush = brush.unwrap_or(self.brush);
                let builder = RibbonBuilder::new(brush, width.unwrap_or(self.config.width), self.config.epsilon)?;
                let id = self.next_id;
                self.next_id += 1;
                self.open = Some(OpenStroke { id, poses: Vec::new(), builder });
                Ok(Applied::Began { id })
            }
            SessionEvent::StrokePoint { pose } => {
                let open = self.open.as_mut().ok_or_else(|| Error::Protocol("stroke_point outside a stroke".into()))?;
                if let Some(last) = open.poses.last() {
                    if !(pose.timestamp > last.timestamp) {
                        return Err(Error::Protocol(format!(
                            "timestamp {} does not increase (previous {})",
                            pose.timestamp, last.timestamp
                        )));
                    }
                }
                let index = open.poses.len();
                open.poses.push(*pose);
                let appended = open.builder.push(index, pose);
                Ok(Applied::Point { id: open.id, appended })
            }
            SessionEvent::StrokeEnd => {
                let open = self.open.take().ok_or_else(|| Error::Protocol("stroke_end without stroke_begin".into()))?;
                let stroke = Stroke {
                    id: open.id,
                    brush: open.builder.brush(),
                    width: open.builder.strip().width,
                    ribbon: open.builder.strip(),
                    poses: open.poses,
                };
                self.insert_stroke(stroke.clone());
                self.undo_stack.push(Action::Draw(stroke));
                self.redo_stack.clear();
                Ok(Applied::Ended { id: open.id })
            }
            SessionEvent::Undo => {
                self.require_closed("undo")?;
                let Some(action) = self.undo_stack.pop() else {
                    return Ok(Applied::Undone(None));
                };
                let id = match &action {
                    Action::Draw(s) => {
                        self.remove_stroke(s.id);
                        s.id
                    }
                    Action::Erase(s) => {
                        self.insert_stroke(s.clone());
                        s.id
                    }
                };
                self.redo_stack.push(action);
                self.correction_count += 1;
                Ok(Applied::Undone(Some(id)))
            }
            SessionEvent::Redo => {
                self.require_closed("redo")?;
                let Some(action) = self.redo_stack.pop() else {
                    return Ok(Applied::Redone(None));
                };
                let id = match &action {
                    Action::Draw(s) => {
                        self.insert_stroke(s.clone());
                        s.id
                    }
                    Action::Erase(s) => {
                        self.remove_stroke(s.id);
                        s.id
                    }
                };
                self.undo_stack.push(action);
                self.correction_count += 1;
                Ok(Applied::Redone(Some(id)))
            }
            SessionEvent::Erase { id } => {
                self.require_closed("erase")?;
                let stroke = self.remove_stroke(*id).ok_or(Error::NotFound(*id))?;
                self.undo_stack.push(Action::Erase(stroke));
                self.redo_stack.clear();
                self.correction_count += 1;
                Ok(Applied::Erased { id: *id })
            }
            SessionEvent::SetBrush { brush } => {
                self.require_closed("set_brush")?;
                self.brush = *brush;
                Ok(Applied::BrushSet)
            }
        }
    }

    /// Rebuilds a session from an event log.
    pub fn replay<I, E>(config: SessionConfig, events: I) -> Result<Session>
    where
        I: IntoIterator<Item = E>,
        E: Into<TimedEvent>,
    {
        let mut s = Session::new(config)?;
        for (i, e) in events.into_iter().enumerate() {
            s.apply(e).map_err(|err| Error::Contract(format!("event {}: {err}", i + 1)))?;
        }
        Ok(s)
    }

    pub fn to_file(&self) -> SessionFile {
        SessionFile {
            meta: SessionMeta {
                format: SESSION_FORMAT,
                brush: self.config.brush,
                width: self.config.width,
                epsilon: self.config.epsilon,
                stroke_count: self.strokes.len(),
                correction_count: self.correction_count,
                elapsed_s: self.elapsed(),
            },
            events: self.log.clone(),
            built_strokes_digest: self.digest(),
        }
    }

    /// Canonical session document (pretty JSON with a trailing newline).
    pub fn save(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_file()).expect("session serializes");
        s.push('\n');
        s
    }

    /// Parses and replays a saved session, checking the stored digest.
    pub fn load(text: &str, source_name: &str) -> Result<Session> {
        let file: SessionFile = serde_json::from_str(text).map_err(|e| Error::parse(source_name, e.line(), e.to_string()))?;
        if file.meta.format != SESSION_FORMAT {
            return Err(Error::contract(format!("unsupported session format {}", file.meta.format)));
        }
        let config = SessionConfig { brush: file.meta.brush, width: file.meta.width, epsilon: file.meta.epsilon };
        let session = Session::replay(config, file.events)?;
        if session.digest() != file.built_strokes_digest {
            return Err(Error::contract(format!(
                "{source_name}: stroke digest mismatch (stored {}, rebuilt {})",
                file.built_strokes_digest,
                session.digest()
            )));
        }
        Ok(session)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionMeta {
    pub format: u32,
    pub brush: BrushKind,
    pub width: f64,
    pub epsilon: f64,
    pub stroke_count: usize,
    pub correction_count: u64,
    pub elapsed_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionFile {
    pub meta: SessionMeta,
    pub events: Vec<TimedEvent>,
    pub built_strokes_digest: String,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{UnitQuat, Vec3};

    fn point(i: usize) -> SessionEvent {
        SessionEvent::StrokePoint { pose: Pose::new(i as f64, Vec3::new(0.0, 0.0, 0.01 * i as f64), UnitQuat::IDENTITY, true) }
    }

    fn draw(s: &mut Session, n: usize) {
        s.apply(SessionEvent::StrokeBegin { brush: None, width: None }).unwrap();
        for i in 0..n {
            s.apply(point(i)).unwrap();
        }
        s.apply(SessionEvent::StrokeEnd).unwrap();
    }

    #[test]
    fn undo_then_redo() {
        let mut s = Session::default();
        draw(&mut s, 3);
        let original = s.strokes()[0].clone();
        assert_eq!(original.ribbon.quad_count(), 2);
        s.apply(SessionEvent::Undo).unwrap();
        assert_eq!((s.strokes().len(), s.correction_count(), s.redo_depth()), (0, 1, 1));
        s.apply(SessionEvent::Redo).unwrap();
        assert_eq!(s.strokes(), &[original]);
        assert_eq!(s.correction_count(), 2);
    }

    #[test]
    fn empty_undo_is_free() {
        let mut s = Session::default();
        assert_eq!(s.apply(SessionEvent::Undo).unwrap(), Applied::Undone(None));
        assert_eq!(s.apply(SessionEvent::Redo).unwrap(), Applied::Redone(None));
        assert_eq!(s.correction_count(), 0);
        assert!(s.strokes().is_empty());
    }

    #[test]
    fn erase_is_undoable_and_clears_redo() {
        let mut s = Session::default();
        draw(&mut s, 3);
        draw(&mut s, 3);
        s.apply(SessionEvent::Undo).unwrap();
        s.apply(SessionEvent::Erase { id: 0 }).unwrap();
        assert_eq!((s.strokes().len(), s.redo_depth(), s.correction_count()), (0, 0, 2));
        s.apply(SessionEvent::Undo).unwrap();
        assert_eq!(s.strokes()[0].id, 0);
        assert!(matches!(s.apply(SessionEvent::Erase { id: 9 }), Err(Error::NotFound(9))));
        assert_eq!(s.correction_count(), 3);
    }

    #[test]
    fn protocol_errors_leave_state() {
        let mut s = Session::default();
        assert!(matches!(s.apply(point(0)), Err(Error::Protocol(_))));
        assert!(matches!(s.apply(SessionEvent::StrokeEnd), Err(Error::Protocol(_))));
        s.apply(SessionEvent::StrokeBegin { brush: None, width: None }).unwrap();
        s.apply(point(1)).unwrap();
        let before = s.clone();
        assert!(s.apply(point(1)).is_err());
        assert!(s.apply(SessionEvent::Undo).is_err());
        assert_eq!(s, before);
    }

    #[test]
    fn strokes_keep_brush_at_begin() {
        let mut s = Session::default();
        s.apply(SessionEvent::SetBrush { brush: BrushKind::Normal }).unwrap();
        draw(&mut s, 3);
        s.apply(SessionEvent::SetBrush { brush: BrushKind::Strip }).unwrap();
        draw(&mut s, 3);
        let kinds: Vec<_> = s.strokes().iter().map(|s| s.brush).collect();
        assert_eq!(kinds, vec![BrushKind::Normal, BrushKind::Strip]);
    }

    #[test]
    fn elapsed_from_first_begin() {
        let mut s = Session::default();
        s.apply(TimedEvent::at(SessionEvent::SetBrush { brush: BrushKind::Strip }, 1.0)).unwrap();
        s.apply(TimedEvent::at(SessionEvent::StrokeBegin { brush: None, width: None }, 2.0)).unwrap();
        s.apply(TimedEvent::at(SessionEvent::StrokeEnd, 7.5)).unwrap();
        assert_eq!(s.elapsed(), 5.5);
    }

    #[test]
    fn save_load_round_trip() {
        let mut s = Session::default();
        draw(&mut s, 4);
        draw(&mut s, 2);
        s.apply(SessionEvent::Undo).unwrap();
        let text = s.save();
        let back = Session::load(&text, "s.json").unwrap();
        assert_eq!(back, s);
        assert_eq!(back.save(), text);
        let tampered = text.replace(&s.digest(), &"0".repeat(64));
        assert!(Session::load(&tampered, "s.json").is_err());
        assert!(matches!(Session::load("{\n  oops", "s.json"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn event_json_shape() {
        let e = TimedEvent::at(SessionEvent::Erase { id: 3 }, 1.5);
        assert_eq!(serde_json::to_string(&e).unwrap(), r#"{"type":"erase","id":3,"at":1.5}"#);
        let u: TimedEvent = serde_json::from_str(r#"{"type":"undo"}"#).unwrap();
        assert_eq!(u.event, SessionEvent::Undo);
    }
}
