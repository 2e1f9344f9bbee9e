//! Random pose streams and event logs shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use ribbon_brush::brush::BrushKind;
use ribbon_brush::session::{SessionEvent, TimedEvent};
use ribbon_brush::{Pose, UnitQuat, Vec3};

pub fn random_quat<R: Rng>(rng: &mut R) -> UnitQuat {
    loop {
        let c: [f64; 4] = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let n2: f64 = c.iter().map(|x| x * x).sum();
        if (0.01..=1.0).contains(&n2) {
            return UnitQuat::normalized(c[0], c[1], c[2], c[3]).unwrap();
        }
    }
}

pub fn random_dir<R: Rng>(rng: &mut R) -> Vec3 {
    loop {
        let v = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if (0.01..=1.0).contains(&v.norm_squared()) {
            return v.normalize();
        }
    }
}

/// A wandering stroke: steps of random length (some below any gate), a
/// slowly tumbling orientation and occasional trigger releases.
pub fn random_stream<R: Rng>(rng: &mut R, len: usize, t0: f64) -> Vec<Pose> {
    let mut p = Vec3::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
    let mut q = random_quat(rng);
    let mut heading = random_dir(rng);
    let mut t = t0;
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push(Pose::new(t, p, q, rng.gen_bool(0.92)));
        t += rng.gen_range(0.001..0.05);
        heading = (heading + random_dir(rng) * 0.4).normalize();
        p += heading * rng.gen_range(0.0..0.03);
        if rng.gen_bool(0.05) {
            q = random_quat(rng);
        } else {
            q = UnitQuat::from_rotation_vector(random_dir(rng) * rng.gen_range(0.0..0.3)) * q;
        }
    }
    out
}

/// Expected bookkeeping of a drawing session, tracked independently of the
/// library: whole-stroke actions on two stacks.
#[derive(Debug, Clone, Default)]
pub struct Model {
    pub live: Vec<u64>,
    undo: Vec<(bool, u64)>,
    redo: Vec<(bool, u64)>,
    pub next_id: u64,
    pub open: bool,
    pub corrections: u64,
}

impl Model {
    pub fn can_undo(&self) -> bool {
        !self.undo.is_empty()
    }

    pub fn can_redo(&self) -> bool {
        !self.redo.is_empty()
    }

    fn show(&mut self, id: u64) {
        self.live.push(id);
        self.live.sort_unstable();
    }

    fn hide(&mut self, id: u64) {
        self.live.retain(|&x| x != id);
    }

    /// Applies an event assumed valid.
    pub fn apply(&mut self, e: &SessionEvent) {
        match e {
            SessionEvent::StrokeBegin { .. } => self.open = true,
            SessionEvent::StrokeEnd => {
                self.open = false;
                let id = self.next_id;
                self.next_id += 1;
                self.show(id);
                self.undo.push((true, id));
                self.redo.clear();
            }
            SessionEvent::Undo => {
                if let Some((draw, id)) = self.undo.pop() {
                    if draw {
                        self.hide(id)
                    } else {
                        self.show(id)
                    }
                    self.redo.push((draw, id));
                    self.corrections += 1;
                }
            }
            SessionEvent::Redo => {
                if let Some((draw, id)) = self.redo.pop() {
                    if draw {
                        self.show(id)
                    } else {
                        self.hide(id)
                    }
                    self.undo.push((draw, id));
                    self.corrections += 1;
                }
            }
            SessionEvent::Erase { id } => {
                self.hide(*id);
                self.undo.push((false, *id));
                self.redo.clear();
                self.corrections += 1;
            }
            SessionEvent::StrokePoint { .. } | SessionEvent::SetBrush { .. } => {}
        }
    }
}

/// A valid random event log with wall-clock stamps, and the model state it ends in.
pub fn random_log<R: Rng>(rng: &mut R, actions: usize) -> (Vec<TimedEvent>, Model) {
    let mut m = Model::default();
    let mut log = Vec::new();
    let mut at = 0.0;
    let push = |log: &mut Vec<TimedEvent>, m: &mut Model, e: SessionEvent, at: &mut f64, stamp: bool| {
        m.apply(&e);
        log.push(if stamp { TimedEvent::at(e, *at) } else { TimedEvent::new(e) });
        *at += 0.25;
    };
    for _ in 0..actions {
        let stamp = rng.gen_bool(0.8);
        match rng.gen_range(0..10) {
            0..=4 => {
                let brush = match rng.gen_range(0..3) {
                    0 => None,
                    1 => Some(BrushKind::Normal),
                    _ => Some(BrushKind::Strip),
                };
                let width = rng.gen_bool(0.3).then(|| rng.gen_range(0.01..0.08));
                push(&mut log, &mut m, SessionEvent::StrokeBegin { brush, width }, &mut at, stamp);
                let n = rng.gen_range(0..25);
                for pose in random_stream(rng, n, at) {
                    at = pose.timestamp + 0.01;
                    push(&mut log, &mut m, SessionEvent::StrokePoint { pose }, &mut at, false);
                }
                push(&mut log, &mut m, SessionEvent::StrokeEnd, &mut at, stamp);
            }
            5 | 6 => push(&mut log, &mut m, SessionEvent::Undo, &mut at, stamp),
            7 => push(&mut log, &mut m, SessionEvent::Redo, &mut at, stamp),
            8 if !m.live.is_empty() => {
                let id = m.live[rng.gen_range(0..m.live.len())];
                push(&mut log, &mut m, SessionEvent::Erase { id }, &mut at, stamp);
            }
            _ => {
                let brush = if rng.gen_bool(0.5) { BrushKind::Normal } else { BrushKind::Strip };
                push(&mut log, &mut m, SessionEvent::SetBrush { brush }, &mut at, stamp);
            }
        }
    }
    (log, m)
}
