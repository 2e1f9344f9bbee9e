//! Line-delimited JSON pose streams and event logs.

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::Pose;
use crate::session::TimedEvent;

fn read_jsonl<T: DeserializeOwned>(text: &str, source_name: &str) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(line).map_err(|e| Error::parse(source_name, i + 1, e.to_string()))?);
    }
    Ok(out)
}

fn write_jsonl<T: Serialize>(items: &[T]) -> String {
    let mut out = String::new();
    for it in items {
        out.push_str(&serde_json::to_string(it).expect("record serializes"));
        out.push('\n');
    }
    out
}

/// Parses `{t, p, q, trig}` lines, rejecting non-unit quaternions and
/// non-increasing timestamps.
pub fn read_poses(text: &str, source_name: &str) -> Result<Vec<Pose>> {
    let poses: Vec<Pose> = read_jsonl(text, source_name)?;
    let lines: Vec<usize> =
        text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()).map(|(i, _)| i + 1).collect();
    for (k, p) in poses.iter().enumerate() {
        p.validate().map_err(|e| Error::parse(source_name, lines[k], e.to_string()))?;
        if k > 0 && !(p.timestamp > poses[k - 1].timestamp) {
            return Err(Error::parse(source_name, lines[k], format!("timestamp {} does not increase", p.timestamp)));
        }
    }
    Ok(poses)
}

pub fn write_poses(poses: &[Pose]) -> String {
    write_jsonl(poses)
}

pub fn read_events(text: &str, source_name: &str) -> Result<Vec<TimedEvent>> {
    read_jsonl(text, source_name)
}

pub fn write_events(events: &[TimedEvent]) -> String {
    write_jsonl(events)
}

/// Maximal runs of trigger-engaged poses.
pub fn split_strokes(poses: &[Pose]) -> Vec<&[Pose]> {
    poses.split(|p| !p.trigger).filter(|s| !s.is_empty()).collect()
}

/// Concatenates strokes into one stream, inserting a trigger-released copy
/// of each stroke's last pose halfway to the next stroke.
pub fn join_strokes<'a>(strokes: impl IntoIterator<Item = &'a [Pose]>) -> Vec<Pose> {
    let mut out: Vec<Pose> = Vec::new();
    for s in strokes {
        if let (Some(last), Some(next)) = (out.last().copied(), s.first()) {
            out.push(Pose { timestamp: (last.timestamp + next.timestamp) / 2.0, trigger: false, ..last });
        }
        out.extend_from_slice(s);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{UnitQuat, Vec3};
    use crate::session::SessionEvent;

    #[test]
    fn pose_lines() {
        let poses = vec![
            Pose::new(0.0, Vec3::new(1.0, 2.0, 3.0), UnitQuat::IDENTITY, true),
            Pose::new(0.5, Vec3::ZERO, UnitQuat::IDENTITY, false),
        ];
        let text = write_poses(&poses);
        assert_eq!(text.lines().next().unwrap(), r#"{"t":0.0,"p":[1.0,2.0,3.0],"q":[1.0,0.0,0.0,0.0],"trig":true}"#);
        assert_eq!(read_poses(&text, "a.jsonl").unwrap(), poses);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let ok = r#"{"t":0.0,"p":[0,0,0],"q":[1,0,0,0],"trig":true}"#;
        let bad_q = r#"{"t":1.0,"p":[0,0,0],"q":[2,0,0,0],"trig":true}"#;
        let err = read_poses(&format!("{ok}\n\n{bad_q}\n"), "a.jsonl").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = read_poses(&format!("{ok}\n{ok}\n"), "a.jsonl").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        assert!(matches!(read_events("{\"type\":\"undo\"}\nnope\n", "e.jsonl"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn events_round_trip() {
        let ev = vec![TimedEvent::new(SessionEvent::Undo), TimedEvent::at(SessionEvent::StrokeEnd, 2.0)];
        assert_eq!(read_events(&write_events(&ev), "e").unwrap(), ev);
    }

    #[test]
    fn trigger_runs() {
        let p = |t: f64, trig| Pose::new(t, Vec3::ZERO, UnitQuat::IDENTITY, trig);
        let poses = [p(0.0, false), p(1.0, true), p(2.0, true), p(3.0, false), p(4.0, true)];
        let runs = split_strokes(&poses);
        assert_eq!(runs.iter().map(|r| r.len()).collect::<Vec<_>>(), vec![2, 1]);
        let joined = join_strokes(runs.iter().copied());
        assert_eq!(joined.len(), 4);
        assert_eq!(split_strokes(&joined), runs);
    }
}
