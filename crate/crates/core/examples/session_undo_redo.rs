//! Draws, erases, undoes and redoes strokes, then saves and reloads the session.

use ribbon_brush::session::{Session, SessionConfig, SessionEvent};
use ribbon_brush::{Pose, UnitQuat, Vec3};

fn draw(s: &mut Session, y: f64) -> ribbon_brush::Result<()> {
    s.apply(SessionEvent::StrokeBegin { brush: None, width: None })?;
    for i in 0..20 {
        let t = s.elapsed() + 0.02 + i as f64 * 0.02;
        let pose = Pose::new(t, Vec3::new(0.01 * i as f64, y, 0.0), UnitQuat::IDENTITY, true);
        s.apply(SessionEvent::StrokePoint { pose })?;
    }
    s.apply(SessionEvent::StrokeEnd)?;
    Ok(())
}

fn show(label: &str, s: &Session) {
    let ids: Vec<u64> = s.strokes().iter().map(|k| k.id).collect();
    println!("{label:<12} live {ids:?} corrections {} undo {} redo {}", s.correction_count(), s.undo_depth(), s.redo_depth());
}

fn main() -> ribbon_brush::Result<()> {
    let mut s = Session::new(SessionConfig::default())?;
    for y in [0.0, 0.05, 0.1] {
        draw(&mut s, y)?;
    }
    show("drawn", &s);
    s.apply(SessionEvent::Erase { id: 1 })?;
    show("erase 1", &s);
    s.apply(SessionEvent::Undo)?;
    show("undo", &s);
    s.apply(SessionEvent::Undo)?;
    show("undo", &s);
    s.apply(SessionEvent::Redo)?;
    show("redo", &s);

    let saved = s.save();
    let back = Session::load(&saved, "memory")?;
    println!("digest {} (reloaded {})", s.digest(), back.digest());
    let replayed = Session::replay(SessionConfig::default(), s.events().to_vec())?;
    assert_eq!(replayed.save(), saved);
    Ok(())
}
