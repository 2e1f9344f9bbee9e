//! Ribbon-brush geometry kernel, simulator and metrics.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod brush;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod io;
pub mod metrics;
pub mod obj;
pub mod planner;
pub mod service;
pub mod session;
pub mod stats;
pub mod surface;

pub use brush::{BrushKind, RibbonBuilder, RibbonStrip, Ruling};
pub use error::{Error, Result};
pub use geometry::{ControllerFrame, Pose, UnitQuat, Vec3};
pub use surface::{ReferenceSurface, SurfaceKind};
