//! Deterministic kitchen-scene simulator and best-associated-frame
//! relocation tracker.
//!
//! The pipeline: a [`scene::Scene`] is traversed along a fixed
//! [`nav::Route`]; at every frame the synthetic detector in [`percept`]
//! produces normalized detections, collected into a [`percept::FrameLog`].
//! [`track::compare_scenes`] scores each detection, picks every object's
//! best frame in the pre-change and post-change logs, and flags objects
//! whose best frames are too far apart. [`eval`] scores those decisions
//! against geometric ground truth.

pub mod error;
pub mod eval;
pub mod geom;
pub mod io;
pub mod nav;
pub mod percept;
pub mod scene;
pub mod track;

pub use error::{Error, Result};

/// Version written to and required from every file format.
pub const FORMAT_VERSION: u32 = 1;
