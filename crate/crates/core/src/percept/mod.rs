//! Synthetic perception: pinhole projection, ray-sampled occlusion, a seeded
//! confidence/miss model, and the frame-log format shared with external
//! detectors.

mod camera;
mod detector;
mod framelog;
mod occlusion;
mod project;

use rayon::prelude::*;

pub use camera::{CameraFrame, CameraModel};
pub use detector::{detect, Detection, DetectorConfig};
pub use framelog::FrameLog;
pub use occlusion::{visible_fraction, OCCLUSION_GRID};
pub use project::{project_object, BBox, Projection};

use crate::error::Result;
use crate::nav::{execute_route, Route};
use crate::scene::Scene;

/// Drives the route through the scene and runs the detector at every frame.
///
/// Frames are computed in parallel; the log is keyed by frame index so the
/// result does not depend on scheduling.
pub fn capture_scene(
    scene: &Scene,
    route: &Route,
    camera: &CameraModel,
    cfg: &DetectorConfig,
) -> Result<FrameLog> {
    camera.validate()?;
    cfg.validate()?;
    let trace = execute_route(scene, route)?;
    let camera = camera.quantized();
    let frames = trace
        .entries
        .par_iter()
        .map(|e| (e.frame_index, detect(scene, &e.pose, &camera, cfg, e.frame_index)))
        .collect();
    Ok(FrameLog {
        scene_id: scene.scene_id().to_string(),
        route_hash: route.content_hash(),
        camera,
        frames,
    })
}
