use serde::{Deserialize, Serialize};

use super::camera::{CameraFrame, CameraModel};
use crate::geom::OrientedBox;
use crate::nav::AgentPose;
use crate::scene::SceneObject;

/// Normalized `(cx, cy, w, h)` box in image coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
}

impl BBox {
    pub fn from_corners(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Self {
            cx: (x0 + x1) / 2.0,
            cy: (y0 + y1) / 2.0,
            w: x1 - x0,
            h: y1 - y0,
        }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.cx, self.cy, self.w, self.h]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub bbox: BBox,
    /// Euclidean distance from the camera centre to the object centre.
    pub depth: f64,
}

/// Projects the object's box through the pinhole camera at `pose`.
///
/// The box is clipped against the near plane (corners in front plus the
/// near-plane crossings of its edges), projected, and the resulting 2D
/// extent clipped to the image. `None` when nothing remains.
pub fn project_object(camera: &CameraModel, pose: &AgentPose, object: &SceneObject) -> Option<Projection> {
    let frame = CameraFrame::new(camera, pose);
    project_box(&frame, &object.oriented_box())
}

pub(crate) fn project_box(frame: &CameraFrame, obb: &OrientedBox) -> Option<Projection> {
    let corners = obb.corners().map(|c| frame.to_camera(&c));
    let near = frame.near_clip;
    let mut points = Vec::with_capacity(12);
    points.extend(corners.iter().filter(|c| c.z >= near).copied());
    if points.is_empty() {
        return None;
    }
    for (a, b) in OrientedBox::EDGES {
        let (pa, pb) = (corners[a], corners[b]);
        if (pa.z < near) != (pb.z < near) {
            let t = (near - pa.z) / (pb.z - pa.z);
            points.push(pa + (pb - pa) * t);
        }
    }
    let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in &points {
        let (u, v) = frame.to_image(p);
        x0 = x0.min(u);
        x1 = x1.max(u);
        y0 = y0.min(v);
        y1 = y1.max(v);
    }
    let (x0, x1) = (x0.max(0.0), x1.min(1.0));
    let (y0, y1) = (y0.max(0.0), y1.min(1.0));
    if x1 <= x0 || y1 <= y0 {
        return None;
    }
    Some(Projection {
        bbox: BBox::from_corners(x0, y0, x1, y1),
        depth: (obb.center - frame.center).norm(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pose() -> AgentPose {
        AgentPose {
            position: [0.0, 0.0],
            yaw: 0,
            head_pitch: 0,
            camera_height: 1.0,
        }
    }

    fn cube(x: f64, y: f64, z: f64, half: f64) -> SceneObject {
        SceneObject {
            instance_id: "cube".into(),
            class_label: "cube".into(),
            position: [x, y, z],
            half_extents: [half; 3],
            yaw: 0.0,
            surface_id: None,
        }
    }

    #[test]
    fn on_axis_is_centred() {
        let p = project_object(&CameraModel::default(), &pose(), &cube(0.0, 1.0, 3.0, 0.2)).unwrap();
        assert!((p.bbox.cx - 0.5).abs() < 1e-12);
        assert!((p.bbox.cy - 0.5).abs() < 1e-12);
        assert!((p.depth - 3.0).abs() < 1e-12);
    }

    #[test]
    fn behind_is_culled() {
        assert!(project_object(&CameraModel::default(), &pose(), &cube(0.0, 1.0, -3.0, 0.2)).is_none());
    }

    #[test]
    fn outside_frustum_is_culled() {
        // 90° hfov: at depth 2 the image spans |x| ≤ 2.
        assert!(project_object(&CameraModel::default(), &pose(), &cube(4.0, 1.0, 2.0, 0.2)).is_none());
    }

    #[test]
    fn object_to_the_right_projects_right() {
        let p = project_object(&CameraModel::default(), &pose(), &cube(1.0, 1.0, 3.0, 0.2)).unwrap();
        assert!(p.bbox.cx > 0.5);
        let mut turned = pose();
        turned.yaw = 90;
        let p = project_object(&CameraModel::default(), &turned, &cube(3.0, 1.0, -1.0, 0.2)).unwrap();
        assert!(p.bbox.cx > 0.5, "yaw 90 faces +x, so -z is to the right");
    }

    #[test]
    fn looking_down_moves_low_objects_up() {
        let obj = cube(0.0, 0.0, 2.0, 0.1);
        let level = project_object(&CameraModel::default(), &pose(), &obj).unwrap();
        let mut down = pose();
        down.head_pitch = -30;
        let tilted = project_object(&CameraModel::default(), &down, &obj).unwrap();
        assert!(tilted.bbox.cy < level.bbox.cy);
    }

    #[test]
    fn straddling_near_plane_is_clipped() {
        let p = project_object(&CameraModel::default(), &pose(), &cube(0.0, 1.0, 0.3, 0.5)).unwrap();
        assert_eq!(p.bbox.as_array(), [0.5, 0.5, 1.0, 1.0]);
    }
}
