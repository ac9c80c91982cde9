use super::camera::{CameraFrame, CameraModel};
use crate::geom::{OrientedBox, Vec3};
use crate::nav::AgentPose;
use crate::scene::{Scene, SceneObject};

/// Samples per side of the occlusion grid (k×k rays).
pub const OCCLUSION_GRID: usize = 5;

/// Fraction of the object's most camera-facing face that is unobstructed.
///
/// Rays go from the camera centre to a k×k grid of cell-centred points on
/// that face. Only samples inside the view frustum count towards the
/// denominator; a sample is blocked when the segment passes through any
/// other object's box. Returns 0 if no sample is in view.
pub fn visible_fraction(scene: &Scene, pose: &AgentPose, camera: &CameraModel, object: &SceneObject) -> f64 {
    let frame = CameraFrame::new(camera, pose);
    let occluders: Vec<OrientedBox> = scene
        .objects()
        .iter()
        .filter(|o| o.instance_id != object.instance_id)
        .map(SceneObject::oriented_box)
        .collect();
    visible_fraction_with(&frame, &object.oriented_box(), &occluders, OCCLUSION_GRID)
}

pub(crate) fn visible_fraction_with(
    frame: &CameraFrame,
    target: &OrientedBox,
    occluders: &[OrientedBox],
    k: usize,
) -> f64 {
    let Some(samples) = facing_samples(target, &frame.center, k) else {
        return 0.0;
    };
    // Cheap reject: occluders whose bounding sphere misses every ray's
    // reach cannot block anything.
    let reach = samples
        .iter()
        .map(|s| (s - frame.center).norm())
        .fold(0.0, f64::max);
    let nearby: Vec<&OrientedBox> = occluders
        .iter()
        .filter(|o| (o.center - frame.center).norm() - o.half_extents.norm() < reach)
        .collect();

    let mut in_view = 0usize;
    let mut clear = 0usize;
    for s in samples.iter().filter(|s| frame.sees(s)) {
        in_view += 1;
        if !nearby.iter().any(|o| o.blocks_segment(&frame.center, s)) {
            clear += 1;
        }
    }
    if in_view == 0 {
        0.0
    } else {
        clear as f64 / in_view as f64
    }
}

/// k×k sample points on the face whose outward normal points most directly
/// at `eye`; `None` when the eye is inside the box.
fn facing_samples(obb: &OrientedBox, eye: &Vec3, k: usize) -> Option<Vec<Vec3>> {
    let axes = obb.axes();
    let h = obb.half_extents;
    let mut best: Option<(f64, usize, f64)> = None;
    for (axis, a) in axes.iter().enumerate() {
        for sign in [1.0, -1.0] {
            let n = a * sign;
            let face_center = obb.center + n * h[axis];
            let to_eye = eye - face_center;
            let dist = to_eye.norm();
            if dist == 0.0 {
                continue;
            }
            let cos = n.dot(&to_eye) / dist;
            if best.is_none_or(|(c, _, _)| cos > c) {
                best = Some((cos, axis, sign));
            }
        }
    }
    let (cos, axis, sign) = best?;
    if cos <= 0.0 {
        return None;
    }
    let face_center = obb.center + axes[axis] * (sign * h[axis]);
    let (ua, va) = ((axis + 1) % 3, (axis + 2) % 3);
    let mut out = Vec::with_capacity(k * k);
    for i in 0..k {
        let su = 2.0 * (i as f64 + 0.5) / k as f64 - 1.0;
        for j in 0..k {
            let sv = 2.0 * (j as f64 + 0.5) / k as f64 - 1.0;
            out.push(face_center + axes[ua] * (su * h[ua]) + axes[va] * (sv * h[va]));
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{build_scene, Bounds, SceneSpec};

    fn pose() -> AgentPose {
        AgentPose {
            position: [2.125, 0.125],
            yaw: 0,
            head_pitch: 0,
            camera_height: 1.0,
        }
    }

    fn floor_box(id: &str, x: f64, z: f64, half: [f64; 3]) -> SceneObject {
        SceneObject {
            instance_id: id.into(),
            class_label: "box".into(),
            position: [x, 1.0, z],
            half_extents: half,
            yaw: 0.0,
            surface_id: None,
        }
    }

    fn scene(objects: Vec<SceneObject>) -> Scene {
        build_scene(SceneSpec {
            format_version: 1,
            scene_id: "occ".into(),
            bounds: Bounds {
                min: [0.0, 0.0, 0.0],
                max: [4.25, 3.0, 6.0],
            },
            grid_step: 0.25,
            surfaces: vec![],
            objects,
        })
        .unwrap()
    }

    #[test]
    fn lone_object_fully_visible() {
        let target = floor_box("t", 2.125, 4.0, [0.3, 0.3, 0.3]);
        let s = scene(vec![target.clone()]);
        assert_eq!(visible_fraction(&s, &pose(), &CameraModel::default(), &target), 1.0);
    }

    #[test]
    fn hidden_behind_larger_box() {
        let target = floor_box("t", 2.125, 4.0, [0.2, 0.2, 0.2]);
        let wall = floor_box("w", 2.125, 2.5, [0.8, 0.8, 0.1]);
        let s = scene(vec![target.clone(), wall]);
        assert_eq!(visible_fraction(&s, &pose(), &CameraModel::default(), &target), 0.0);
    }

    #[test]
    fn removing_occluder_never_hurts() {
        let target = floor_box("t", 2.125, 4.0, [0.3, 0.3, 0.3]);
        let a = floor_box("a", 1.9, 3.0, [0.2, 0.3, 0.1]);
        let b = floor_box("b", 2.4, 2.5, [0.2, 0.3, 0.1]);
        let both = scene(vec![target.clone(), a.clone(), b.clone()]);
        let only_a = scene(vec![target.clone(), a]);
        let cam = CameraModel::default();
        let f_both = visible_fraction(&both, &pose(), &cam, &target);
        let f_a = visible_fraction(&only_a, &pose(), &cam, &target);
        assert!(f_both < 1.0);
        assert!(f_a >= f_both);
    }
}
