use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::camera::{CameraFrame, CameraModel};
use super::occlusion::{visible_fraction_with, OCCLUSION_GRID};
use super::project::{project_box, BBox};
use crate::error::{Error, Result};
use crate::geom::OrientedBox;
use crate::io::quantize6;
use crate::nav::AgentPose;
use crate::scene::{Scene, SceneObject};

/// One detector output in a frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub frame_index: u32,
    /// Instance id for synthetic logs, class label for external logs.
    pub object_key: String,
    pub class_label: String,
    pub bbox: BBox,
    /// Meters from camera centre to object centre.
    pub depth: f64,
    pub confidence: f64,
}

/// Parameters of the synthetic occlusion-aware detector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorConfig {
    pub seed: u64,
    pub min_visible_fraction: f64,
    pub confidence_noise_sd: f64,
    pub base_confidence: f64,
    pub visibility_weight: f64,
    pub miss_rate_at_threshold: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            min_visible_fraction: 0.2,
            confidence_noise_sd: 0.0,
            base_confidence: 0.55,
            visibility_weight: 0.4,
            miss_rate_at_threshold: 0.0,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("min_visible_fraction", self.min_visible_fraction),
            ("confidence_noise_sd", self.confidence_noise_sd),
            ("base_confidence", self.base_confidence),
            ("visibility_weight", self.visibility_weight),
            ("miss_rate_at_threshold", self.miss_rate_at_threshold),
        ];
        for (name, v) in fields {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("detector {name} = {v} is outside [0, 1]")));
            }
        }
        Ok(())
    }

    /// Miss probability at a given visible fraction: the configured rate at
    /// the visibility threshold, falling linearly to zero at full visibility.
    pub fn miss_probability(&self, visible_fraction: f64) -> f64 {
        if self.min_visible_fraction >= 1.0 {
            return 0.0;
        }
        let scale = (1.0 - visible_fraction) / (1.0 - self.min_visible_fraction);
        self.miss_rate_at_threshold * scale.clamp(0.0, 1.0)
    }
}

// FNV-1a; stable across platforms and toolchains, unlike std's hasher.
fn fnv1a(bytes: &[u8], mut h: u64) -> u64 {
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Independent noise stream for one (seed, frame, instance) triple.
pub(crate) fn noise_stream(seed: u64, frame_index: u32, instance_id: &str) -> ChaCha8Rng {
    let mut h = 0xcbf2_9ce4_8422_2325;
    h = fnv1a(&seed.to_le_bytes(), h);
    h = fnv1a(&frame_index.to_le_bytes(), h);
    h = fnv1a(instance_id.as_bytes(), h);
    ChaCha8Rng::seed_from_u64(h)
}

/// Synthetic detections for every sufficiently visible object at `pose`.
///
/// Objects beyond the camera's `max_depth` are not detected. Output is sorted
/// by object key and every float is on the 6-decimal log grid.
pub fn detect(
    scene: &Scene,
    pose: &AgentPose,
    camera: &CameraModel,
    cfg: &DetectorConfig,
    frame_index: u32,
) -> Vec<Detection> {
    let frame = CameraFrame::new(camera, pose);
    let boxes: Vec<OrientedBox> = scene.objects().iter().map(SceneObject::oriented_box).collect();
    let mut out = Vec::new();
    let mut occluders = Vec::with_capacity(boxes.len());
    for (idx, object) in scene.objects().iter().enumerate() {
        let Some(proj) = project_box(&frame, &boxes[idx]) else {
            continue;
        };
        if proj.depth > camera.max_depth {
            continue;
        }
        occluders.clear();
        occluders.extend(
            boxes
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != idx)
                .map(|(_, b)| *b),
        );
        let fraction = visible_fraction_with(&frame, &boxes[idx], &occluders, OCCLUSION_GRID);
        if fraction <= 0.0 || fraction < cfg.min_visible_fraction {
            continue;
        }

        let mut rng = noise_stream(cfg.seed, frame_index, &object.instance_id);
        let miss_draw: f64 = rng.gen();
        let noise: f64 = rng.sample(StandardNormal);
        if miss_draw < cfg.miss_probability(fraction) {
            continue;
        }
        let confidence = (cfg.base_confidence
            + cfg.visibility_weight * fraction
            + cfg.confidence_noise_sd * noise)
            .clamp(0.0, 1.0);

        let Some(bbox) = quantize_bbox(&proj.bbox) else {
            continue;
        };
        out.push(Detection {
            frame_index,
            object_key: object.instance_id.clone(),
            class_label: object.class_label.clone(),
            bbox,
            depth: quantize6(proj.depth),
            confidence: quantize6(confidence),
        });
    }
    out.sort_by(|a, b| a.object_key.cmp(&b.object_key));
    out
}

/// Rounds box edges to the log grid; drops boxes that collapse to zero size.
fn quantize_bbox(b: &BBox) -> Option<BBox> {
    let x0 = quantize6((b.cx - b.w / 2.0).max(0.0));
    let x1 = quantize6((b.cx + b.w / 2.0).min(1.0));
    let y0 = quantize6((b.cy - b.h / 2.0).max(0.0));
    let y1 = quantize6((b.cy + b.h / 2.0).min(1.0));
    let q = BBox {
        cx: quantize6((x0 + x1) / 2.0),
        cy: quantize6((y0 + y1) / 2.0),
        w: quantize6(x1 - x0),
        h: quantize6(y1 - y0),
    };
    (q.w > 0.0 && q.h > 0.0).then_some(q)
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
            scene_id: "det".into(),
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
    fn noise_free_confidence() {
        let s = scene(vec![floor_box("t", 2.125, 4.0, [0.3, 0.3, 0.3])]);
        let cfg = DetectorConfig::default();
        let dets = detect(&s, &pose(), &CameraModel::default(), &cfg, 0);
        assert_eq!(dets.len(), 1);
        assert_eq!(dets[0].confidence, quantize6(0.55 + 0.4));
        assert_eq!(dets[0].object_key, "t");
    }

    #[test]
    fn below_visibility_threshold_absent() {
        let s = scene(vec![
            floor_box("t", 2.125, 4.0, [0.2, 0.2, 0.2]),
            floor_box("w", 2.125, 2.5, [0.8, 0.8, 0.1]),
        ]);
        let dets = detect(&s, &pose(), &CameraModel::default(), &DetectorConfig::default(), 0);
        assert_eq!(dets.iter().map(|d| d.object_key.as_str()).collect::<Vec<_>>(), vec!["w"]);
    }

    #[test]
    fn far_objects_not_detected() {
        let s = scene(vec![floor_box("t", 2.125, 5.5, [0.3, 0.3, 0.3])]);
        let camera = CameraModel {
            max_depth: 4.0,
            ..CameraModel::default()
        };
        assert!(detect(&s, &pose(), &camera, &DetectorConfig::default(), 0).is_empty());
    }

    #[test]
    fn deterministic_with_noise() {
        let s = scene(vec![
            floor_box("a", 1.5, 4.0, [0.3, 0.3, 0.3]),
            floor_box("b", 2.7, 4.0, [0.3, 0.3, 0.3]),
        ]);
        let cfg = DetectorConfig {
            seed: 9,
            confidence_noise_sd: 0.05,
            miss_rate_at_threshold: 0.2,
            ..DetectorConfig::default()
        };
        let a = detect(&s, &pose(), &CameraModel::default(), &cfg, 3);
        let b = detect(&s, &pose(), &CameraModel::default(), &cfg, 3);
        assert_eq!(a, b);
        let c = detect(&s, &pose(), &CameraModel::default(), &cfg, 4);
        assert_ne!(a, c, "a different frame draws different noise");
    }

    #[test]
    fn miss_probability_is_linear() {
        let cfg = DetectorConfig {
            min_visible_fraction: 0.2,
            miss_rate_at_threshold: 0.2,
            ..DetectorConfig::default()
        };
        assert!((cfg.miss_probability(0.2) - 0.2).abs() < 1e-12);
        assert!((cfg.miss_probability(0.6) - 0.1).abs() < 1e-12);
        assert_eq!(cfg.miss_probability(1.0), 0.0);
    }

    #[test]
    fn config_ranges() {
        let cfg = DetectorConfig {
            base_confidence: 1.5,
            ..DetectorConfig::default()
        };
        assert!(cfg.validate().is_err());
        assert!(DetectorConfig::default().validate().is_ok());
    }
}
