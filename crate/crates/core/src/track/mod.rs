//! Best-associated-frame tracking.
//!
//! Each detection is scored by how well the frame shows the object; an
//! object's best frame is the argmax over one traversal. Because both
//! traversals follow the same route, frame indices are comparable across
//! scenes, and an object whose best frame shifts by more than the threshold
//! is reported as relocated.

mod best;
mod report;
mod score;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use best::{best_associated_frame, best_frames, BestFrame};
pub use report::{Decision, RelocationReport, ReportEntry, ReportSummary};
pub use score::{normalize_features, visibility_score, Features, MAX_SCORE};

use crate::error::{Error, Result};
use crate::io;
use crate::percept::{CameraModel, FrameLog};

pub const DEFAULT_FRAME_DISTANCE_THRESHOLD: u32 = 9;
pub const DEFAULT_MIN_CONFIDENCE: f64 = 0.80;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrackerConfig {
    /// Best-frame distance that must be strictly exceeded to flag a relocation.
    #[serde(default = "default_threshold")]
    pub frame_distance_threshold: u32,
    /// Detections need confidence strictly above this.
    #[serde(default = "default_min_confidence")]
    pub min_confidence: f64,
    /// Depth normalization range; `None` uses the log camera's `max_depth`.
    #[serde(default)]
    pub max_depth: Option<f64>,
}

fn default_threshold() -> u32 {
    DEFAULT_FRAME_DISTANCE_THRESHOLD
}

fn default_min_confidence() -> f64 {
    DEFAULT_MIN_CONFIDENCE
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            frame_distance_threshold: DEFAULT_FRAME_DISTANCE_THRESHOLD,
            min_confidence: DEFAULT_MIN_CONFIDENCE,
            max_depth: None,
        }
    }
}

impl TrackerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.min_confidence) {
            return Err(Error::Config(format!(
                "tracker min_confidence {} outside [0, 1]",
                self.min_confidence
            )));
        }
        if let Some(d) = self.max_depth {
            if !(d.is_finite() && d > 0.0) {
                return Err(Error::Config("tracker max_depth must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn depth_range(&self, camera: &CameraModel) -> f64 {
        self.max_depth.unwrap_or(camera.max_depth)
    }

    pub fn load(path: &Path) -> Result<TrackerConfig> {
        let cfg: TrackerConfig = io::parse_json(&io::read_to_string(path)?, "tracker")?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Keys seen more than once in a single frame of the log.
fn repeated_keys(log: &FrameLog) -> BTreeSet<&str> {
    let mut out = BTreeSet::new();
    for dets in log.frames.values() {
        let mut seen = BTreeSet::new();
        for d in dets {
            if !seen.insert(d.object_key.as_str()) {
                out.insert(d.object_key.as_str());
            }
        }
    }
    out
}

/// Compares best frames of a pre-change and a post-change traversal.
///
/// Objects with an admitted detection in either log get one entry, sorted by
/// key. Objects never detected above the confidence floor in either log are
/// left out.
pub fn compare_scenes(pre: &FrameLog, post: &FrameLog, cfg: &TrackerConfig) -> Result<RelocationReport> {
    cfg.validate()?;
    if pre.route_hash != post.route_hash {
        return Err(Error::Protocol(format!(
            "route hash mismatch: pre {} vs post {}",
            pre.route_hash, post.route_hash
        )));
    }
    if pre.camera != post.camera {
        return Err(Error::Protocol("camera models differ between logs".into()));
    }

    let (pre_best, post_best) = rayon::join(|| best_frames(pre, cfg), || best_frames(post, cfg));
    let mut labels: BTreeMap<&str, &str> = BTreeMap::new();
    for d in post.detections().chain(pre.detections()) {
        labels.insert(d.object_key.as_str(), d.class_label.as_str());
    }
    let ambiguous: BTreeSet<&str> = repeated_keys(pre).union(&repeated_keys(post)).copied().collect();

    let keys: BTreeSet<&String> = pre_best.keys().chain(post_best.keys()).collect();
    let entries = keys
        .into_iter()
        .map(|key| {
            let a = pre_best.get(key).cloned();
            let b = post_best.get(key).cloned();
            let frame_distance = match (&a, &b) {
                (Some(a), Some(b)) => Some(a.frame_index.abs_diff(b.frame_index)),
                _ => None,
            };
            let decision = match (&a, &b, frame_distance) {
                (Some(_), Some(_), Some(dist)) if dist > cfg.frame_distance_threshold => {
                    Decision::Relocated
                }
                (Some(_), Some(_), _) => Decision::Unchanged,
                (Some(_), None, _) => Decision::Removed,
                (None, Some(_), _) => Decision::Added,
                (None, None, _) => unreachable!("key comes from one of the maps"),
            };
            ReportEntry {
                object_key: key.clone(),
                class_label: labels.get(key.as_str()).map(|s| s.to_string()).unwrap_or_default(),
                pre_best: a,
                post_best: b,
                frame_distance,
                decision,
                ambiguous_multiplicity: ambiguous.contains(key.as_str()),
            }
        })
        .collect();
    Ok(RelocationReport::new(
        cfg.clone(),
        pre.scene_id.clone(),
        post.scene_id.clone(),
        pre.route_hash.clone(),
        entries,
    ))
}
