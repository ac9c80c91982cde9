use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::score::{normalize_features, visibility_score};
use super::TrackerConfig;
use crate::percept::{Detection, FrameLog};

/// The frame that best shows one object in one traversal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestFrame {
    pub object_key: String,
    pub frame_index: u32,
    pub score: f64,
    /// Margin over the best score in any other frame (over 0 when the object
    /// was seen in a single frame).
    pub runner_up_gap: f64,
}

/// Per-frame maximum score for one object's admitted detections.
fn frame_scores<'a>(
    detections: impl Iterator<Item = &'a Detection>,
    cfg: &TrackerConfig,
    max_depth: f64,
) -> BTreeMap<u32, f64> {
    let mut scores: BTreeMap<u32, f64> = BTreeMap::new();
    for d in detections.filter(|d| d.confidence > cfg.min_confidence) {
        let s = visibility_score(&normalize_features(d, max_depth));
        scores
            .entry(d.frame_index)
            .and_modify(|best| *best = best.max(s))
            .or_insert(s);
    }
    scores
}

fn reduce(object_key: &str, scores: &BTreeMap<u32, f64>) -> Option<BestFrame> {
    let mut best: Option<(u32, f64)> = None;
    let mut runner_up = 0.0f64;
    // Ascending frame order with strict `>` keeps the earliest frame on ties.
    for (&frame, &score) in scores {
        match best {
            Some((_, b)) if score > b => {
                runner_up = runner_up.max(b);
                best = Some((frame, score));
            }
            Some(_) => runner_up = runner_up.max(score),
            None => best = Some((frame, score)),
        }
    }
    best.map(|(frame_index, score)| BestFrame {
        object_key: object_key.to_string(),
        frame_index,
        score,
        runner_up_gap: (score - runner_up).max(0.0),
    })
}

/// Highest-scoring frame for `object_key` among detections whose confidence
/// strictly exceeds `cfg.min_confidence`. Ties go to the lowest frame index.
pub fn best_associated_frame(log: &FrameLog, object_key: &str, cfg: &TrackerConfig) -> Option<BestFrame> {
    let max_depth = cfg.depth_range(&log.camera);
    let scores = frame_scores(
        log.detections().filter(|d| d.object_key == object_key),
        cfg,
        max_depth,
    );
    reduce(object_key, &scores)
}

/// Best frames for every object key in one pass over the log.
pub fn best_frames(log: &FrameLog, cfg: &TrackerConfig) -> BTreeMap<String, BestFrame> {
    let max_depth = cfg.depth_range(&log.camera);
    let mut by_key: BTreeMap<&str, Vec<&Detection>> = BTreeMap::new();
    for d in log.detections() {
        by_key.entry(d.object_key.as_str()).or_default().push(d);
    }
    by_key
        .into_iter()
        .filter_map(|(key, dets)| {
            let scores = frame_scores(dets.into_iter(), cfg, max_depth);
            reduce(key, &scores).map(|b| (key.to_string(), b))
        })
        .collect()
}
