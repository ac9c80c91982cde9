//! Generators and fixture paths shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use reloc::nav::{Action, AgentPose, Route};
use reloc::percept::{BBox, CameraModel, Detection, FrameLog};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn micro(n: i64) -> f64 {
    n as f64 / 1e6
}

/// A detection whose floats all sit on the six-decimal log grid.
///
/// `coarse` draws from a handful of values so that equal scores across frames
/// are common.
pub fn random_detection(rng: &mut ChaCha8Rng, frame_index: u32, key: &str, coarse: bool) -> Detection {
    let (hw, hh, cx, cy, depth, confidence) = if coarse {
        let hw = 50_000 * rng.gen_range(1..=4i64);
        let hh = 50_000 * rng.gen_range(1..=4i64);
        let cx = hw + 50_000 * rng.gen_range(0..=(1_000_000 - 2 * hw) / 50_000);
        let cy = hh + 50_000 * rng.gen_range(0..=(1_000_000 - 2 * hh) / 50_000);
        let depth = 500_000 * rng.gen_range(1..=8i64);
        let confidence = *[700_000, 800_000, 810_000, 900_000, 1_000_000].choose(rng).unwrap();
        (hw, hh, cx, cy, depth, confidence)
    } else {
        let hw = rng.gen_range(1..=500_000i64);
        let hh = rng.gen_range(1..=500_000i64);
        let cx = rng.gen_range(hw..=1_000_000 - hw);
        let cy = rng.gen_range(hh..=1_000_000 - hh);
        (hw, hh, cx, cy, rng.gen_range(1..=20_000_000i64), rng.gen_range(0..=1_000_000i64))
    };
    Detection {
        frame_index,
        object_key: key.to_string(),
        class_label: key.trim_end_matches(|c: char| c.is_ascii_digit() || c == '_').to_string(),
        bbox: BBox { cx: micro(cx), cy: micro(cy), w: micro(2 * hw), h: micro(2 * hh) },
        depth: micro(depth),
        confidence: micro(confidence),
    }
}

/// Up to `max_frames` frames drawn from `0..2·max_frames`, each holding a
/// random subset of up to `max_objects` keys. A few keys repeat within a frame.
pub fn random_framelog(rng: &mut ChaCha8Rng, max_frames: usize, max_objects: usize, coarse: bool) -> FrameLog {
    let n_objects = rng.gen_range(1..=max_objects);
    let keys: Vec<String> = (0..n_objects).map(|i| format!("obj_{i:02}")).collect();
    let n_frames = rng.gen_range(0..=max_frames);
    let mut indices: Vec<u32> = (0..2 * max_frames as u32).collect();
    indices.shuffle(rng);
    indices.truncate(n_frames);

    let mut frames = BTreeMap::new();
    let mut last: BTreeMap<&str, Detection> = BTreeMap::new();
    for frame_index in indices {
        let mut dets = Vec::new();
        for key in &keys {
            if rng.gen_bool(0.5) {
                let det = match last.get(key.as_str()) {
                    // Same view in another frame: an exact score tie.
                    Some(prev) if coarse && rng.gen_bool(0.25) => Detection { frame_index, ..prev.clone() },
                    _ => random_detection(rng, frame_index, key, coarse),
                };
                last.insert(key, det.clone());
                dets.push(det);
                if rng.gen_bool(0.05) {
                    dets.push(random_detection(rng, frame_index, key, coarse));
                }
            }
        }
        frames.insert(frame_index, dets);
    }
    FrameLog {
        scene_id: format!("scene \"{}\"", rng.gen::<u16>()),
        route_hash: format!("{:016x}", rng.gen::<u64>()),
        camera: CameraModel::default(),
        frames,
    }
}

pub fn random_route(rng: &mut ChaCha8Rng) -> Route {
    let n = rng.gen_range(0..60);
    Route {
        start_pose: AgentPose {
            position: [rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0)],
            yaw: 90 * rng.gen_range(0..4),
            head_pitch: 30 * rng.gen_range(-1..=1),
            camera_height: rng.gen_range(0.5..2.0),
        },
        grid_step: rng.gen_range(0.05..1.0),
        actions: (0..n).map(|_| *Action::ALL.choose(rng).unwrap()).collect(),
    }
}
