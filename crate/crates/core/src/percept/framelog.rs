//! Line-delimited frame log.
//!
//! Line 1 is a header `{scene_id, route_hash, camera, format_version}`; each
//! further line is `{frame_index, detections[]}` with `bbox` as
//! `[cx, cy, w, h]`. Field order is fixed and floats are written with six
//! decimals so logs are byte-stable.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;

use super::camera::CameraModel;
use super::detector::Detection;
use super::project::BBox;
use crate::error::{Error, Result};
use crate::io;
use crate::FORMAT_VERSION;

// Slack for boxes whose edges were rounded to six decimals.
const BBOX_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FrameLog {
    pub scene_id: String,
    pub route_hash: String,
    pub camera: CameraModel,
    pub frames: BTreeMap<u32, Vec<Detection>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HeaderRecord {
    scene_id: String,
    route_hash: String,
    camera: CameraModel,
    format_version: u32,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameRecord {
    frame_index: u32,
    detections: Vec<DetectionRecord>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DetectionRecord {
    object_key: String,
    class_label: String,
    bbox: [f64; 4],
    depth: f64,
    confidence: f64,
}

fn json_str(s: &str) -> String {
    serde_json::to_string(s).expect("strings serialize")
}

impl FrameLog {
    pub fn detection_count(&self) -> usize {
        self.frames.values().map(Vec::len).sum()
    }

    /// Every detection in frame order.
    pub fn detections(&self) -> impl Iterator<Item = &Detection> {
        self.frames.values().flatten()
    }

    pub fn to_jsonl(&self) -> String {
        let c = &self.camera;
        let mut out = String::new();
        writeln!(
            out,
            "{{\"scene_id\":{},\"route_hash\":{},\"camera\":{{\"horizontal_fov\":{:.6},\"vertical_fov\":{:.6},\"image_size\":[{},{}],\"max_depth\":{:.6},\"near_clip\":{:.6}}},\"format_version\":{}}}",
            json_str(&self.scene_id),
            json_str(&self.route_hash),
            c.horizontal_fov,
            c.vertical_fov,
            c.image_size[0],
            c.image_size[1],
            c.max_depth,
            c.near_clip,
            FORMAT_VERSION,
        )
        .unwrap();
        for (frame_index, dets) in &self.frames {
            write!(out, "{{\"frame_index\":{frame_index},\"detections\":[").unwrap();
            for (i, d) in dets.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                let b = &d.bbox;
                write!(
                    out,
                    "{{\"object_key\":{},\"class_label\":{},\"bbox\":[{:.6},{:.6},{:.6},{:.6}],\"depth\":{:.6},\"confidence\":{:.6}}}",
                    json_str(&d.object_key),
                    json_str(&d.class_label),
                    b.cx,
                    b.cy,
                    b.w,
                    b.h,
                    d.depth,
                    d.confidence,
                )
                .unwrap();
            }
            out.push_str("]}\n");
        }
        out
    }

    /// Parses and validates a log. An empty document is an empty log.
    pub fn from_jsonl(text: &str) -> Result<FrameLog> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l))
            .filter(|(_, l)| !l.trim().is_empty());
        let Some((line_no, header)) = lines.next() else {
            return Ok(FrameLog::default());
        };
        let header: HeaderRecord = serde_json::from_str(header).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if header.format_version != FORMAT_VERSION {
            return Err(Error::FormatVersion {
                found: header.format_version,
                expected: FORMAT_VERSION,
            });
        }
        header.camera.validate().map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;

        let mut frames = BTreeMap::new();
        for (line_no, line) in lines {
            let rec: FrameRecord = serde_json::from_str(line).map_err(|e| Error::Parse {
                line: line_no,
                message: e.to_string(),
            })?;
            let dets = rec
                .detections
                .into_iter()
                .map(|d| {
                    let det = Detection {
                        frame_index: rec.frame_index,
                        object_key: d.object_key,
                        class_label: d.class_label,
                        bbox: BBox {
                            cx: d.bbox[0],
                            cy: d.bbox[1],
                            w: d.bbox[2],
                            h: d.bbox[3],
                        },
                        depth: d.depth,
                        confidence: d.confidence,
                    };
                    validate_detection(&det).map(|()| det)
                })
                .collect::<Result<Vec<_>>>()?;
            if frames.insert(rec.frame_index, dets).is_some() {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("duplicate frame_index {}", rec.frame_index),
                });
            }
        }
        Ok(FrameLog {
            scene_id: header.scene_id,
            route_hash: header.route_hash,
            camera: header.camera,
            frames,
        })
    }

    /// Checks every structural invariant without a round trip through text.
    pub fn validate(&self) -> Result<()> {
        self.camera.validate()?;
        for (key, dets) in &self.frames {
            for d in dets {
                if d.frame_index != *key {
                    return Err(Error::Detection {
                        frame_index: *key,
                        object_key: d.object_key.clone(),
                        message: format!("detection carries frame_index {}", d.frame_index),
                    });
                }
                validate_detection(d)?;
            }
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<FrameLog> {
        FrameLog::from_jsonl(&io::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        io::write_atomic(path, self.to_jsonl().as_bytes())
    }
}

pub(crate) fn validate_detection(d: &Detection) -> Result<()> {
    let fail = |message: String| {
        Err(Error::Detection {
            frame_index: d.frame_index,
            object_key: d.object_key.clone(),
            message,
        })
    };
    let BBox { cx, cy, w, h } = d.bbox;
    if ![cx, cy, w, h, d.depth, d.confidence].iter().all(|v| v.is_finite()) {
        return fail("non-finite value".into());
    }
    if !(w > 0.0 && h > 0.0) {
        return fail(format!("bbox size must be positive, got w={w}, h={h}"));
    }
    let lo = -BBOX_TOLERANCE;
    let hi = 1.0 + BBOX_TOLERANCE;
    if cx - w / 2.0 < lo || cx + w / 2.0 > hi || cy - h / 2.0 < lo || cy + h / 2.0 > hi {
        return fail(format!("bbox [{cx}, {cy}, {w}, {h}] leaves the unit square"));
    }
    if d.depth <= 0.0 {
        return fail(format!("depth must be positive, got {}", d.depth));
    }
    if !(0.0..=1.0).contains(&d.confidence) {
        return fail(format!("confidence {} outside [0, 1]", d.confidence));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn det(frame: u32, key: &str, cx: f64) -> Detection {
        Detection {
            frame_index: frame,
            object_key: key.into(),
            class_label: "mug".into(),
            bbox: BBox {
                cx,
                cy: 0.5,
                w: 0.1,
                h: 0.2,
            },
            depth: 1.25,
            confidence: 0.9,
        }
    }

    fn sample() -> FrameLog {
        let mut frames = BTreeMap::new();
        frames.insert(0, vec![det(0, "mug_01", 0.25)]);
        frames.insert(1, vec![]);
        frames.insert(2, vec![det(2, "mug_01", 0.5), det(2, "mug \"2\"", 0.75)]);
        FrameLog {
            scene_id: "kitchen".into(),
            route_hash: "abc".into(),
            camera: CameraModel::default(),
            frames,
        }
    }

    #[test]
    fn round_trip() {
        let log = sample();
        let text = log.to_jsonl();
        assert_eq!(FrameLog::from_jsonl(&text).unwrap(), log);
        assert_eq!(text.lines().count(), 4);
    }

    #[test]
    fn golden_lines() {
        let text = sample().to_jsonl();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines[0],
            r#"{"scene_id":"kitchen","route_hash":"abc","camera":{"horizontal_fov":90.000000,"vertical_fov":90.000000,"image_size":[640,640],"max_depth":8.000000,"near_clip":0.100000},"format_version":1}"#
        );
        assert_eq!(
            lines[1],
            r#"{"frame_index":0,"detections":[{"object_key":"mug_01","class_label":"mug","bbox":[0.250000,0.500000,0.100000,0.200000],"depth":1.250000,"confidence":0.900000}]}"#
        );
        assert_eq!(lines[2], r#"{"frame_index":1,"detections":[]}"#);
    }

    #[test]
    fn out_of_range_bbox_rejected() {
        let mut log = sample();
        log.frames.get_mut(&0).unwrap()[0].bbox.cx = 1.4;
        let err = FrameLog::from_jsonl(&log.to_jsonl()).unwrap_err();
        match err {
            Error::Detection { frame_index, object_key, .. } => {
                assert_eq!(frame_index, 0);
                assert_eq!(object_key, "mug_01");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_line_reports_number() {
        let mut text = sample().to_jsonl();
        text.push_str("{\"frame_index\": 3, \"detections\": [\n");
        match FrameLog::from_jsonl(&text).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_document_is_empty_log() {
        let log = FrameLog::from_jsonl("").unwrap();
        assert!(log.frames.is_empty());
        assert!(log.validate().is_ok());
    }

    #[test]
    fn duplicate_frame_rejected() {
        let text = sample().to_jsonl() + "{\"frame_index\":0,\"detections\":[]}\n";
        assert!(matches!(FrameLog::from_jsonl(&text), Err(Error::Parse { line: 5, .. })));
    }
}
