use serde::{Deserialize, Serialize};

use crate::percept::Detection;

/// Normalized inputs to the visibility score, each in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Features {
    /// Depth over the normalization range.
    pub d: f64,
    pub w: f64,
    pub h: f64,
    /// Box-centre distance from the image centre; a corner maps to 1.
    pub c: f64,
    /// Detector confidence.
    pub f: f64,
}

impl Features {
    pub fn is_valid(&self) -> bool {
        [self.d, self.w, self.h, self.c, self.f]
            .iter()
            .all(|v| (0.0..=1.0).contains(v))
    }
}

pub const MAX_SCORE: f64 = 14.0;

pub fn normalize_features(det: &Detection, max_depth: f64) -> Features {
    let unit = |v: f64| v.clamp(0.0, 1.0);
    let (dx, dy) = (det.bbox.cx - 0.5, det.bbox.cy - 0.5);
    Features {
        d: unit(det.depth / max_depth),
        w: unit(det.bbox.w),
        h: unit(det.bbox.h),
        c: unit((dx * dx + dy * dy).sqrt() / std::f64::consts::FRAC_1_SQRT_2),
        f: unit(det.confidence),
    }
}

/// `2(1 − D) + 10·W·H + (1 − C) + F`, in `[0, 14]` for valid features.
pub fn visibility_score(f: &Features) -> f64 {
    2.0 * (1.0 - f.d) + 10.0 * f.w * f.h + (1.0 - f.c) + f.f
}
