use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{forward, right, Vec3};
use crate::io::quantize6;
use crate::nav::AgentPose;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraModel {
    /// Degrees.
    pub horizontal_fov: f64,
    /// Degrees.
    pub vertical_fov: f64,
    /// `(width, height)` in pixels.
    pub image_size: [u32; 2],
    /// Depth normalization range and far limit, meters.
    pub max_depth: f64,
    pub near_clip: f64,
}

impl Default for CameraModel {
    fn default() -> Self {
        Self {
            horizontal_fov: 90.0,
            vertical_fov: 90.0,
            image_size: [640, 640],
            max_depth: 8.0,
            near_clip: 0.1,
        }
    }
}

impl CameraModel {
    pub fn validate(&self) -> Result<()> {
        let fov_ok = |f: f64| f.is_finite() && f > 0.0 && f < 180.0;
        if !fov_ok(self.horizontal_fov) || !fov_ok(self.vertical_fov) {
            return Err(Error::Config("camera FOVs must lie in (0, 180) degrees".into()));
        }
        if self.image_size[0] == 0 || self.image_size[1] == 0 {
            return Err(Error::Config("camera image_size must be positive".into()));
        }
        if !(self.near_clip > 0.0 && self.near_clip < self.max_depth && self.max_depth.is_finite()) {
            return Err(Error::Config("camera requires 0 < near_clip < max_depth".into()));
        }
        Ok(())
    }

    /// Same camera with every float on the 6-decimal log grid.
    pub fn quantized(&self) -> Self {
        Self {
            horizontal_fov: quantize6(self.horizontal_fov),
            vertical_fov: quantize6(self.vertical_fov),
            image_size: self.image_size,
            max_depth: quantize6(self.max_depth),
            near_clip: quantize6(self.near_clip),
        }
    }
}

/// Camera placed at an agent pose: centre plus right/up/forward basis.
#[derive(Debug, Clone, Copy)]
pub struct CameraFrame {
    pub center: Vec3,
    pub right: Vec3,
    pub up: Vec3,
    pub forward: Vec3,
    tan_half_h: f64,
    tan_half_v: f64,
    pub near_clip: f64,
}

impl CameraFrame {
    pub fn new(camera: &CameraModel, pose: &AgentPose) -> Self {
        let yaw = f64::from(pose.yaw);
        let pitch = f64::from(pose.head_pitch).to_radians();
        let flat = forward(yaw);
        let (sp, cp) = pitch.sin_cos();
        Self {
            center: Vec3::from(pose.camera_position()),
            right: right(yaw),
            up: -flat * sp + Vec3::y() * cp,
            forward: flat * cp + Vec3::y() * sp,
            tan_half_h: (camera.horizontal_fov.to_radians() / 2.0).tan(),
            tan_half_v: (camera.vertical_fov.to_radians() / 2.0).tan(),
            near_clip: camera.near_clip,
        }
    }

    /// Camera-space coordinates `(x right, y up, z forward)`.
    pub fn to_camera(&self, p: &Vec3) -> Vec3 {
        let d = p - self.center;
        Vec3::new(d.dot(&self.right), d.dot(&self.up), d.dot(&self.forward))
    }

    /// Normalized image coordinates of a camera-space point in front of the
    /// camera; `(0, 0)` is the top-left corner.
    pub fn to_image(&self, c: &Vec3) -> (f64, f64) {
        (
            0.5 + c.x / (2.0 * c.z * self.tan_half_h),
            0.5 - c.y / (2.0 * c.z * self.tan_half_v),
        )
    }

    /// In front of the near plane and inside the image.
    pub fn sees(&self, p: &Vec3) -> bool {
        let c = self.to_camera(p);
        if c.z < self.near_clip {
            return false;
        }
        let (u, v) = self.to_image(&c);
        (0.0..=1.0).contains(&u) && (0.0..=1.0).contains(&v)
    }
}
