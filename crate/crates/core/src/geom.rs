//! Small geometry kernel: yaw frames, oriented boxes, ray casts, footprint overlap.
//!
//! World frame: `y` is up, the floor plan is `(x, z)`. Yaw is measured in
//! degrees about `+y`; yaw 0 faces `+z` and yaw 90 faces `+x`.

use nalgebra::{Vector2, Vector3};

pub type Vec3 = Vector3<f64>;
pub type Vec2 = Vector2<f64>;

const EPS: f64 = 1e-9;

/// Horizontal forward direction for a yaw angle.
pub fn forward(yaw_deg: f64) -> Vec3 {
    let r = yaw_deg.to_radians();
    Vec3::new(r.sin(), 0.0, r.cos())
}

/// Horizontal right-hand direction for a yaw angle (yaw 0 → `+x`).
pub fn right(yaw_deg: f64) -> Vec3 {
    let r = yaw_deg.to_radians();
    Vec3::new(r.cos(), 0.0, -r.sin())
}

/// Box with a yaw about the vertical axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedBox {
    pub center: Vec3,
    pub half_extents: Vec3,
    pub yaw_deg: f64,
}

impl OrientedBox {
    pub fn new(center: [f64; 3], half_extents: [f64; 3], yaw_deg: f64) -> Self {
        Self {
            center: Vec3::from(center),
            half_extents: Vec3::from(half_extents),
            yaw_deg,
        }
    }

    /// Local axes (x, y, z) expressed in world coordinates.
    pub fn axes(&self) -> [Vec3; 3] {
        [right(self.yaw_deg), Vec3::y(), forward(self.yaw_deg)]
    }

    pub fn corners(&self) -> [Vec3; 8] {
        let [ax, ay, az] = self.axes();
        let h = self.half_extents;
        let mut out = [Vec3::zeros(); 8];
        for (i, c) in out.iter_mut().enumerate() {
            let sx = if i & 1 == 0 { -1.0 } else { 1.0 };
            let sy = if i & 2 == 0 { -1.0 } else { 1.0 };
            let sz = if i & 4 == 0 { -1.0 } else { 1.0 };
            *c = self.center + ax * (sx * h.x) + ay * (sy * h.y) + az * (sz * h.z);
        }
        out
    }

    /// The 12 edges as corner index pairs (indices into [`Self::corners`]).
    pub const EDGES: [(usize, usize); 12] = [
        (0, 1),
        (2, 3),
        (4, 5),
        (6, 7),
        (0, 2),
        (1, 3),
        (4, 6),
        (5, 7),
        (0, 4),
        (1, 5),
        (2, 6),
        (3, 7),
    ];

    fn to_local(&self, p: &Vec3) -> Vec3 {
        let [ax, ay, az] = self.axes();
        let d = p - self.center;
        Vec3::new(d.dot(&ax), d.dot(&ay), d.dot(&az))
    }

    /// Parametric interval `[t0, t1]` where `origin + t·dir` lies inside the box.
    pub fn ray_interval(&self, origin: &Vec3, dir: &Vec3) -> Option<(f64, f64)> {
        let [ax, ay, az] = self.axes();
        let o = self.to_local(origin);
        let d = Vec3::new(dir.dot(&ax), dir.dot(&ay), dir.dot(&az));
        let mut t0 = f64::NEG_INFINITY;
        let mut t1 = f64::INFINITY;
        for k in 0..3 {
            let h = self.half_extents[k];
            if d[k].abs() < 1e-15 {
                if o[k] < -h || o[k] > h {
                    return None;
                }
                continue;
            }
            let ta = (-h - o[k]) / d[k];
            let tb = (h - o[k]) / d[k];
            let (lo, hi) = if ta < tb { (ta, tb) } else { (tb, ta) };
            t0 = t0.max(lo);
            t1 = t1.min(hi);
            if t0 > t1 {
                return None;
            }
        }
        Some((t0, t1))
    }

    /// True when the open segment `from → to` passes through the box.
    pub fn blocks_segment(&self, from: &Vec3, to: &Vec3) -> bool {
        let dir = to - from;
        match self.ray_interval(from, &dir) {
            Some((t0, t1)) => t1 > EPS && t0 < 1.0 - EPS && t1 - t0 > EPS,
            None => false,
        }
    }

    /// Plan-view footprint corners in `(x, z)`.
    pub fn footprint(&self) -> [Vec2; 4] {
        let ax = right(self.yaw_deg);
        let az = forward(self.yaw_deg);
        let h = self.half_extents;
        let c = Vec2::new(self.center.x, self.center.z);
        let ex = Vec2::new(ax.x, ax.z) * h.x;
        let ez = Vec2::new(az.x, az.z) * h.z;
        [c - ex - ez, c + ex - ez, c + ex + ez, c - ex + ez]
    }

    /// Axis-aligned plan-view extent `(min, max)` of the footprint.
    pub fn footprint_aabb(&self) -> (Vec2, Vec2) {
        let fp = self.footprint();
        let mut lo = fp[0];
        let mut hi = fp[0];
        for p in &fp[1..] {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        (lo, hi)
    }

    /// Plan-view interiors overlap (touching edges do not count).
    pub fn footprints_overlap(&self, other: &OrientedBox) -> bool {
        let a = self.footprint();
        let b = other.footprint();
        for poly in [&a, &b] {
            for i in 0..2 {
                let e = poly[i + 1] - poly[i];
                let axis = Vec2::new(-e.y, e.x);
                let (amin, amax) = project(&a, &axis);
                let (bmin, bmax) = project(&b, &axis);
                let scale = axis.norm().max(1.0);
                if amax <= bmin + EPS * scale || bmax <= amin + EPS * scale {
                    return false;
                }
            }
        }
        true
    }
}

fn project(poly: &[Vec2; 4], axis: &Vec2) -> (f64, f64) {
    poly.iter()
        .map(|p| p.dot(axis))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        })
}
