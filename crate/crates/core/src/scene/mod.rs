//! Geometric kitchen-scene model.
//!
//! Objects are boxes with a yaw about the vertical axis, resting either on a
//! named horizontal surface (countertop, island, shelf) or on the floor. A
//! scene owns a walkable grid derived from its surfaces and floor objects;
//! the grid step is the navigation step.

mod changes;
mod randomize;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::OrientedBox;
use crate::io;
use crate::FORMAT_VERSION;

pub use changes::{
    apply_changes, ground_truth_relocations, ChangeKind, ChangeSet, GroundTruth, Move,
};
pub use randomize::{randomize_instances, randomize_placements, MAX_PLACEMENT_ATTEMPTS};

/// Default displacement floor for the ground-truth oracle: one grid step.
pub const DEFAULT_MIN_DISPLACEMENT: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bounds {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl Bounds {
    pub fn contains(&self, p: [f64; 3]) -> bool {
        (0..3).all(|k| p[k] >= self.min[k] && p[k] <= self.max[k])
    }
}

/// Horizontal support rectangle at a fixed height; extent is in plan view `(x, z)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Surface {
    pub id: String,
    pub height: f64,
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl Surface {
    pub fn contains_xz(&self, x: f64, z: f64) -> bool {
        x >= self.min[0] && x <= self.max[0] && z >= self.min[1] && z <= self.max[1]
    }

    /// Elevated surfaces are furniture; the agent cannot stand under them.
    pub fn is_elevated(&self) -> bool {
        self.height > 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneObject {
    pub instance_id: String,
    pub class_label: String,
    pub position: [f64; 3],
    pub half_extents: [f64; 3],
    #[serde(default)]
    pub yaw: f64,
    #[serde(default)]
    pub surface_id: Option<String>,
}

impl SceneObject {
    pub fn oriented_box(&self) -> OrientedBox {
        OrientedBox::new(self.position, self.half_extents, self.yaw)
    }
}

/// On-disk scene document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    pub format_version: u32,
    pub scene_id: String,
    pub bounds: Bounds,
    pub grid_step: f64,
    #[serde(default)]
    pub surfaces: Vec<Surface>,
    #[serde(default)]
    pub objects: Vec<SceneObject>,
}

/// Occupancy grid over the floor plan; cell `(i, j)` is centred at
/// `origin + ((i + ½)·step, (j + ½)·step)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkableGrid {
    origin: [f64; 2],
    step: f64,
    nx: usize,
    nz: usize,
    cells: Vec<bool>,
}

impl WalkableGrid {
    fn build(bounds: &Bounds, step: f64, surfaces: &[Surface], objects: &[SceneObject]) -> Self {
        let origin = [bounds.min[0], bounds.min[2]];
        let nx = ((bounds.max[0] - bounds.min[0]) / step + 1e-9).floor() as usize;
        let nz = ((bounds.max[2] - bounds.min[2]) / step + 1e-9).floor() as usize;
        let blockers: Vec<_> = objects
            .iter()
            .filter(|o| o.surface_id.is_none())
            .map(|o| o.oriented_box().footprint_aabb())
            .collect();
        let mut cells = vec![true; nx * nz];
        for j in 0..nz {
            for i in 0..nx {
                let x = origin[0] + (i as f64 + 0.5) * step;
                let z = origin[1] + (j as f64 + 0.5) * step;
                let under_surface = surfaces
                    .iter()
                    .any(|s| s.is_elevated() && s.contains_xz(x, z));
                let under_object = blockers
                    .iter()
                    .any(|(lo, hi)| x >= lo.x && x <= hi.x && z >= lo.y && z <= hi.y);
                cells[j * nx + i] = !(under_surface || under_object);
            }
        }
        Self {
            origin,
            step,
            nx,
            nz,
            cells,
        }
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.nz)
    }

    /// Cell containing a plan-view point, if inside the grid.
    pub fn cell_of(&self, x: f64, z: f64) -> Option<(usize, usize)> {
        let fi = ((x - self.origin[0]) / self.step).floor();
        let fj = ((z - self.origin[1]) / self.step).floor();
        if fi < 0.0 || fj < 0.0 {
            return None;
        }
        let (i, j) = (fi as usize, fj as usize);
        (i < self.nx && j < self.nz).then_some((i, j))
    }

    pub fn cell_center(&self, i: usize, j: usize) -> [f64; 2] {
        [
            self.origin[0] + (i as f64 + 0.5) * self.step,
            self.origin[1] + (j as f64 + 0.5) * self.step,
        ]
    }

    pub fn is_walkable_cell(&self, i: usize, j: usize) -> bool {
        i < self.nx && j < self.nz && self.cells[j * self.nx + i]
    }

    pub fn is_walkable(&self, x: f64, z: f64) -> bool {
        self.cell_of(x, z)
            .is_some_and(|(i, j)| self.is_walkable_cell(i, j))
    }
}

/// Validated, immutable scene.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    scene_id: String,
    bounds: Bounds,
    grid_step: f64,
    surfaces: Vec<Surface>,
    objects: Vec<SceneObject>,
    walkable: WalkableGrid,
}

impl Scene {
    pub fn scene_id(&self) -> &str {
        &self.scene_id
    }

    pub fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    pub fn grid_step(&self) -> f64 {
        self.grid_step
    }

    pub fn surfaces(&self) -> &[Surface] {
        &self.surfaces
    }

    pub fn surface(&self, id: &str) -> Option<&Surface> {
        self.surfaces.iter().find(|s| s.id == id)
    }

    pub fn objects(&self) -> &[SceneObject] {
        &self.objects
    }

    pub fn object(&self, instance_id: &str) -> Option<&SceneObject> {
        self.objects.iter().find(|o| o.instance_id == instance_id)
    }

    pub fn walkable(&self) -> &WalkableGrid {
        &self.walkable
    }

    pub fn to_spec(&self) -> SceneSpec {
        SceneSpec {
            format_version: FORMAT_VERSION,
            scene_id: self.scene_id.clone(),
            bounds: self.bounds.clone(),
            grid_step: self.grid_step,
            surfaces: self.surfaces.clone(),
            objects: self.objects.clone(),
        }
    }

    /// Rebuilds a scene with a different object list, re-running validation.
    pub(crate) fn with_objects(&self, objects: Vec<SceneObject>) -> Result<Scene> {
        build_scene(SceneSpec {
            objects,
            ..self.to_spec()
        })
    }

    pub fn load(path: &Path) -> Result<Scene> {
        let text = io::read_to_string(path)?;
        Scene::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Scene> {
        build_scene(io::parse_json(text, "scene")?)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_spec()).expect("scene serializes");
        s.push('\n');
        s
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        io::write_atomic(path, self.to_json().as_bytes())
    }
}

fn finite(values: &[f64]) -> bool {
    values.iter().all(|v| v.is_finite())
}

/// Validates a scene description and derives its walkable grid.
pub fn build_scene(spec: SceneSpec) -> Result<Scene> {
    if spec.format_version != FORMAT_VERSION {
        return Err(Error::FormatVersion {
            found: spec.format_version,
            expected: FORMAT_VERSION,
        });
    }
    if spec.scene_id.is_empty() {
        return Err(Error::schema("scene_id", "must be non-empty"));
    }
    let b = &spec.bounds;
    if !finite(&b.min) || !finite(&b.max) || (0..3).any(|k| b.min[k] >= b.max[k]) {
        return Err(Error::schema("bounds", "min must be strictly below max on every axis"));
    }
    if !(spec.grid_step.is_finite() && spec.grid_step > 0.0) {
        return Err(Error::schema("grid_step", "must be positive"));
    }

    let mut surface_ids = HashSet::new();
    for (i, s) in spec.surfaces.iter().enumerate() {
        let path = format!("surfaces[{i}]");
        if !surface_ids.insert(s.id.as_str()) {
            return Err(Error::schema(format!("{path}.id"), format!("duplicate surface id `{}`", s.id)));
        }
        if !finite(&s.min) || !finite(&s.max) || !s.height.is_finite() {
            return Err(Error::schema(path, "non-finite value"));
        }
        if s.min[0] >= s.max[0] || s.min[1] >= s.max[1] {
            return Err(Error::schema(format!("{path}.max"), "extent must be non-empty"));
        }
        let inside = s.min[0] >= b.min[0]
            && s.max[0] <= b.max[0]
            && s.min[1] >= b.min[2]
            && s.max[1] <= b.max[2]
            && s.height >= b.min[1]
            && s.height <= b.max[1];
        if !inside {
            return Err(Error::schema(path, format!("surface `{}` lies outside scene bounds", s.id)));
        }
    }

    let mut ids = HashSet::new();
    for (i, o) in spec.objects.iter().enumerate() {
        let path = format!("objects[{i}]");
        if o.instance_id.is_empty() {
            return Err(Error::schema(format!("{path}.instance_id"), "must be non-empty"));
        }
        if !ids.insert(o.instance_id.as_str()) {
            return Err(Error::schema(
                format!("{path}.instance_id"),
                format!("duplicate instance id `{}`", o.instance_id),
            ));
        }
        if o.class_label.is_empty() {
            return Err(Error::schema(format!("{path}.class_label"), "must be non-empty"));
        }
        if !finite(&o.position) || !finite(&o.half_extents) || !o.yaw.is_finite() {
            return Err(Error::schema(path, "non-finite value"));
        }
        if o.half_extents.iter().any(|&h| h <= 0.0) {
            return Err(Error::schema(
                format!("{path}.half_extents"),
                "all components must be strictly positive",
            ));
        }
        if !b.contains(o.position) {
            return Err(Error::schema(
                format!("{path}.position"),
                format!("`{}` lies outside scene bounds", o.instance_id),
            ));
        }
        if let Some(sid) = &o.surface_id {
            if !surface_ids.contains(sid.as_str()) {
                return Err(Error::schema(
                    format!("{path}.surface_id"),
                    format!("unknown surface `{sid}`"),
                ));
            }
        }
    }

    let pairs = overlapping_pairs(&spec.objects);
    if !pairs.is_empty() {
        return Err(Error::Placement { pairs });
    }

    let walkable = WalkableGrid::build(&spec.bounds, spec.grid_step, &spec.surfaces, &spec.objects);
    Ok(Scene {
        scene_id: spec.scene_id,
        bounds: spec.bounds,
        grid_step: spec.grid_step,
        surfaces: spec.surfaces,
        objects: spec.objects,
        walkable,
    })
}

/// Pairs of objects sharing a support (same surface, or both on the floor)
/// whose footprints overlap. Each pair is ordered by instance id.
pub(crate) fn overlapping_pairs(objects: &[SceneObject]) -> Vec<(String, String)> {
    let mut groups: BTreeMap<Option<&str>, Vec<&SceneObject>> = BTreeMap::new();
    for o in objects {
        groups.entry(o.surface_id.as_deref()).or_default().push(o);
    }
    let mut pairs = BTreeSet::new();
    for members in groups.values() {
        for (i, a) in members.iter().enumerate() {
            let ba = a.oriented_box();
            for b in &members[i + 1..] {
                if ba.footprints_overlap(&b.oriented_box()) {
                    let (x, y) = if a.instance_id < b.instance_id {
                        (a, b)
                    } else {
                        (b, a)
                    };
                    pairs.insert((x.instance_id.clone(), y.instance_id.clone()));
                }
            }
        }
    }
    pairs.into_iter().collect()
}
