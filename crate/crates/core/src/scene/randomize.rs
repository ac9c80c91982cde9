use std::collections::BTreeSet;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Scene, SceneObject};
use crate::error::{Error, Result};

/// Rejection-sampling budget per object.
pub const MAX_PLACEMENT_ATTEMPTS: u32 = 100;

/// Re-places every object whose class is in `movable_classes`.
///
/// Surface-resting objects land on a surface drawn with probability
/// proportional to its area; floor objects
/// stay on the floor. The result is a pure function of the arguments.
pub fn randomize_placements(
    scene: &Scene,
    seed: u64,
    movable_classes: &BTreeSet<String>,
) -> Result<Scene> {
    if movable_classes.is_empty() {
        return Err(Error::Config("movable_classes must be non-empty".into()));
    }
    let ids: Vec<String> = scene
        .objects()
        .iter()
        .filter(|o| movable_classes.contains(&o.class_label))
        .map(|o| o.instance_id.clone())
        .collect();
    randomize_instances(scene, seed, &ids, 0.0)
}

/// Re-places the named instances, requiring each to end up strictly farther
/// than `min_move` meters from where it started.
pub fn randomize_instances(
    scene: &Scene,
    seed: u64,
    instance_ids: &[String],
    min_move: f64,
) -> Result<Scene> {
    let ids: BTreeSet<&str> = instance_ids.iter().map(String::as_str).collect();
    if ids.is_empty() {
        return Ok(scene.clone());
    }
    for id in &ids {
        if scene.object(id).is_none() {
            return Err(Error::UnknownInstance(id.to_string()));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut objects = scene.objects().to_vec();
    for id in ids {
        let idx = objects
            .iter()
            .position(|o| o.instance_id == id)
            .expect("checked above");
        let original = objects[idx].clone();
        let mut placed = None;
        for _ in 0..MAX_PLACEMENT_ATTEMPTS {
            let Some(candidate) = sample_placement(scene, &original, &mut rng) else {
                continue;
            };
            let moved = distance(candidate.position, original.position);
            if moved <= min_move {
                continue;
            }
            let clear = objects.iter().enumerate().all(|(j, other)| {
                j == idx
                    || other.surface_id != candidate.surface_id
                    || !candidate
                        .oriented_box()
                        .footprints_overlap(&other.oriented_box())
            });
            if clear {
                placed = Some(candidate);
                break;
            }
        }
        match placed {
            Some(p) => objects[idx] = p,
            None => {
                return Err(Error::Randomization {
                    instance_id: id.to_string(),
                    attempts: MAX_PLACEMENT_ATTEMPTS,
                })
            }
        }
    }
    scene.with_objects(objects)
}

fn distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Draws one candidate pose; `None` when the drawn support cannot fit the object.
fn sample_placement(scene: &Scene, obj: &SceneObject, rng: &mut ChaCha8Rng) -> Option<SceneObject> {
    let yaw: f64 = rng.gen_range(0.0..360.0);
    let (s, c) = yaw.to_radians().sin_cos();
    let [hx, hy, hz] = obj.half_extents;
    let ext_x = c.abs() * hx + s.abs() * hz;
    let ext_z = s.abs() * hx + c.abs() * hz;
    let bounds = scene.bounds();

    let (surface_id, base_y, lo, hi) = match &obj.surface_id {
        Some(_) => {
            let surfaces = scene.surfaces();
            let areas = surfaces
                .iter()
                .map(|s| (s.max[0] - s.min[0]) * (s.max[1] - s.min[1]));
            let pick = WeightedIndex::new(areas).expect("validated surfaces have positive area");
            let surface = &surfaces[pick.sample(rng)];
            (Some(surface.id.clone()), surface.height, surface.min, surface.max)
        }
        None => (
            None,
            bounds.min[1],
            [bounds.min[0], bounds.min[2]],
            [bounds.max[0], bounds.max[2]],
        ),
    };
    let (x0, x1) = (lo[0] + ext_x, hi[0] - ext_x);
    let (z0, z1) = (lo[1] + ext_z, hi[1] - ext_z);
    if x0 >= x1 || z0 >= z1 {
        return None;
    }
    let x = rng.gen_range(x0..x1);
    let z = rng.gen_range(z0..z1);
    let y = base_y + hy;
    if y > bounds.max[1] {
        return None;
    }
    Some(SceneObject {
        position: [x, y, z],
        yaw,
        surface_id,
        ..obj.clone()
    })
}
