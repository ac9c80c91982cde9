use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Scene, SceneObject};
use crate::error::{Error, Result};
use crate::io;
use crate::FORMAT_VERSION;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Move {
    pub instance_id: String,
    pub position: [f64; 3],
    #[serde(default)]
    pub yaw: f64,
    #[serde(default)]
    pub surface_id: Option<String>,
}

/// Declarative edit turning a pre-change scene into a post-change scene.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChangeSet {
    #[serde(default = "default_version")]
    pub format_version: u32,
    #[serde(default)]
    pub moves: Vec<Move>,
    #[serde(default)]
    pub removals: Vec<String>,
    #[serde(default)]
    pub additions: Vec<SceneObject>,
}

fn default_version() -> u32 {
    FORMAT_VERSION
}

impl ChangeSet {
    pub fn empty() -> Self {
        Self {
            format_version: FORMAT_VERSION,
            ..Default::default()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty() && self.removals.is_empty() && self.additions.is_empty()
    }

    pub fn load(path: &Path) -> Result<ChangeSet> {
        let text = io::read_to_string(path)?;
        let cs: ChangeSet = io::parse_json(&text, "changeset")?;
        if cs.format_version != FORMAT_VERSION {
            return Err(Error::FormatVersion {
                found: cs.format_version,
                expected: FORMAT_VERSION,
            });
        }
        Ok(cs)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("changeset serializes");
        s.push('\n');
        s
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        io::write_atomic(path, self.to_json().as_bytes())
    }
}

/// Applies a changeset, leaving `scene` untouched.
///
/// Removals apply first, then moves, then additions. The result is
/// re-validated, so a move onto an occupied spot is a placement error.
pub fn apply_changes(scene: &Scene, changes: &ChangeSet) -> Result<Scene> {
    if changes.is_empty() {
        return Ok(scene.clone());
    }
    let existing: HashSet<&str> = scene
        .objects()
        .iter()
        .map(|o| o.instance_id.as_str())
        .collect();
    let mut removed = HashSet::new();
    for id in &changes.removals {
        if !existing.contains(id.as_str()) {
            return Err(Error::UnknownInstance(id.clone()));
        }
        if !removed.insert(id.as_str()) {
            return Err(Error::Config(format!("`{id}` removed twice")));
        }
    }
    let mut moved = HashSet::new();
    for m in &changes.moves {
        if !existing.contains(m.instance_id.as_str()) {
            return Err(Error::UnknownInstance(m.instance_id.clone()));
        }
        if removed.contains(m.instance_id.as_str()) {
            return Err(Error::Config(format!(
                "`{}` is both moved and removed",
                m.instance_id
            )));
        }
        if !moved.insert(m.instance_id.as_str()) {
            return Err(Error::Config(format!("`{}` moved twice", m.instance_id)));
        }
    }
    let mut added = HashSet::new();
    for a in &changes.additions {
        if existing.contains(a.instance_id.as_str()) || !added.insert(a.instance_id.as_str()) {
            return Err(Error::DuplicateInstance(a.instance_id.clone()));
        }
    }

    let moves: BTreeMap<&str, &Move> = changes
        .moves
        .iter()
        .map(|m| (m.instance_id.as_str(), m))
        .collect();
    let mut objects: Vec<SceneObject> = scene
        .objects()
        .iter()
        .filter(|o| !removed.contains(o.instance_id.as_str()))
        .map(|o| match moves.get(o.instance_id.as_str()) {
            Some(m) => SceneObject {
                position: m.position,
                yaw: m.yaw,
                surface_id: m.surface_id.clone(),
                ..o.clone()
            },
            None => o.clone(),
        })
        .collect();
    objects.extend(changes.additions.iter().cloned());
    scene.with_objects(objects)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChangeKind {
    Unchanged,
    Moved,
    Removed,
    Added,
}

impl ChangeKind {
    pub fn is_relocation(self) -> bool {
        self != ChangeKind::Unchanged
    }
}

/// Geometric ground truth: a label for every instance in either scene.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GroundTruth {
    pub labels: BTreeMap<String, ChangeKind>,
}

impl GroundTruth {
    pub fn get(&self, instance_id: &str) -> Option<ChangeKind> {
        self.labels.get(instance_id).copied()
    }

    /// Instances labelled moved, removed or added.
    pub fn relocations(&self) -> BTreeMap<&str, ChangeKind> {
        self.labels
            .iter()
            .filter(|(_, k)| k.is_relocation())
            .map(|(id, k)| (id.as_str(), *k))
            .collect()
    }
}

/// Labels each instance of `pre ∪ post`. "Moved" means the centre moved
/// strictly more than `min_displacement` meters.
pub fn ground_truth_relocations(pre: &Scene, post: &Scene, min_displacement: f64) -> GroundTruth {
    let post_by_id: BTreeMap<&str, &SceneObject> = post
        .objects()
        .iter()
        .map(|o| (o.instance_id.as_str(), o))
        .collect();
    let pre_ids: BTreeSet<&str> = pre.objects().iter().map(|o| o.instance_id.as_str()).collect();
    let mut labels = BTreeMap::new();
    for o in pre.objects() {
        let kind = match post_by_id.get(o.instance_id.as_str()) {
            None => ChangeKind::Removed,
            Some(p) => {
                let d2: f64 = (0..3).map(|k| (p.position[k] - o.position[k]).powi(2)).sum();
                if d2.sqrt() > min_displacement {
                    ChangeKind::Moved
                } else {
                    ChangeKind::Unchanged
                }
            }
        };
        labels.insert(o.instance_id.clone(), kind);
    }
    for id in post_by_id.keys().filter(|id| !pre_ids.contains(*id)) {
        labels.insert(id.to_string(), ChangeKind::Added);
    }
    GroundTruth { labels }
}
