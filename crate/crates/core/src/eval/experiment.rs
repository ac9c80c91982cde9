use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{derive_metrics, score_report, ConfusionMatrix, Metrics};
use crate::error::{Error, Result};
use crate::io;
use crate::nav::Route;
use crate::percept::{capture_scene, CameraModel, DetectorConfig, FrameLog};
use crate::scene::{
    apply_changes, ground_truth_relocations, randomize_instances, ChangeSet, GroundTruth, Scene,
    DEFAULT_MIN_DISPLACEMENT,
};
use crate::track::{compare_scenes, RelocationReport, TrackerConfig};
use crate::FORMAT_VERSION;

/// How each post-change scene is derived from the base scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScenarioSource {
    /// Re-place a random subset of eligible objects.
    Randomize {
        /// Eligible classes; empty means every surface-resting object.
        #[serde(default)]
        movable_classes: BTreeSet<String>,
        /// Fraction of all objects to move per scene.
        relocation_rate: f64,
        /// Each moved object travels strictly farther than this, meters.
        #[serde(default)]
        min_move_distance: f64,
    },
    /// Apply the same changeset file to produce every post scene.
    Changeset { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub base_scene: PathBuf,
    #[serde(default = "default_scenes")]
    pub n_random_scenes: usize,
    pub seed: u64,
    pub route: PathBuf,
    #[serde(default)]
    pub camera: CameraModel,
    #[serde(default)]
    pub detector: DetectorConfig,
    #[serde(default)]
    pub tracker: TrackerConfig,
    #[serde(default = "default_min_displacement")]
    pub min_displacement: f64,
    pub scenario: ScenarioSource,
}

fn default_scenes() -> usize {
    9
}

fn default_min_displacement() -> f64 {
    DEFAULT_MIN_DISPLACEMENT
}

impl ExperimentConfig {
    /// Loads a config, resolving relative paths against its directory.
    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        let mut cfg: ExperimentConfig = io::parse_json(&io::read_to_string(path)?, "experiment")?;
        let dir = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        };
        resolve(&mut cfg.base_scene);
        resolve(&mut cfg.route);
        if let ScenarioSource::Changeset { path } = &mut cfg.scenario {
            resolve(path);
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_random_scenes < 1 {
            return Err(Error::Config("n_random_scenes must be at least 1".into()));
        }
        if !(self.min_displacement.is_finite() && self.min_displacement >= 0.0) {
            return Err(Error::Config("min_displacement must be non-negative".into()));
        }
        if let ScenarioSource::Randomize { relocation_rate, .. } = &self.scenario {
            if !(0.0..=1.0).contains(relocation_rate) {
                return Err(Error::Config("relocation_rate must lie in [0, 1]".into()));
            }
        }
        self.camera.validate()?;
        self.detector.validate()?;
        self.tracker.validate()
    }

    /// Overrides the experiment and detector seeds.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.detector.seed = seed;
        self
    }
}

/// splitmix64 step; derives independent per-scene seeds from one root seed.
pub fn derive_seed(root: u64, index: u64) -> u64 {
    let mut z = root.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneOutcome {
    /// 1-based, matching "scene i of n".
    pub index: usize,
    pub seed: u64,
    pub post_scene: Scene,
    pub post_log: FrameLog,
    pub report: RelocationReport,
    pub truth: GroundTruth,
    pub matrix: ConfusionMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutcome {
    pub config: ExperimentConfig,
    pub pre_log: FrameLog,
    pub scenes: Vec<SceneOutcome>,
    pub pooled: ConfusionMatrix,
    pub metrics: Metrics,
}

/// Everything `run_experiment` needs, already loaded from disk.
#[derive(Debug, Clone)]
pub struct ExperimentInputs {
    pub base_scene: Scene,
    pub route: Route,
    pub changeset: Option<ChangeSet>,
}

impl ExperimentInputs {
    pub fn load(cfg: &ExperimentConfig) -> Result<Self> {
        let changeset = match &cfg.scenario {
            ScenarioSource::Changeset { path } => Some(ChangeSet::load(path)?),
            ScenarioSource::Randomize { .. } => None,
        };
        Ok(Self {
            base_scene: Scene::load(&cfg.base_scene)?,
            route: Route::load(&cfg.route)?,
            changeset,
        })
    }
}

/// Loads the referenced files and runs the experiment.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let inputs = ExperimentInputs::load(cfg)?;
    run_experiment_with(cfg, &inputs)
}

/// Captures the base scene once, then for each derived scene captures,
/// compares, and scores against geometric ground truth. Scenes run in
/// parallel; pooling happens in scene order.
pub fn run_experiment_with(cfg: &ExperimentConfig, inputs: &ExperimentInputs) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let base = &inputs.base_scene;
    let pre_log = capture_scene(base, &inputs.route, &cfg.camera, &cfg.detector)?;

    let scenes = (1..=cfg.n_random_scenes)
        .into_par_iter()
        .map(|index| {
            run_one(cfg, inputs, &pre_log, index).map_err(|e| Error::Scene {
                index,
                error: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let pooled = scenes.iter().map(|s| s.matrix).sum();
    Ok(ExperimentOutcome {
        config: cfg.clone(),
        pre_log,
        scenes,
        pooled,
        metrics: derive_metrics(&pooled),
    })
}

fn run_one(
    cfg: &ExperimentConfig,
    inputs: &ExperimentInputs,
    pre_log: &FrameLog,
    index: usize,
) -> Result<SceneOutcome> {
    let base = &inputs.base_scene;
    let seed = derive_seed(cfg.seed, index as u64);
    let post_scene = match (&cfg.scenario, &inputs.changeset) {
        (
            ScenarioSource::Randomize {
                movable_classes,
                relocation_rate,
                min_move_distance,
            },
            _,
        ) => {
            let ids = pick_instances(base, movable_classes, *relocation_rate, seed);
            randomize_instances(base, seed, &ids, *min_move_distance)?
        }
        (ScenarioSource::Changeset { .. }, Some(cs)) => apply_changes(base, cs)?,
        (ScenarioSource::Changeset { path }, None) => {
            return Err(Error::Config(format!("changeset {} not loaded", path.display())))
        }
    };
    let detector = DetectorConfig {
        seed: derive_seed(cfg.detector.seed, index as u64),
        ..cfg.detector.clone()
    };
    let post_log = capture_scene(&post_scene, &inputs.route, &cfg.camera, &detector)?;
    let report = compare_scenes(pre_log, &post_log, &cfg.tracker)?;
    let truth = ground_truth_relocations(base, &post_scene, cfg.min_displacement);
    let matrix = score_report(&report, &truth)?;
    Ok(SceneOutcome {
        index,
        seed,
        post_scene,
        post_log,
        report,
        truth,
        matrix,
    })
}

/// Chooses `round(rate · object_count)` eligible instances (capped by the
/// number eligible), deterministically from `seed`.
fn pick_instances(scene: &Scene, classes: &BTreeSet<String>, rate: f64, seed: u64) -> Vec<String> {
    let eligible: Vec<String> = scene
        .objects()
        .iter()
        .filter(|o| {
            if classes.is_empty() {
                o.surface_id.is_some()
            } else {
                classes.contains(&o.class_label)
            }
        })
        .map(|o| o.instance_id.clone())
        .collect();
    let count = ((rate * scene.objects().len() as f64).round() as usize).min(eligible.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0fc0_ffee);
    let mut picked: Vec<String> = eligible.choose_multiple(&mut rng, count).cloned().collect();
    picked.sort();
    picked
}

#[derive(Serialize, Deserialize)]
struct SceneRecord {
    index: usize,
    seed: u64,
    objects: usize,
    true_relocations: usize,
    predicted_relocations: usize,
    matrix: ConfusionMatrix,
}

#[derive(Serialize, Deserialize)]
struct ResultFile {
    format_version: u32,
    config: ExperimentConfig,
    scenes: Vec<SceneRecord>,
    pooled: ConfusionMatrix,
    metrics: Metrics,
}

impl ExperimentOutcome {
    /// Result document: config echo, per-scene matrices, pooled matrix and
    /// metrics rounded to four decimals (`null` when undefined).
    pub fn to_json(&self) -> String {
        let file = ResultFile {
            format_version: FORMAT_VERSION,
            config: self.config.clone(),
            scenes: self
                .scenes
                .iter()
                .map(|s| SceneRecord {
                    index: s.index,
                    seed: s.seed,
                    objects: s.truth.labels.len(),
                    true_relocations: s.truth.relocations().len(),
                    predicted_relocations: s
                        .report
                        .entries
                        .iter()
                        .filter(|e| e.decision.is_relocation())
                        .count(),
                    matrix: s.matrix,
                })
                .collect(),
            pooled: self.pooled,
            metrics: self.metrics.rounded(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("result serializes");
        s.push('\n');
        s
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        io::write_atomic(path, self.to_json().as_bytes())
    }

    pub fn render_summary(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{:>5}  {:>7}  {:>5}  {:>4}  {:>4}  {:>4}  {:>4}", "scene", "objects", "moved", "tp", "fn", "fp", "tn").unwrap();
        for s in &self.scenes {
            let m = &s.matrix;
            writeln!(
                out,
                "{:>5}  {:>7}  {:>5}  {:>4}  {:>4}  {:>4}  {:>4}",
                s.index,
                s.truth.labels.len(),
                s.truth.relocations().len(),
                m.tp,
                m.fn_,
                m.fp,
                m.tn
            )
            .unwrap();
        }
        out.push('\n');
        out.push_str(&self.pooled.render_table());
        out.push('\n');
        out.push_str(&self.metrics.render());
        out.push('\n');
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_seeds_differ() {
        let seeds: BTreeSet<u64> = (0..100).map(|i| derive_seed(42, i)).collect();
        assert_eq!(seeds.len(), 100);
        assert_eq!(derive_seed(42, 3), derive_seed(42, 3));
    }

    #[test]
    fn scenario_json_shape() {
        let s: ScenarioSource = serde_json::from_str(
            r#"{"mode": "randomize", "relocation_rate": 0.3, "min_move_distance": 1.0}"#,
        )
        .unwrap();
        assert!(matches!(s, ScenarioSource::Randomize { relocation_rate, .. } if relocation_rate == 0.3));
        let s: ScenarioSource =
            serde_json::from_str(r#"{"mode": "changeset", "path": "x.json"}"#).unwrap();
        assert_eq!(s, ScenarioSource::Changeset { path: "x.json".into() });
    }
}
