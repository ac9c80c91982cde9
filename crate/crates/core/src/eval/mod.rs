//! Evaluation harness: confusion matrix, derived metrics, and the
//! randomized-scenes-versus-default experiment.

mod experiment;
mod metrics;

pub use experiment::{
    derive_seed, run_experiment, run_experiment_with, ExperimentConfig, ExperimentInputs,
    ExperimentOutcome, ScenarioSource, SceneOutcome,
};
pub use metrics::{derive_metrics, round4, score_report, ConfusionMatrix, Metrics};
