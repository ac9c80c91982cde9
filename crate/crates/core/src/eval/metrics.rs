use std::fmt::Write as _;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scene::GroundTruth;
use crate::track::RelocationReport;

/// Binary relocated / not-relocated tally.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub fp: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn new(tp: u64, fn_: u64, fp: u64, tn: u64) -> Self {
        Self { tp, fn_, fp, tn }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fn_ + self.fp + self.tn
    }

    pub fn record(&mut self, actual: bool, predicted: bool) {
        match (actual, predicted) {
            (true, true) => self.tp += 1,
            (true, false) => self.fn_ += 1,
            (false, true) => self.fp += 1,
            (false, false) => self.tn += 1,
        }
    }

    /// Two-by-two layout with actual rows and predicted columns.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{:<22}{:>12}{:>15}", "", "Predicted", "Predicted").unwrap();
        writeln!(out, "{:<22}{:>12}{:>15}", "", "Relocation", "No Relocation").unwrap();
        writeln!(out, "{:<22}{:>12}{:>15}", "Actual Relocation", self.tp, self.fn_).unwrap();
        writeln!(out, "{:<22}{:>12}{:>15}", "Actual No Relocation", self.fp, self.tn).unwrap();
        out
    }
}

impl Add for ConfusionMatrix {
    type Output = ConfusionMatrix;

    fn add(self, o: ConfusionMatrix) -> ConfusionMatrix {
        ConfusionMatrix::new(self.tp + o.tp, self.fn_ + o.fn_, self.fp + o.fp, self.tn + o.tn)
    }
}

impl AddAssign for ConfusionMatrix {
    fn add_assign(&mut self, o: ConfusionMatrix) {
        *self = *self + o;
    }
}

impl std::iter::Sum for ConfusionMatrix {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(ConfusionMatrix::default(), Add::add)
    }
}

/// Exact ratios; `None` marks a zero denominator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub accuracy: Option<f64>,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn round4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

pub fn derive_metrics(cm: &ConfusionMatrix) -> Metrics {
    Metrics {
        precision: ratio(cm.tp, cm.tp + cm.fp),
        recall: ratio(cm.tp, cm.tp + cm.fn_),
        accuracy: ratio(cm.tp + cm.tn, cm.total()),
    }
}

impl Metrics {
    /// Values as reported: four decimal places.
    pub fn rounded(&self) -> Metrics {
        Metrics {
            precision: self.precision.map(round4),
            recall: self.recall.map(round4),
            accuracy: self.accuracy.map(round4),
        }
    }

    pub fn render(&self) -> String {
        let show = |v: Option<f64>| v.map_or_else(|| "undefined".to_string(), |v| format!("{v:.4}"));
        format!(
            "precision {}  recall {}  accuracy {}",
            show(self.precision),
            show(self.recall),
            show(self.accuracy)
        )
    }
}

/// Scores a report against geometric ground truth.
///
/// Relocated, removed and added decisions count as predicted relocations.
/// Ground-truth objects missing from the report were never confidently
/// detected and count as predicted "no relocation".
pub fn score_report(report: &RelocationReport, truth: &GroundTruth) -> Result<ConfusionMatrix> {
    let mut cm = ConfusionMatrix::default();
    for e in &report.entries {
        let kind = truth
            .get(&e.object_key)
            .ok_or_else(|| Error::Coverage(e.object_key.clone()))?;
        cm.record(kind.is_relocation(), e.decision.is_relocation());
    }
    for (id, kind) in &truth.labels {
        if !report.entries.iter().any(|e| &e.object_key == id) {
            cm.record(kind.is_relocation(), false);
        }
    }
    Ok(cm)
}
