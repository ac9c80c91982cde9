use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::best::BestFrame;
use super::TrackerConfig;
use crate::error::{Error, Result};
use crate::io;
use crate::FORMAT_VERSION;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Unchanged,
    Relocated,
    Removed,
    Added,
}

impl Decision {
    /// Counts as a predicted relocation when scoring against ground truth.
    pub fn is_relocation(self) -> bool {
        self != Decision::Unchanged
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Decision::Unchanged => "unchanged",
            Decision::Relocated => "relocated",
            Decision::Removed => "removed",
            Decision::Added => "added",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub object_key: String,
    pub class_label: String,
    pub pre_best: Option<BestFrame>,
    pub post_best: Option<BestFrame>,
    pub frame_distance: Option<u32>,
    pub decision: Decision,
    /// The key appeared more than once in some frame (class-keyed logs).
    pub ambiguous_multiplicity: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub objects: usize,
    pub unchanged: usize,
    pub relocated: usize,
    pub removed: usize,
    pub added: usize,
    pub ambiguous: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelocationReport {
    pub format_version: u32,
    pub config: TrackerConfig,
    pub pre_scene_id: String,
    pub post_scene_id: String,
    pub route_hash: String,
    pub entries: Vec<ReportEntry>,
    pub summary: ReportSummary,
}

impl RelocationReport {
    pub(crate) fn new(
        config: TrackerConfig,
        pre_scene_id: String,
        post_scene_id: String,
        route_hash: String,
        entries: Vec<ReportEntry>,
    ) -> Self {
        let mut summary = ReportSummary {
            objects: entries.len(),
            ..Default::default()
        };
        for e in &entries {
            match e.decision {
                Decision::Unchanged => summary.unchanged += 1,
                Decision::Relocated => summary.relocated += 1,
                Decision::Removed => summary.removed += 1,
                Decision::Added => summary.added += 1,
            }
            summary.ambiguous += usize::from(e.ambiguous_multiplicity);
        }
        Self {
            format_version: FORMAT_VERSION,
            config,
            pre_scene_id,
            post_scene_id,
            route_hash,
            entries,
            summary,
        }
    }

    /// Objects flagged as relocated, with both best frames.
    pub fn relocated(&self) -> impl Iterator<Item = &ReportEntry> {
        self.entries.iter().filter(|e| e.decision == Decision::Relocated)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: RelocationReport = io::parse_json(text, "report")?;
        if r.format_version != FORMAT_VERSION {
            return Err(Error::FormatVersion {
                found: r.format_version,
                expected: FORMAT_VERSION,
            });
        }
        Ok(r)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&io::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        io::write_atomic(path, self.to_json().as_bytes())
    }

    /// Fixed-width table: object, pre frame, post frame, distance, decision.
    pub fn render_table(&self) -> String {
        let width = self
            .entries
            .iter()
            .map(|e| e.object_key.len())
            .max()
            .unwrap_or(0)
            .max("object".len());
        let frame = |b: &Option<BestFrame>| {
            b.as_ref()
                .map(|b| b.frame_index.to_string())
                .unwrap_or_else(|| "-".into())
        };
        let mut out = String::new();
        writeln!(
            out,
            "{:<width$}  {:>9}  {:>10}  {:>8}  decision",
            "object", "pre frame", "post frame", "distance"
        )
        .unwrap();
        for e in &self.entries {
            let dist = e
                .frame_distance
                .map(|d| d.to_string())
                .unwrap_or_else(|| "-".into());
            let flag = if e.ambiguous_multiplicity { " (ambiguous)" } else { "" };
            writeln!(
                out,
                "{:<width$}  {:>9}  {:>10}  {:>8}  {}{}",
                e.object_key,
                frame(&e.pre_best),
                frame(&e.post_best),
                dist,
                e.decision.as_str(),
                flag
            )
            .unwrap();
        }
        let s = &self.summary;
        writeln!(
            out,
            "{} objects: {} unchanged, {} relocated, {} removed, {} added",
            s.objects, s.unchanged, s.relocated, s.removed, s.added
        )
        .unwrap();
        out
    }
}
