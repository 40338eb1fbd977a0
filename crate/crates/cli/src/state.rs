//! Resumable batch state and the per-run report.

use std::collections::BTreeMap;
use std::io;
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use repcheck_core::checklist::ProviderInfo;

pub const STATE_FILE: &str = "run_state.json";
pub const REPORT_FILE: &str = "run_report.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProcessedPaper {
    pub provider_calls: u32,
    pub retries: u32,
    /// Items answered with the unparseable sentinel.
    #[serde(default)]
    pub sentinels: Vec<String>,
    pub completed_at: DateTime<Utc>,
}

/// Which papers are done and which failed. A paper is in at most one of the
/// two maps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunState {
    pub started_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
    pub processed: BTreeMap<String, ProcessedPaper>,
    /// Paper id to failure reason.
    pub unprocessed: BTreeMap<String, String>,
}

impl RunState {
    pub fn new(now: DateTime<Utc>) -> Self {
        RunState {
            started_at: now,
            updated_at: now,
            processed: BTreeMap::new(),
            unprocessed: BTreeMap::new(),
        }
    }

    /// `None` when no state file exists yet.
    pub fn load(path: &Path) -> io::Result<Option<Self>> {
        match std::fs::read(path) {
            Ok(bytes) => serde_json::from_slice(&bytes)
                .map(Some)
                .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, format!("{}: {e}", path.display()))),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e),
        }
    }

    pub fn mark_processed(&mut self, paper_id: &str, paper: ProcessedPaper) {
        self.unprocessed.remove(paper_id);
        self.updated_at = paper.completed_at;
        self.processed.insert(paper_id.to_string(), paper);
    }

    pub fn mark_unprocessed(&mut self, paper_id: &str, reason: impl Into<String>, now: DateTime<Utc>) {
        self.processed.remove(paper_id);
        self.updated_at = now;
        self.unprocessed.insert(paper_id.to_string(), reason.into());
    }

    pub fn sentinel_total(&self) -> usize {
        self.processed.values().map(|p| p.sentinels.len()).sum()
    }

    pub fn save(&self, path: &Path) -> io::Result<()> {
        write_json_atomic(path, self)
    }
}

/// What one `assess` invocation did.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub provider: ProviderInfo,
    pub started_at: DateTime<Utc>,
    pub finished_at: DateTime<Utc>,
    pub manifest_papers: usize,
    /// Assessed by this run.
    pub assessed: Vec<String>,
    /// Already assessed by an earlier run and left untouched.
    pub skipped_existing: Vec<String>,
    /// Failed in this run, with reasons.
    pub unprocessed: BTreeMap<String, String>,
    /// Not attempted because the batch stopped early.
    pub pending: Vec<String>,
    pub provider_calls: u64,
    pub retries: u64,
    /// Sentinel items per paper assessed in this run.
    pub sentinels: BTreeMap<String, Vec<String>>,
    pub sentinel_total: usize,
}

pub fn write_json_atomic<T: Serialize>(path: &Path, value: &T) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    text.push('\n');
    let tmp = path.with_extension("json.tmp");
    std::fs::write(&tmp, text)?;
    std::fs::rename(&tmp, path)
}
