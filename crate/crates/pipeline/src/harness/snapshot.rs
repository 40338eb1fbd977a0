//! Fetched-artifact inventory.

use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

use super::bundle::Tokenizer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FetchStatus {
    Ok,
    Unreachable,
    AuthRequired,
    NotFound,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    /// Path relative to the snapshot root, `/`-separated.
    pub path: String,
    pub size_bytes: u64,
    pub is_text: bool,
    /// Leading content within the inventory token budget; empty for binary.
    pub truncated_content: String,
    /// Whether `truncated_content` is shorter than the file.
    #[serde(default)]
    pub content_truncated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepositorySnapshot {
    pub origin_url: String,
    pub fetch_status: FetchStatus,
    pub files: Vec<FileEntry>,
    pub fetched_at: DateTime<Utc>,
    /// Inventory stopped at the size ceiling.
    #[serde(default)]
    pub partial: bool,
    /// Directory holding the fetched files, when the fetch succeeded.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root: Option<PathBuf>,
    /// Failure detail for non-ok fetches.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl RepositorySnapshot {
    pub fn failed(origin_url: &str, status: FetchStatus, detail: impl Into<String>) -> Self {
        RepositorySnapshot {
            origin_url: origin_url.to_string(),
            fetch_status: status,
            files: Vec::new(),
            fetched_at: Utc::now(),
            partial: false,
            root: None,
            detail: Some(detail.into()),
        }
    }

    pub fn total_bytes(&self) -> u64 {
        self.files.iter().map(|f| f.size_bytes).sum()
    }
}

const SNIFF_BYTES: usize = 8192;
/// Text files are read up to this many bytes before truncation.
const READ_CAP: u64 = 1 << 20;

/// Text when the first block has no NUL byte and decodes as UTF-8 (a
/// sequence cut at the block end is allowed).
pub fn sniff_text(head: &[u8]) -> bool {
    if head.contains(&0) {
        return false;
    }
    match std::str::from_utf8(head) {
        Ok(_) => true,
        Err(e) => e.error_len().is_none(),
    }
}

/// Walks `root` in path order (skipping VCS metadata) and records each file
/// until the running size would pass `ceiling_bytes`.
pub fn inventory(
    root: &Path,
    origin_url: &str,
    ceiling_bytes: u64,
    token_budget: usize,
    tokenizer: &dyn Tokenizer,
) -> std::io::Result<RepositorySnapshot> {
    let mut paths: Vec<(String, PathBuf, u64)> = Vec::new();
    for entry in WalkDir::new(root)
        .follow_links(false)
        .into_iter()
        .filter_entry(|e| e.file_name() != ".git")
    {
        let entry = entry.map_err(std::io::Error::other)?;
        if !entry.file_type().is_file() {
            continue;
        }
        let rel = entry
            .path()
            .strip_prefix(root)
            .expect("walk stays under root")
            .components()
            .map(|c| c.as_os_str().to_string_lossy())
            .collect::<Vec<_>>()
            .join("/");
        paths.push((rel, entry.path().to_path_buf(), entry.metadata().map_err(std::io::Error::other)?.len()));
    }
    paths.sort_by(|a, b| a.0.cmp(&b.0));

    let mut files = Vec::new();
    let mut total = 0u64;
    let mut partial = false;
    for (rel, path, size) in paths {
        if total + size > ceiling_bytes {
            partial = true;
            break;
        }
        total += size;
        let mut buf = Vec::new();
        File::open(&path)?.take(READ_CAP).read_to_end(&mut buf)?;
        let is_text = sniff_text(&buf[..buf.len().min(SNIFF_BYTES)]);
        let (truncated_content, content_truncated) = if is_text {
            let text = String::from_utf8_lossy(&buf);
            let kept = tokenizer.truncate(&text, token_budget);
            (kept.to_string(), kept.len() < text.len() || size > READ_CAP)
        } else {
            (String::new(), false)
        };
        files.push(FileEntry {
            path: rel,
            size_bytes: size,
            is_text,
            truncated_content,
            content_truncated,
        });
    }
    Ok(RepositorySnapshot {
        origin_url: origin_url.to_string(),
        fetch_status: FetchStatus::Ok,
        files,
        fetched_at: Utc::now(),
        partial,
        root: Some(root.to_path_buf()),
        detail: None,
    })
}
