//! Token approximation and the per-file truncated context bundle.

use serde::{Deserialize, Serialize};

use super::snapshot::{FetchStatus, RepositorySnapshot};

/// Counts and cuts text in provider tokens.
pub trait Tokenizer: Send + Sync {
    fn count(&self, text: &str) -> usize;
    /// Longest prefix of `text` within `budget` tokens.
    fn truncate<'a>(&self, text: &'a str, budget: usize) -> &'a str;
    fn describe(&self) -> String;
}

/// Fixed characters-per-token approximation; a partial trailing group counts
/// as one token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharRatioTokenizer {
    pub chars_per_token: usize,
}

impl Default for CharRatioTokenizer {
    fn default() -> Self {
        CharRatioTokenizer { chars_per_token: 4 }
    }
}

impl Tokenizer for CharRatioTokenizer {
    fn count(&self, text: &str) -> usize {
        text.chars().count().div_ceil(self.chars_per_token.max(1))
    }

    fn truncate<'a>(&self, text: &'a str, budget: usize) -> &'a str {
        let keep = budget.saturating_mul(self.chars_per_token.max(1));
        match text.char_indices().nth(keep) {
            Some((byte, _)) => &text[..byte],
            None => text,
        }
    }

    fn describe(&self) -> String {
        format!("chars/{}", self.chars_per_token)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BundleEntry {
    pub path: String,
    pub size_bytes: u64,
    pub is_text: bool,
    /// Empty for binary files.
    pub content: String,
    pub tokens: usize,
    pub truncated: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextBundle {
    pub origin_url: String,
    pub entries: Vec<BundleEntry>,
    /// Sum of the per-file content token counts.
    pub total_tokens: usize,
}

impl ContextBundle {
    /// Text form appended to provider requests: a path header per file,
    /// binary files by name and size only.
    pub fn render(&self) -> String {
        let mut out = format!("### Artifact: {}\n", self.origin_url);
        if self.entries.is_empty() {
            out.push_str("(no files)\n");
        }
        for e in &self.entries {
            if e.is_text {
                let note = if e.truncated { " (truncated)" } else { "" };
                out.push_str(&format!("--- {}{note} ---\n{}\n", e.path, e.content));
            } else {
                out.push_str(&format!("--- {} (binary, {} bytes) ---\n", e.path, e.size_bytes));
            }
        }
        out
    }
}

/// Cuts every text file of the snapshot to `per_file_budget` tokens, in
/// path order.
pub fn truncate_for_context(
    snapshot: &RepositorySnapshot,
    per_file_budget: usize,
    tokenizer: &dyn Tokenizer,
) -> ContextBundle {
    let mut bundle = ContextBundle {
        origin_url: snapshot.origin_url.clone(),
        ..Default::default()
    };
    if snapshot.fetch_status != FetchStatus::Ok {
        return bundle;
    }
    let mut files: Vec<_> = snapshot.files.iter().collect();
    files.sort_by(|a, b| a.path.cmp(&b.path));
    for f in files {
        let (content, tokens, truncated) = if f.is_text {
            let kept = tokenizer.truncate(&f.truncated_content, per_file_budget);
            let cut = kept.len() < f.truncated_content.len() || f.content_truncated;
            (kept.to_string(), tokenizer.count(kept), cut)
        } else {
            (String::new(), 0, false)
        };
        bundle.total_tokens += tokens;
        bundle.entries.push(BundleEntry {
            path: f.path.clone(),
            size_bytes: f.size_bytes,
            is_text: f.is_text,
            content,
            tokens,
            truncated,
        });
    }
    bundle
}
