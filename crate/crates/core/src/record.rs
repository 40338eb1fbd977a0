//! Corpus records shared by ingestion, evaluation and analysis.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkKind {
    Repository,
    Archive,
    Dataset,
    Other,
}

impl LinkKind {
    pub fn is_artifact(self) -> bool {
        !matches!(self, LinkKind::Other)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkRef {
    /// Normalized absolute URL.
    pub url: String,
    pub kind: LinkKind,
    /// Character index of the first occurrence in the document text.
    pub source_offset: usize,
    /// The matched text before normalization.
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub raw: String,
}

/// Cached award and proceedings data for one paper.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaperFlags {
    #[serde(default, alias = "nominated", skip_serializing_if = "Option::is_none")]
    pub best_paper_nominated: Option<bool>,
    #[serde(default, alias = "won", skip_serializing_if = "Option::is_none")]
    pub best_paper_won: Option<bool>,
    #[serde(default, alias = "supplementary", skip_serializing_if = "Option::is_none")]
    pub has_supplementary: Option<bool>,
}

impl PaperFlags {
    pub fn is_empty(&self) -> bool {
        self.best_paper_nominated.is_none()
            && self.best_paper_won.is_none()
            && self.has_supplementary.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaperRecord {
    pub paper_id: String,
    pub year: i32,
    pub title: String,
    #[serde(default)]
    pub text: String,
    #[serde(default)]
    pub links: Vec<LinkRef>,
    #[serde(default)]
    pub flags: PaperFlags,
}

impl PaperRecord {
    pub fn new(paper_id: impl Into<String>, year: i32, title: impl Into<String>) -> Self {
        PaperRecord {
            paper_id: paper_id.into(),
            year,
            title: title.into(),
            text: String::new(),
            links: Vec::new(),
            flags: PaperFlags::default(),
        }
    }

    pub fn artifact_links(&self) -> impl Iterator<Item = &LinkRef> {
        self.links.iter().filter(|l| l.kind.is_artifact())
    }
}
