//! Paper ingestion: text extraction, link extraction and corpus loading.

mod corpus;
mod hosts;
mod layout;
mod text;
mod urls;

pub use corpus::{
    document_text, load_corpus, load_flag_cache, read_manifest, CorpusLoad, ManifestEntry, SkippedPaper, BEST_PAPER_CACHE,
};
pub use hosts::{is_persistent_host, HostRules, PathRule};
pub use layout::{join_lines, layout_text, page_lines, Glyph, Page};
pub use text::{extract_text, ExtractedText};
pub use urls::{extract_urls, extract_urls_with, normalize_url};

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("unreadable document: {0}")]
    UnreadableDocument(String),
    #[error("document is encrypted")]
    EncryptedDocument,
    #[error("document has no extractable text")]
    NoText,
    #[error("malformed manifest: {0}")]
    MalformedManifest(String),
    #[error("duplicate paper id `{0}` in manifest")]
    DuplicatePaperId(String),
    #[error("malformed cache file: {0}")]
    MalformedCache(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
