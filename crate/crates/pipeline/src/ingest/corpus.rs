//! Corpus manifest loading.

use std::collections::{BTreeMap, HashSet};
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use repcheck_core::{PaperFlags, PaperRecord};

use super::hosts::HostRules;
use super::text::extract_text;
use super::urls::extract_urls_with;
use super::IngestError;

/// File name of the best-paper cache inside the cache directory.
pub const BEST_PAPER_CACHE: &str = "best_paper.json";

/// One manifest row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub paper_id: String,
    pub year: i32,
    pub title: String,
    pub pdf_path: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedPaper {
    pub paper_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct CorpusLoad {
    pub records: Vec<PaperRecord>,
    pub skipped: Vec<SkippedPaper>,
}

/// Reads `paper_id → {nominated, won, supplementary}`; a missing file is an
/// empty cache.
pub fn load_flag_cache(cache_dir: &Path) -> Result<BTreeMap<String, PaperFlags>, IngestError> {
    let path = cache_dir.join(BEST_PAPER_CACHE);
    if !path.exists() {
        return Ok(BTreeMap::new());
    }
    let bytes = std::fs::read(&path)?;
    serde_json::from_slice(&bytes).map_err(|e| IngestError::MalformedCache(format!("{}: {e}", path.display())))
}

/// Text of a document: PDFs go through extraction, `.txt` files are read as
/// UTF-8 unchanged.
pub fn document_text(path: &Path) -> Result<String, IngestError> {
    let bytes = std::fs::read(path)?;
    let is_txt = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("txt"));
    if is_txt {
        return String::from_utf8(bytes).map_err(|e| IngestError::UnreadableDocument(e.to_string()));
    }
    let extracted = extract_text(&bytes)?;
    if extracted.no_text {
        return Err(IngestError::NoText);
    }
    Ok(extracted.text)
}

/// Parses the manifest table (`paper_id,year,title,pdf_path` header, extra
/// columns ignored) and rejects duplicate ids.
pub fn read_manifest(manifest: impl Read) -> Result<Vec<ManifestEntry>, IngestError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(manifest);
    let headers = reader
        .headers()
        .map_err(|e| IngestError::MalformedManifest(e.to_string()))?
        .clone();
    for required in ["paper_id", "year", "title", "pdf_path"] {
        if !headers.iter().any(|h| h == required) {
            return Err(IngestError::MalformedManifest(format!("missing column `{required}`")));
        }
    }
    let mut rows = Vec::new();
    let mut ids = HashSet::new();
    for (line, row) in reader.deserialize::<ManifestEntry>().enumerate() {
        let row = row.map_err(|e| IngestError::MalformedManifest(format!("row {}: {e}", line + 1)))?;
        if row.paper_id.is_empty() {
            return Err(IngestError::MalformedManifest(format!("row {}: empty paper_id", line + 1)));
        }
        if !ids.insert(row.paper_id.clone()) {
            return Err(IngestError::DuplicatePaperId(row.paper_id));
        }
        rows.push(row);
    }

    Ok(rows)
}

/// One record per manifest row. Rows whose document is missing or yields no
/// text are reported in `skipped` instead of failing the load. Relative
/// document paths resolve against `base_dir`.
pub fn load_corpus(
    manifest: impl Read,
    base_dir: &Path,
    cache_dir: Option<&Path>,
    rules: &HostRules,
) -> Result<CorpusLoad, IngestError> {
    let rows = read_manifest(manifest)?;
    let flags = match cache_dir {
        Some(dir) => load_flag_cache(dir)?,
        None => BTreeMap::new(),
    };
    let mut out = CorpusLoad::default();
    for row in rows {
        let path = resolve(base_dir, &row.pdf_path);
        match document_text(&path) {
            Ok(text) => {
                let mut record = PaperRecord::new(&row.paper_id, row.year, &row.title);
                record.links = extract_urls_with(&text, rules);
                record.text = text;
                record.flags = flags.get(&row.paper_id).copied().unwrap_or_default();
                out.records.push(record);
            }
            Err(e) => out.skipped.push(SkippedPaper {
                paper_id: row.paper_id,
                reason: format!("{}: {e}", path.display()),
            }),
        }
    }
    Ok(out)
}

fn resolve(base: &Path, p: &str) -> PathBuf {
    let p = Path::new(p);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}
