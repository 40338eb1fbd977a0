use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use log::warn;

use repcheck_core::analysis::{corpus_report, write_corpus_tables};
use repcheck_core::checklist::load_assessment_dir;
use repcheck_core::{ArtifactItemIds, ChecklistSchema, CorpusAnalytics, PaperRecord};
use repcheck_pipeline::ingest::{load_flag_cache, read_manifest};

use super::Outcome;

#[derive(Debug, Clone)]
pub struct ReportOptions {
    pub alpha: f64,
    /// Directory holding `best_paper.json`.
    pub cache_dir: Option<PathBuf>,
}

/// Year and cached flags for each manifest paper. Documents are not read.
pub fn load_records(manifest: &Path, cache_dir: Option<&Path>) -> Result<Vec<PaperRecord>> {
    let file = std::fs::File::open(manifest).with_context(|| format!("opening manifest {}", manifest.display()))?;
    let rows = read_manifest(file).with_context(|| format!("manifest {}", manifest.display()))?;
    let flags = match cache_dir {
        Some(d) => load_flag_cache(d)?,
        None => Default::default(),
    };
    Ok(rows
        .into_iter()
        .map(|row| {
            let mut r = PaperRecord::new(row.paper_id, row.year, row.title);
            r.flags = flags.get(&r.paper_id).copied().unwrap_or_default();
            r
        })
        .collect())
}

/// Corpus-level analytics over the assessments in `assess_dir`.
pub fn cmd_report(
    assess_dir: &Path,
    manifest: &Path,
    schema: &ChecklistSchema,
    out: &Path,
    opts: &ReportOptions,
) -> Result<(Outcome, CorpusAnalytics)> {
    if !(opts.alpha > 0.0 && opts.alpha < 1.0) {
        bail!("alpha must lie in (0, 1), got {}", opts.alpha);
    }
    let assessments =
        load_assessment_dir(assess_dir).with_context(|| format!("reading assessments from {}", assess_dir.display()))?;
    if assessments.is_empty() {
        bail!("empty corpus: no assessments in {}", assess_dir.display());
    }
    let records = load_records(manifest, opts.cache_dir.as_deref())?;
    let c: CorpusAnalytics = corpus_report(&assessments, &records, schema, &ArtifactItemIds::default(), opts.alpha);
    for id in &c.missing_records {
        warn!("{id}: assessment has no manifest row; left out of the report");
    }
    if c.papers.is_empty() {
        bail!(
            "empty corpus: none of the {} assessments in {} match a row of {}",
            assessments.len(),
            assess_dir.display(),
            manifest.display()
        );
    }
    write_corpus_tables(&c, out).with_context(|| format!("writing tables to {}", out.display()))?;
    Ok((Outcome::Success, c))
}
