use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use log::warn;

use repcheck_core::analysis::{agreement_report, write_agreement_tables};
use repcheck_core::checklist::{load_assessment_dir, validate_assessment, Assessment};
use repcheck_core::{AgreementReport, ChecklistSchema};

use super::Outcome;

#[derive(Debug, Clone)]
pub struct CompareSummary {
    pub report: AgreementReport,
    pub tables: Vec<PathBuf>,
}

fn load(dir: &Path, schema: &ChecklistSchema) -> Result<Vec<Assessment>> {
    let set = load_assessment_dir(dir).with_context(|| format!("reading assessments from {}", dir.display()))?;
    for a in &set {
        let issues = validate_assessment(schema, a);
        if !issues.is_empty() {
            warn!("{}/{}: {} schema issues", dir.display(), a.file_name(), issues.issues.len());
        }
    }
    Ok(set)
}

/// Agreement of `auto_dir` against the reference answers in `human_dir`.
pub fn cmd_compare(
    human_dir: &Path,
    auto_dir: &Path,
    schema: &ChecklistSchema,
    out: &Path,
) -> Result<(Outcome, CompareSummary)> {
    let human = load(human_dir, schema)?;
    let auto = load(auto_dir, schema)?;
    let shared = human
        .iter()
        .filter(|h| auto.iter().any(|a| a.paper_id == h.paper_id))
        .count();
    if shared == 0 {
        bail!(
            "no paper ids in common between {} ({} assessments) and {} ({} assessments)",
            human_dir.display(),
            human.len(),
            auto_dir.display(),
            auto.len()
        );
    }
    let report: AgreementReport = agreement_report(&human, &auto, schema)
        .with_context(|| format!("comparing {} with {}", human_dir.display(), auto_dir.display()))?;
    let tables = write_agreement_tables(&report, out).with_context(|| format!("writing tables to {}", out.display()))?;
    Ok((Outcome::Success, CompareSummary { report, tables }))
}
