use std::path::PathBuf;

use anyhow::{bail, Result};
use serde::Serialize;

use repcheck_core::{LinkKind, LinkRef, PaperRecord};
use repcheck_pipeline::harness::{ArtifactContext, ArtifactSource, FetchStatus, Harness};
use repcheck_pipeline::ingest::{extract_urls_with, normalize_url};

use super::Outcome;
use crate::config::RunConfig;
use crate::state::write_json_atomic;

#[derive(Debug, Clone, Default)]
pub struct ProbeOptions {
    /// Overrides the host-based link classification.
    pub kind: Option<LinkKind>,
    pub execute: bool,
    pub work_dir: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct ProbeSummary<'a> {
    url: &'a str,
    kind: LinkKind,
    accessible: Option<bool>,
    fetch: Vec<FetchStatus>,
    files: usize,
    context_tokens: usize,
    modality: &'static str,
    persistent: bool,
    verdict: Option<String>,
    report: PathBuf,
}

/// Runs the artifact harness on a single URL and writes the full context
/// next to the fetched files.
pub fn cmd_probe(url: &str, cfg: &RunConfig, opts: &ProbeOptions) -> Result<(Outcome, ArtifactContext)> {
    let local = cfg.fetch.allow_local && url.starts_with("file://");
    let Some(normalized) = (if local { Some(url.to_string()) } else { normalize_url(url).map(|u| u.to_string()) }) else {
        bail!("not a usable URL: {url}");
    };
    let found = extract_urls_with(&normalized, &cfg.hosts);
    let kind = opts
        .kind
        .or_else(|| found.first().map(|l| l.kind))
        .unwrap_or(LinkKind::Other);
    if !kind.is_artifact() {
        bail!("{normalized} does not look like an artifact link; pass --kind to force one");
    }

    let work = opts.work_dir.clone().unwrap_or_else(|| cfg.output_dir.join("probe"));
    let mut h = Harness::new(&work, 1);
    h.fetch = cfg.fetch.clone();
    h.sandbox = cfg.sandbox.clone();
    h.rules = cfg.hosts.clone();
    h.per_file_token_budget = cfg.artifacts.per_file_token_budget;
    h.max_artifacts = 1;
    h.execute = opts.execute;

    let mut paper = PaperRecord::new("probe", 0, "");
    paper.links.push(LinkRef {
        url: normalized.clone(),
        kind,
        source_offset: 0,
        raw: url.to_string(),
    });
    let ctx = h.prepare(&paper);
    std::fs::create_dir_all(&work)?;
    let report = work.join("probe_report.json");
    write_json_atomic(&report, &ctx)?;

    let summary = ProbeSummary {
        url: &normalized,
        kind,
        accessible: ctx.link_checks.first().map(|c| c.accessible),
        fetch: ctx.snapshots.iter().map(|s| s.fetch_status).collect(),
        files: ctx.snapshots.iter().map(|s| s.files.len()).sum(),
        context_tokens: ctx.total_tokens(),
        modality: ctx.modality.modality.as_str(),
        persistent: ctx.persistent,
        verdict: ctx.execution.as_ref().map(|e| format!("{:?} ({:?})", e.verdict, e.reason)),
        report,
    };
    println!("{}", serde_json::to_string_pretty(&summary)?);
    let fetched = ctx.snapshots.iter().all(|s| s.fetch_status == FetchStatus::Ok);
    Ok((if fetched { Outcome::Success } else { Outcome::Partial }, ctx))
}
