use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use anyhow::{anyhow, bail, Context, Result};
use chrono::{DateTime, Utc};
use log::{info, warn};

use repcheck_core::checklist::{load_assessment_dir, Assessment};
use repcheck_core::PaperRecord;
use repcheck_pipeline::evaluator::{
    assess_paper, AssessConfig, AssessError, HttpProvider, Provider, RateLimited, RateLimiter, StubProvider,
};
use repcheck_pipeline::harness::{ArtifactSource, Harness, OfflineArtifacts};
use repcheck_pipeline::ingest::load_corpus;

use super::Outcome;
use crate::config::{ensure_writable, ArtifactMode, ProviderKind, RunConfig};
use crate::state::{write_json_atomic, ProcessedPaper, RunReport, RunState, REPORT_FILE, STATE_FILE};

pub const ASSESSMENT_DIR: &str = "assessments";
pub const ARTIFACT_DIR: &str = "artifacts";

#[derive(Debug, Clone, Default)]
pub struct AssessOptions {
    pub force: bool,
    pub workers: Option<usize>,
    pub stub: bool,
}

fn uses_stub(cfg: &RunConfig, opts: &AssessOptions) -> bool {
    opts.stub || cfg.provider.kind == ProviderKind::Stub
}

pub fn build_provider(cfg: &RunConfig, stub: bool) -> Result<Box<dyn Provider>> {
    let inner: Box<dyn Provider> = if stub {
        let s = &cfg.stub;
        if let Some(dir) = &s.echo_dir {
            let answers = load_assessment_dir(dir).with_context(|| format!("stub echo dir {}", dir.display()))?;
            Box::new(StubProvider::echo(&answers))
        } else if let Some(path) = &s.script {
            let bytes = std::fs::read(path).with_context(|| format!("stub script {}", path.display()))?;
            Box::new(
                StubProvider::from_script_json(&bytes, s.fallback())
                    .with_context(|| format!("stub script {}", path.display()))?,
            )
        } else {
            Box::new(StubProvider::new(s.fallback()))
        }
    } else {
        Box::new(HttpProvider::new(cfg.provider.http.clone()).map_err(|e| anyhow!("provider: {e}"))?)
    };
    Ok(match cfg.provider.rate_per_minute {
        Some(n) => Box::new(RateLimited::new(inner, Arc::new(RateLimiter::per_minute(Some(n))))),
        None => inner,
    })
}

pub fn build_artifacts(cfg: &RunConfig) -> Box<dyn ArtifactSource> {
    match cfg.artifacts.mode {
        ArtifactMode::Offline => Box::new(OfflineArtifacts),
        ArtifactMode::Harness => {
            let a = &cfg.artifacts;
            let mut h = Harness::new(cfg.work_dir(), a.max_parallel_executions);
            h.fetch = cfg.fetch.clone();
            h.sandbox = cfg.sandbox.clone();
            h.rules = cfg.hosts.clone();
            h.per_file_token_budget = a.per_file_token_budget;
            h.max_artifacts = a.max_artifacts;
            h.check_links = a.check_links;
            h.execute = a.execute;
            Box::new(h)
        }
    }
}

fn assess_config(cfg: &RunConfig, stub: bool) -> Result<AssessConfig> {
    let p = &cfg.provider;
    let clock = match (p.fixed_clock, stub) {
        (Some(t), _) => Some(t),
        (None, true) => Some(DateTime::<Utc>::UNIX_EPOCH),
        (None, false) => None,
    };
    Ok(AssessConfig {
        retry: p.retry,
        context_limit_tokens: p.context_limit_tokens,
        chars_per_token: p.chars_per_token,
        max_response_tokens: p.max_response_tokens,
        template: cfg.template()?,
        clock,
    })
}

fn reason(e: &AssessError) -> String {
    match e {
        AssessError::ContextOverflow { estimated, limit } => {
            format!("context overflow: estimated {estimated} tokens, limit {limit}")
        }
        other => other.to_string(),
    }
}

struct Shared {
    state: RunState,
    report: RunReport,
}

fn write_assessment(dir: &Path, a: &Assessment) -> std::io::Result<()> {
    let mut text = a.to_json_pretty();
    text.push('\n');
    std::fs::write(dir.join(a.file_name()), text)
}

/// Assesses every manifest paper that has no assessment file yet (all of
/// them with `force`), writing the run state after each paper.
pub fn cmd_assess(cfg: &RunConfig, opts: &AssessOptions) -> Result<Outcome> {
    let stub = uses_stub(cfg, opts);
    let manifest = cfg
        .manifest
        .as_ref()
        .ok_or_else(|| anyhow!("no manifest configured (set `manifest` in the config file)"))?;
    let schema = cfg.load_schema()?;
    let acfg = assess_config(cfg, stub)?;
    let provider = build_provider(cfg, stub)?;
    let artifacts = build_artifacts(cfg);
    let workers = opts.workers.unwrap_or(cfg.workers).max(1);

    let out = &cfg.output_dir;
    let assess_dir = out.join(ASSESSMENT_DIR);
    let artifact_dir = out.join(ARTIFACT_DIR);
    ensure_writable(&assess_dir)?;
    std::fs::create_dir_all(&artifact_dir)?;

    let file = std::fs::File::open(manifest).with_context(|| format!("opening manifest {}", manifest.display()))?;
    let base = manifest.parent().unwrap_or(Path::new("."));
    let corpus = load_corpus(file, base, cfg.cache_dir.as_deref(), &cfg.hosts)
        .with_context(|| format!("manifest {}", manifest.display()))?;

    let now = || acfg.clock.unwrap_or_else(Utc::now);
    let state_path = out.join(STATE_FILE);
    let mut state = RunState::load(&state_path)?.unwrap_or_else(|| RunState::new(now()));
    let mut report = RunReport {
        provider: provider.describe(),
        started_at: now(),
        finished_at: now(),
        manifest_papers: corpus.records.len() + corpus.skipped.len(),
        assessed: Vec::new(),
        skipped_existing: Vec::new(),
        unprocessed: BTreeMap::new(),
        pending: Vec::new(),
        provider_calls: 0,
        retries: 0,
        sentinels: BTreeMap::new(),
        sentinel_total: 0,
    };

    for s in &corpus.skipped {
        warn!("{}: skipped at ingestion: {}", s.paper_id, s.reason);
        let r = format!("ingestion: {}", s.reason);
        state.mark_unprocessed(&s.paper_id, r.clone(), now());
        report.unprocessed.insert(s.paper_id.clone(), r);
    }

    let mut todo: Vec<&PaperRecord> = Vec::new();
    for record in &corpus.records {
        let path = assess_dir.join(format!("{}.json", record.paper_id));
        if opts.force || !path.exists() {
            todo.push(record);
            continue;
        }
        report.skipped_existing.push(record.paper_id.clone());
        if !state.processed.contains_key(&record.paper_id) {
            // file from an earlier run whose state was lost
            let existing = Assessment::from_json(&std::fs::read(&path)?)
                .with_context(|| format!("existing assessment {}", path.display()))?;
            let sentinels = existing
                .answers
                .iter()
                .filter(|(_, a)| a.is_sentinel())
                .map(|(k, _)| k.clone())
                .collect();
            state.mark_processed(
                &record.paper_id,
                ProcessedPaper {
                    provider_calls: 0,
                    retries: 0,
                    sentinels,
                    completed_at: existing.produced_at.unwrap_or_else(now),
                },
            );
        }
    }
    state.save(&state_path)?;
    info!(
        "{} papers to assess, {} already done, {} workers",
        todo.len(),
        report.skipped_existing.len(),
        workers
    );

    let shared = Mutex::new(Shared { state, report });
    let next = AtomicUsize::new(0);
    let stop = AtomicBool::new(false);
    let io_error: Mutex<Option<anyhow::Error>> = Mutex::new(None);

    let work = |record: &PaperRecord| -> Result<()> {
        let run = assess_paper(provider.as_ref(), record, &schema, artifacts.as_ref(), &acfg);
        let id = &record.paper_id;
        let mut guard = shared.lock().expect("run state lock");
        let sh = &mut *guard;
        match run {
            Ok(run) => {
                write_assessment(&assess_dir, &run.assessment)?;
                if run.artifacts.has_artifact() {
                    write_json_atomic(&artifact_dir.join(format!("{id}.json")), &run.artifacts)?;
                }
                if !run.sentinels.is_empty() {
                    warn!("{id}: {} unparseable answers", run.sentinels.len());
                }
                info!("{id}: assessed with {} provider calls", run.provider_calls);
                sh.report.assessed.push(id.clone());
                sh.report.provider_calls += u64::from(run.provider_calls);
                sh.report.retries += u64::from(run.retries);
                sh.report.sentinel_total += run.sentinels.len();
                if !run.sentinels.is_empty() {
                    sh.report.sentinels.insert(id.clone(), run.sentinels.clone());
                }
                sh.state.mark_processed(
                    id,
                    ProcessedPaper {
                        provider_calls: run.provider_calls,
                        retries: run.retries,
                        sentinels: run.sentinels,
                        completed_at: run.assessment.produced_at.unwrap_or_else(now),
                    },
                );
            }
            Err(e) => {
                if matches!(e, AssessError::ProviderUnavailable(_)) {
                    stop.store(true, Ordering::SeqCst);
                }
                let r = reason(&e);
                warn!("{id}: not processed: {r}");
                sh.state.mark_unprocessed(id, r.clone(), now());
                sh.report.unprocessed.insert(id.clone(), r);
            }
        }
        sh.state.save(&state_path)?;
        Ok(())
    };

    std::thread::scope(|scope| {
        for _ in 0..workers.min(todo.len().max(1)) {
            scope.spawn(|| loop {
                if stop.load(Ordering::SeqCst) {
                    break;
                }
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(record) = todo.get(i) else { break };
                if let Err(e) = work(record) {
                    stop.store(true, Ordering::SeqCst);
                    io_error.lock().expect("error slot").get_or_insert(e);
                    break;
                }
            });
        }
    });

    if let Some(e) = io_error.into_inner().expect("error slot") {
        return Err(e.context("writing run outputs"));
    }

    let Shared { state, mut report } = shared.into_inner().expect("run state lock");
    let attempted: std::collections::HashSet<&String> =
        report.assessed.iter().chain(report.unprocessed.keys()).collect();
    report.pending = todo
        .iter()
        .map(|r| &r.paper_id)
        .filter(|id| !attempted.contains(id))
        .cloned()
        .collect();
    report.assessed.sort();
    report.finished_at = now();
    state.save(&state_path)?;
    write_json_atomic(&out.join(REPORT_FILE), &report)?;

    info!(
        "assessed {}, skipped {}, unprocessed {}, pending {}, provider calls {}, sentinels {}",
        report.assessed.len(),
        report.skipped_existing.len(),
        report.unprocessed.len(),
        report.pending.len(),
        report.provider_calls,
        report.sentinel_total
    );
    if report.unprocessed.is_empty() && report.pending.is_empty() {
        Ok(Outcome::Success)
    } else {
        Ok(Outcome::Partial)
    }
}

/// Where assessments land for a given config.
pub fn assessment_dir(cfg: &RunConfig) -> PathBuf {
    cfg.output_dir.join(ASSESSMENT_DIR)
}

/// Refuses to run without a manifest; shared by commands that need one.
pub fn require_manifest(cfg: &RunConfig, explicit: Option<&Path>) -> Result<PathBuf> {
    match explicit.map(Path::to_path_buf).or_else(|| cfg.manifest.clone()) {
        Some(p) => Ok(p),
        None => bail!("no manifest given (pass --manifest or set `manifest` in the config file)"),
    }
}

