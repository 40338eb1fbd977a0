//! Artifact handling: link probing, fetching, inventory and truncation,
//! bounded execution, and modality/persistence classification.

mod bundle;
mod entrypoint;
mod fetch;
mod links;
mod modality;
mod sandbox;
mod snapshot;

use std::path::PathBuf;
use std::sync::{Condvar, Mutex};

use serde::Serialize;

use repcheck_core::PaperRecord;

pub use bundle::{truncate_for_context, BundleEntry, CharRatioTokenizer, ContextBundle, Tokenizer};
pub use entrypoint::{select_entrypoint, Entrypoint, EntrypointSource};
pub use fetch::{clone_url, fetch_artifact, FetchConfig, DEFAULT_SIZE_CEILING};
pub use links::{check_link, AccessibilityResult, HttpSettings, StatusClass};
pub use modality::{classify_modality, is_data_file, is_source_file, ModalityClassification};
pub use sandbox::{
    attempt_execution, run_command, ExecReason, ExecutionResult, SandboxBackend, SandboxConfig, Verdict,
};
pub use snapshot::{inventory, sniff_text, FetchStatus, FileEntry, RepositorySnapshot};

use crate::ingest::{is_persistent_host, HostRules};

/// Everything the evaluator needs about one paper's artifacts.
#[derive(Debug, Clone, Serialize)]
pub struct ArtifactContext {
    pub link_checks: Vec<AccessibilityResult>,
    pub snapshots: Vec<RepositorySnapshot>,
    pub bundles: Vec<ContextBundle>,
    pub execution: Option<ExecutionResult>,
    pub modality: ModalityClassification,
    /// Any artifact link on a persistent host.
    pub persistent: bool,
    /// Artifact links found in the document text.
    pub artifact_urls: Vec<String>,
}

impl ArtifactContext {
    pub fn none(has_supplementary_pdf: bool) -> Self {
        ArtifactContext {
            link_checks: Vec::new(),
            snapshots: Vec::new(),
            bundles: Vec::new(),
            execution: None,
            modality: classify_modality(None, has_supplementary_pdf),
            persistent: false,
            artifact_urls: Vec::new(),
        }
    }

    pub fn has_artifact(&self) -> bool {
        !self.artifact_urls.is_empty()
    }

    pub fn total_tokens(&self) -> usize {
        self.bundles.iter().map(|b| b.total_tokens).sum()
    }

    /// Text appended to artifact-field requests.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for url in &self.artifact_urls {
            let check = self.link_checks.iter().find(|c| &c.url == url);
            let status = match check {
                Some(c) if c.accessible => "accessible".to_string(),
                Some(c) => format!("not accessible ({:?})", c.status_class),
                None => "not checked".to_string(),
            };
            out.push_str(&format!("Artifact link: {url} [{status}]\n"));
        }
        for s in self.snapshots.iter().filter(|s| s.fetch_status != FetchStatus::Ok) {
            out.push_str(&format!("Fetch of {} failed: {:?}\n", s.origin_url, s.fetch_status));
        }
        for b in &self.bundles {
            out.push('\n');
            out.push_str(&b.render());
        }
        out
    }
}

/// Source of per-paper artifact context.
pub trait ArtifactSource: Send + Sync {
    fn prepare(&self, paper: &PaperRecord) -> ArtifactContext;
}

/// Never touches the network; artifact fields see only the links listed in
/// the document text.
#[derive(Debug, Clone, Copy, Default)]
pub struct OfflineArtifacts;

impl ArtifactSource for OfflineArtifacts {
    fn prepare(&self, paper: &PaperRecord) -> ArtifactContext {
        let mut ctx = ArtifactContext::none(paper.flags.has_supplementary.unwrap_or(false));
        ctx.artifact_urls = paper.artifact_links().map(|l| l.url.clone()).collect();
        if ctx.has_artifact() {
            ctx.modality.modality = repcheck_core::Modality::Unspecified;
        }
        ctx
    }
}

struct Slots {
    free: Mutex<usize>,
    cv: Condvar,
}

impl Slots {
    fn acquire(&self) {
        let mut free = self.free.lock().expect("slot lock");
        while *free == 0 {
            free = self.cv.wait(free).expect("slot lock");
        }
        *free -= 1;
    }

    fn release(&self) {
        *self.free.lock().expect("slot lock") += 1;
        self.cv.notify_one();
    }
}

/// Fetches, inventories and optionally executes each paper's artifacts
/// under `work_root/<paper_id>/`.
pub struct Harness {
    pub fetch: FetchConfig,
    pub sandbox: SandboxConfig,
    pub rules: HostRules,
    pub tokenizer: Box<dyn Tokenizer>,
    pub work_root: PathBuf,
    pub per_file_token_budget: usize,
    pub max_artifacts: usize,
    pub check_links: bool,
    pub execute: bool,
    slots: Slots,
}

impl Harness {
    pub fn new(work_root: impl Into<PathBuf>, max_parallel_executions: usize) -> Self {
        Harness {
            fetch: FetchConfig::default(),
            sandbox: SandboxConfig::default(),
            rules: HostRules::default(),
            tokenizer: Box::new(CharRatioTokenizer::default()),
            work_root: work_root.into(),
            per_file_token_budget: 1000,
            max_artifacts: 3,
            check_links: true,
            execute: true,
            slots: Slots {
                free: Mutex::new(max_parallel_executions.max(1)),
                cv: Condvar::new(),
            },
        }
    }

    fn execute_guarded(&self, snapshot: &RepositorySnapshot, paper_id: &str) -> ExecutionResult {
        let mut cfg = self.sandbox.clone();
        if cfg.log_dir.is_none() {
            cfg.log_dir = Some(self.work_root.join(paper_id).join("logs"));
        }
        self.slots.acquire();
        let result = attempt_execution(snapshot, &cfg);
        self.slots.release();
        result
    }
}

impl ArtifactSource for Harness {
    fn prepare(&self, paper: &PaperRecord) -> ArtifactContext {
        let mut ctx = ArtifactContext::none(paper.flags.has_supplementary.unwrap_or(false));
        let links: Vec<_> = paper.artifact_links().take(self.max_artifacts).cloned().collect();
        ctx.artifact_urls = links.iter().map(|l| l.url.clone()).collect();
        ctx.persistent = links.iter().any(|l| is_persistent_host(&l.url, &self.rules));
        for (i, link) in links.iter().enumerate() {
            if self.check_links {
                ctx.link_checks.push(check_link(&link.url, &self.fetch.http));
            }
            let dir = self.work_root.join(&paper.paper_id).join(format!("artifact-{i}"));
            let snap = fetch_artifact(&link.url, link.kind, &dir, &self.fetch, self.tokenizer.as_ref());
            if snap.fetch_status == FetchStatus::Ok {
                ctx.bundles
                    .push(truncate_for_context(&snap, self.per_file_token_budget, self.tokenizer.as_ref()));
            }
            ctx.snapshots.push(snap);
        }

        let ok: Vec<&RepositorySnapshot> = ctx.snapshots.iter().filter(|s| s.fetch_status == FetchStatus::Ok).collect();
        if self.execute {
            if let Some(first) = ok.first() {
                ctx.execution = Some(self.execute_guarded(first, &paper.paper_id));
            }
        }
        let merged = ok.first().map(|first| RepositorySnapshot {
            files: ok.iter().flat_map(|s| s.files.iter().cloned()).collect(),
            ..(*first).clone()
        });
        ctx.modality = match (&merged, ctx.has_artifact()) {
            (Some(m), _) => classify_modality(Some(m), paper.flags.has_supplementary.unwrap_or(false)),
            // links exist but nothing could be fetched
            (None, true) => ModalityClassification {
                modality: repcheck_core::Modality::Unspecified,
                code_files: 0,
                data_files: 0,
            },
            (None, false) => ctx.modality.clone(),
        };
        ctx
    }
}
