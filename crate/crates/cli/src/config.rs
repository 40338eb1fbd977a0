//! Run configuration, read from a TOML file. Relative paths resolve against
//! the directory holding the file.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use repcheck_core::{checklist::load_schema, ChecklistSchema};
use repcheck_pipeline::evaluator::{HttpProviderConfig, PromptTemplate, RetryPolicy, StubFallback};
use repcheck_pipeline::harness::{FetchConfig, SandboxConfig};
use repcheck_pipeline::ingest::HostRules;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderKind {
    #[default]
    Http,
    Stub,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProviderSettings {
    pub kind: ProviderKind,
    /// Endpoint, model and the name of the environment variable holding the
    /// key. Keys are never read from the config file itself.
    pub http: HttpProviderConfig,
    /// Ceiling on request starts per minute, shared by all workers.
    pub rate_per_minute: Option<u32>,
    pub retry: RetryPolicy,
    pub context_limit_tokens: Option<usize>,
    pub chars_per_token: usize,
    pub max_response_tokens: usize,
    pub prompt_template: Option<PathBuf>,
    /// `produced_at` for every assessment. The stub always uses a fixed
    /// clock (the Unix epoch when unset).
    pub fixed_clock: Option<DateTime<Utc>>,
}

impl Default for ProviderSettings {
    fn default() -> Self {
        ProviderSettings {
            kind: ProviderKind::Http,
            http: HttpProviderConfig::default(),
            rate_per_minute: None,
            retry: RetryPolicy::default(),
            context_limit_tokens: Some(128_000),
            chars_per_token: 4,
            max_response_tokens: 512,
            prompt_template: None,
            fixed_clock: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StubSettings {
    /// JSON script `{paper_id: {item_id: answer | [raw responses]}}`.
    pub script: Option<PathBuf>,
    /// Directory of assessments to answer with, one file per paper.
    pub echo_dir: Option<PathBuf>,
    /// `faithful`, `garbage`, or a literal answer value.
    pub fallback: Option<String>,
}

impl StubSettings {
    pub fn fallback(&self) -> StubFallback {
        match self.fallback.as_deref() {
            None | Some("faithful") => StubFallback::Faithful,
            Some("garbage") => StubFallback::Garbage,
            Some(v) => StubFallback::Value(v.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArtifactMode {
    /// Only the links listed in each paper; no network.
    Offline,
    /// Probe, fetch, inventory and execute.
    #[default]
    Harness,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArtifactSettings {
    pub mode: ArtifactMode,
    /// Where artifacts are fetched to; `<output_dir>/work` when unset.
    pub work_dir: Option<PathBuf>,
    pub check_links: bool,
    pub execute: bool,
    pub max_artifacts: usize,
    pub per_file_token_budget: usize,
    pub max_parallel_executions: usize,
}

impl Default for ArtifactSettings {
    fn default() -> Self {
        ArtifactSettings {
            mode: ArtifactMode::Harness,
            work_dir: None,
            check_links: true,
            execute: true,
            max_artifacts: 3,
            per_file_token_budget: 1000,
            max_parallel_executions: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Checklist schema; the bundled one when unset.
    pub schema: Option<PathBuf>,
    pub manifest: Option<PathBuf>,
    /// Directory holding `best_paper.json`.
    pub cache_dir: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub alpha: f64,
    pub workers: usize,
    pub hosts: HostRules,
    pub provider: ProviderSettings,
    pub stub: StubSettings,
    pub artifacts: ArtifactSettings,
    pub fetch: FetchConfig,
    pub sandbox: SandboxConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            schema: None,
            manifest: None,
            cache_dir: None,
            output_dir: PathBuf::from("repcheck-out"),
            alpha: 0.05,
            workers: 1,
            hosts: HostRules::default(),
            provider: ProviderSettings::default(),
            stub: StubSettings::default(),
            artifacts: ArtifactSettings::default(),
            fetch: FetchConfig::default(),
            sandbox: SandboxConfig::default(),
        }
    }
}

fn rebase(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

fn rebase_opt(base: &Path, p: &mut Option<PathBuf>) {
    if let Some(p) = p {
        rebase(base, p);
    }
}

impl RunConfig {
    pub fn from_toml(text: &str, base: &Path) -> Result<Self> {
        let mut cfg: RunConfig = toml::from_str(text).context("invalid configuration")?;
        cfg.resolve_paths(base);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, base).with_context(|| format!("config {}", path.display()))
    }

    /// The file when given, defaults otherwise.
    pub fn load_or_default(path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) => Self::load(p),
            None => Ok(RunConfig::default()),
        }
    }

    fn resolve_paths(&mut self, base: &Path) {
        rebase_opt(base, &mut self.schema);
        rebase_opt(base, &mut self.manifest);
        rebase_opt(base, &mut self.cache_dir);
        rebase(base, &mut self.output_dir);
        rebase_opt(base, &mut self.provider.prompt_template);
        rebase_opt(base, &mut self.stub.script);
        rebase_opt(base, &mut self.stub.echo_dir);
        rebase_opt(base, &mut self.artifacts.work_dir);
        rebase_opt(base, &mut self.sandbox.log_dir);
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            bail!("alpha must lie in (0, 1), got {}", self.alpha);
        }
        if self.workers == 0 {
            bail!("workers must be at least 1");
        }
        if self.provider.chars_per_token == 0 {
            bail!("provider.chars_per_token must be at least 1");
        }
        if self.provider.retry.max_attempts == 0 {
            bail!("provider.retry.max_attempts must be at least 1");
        }
        Ok(())
    }

    pub fn load_schema(&self) -> Result<ChecklistSchema> {
        match &self.schema {
            None => Ok(ChecklistSchema::bundled()),
            Some(p) => {
                let file = std::fs::File::open(p).with_context(|| format!("opening schema {}", p.display()))?;
                load_schema(file).with_context(|| format!("schema {}", p.display()))
            }
        }
    }

    pub fn template(&self) -> Result<PromptTemplate> {
        match &self.provider.prompt_template {
            None => Ok(PromptTemplate::default()),
            Some(p) => PromptTemplate::from_file(p).with_context(|| format!("prompt template {}", p.display())),
        }
    }

    pub fn work_dir(&self) -> PathBuf {
        self.artifacts.work_dir.clone().unwrap_or_else(|| self.output_dir.join("work"))
    }
}

/// Creates `dir` and checks that files can be written into it.
pub fn ensure_writable(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let probe = dir.join(".repcheck-write-probe");
    std::fs::write(&probe, b"").with_context(|| format!("{} is not writable", dir.display()))?;
    let _ = std::fs::remove_file(&probe);
    Ok(())
}
