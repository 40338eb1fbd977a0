//! The field-by-field evaluation loop.

use std::time::Duration;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use repcheck_core::checklist::{ChecklistItem, FieldAnswer, FieldKind, Rater};
use repcheck_core::{Assessment, ChecklistSchema, PaperRecord};

use super::context::{build_field_context, ContextError, FieldExtras, PromptTemplate};
use super::parse::parse_field_response;
use super::provider::{Provider, ProviderError, ProviderRequest};
use crate::harness::{ArtifactContext, ArtifactSource, ExecReason, ExecutionResult, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    /// Fixed wait between attempts.
    #[serde(with = "secs")]
    pub backoff: Duration,
}

mod secs {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let v = f64::deserialize(d)?;
        Duration::try_from_secs_f64(v).map_err(serde::de::Error::custom)
    }
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_attempts: 3,
            backoff: Duration::from_secs(1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationOutcome {
    pub answer: FieldAnswer,
    pub attempts: u32,
    pub raw_last_response: String,
}

/// Calls the provider until it returns a parseable in-domain answer. After
/// `max_attempts` failures the answer is the `UNPARSEABLE` sentinel.
/// Only an unavailable provider is an error.
pub fn evaluate_field(
    provider: &dyn Provider,
    request: &ProviderRequest,
    item: &ChecklistItem,
    policy: &RetryPolicy,
) -> Result<EvaluationOutcome, ProviderError> {
    let max = policy.max_attempts.max(1);
    let mut last_raw = String::new();
    let mut last_problem = String::new();
    for attempt in 1..=max {
        if attempt > 1 && !policy.backoff.is_zero() {
            std::thread::sleep(policy.backoff);
        }
        match provider.complete(request) {
            Ok(raw) => {
                let parsed = parse_field_response(item, &raw);
                last_raw = raw;
                match parsed {
                    Ok(answer) => {
                        return Ok(EvaluationOutcome {
                            answer,
                            attempts: attempt,
                            raw_last_response: last_raw,
                        })
                    }
                    Err(e) => last_problem = e.to_string(),
                }
            }
            Err(ProviderError::Rejected(msg)) => last_problem = format!("rejected: {msg}"),
            Err(e @ ProviderError::Unavailable(_)) => return Err(e),
        }
    }
    Ok(EvaluationOutcome {
        answer: FieldAnswer::unparseable(format!("no valid answer after {max} attempts; last: {last_problem}")),
        attempts: max,
        raw_last_response: last_raw,
    })
}

#[derive(Debug, Clone)]
pub struct AssessConfig {
    pub retry: RetryPolicy,
    /// Provider context window in tokens; `None` skips the pre-flight check.
    pub context_limit_tokens: Option<usize>,
    pub chars_per_token: usize,
    pub max_response_tokens: usize,
    pub template: PromptTemplate,
    /// Fixed `produced_at` for reproducible output; `None` uses the wall clock.
    pub clock: Option<DateTime<Utc>>,
}

impl Default for AssessConfig {
    fn default() -> Self {
        AssessConfig {
            retry: RetryPolicy::default(),
            context_limit_tokens: None,
            chars_per_token: 4,
            max_response_tokens: 512,
            template: PromptTemplate::default(),
            clock: None,
        }
    }
}

impl AssessConfig {
    /// Character-budget estimate of the tokens one request occupies,
    /// response budget included.
    pub fn estimate_tokens(&self, request: &ProviderRequest) -> usize {
        let chars = request.system_prompt.chars().count() + request.user_content.chars().count();
        chars.div_ceil(self.chars_per_token.max(1)) + request.max_response_tokens
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AssessError {
    #[error("paper has no text")]
    EmptyText,
    #[error("estimated {estimated} tokens exceeds the context limit of {limit}")]
    ContextOverflow { estimated: usize, limit: usize },
    #[error(transparent)]
    ProviderUnavailable(ProviderError),
    #[error("artifact field {0} has no artifact context")]
    MissingExtras(String),
}

impl From<ContextError> for AssessError {
    fn from(e: ContextError) -> Self {
        match e {
            ContextError::EmptyText(_) => AssessError::EmptyText,
            ContextError::MissingExtras(id) => AssessError::MissingExtras(id),
        }
    }
}

/// Per-paper bookkeeping for the run report.
#[derive(Debug, Clone, Serialize)]
pub struct PaperRun {
    pub assessment: Assessment,
    pub provider_calls: u32,
    pub retries: u32,
    pub sentinels: Vec<String>,
    pub estimated_tokens: usize,
    pub artifacts: ArtifactContext,
}

/// The executable field is taken from the sandbox when a run was attempted.
/// Sandbox infrastructure failures say nothing about the artifact, so those
/// fall back to the provider.
fn execution_answer(exec: Option<&ExecutionResult>) -> Option<FieldAnswer> {
    let exec = exec.filter(|e| e.reason != ExecReason::SandboxError)?;
    let value = match exec.verdict {
        Verdict::Y => "Y",
        Verdict::N => "N",
    };
    let how = match &exec.entrypoint {
        Some(e) => format!("`{}`", e.command),
        None => "no entrypoint".to_string(),
    };
    let reason = serde_json::to_value(exec.reason).expect("reason serializes");
    Some(FieldAnswer::new(
        value,
        format!("sandbox execution: {} ({how}, {:.1}s)", reason.as_str().unwrap_or_default(), exec.duration_s),
    ))
}

pub fn assess_paper(
    provider: &dyn Provider,
    paper: &PaperRecord,
    schema: &ChecklistSchema,
    artifacts: &dyn ArtifactSource,
    cfg: &AssessConfig,
) -> Result<PaperRun, AssessError> {
    if paper.text.trim().is_empty() {
        return Err(AssessError::EmptyText);
    }
    let needs_artifacts = schema.items.iter().any(|i| i.field_kind.needs_artifact());
    let ctx = if needs_artifacts {
        artifacts.prepare(paper)
    } else {
        ArtifactContext::none(paper.flags.has_supplementary.unwrap_or(false))
    };
    let extras = FieldExtras::for_paper(paper, &ctx);
    let from_execution = execution_answer(ctx.execution.as_ref());

    let mut planned: Vec<(&ChecklistItem, Option<ProviderRequest>)> = Vec::with_capacity(schema.items.len());
    for item in &schema.items {
        if item.field_kind == FieldKind::Executable && from_execution.is_some() {
            planned.push((item, None));
        } else {
            let req = build_field_context(paper, item, &extras, &cfg.template, cfg.max_response_tokens)?;
            planned.push((item, Some(req)));
        }
    }

    let estimated = planned
        .iter()
        .filter_map(|(_, r)| r.as_ref())
        .map(|r| cfg.estimate_tokens(r))
        .max()
        .unwrap_or(0);
    if let Some(limit) = cfg.context_limit_tokens {
        if estimated > limit {
            return Err(AssessError::ContextOverflow { estimated, limit });
        }
    }

    let mut assessment = Assessment::new(&paper.paper_id, Rater::Automated);
    assessment.provider_info = Some(provider.describe());
    let (mut calls, mut retries, mut sentinels) = (0, 0, Vec::new());
    for (item, request) in planned {
        let answer = match request {
            None => from_execution.clone().expect("planned from execution"),
            Some(req) => {
                let out = evaluate_field(provider, &req, item, &cfg.retry).map_err(AssessError::ProviderUnavailable)?;
                calls += out.attempts;
                retries += out.attempts - 1;
                if out.answer.is_sentinel() {
                    sentinels.push(item.id.clone());
                }
                out.answer
            }
        };
        assessment.set(&item.id, answer);
    }
    assessment.produced_at = Some(cfg.clock.unwrap_or_else(Utc::now));

    Ok(PaperRun {
        assessment,
        provider_calls: calls,
        retries,
        sentinels,
        estimated_tokens: estimated,
        artifacts: ctx,
    })
}
