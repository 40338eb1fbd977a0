//! Field-by-field evaluation against a pluggable text-completion provider.

mod assess;
mod context;
mod http;
mod parse;
mod provider;
mod stub;

pub use assess::{assess_paper, evaluate_field, AssessConfig, AssessError, EvaluationOutcome, PaperRun, RetryPolicy};
pub use context::{
    artifact_extras, best_paper_extras, build_field_context, response_schema, ContextError, FieldExtras,
    PromptTemplate, NO_ARTIFACT_MARKER,
};
pub use http::{HttpProvider, HttpProviderConfig};
pub use parse::{parse_field_response, ParseError};
pub use provider::{Provider, ProviderError, ProviderRequest, RateLimited, RateLimiter};
pub use stub::{answer_json, StubFallback, StubProvider};
