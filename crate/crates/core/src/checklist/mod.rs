//! Checklist schema, assessment data model, validation and the per-paper and
//! item-level reporting metrics.

mod assessment;
mod metrics;
mod schema;

pub use assessment::{
    load_assessment_dir, validate_assessment, Assessment, FieldAnswer, ProviderInfo, Rater,
    ValidationIssue, ValidationReport, UNPARSEABLE,
};
pub use metrics::{completeness, outcome_tally, reporting_rate, CompletenessScore, OutcomeTally};
pub use schema::{load_schema, ChecklistItem, ChecklistSchema, FieldKind, Ternary, ValueDomain};
