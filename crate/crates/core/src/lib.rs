//! Core data model and statistics for checklist-based reproducibility
//! assessment: the checklist schema, per-paper assessments, completeness and
//! reporting metrics, inter-rater agreement, nonparametric tests and corpus
//! analytics.
//!
//! Every statistic is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the common `f64` instantiations.

pub mod analysis;
pub mod checklist;
pub mod error;
pub mod modality;
pub mod record;
pub mod scalar;

pub use checklist::{Assessment, ChecklistItem, ChecklistSchema, FieldAnswer, FieldKind, Rater, Ternary};
pub use error::{AnalysisError, MetricError, SchemaError};
pub use modality::{ArtifactItemIds, Modality};
pub use record::{LinkKind, LinkRef, PaperFlags, PaperRecord};
pub use scalar::Real;

pub type Completeness = checklist::CompletenessScore<f64>;
pub type Kappa = analysis::KappaResult<f64>;
pub type Kappa32 = analysis::KappaResult<f32>;
pub type TestResult = analysis::TestResult<f64>;
pub type TestResult32 = analysis::TestResult<f32>;
pub type AgreementReport = analysis::AgreementReport<f64>;
pub type CorpusAnalytics = analysis::CorpusAnalytics<f64>;
