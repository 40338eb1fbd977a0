//! Ingestion, artifact handling and provider-driven evaluation for
//! checklist-based reproducibility assessment.

pub mod evaluator;
pub mod harness;
pub mod ingest;
