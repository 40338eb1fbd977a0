//! Subcommand implementations. Each returns an [`Outcome`] on completion and
//! an error for usage or configuration problems.

mod assess;
mod compare;
mod probe;
mod report;

pub use assess::{
    assessment_dir, build_artifacts, build_provider, cmd_assess, require_manifest, AssessOptions, ARTIFACT_DIR,
    ASSESSMENT_DIR,
};
pub use compare::{cmd_compare, CompareSummary};
pub use probe::{cmd_probe, ProbeOptions};
pub use report::{cmd_report, load_records, ReportOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    /// Some papers (or artifacts) could not be processed.
    Partial,
}

impl Outcome {
    pub fn exit_code(self) -> u8 {
        match self {
            Outcome::Success => 0,
            Outcome::Partial => 2,
        }
    }
}
