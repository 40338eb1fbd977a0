//! Artifact modality: what kind of material a paper makes available.

use serde::{Deserialize, Serialize};

use crate::checklist::{Assessment, Ternary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Modality {
    PdfOnly,
    CodeOnly,
    DataOnly,
    CodeAndData,
    Unspecified,
    None,
}

impl Modality {
    pub const ALL: [Modality; 6] = [
        Modality::PdfOnly,
        Modality::CodeOnly,
        Modality::DataOnly,
        Modality::CodeAndData,
        Modality::Unspecified,
        Modality::None,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Modality::PdfOnly => "pdf_only",
            Modality::CodeOnly => "code_only",
            Modality::DataOnly => "data_only",
            Modality::CodeAndData => "code_and_data",
            Modality::Unspecified => "unspecified",
            Modality::None => "none",
        }
    }
}

/// Evidence the modality rule is applied to.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ModalityEvidence {
    pub has_artifact: bool,
    pub has_code: bool,
    pub has_data: bool,
    pub has_supplementary_pdf: bool,
}

/// Code/data beat everything; an artifact with neither is `unspecified`;
/// a supplement alone is `pdf_only`; nothing at all is `none`.
pub fn modality_rule(e: ModalityEvidence) -> Modality {
    match (e.has_code, e.has_data) {
        (true, true) => Modality::CodeAndData,
        (true, false) => Modality::CodeOnly,
        (false, true) => Modality::DataOnly,
        (false, false) if e.has_artifact => Modality::Unspecified,
        (false, false) if e.has_supplementary_pdf => Modality::PdfOnly,
        _ => Modality::None,
    }
}

/// Item ids the answer-based modality and availability analyses read.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ArtifactItemIds {
    pub artifact_provided: String,
    pub link_accessible: String,
    pub persistent_link: String,
    pub supplementary: String,
    pub code_items: Vec<String>,
    pub data_items: Vec<String>,
    pub nomination: String,
    pub award: String,
}

impl Default for ArtifactItemIds {
    fn default() -> Self {
        ArtifactItemIds {
            artifact_provided: "artifact_provided".into(),
            link_accessible: "artifact_link_accessible".into(),
            persistent_link: "persistent_artifact_link".into(),
            supplementary: "supplementary_material".into(),
            code_items: vec![
                "algorithm_source_code".into(),
                "data_processing_code".into(),
                "analysis_code".into(),
            ],
            data_items: vec![
                "raw_objective_values".into(),
                "raw_solution_data".into(),
                "raw_execution_times".into(),
            ],
            nomination: "best_paper_nomination".into(),
            award: "best_paper_award".into(),
        }
    }
}

impl ArtifactItemIds {
    pub fn evidence(&self, a: &Assessment, supplementary_flag: Option<bool>) -> ModalityEvidence {
        let yes = |id: &str| a.ternary(id) == Some(Ternary::Y) || a.value(id) == Some("Y");
        ModalityEvidence {
            has_artifact: yes(&self.artifact_provided),
            has_code: self.code_items.iter().any(|i| yes(i)),
            has_data: self.data_items.iter().any(|i| yes(i)),
            has_supplementary_pdf: if a.value(&self.supplementary).is_some() {
                yes(&self.supplementary)
            } else {
                supplementary_flag.unwrap_or(false)
            },
        }
    }
}

/// Modality derived from a filled checklist rather than a fetched snapshot.
pub fn modality_from_answers(ids: &ArtifactItemIds, a: &Assessment, supplementary_flag: Option<bool>) -> Modality {
    modality_rule(ids.evidence(a, supplementary_flag))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checklist::Rater;

    #[test]
    fn rule_table() {
        let ev = |a, c, d, s| ModalityEvidence {
            has_artifact: a,
            has_code: c,
            has_data: d,
            has_supplementary_pdf: s,
        };
        assert_eq!(modality_rule(ev(false, false, false, false)), Modality::None);
        assert_eq!(modality_rule(ev(false, false, false, true)), Modality::PdfOnly);
        assert_eq!(modality_rule(ev(true, false, false, true)), Modality::Unspecified);
        assert_eq!(modality_rule(ev(true, true, false, false)), Modality::CodeOnly);
        assert_eq!(modality_rule(ev(true, false, true, false)), Modality::DataOnly);
        assert_eq!(modality_rule(ev(true, true, true, true)), Modality::CodeAndData);
    }

    #[test]
    fn from_answers() {
        let ids = ArtifactItemIds::default();
        let a = Assessment::new("p", Rater::Human)
            .with_answer("artifact_provided", "Y")
            .with_answer("algorithm_source_code", "Y")
            .with_answer("raw_objective_values", "N");
        assert_eq!(modality_from_answers(&ids, &a, None), Modality::CodeOnly);
        let none = Assessment::new("p", Rater::Human).with_answer("artifact_provided", "N");
        assert_eq!(modality_from_answers(&ids, &none, Some(true)), Modality::PdfOnly);
        assert_eq!(modality_from_answers(&ids, &none, None), Modality::None);
    }
}
