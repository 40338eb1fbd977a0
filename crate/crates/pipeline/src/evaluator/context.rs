//! Per-field request assembly.

use serde_json::json;

use repcheck_core::checklist::{ChecklistItem, FieldKind};
use repcheck_core::{PaperFlags, PaperRecord};

use super::provider::ProviderRequest;
use crate::harness::ArtifactContext;

/// Appended to artifact-field requests when a paper links no artifact.
pub const NO_ARTIFACT_MARKER: &str = "[NO ARTIFACT LINKED]";

const DEFAULT_TEMPLATE: &str = include_str!("../../data/system_prompt.txt");

/// System prompt text with `{title}`, `{dimension}`, `{criteria}` and
/// `{options}` placeholders. Loaded from a data file so it can be replaced
/// without touching code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    text: String,
}

impl Default for PromptTemplate {
    fn default() -> Self {
        PromptTemplate {
            text: DEFAULT_TEMPLATE.to_string(),
        }
    }
}

impl PromptTemplate {
    pub fn new(text: impl Into<String>) -> Self {
        PromptTemplate { text: text.into() }
    }

    pub fn from_file(path: &std::path::Path) -> std::io::Result<Self> {
        Ok(PromptTemplate::new(std::fs::read_to_string(path)?))
    }

    pub fn render(&self, item: &ChecklistItem) -> String {
        let criteria = if item.criteria_text.trim().is_empty() {
            item.title.as_str()
        } else {
            item.criteria_text.as_str()
        };
        self.text
            .replace("{title}", &item.title)
            .replace("{dimension}", &item.dimension)
            .replace("{criteria}", criteria)
            .replace("{options}", &item.value_domain.options().join(", "))
    }
}

/// Field-kind specific material, rendered once per paper.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FieldExtras {
    pub best_paper: Option<String>,
    pub artifact: Option<String>,
}

impl FieldExtras {
    pub fn for_paper(paper: &PaperRecord, artifacts: &ArtifactContext) -> Self {
        FieldExtras {
            best_paper: Some(best_paper_extras(&paper.flags)),
            artifact: Some(artifact_extras(artifacts)),
        }
    }
}

pub fn best_paper_extras(flags: &PaperFlags) -> String {
    if flags.is_empty() {
        "No cached award or proceedings record is available for this paper.".to_string()
    } else {
        serde_json::to_string(flags).expect("flags serialize")
    }
}

pub fn artifact_extras(ctx: &ArtifactContext) -> String {
    if !ctx.has_artifact() {
        return format!("{NO_ARTIFACT_MARKER}\nThis paper does not link any code or data artifact.");
    }
    ctx.render()
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ContextError {
    #[error("paper {0} has no text")]
    EmptyText(String),
    #[error("artifact field {0} requested without an artifact bundle or no-artifact marker")]
    MissingExtras(String),
}

pub fn response_schema(item: &ChecklistItem) -> serde_json::Value {
    json!({
        "type": "object",
        "properties": {
            "answer": { "type": "string", "enum": item.value_domain.options() },
            "disambiguation": { "type": "string" }
        },
        "required": ["answer", "disambiguation"],
        "additionalProperties": false
    })
}

pub fn build_field_context(
    paper: &PaperRecord,
    item: &ChecklistItem,
    extras: &FieldExtras,
    template: &PromptTemplate,
    max_response_tokens: usize,
) -> Result<ProviderRequest, ContextError> {
    if paper.text.trim().is_empty() {
        return Err(ContextError::EmptyText(paper.paper_id.clone()));
    }
    let user_content = match item.field_kind {
        FieldKind::Standard => paper.text.clone(),
        FieldKind::BestPaper => {
            let record = extras
                .best_paper
                .clone()
                .unwrap_or_else(|| best_paper_extras(&PaperFlags::default()));
            format!("{}\n\n## Award and proceedings record\n{record}", paper.text)
        }
        FieldKind::Artifact | FieldKind::Executable => {
            let Some(bundle) = &extras.artifact else {
                return Err(ContextError::MissingExtras(item.id.clone()));
            };
            format!("{}\n\n## Linked artifacts\n{bundle}", paper.text)
        }
    };
    Ok(ProviderRequest {
        paper_id: paper.paper_id.clone(),
        item_id: item.id.clone(),
        system_prompt: template.render(item),
        response_schema: response_schema(item),
        user_content,
        max_response_tokens,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use repcheck_core::checklist::ValueDomain;

    fn paper() -> PaperRecord {
        let mut p = PaperRecord::new("p1", 2024, "A paper");
        p.text = "Full text of a paper.".into();
        p
    }

    #[test]
    fn standard_is_text_only() {
        let item = ChecklistItem::new("s", "Method", "Pseudocode", ValueDomain::Ternary, FieldKind::Standard);
        let r = build_field_context(&paper(), &item, &FieldExtras::default(), &PromptTemplate::default(), 256).unwrap();
        assert_eq!(r.user_content, "Full text of a paper.");
        assert_eq!(r.allowed_values(), vec!["Y", "N", "NA"]);
        assert!(r.system_prompt.contains("Pseudocode"));
        assert!(!r.system_prompt.contains("{options}"));
    }

    #[test]
    fn best_paper_gets_record() {
        let item = ChecklistItem::new(
            "b",
            "General",
            "Nomination",
            ValueDomain::Categorical { options: vec!["Y".into(), "N".into()] },
            FieldKind::BestPaper,
        );
        let flags = PaperFlags { best_paper_nominated: Some(true), ..Default::default() };
        let extras = FieldExtras { best_paper: Some(best_paper_extras(&flags)), artifact: None };
        let r = build_field_context(&paper(), &item, &extras, &PromptTemplate::default(), 256).unwrap();
        assert!(r.user_content.starts_with("Full text of a paper."));
        assert!(r.user_content.contains(r#"{"best_paper_nominated":true}"#));
        assert_eq!(r.allowed_values(), vec!["Y", "N"]);
    }

    #[test]
    fn artifact_without_extras_fails() {
        let item = ChecklistItem::new("a", "Artifact", "Provided", ValueDomain::Ternary, FieldKind::Artifact);
        let e = build_field_context(&paper(), &item, &FieldExtras::default(), &PromptTemplate::default(), 256);
        assert_eq!(e, Err(ContextError::MissingExtras("a".into())));
    }

    #[test]
    fn empty_text_rejected() {
        let item = ChecklistItem::new("s", "Method", "X", ValueDomain::Ternary, FieldKind::Standard);
        let p = PaperRecord::new("p2", 2024, "t");
        let e = build_field_context(&p, &item, &FieldExtras::default(), &PromptTemplate::default(), 256);
        assert_eq!(e, Err(ContextError::EmptyText("p2".into())));
    }

    #[test]
    fn no_artifact_marker() {
        let ctx = ArtifactContext::none(false);
        assert!(artifact_extras(&ctx).starts_with(NO_ARTIFACT_MARKER));
    }
}
