use std::collections::BTreeMap;
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::schema::{ChecklistSchema, Ternary};

/// Marker recorded when a provider never produced a parseable in-domain answer.
/// It is outside every value domain and excluded from all metrics.
pub const UNPARSEABLE: &str = "UNPARSEABLE";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rater {
    Human,
    Automated,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldAnswer {
    pub value: String,
    #[serde(default)]
    pub disambiguation: String,
}

impl FieldAnswer {
    pub fn new(value: impl Into<String>, disambiguation: impl Into<String>) -> Self {
        FieldAnswer {
            value: value.into(),
            disambiguation: disambiguation.into(),
        }
    }

    pub fn unparseable(note: impl Into<String>) -> Self {
        FieldAnswer::new(UNPARSEABLE, note)
    }

    pub fn is_sentinel(&self) -> bool {
        self.value == UNPARSEABLE
    }

    pub fn ternary(&self) -> Option<Ternary> {
        Ternary::parse(&self.value)
    }
}

/// Identifiers of the provider that produced an automated assessment.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ProviderInfo {
    pub provider: String,
    pub model: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub settings: BTreeMap<String, String>,
}

/// One rater's answers for one paper. Answers are keyed by item id, so there
/// is at most one answer per item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assessment {
    pub paper_id: String,
    pub rater: Rater,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub produced_at: Option<DateTime<Utc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provider_info: Option<ProviderInfo>,
    pub answers: BTreeMap<String, FieldAnswer>,
}

impl Assessment {
    pub fn new(paper_id: impl Into<String>, rater: Rater) -> Self {
        Assessment {
            paper_id: paper_id.into(),
            rater,
            produced_at: None,
            provider_info: None,
            answers: BTreeMap::new(),
        }
    }

    pub fn with_answer(mut self, item_id: &str, value: &str) -> Self {
        self.set(item_id, FieldAnswer::new(value, ""));
        self
    }

    pub fn set(&mut self, item_id: &str, answer: FieldAnswer) {
        self.answers.insert(item_id.to_string(), answer);
    }

    pub fn value(&self, item_id: &str) -> Option<&str> {
        self.answers.get(item_id).map(|a| a.value.as_str())
    }

    pub fn ternary(&self, item_id: &str) -> Option<Ternary> {
        self.answers.get(item_id).and_then(FieldAnswer::ternary)
    }

    pub fn sentinel_count(&self) -> usize {
        self.answers.values().filter(|a| a.is_sentinel()).count()
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("assessment serializes")
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self, serde_json::Error> {
        serde_json::from_slice(bytes)
    }

    /// `<paper_id>.json`
    pub fn file_name(&self) -> String {
        format!("{}.json", self.paper_id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ValidationIssue {
    UnknownItem { item_id: String },
    OutOfDomain { item_id: String, value: String },
    Unparseable { item_id: String },
    Missing { item_id: String },
}

impl ValidationIssue {
    pub fn item_id(&self) -> &str {
        match self {
            ValidationIssue::UnknownItem { item_id }
            | ValidationIssue::OutOfDomain { item_id, .. }
            | ValidationIssue::Unparseable { item_id }
            | ValidationIssue::Missing { item_id } => item_id,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn count(&self, pred: impl Fn(&ValidationIssue) -> bool) -> usize {
        self.issues.iter().filter(|i| pred(i)).count()
    }
}

/// Lists unknown ids, out-of-domain values, sentinels and unanswered items.
/// An empty report means the assessment conforms to the schema.
pub fn validate_assessment(schema: &ChecklistSchema, a: &Assessment) -> ValidationReport {
    let mut issues = Vec::new();
    for (item_id, answer) in &a.answers {
        match schema.item(item_id) {
            None => issues.push(ValidationIssue::UnknownItem {
                item_id: item_id.clone(),
            }),
            Some(_) if answer.is_sentinel() => issues.push(ValidationIssue::Unparseable {
                item_id: item_id.clone(),
            }),
            Some(item) if !item.value_domain.contains(&answer.value) => {
                issues.push(ValidationIssue::OutOfDomain {
                    item_id: item_id.clone(),
                    value: answer.value.clone(),
                })
            }
            Some(_) => {}
        }
    }
    for item in &schema.items {
        if !a.answers.contains_key(&item.id) {
            issues.push(ValidationIssue::Missing {
                item_id: item.id.clone(),
            });
        }
    }
    ValidationReport { issues }
}

/// Load every `*.json` assessment in a directory, sorted by paper id.
pub fn load_assessment_dir(dir: &Path) -> std::io::Result<Vec<Assessment>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("json") {
            continue;
        }
        let bytes = std::fs::read(&path)?;
        let a = Assessment::from_json(&bytes).map_err(|e| {
            std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                format!("{}: {e}", path.display()),
            )
        })?;
        out.push(a);
    }
    out.sort_by(|a, b| a.paper_id.cmp(&b.paper_id));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn full(schema: &ChecklistSchema) -> Assessment {
        let mut a = Assessment::new("p1", Rater::Human);
        for item in &schema.items {
            let v = item.value_domain.options()[0].to_string();
            a.set(&item.id, FieldAnswer::new(v, ""));
        }
        a
    }

    #[test]
    fn conformant_assessment_has_empty_report() {
        let schema = ChecklistSchema::bundled();
        assert!(validate_assessment(&schema, &full(&schema)).is_empty());
    }

    #[test]
    fn out_of_domain_value_reported_once() {
        let schema = ChecklistSchema::bundled();
        let mut a = full(&schema);
        a.set("pseudocode", FieldAnswer::new("Maybe", ""));
        let r = validate_assessment(&schema, &a);
        assert_eq!(
            r.issues,
            vec![ValidationIssue::OutOfDomain {
                item_id: "pseudocode".into(),
                value: "Maybe".into()
            }]
        );
    }

    #[test]
    fn unknown_item_reported() {
        let schema = ChecklistSchema::bundled();
        let mut a = full(&schema);
        a.set("not_an_item", FieldAnswer::new("Y", ""));
        let r = validate_assessment(&schema, &a);
        assert_eq!(r.issues.len(), 1);
        assert!(matches!(&r.issues[0], ValidationIssue::UnknownItem { item_id } if item_id == "not_an_item"));
    }

    #[test]
    fn missing_and_sentinel_reported() {
        let schema = ChecklistSchema::bundled();
        let mut a = full(&schema);
        a.answers.remove("tuning_budget");
        a.set("pseudocode", FieldAnswer::unparseable("gave up"));
        let r = validate_assessment(&schema, &a);
        assert_eq!(r.count(|i| matches!(i, ValidationIssue::Missing { .. })), 1);
        assert_eq!(r.count(|i| matches!(i, ValidationIssue::Unparseable { .. })), 1);
    }

    #[test]
    fn json_roundtrip_is_stable() {
        let schema = ChecklistSchema::bundled();
        let a = full(&schema);
        let text = a.to_json_pretty();
        let back = Assessment::from_json(text.as_bytes()).unwrap();
        assert_eq!(back, a);
        assert_eq!(back.to_json_pretty(), text);
    }
}
