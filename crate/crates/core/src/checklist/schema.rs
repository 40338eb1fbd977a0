use std::collections::HashSet;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::SchemaError;

/// The three-valued presence domain used by most checklist items.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Ternary {
    Y,
    N,
    NA,
}

impl Ternary {
    pub const ALL: [Ternary; 3] = [Ternary::Y, Ternary::N, Ternary::NA];

    pub fn as_str(self) -> &'static str {
        match self {
            Ternary::Y => "Y",
            Ternary::N => "N",
            Ternary::NA => "NA",
        }
    }

    /// Strict parse of the canonical spelling.
    pub fn parse(s: &str) -> Option<Ternary> {
        match s {
            "Y" => Some(Ternary::Y),
            "N" => Some(Ternary::N),
            "NA" => Some(Ternary::NA),
            _ => None,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl std::fmt::Display for Ternary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ValueDomain {
    Ternary,
    Categorical { options: Vec<String> },
}

impl ValueDomain {
    pub fn contains(&self, value: &str) -> bool {
        match self {
            ValueDomain::Ternary => Ternary::parse(value).is_some(),
            ValueDomain::Categorical { options } => options.iter().any(|o| o == value),
        }
    }

    pub fn options(&self) -> Vec<&str> {
        match self {
            ValueDomain::Ternary => Ternary::ALL.iter().map(|t| t.as_str()).collect(),
            ValueDomain::Categorical { options } => options.iter().map(String::as_str).collect(),
        }
    }

    pub fn is_ternary(&self) -> bool {
        matches!(self, ValueDomain::Ternary)
    }
}

/// Routing tag deciding which context an item is evaluated with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    /// Paper text only.
    Standard,
    /// Paper text plus the cached award/proceedings record.
    BestPaper,
    /// Paper text plus the truncated repository bundle.
    Artifact,
    /// Answered from the sandbox execution verdict when execution ran.
    Executable,
}

impl FieldKind {
    pub fn needs_artifact(self) -> bool {
        matches!(self, FieldKind::Artifact | FieldKind::Executable)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChecklistItem {
    pub id: String,
    pub dimension: String,
    pub title: String,
    /// Per-field criteria text used to build prompts.
    #[serde(rename = "criteria")]
    pub criteria_text: String,
    #[serde(rename = "domain")]
    pub value_domain: ValueDomain,
    #[serde(rename = "kind")]
    pub field_kind: FieldKind,
    #[serde(default)]
    pub descriptive: bool,
    /// Defaults to `true` for non-descriptive ternary items.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    counts_toward_completeness: Option<bool>,
}

impl ChecklistItem {
    pub fn new(
        id: impl Into<String>,
        dimension: impl Into<String>,
        title: impl Into<String>,
        value_domain: ValueDomain,
        field_kind: FieldKind,
    ) -> Self {
        ChecklistItem {
            id: id.into(),
            dimension: dimension.into(),
            title: title.into(),
            criteria_text: String::new(),
            value_domain,
            field_kind,
            descriptive: false,
            counts_toward_completeness: None,
        }
    }

    pub fn with_criteria(mut self, text: impl Into<String>) -> Self {
        self.criteria_text = text.into();
        self
    }

    pub fn descriptive(mut self) -> Self {
        self.descriptive = true;
        self
    }

    pub fn with_counting(mut self, counts: bool) -> Self {
        self.counts_toward_completeness = Some(counts);
        self
    }

    pub fn counts_toward_completeness(&self) -> bool {
        self.counts_toward_completeness
            .unwrap_or(!self.descriptive && self.value_domain.is_ternary())
    }

    pub fn is_ternary(&self) -> bool {
        self.value_domain.is_ternary()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChecklistSchema {
    pub version: String,
    pub dimensions: Vec<String>,
    pub items: Vec<ChecklistItem>,
}

const DEFAULT_SCHEMA: &str = include_str!("../../data/default_schema.json");

impl ChecklistSchema {
    /// Build a schema from parts, enforcing every structural invariant.
    pub fn new(
        version: impl Into<String>,
        dimensions: Vec<String>,
        items: Vec<ChecklistItem>,
    ) -> Result<Self, SchemaError> {
        let schema = ChecklistSchema {
            version: version.into(),
            dimensions,
            items,
        };
        schema.check()?;
        Ok(schema)
    }

    /// The bundled 41-item checklist over five dimensions.
    pub fn bundled() -> Self {
        load_schema(DEFAULT_SCHEMA.as_bytes()).expect("bundled schema is valid")
    }

    pub fn bundled_json() -> &'static str {
        DEFAULT_SCHEMA
    }

    pub fn item(&self, id: &str) -> Option<&ChecklistItem> {
        self.items.iter().find(|i| i.id == id)
    }

    pub fn ternary_items(&self) -> impl Iterator<Item = &ChecklistItem> {
        self.items.iter().filter(|i| i.is_ternary())
    }

    pub fn executable_item(&self) -> Option<&ChecklistItem> {
        self.items
            .iter()
            .find(|i| i.field_kind == FieldKind::Executable)
    }

    fn check(&self) -> Result<(), SchemaError> {
        let mut dims = HashSet::new();
        for d in &self.dimensions {
            if d.trim().is_empty() || !dims.insert(d.as_str()) {
                return Err(SchemaError::InvalidDimension(d.clone()));
            }
        }
        let mut seen = HashSet::new();
        let mut executable: Option<&str> = None;
        for item in &self.items {
            if item.id.trim().is_empty() {
                return Err(SchemaError::InvalidItem {
                    item: item.title.clone(),
                    reason: "empty item id".into(),
                });
            }
            if !seen.insert(item.id.as_str()) {
                return Err(SchemaError::DuplicateItemId(item.id.clone()));
            }
            if !dims.contains(item.dimension.as_str()) {
                return Err(SchemaError::UnknownDimension {
                    item: item.id.clone(),
                    dimension: item.dimension.clone(),
                });
            }
            if let ValueDomain::Categorical { options } = &item.value_domain {
                let distinct: HashSet<_> = options.iter().collect();
                if distinct.len() < 2 || distinct.len() != options.len() {
                    return Err(SchemaError::EmptyDomain(item.id.clone()));
                }
            }
            if item.counts_toward_completeness() && (item.descriptive || !item.is_ternary()) {
                return Err(SchemaError::InvalidItem {
                    item: item.id.clone(),
                    reason: "only non-descriptive ternary items can count toward completeness"
                        .into(),
                });
            }
            if item.field_kind == FieldKind::Executable {
                if let Some(prev) = executable {
                    return Err(SchemaError::InvalidItem {
                        item: item.id.clone(),
                        reason: format!("second executable item (first is {prev})"),
                    });
                }
                if !item.is_ternary() {
                    return Err(SchemaError::InvalidItem {
                        item: item.id.clone(),
                        reason: "executable item must use the ternary domain".into(),
                    });
                }
                executable = Some(&item.id);
            }
        }
        Ok(())
    }
}

/// Parse and validate a JSON schema document. Item order is preserved.
pub fn load_schema<R: Read>(source: R) -> Result<ChecklistSchema, SchemaError> {
    let schema: ChecklistSchema = serde_json::from_reader(source)?;
    schema.check()?;
    Ok(schema)
}
