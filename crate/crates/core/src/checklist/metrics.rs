use serde::Serialize;

use super::assessment::Assessment;
use super::schema::{ChecklistSchema, Ternary};
use crate::error::MetricError;
use crate::scalar::{ratio, Real};

/// Paper-level share of applicable counting items answered Y.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompletenessScore<F> {
    pub yes_count: u64,
    /// Y + N over counting items.
    pub applicable_count: u64,
    /// `None` when no counting item is applicable.
    pub value: Option<F>,
}

/// NA, unanswered, sentinel and out-of-domain answers are all left out of the
/// denominator; descriptive and categorical items never count.
pub fn completeness<F: Real>(schema: &ChecklistSchema, a: &Assessment) -> CompletenessScore<F> {
    let mut yes = 0u64;
    let mut applicable = 0u64;
    for item in schema.items.iter().filter(|i| i.counts_toward_completeness()) {
        match a.ternary(&item.id) {
            Some(Ternary::Y) => {
                yes += 1;
                applicable += 1;
            }
            Some(Ternary::N) => applicable += 1,
            Some(Ternary::NA) | None => {}
        }
    }
    CompletenessScore {
        yes_count: yes,
        applicable_count: applicable,
        value: ratio(yes, applicable),
    }
}

/// Per-item share of applicable papers answering Y.
pub fn reporting_rate<F: Real>(
    schema: &ChecklistSchema,
    corpus: &[Assessment],
    item_id: &str,
) -> Result<Option<F>, MetricError> {
    let item = schema
        .item(item_id)
        .ok_or_else(|| MetricError::UnknownItem(item_id.to_string()))?;
    if !item.is_ternary() {
        return Err(MetricError::NonTernaryItem(item_id.to_string()));
    }
    let tally = outcome_tally(corpus, item_id);
    Ok(ratio(tally.yes, tally.yes + tally.no))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct OutcomeTally {
    pub yes: u64,
    pub no: u64,
    pub na: u64,
    /// Missing, sentinel or out-of-domain.
    pub other: u64,
}

pub fn outcome_tally(corpus: &[Assessment], item_id: &str) -> OutcomeTally {
    let mut t = OutcomeTally::default();
    for a in corpus {
        match a.ternary(item_id) {
            Some(Ternary::Y) => t.yes += 1,
            Some(Ternary::N) => t.no += 1,
            Some(Ternary::NA) => t.na += 1,
            None => t.other += 1,
        }
    }
    t
}
