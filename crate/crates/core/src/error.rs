use thiserror::Error;

#[derive(Debug, Error)]
pub enum SchemaError {
    #[error("malformed schema document: {0}")]
    Malformed(#[from] serde_json::Error),
    #[error("duplicate item id `{0}`")]
    DuplicateItemId(String),
    #[error("item `{0}` has a categorical domain with fewer than two distinct options")]
    EmptyDomain(String),
    #[error("item `{item}` references unknown dimension `{dimension}`")]
    UnknownDimension { item: String, dimension: String },
    #[error("invalid or duplicate dimension name `{0}`")]
    InvalidDimension(String),
    #[error("invalid item `{item}`: {reason}")]
    InvalidItem { item: String, reason: String },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricError {
    #[error("unknown checklist item `{0}`")]
    UnknownItem(String),
    #[error("item `{0}` is not a Y/N/NA item")]
    NonTernaryItem(String),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("confusion matrix is empty")]
    EmptyMatrix,
    #[error("no comparable items between the two raters")]
    NoComparableItems,
    #[error("at least two non-empty groups are required, got {0}")]
    TooFewGroups(usize),
    #[error("both samples must be non-empty")]
    EmptySample,
}
