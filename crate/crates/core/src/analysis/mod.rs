//! Agreement statistics between raters and corpus-level analytics.

mod agreement;
mod corpus;
mod describe;
mod nonparametric;
mod tables;

pub use agreement::{
    accuracy, agreement_report, cohen_kappa, confusion, kappa_merged, pair_assessments,
    per_paper_accuracy, AgreementReport, CategoricalAgreement, ClassCounts, ClassDistribution,
    ConfusionMatrix, GroupAgreement, KappaResult, Pairing, PerPaperAccuracy,
};
pub use corpus::{
    corpus_report, BestPaperComparison, CorpusAnalytics, GroupRow, ItemRow, PaperAnalytics,
    TestOutcome, YearRow,
};
pub use describe::{quantile, summarize, Summary};
pub use nonparametric::{
    cles, exact_u_counts, kruskal_wallis, mann_whitney_u, midranks, u_statistics, PValueMethod,
    TestMethod, TestResult, EXACT_MAX_POOLED,
};
pub use tables::{write_agreement_tables, write_corpus_tables};
