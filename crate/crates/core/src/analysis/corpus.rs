//! Corpus-level analytics over one rater's assessments: completeness trends
//! by year, per-item reporting, artifact availability, modality, persistence
//! and the best-paper comparison.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::checklist::{
    completeness, outcome_tally, Assessment, ChecklistSchema, OutcomeTally, Ternary,
};
use crate::error::AnalysisError;
use crate::modality::{modality_rule, ArtifactItemIds, Modality};
use crate::record::PaperRecord;
use crate::scalar::{ratio, Real};

use super::describe::{summarize, Summary};
use super::nonparametric::{cles, kruskal_wallis, mann_whitney_u, TestResult};

/// A test result, or why the test could not run.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TestOutcome<F> {
    Computed(TestResult<F>),
    NotApplicable { reason: String },
}

impl<F> TestOutcome<F> {
    pub fn computed(&self) -> Option<&TestResult<F>> {
        match self {
            TestOutcome::Computed(r) => Some(r),
            TestOutcome::NotApplicable { .. } => None,
        }
    }
}

impl<F> From<Result<TestResult<F>, AnalysisError>> for TestOutcome<F> {
    fn from(r: Result<TestResult<F>, AnalysisError>) -> Self {
        match r {
            Ok(t) => TestOutcome::Computed(t),
            Err(e) => TestOutcome::NotApplicable {
                reason: e.to_string(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PaperAnalytics<F> {
    pub paper_id: String,
    pub year: i32,
    pub completeness: Option<F>,
    pub yes_count: u64,
    pub applicable_count: u64,
    pub has_material: bool,
    pub modality: Modality,
    pub broken_link: bool,
    pub persistent: bool,
    pub nominated: bool,
    pub won: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct YearRow<F> {
    pub year: i32,
    pub papers: usize,
    /// `None` when no paper of the year has a defined completeness.
    pub completeness: Option<Summary<F>>,
    pub with_material: usize,
    pub availability: Option<F>,
    pub modality: BTreeMap<Modality, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ItemRow<F> {
    pub item_id: String,
    pub title: String,
    pub tally: OutcomeTally,
    pub reporting_rate: Option<F>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupRow<F> {
    pub group: String,
    pub papers: usize,
    pub completeness: Option<Summary<F>>,
    pub availability: Option<F>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BestPaperComparison<F> {
    pub groups: Vec<GroupRow<F>>,
    /// Nominated vs non-nominated; effect = P(nominated > non-nominated).
    pub nominated_vs_rest: TestOutcome<F>,
    /// Award winners vs non-nominated; effect = P(winner > non-nominated).
    pub winners_vs_rest: TestOutcome<F>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusAnalytics<F> {
    pub alpha: F,
    pub papers: Vec<PaperAnalytics<F>>,
    /// Assessments whose paper id has no record (and hence no year).
    pub missing_records: Vec<String>,
    pub overall_completeness: Option<Summary<F>>,
    pub by_year: Vec<YearRow<F>>,
    pub completeness_by_year_test: TestOutcome<F>,
    pub items: Vec<ItemRow<F>>,
    pub categorical: BTreeMap<String, BTreeMap<String, usize>>,
    pub with_material: usize,
    pub availability: Option<F>,
    pub modality: BTreeMap<Modality, usize>,
    pub broken_links: usize,
    pub persistent: usize,
    pub best_paper: BestPaperComparison<F>,
}

fn flag_or_answer(a: &Assessment, item: &str, flag: Option<bool>) -> bool {
    match a.value(item) {
        Some(v) => v == Ternary::Y.as_str(),
        None => flag.unwrap_or(false),
    }
}

fn group_row<F: Real>(name: &str, papers: &[&PaperAnalytics<F>]) -> GroupRow<F> {
    let values: Vec<F> = papers.iter().filter_map(|p| p.completeness).collect();
    let with_material = papers.iter().filter(|p| p.has_material).count();
    GroupRow {
        group: name.to_string(),
        papers: papers.len(),
        completeness: summarize(&values),
        availability: ratio(with_material as u64, papers.len() as u64),
    }
}

fn completeness_values<F: Real>(papers: &[&PaperAnalytics<F>]) -> Vec<F> {
    papers.iter().filter_map(|p| p.completeness).collect()
}

/// Two-sided test of `treated` against `rest`, with effect P(treated > rest).
fn compare_groups<F: Real>(treated: &[F], rest: &[F]) -> TestOutcome<F> {
    let test = mann_whitney_u(treated, rest)
        .and_then(|t| cles(rest, treated).map(|e| t.with_effect(e)));
    test.into()
}

pub fn corpus_report<F: Real>(
    assessments: &[Assessment],
    records: &[PaperRecord],
    schema: &ChecklistSchema,
    ids: &ArtifactItemIds,
    alpha: F,
) -> CorpusAnalytics<F> {
    let by_id: HashMap<&str, &PaperRecord> =
        records.iter().map(|r| (r.paper_id.as_str(), r)).collect();
    let mut papers = Vec::new();
    let mut missing = Vec::new();
    let mut matched: Vec<&Assessment> = Vec::new();

    for a in assessments {
        let Some(rec) = by_id.get(a.paper_id.as_str()) else {
            missing.push(a.paper_id.clone());
            continue;
        };
        matched.push(a);
        let score = completeness::<F>(schema, a);
        let evidence = ids.evidence(a, rec.flags.has_supplementary);
        let modality = modality_rule(evidence);
        let has_material = evidence.has_artifact || evidence.has_supplementary_pdf;
        papers.push(PaperAnalytics {
            paper_id: a.paper_id.clone(),
            year: rec.year,
            completeness: score.value,
            yes_count: score.yes_count,
            applicable_count: score.applicable_count,
            has_material,
            modality,
            broken_link: evidence.has_artifact
                && a.ternary(&ids.link_accessible) == Some(Ternary::N),
            persistent: matches!(
                modality,
                Modality::CodeOnly | Modality::DataOnly | Modality::CodeAndData
            ) && a.ternary(&ids.persistent_link) == Some(Ternary::Y),
            nominated: flag_or_answer(a, &ids.nomination, rec.flags.best_paper_nominated),
            won: flag_or_answer(a, &ids.award, rec.flags.best_paper_won),
        });
    }
    papers.sort_by(|p, q| (p.year, &p.paper_id).cmp(&(q.year, &q.paper_id)));
    missing.sort();

    let mut years: BTreeMap<i32, Vec<&PaperAnalytics<F>>> = BTreeMap::new();
    for p in &papers {
        years.entry(p.year).or_default().push(p);
    }
    let by_year: Vec<YearRow<F>> = years
        .iter()
        .map(|(&year, ps)| {
            let with_material = ps.iter().filter(|p| p.has_material).count();
            let mut modality = BTreeMap::new();
            for p in ps {
                *modality.entry(p.modality).or_insert(0) += 1;
            }
            YearRow {
                year,
                papers: ps.len(),
                completeness: summarize(&completeness_values(ps)),
                with_material,
                availability: ratio(with_material as u64, ps.len() as u64),
                modality,
            }
        })
        .collect();

    let year_groups: Vec<Vec<F>> = years.values().map(|ps| completeness_values(ps)).collect();
    let completeness_by_year_test = kruskal_wallis(&year_groups).into();

    let owned: Vec<Assessment> = matched.iter().map(|a| (*a).clone()).collect();
    let items = schema
        .ternary_items()
        .map(|item| {
            let tally = outcome_tally(&owned, &item.id);
            ItemRow {
                item_id: item.id.clone(),
                title: item.title.clone(),
                tally,
                reporting_rate: ratio(tally.yes, tally.yes + tally.no),
            }
        })
        .collect();
    let mut categorical: BTreeMap<String, BTreeMap<String, usize>> = BTreeMap::new();
    for item in schema.items.iter().filter(|i| !i.is_ternary()) {
        let counts = categorical.entry(item.id.clone()).or_default();
        for a in &matched {
            if let Some(v) = a.value(&item.id).filter(|v| item.value_domain.contains(v)) {
                *counts.entry(v.to_string()).or_insert(0) += 1;
            }
        }
    }

    let all: Vec<&PaperAnalytics<F>> = papers.iter().collect();
    let with_material = papers.iter().filter(|p| p.has_material).count();
    let mut modality = BTreeMap::new();
    for p in &papers {
        *modality.entry(p.modality).or_insert(0) += 1;
    }

    let nominated: Vec<&PaperAnalytics<F>> = papers.iter().filter(|p| p.nominated).collect();
    let rest: Vec<&PaperAnalytics<F>> = papers.iter().filter(|p| !p.nominated).collect();
    let winners: Vec<&PaperAnalytics<F>> = papers.iter().filter(|p| p.won).collect();
    let rest_values = completeness_values(&rest);
    let best_paper = BestPaperComparison {
        groups: vec![
            group_row("all", &all),
            group_row("nominated", &nominated),
            group_row("not_nominated", &rest),
            group_row("winner", &winners),
        ],
        nominated_vs_rest: compare_groups(&completeness_values(&nominated), &rest_values),
        winners_vs_rest: compare_groups(&completeness_values(&winners), &rest_values),
    };

    CorpusAnalytics {
        alpha,
        overall_completeness: summarize(&completeness_values(&all)),
        by_year,
        completeness_by_year_test,
        items,
        categorical,
        with_material,
        availability: ratio(with_material as u64, papers.len() as u64),
        modality,
        broken_links: papers.iter().filter(|p| p.broken_link).count(),
        persistent: papers.iter().filter(|p| p.persistent).count(),
        best_paper,
        missing_records: missing,
        papers,
    }
}
