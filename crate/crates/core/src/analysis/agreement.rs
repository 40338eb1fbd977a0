//! Agreement between two raters over Y/N/NA answers: confusion counts,
//! accuracy, Cohen's kappa and the variant that treats N and NA as one class.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::checklist::{Assessment, ChecklistItem, ChecklistSchema, Ternary};
use crate::error::AnalysisError;
use crate::scalar::{ratio, Real};

use super::describe::{summarize, Summary};

/// 3×3 counts indexed by (rater A value, rater B value) over Y, N, NA.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; 3]; 3],
}

impl ConfusionMatrix {
    pub fn from_counts(counts: [[u64; 3]; 3]) -> Self {
        ConfusionMatrix { counts }
    }

    pub fn record(&mut self, a: Ternary, b: Ternary) {
        self.counts[a.index()][b.index()] += 1;
    }

    pub fn get(&self, a: Ternary, b: Ternary) -> u64 {
        self.counts[a.index()][b.index()]
    }

    pub fn n(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..3).map(|i| self.counts[i][i]).sum()
    }

    pub fn is_diagonal(&self) -> bool {
        (0..3).all(|i| (0..3).all(|j| i == j || self.counts[i][j] == 0))
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) {
        for i in 0..3 {
            for j in 0..3 {
                self.counts[i][j] += other.counts[i][j];
            }
        }
    }

    /// Collapse N and NA into one class: index 0 = Y, 1 = N ∪ NA.
    pub fn merged(&self) -> [[u64; 2]; 2] {
        let class = |i: usize| usize::from(i != 0);
        let mut out = [[0u64; 2]; 2];
        for i in 0..3 {
            for j in 0..3 {
                out[class(i)][class(j)] += self.counts[i][j];
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KappaResult<F> {
    /// Observed agreement (accuracy).
    pub p_o: F,
    /// Expected chance agreement from the marginals.
    pub p_e: F,
    /// `None` when chance agreement is total and observed agreement is not.
    pub kappa: Option<F>,
}

pub fn accuracy<F: Real>(cm: &ConfusionMatrix) -> Result<F, AnalysisError> {
    ratio(cm.trace(), cm.n()).ok_or(AnalysisError::EmptyMatrix)
}

pub fn cohen_kappa<F: Real>(cm: &ConfusionMatrix) -> Result<KappaResult<F>, AnalysisError> {
    kappa_square(&cm.counts)
}

pub fn kappa_merged<F: Real>(cm: &ConfusionMatrix) -> Result<KappaResult<F>, AnalysisError> {
    kappa_square(&cm.merged())
}

fn kappa_square<F: Real, const K: usize>(
    counts: &[[u64; K]; K],
) -> Result<KappaResult<F>, AnalysisError> {
    let n: u64 = counts.iter().flatten().sum();
    if n == 0 {
        return Err(AnalysisError::EmptyMatrix);
    }
    let trace: u64 = (0..K).map(|i| counts[i][i]).sum();
    let nf = F::from_count(n);
    let mut p_e = F::zero();
    let mut chance_certain = false;
    for c in 0..K {
        let row: u64 = counts[c].iter().sum();
        let col: u64 = counts.iter().map(|r| r[c]).sum();
        if row == n && col == n {
            chance_certain = true;
        }
        p_e = p_e + (F::from_count(row) / nf) * (F::from_count(col) / nf);
    }
    let p_o = F::from_count(trace) / nf;
    let kappa = if chance_certain {
        (trace == n).then(F::one)
    } else {
        Some((p_o - p_e) / (F::one() - p_e))
    };
    Ok(KappaResult { p_o, p_e, kappa })
}

/// Confusion counts plus the papers that could not be paired.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Pairing {
    pub matrix: ConfusionMatrix,
    pub only_in_a: Vec<String>,
    pub only_in_b: Vec<String>,
}

/// Papers present in both rater sets, in paper-id order.
pub fn pair_assessments<'a>(
    a: &'a [Assessment],
    b: &'a [Assessment],
) -> (Vec<(&'a Assessment, &'a Assessment)>, Vec<String>, Vec<String>) {
    let b_by_id: HashMap<&str, &Assessment> = b.iter().map(|x| (x.paper_id.as_str(), x)).collect();
    let a_ids: std::collections::HashSet<&str> = a.iter().map(|x| x.paper_id.as_str()).collect();
    let mut pairs: Vec<_> = a
        .iter()
        .filter_map(|x| b_by_id.get(x.paper_id.as_str()).map(|y| (x, *y)))
        .collect();
    pairs.sort_by(|p, q| p.0.paper_id.cmp(&q.0.paper_id));
    let mut only_a: Vec<String> = a
        .iter()
        .filter(|x| !b_by_id.contains_key(x.paper_id.as_str()))
        .map(|x| x.paper_id.clone())
        .collect();
    let mut only_b: Vec<String> = b
        .iter()
        .filter(|x| !a_ids.contains(x.paper_id.as_str()))
        .map(|x| x.paper_id.clone())
        .collect();
    only_a.sort();
    only_b.sort();
    (pairs, only_a, only_b)
}

fn paper_confusion<'s>(
    items: impl Iterator<Item = &'s ChecklistItem>,
    a: &Assessment,
    b: &Assessment,
) -> ConfusionMatrix {
    let mut cm = ConfusionMatrix::default();
    for item in items.filter(|i| i.is_ternary()) {
        if let (Some(x), Some(y)) = (a.ternary(&item.id), b.ternary(&item.id)) {
            cm.record(x, y);
        }
    }
    cm
}

/// Counts items where both raters gave an in-domain Y/N/NA answer. Sentinels,
/// categorical items and unmatched papers are left out.
pub fn confusion(
    human: &[Assessment],
    auto: &[Assessment],
    schema: &ChecklistSchema,
    filter: Option<&dyn Fn(&ChecklistItem) -> bool>,
) -> Result<Pairing, AnalysisError> {
    let (pairs, only_a, only_b) = pair_assessments(human, auto);
    let mut matrix = ConfusionMatrix::default();
    for (h, a) in pairs {
        let items = schema.items.iter().filter(|i| filter.is_none_or(|f| f(i)));
        matrix.merge(&paper_confusion(items, h, a));
    }
    if matrix.n() == 0 {
        return Err(AnalysisError::NoComparableItems);
    }
    Ok(Pairing {
        matrix,
        only_in_a: only_a,
        only_in_b: only_b,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerPaperAccuracy<F> {
    pub scores: BTreeMap<String, F>,
    /// Paired papers with no comparable items.
    pub unscored: Vec<String>,
}

pub fn per_paper_accuracy<F: Real>(
    human: &[Assessment],
    auto: &[Assessment],
    schema: &ChecklistSchema,
) -> PerPaperAccuracy<F> {
    let (pairs, _, _) = pair_assessments(human, auto);
    let mut scores = BTreeMap::new();
    let mut unscored = Vec::new();
    for (h, a) in pairs {
        let cm = paper_confusion(schema.items.iter(), h, a);
        match accuracy::<F>(&cm) {
            Ok(acc) => {
                scores.insert(h.paper_id.clone(), acc);
            }
            Err(_) => unscored.push(h.paper_id.clone()),
        }
    }
    PerPaperAccuracy { scores, unscored }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupAgreement<F> {
    pub key: String,
    pub confusion: ConfusionMatrix,
    pub n: u64,
    pub accuracy: Option<F>,
    pub kappa: Option<KappaResult<F>>,
    pub merged_kappa: Option<KappaResult<F>>,
}

impl<F: Real> GroupAgreement<F> {
    fn from_matrix(key: String, confusion: ConfusionMatrix) -> Self {
        GroupAgreement {
            key,
            n: confusion.n(),
            accuracy: accuracy(&confusion).ok(),
            kappa: cohen_kappa(&confusion).ok(),
            merged_kappa: kappa_merged(&confusion).ok(),
            confusion,
        }
    }
}

/// Exact-match agreement on a categorical item; never folded into kappa.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategoricalAgreement<F> {
    pub item_id: String,
    pub n: u64,
    pub matches: u64,
    pub accuracy: Option<F>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ClassCounts {
    pub y: u64,
    pub n: u64,
    pub na: u64,
    pub sentinel: u64,
}

impl ClassCounts {
    fn add(&mut self, a: &Assessment, item_id: &str) {
        match a.answers.get(item_id) {
            Some(ans) if ans.is_sentinel() => self.sentinel += 1,
            Some(ans) => match ans.ternary() {
                Some(Ternary::Y) => self.y += 1,
                Some(Ternary::N) => self.n += 1,
                Some(Ternary::NA) => self.na += 1,
                None => {}
            },
            None => {}
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ClassDistribution {
    pub rater_a: ClassCounts,
    pub rater_b: ClassCounts,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgreementReport<F> {
    pub papers_compared: usize,
    pub only_in_a: Vec<String>,
    pub only_in_b: Vec<String>,
    pub confusion: ConfusionMatrix,
    pub accuracy: F,
    pub overall: KappaResult<F>,
    pub merged: KappaResult<F>,
    pub per_dimension: Vec<GroupAgreement<F>>,
    pub per_field: Vec<GroupAgreement<F>>,
    pub categorical: Vec<CategoricalAgreement<F>>,
    pub per_paper_accuracy: PerPaperAccuracy<F>,
    pub per_paper_summary: Option<Summary<F>>,
    pub class_distribution: ClassDistribution,
}

/// Full comparison of rater A (reference) against rater B (automated).
pub fn agreement_report<F: Real>(
    a_set: &[Assessment],
    b_set: &[Assessment],
    schema: &ChecklistSchema,
) -> Result<AgreementReport<F>, AnalysisError> {
    let (pairs, only_in_a, only_in_b) = pair_assessments(a_set, b_set);
    let mut per_item: BTreeMap<&str, ConfusionMatrix> = BTreeMap::new();
    let mut dist = ClassDistribution::default();
    let mut categorical: Vec<CategoricalAgreement<F>> = Vec::new();

    for item in &schema.items {
        if item.is_ternary() {
            let mut cm = ConfusionMatrix::default();
            for (a, b) in &pairs {
                if let (Some(x), Some(y)) = (a.ternary(&item.id), b.ternary(&item.id)) {
                    cm.record(x, y);
                }
                dist.rater_a.add(a, &item.id);
                dist.rater_b.add(b, &item.id);
            }
            per_item.insert(item.id.as_str(), cm);
        } else {
            let (mut n, mut matches) = (0u64, 0u64);
            for (a, b) in &pairs {
                let (Some(x), Some(y)) = (a.value(&item.id), b.value(&item.id)) else {
                    continue;
                };
                if !item.value_domain.contains(x) || !item.value_domain.contains(y) {
                    continue;
                }
                n += 1;
                matches += u64::from(x == y);
            }
            categorical.push(CategoricalAgreement {
                item_id: item.id.clone(),
                n,
                matches,
                accuracy: ratio(matches, n),
            });
        }
    }

    let mut overall_cm = ConfusionMatrix::default();
    for cm in per_item.values() {
        overall_cm.merge(cm);
    }
    if overall_cm.n() == 0 {
        return Err(AnalysisError::NoComparableItems);
    }

    let per_field = schema
        .ternary_items()
        .map(|i| GroupAgreement::from_matrix(i.id.clone(), per_item[i.id.as_str()]))
        .collect();
    let per_dimension = schema
        .dimensions
        .iter()
        .filter_map(|d| {
            let mut cm = ConfusionMatrix::default();
            for item in schema.ternary_items().filter(|i| &i.dimension == d) {
                cm.merge(&per_item[item.id.as_str()]);
            }
            (cm.n() > 0).then(|| GroupAgreement::from_matrix(d.clone(), cm))
        })
        .collect();

    let per_paper_accuracy = per_paper_accuracy::<F>(a_set, b_set, schema);
    let values: Vec<F> = per_paper_accuracy.scores.values().copied().collect();

    Ok(AgreementReport {
        papers_compared: pairs.len(),
        only_in_a,
        only_in_b,
        accuracy: accuracy(&overall_cm)?,
        overall: cohen_kappa(&overall_cm)?,
        merged: kappa_merged(&overall_cm)?,
        confusion: overall_cm,
        per_dimension,
        per_field,
        categorical,
        per_paper_summary: summarize(&values),
        per_paper_accuracy,
        class_distribution: dist,
    })
}
