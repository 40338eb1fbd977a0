//! CSV tables backing every agreement and corpus figure, plus a JSON dump of
//! the full report.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::checklist::Ternary;
use crate::modality::Modality;
use crate::scalar::Real;

use super::agreement::{AgreementReport, ClassCounts, KappaResult};
use super::corpus::{CorpusAnalytics, TestOutcome};
use super::describe::Summary;

fn num<F: Real>(x: Option<F>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn kappa<F: Real>(k: Option<&KappaResult<F>>) -> String {
    num(k.and_then(|k| k.kappa))
}

fn write_csv(dir: &Path, name: &str, header: &[&str], rows: Vec<Vec<String>>) -> io::Result<PathBuf> {
    let path = dir.join(name);
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(path)
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> io::Result<PathBuf> {
    let path = dir.join(name);
    let mut text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    text.push('\n');
    fs::write(&path, text)?;
    Ok(path)
}

fn summary_cells<F: Real>(s: Option<&Summary<F>>) -> Vec<String> {
    match s {
        Some(s) => vec![
            s.n.to_string(),
            s.mean.to_string(),
            s.median.to_string(),
            s.q1.to_string(),
            s.q3.to_string(),
            s.min.to_string(),
            s.max.to_string(),
        ],
        None => vec!["0".into(), String::new(), String::new(), String::new(), String::new(), String::new(), String::new()],
    }
}

const SUMMARY_HEADER: [&str; 7] = ["n", "mean", "median", "q1", "q3", "min", "max"];

fn class_row(rater: &str, c: &ClassCounts) -> Vec<String> {
    vec![
        rater.to_string(),
        c.y.to_string(),
        c.n.to_string(),
        c.na.to_string(),
        c.sentinel.to_string(),
    ]
}

/// Writes the agreement tables into `dir`; returns the files written.
pub fn write_agreement_tables<F: Real>(report: &AgreementReport<F>, dir: &Path) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut out = Vec::new();

    out.push(write_csv(
        dir,
        "agreement_overall.csv",
        &["metric", "value"],
        vec![
            vec!["papers_compared".into(), report.papers_compared.to_string()],
            vec!["comparable_items".into(), report.confusion.n().to_string()],
            vec!["accuracy".into(), report.accuracy.to_string()],
            vec!["p_o".into(), report.overall.p_o.to_string()],
            vec!["p_e".into(), report.overall.p_e.to_string()],
            vec!["kappa".into(), num(report.overall.kappa)],
            vec!["merged_p_o".into(), report.merged.p_o.to_string()],
            vec!["merged_p_e".into(), report.merged.p_e.to_string()],
            vec!["kappa_n_eq_na".into(), num(report.merged.kappa)],
            vec![
                "mean_per_paper_accuracy".into(),
                num(report.per_paper_summary.map(|s| s.mean)),
            ],
            vec![
                "median_per_paper_accuracy".into(),
                num(report.per_paper_summary.map(|s| s.median)),
            ],
        ],
    )?);

    let mut rows = Vec::new();
    for a in Ternary::ALL {
        for b in Ternary::ALL {
            rows.push(vec![
                a.to_string(),
                b.to_string(),
                report.confusion.get(a, b).to_string(),
            ]);
        }
    }
    out.push(write_csv(dir, "confusion.csv", &["human", "automated", "count"], rows)?);

    let group_rows = |groups: &[super::agreement::GroupAgreement<F>]| {
        groups
            .iter()
            .map(|g| {
                vec![
                    g.key.clone(),
                    g.n.to_string(),
                    num(g.accuracy),
                    kappa(g.kappa.as_ref()),
                    kappa(g.merged_kappa.as_ref()),
                ]
            })
            .collect::<Vec<_>>()
    };
    let header = ["key", "n", "accuracy", "kappa", "kappa_n_eq_na"];
    out.push(write_csv(dir, "per_field.csv", &header, group_rows(&report.per_field))?);
    out.push(write_csv(dir, "per_dimension.csv", &header, group_rows(&report.per_dimension))?);

    out.push(write_csv(
        dir,
        "categorical_fields.csv",
        &["item_id", "n", "matches", "accuracy"],
        report
            .categorical
            .iter()
            .map(|c| vec![c.item_id.clone(), c.n.to_string(), c.matches.to_string(), num(c.accuracy)])
            .collect(),
    )?);

    let mut rows = Vec::new();
    for g in &report.per_field {
        for a in Ternary::ALL {
            for b in Ternary::ALL {
                let c = g.confusion.get(a, b);
                if a != b && c > 0 {
                    rows.push(vec![g.key.clone(), a.to_string(), b.to_string(), c.to_string()]);
                }
            }
        }
    }
    out.push(write_csv(dir, "error_patterns.csv", &["item_id", "human", "automated", "count"], rows)?);

    out.push(write_csv(
        dir,
        "per_paper_accuracy.csv",
        &["paper_id", "accuracy"],
        report
            .per_paper_accuracy
            .scores
            .iter()
            .map(|(id, acc)| vec![id.clone(), acc.to_string()])
            .chain(report.per_paper_accuracy.unscored.iter().map(|id| vec![id.clone(), String::new()]))
            .collect(),
    )?);

    out.push(write_csv(
        dir,
        "class_distribution.csv",
        &["rater", "Y", "N", "NA", "UNPARSEABLE"],
        vec![
            class_row("human", &report.class_distribution.rater_a),
            class_row("automated", &report.class_distribution.rater_b),
        ],
    )?);

    out.push(write_csv(
        dir,
        "unmatched_papers.csv",
        &["paper_id", "present_in"],
        report
            .only_in_a
            .iter()
            .map(|id| vec![id.clone(), "human".into()])
            .chain(report.only_in_b.iter().map(|id| vec![id.clone(), "automated".into()]))
            .collect(),
    )?);

    out.push(write_json(dir, "agreement_report.json", report)?);
    Ok(out)
}

fn test_row<F: Real>(name: &str, t: &TestOutcome<F>, alpha: F) -> Vec<String> {
    match t {
        TestOutcome::Computed(r) => vec![
            name.to_string(),
            r.statistic.to_string(),
            r.p_value.to_string(),
            serde_json::to_value(r.p_method)
                .ok()
                .and_then(|v| v.as_str().map(str::to_string))
                .unwrap_or_default(),
            num(r.effect),
            alpha.to_string(),
            r.rejects(alpha).to_string(),
            String::new(),
        ],
        TestOutcome::NotApplicable { reason } => vec![
            name.to_string(),
            String::new(),
            String::new(),
            "not_applicable".into(),
            String::new(),
            alpha.to_string(),
            String::new(),
            reason.clone(),
        ],
    }
}

/// Writes the corpus tables into `dir`; returns the files written.
pub fn write_corpus_tables<F: Real>(c: &CorpusAnalytics<F>, dir: &Path) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut out = Vec::new();

    out.push(write_csv(
        dir,
        "papers.csv",
        &[
            "paper_id", "year", "completeness", "yes", "applicable", "has_material", "modality",
            "broken_link", "persistent", "nominated", "won",
        ],
        c.papers
            .iter()
            .map(|p| {
                vec![
                    p.paper_id.clone(),
                    p.year.to_string(),
                    num(p.completeness),
                    p.yes_count.to_string(),
                    p.applicable_count.to_string(),
                    p.has_material.to_string(),
                    p.modality.as_str().into(),
                    p.broken_link.to_string(),
                    p.persistent.to_string(),
                    p.nominated.to_string(),
                    p.won.to_string(),
                ]
            })
            .collect(),
    )?);

    let mut header = vec!["year"];
    header.extend(SUMMARY_HEADER);
    header.extend(["papers", "with_material", "availability"]);
    out.push(write_csv(
        dir,
        "completeness_by_year.csv",
        &header,
        c.by_year
            .iter()
            .map(|y| {
                let mut row = vec![y.year.to_string()];
                row.extend(summary_cells(y.completeness.as_ref()));
                row.extend([y.papers.to_string(), y.with_material.to_string(), num(y.availability)]);
                row
            })
            .collect(),
    )?);

    let mut header = vec!["year"];
    header.extend(Modality::ALL.iter().map(|m| m.as_str()));
    out.push(write_csv(
        dir,
        "modality_by_year.csv",
        &header,
        c.by_year
            .iter()
            .map(|y| {
                let mut row = vec![y.year.to_string()];
                row.extend(Modality::ALL.iter().map(|m| y.modality.get(m).copied().unwrap_or(0).to_string()));
                row
            })
            .collect(),
    )?);

    let total = c.papers.len() as u64;
    out.push(write_csv(
        dir,
        "modality_overall.csv",
        &["modality", "papers", "proportion"],
        Modality::ALL
            .iter()
            .map(|m| {
                let k = c.modality.get(m).copied().unwrap_or(0) as u64;
                vec![m.as_str().into(), k.to_string(), num(crate::scalar::ratio::<F>(k, total))]
            })
            .collect(),
    )?);

    out.push(write_csv(
        dir,
        "item_reporting.csv",
        &["item_id", "title", "Y", "N", "NA", "missing", "reporting_rate"],
        c.items
            .iter()
            .map(|i| {
                vec![
                    i.item_id.clone(),
                    i.title.clone(),
                    i.tally.yes.to_string(),
                    i.tally.no.to_string(),
                    i.tally.na.to_string(),
                    i.tally.other.to_string(),
                    num(i.reporting_rate),
                ]
            })
            .collect(),
    )?);

    let mut rows = Vec::new();
    for (item, counts) in &c.categorical {
        for (value, k) in counts {
            rows.push(vec![item.clone(), value.clone(), k.to_string()]);
        }
    }
    out.push(write_csv(dir, "categorical_items.csv", &["item_id", "value", "papers"], rows)?);

    let mut header = vec!["group"];
    header.extend(SUMMARY_HEADER);
    header.extend(["papers", "availability"]);
    out.push(write_csv(
        dir,
        "best_paper_groups.csv",
        &header,
        c.best_paper
            .groups
            .iter()
            .map(|g| {
                let mut row = vec![g.group.clone()];
                row.extend(summary_cells(g.completeness.as_ref()));
                row.extend([g.papers.to_string(), num(g.availability)]);
                row
            })
            .collect(),
    )?);

    out.push(write_csv(
        dir,
        "tests.csv",
        &["test", "statistic", "p_value", "p_method", "effect", "alpha", "reject", "note"],
        vec![
            test_row("kruskal_wallis_completeness_by_year", &c.completeness_by_year_test, c.alpha),
            test_row("mann_whitney_nominated_vs_not", &c.best_paper.nominated_vs_rest, c.alpha),
            test_row("mann_whitney_winners_vs_not_nominated", &c.best_paper.winners_vs_rest, c.alpha),
        ],
    )?);

    let mut rows = vec![
        vec!["papers".into(), c.papers.len().to_string()],
        vec!["alpha".into(), c.alpha.to_string()],
        vec!["with_material".into(), c.with_material.to_string()],
        vec!["availability".into(), num(c.availability)],
        vec!["broken_links".into(), c.broken_links.to_string()],
        vec!["persistent_code_or_data".into(), c.persistent.to_string()],
    ];
    rows.push(vec!["mean_completeness".into(), num(c.overall_completeness.map(|s| s.mean))]);
    rows.push(vec!["median_completeness".into(), num(c.overall_completeness.map(|s| s.median))]);
    out.push(write_csv(dir, "corpus_summary.csv", &["metric", "value"], rows)?);

    out.push(write_json(dir, "corpus_report.json", c)?);
    Ok(out)
}
