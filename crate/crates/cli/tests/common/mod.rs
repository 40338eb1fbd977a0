#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use repcheck_core::checklist::ValueDomain;
use repcheck_core::{Assessment, ChecklistSchema, FieldAnswer, Rater};

pub fn repcheck(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_repcheck"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("run repcheck")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

pub fn p(path: &Path) -> &str {
    path.to_str().expect("utf-8 path")
}

pub struct Paper {
    pub id: String,
    pub year: i32,
    pub text: String,
}

impl Paper {
    pub fn new(id: &str, year: i32) -> Self {
        Paper {
            id: id.to_string(),
            year,
            text: format!(
                "Paper {id}. We propose a local search heuristic and evaluate it on 40 benchmark \
                 instances with 30 independent runs each. Results are reported as mean and \
                 standard deviation of the final objective value."
            ),
        }
    }

    pub fn with_text(mut self, text: impl Into<String>) -> Self {
        self.text = text.into();
        self
    }
}

/// `documents/<id>.txt` plus `manifest.csv` under `root`.
pub fn write_corpus(root: &Path, papers: &[Paper]) -> PathBuf {
    let docs = root.join("documents");
    std::fs::create_dir_all(&docs).unwrap();
    let mut manifest = String::from("paper_id,year,title,pdf_path\n");
    for paper in papers {
        std::fs::write(docs.join(format!("{}.txt", paper.id)), &paper.text).unwrap();
        manifest.push_str(&format!("{},{},Title {},documents/{}.txt\n", paper.id, paper.year, paper.id, paper.id));
    }
    let path = root.join("manifest.csv");
    std::fs::write(&path, manifest).unwrap();
    path
}

/// Manifest rows only; `report` never opens the documents.
pub fn write_manifest_rows(root: &Path, rows: &[(&str, i32)]) -> PathBuf {
    let mut manifest = String::from("paper_id,year,title,pdf_path\n");
    for (id, year) in rows {
        manifest.push_str(&format!("{id},{year},Title {id},documents/{id}.pdf\n"));
    }
    let path = root.join("manifest.csv");
    std::fs::write(&path, manifest).unwrap();
    path
}

/// Offline stub configuration; `extra` is appended verbatim.
pub fn write_config(root: &Path, extra: &str) -> PathBuf {
    let text = format!(
        "manifest = \"manifest.csv\"\noutput_dir = \"out\"\nworkers = 2\n\n\
         [artifacts]\nmode = \"offline\"\n\n\
         [provider]\nkind = \"stub\"\n\n\
         [provider.retry]\nmax_attempts = 2\nbackoff = 0.0\n\n{extra}"
    );
    let path = root.join("repcheck.toml");
    std::fs::write(&path, text).unwrap();
    path
}

/// Every item answered with a value drawn uniformly from its domain.
pub fn random_assessment(schema: &ChecklistSchema, id: &str, rater: Rater, rng: &mut ChaCha8Rng) -> Assessment {
    let mut a = Assessment::new(id, rater);
    for item in &schema.items {
        let options = item.value_domain.options();
        let v = options[rng.random_range(0..options.len())];
        a.set(&item.id, FieldAnswer::new(v, "fixture"));
    }
    a
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn write_assessments(dir: &Path, set: &[Assessment]) {
    std::fs::create_dir_all(dir).unwrap();
    for a in set {
        std::fs::write(dir.join(a.file_name()), a.to_json_pretty()).unwrap();
    }
}

/// Three ternary items in one dimension.
pub fn tiny_schema_json() -> &'static str {
    r#"{
  "version": "test",
  "dimensions": ["d"],
  "items": [
    {"id": "a", "dimension": "d", "title": "A", "criteria": "", "domain": {"type": "ternary"}, "kind": "standard"},
    {"id": "b", "dimension": "d", "title": "B", "criteria": "", "domain": {"type": "ternary"}, "kind": "standard"},
    {"id": "c", "dimension": "d", "title": "C", "criteria": "", "domain": {"type": "ternary"}, "kind": "standard"}
  ]
}"#
}

pub fn ternary(id: &str, rater: Rater, values: &[(&str, &str)]) -> Assessment {
    let mut a = Assessment::new(id, rater);
    for (item, v) in values {
        a.set(item, FieldAnswer::new(*v, ""));
    }
    a
}

/// `metric → value` from a two-column table.
pub fn metric_table(path: &Path) -> BTreeMap<String, String> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records()
        .map(|rec| {
            let rec = rec.unwrap();
            (rec[0].to_string(), rec[1].to_string())
        })
        .collect()
}

pub fn table_rows(path: &Path) -> Vec<BTreeMap<String, String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let headers = r.headers().unwrap().clone();
    r.records()
        .map(|rec| {
            let rec = rec.unwrap();
            headers.iter().zip(rec.iter()).map(|(h, v)| (h.to_string(), v.to_string())).collect()
        })
        .collect()
}

pub fn is_ternary(d: &ValueDomain) -> bool {
    d.is_ternary()
}
