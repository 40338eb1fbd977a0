//! Deterministic scripted provider for hermetic runs.

use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::Deserialize;

use repcheck_core::checklist::ProviderInfo;
use repcheck_core::Assessment;

use super::context::NO_ARTIFACT_MARKER;
use super::provider::{Provider, ProviderError, ProviderRequest};

/// What the stub answers for (paper, item) pairs without a script entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StubFallback {
    /// This value when the item admits it, else the item's first option.
    Value(String),
    /// Text that never parses.
    Garbage,
    /// `N` for artifact fields of papers without an artifact, `NA` (or the
    /// first option) elsewhere.
    Faithful,
}

/// Maps (paper_id, item_id) to a sequence of raw responses, one per
/// attempt; the last one repeats once the sequence is used up.
#[derive(Debug)]
pub struct StubProvider {
    script: HashMap<(String, String), Vec<String>>,
    fallback: StubFallback,
    calls: AtomicUsize,
    used: Mutex<HashMap<(String, String), usize>>,
}

/// Script file layout: `{ paper_id: { item_id: "Y" | ["raw 1", "raw 2"] } }`.
/// A plain string is an answer value; a list holds raw responses.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ScriptEntry {
    Value(String),
    Raw(Vec<String>),
}

pub fn answer_json(value: &str, disambiguation: &str) -> String {
    serde_json::json!({ "answer": value, "disambiguation": disambiguation }).to_string()
}

impl StubProvider {
    pub fn new(fallback: StubFallback) -> Self {
        StubProvider {
            script: HashMap::new(),
            fallback,
            calls: AtomicUsize::new(0),
            used: Mutex::new(HashMap::new()),
        }
    }

    /// Answers every field with the given assessments' values.
    pub fn echo(assessments: &[Assessment]) -> Self {
        let mut stub = StubProvider::new(StubFallback::Faithful);
        for a in assessments {
            for (item, ans) in &a.answers {
                let note = if ans.disambiguation.is_empty() { "scripted" } else { &ans.disambiguation };
                stub.script_raw(&a.paper_id, item, vec![answer_json(&ans.value, note)]);
            }
        }
        stub
    }

    pub fn from_script_json(bytes: &[u8], fallback: StubFallback) -> Result<Self, serde_json::Error> {
        let parsed: BTreeMap<String, BTreeMap<String, ScriptEntry>> = serde_json::from_slice(bytes)?;
        let mut stub = StubProvider::new(fallback);
        for (paper, items) in parsed {
            for (item, entry) in items {
                let raws = match entry {
                    ScriptEntry::Value(v) => vec![answer_json(&v, "scripted")],
                    ScriptEntry::Raw(r) => r,
                };
                stub.script_raw(&paper, &item, raws);
            }
        }
        Ok(stub)
    }

    pub fn script_answer(&mut self, paper_id: &str, item_id: &str, value: &str) {
        self.script_raw(paper_id, item_id, vec![answer_json(value, "scripted")]);
    }

    pub fn script_raw(&mut self, paper_id: &str, item_id: &str, responses: Vec<String>) {
        self.script.insert((paper_id.to_string(), item_id.to_string()), responses);
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    fn fallback_response(&self, request: &ProviderRequest) -> String {
        let allowed = request.allowed_values();
        let pick = |want: &str| {
            if allowed.iter().any(|a| a == want) {
                want.to_string()
            } else {
                allowed.first().cloned().unwrap_or_else(|| want.to_string())
            }
        };
        match &self.fallback {
            StubFallback::Garbage => "I am not sure about this one.".to_string(),
            StubFallback::Value(v) => answer_json(&pick(v), "fallback"),
            StubFallback::Faithful => {
                if request.user_content.contains(NO_ARTIFACT_MARKER) {
                    answer_json(&pick("N"), "no artifact is linked")
                } else {
                    answer_json(&pick("NA"), "fallback")
                }
            }
        }
    }
}

impl Provider for StubProvider {
    fn complete(&self, request: &ProviderRequest) -> Result<String, ProviderError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let key = (request.paper_id.clone(), request.item_id.clone());
        let Some(responses) = self.script.get(&key).filter(|r| !r.is_empty()) else {
            return Ok(self.fallback_response(request));
        };
        let mut used = self.used.lock().expect("stub lock");
        let n = used.entry(key).or_insert(0);
        let out = responses[(*n).min(responses.len() - 1)].clone();
        *n += 1;
        Ok(out)
    }

    fn describe(&self) -> ProviderInfo {
        ProviderInfo {
            provider: "stub".into(),
            model: "scripted".into(),
            settings: BTreeMap::new(),
        }
    }
}
