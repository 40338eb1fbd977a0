//! Acceptance suite. Prints one line per criterion and exits nonzero when
//! any criterion fails. The replication check is skipped unless
//! `REPCHECK_REPLICATION_DIR` points at a directory holding `human/`,
//! `auto/` and `manifest.csv`.

mod common;

use std::collections::BTreeMap;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::seq::IndexedRandom;
use rand::Rng;

use common::*;
use repcheck_core::analysis::{
    accuracy, cohen_kappa, kappa_merged, kruskal_wallis, mann_whitney_u, ConfusionMatrix, PValueMethod,
};
use repcheck_core::checklist::{completeness, reporting_rate};
use repcheck_core::{Assessment, ChecklistSchema, FieldAnswer, Rater, Ternary};
use repcheck_pipeline::harness::{
    attempt_execution, inventory, truncate_for_context, CharRatioTokenizer, ExecReason, SandboxConfig, Tokenizer,
    Verdict,
};

const METRIC_TOL: f64 = 1e-12;
const METRIC_BUDGET: Duration = Duration::from_secs(5);
const WORKED_TOL: f64 = 1e-4;
const E2E_BUDGET: Duration = Duration::from_secs(10);
const RANDOM_ACC: (f64, f64) = (1.0 / 3.0, 0.02);
const RANDOM_KAPPA_TOL: f64 = 0.03;
const KW_TOL: f64 = 1e-9;
const FPR_RANGE: (f64, f64) = (0.03, 0.07);
const NONPARAM_BUDGET: Duration = Duration::from_secs(60);
const SANDBOX_LIMIT_S: u64 = 10;
const SANDBOX_SLACK_S: f64 = 5.0;
const REPLICATION_TOL: f64 = 0.01;
const REPLICATION_AVAIL_TOL: f64 = 0.001;

enum Verdict3 {
    Pass(String),
    Fail(String),
    Skip(String),
}

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn close(name: &str, got: f64, want: f64, tol: f64) -> Result<(), String> {
    ensure((got - want).abs() <= tol, || format!("{name} = {got}, expected {want} ± {tol}"))
}

fn ternary_of(rng: &mut impl Rng) -> Ternary {
    *Ternary::ALL.choose(rng).expect("non-empty")
}

struct Brute {
    accuracy: f64,
    kappa: Option<f64>,
    merged: Option<f64>,
}

fn kappa_from_pairs<T: PartialEq + Copy>(pairs: &[(T, T)], classes: &[T]) -> (f64, Option<f64>) {
    let n = pairs.len() as f64;
    let p_o = pairs.iter().filter(|(a, b)| a == b).count() as f64 / n;
    let p_e: f64 = classes
        .iter()
        .map(|c| {
            let ca = pairs.iter().filter(|(a, _)| a == c).count() as f64;
            let cb = pairs.iter().filter(|(_, b)| b == c).count() as f64;
            ca * cb / (n * n)
        })
        .sum();
    let k = if p_e == 1.0 {
        (p_o == 1.0).then_some(1.0)
    } else {
        Some((p_o - p_e) / (1.0 - p_e))
    };
    (p_o, k)
}

fn brute(pairs: &[(Ternary, Ternary)]) -> Brute {
    let (acc, kappa) = kappa_from_pairs(pairs, &Ternary::ALL);
    let merged_pairs: Vec<(bool, bool)> = pairs.iter().map(|(a, b)| (*a == Ternary::Y, *b == Ternary::Y)).collect();
    let (_, merged) = kappa_from_pairs(&merged_pairs, &[true, false]);
    Brute { accuracy: acc, kappa, merged }
}

fn same(name: &str, got: Option<f64>, want: Option<f64>) -> Result<(), String> {
    match (got, want) {
        (None, None) => Ok(()),
        (Some(g), Some(w)) => close(name, g, w, METRIC_TOL),
        _ => Err(format!("{name}: got {got:?}, expected {want:?}")),
    }
}

fn metric_oracle() -> Check {
    let start = Instant::now();
    let mut rng = seeded(0x5eed_0001);
    let mut worst = 0.0f64;
    for rep in 0..500 {
        let len = rng.random_range(1..=50);
        // skewed draws exercise the degenerate marginals too
        let pairs: Vec<(Ternary, Ternary)> = (0..len)
            .map(|_| {
                let a = ternary_of(&mut rng);
                let b = if rng.random_bool(0.6) { a } else { ternary_of(&mut rng) };
                (a, b)
            })
            .collect();
        let mut cm = ConfusionMatrix::default();
        for &(a, b) in &pairs {
            cm.record(a, b);
        }
        let want = brute(&pairs);
        let acc: f64 = accuracy(&cm).map_err(|e| e.to_string())?;
        let k = cohen_kappa::<f64>(&cm).map_err(|e| e.to_string())?;
        let m = kappa_merged::<f64>(&cm).map_err(|e| e.to_string())?;
        close(&format!("pair {rep} accuracy"), acc, want.accuracy, METRIC_TOL)?;
        same(&format!("pair {rep} kappa"), k.kappa, want.kappa)?;
        same(&format!("pair {rep} merged kappa"), m.kappa, want.merged)?;
        for (g, w) in [(k.kappa, want.kappa), (m.kappa, want.merged)] {
            if let (Some(g), Some(w)) = (g, w) {
                worst = worst.max((g - w).abs());
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < METRIC_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!("500 pairs, max |Δκ| = {worst:.1e}, {elapsed:.2?}"))
}

fn worked_kappa() -> Check {
    // rows: human Y, N, NA; columns: automated Y, N, NA
    let cm = ConfusionMatrix::from_counts([[4, 1, 0], [1, 2, 0], [0, 0, 2]]);
    let k = cohen_kappa::<f64>(&cm).map_err(|e| e.to_string())?.kappa.ok_or("κ undefined")?;
    let m = kappa_merged::<f64>(&cm).map_err(|e| e.to_string())?.kappa.ok_or("merged κ undefined")?;
    close("κ", k, 0.6774, WORKED_TOL)?;
    close("merged κ", m, 0.6000, WORKED_TOL)?;
    Ok(format!("κ = {k:.4}, merged κ = {m:.4}"))
}

fn echo_stub_end_to_end() -> Check {
    let start = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let root = dir.path();
    write_corpus(root, &[Paper::new("p1", 2021), Paper::new("p2", 2022), Paper::new("p3", 2023)]);
    let schema = ChecklistSchema::bundled();
    let mut rng = seeded(0x5eed_0003);
    let human: Vec<Assessment> = ["p1", "p2", "p3"]
        .iter()
        .map(|id| random_assessment(&schema, id, Rater::Human, &mut rng))
        .collect();
    write_assessments(&root.join("human"), &human);
    // offline artifacts: nothing leaves the machine
    let cfg = write_config(root, "[stub]\necho_dir = \"human\"\n");

    let out = repcheck(&["--config", p(&cfg), "assess"]);
    ensure(out.status.code() == Some(0), || format!("assess exited {:?}: {}", out.status.code(), stderr(&out)))?;
    let tables = root.join("tables");
    let out = repcheck(&[
        "--config",
        p(&cfg),
        "compare",
        p(&root.join("human")),
        p(&root.join("out/assessments")),
        "--out",
        p(&tables),
    ]);
    ensure(out.status.code() == Some(0), || format!("compare exited {:?}: {}", out.status.code(), stderr(&out)))?;
    let m = metric_table(&tables.join("agreement_overall.csv"));
    let get = |k: &str| m.get(k).and_then(|v| v.parse::<f64>().ok()).ok_or(format!("{k} missing"));
    let (acc, kappa) = (get("accuracy")?, get("kappa")?);
    ensure(acc == 1.0 && kappa == 1.0, || format!("accuracy {acc}, κ {kappa}"))?;
    ensure(get("papers_compared")? == 3.0, || "not all papers compared".into())?;
    let elapsed = start.elapsed();
    ensure(elapsed < E2E_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!("accuracy = {acc}, κ = {kappa}, {elapsed:.2?}"))
}

fn random_rater() -> Check {
    let mut rng = seeded(0x5eed_0004);
    let mut cm = ConfusionMatrix::default();
    for _ in 0..10_000 {
        let human = ternary_of(&mut rng);
        let auto = ternary_of(&mut rng);
        cm.record(human, auto);
    }
    let acc: f64 = accuracy(&cm).map_err(|e| e.to_string())?;
    let k = cohen_kappa::<f64>(&cm).map_err(|e| e.to_string())?.kappa.ok_or("κ undefined")?;
    close("accuracy", acc, RANDOM_ACC.0, RANDOM_ACC.1)?;
    close("κ", k, 0.0, RANDOM_KAPPA_TOL)?;
    Ok(format!("accuracy = {acc:.4}, κ = {k:.4}"))
}

/// Two-sided exact p by listing every split of ranks 1..=n into groups of
/// size m and n - m.
fn enumerated_p(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() + b.len();
    let m = a.len();
    let u_of = |first: &[usize]| -> usize {
        // U of the first group: pairs (x in first, y elsewhere) with x > y
        let rank_sum: usize = first.iter().map(|r| r + 1).sum();
        rank_sum - m * (m + 1) / 2
    };
    let observed = {
        let mut pooled: Vec<f64> = a.iter().chain(b).copied().collect();
        pooled.sort_by(f64::total_cmp);
        let ranks: Vec<usize> = a.iter().map(|x| pooled.iter().position(|y| y == x).unwrap()).collect();
        u_of(&ranks)
    };
    let (mut le, mut ge, mut total) = (0u64, 0u64, 0u64);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != m {
            continue;
        }
        let first: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let u = u_of(&first);
        total += 1;
        le += u64::from(u <= observed);
        ge += u64::from(u >= observed);
    }
    ((2 * le.min(ge)) as f64 / total as f64).min(1.0)
}

fn nonparametric() -> Check {
    let start = Instant::now();
    let mut partitions = 0usize;
    for n in 2..=10usize {
        for mask in 1u32..((1 << n) - 1) {
            let a: Vec<f64> = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| i as f64 + 1.0).collect();
            let b: Vec<f64> = (0..n).filter(|i| mask & (1 << i) == 0).map(|i| i as f64 + 1.0).collect();
            let r = mann_whitney_u(&a, &b).map_err(|e| e.to_string())?;
            let want = enumerated_p(&a, &b);
            ensure(r.p_method == PValueMethod::Exact, || format!("{a:?} vs {b:?} not exact"))?;
            ensure(r.p_value == want, || format!("{a:?} vs {b:?}: p {} != {want}", r.p_value))?;
            partitions += 1;
        }
    }

    let h = kruskal_wallis(&[vec![1.0, 2.0], vec![3.0, 4.0]]).map_err(|e| e.to_string())?.statistic;
    close("H", h, 2.4, KW_TOL)?;

    let mut rng = seeded(0x5eed_0005);
    let reps = 1000;
    let (mut mw_rejects, mut kw_rejects) = (0usize, 0usize);
    for _ in 0..reps {
        let mut draw = |k: usize| -> Vec<f64> { (0..k).map(|_| rng.random::<f64>()).collect() };
        let (a, b) = (draw(20), draw(20));
        mw_rejects += usize::from(mann_whitney_u(&a, &b).map_err(|e| e.to_string())?.rejects(0.05));
        let groups = vec![draw(15), draw(15), draw(15)];
        kw_rejects += usize::from(kruskal_wallis(&groups).map_err(|e| e.to_string())?.rejects(0.05));
    }
    let mw_rate = mw_rejects as f64 / reps as f64;
    let kw_rate = kw_rejects as f64 / reps as f64;
    for (name, rate) in [("Mann–Whitney", mw_rate), ("Kruskal–Wallis", kw_rate)] {
        ensure((FPR_RANGE.0..=FPR_RANGE.1).contains(&rate), || {
            format!("{name} false-positive rate {rate} outside {FPR_RANGE:?}")
        })?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < NONPARAM_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{partitions} exact partitions, H = {h}, FPR MW {mw_rate:.3} KW {kw_rate:.3}, {elapsed:.2?}"
    ))
}

fn completeness_oracle() -> Check {
    let schema = ChecklistSchema::bundled();
    let counting: Vec<&str> = schema
        .items
        .iter()
        .filter(|i| !i.descriptive && i.value_domain.is_ternary())
        .map(|i| i.id.as_str())
        .collect();
    let mut rng = seeded(0x5eed_0006);
    let mut corpus = Vec::new();
    for i in 0..200 {
        let mut a = Assessment::new(format!("p{i}"), Rater::Human);
        for item in &schema.items {
            let roll: f64 = rng.random();
            if roll < 0.1 {
                continue; // unanswered
            }
            let value = if roll < 0.13 {
                repcheck_core::checklist::UNPARSEABLE.to_string()
            } else {
                let opts = item.value_domain.options();
                opts[rng.random_range(0..opts.len())].to_string()
            };
            a.set(&item.id, FieldAnswer::new(value, ""));
        }
        corpus.push(a);
    }

    let mut checked = 0usize;
    for a in &corpus {
        let (mut y, mut n) = (0u64, 0u64);
        for id in &counting {
            match a.value(id) {
                Some("Y") => y += 1,
                Some("N") => n += 1,
                _ => {}
            }
        }
        let score = completeness::<f64>(&schema, a);
        ensure(score.yes_count == y && score.applicable_count == y + n, || {
            format!("{}: counts {:?} vs {y}/{}", a.paper_id, score, y + n)
        })?;
        let want = (y + n > 0).then(|| y as f64 / (y + n) as f64);
        same(&format!("{} completeness", a.paper_id), score.value, want)?;

        // NA on every unanswered item leaves a defined score untouched
        let mut padded = a.clone();
        for id in &counting {
            if a.value(id).is_none() {
                padded.set(id, FieldAnswer::new("NA", ""));
            }
        }
        let after = completeness::<f64>(&schema, &padded);
        if score.value.is_some() {
            ensure(after.value == score.value, || format!("{}: NA insertion moved the score", a.paper_id))?;
            checked += 1;
        }
    }

    for id in &counting {
        let (y, n) = corpus.iter().fold((0u64, 0u64), |(y, n), a| match a.value(id) {
            Some("Y") => (y + 1, n),
            Some("N") => (y, n + 1),
            _ => (y, n),
        });
        let rate = reporting_rate::<f64>(&schema, &corpus, id).map_err(|e| e.to_string())?;
        same(&format!("{id} reporting rate"), rate, (y + n > 0).then(|| y as f64 / (y + n) as f64))?;
    }
    Ok(format!("200 assessments, {} items, {checked} NA-padded scores unchanged", counting.len()))
}

fn tree_digest(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).into_iter().flatten().flatten() {
            let path = e.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.insert(path.display().to_string(), std::fs::read(&path).unwrap_or_default());
            }
        }
    }
    out
}

fn sandbox_contract() -> Check {
    let tok = CharRatioTokenizer::default();
    let run = |script: &str| -> Result<(tempfile::TempDir, _), String> {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let repo = dir.path().join("repo");
        std::fs::create_dir(&repo).map_err(|e| e.to_string())?;
        std::fs::write(repo.join("run.sh"), script).map_err(|e| e.to_string())?;
        let snap = inventory(&repo, "https://example.org/fixture", u64::MAX, 1000, &tok).map_err(|e| e.to_string())?;
        let cfg = SandboxConfig {
            limit_s: SANDBOX_LIMIT_S,
            log_dir: Some(dir.path().join("logs")),
            ..SandboxConfig::default()
        };
        Ok((dir, attempt_execution(&snap, &cfg)))
    };

    let (_d, ok) = run("echo fine\nexit 0\n")?;
    ensure(ok.verdict == Verdict::Y && ok.reason == ExecReason::ExitOk, || {
        format!("exit-0 fixture gave {:?}/{:?}: {}", ok.verdict, ok.reason, ok.log_excerpt)
    })?;

    let start = Instant::now();
    let (_d, slow) = run("sleep 120\n")?;
    let wall = start.elapsed().as_secs_f64();
    let bound = SANDBOX_LIMIT_S as f64 + SANDBOX_SLACK_S;
    ensure(slow.verdict == Verdict::N && slow.reason == ExecReason::Timeout, || {
        format!("sleep fixture gave {:?}/{:?}", slow.verdict, slow.reason)
    })?;
    ensure(slow.duration_s <= bound && wall <= bound, || {
        format!("timeout took {:.2}s (wall {wall:.2}s), bound {bound}s", slow.duration_s)
    })?;

    let outside = tempfile::tempdir().map_err(|e| e.to_string())?;
    std::fs::write(outside.path().join("keep.txt"), "original").map_err(|e| e.to_string())?;
    let before = tree_digest(outside.path());
    let script = format!(
        "echo changed > {o}/keep.txt\nrm -f {o}/keep.txt\ntouch {o}/planted\n",
        o = outside.path().display()
    );
    let (_d, hostile) = run(&script)?;
    ensure(hostile.reason != ExecReason::SandboxError, || format!("sandbox error: {}", hostile.log_excerpt))?;
    ensure(tree_digest(outside.path()) == before, || "host files changed".into())?;

    Ok(format!(
        "exit 0 → Y, timeout after {:.2}s (limit {SANDBOX_LIMIT_S}s), host tree unchanged",
        slow.duration_s
    ))
}

fn truncation_contract() -> Check {
    let tok = CharRatioTokenizer::default();
    let text: String = (0..1500).map(|i| format!("{i:04}")).collect();
    ensure(tok.count(&text) == 1500, || format!("fixture has {} tokens", tok.count(&text)))?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    std::fs::write(dir.path().join("big.txt"), &text).map_err(|e| e.to_string())?;
    let snap = inventory(dir.path(), "https://example.org/a", u64::MAX, 1000, &tok).map_err(|e| e.to_string())?;
    let bundle = truncate_for_context(&snap, 1000, &tok);
    let e = bundle.entries.first().ok_or("empty bundle")?;
    ensure(e.tokens == 1000 && e.truncated, || format!("kept {} tokens", e.tokens))?;
    ensure(e.content == text[..4000], || "kept text is not the first 1,000 tokens".into())?;
    Ok("1500 → 1000 tokens, prefix kept".into())
}

fn replication() -> Verdict3 {
    let Some(root) = std::env::var_os("REPCHECK_REPLICATION_DIR") else {
        return Verdict3::Skip("REPCHECK_REPLICATION_DIR not set".into());
    };
    let root = Path::new(&root);
    let (human, auto, manifest) = (root.join("human"), root.join("auto"), root.join("manifest.csv"));
    if !(human.is_dir() && auto.is_dir() && manifest.is_file()) {
        return Verdict3::Skip(format!("{} lacks human/, auto/ or manifest.csv", root.display()));
    }
    let check = || -> Check {
        let out_dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let tables = out_dir.path().join("agreement");
        let out = repcheck(&["compare", p(&human), p(&auto), "--out", p(&tables)]);
        ensure(out.status.success(), || stderr(&out))?;
        let m = metric_table(&tables.join("agreement_overall.csv"));
        let get = |k: &str| m.get(k).and_then(|v| v.parse::<f64>().ok()).ok_or(format!("{k} missing"));
        let (k, mk) = (get("kappa")?, get("kappa_n_eq_na")?);
        close("overall κ", k, 0.67, REPLICATION_TOL)?;
        close("merged κ", mk, 0.75, REPLICATION_TOL)?;

        let report = out_dir.path().join("report");
        let out = repcheck(&["report", p(&human), "--manifest", p(&manifest), "--out", p(&report)]);
        ensure(out.status.success(), || stderr(&out))?;
        let json: serde_json::Value = serde_json::from_slice(
            &std::fs::read(report.join("corpus_report.json")).map_err(|e| e.to_string())?,
        )
        .map_err(|e| e.to_string())?;
        let mean = json["overall_completeness"]["mean"].as_f64().ok_or("no completeness")?;
        let avail = json["availability"].as_f64().ok_or("no availability")?;
        close("mean completeness", mean, 0.62, REPLICATION_TOL)?;
        close("availability", avail, 0.369, REPLICATION_AVAIL_TOL)?;
        Ok(format!("κ {k:.3}, merged {mk:.3}, completeness {mean:.3}, availability {:.1}%", avail * 100.0))
    };
    match check() {
        Ok(s) => Verdict3::Pass(s),
        Err(s) => Verdict3::Fail(s),
    }
}

fn main() -> ExitCode {
    let criteria: Vec<Criterion> = vec![
        ("metric oracle", metric_oracle),
        ("worked kappa example", worked_kappa),
        ("echo-stub end-to-end", echo_stub_end_to_end),
        ("random-rater calibration", random_rater),
        ("nonparametric tests", nonparametric),
        ("completeness and reporting-rate oracle", completeness_oracle),
        ("sandbox contract", sandbox_contract),
        ("truncation contract", truncation_contract),
    ];
    let mut results: Vec<(&str, Verdict3)> = criteria
        .into_iter()
        .map(|(name, f)| {
            let v = match f() {
                Ok(s) => Verdict3::Pass(s),
                Err(s) => Verdict3::Fail(s),
            };
            (name, v)
        })
        .collect();
    results.push(("replication (optional)", replication()));

    let mut failed = 0;
    for (name, v) in &results {
        match v {
            Verdict3::Pass(s) => println!("PASS  {name}: {s}"),
            Verdict3::Fail(s) => {
                failed += 1;
                println!("FAIL  {name}: {s}");
            }
            Verdict3::Skip(s) => println!("SKIP  {name}: {s}"),
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.iter().filter(|(_, v)| matches!(v, Verdict3::Pass(_))).count());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
