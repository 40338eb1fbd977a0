//! Two-sided Mann–Whitney U, Kruskal–Wallis H and the common-language
//! effect size.

use std::cmp::Ordering;

use serde::Serialize;
use statrs::function::erf::erfc;
use statrs::function::gamma::gamma_ur;

use crate::error::AnalysisError;
use crate::scalar::Real;

/// Pooled sizes up to this bound use the exact null distribution (when tie-free).
pub const EXACT_MAX_POOLED: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TestMethod {
    MannWhitneyTwoSided,
    KruskalWallis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PValueMethod {
    /// Full enumeration of rank assignments.
    Exact,
    /// Normal approximation, tie-corrected variance, continuity correction.
    NormalApprox,
    /// Chi-square upper tail.
    ChiSquare,
    /// All pooled values equal; p fixed at 1.
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestResult<F> {
    /// U of the first sample, or H.
    pub statistic: F,
    pub p_value: F,
    pub method: TestMethod,
    pub p_method: PValueMethod,
    /// Common-language effect size when computed alongside the test.
    pub effect: Option<F>,
    pub degenerate: bool,
}

impl<F: Real> TestResult<F> {
    pub fn rejects(&self, alpha: F) -> bool {
        self.p_value < alpha
    }

    pub fn with_effect(mut self, effect: F) -> Self {
        self.effect = Some(effect);
        self
    }
}

/// Midranks (1-based) of the pooled values, and the sizes of every tie group.
pub fn midranks<F: Real>(values: &[F]) -> (Vec<F>, Vec<u64>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| {
        values[i]
            .partial_cmp(&values[j])
            .unwrap_or(Ordering::Equal)
    });
    let mut ranks = vec![F::zero(); values.len()];
    let mut ties = Vec::new();
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end; average is (start+end+1)/2
        let avg = F::from_count((start + end + 1) as u64) * F::half();
        for &k in &order[start..end] {
            ranks[k] = avg;
        }
        if end - start > 1 {
            ties.push((end - start) as u64);
        }
        start = end;
    }
    (ranks, ties)
}

/// U statistics `(U_a, U_b)`, with `U_a + U_b = |a|·|b|`.
pub fn u_statistics<F: Real>(a: &[F], b: &[F]) -> (F, F) {
    let pooled: Vec<F> = a.iter().chain(b).copied().collect();
    let (ranks, _) = midranks(&pooled);
    let (na, nb) = (a.len() as u64, b.len() as u64);
    let rank_sum_a = ranks[..a.len()].iter().fold(F::zero(), |s, &r| s + r);
    let u_a = rank_sum_a - F::from_count(na * (na + 1)) * F::half();
    (u_a, F::from_count(na * nb) - u_a)
}

/// Number of ways each U value of the first sample arises under the null,
/// indexed by U (0..=m·n).
pub fn exact_u_counts(m: usize, n: usize) -> Vec<u64> {
    // freq[j][u]: arrangements of m' = current row of first-sample items with j second-sample items
    let max_u = m * n;
    let mut prev: Vec<Vec<u64>> = (0..=n)
        .map(|_| {
            let mut v = vec![0u64; max_u + 1];
            v[0] = 1;
            v
        })
        .collect();
    for mm in 1..=m {
        let mut cur: Vec<Vec<u64>> = vec![vec![0u64; max_u + 1]; n + 1];
        cur[0][0] = 1;
        for nn in 1..=n {
            for u in 0..=mm * nn {
                // last pooled item belongs to sample 1 (beats all nn) or sample 2
                let from_first = if u >= nn { prev[nn][u - nn] } else { 0 };
                cur[nn][u] = from_first + cur[nn - 1][u];
            }
        }
        prev = cur;
    }
    prev[n].clone()
}

/// Two-sided Mann–Whitney U test. Uses the exact null distribution when the
/// pooled size is at most [`EXACT_MAX_POOLED`] and there are no ties, else the
/// normal approximation.
pub fn mann_whitney_u<F: Real>(a: &[F], b: &[F]) -> Result<TestResult<F>, AnalysisError> {
    if a.is_empty() || b.is_empty() {
        return Err(AnalysisError::EmptySample);
    }
    let pooled: Vec<F> = a.iter().chain(b).copied().collect();
    let (_, ties) = midranks(&pooled);
    let (u_a, _) = u_statistics(a, b);
    let (m, n) = (a.len(), b.len());
    let big_n = m + n;
    let mn = F::from_count((m * n) as u64);
    let result = |p: F, p_method, degenerate| TestResult {
        statistic: u_a,
        p_value: p.min(F::one()).max(F::zero()),
        method: TestMethod::MannWhitneyTwoSided,
        p_method,
        effect: None,
        degenerate,
    };

    if ties.len() == 1 && ties[0] as usize == big_n {
        return Ok(result(F::one(), PValueMethod::Degenerate, true));
    }

    if ties.is_empty() && big_n <= EXACT_MAX_POOLED {
        let counts = exact_u_counts(m, n);
        let total: u64 = counts.iter().sum();
        // without ties U is an integer
        let u = u_a.round().to_usize().expect("U is a small non-negative integer");
        let le: u64 = counts[..=u].iter().sum();
        let ge: u64 = counts[u..].iter().sum();
        let p = F::from_count(2 * le.min(ge)) / F::from_count(total);
        return Ok(result(p, PValueMethod::Exact, false));
    }

    let nf = F::from_count(big_n as u64);
    let tie_term = ties
        .iter()
        .fold(F::zero(), |s, &t| s + F::from_count(t * t * t - t));
    let var = mn / F::from_f64_lossy(12.0)
        * ((nf + F::one()) - tie_term / (nf * (nf - F::one())));
    if var <= F::zero() {
        return Ok(result(F::one(), PValueMethod::Degenerate, true));
    }
    let mu = mn * F::half();
    let z = ((u_a - mu).abs() - F::half()).max(F::zero()) / var.sqrt();
    let p = F::from_f64_lossy(erfc(z.to_f64_lossy() / std::f64::consts::SQRT_2));
    Ok(result(p, PValueMethod::NormalApprox, false))
}

/// P(x_b > x_a) + ½·P(x_b = x_a) over all pairs.
///
/// `cles(a, b) + cles(b, a)` is exactly one.
pub fn cles<F: Real>(a: &[F], b: &[F]) -> Result<F, AnalysisError> {
    if a.is_empty() || b.is_empty() {
        return Err(AnalysisError::EmptySample);
    }
    let (u_a, u_b) = u_statistics(a, b);
    let mn = F::from_count((a.len() * b.len()) as u64);
    // Evaluate the smaller side directly so the two orderings sum to one.
    Ok(if u_b <= u_a {
        u_b / mn
    } else {
        F::one() - u_a / mn
    })
}

/// Kruskal–Wallis H test with tie correction. Empty groups are ignored.
pub fn kruskal_wallis<F: Real>(groups: &[Vec<F>]) -> Result<TestResult<F>, AnalysisError> {
    let groups: Vec<&Vec<F>> = groups.iter().filter(|g| !g.is_empty()).collect();
    if groups.len() < 2 {
        return Err(AnalysisError::TooFewGroups(groups.len()));
    }
    let pooled: Vec<F> = groups.iter().flat_map(|g| g.iter().copied()).collect();
    let (ranks, ties) = midranks(&pooled);
    let n = pooled.len() as u64;
    let nf = F::from_count(n);
    let result = |h: F, p: F, p_method, degenerate| TestResult {
        statistic: h,
        p_value: p.min(F::one()).max(F::zero()),
        method: TestMethod::KruskalWallis,
        p_method,
        effect: None,
        degenerate,
    };

    let tie_term = ties.iter().fold(F::zero(), |s, &t| s + F::from_count(t * t * t - t));
    let correction = F::one() - tie_term / F::from_count(n * n * n - n);
    if correction <= F::zero() {
        return Ok(result(F::zero(), F::one(), PValueMethod::Degenerate, true));
    }

    let mut offset = 0;
    let mut weighted = F::zero();
    for g in &groups {
        let r = ranks[offset..offset + g.len()]
            .iter()
            .fold(F::zero(), |s, &x| s + x);
        weighted = weighted + r * r / F::from_count(g.len() as u64);
        offset += g.len();
    }
    let h_raw = F::from_f64_lossy(12.0) / (nf * (nf + F::one())) * weighted
        - F::from_f64_lossy(3.0) * (nf + F::one());
    let h = (h_raw / correction).max(F::zero());
    let df = (groups.len() - 1) as f64;
    let p = if h > F::zero() {
        F::from_f64_lossy(gamma_ur(df / 2.0, h.to_f64_lossy() / 2.0))
    } else {
        F::one()
    };
    Ok(result(h, p, PValueMethod::ChiSquare, false))
}
