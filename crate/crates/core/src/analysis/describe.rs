use serde::Serialize;

use crate::scalar::Real;

/// Five-number summary plus mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary<F> {
    pub n: usize,
    pub mean: F,
    pub median: F,
    pub q1: F,
    pub q3: F,
    pub min: F,
    pub max: F,
}

/// Quantile with linear interpolation between order statistics.
pub fn quantile<F: Real>(sorted: &[F], q: F) -> F {
    debug_assert!(!sorted.is_empty());
    let pos = q * F::from_count(sorted.len() as u64 - 1);
    let lo = pos.floor();
    let frac = pos - lo;
    let i = lo.to_usize().unwrap_or(0).min(sorted.len() - 1);
    let j = (i + 1).min(sorted.len() - 1);
    sorted[i] + (sorted[j] - sorted[i]) * frac
}

pub fn summarize<F: Real>(values: &[F]) -> Option<Summary<F>> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("no NaN in summary input"));
    let sum = sorted.iter().fold(F::zero(), |acc, &x| acc + x);
    Some(Summary {
        n: sorted.len(),
        mean: sum / F::from_count(sorted.len() as u64),
        median: quantile(&sorted, F::half()),
        q1: quantile(&sorted, F::from_f64_lossy(0.25)),
        q3: quantile(&sorted, F::from_f64_lossy(0.75)),
        min: sorted[0],
        max: sorted[sorted.len() - 1],
    })
}
