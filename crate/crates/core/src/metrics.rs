//! Search accuracy, classical fidelity, pure-state fidelity, top-k
//! truncation and per-configuration aggregates.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analyzer::AnalyticParams;
use crate::bits::Bitstring;
use crate::distribution::Distribution;
use crate::scalar::Real;

pub const DEFAULT_TAU: f64 = 0.3;
pub const DEFAULT_TOPK: usize = 30;
/// Allowed deviation from unit norm for [`state_fidelity`] inputs.
pub const NORM_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("state is not normalized (norm² = {0})")]
    NotNormalized(f64),
}

/// Fraction of `true_marked` found among the top-`k` predicted states that
/// also clear `tau`, with `k = |true_marked|`. Ranking is by probability,
/// ties by ascending index; states missing from `pred` are misses.
pub fn search_accuracy<T: Real>(
    pred: &Distribution<T>,
    true_marked: &[Bitstring],
    tau: T,
) -> Result<T, MetricsError> {
    if true_marked.is_empty() {
        return Err(MetricsError::Domain("true marked set is empty".into()));
    }
    if !(tau >= T::zero() && tau <= T::one()) {
        return Err(MetricsError::Domain(format!("tau {tau} outside [0, 1]")));
    }
    let truth: BTreeSet<u64> = true_marked.iter().map(Bitstring::index).collect();
    let k = truth.len();
    let hits = pred
        .ranked()
        .into_iter()
        .take(k)
        .filter(|(s, p)| *p >= tau && truth.contains(&s.index()))
        .count();
    Ok(T::of_usize(hits) / T::of_usize(k))
}

/// `(Σ √(p_i q_i))²` with absent states as zero. Clamped to 1 against
/// rounding in the inputs.
pub fn classical_fidelity<T: Real>(
    p: &Distribution<T>,
    q: &Distribution<T>,
) -> Result<T, MetricsError> {
    if p.n() != q.n() {
        return Err(MetricsError::DimensionMismatch {
            left: p.n(),
            right: q.n(),
        });
    }
    let (small, large) = if p.len() <= q.len() { (p, q) } else { (q, p) };
    let bc: T = small
        .iter()
        .map(|(s, a)| (a * large.prob(s)).max(T::zero()).sqrt())
        .sum();
    Ok((bc * bc).min(T::one()))
}

/// `|⟨a|b⟩|²` for unit-norm pure states.
pub fn state_fidelity<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Result<T, MetricsError> {
    if a.len() != b.len() {
        return Err(MetricsError::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    for v in [a, b] {
        let norm: T = v.iter().map(|c| c.norm_sqr()).sum();
        if (norm - T::one()).abs() > T::of(NORM_TOL) {
            return Err(MetricsError::NotNormalized(norm.to_f64_lossy()));
        }
    }
    let inner = a
        .iter()
        .zip(b)
        .fold(Complex::new(T::zero(), T::zero()), |acc, (x, y)| {
            acc + x.conj() * y
        });
    Ok(inner.norm_sqr())
}

/// Keeps the `limit` highest-ranked entries (zeros included).
pub fn truncate_topk<T: Real>(dist: &Distribution<T>, limit: usize) -> Distribution<T> {
    let ranked = dist.ranked();
    if ranked.len() <= limit {
        return dist.clone();
    }
    Distribution::from_entries(dist.n(), ranked.into_iter().take(limit), true)
}

/// True when the analytic per-marked probability falls below `tau`, so that
/// even a perfect prediction scores SA = 0.
pub fn is_degenerate(n: usize, t: usize, k: usize, tau: f64) -> bool {
    AnalyticParams::<f64>::new(n, t, k).is_ok_and(|p| p.p_marked_each < tau)
}

/// Mean and population standard deviation.
pub fn mean_std<T: Real>(values: &[T]) -> Option<(T, T)> {
    if values.is_empty() {
        return None;
    }
    let count = T::of_usize(values.len());
    let mean = values.iter().copied().sum::<T>() / count;
    let var = values.iter().map(|v| (*v - mean).powi(2)).sum::<T>() / count;
    Some((mean, var.sqrt()))
}

/// Scores of one evaluated sample. `None` scores mark a failed sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SampleScore<T: Real = f64> {
    pub n: usize,
    pub t: usize,
    pub scores: Option<(T, T)>,
    pub degenerate: bool,
}

/// Aggregate over one `(n, t)` configuration, or over all non-degenerate
/// configurations of one `n` when `t` is `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct MetricReport<T: Real = f64> {
    pub n: usize,
    pub t: Option<usize>,
    pub sa_mean: T,
    pub sa_std: T,
    pub cf_mean: T,
    pub cf_std: T,
    pub count: usize,
    /// Failed samples left out of the means.
    pub excluded: usize,
    pub degenerate: bool,
}

impl<T: Real> MetricReport<T> {
    /// `None` when no sample succeeded.
    pub fn from_scores(
        n: usize,
        t: Option<usize>,
        scores: &[(T, T)],
        excluded: usize,
        degenerate: bool,
    ) -> Option<Self> {
        let sa: Vec<T> = scores.iter().map(|s| s.0).collect();
        let cf: Vec<T> = scores.iter().map(|s| s.1).collect();
        let (sa_mean, sa_std) = mean_std(&sa)?;
        let (cf_mean, cf_std) = mean_std(&cf)?;
        Some(Self {
            n,
            t,
            sa_mean,
            sa_std,
            cf_mean,
            cf_std,
            count: scores.len(),
            excluded,
            degenerate,
        })
    }
}

/// Per-(n, t) rows followed by per-n rows; per-n rows skip degenerate
/// configurations, which keep their own flagged rows.
pub fn aggregate<T: Real>(samples: &[SampleScore<T>]) -> Vec<MetricReport<T>> {
    #[derive(Default)]
    struct Group<T> {
        scores: Vec<(T, T)>,
        excluded: usize,
        degenerate: bool,
    }
    let mut by_config: BTreeMap<(usize, usize), Group<T>> = BTreeMap::new();
    for s in samples {
        let g = by_config.entry((s.n, s.t)).or_insert_with(|| Group {
            scores: Vec::new(),
            excluded: 0,
            degenerate: false,
        });
        g.degenerate |= s.degenerate;
        match s.scores {
            Some(v) => g.scores.push(v),
            None => g.excluded += 1,
        }
    }

    let mut rows = Vec::new();
    let mut by_n: BTreeMap<usize, Group<T>> = BTreeMap::new();
    for (&(n, t), g) in &by_config {
        let row = MetricReport::from_scores(n, Some(t), &g.scores, g.excluded, g.degenerate);
        match row {
            Some(row) => rows.push(row),
            None => rows.push(MetricReport {
                n,
                t: Some(t),
                sa_mean: T::nan(),
                sa_std: T::nan(),
                cf_mean: T::nan(),
                cf_std: T::nan(),
                count: 0,
                excluded: g.excluded,
                degenerate: g.degenerate,
            }),
        }
        if !g.degenerate {
            let acc = by_n.entry(n).or_insert_with(|| Group {
                scores: Vec::new(),
                excluded: 0,
                degenerate: false,
            });
            acc.scores.extend(g.scores.iter().copied());
            acc.excluded += g.excluded;
        }
    }
    rows.extend(
        by_n.into_iter()
            .filter_map(|(n, g)| MetricReport::from_scores(n, None, &g.scores, g.excluded, false)),
    );
    rows
}
