//! Probability mass over computational basis states.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::bits::{BitsError, Bitstring, MAX_QUBITS};
use crate::scalar::Real;

/// Tolerance on the total mass of an untruncated distribution.
pub const NORMALIZATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistributionError {
    #[error("negative probability {value} for state {state}")]
    Negative { state: String, value: f64 },
    #[error("total probability {total} violates the normalization contract")]
    NotNormalized { total: f64 },
    #[error(transparent)]
    Bits(#[from] BitsError),
    #[error("register width {0} is not supported")]
    BadWidth(usize),
}

/// Probabilities keyed by basis index. Absent states carry probability zero.
///
/// `truncated` marks a distribution that lists only part of the support (for
/// example the top 30 states of a rendered result).
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution<T: Real = f64> {
    n: usize,
    probs: BTreeMap<u64, T>,
    truncated: bool,
}

impl<T: Real> Distribution<T> {
    pub fn empty(n: usize, truncated: bool) -> Self {
        Self {
            n,
            probs: BTreeMap::new(),
            truncated,
        }
    }

    /// Full distribution from a dense vector of `2^n` probabilities.
    pub fn from_dense(n: usize, probs: impl IntoIterator<Item = T>) -> Self {
        let probs: BTreeMap<u64, T> = probs
            .into_iter()
            .enumerate()
            .map(|(i, p)| (i as u64, p))
            .collect();
        debug_assert_eq!(probs.len(), 1usize << n);
        Self {
            n,
            probs,
            truncated: false,
        }
    }

    pub fn from_entries(
        n: usize,
        entries: impl IntoIterator<Item = (Bitstring, T)>,
        truncated: bool,
    ) -> Self {
        let probs = entries
            .into_iter()
            .map(|(b, p)| {
                debug_assert_eq!(b.width(), n);
                (b.index(), p)
            })
            .collect();
        Self {
            n,
            probs,
            truncated,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Probability of `state`, zero when it is not listed.
    pub fn prob(&self, state: Bitstring) -> T {
        self.prob_index(state.index())
    }

    pub fn prob_index(&self, index: u64) -> T {
        self.probs.get(&index).copied().unwrap_or_else(T::zero)
    }

    /// Entries in ascending index order.
    pub fn iter(&self) -> impl Iterator<Item = (Bitstring, T)> + '_ {
        self.probs
            .iter()
            .map(move |(&i, &p)| (Bitstring::from_index(self.n, i), p))
    }

    pub fn total(&self) -> T {
        self.probs.values().copied().sum()
    }

    /// Entries ordered by probability descending, ties by ascending index.
    pub fn ranked(&self) -> Vec<(Bitstring, T)> {
        let mut entries: Vec<(Bitstring, T)> = self.iter().collect();
        entries.sort_by(|a, b| rank_order(a, b));
        entries
    }

    /// Total-variation distance `½ Σ |p_i − q_i|` over the union of supports.
    pub fn total_variation(&self, other: &Self) -> T {
        let mut acc = T::zero();
        for (&i, &p) in &self.probs {
            acc = acc + (p - other.prob_index(i)).abs();
        }
        for (&i, &q) in &other.probs {
            if !self.probs.contains_key(&i) {
                acc = acc + q.abs();
            }
        }
        acc * T::of(0.5)
    }

    /// Largest entrywise absolute difference over the union of supports.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        let keys = self.probs.keys().chain(other.probs.keys());
        keys.map(|&i| (self.prob_index(i) - other.prob_index(i)).abs())
            .fold(T::zero(), T::max)
    }

    /// Checks non-negativity and the mass contract.
    pub fn validate(&self) -> Result<(), DistributionError> {
        if self.n == 0 || self.n > MAX_QUBITS {
            return Err(DistributionError::BadWidth(self.n));
        }
        for (b, p) in self.iter() {
            if p < T::zero() || p.is_nan() {
                return Err(DistributionError::Negative {
                    state: b.to_string(),
                    value: p.to_f64_lossy(),
                });
            }
        }
        let total = self.total().to_f64_lossy();
        let ok = if self.truncated {
            total <= 1.0 + NORMALIZATION_TOL
        } else {
            (total - 1.0).abs() <= NORMALIZATION_TOL
        };
        if ok {
            Ok(())
        } else {
            Err(DistributionError::NotNormalized { total })
        }
    }

    pub fn map_scalar<U: Real>(&self) -> Distribution<U> {
        Distribution {
            n: self.n,
            probs: self
                .probs
                .iter()
                .map(|(&i, &p)| (i, U::of(p.to_f64_lossy())))
                .collect(),
            truncated: self.truncated,
        }
    }
}

/// Ordering used by ranked results and search accuracy.
pub fn rank_order<T: Real>(a: &(Bitstring, T), b: &(Bitstring, T)) -> Ordering {
    b.1.partial_cmp(&a.1)
        .unwrap_or(Ordering::Equal)
        .then_with(|| a.0.index().cmp(&b.0.index()))
}

#[derive(Serialize, Deserialize)]
struct DistributionJson<T> {
    n: usize,
    probs: BTreeMap<String, T>,
    truncated: bool,
}

impl<T: Real> Serialize for Distribution<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        DistributionJson {
            n: self.n,
            probs: self.iter().map(|(b, p)| (b.to_string(), p)).collect(),
            truncated: self.truncated,
        }
        .serialize(serializer)
    }
}

impl<'de, T: Real> Deserialize<'de> for Distribution<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = DistributionJson::<T>::deserialize(deserializer)?;
        if raw.n == 0 || raw.n > MAX_QUBITS {
            return Err(D::Error::custom(DistributionError::BadWidth(raw.n)));
        }
        let mut probs = BTreeMap::new();
        for (key, p) in raw.probs {
            let b = Bitstring::parse_with_width(&key, raw.n).map_err(D::Error::custom)?;
            probs.insert(b.index(), p);
        }
        Ok(Distribution {
            n: raw.n,
            probs,
            truncated: raw.truncated,
        })
    }
}
