//! Binary classifiers over a finite domain `X` and their combinatorics.
//!
//! Instances of `Z = X × {0, 1}` are indexed as `z = 2·x + y`.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::risk::LossTable;

/// Largest domain for exhaustive VC computations.
pub const VC_MAX_DOMAIN: usize = 16;

/// Truth table `w(x) ∈ {0, 1}` of every classifier, one row per hypothesis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypothesisClassTable {
    truth: Vec<Vec<u8>>,
}

impl HypothesisClassTable {
    pub fn new(truth: Vec<Vec<u8>>) -> Result<Self> {
        let width = truth.first().map_or(0, Vec::len);
        if truth.is_empty() || width == 0 {
            return Err(Error::argument("hypothesis class needs at least one classifier and one point"));
        }
        let mut seen = HashSet::new();
        for (w, row) in truth.iter().enumerate() {
            if row.len() != width {
                return Err(Error::dimension(format!("classifier {w} labels {} points, expected {width}", row.len())));
            }
            if row.iter().any(|&v| v > 1) {
                return Err(Error::Domain(format!("classifier {w} has a non-binary label")));
            }
            if !seen.insert(row.clone()) {
                return Err(Error::argument(format!("classifier {w} duplicates an earlier row")));
            }
        }
        Ok(Self { truth })
    }

    /// `w_t(x) = 1{x ≥ t}` for `t = 1, ..., m+1` on `X = {1, ..., m}`.
    pub fn thresholds(m: usize) -> Self {
        let truth = (1..=m + 1)
            .map(|t| (1..=m).map(|x| u8::from(x >= t)).collect())
            .collect();
        Self::new(truth).expect("thresholds are distinct")
    }

    /// `1{a ≤ x ≤ b}` for all `1 ≤ a ≤ b ≤ m`, plus the empty interval.
    pub fn intervals(m: usize) -> Self {
        let mut truth = vec![vec![0; m]];
        for a in 1..=m {
            for b in a..=m {
                truth.push((1..=m).map(|x| u8::from(a <= x && x <= b)).collect());
            }
        }
        Self::new(truth).expect("intervals are distinct")
    }

    /// All `2^m` labelings of `m` points.
    pub fn full(m: usize) -> Self {
        let truth = (0..1u32 << m)
            .map(|mask| (0..m).map(|x| ((mask >> x) & 1) as u8).collect())
            .collect();
        Self::new(truth).expect("labelings are distinct")
    }

    pub fn num_hypotheses(&self) -> usize {
        self.truth.len()
    }

    pub fn domain_size(&self) -> usize {
        self.truth[0].len()
    }

    pub fn label(&self, w: usize, x: usize) -> u8 {
        self.truth[w][x]
    }

    pub fn truth(&self) -> &[Vec<u8>] {
        &self.truth
    }

    /// 0/1 loss `ℓ(w, (x, y)) = 1{w(x) ≠ y}` over `Z = X × {0, 1}`.
    pub fn zero_one_loss(&self) -> LossTable {
        let numerators = self
            .truth
            .iter()
            .map(|row| {
                (0..2 * row.len())
                    .map(|z| i64::from(row[z / 2] != (z % 2) as u8))
                    .collect()
            })
            .collect();
        LossTable::unit(numerators, 1).expect("0/1 loss is valid")
    }

    /// Labeling of the points `xs` by classifier `w`, packed into bits.
    fn pattern(&self, w: usize, xs: &[usize]) -> u64 {
        xs.iter()
            .enumerate()
            .fold(0u64, |acc, (i, &x)| acc | (u64::from(self.truth[w][x]) << i))
    }

    /// Number of distinct labelings the class induces on `xs` (repeats allowed).
    pub fn pattern_count(&self, xs: &[usize]) -> usize {
        let mut distinct: Vec<usize> = xs.to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        (0..self.num_hypotheses())
            .map(|w| self.pattern(w, &distinct))
            .collect::<HashSet<_>>()
            .len()
    }

    fn shatters(&self, xs: &[usize]) -> bool {
        self.pattern_count(xs) == 1usize << xs.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VcStats {
    pub vc_dim: usize,
    /// Largest number of labelings on any `n` points.
    pub shatter_n: usize,
}

impl VcStats {
    /// `(n+1)^V`, the polynomial form of Sauer's lemma.
    pub fn sauer_bound(&self, n: usize) -> f64 {
        ((n + 1) as f64).powi(self.vc_dim as i32)
    }
}

fn subsets_of_size(m: usize, size: usize) -> impl Iterator<Item = Vec<usize>> {
    (0u32..1 << m)
        .filter(move |mask| mask.count_ones() as usize == size)
        .map(move |mask| (0..m).filter(|x| (mask >> x) & 1 == 1).collect())
}

/// VC dimension by exhaustive shattering, and the `n`-th shatter coefficient.
pub fn vc_stats(class: &HypothesisClassTable, n: usize) -> Result<VcStats> {
    let m = class.domain_size();
    if m > VC_MAX_DOMAIN {
        return Err(Error::Capacity {
            what: "domain points for exact VC computation".into(),
            required: m as u128,
            limit: VC_MAX_DOMAIN as u128,
        });
    }
    // Shattering is inherited by subsets, so the first size with no shattered set ends the search.
    let mut vc_dim = 0;
    for size in 1..=m {
        if subsets_of_size(m, size).any(|xs| class.shatters(&xs)) {
            vc_dim = size;
        } else {
            break;
        }
    }
    // Repeated points add no labelings, and more points never lose any.
    let shatter_n = subsets_of_size(m, n.min(m))
        .map(|xs| class.pattern_count(&xs))
        .max()
        .unwrap_or(1);
    Ok(VcStats { vc_dim, shatter_n })
}
