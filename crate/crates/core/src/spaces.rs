//! Finite probability spaces and enumeration of datasets `S ∈ Z^n`.
//!
//! A dataset is stored as a single mixed-radix code: digit `i` (base `|Z|`)
//! is the instance index of `Z_{i+1}`, with `Z_1` the least-significant digit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest cell count accepted for exact enumeration.
pub const ENUMERATION_LIMIT: u64 = 1 << 31;

/// Tolerance on the total mass of a [`FiniteDistribution`].
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// A probability vector over a labeled finite space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteDistribution {
    labels: Vec<String>,
    probs: Vec<f64>,
}

impl FiniteDistribution {
    pub fn new(labels: Vec<String>, probs: Vec<f64>) -> Result<Self> {
        if labels.len() != probs.len() {
            return Err(Error::Distribution(format!(
                "{} labels for {} probabilities",
                labels.len(),
                probs.len()
            )));
        }
        if probs.is_empty() {
            return Err(Error::Distribution("empty support".into()));
        }
        for (label, &p) in labels.iter().zip(&probs) {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::Distribution(format!("p({label}) = {p}")));
            }
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::Distribution(format!("probabilities sum to {total}")));
        }
        let mut seen = std::collections::HashSet::with_capacity(labels.len());
        for label in &labels {
            if !seen.insert(label.as_str()) {
                return Err(Error::Distribution(format!("duplicate label {label:?}")));
            }
        }
        Ok(Self { labels, probs })
    }

    /// Distribution with labels `"0", "1", ...`.
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        let labels = (0..probs.len()).map(|i| i.to_string()).collect();
        Self::new(labels, probs)
    }

    /// Normalizes nonnegative weights into a distribution.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() || weights.iter().any(|w| *w < 0.0) {
            return Err(Error::Distribution(format!("cannot normalize weights {weights:?}")));
        }
        Self::from_probs(weights.iter().map(|w| w / total).collect())
    }

    pub fn uniform(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Distribution("empty support".into()));
        }
        Self::from_probs(vec![1.0 / k as f64; k])
    }

    pub fn point_mass(k: usize, at: usize) -> Result<Self> {
        if at >= k {
            return Err(Error::Domain(format!("point mass at {at} outside 0..{k}")));
        }
        let mut probs = vec![0.0; k];
        probs[at] = 1.0;
        Self::from_probs(probs)
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn prob(&self, i: usize) -> f64 {
        self.probs[i]
    }

    /// Expectation of `values` under this distribution.
    pub fn expect(&self, values: &[f64]) -> f64 {
        self.probs.iter().zip(values).map(|(p, v)| p * v).sum()
    }
}

/// Number of datasets `|Z|^n`, or a capacity error on 64-bit overflow.
pub fn dataset_count(z_size: usize, n: usize) -> Result<u64> {
    let mut count: u64 = 1;
    for _ in 0..n {
        count = count.checked_mul(z_size as u64).ok_or_else(|| Error::Capacity {
            what: format!("{z_size}^{n} datasets"),
            required: (z_size as u128).saturating_pow(n as u32),
            limit: u64::MAX as u128,
        })?;
    }
    Ok(count)
}

/// Refuses exact enumeration of more than [`ENUMERATION_LIMIT`] cells.
pub fn check_enumerable(what: &str, cells: u128) -> Result<()> {
    if cells > ENUMERATION_LIMIT as u128 {
        return Err(Error::Capacity {
            what: what.to_string(),
            required: cells,
            limit: ENUMERATION_LIMIT as u128,
        });
    }
    Ok(())
}

/// A dataset `S = (Z_1, ..., Z_n)` encoded as a base-`|Z|` integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DatasetIndex {
    pub code: u64,
    pub n: usize,
    pub z_size: usize,
}

impl DatasetIndex {
    pub fn new(code: u64, n: usize, z_size: usize) -> Result<Self> {
        let count = dataset_count(z_size, n)?;
        if code >= count {
            return Err(Error::Domain(format!("dataset code {code} >= {z_size}^{n}")));
        }
        Ok(Self { code, n, z_size })
    }

    /// Instance index of `Z_{i+1}`.
    pub fn digit(&self, i: usize) -> usize {
        debug_assert!(i < self.n);
        let mut code = self.code;
        for _ in 0..i {
            code /= self.z_size as u64;
        }
        (code % self.z_size as u64) as usize
    }

    pub fn digits(&self) -> impl Iterator<Item = usize> + '_ {
        let base = self.z_size as u64;
        let mut code = self.code;
        (0..self.n).map(move |_| {
            let d = (code % base) as usize;
            code /= base;
            d
        })
    }

    pub fn decode(&self) -> Vec<usize> {
        self.digits().collect()
    }
}

pub fn encode_dataset(tuple: &[usize], z_size: usize) -> Result<DatasetIndex> {
    if tuple.is_empty() {
        return Err(Error::Domain("empty dataset tuple".into()));
    }
    if let Some(&bad) = tuple.iter().find(|&&z| z >= z_size) {
        return Err(Error::Domain(format!("instance index {bad} outside 0..{z_size}")));
    }
    dataset_count(z_size, tuple.len())?;
    let code = tuple
        .iter()
        .rev()
        .fold(0u64, |acc, &z| acc * z_size as u64 + z as u64);
    Ok(DatasetIndex { code, n: tuple.len(), z_size })
}

pub fn decode_dataset(index: &DatasetIndex) -> Vec<usize> {
    index.decode()
}

/// `μ^⊗n(s) = ∏_i μ(Z_i)`.
pub fn product_probability(mu: &FiniteDistribution, s: &DatasetIndex) -> f64 {
    s.digits().map(|z| mu.prob(z)).product()
}

/// All datasets of size `n` over an alphabet of size `z_size`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DatasetSpace {
    pub z_size: usize,
    pub n: usize,
    count: u64,
}

impl DatasetSpace {
    /// Fails if the space exceeds the enumeration guard.
    pub fn new(z_size: usize, n: usize) -> Result<Self> {
        if z_size == 0 || n == 0 {
            return Err(Error::argument("dataset space needs |Z| >= 1 and n >= 1"));
        }
        let count = dataset_count(z_size, n)?;
        check_enumerable(&format!("{z_size}^{n} datasets"), count as u128)?;
        Ok(Self { z_size, n, count })
    }

    pub fn len(&self) -> usize {
        self.count as usize
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = DatasetIndex> + '_ {
        (0..self.count).map(move |code| DatasetIndex { code, n: self.n, z_size: self.z_size })
    }

    pub fn index(&self, code: u64) -> DatasetIndex {
        DatasetIndex { code, n: self.n, z_size: self.z_size }
    }

    /// `μ^⊗n(s)` for every dataset, indexed by code.
    pub fn probabilities(&self, mu: &FiniteDistribution) -> Result<Vec<f64>> {
        if mu.len() != self.z_size {
            return Err(Error::dimension(format!(
                "distribution over {} points for |Z| = {}",
                mu.len(),
                self.z_size
            )));
        }
        // Built digit by digit: appending Z_{k+1} as the new most-significant digit.
        let mut probs = vec![1.0];
        for _ in 0..self.n {
            let mut next = Vec::with_capacity(probs.len() * self.z_size);
            for &pz in mu.probs() {
                next.extend(probs.iter().map(|p| p * pz));
            }
            probs = next;
        }
        Ok(probs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encode_examples() {
        assert_eq!(encode_dataset(&[0, 0, 0], 2).unwrap().code, 0);
        assert_eq!(encode_dataset(&[1, 0], 2).unwrap().code, 1);
        assert_eq!(encode_dataset(&[2, 1, 0], 3).unwrap().code, 5);
    }

    #[test]
    fn round_trip_exhaustive() {
        for z_size in 1..=5 {
            for n in 1..=8 {
                let space = DatasetSpace::new(z_size, n).unwrap();
                let mut seen = 0u64;
                for s in space.iter() {
                    let tuple = s.decode();
                    assert_eq!(tuple.len(), n);
                    assert_eq!(encode_dataset(&tuple, z_size).unwrap(), s);
                    for (i, &d) in tuple.iter().enumerate() {
                        assert_eq!(s.digit(i), d);
                    }
                    seen += 1;
                }
                assert_eq!(seen, (z_size as u64).pow(n as u32));
            }
        }
    }

    #[test]
    fn encode_errors() {
        assert!(matches!(encode_dataset(&[2], 2), Err(Error::Domain(_))));
        assert!(matches!(encode_dataset(&[], 2), Err(Error::Domain(_))));
        assert!(matches!(encode_dataset(&[0; 65], 2), Err(Error::Capacity { .. })));
        assert!(matches!(DatasetSpace::new(2, 32), Err(Error::Capacity { .. })));
        assert!(DatasetSpace::new(2, 31).is_ok());
    }

    #[test]
    fn product_probability_examples() {
        let uniform = FiniteDistribution::uniform(2).unwrap();
        let space = DatasetSpace::new(2, 3).unwrap();
        for s in space.iter() {
            assert_eq!(product_probability(&uniform, &s), 0.125);
        }

        let point = FiniteDistribution::point_mass(2, 0).unwrap();
        for s in space.iter() {
            let expected = if s.code == 0 { 1.0 } else { 0.0 };
            assert_eq!(product_probability(&point, &s), expected);
        }

        let mu = FiniteDistribution::from_probs(vec![0.3, 0.7]).unwrap();
        let s = encode_dataset(&[0, 1], 2).unwrap();
        assert!((product_probability(&mu, &s) - 0.21).abs() < 1e-15);
        let space = DatasetSpace::new(2, 2).unwrap();
        let total: f64 = space.iter().map(|s| product_probability(&mu, &s)).sum();
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn bulk_probabilities_match_pointwise() {
        let mu = FiniteDistribution::from_probs(vec![0.2, 0.5, 0.3]).unwrap();
        let space = DatasetSpace::new(3, 4).unwrap();
        let bulk = space.probabilities(&mu).unwrap();
        assert_eq!(bulk.len(), 81);
        for s in space.iter() {
            assert!((bulk[s.code as usize] - product_probability(&mu, &s)).abs() < 1e-16);
        }
        assert!((bulk.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn distribution_validation() {
        assert!(FiniteDistribution::from_probs(vec![0.5, 0.6]).is_err());
        assert!(FiniteDistribution::from_probs(vec![1.5, -0.5]).is_err());
        assert!(FiniteDistribution::new(vec!["a".into(), "a".into()], vec![0.5, 0.5]).is_err());
        assert!(FiniteDistribution::new(vec!["a".into()], vec![0.5, 0.5]).is_err());
        let d = FiniteDistribution::from_weights(&[1.0, 3.0]).unwrap();
        assert_eq!(d.probs(), &[0.25, 0.75]);
    }
}
