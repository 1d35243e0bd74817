//! Two-stage binary classifier: build an empirical cover of the class on the
//! first split `S_1`, then run ERM over the cover on the second split `S_2`.
//!
//! A dataset of `n1 + n2` instances is one code whose first `n1` digits are
//! `S_1`, so `code = s1 + |Z|^{n1}·s2`.

use serde::{Deserialize, Serialize};

use super::classes::HypothesisClassTable;
use super::erm::{argmin_row, TieRule};
use super::kernel::{InputArity, StochasticKernel};
use crate::error::Result;
use crate::info::{entropy, io_mutual_information};
use crate::risk::{empirical_risk, population_risks, LossTable};
use crate::spaces::{check_enumerable, DatasetSpace, FiniteDistribution};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoStage {
    pub n1: usize,
    pub n2: usize,
    /// Kernel on the full dataset `(S_1, S_2)`.
    pub kernel: StochasticKernel,
    /// `P_{W|S_2, S_1 = s1}` for every `s1`, indexed by `s1`.
    pub prefix_kernels: Vec<StochasticKernel>,
    /// Cover `W_1(s1)`: the lowest-index hypothesis of each distinct pattern.
    pub covers: Vec<Vec<usize>>,
    pub loss: LossTable,
}

/// Exact per-prefix information quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrefixStats {
    pub s1: u64,
    pub pattern_count: usize,
    /// `H(W | S_1 = s1)`
    pub conditional_entropy: f64,
    /// `I(S_2; W | S_1 = s1)`
    pub conditional_mi: f64,
}

/// Empirical cover of `class` on the points of `s1`.
pub fn empirical_cover(class: &HypothesisClassTable, xs: &[usize]) -> Vec<usize> {
    let mut seen = std::collections::HashSet::new();
    (0..class.num_hypotheses())
        .filter(|&w| seen.insert(xs.iter().map(|&x| class.label(w, x)).collect::<Vec<u8>>()))
        .collect()
}

pub fn two_stage_kernel(class: &HypothesisClassTable, n1: usize, n2: usize, tie: TieRule) -> Result<TwoStage> {
    let loss = class.zero_one_loss();
    let z = loss.z_size();
    let k = class.num_hypotheses();
    let first = DatasetSpace::new(z, n1)?;
    let second = DatasetSpace::new(z, n2)?;
    let full = DatasetSpace::new(z, n1 + n2)?;
    check_enumerable("two-stage kernel cells", full.len() as u128 * k as u128)?;

    let mut covers = Vec::with_capacity(first.len());
    let mut prefix_kernels = Vec::with_capacity(first.len());
    for s1 in first.iter() {
        let xs: Vec<usize> = s1.digits().map(|zi| zi / 2).collect();
        let cover = empirical_cover(class, &xs);
        let mut data = Vec::with_capacity(second.len() * k);
        for s2 in second.iter() {
            let risks: Vec<i64> = cover.iter().map(|&w| loss.risk_numerator(w, &s2)).collect();
            data.extend(argmin_row(&risks, &cover, k, tie));
        }
        prefix_kernels.push(StochasticKernel::from_flat(
            second.len(),
            k,
            data,
            InputArity::Datasets { z_size: z, n: n2 },
        )?);
        covers.push(cover);
    }

    let mut data = vec![0.0; full.len() * k];
    for (s1, prefix) in prefix_kernels.iter().enumerate() {
        for s2 in 0..second.len() {
            let code = s1 + first.len() * s2;
            data[code * k..(code + 1) * k].copy_from_slice(prefix.row(s2));
        }
    }
    let kernel = StochasticKernel::from_flat(full.len(), k, data, InputArity::Datasets { z_size: z, n: n1 + n2 })?;
    Ok(TwoStage { n1, n2, kernel, prefix_kernels, covers, loss })
}

impl TwoStage {
    pub fn pattern_count(&self, s1: usize) -> usize {
        self.covers[s1].len()
    }

    /// `H(W|S_1=s1)` and `I(S_2;W|S_1=s1)` for every prefix, with `S_2 ~ μ^⊗n2`.
    pub fn prefix_stats(&self, mu: &FiniteDistribution) -> Result<Vec<PrefixStats>> {
        self.loss.check_mu(mu)?;
        let probs = DatasetSpace::new(mu.len(), self.n2)?.probabilities(mu)?;
        self.prefix_kernels
            .iter()
            .enumerate()
            .map(|(s1, kernel)| {
                let marginal = FiniteDistribution::from_weights(&kernel.output_marginal(&probs))?;
                Ok(PrefixStats {
                    s1: s1 as u64,
                    pattern_count: self.pattern_count(s1),
                    conditional_entropy: entropy(&marginal),
                    conditional_mi: io_mutual_information(mu, self.n2, kernel)?,
                })
            })
            .collect()
    }

    /// Exact `E[L_μ(W) − L_{S_2}(W)]` over `S ~ μ^⊗(n1+n2)`.
    pub fn second_split_gen(&self, mu: &FiniteDistribution) -> Result<f64> {
        self.loss.check_mu(mu)?;
        let pop = population_risks(&self.loss, mu);
        let first = DatasetSpace::new(mu.len(), self.n1)?;
        let second = DatasetSpace::new(mu.len(), self.n2)?;
        let p1 = first.probabilities(mu)?;
        let p2 = second.probabilities(mu)?;
        let mut total = 0.0;
        for (s1, kernel) in self.prefix_kernels.iter().enumerate() {
            if p1[s1] == 0.0 {
                continue;
            }
            let mut inner = 0.0;
            for s2 in second.iter() {
                let ps = p2[s2.code as usize];
                if ps == 0.0 {
                    continue;
                }
                let row = kernel.row(s2.code as usize);
                let gap: f64 = row
                    .iter()
                    .enumerate()
                    .filter(|(_, &p)| p > 0.0)
                    .map(|(w, &p)| p * (pop[w] - empirical_risk(&self.loss, w, &s2)))
                    .sum();
                inner += ps * gap;
            }
            total += p1[s1] * inner;
        }
        Ok(total)
    }
}
