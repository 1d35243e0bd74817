//! Adaptive composition: stage `j` sees the dataset and all earlier outputs.
//!
//! Stage `j` has one row per `dataset_code + |Z|^n · prior_code`, where
//! `prior_code` is the mixed-radix code of `(w_1, ..., w_{j-1})` with `w_1`
//! least significant. The joint output `(w_1, ..., w_k)` uses the same
//! convention.

use serde::{Deserialize, Serialize};

use super::kernel::{InputArity, StochasticKernel};
use crate::error::{Error, Result};
use crate::info::{conditional_mi, io_joint, mutual_information, JointPMF};
use crate::spaces::{check_enumerable, DatasetSpace, FiniteDistribution};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub outputs: usize,
    pub kernel: StochasticKernel,
}

impl Stage {
    /// Stage with explicit rows over `(dataset, prior outputs)`.
    pub fn new(kernel: StochasticKernel) -> Self {
        Self { outputs: kernel.outputs(), kernel }
    }

    /// Stage that ignores earlier outputs.
    pub fn from_dataset_kernel(kernel: &StochasticKernel, z_size: usize, n: usize, prior_outputs: usize) -> Result<Self> {
        let datasets = DatasetSpace::new(z_size, n)?.len();
        kernel.check_inputs(datasets, "datasets")?;
        let mut rows = Vec::with_capacity(datasets * prior_outputs);
        for _ in 0..prior_outputs {
            rows.extend(kernel.rows().map(<[f64]>::to_vec));
        }
        let arity = InputArity::DatasetsWithPrior { z_size, n, prior_outputs };
        Ok(Self::new(StochasticKernel::new(rows, arity)?))
    }

    /// Stage that ignores the dataset and post-processes earlier outputs.
    pub fn from_prior_kernel(kernel: &StochasticKernel, z_size: usize, n: usize) -> Result<Self> {
        let datasets = DatasetSpace::new(z_size, n)?.len();
        let mut rows = Vec::with_capacity(datasets * kernel.inputs());
        for prior in 0..kernel.inputs() {
            rows.extend(std::iter::repeat_n(kernel.row(prior).to_vec(), datasets));
        }
        let arity = InputArity::DatasetsWithPrior { z_size, n, prior_outputs: kernel.inputs() };
        Ok(Self::new(StochasticKernel::new(rows, arity)?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositionPlan {
    pub z_size: usize,
    pub n: usize,
    pub stages: Vec<Stage>,
}

impl CompositionPlan {
    pub fn new(z_size: usize, n: usize, stages: Vec<Stage>) -> Result<Self> {
        let plan = Self { z_size, n, stages };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if self.stages.is_empty() {
            return Err(Error::argument("composition needs at least one stage"));
        }
        let datasets = DatasetSpace::new(self.z_size, self.n)?.len();
        let mut prior = 1usize;
        for (j, stage) in self.stages.iter().enumerate() {
            if stage.outputs != stage.kernel.outputs() {
                return Err(Error::dimension(format!(
                    "stage {} declares {} outputs but its kernel has {}",
                    j + 1,
                    stage.outputs,
                    stage.kernel.outputs()
                )));
            }
            stage.kernel.check_inputs(datasets * prior, &format!("stage {} (datasets x prior outputs)", j + 1))?;
            check_enumerable("composite outputs", datasets as u128 * prior as u128 * stage.outputs as u128)?;
            prior *= stage.outputs;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Composition {
    /// `P(W^k | S)` over joint output codes.
    pub joint: StochasticKernel,
    /// `I(S; W_j | W^{j-1})` for `j = 1..k`.
    pub conditional_mi: Vec<f64>,
    /// `I(S; W^k)`
    pub total_mi: f64,
    /// `I(S; W_k)`
    pub final_mi: f64,
}

pub fn compose_adaptive(plan: &CompositionPlan, mu: &FiniteDistribution) -> Result<Composition> {
    plan.validate()?;
    if mu.len() != plan.z_size {
        return Err(Error::dimension(format!("distribution over {} instances, plan has {}", mu.len(), plan.z_size)));
    }
    let space = DatasetSpace::new(plan.z_size, plan.n)?;
    let d = space.len();
    let ps = space.probabilities(mu)?;

    // joint[s * prior + code] = P(W^{j-1} = code | S = s)
    let mut joint = vec![1.0; d];
    let mut prior = 1usize;
    let mut conditional = Vec::with_capacity(plan.stages.len());
    for stage in &plan.stages {
        let k = stage.outputs;
        // Axes (S, W_j, W^{j-1}).
        let mut table = vec![0.0; d * k * prior];
        let mut next = vec![0.0; d * prior * k];
        for s in 0..d {
            for code in 0..prior {
                let p_prior = joint[s * prior + code];
                if p_prior == 0.0 {
                    continue;
                }
                let row = stage.kernel.row(s + d * code);
                for (w, &pw) in row.iter().enumerate() {
                    table[(s * k + w) * prior + code] = ps[s] * p_prior * pw;
                    next[s * prior * k + code + prior * w] = p_prior * pw;
                }
            }
        }
        let three = JointPMF::new(vec![d, k, prior], table, vec!["S".into(), "W_j".into(), "W^{j-1}".into()])?;
        conditional.push(conditional_mi(&three, 2)?);
        joint = next;
        prior *= k;
    }

    let arity = InputArity::Datasets { z_size: plan.z_size, n: plan.n };
    let joint = StochasticKernel::from_flat(d, prior, joint, arity)?;
    let total_mi = mutual_information(&io_joint(mu, plan.n, &joint)?)?;

    let last = plan.stages.last().expect("validated").outputs;
    let stride = prior / last;
    let mut final_rows = vec![0.0; d * last];
    for s in 0..d {
        for (code, &p) in joint.row(s).iter().enumerate() {
            final_rows[s * last + code / stride] += p;
        }
    }
    let final_kernel = StochasticKernel::from_flat(d, last, final_rows, arity)?;
    let final_mi = mutual_information(&io_joint(mu, plan.n, &final_kernel)?)?;
    Ok(Composition { joint, conditional_mi: conditional, total_mi, final_mi })
}
