//! Seeded random problems and their exact certification against the
//! mutual-information bounds.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algorithms::{erm_kernel, gibbs_kernel, noisy_erm_kernel, InputArity, NoisyErmMode, StochasticKernel, TieRule};
use crate::bounds::{abs_gen_bounds, mi_gen_bound, CHECK_TOL};
use crate::error::Result;
use crate::info::{io_mutual_information, lambda_mutual_information};
use crate::risk::{exact_risk_summary, LossTable, RiskSummary};
use crate::spaces::{DatasetSpace, FiniteDistribution};

/// Loss grid denominator of generated problems.
pub const SWEEP_DENOMINATOR: u64 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    Erm,
    Gibbs,
    NoisyErm,
    Arbitrary,
    Independent,
}

const KINDS: [KernelKind; 5] =
    [KernelKind::Erm, KernelKind::Gibbs, KernelKind::NoisyErm, KernelKind::Arbitrary, KernelKind::Independent];

#[derive(Debug, Clone, PartialEq)]
pub struct RandomProblem {
    pub index: u64,
    pub kind: KernelKind,
    pub mu: FiniteDistribution,
    pub n: usize,
    pub loss: LossTable,
    pub kernel: StochasticKernel,
}

/// Size limits of generated problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepShape {
    pub max_z: usize,
    pub max_n: usize,
    pub max_w: usize,
}

impl Default for SweepShape {
    fn default() -> Self {
        Self { max_z: 3, max_n: 4, max_w: 5 }
    }
}

fn random_simplex(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

/// Problem `index` of the sweep seeded by `seed`; each index has its own stream.
pub fn random_problem(seed: u64, index: u64, shape: SweepShape) -> Result<RandomProblem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let z = rng.gen_range(2..=shape.max_z.max(2));
    let n = rng.gen_range(1..=shape.max_n.max(1));
    let k = rng.gen_range(2..=shape.max_w.max(2));
    let mu = FiniteDistribution::from_probs(random_simplex(&mut rng, z))?;
    let numerators = (0..k)
        .map(|_| (0..z).map(|_| rng.gen_range(0..=SWEEP_DENOMINATOR as i64)).collect())
        .collect();
    let loss = LossTable::unit(numerators, SWEEP_DENOMINATOR)?;
    let kind = KINDS[(index % KINDS.len() as u64) as usize];
    let datasets = DatasetSpace::new(z, n)?.len();
    let kernel = match kind {
        KernelKind::Erm => {
            let tie = if rng.gen_bool(0.5) { TieRule::LowestIndex } else { TieRule::UniformOverArgmin };
            erm_kernel(&loss, n, tie)?
        }
        KernelKind::Gibbs => {
            let beta = rng.gen_range(0.1..20.0);
            let q = FiniteDistribution::from_probs(random_simplex(&mut rng, k))?;
            gibbs_kernel(&loss, n, beta, &q)?
        }
        KernelKind::NoisyErm => {
            let b: Vec<f64> = (0..k).map(|_| rng.gen_range(0.02..1.0)).collect();
            noisy_erm_kernel(&loss, n, &b, NoisyErmMode::Exact)?
        }
        KernelKind::Arbitrary => {
            let rows = (0..datasets).map(|_| random_simplex(&mut rng, k)).collect();
            StochasticKernel::new(rows, InputArity::Datasets { z_size: z, n })?
        }
        KernelKind::Independent => {
            let row = random_simplex(&mut rng, k);
            StochasticKernel::new(vec![row; datasets], InputArity::Datasets { z_size: z, n })?
        }
    };
    Ok(RandomProblem { index, kind, mu, n, loss, kernel })
}

/// Exact quantities and bound checks for one problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub index: u64,
    pub kind: KernelKind,
    pub z_size: usize,
    pub n: usize,
    pub hypotheses: usize,
    pub sigma: f64,
    pub io_mi: f64,
    pub lambda_mi: f64,
    pub summary: RiskSummary,
    pub io_bound: f64,
    pub lambda_bound: f64,
    pub abs_bound: f64,
    pub russo_zou: f64,
    /// `|gen| ≤ sqrt(2σ² I(S;W)/n)`
    pub io_ok: bool,
    /// `I(Λ;W) ≤ I(S;W)` and `|gen| ≤ sqrt(2σ² I(Λ;W)/n)`
    pub lambda_ok: bool,
    /// `E|L_μ(W) − L_S(W)| ≤ sqrt((2σ²/n)(I(Λ;W) + log 2))`
    pub abs_ok: bool,
}

impl SweepRecord {
    pub fn all_ok(&self) -> bool {
        self.io_ok && self.lambda_ok && self.abs_ok
    }
}

pub fn certify(problem: &RandomProblem) -> Result<SweepRecord> {
    let RandomProblem { mu, n, loss, kernel, .. } = problem;
    let sigma = loss.hoeffding_sigma();
    let io_mi = io_mutual_information(mu, *n, kernel)?;
    let lambda_mi = lambda_mutual_information(mu, *n, kernel, loss)?;
    let summary = exact_risk_summary(mu, *n, kernel, loss)?;
    let io_bound = mi_gen_bound(sigma, *n, io_mi);
    let lambda_bound = mi_gen_bound(sigma, *n, lambda_mi);
    let abs = abs_gen_bounds(sigma, *n, lambda_mi);
    let gen = summary.gen_error.abs();
    Ok(SweepRecord {
        index: problem.index,
        kind: problem.kind,
        z_size: mu.len(),
        n: *n,
        hypotheses: loss.num_hypotheses(),
        sigma,
        io_mi,
        lambda_mi,
        io_bound,
        lambda_bound,
        abs_bound: abs.thm4,
        russo_zou: abs.russo_zou,
        io_ok: gen <= io_bound + CHECK_TOL,
        lambda_ok: lambda_mi <= io_mi + 1e-10 && gen <= lambda_bound + CHECK_TOL,
        abs_ok: summary.abs_gen_error <= abs.thm4 + CHECK_TOL,
        summary,
    })
}

/// Generates and certifies problems `0..count` in parallel, in index order.
pub fn run_sweep(seed: u64, count: u64, shape: SweepShape) -> Result<Vec<SweepRecord>> {
    (0..count)
        .into_par_iter()
        .map(|i| certify(&random_problem(seed, i, shape)?))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn problems_respect_shape_and_are_reproducible() {
        let shape = SweepShape::default();
        for i in 0..50 {
            let a = random_problem(17, i, shape).unwrap();
            let b = random_problem(17, i, shape).unwrap();
            assert_eq!(a, b);
            assert!((2..=3).contains(&a.mu.len()));
            assert!((1..=4).contains(&a.n));
            assert!((2..=5).contains(&a.loss.num_hypotheses()));
            assert_eq!(a.loss.bounds(), (0.0, 1.0));
        }
    }

    #[test]
    fn small_sweep_certifies() {
        let records = run_sweep(1, 40, SweepShape::default()).unwrap();
        assert_eq!(records.len(), 40);
        assert!(records.iter().all(SweepRecord::all_ok));
        let independent: Vec<_> = records.iter().filter(|r| r.kind == KernelKind::Independent).collect();
        assert!(independent.iter().all(|r| r.io_mi < 1e-12 && r.summary.gen_error.abs() < 1e-12));
    }
}
