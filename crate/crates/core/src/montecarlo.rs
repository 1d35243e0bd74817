//! Seeded sampling of `(S, W)` pairs and Monte Carlo estimators.
//!
//! Trials are cut into blocks of [`BLOCK_TRIALS`]. Block `b` draws from
//! `ChaCha8Rng::seed_from_u64(seed)` on stream `b`, and block results are
//! merged in block order, so output does not depend on the worker count.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algorithms::StochasticKernel;
use crate::error::{Error, Result};
use crate::info::{lambda_joint, mutual_information};
use crate::risk::{empirical_risk, population_risks, LossTable};
use crate::spaces::{DatasetIndex, DatasetSpace, FiniteDistribution};

pub const BLOCK_TRIALS: u64 = 4096;

/// Fewest trials accepted by [`estimate_gen`].
pub const MIN_GEN_TRIALS: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateWithCI {
    pub mean: f64,
    /// Sample standard deviation over `√trials`.
    pub std_error: f64,
    pub trials: u64,
    pub ci95: (f64, f64),
}

/// Running mean and centered second moment, merged pairwise.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let w = other.count as f64 / count as f64;
        Moments {
            count,
            mean: self.mean + delta * w,
            m2: self.m2 + other.m2 + delta * delta * self.count as f64 * w,
        }
    }

    fn estimate(&self) -> EstimateWithCI {
        let std_error = if self.count > 1 {
            (self.m2 / (self.count - 1) as f64).sqrt() / (self.count as f64).sqrt()
        } else {
            0.0
        };
        EstimateWithCI {
            mean: self.mean,
            std_error,
            trials: self.count,
            ci95: (self.mean - 1.96 * std_error, self.mean + 1.96 * std_error),
        }
    }
}

/// Inverse-CDF draw; rounding past the total falls back to the last positive entry.
fn draw(probs: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let u: f64 = rng.gen();
    let mut cum = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        cum += p;
        if u < cum {
            return i;
        }
    }
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

struct Sampler<'a> {
    mu: &'a FiniteDistribution,
    n: usize,
    kernel: &'a StochasticKernel,
}

impl Sampler<'_> {
    fn new<'a>(mu: &'a FiniteDistribution, n: usize, kernel: &'a StochasticKernel) -> Result<Sampler<'a>> {
        let space = DatasetSpace::new(mu.len(), n)?;
        kernel.check_inputs(space.len(), "datasets")?;
        Ok(Sampler { mu, n, kernel })
    }

    fn pair(&self, rng: &mut ChaCha8Rng) -> (DatasetIndex, usize) {
        let z = self.mu.len() as u64;
        let mut code = 0u64;
        let mut place = 1u64;
        for _ in 0..self.n {
            code += place * draw(self.mu.probs(), rng) as u64;
            place *= z;
        }
        let w = draw(self.kernel.row(code as usize), rng);
        (DatasetIndex { code, n: self.n, z_size: self.mu.len() }, w)
    }
}

/// Runs `body(rng, trials_in_block)` on every block and returns results in block order.
fn run_blocks<T, F>(trials: u64, seed: u64, body: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, u64) -> T + Sync,
{
    let blocks = trials.div_ceil(BLOCK_TRIALS);
    (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let count = BLOCK_TRIALS.min(trials - b * BLOCK_TRIALS);
            body(&mut rng, count)
        })
        .collect()
}

/// `trials` independent draws of `(S, W) ~ μ^⊗n ⊗ P_{W|S}`.
pub fn sample_pairs(
    mu: &FiniteDistribution,
    n: usize,
    kernel: &StochasticKernel,
    trials: u64,
    seed: u64,
) -> Result<Vec<(DatasetIndex, usize)>> {
    if trials == 0 {
        return Err(Error::argument("trials must be at least 1"));
    }
    let sampler = Sampler::new(mu, n, kernel)?;
    let blocks = run_blocks(trials, seed, |rng, count| (0..count).map(|_| sampler.pair(rng)).collect::<Vec<_>>());
    Ok(blocks.into_iter().flatten().collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub alpha: f64,
    /// Fraction of trials with `|L_μ(W) − L_S(W)| > α`.
    pub estimate: EstimateWithCI,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenEstimate {
    pub gen: EstimateWithCI,
    pub abs_gen: EstimateWithCI,
    pub tail: Vec<TailEstimate>,
}

/// Estimates of `E[L_μ(W) − L_S(W)]`, `E|L_μ(W) − L_S(W)|` and the tail
/// `P[|L_μ(W) − L_S(W)| > α]` for each `α` in `alphas`.
pub fn estimate_gen(
    mu: &FiniteDistribution,
    n: usize,
    kernel: &StochasticKernel,
    loss: &LossTable,
    trials: u64,
    seed: u64,
    alphas: &[f64],
) -> Result<GenEstimate> {
    if trials < MIN_GEN_TRIALS {
        return Err(Error::argument(format!("estimate_gen needs at least {MIN_GEN_TRIALS} trials")));
    }
    loss.check_mu(mu)?;
    kernel.check_outputs(loss.num_hypotheses(), "hypotheses")?;
    let sampler = Sampler::new(mu, n, kernel)?;
    let pop = population_risks(loss, mu);
    let blocks = run_blocks(trials, seed, |rng, count| {
        let mut gen = Moments::default();
        let mut abs = Moments::default();
        let mut tails = vec![Moments::default(); alphas.len()];
        for _ in 0..count {
            let (s, w) = sampler.pair(rng);
            let gap = pop[w] - empirical_risk(loss, w, &s);
            gen.push(gap);
            abs.push(gap.abs());
            for (t, &a) in tails.iter_mut().zip(alphas) {
                t.push(if gap.abs() > a { 1.0 } else { 0.0 });
            }
        }
        (gen, abs, tails)
    });
    let mut gen = Moments::default();
    let mut abs = Moments::default();
    let mut tails = vec![Moments::default(); alphas.len()];
    for (g, a, t) in blocks {
        gen = gen.merge(g);
        abs = abs.merge(a);
        for (acc, part) in tails.iter_mut().zip(t) {
            *acc = acc.merge(part);
        }
    }
    Ok(GenEstimate {
        gen: gen.estimate(),
        abs_gen: abs.estimate(),
        tail: alphas
            .iter()
            .zip(&tails)
            .map(|(&alpha, m)| TailEstimate { alpha, estimate: m.estimate() })
            .collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Selection {
    /// 1-based copy index `T*`.
    pub t: usize,
    /// Sign `R* ∈ {+1, −1}`.
    pub r: i8,
    /// `W* = W_{T*}`.
    pub w: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitorOutcome {
    pub m: usize,
    pub selected: Vec<Selection>,
    /// `E[max_t |L_μ(W_t) − L_{S_t}(W_t)|]`
    pub max_abs_gen_estimate: EstimateWithCI,
    /// `E[R*(L_{S_T*}(W*) − L_μ(W*))]`
    pub signed_estimate: EstimateWithCI,
}

/// Runs `m` independent copies per trial and lets the monitor pick
/// `(T*, R*) = argmax r(L_μ(W_t) − L_{S_t}(W_t))`, ties to the smallest `t`
/// and then `r = +1`.
pub fn monitor_experiment(
    mu: &FiniteDistribution,
    n: usize,
    kernel: &StochasticKernel,
    loss: &LossTable,
    m: usize,
    trials: u64,
    seed: u64,
) -> Result<MonitorOutcome> {
    if m == 0 {
        return Err(Error::argument("monitor needs m >= 1"));
    }
    if trials == 0 {
        return Err(Error::argument("trials must be at least 1"));
    }
    loss.check_mu(mu)?;
    kernel.check_outputs(loss.num_hypotheses(), "hypotheses")?;
    let sampler = Sampler::new(mu, n, kernel)?;
    let pop = population_risks(loss, mu);
    let blocks = run_blocks(trials, seed, |rng, count| {
        let mut max_abs = Moments::default();
        let mut signed = Moments::default();
        let mut picks = Vec::with_capacity(count as usize);
        for _ in 0..count {
            let mut best: Option<(f64, Selection, f64)> = None;
            for t in 1..=m {
                let (s, w) = sampler.pair(rng);
                let gap = pop[w] - empirical_risk(loss, w, &s);
                for r in [1i8, -1] {
                    let value = r as f64 * gap;
                    if best.as_ref().is_none_or(|(v, _, _)| value > *v) {
                        best = Some((value, Selection { t, r, w }, gap));
                    }
                }
            }
            let (value, pick, gap) = best.expect("m >= 1");
            max_abs.push(value);
            signed.push(-(pick.r as f64) * gap);
            picks.push(pick);
        }
        (max_abs, signed, picks)
    });
    let mut max_abs = Moments::default();
    let mut signed = Moments::default();
    let mut selected = Vec::with_capacity(trials as usize);
    for (a, s, p) in blocks {
        max_abs = max_abs.merge(a);
        signed = signed.merge(s);
        selected.extend(p);
    }
    Ok(MonitorOutcome {
        m,
        selected,
        max_abs_gen_estimate: max_abs.estimate(),
        signed_estimate: signed.estimate(),
    })
}

/// Exact `I(Λ(S_1), ..., Λ(S_m); W_1, ..., W_m)` for `m` independent copies.
pub fn parallel_lambda_mi(
    mu: &FiniteDistribution,
    n: usize,
    kernel: &StochasticKernel,
    loss: &LossTable,
    m: u32,
) -> Result<f64> {
    mutual_information(&lambda_joint(mu, n, kernel, loss)?.tensor_power(m)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::{erm_kernel, gibbs_kernel, InputArity, TieRule};
    use crate::info::{io_mutual_information, lambda_mutual_information, JointPMF};
    use crate::risk::exact_risk_summary;

    fn problem() -> (FiniteDistribution, LossTable) {
        let mu = FiniteDistribution::from_probs(vec![0.5, 0.3, 0.2]).unwrap();
        let loss = LossTable::unit(vec![vec![0, 800, 300], vec![600, 100, 900], vec![400, 400, 0]], 1000).unwrap();
        (mu, loss)
    }

    #[test]
    fn moments_merge_matches_sequential() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 / 7.0).collect();
        let mut whole = Moments::default();
        xs.iter().for_each(|&x| whole.push(x));
        let mut a = Moments::default();
        let mut b = Moments::default();
        xs[..333].iter().for_each(|&x| a.push(x));
        xs[333..].iter().for_each(|&x| b.push(x));
        let merged = a.merge(b);
        assert!((merged.mean - whole.mean).abs() < 1e-12);
        assert!((merged.m2 - whole.m2).abs() < 1e-8);
    }

    #[test]
    fn deterministic_kernel_and_point_mass() {
        let (mu, loss) = problem();
        let erm = erm_kernel(&loss, 2, TieRule::LowestIndex).unwrap();
        for (s, w) in sample_pairs(&mu, 2, &erm, 500, 1).unwrap() {
            assert_eq!(erm.get(s.code as usize, w), 1.0);
        }
        let point = FiniteDistribution::point_mass(3, 1).unwrap();
        let pairs = sample_pairs(&point, 2, &erm, 500, 1).unwrap();
        assert!(pairs.iter().all(|(s, _)| s.code == 4));
    }

    #[test]
    fn plug_in_mi_is_close_to_exact() {
        let (mu, loss) = problem();
        let kernel = gibbs_kernel(&loss, 2, 3.0, &FiniteDistribution::uniform(3).unwrap()).unwrap();
        let trials = 100_000;
        let pairs = sample_pairs(&mu, 2, &kernel, trials, 9).unwrap();
        let mut table = vec![0.0; 9 * 3];
        for (s, w) in pairs {
            table[s.code as usize * 3 + w] += 1.0 / trials as f64;
        }
        let total: f64 = table.iter().sum();
        table.iter_mut().for_each(|p| *p /= total);
        let joint = JointPMF::new(vec![9, 3], table, vec!["S".into(), "W".into()]).unwrap();
        let plug_in = mutual_information(&joint).unwrap();
        let exact = io_mutual_information(&mu, 2, &kernel).unwrap();
        assert!((plug_in - exact).abs() < 0.02, "{plug_in} vs {exact}");
    }

    #[test]
    fn independent_kernel_gen_contains_zero() {
        let (mu, loss) = problem();
        let kernel = StochasticKernel::constant(9, &[0.2, 0.5, 0.3])
            .unwrap()
            .with_arity(InputArity::Datasets { z_size: 3, n: 2 })
            .unwrap();
        let est = estimate_gen(&mu, 2, &kernel, &loss, 10_000, 4, &[]).unwrap();
        assert!(est.gen.ci95.0 <= 0.0 && 0.0 <= est.gen.ci95.1, "{:?}", est.gen);
    }

    #[test]
    fn gen_estimate_agrees_with_exact() {
        let (mu, loss) = problem();
        let erm = erm_kernel(&loss, 3, TieRule::LowestIndex).unwrap();
        let exact = exact_risk_summary(&mu, 3, &erm, &loss).unwrap();
        let est = estimate_gen(&mu, 3, &erm, &loss, 100_000, 21, &[0.0, 0.1, 0.3, 0.6, 1.0]).unwrap();
        assert!((est.gen.mean - exact.gen_error).abs() <= 4.0 * est.gen.std_error);
        assert!((est.abs_gen.mean - exact.abs_gen_error).abs() <= 4.0 * est.abs_gen.std_error);
        for pair in est.tail.windows(2) {
            assert!(pair[1].estimate.mean <= pair[0].estimate.mean);
        }
        assert!(estimate_gen(&mu, 3, &erm, &loss, 99, 21, &[]).is_err());
    }

    #[test]
    fn runs_are_reproducible() {
        let (mu, loss) = problem();
        let erm = erm_kernel(&loss, 2, TieRule::LowestIndex).unwrap();
        let a = estimate_gen(&mu, 2, &erm, &loss, 10_001, 5, &[0.2]).unwrap();
        let b = estimate_gen(&mu, 2, &erm, &loss, 10_001, 5, &[0.2]).unwrap();
        assert_eq!(a, b);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let c = pool.install(|| estimate_gen(&mu, 2, &erm, &loss, 10_001, 5, &[0.2]).unwrap());
        assert_eq!(a, c);
    }

    #[test]
    fn monitor_with_one_copy_matches_abs_gen() {
        let (mu, loss) = problem();
        let erm = erm_kernel(&loss, 2, TieRule::LowestIndex).unwrap();
        let est = estimate_gen(&mu, 2, &erm, &loss, 5000, 8, &[]).unwrap();
        let mon = monitor_experiment(&mu, 2, &erm, &loss, 1, 5000, 8).unwrap();
        assert_eq!(mon.max_abs_gen_estimate, est.abs_gen);
        assert!(mon.selected.iter().all(|s| s.t == 1));
    }

    #[test]
    fn monitor_constant_loss_is_zero() {
        let mu = FiniteDistribution::uniform(2).unwrap();
        let loss = LossTable::unit(vec![vec![3, 3], vec![5, 5]], 10).unwrap();
        let kernel = erm_kernel(&loss, 2, TieRule::LowestIndex).unwrap();
        let mon = monitor_experiment(&mu, 2, &kernel, &loss, 3, 1000, 2).unwrap();
        assert_eq!(mon.max_abs_gen_estimate.mean, 0.0);
        // all values tie at zero: smallest t, then r = +1
        assert!(mon.selected.iter().all(|s| s.t == 1 && s.r == 1));
    }

    #[test]
    fn parallel_copies_are_additive() {
        let (mu, loss) = problem();
        let kernel = gibbs_kernel(&loss, 2, 4.0, &FiniteDistribution::uniform(3).unwrap()).unwrap();
        let single = lambda_mutual_information(&mu, 2, &kernel, &loss).unwrap();
        for m in 1..=3 {
            let total = parallel_lambda_mi(&mu, 2, &kernel, &loss, m).unwrap();
            assert!((total - m as f64 * single).abs() < 1e-9);
        }
    }
}
