//! Noisy ERM: `W = argmin_w (L_S(w) + N_w)` with independent exponential
//! noise `N_w` of mean `b_w`.
//!
//! For the exact kernel write `T_i = L_i + N_i`. Hypothesis `j` wins with
//! probability
//!
//! ```text
//! P(j) = ∫_{L_j}^∞ (1/b_j) e^{-(t-L_j)/b_j} ∏_{i≠j} P(T_i > t) dt
//! ```
//!
//! Between consecutive sorted risks the integrand is `c·e^{-r t}`, where `r`
//! sums `1/b_i` over the hypotheses already "switched on" (`L_i ≤ t`), so each
//! segment integrates in closed form.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kernel::{InputArity, StochasticKernel};
use crate::error::{Error, Result};
use crate::risk::{empirical_risk, LossTable};
use crate::spaces::{check_enumerable, DatasetSpace};

/// Largest hypothesis count for the exact integration path.
pub const EXACT_MAX_HYPOTHESES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum NoisyErmMode {
    Exact,
    MonteCarlo { samples: u64, seed: u64 },
}

fn check_noise(noise_means: &[f64]) -> Result<()> {
    if let Some(b) = noise_means.iter().find(|b| !(**b > 0.0) || !b.is_finite()) {
        return Err(Error::argument(format!("noise means must be positive and finite, got {b}")));
    }
    Ok(())
}

/// Exact probability that each hypothesis minimizes `risks[i] + N_i`.
pub fn noisy_argmin_probabilities(risks: &[f64], noise_means: &[f64]) -> Result<Vec<f64>> {
    check_noise(noise_means)?;
    if risks.len() != noise_means.len() || risks.is_empty() {
        return Err(Error::dimension(format!(
            "{} risks for {} noise means",
            risks.len(),
            noise_means.len()
        )));
    }
    let k = risks.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| risks[a].total_cmp(&risks[b]).then(a.cmp(&b)));

    let mut probs = vec![0.0; k];
    for (j, pj) in probs.iter_mut().enumerate() {
        let start = risks[j];
        // Hypotheses with L_i <= start are active from the first segment on.
        let mut rate = 0.0;
        let mut pos = 0;
        while pos < k && risks[order[pos]] <= start {
            rate += 1.0 / noise_means[order[pos]];
            pos += 1;
        }
        // log-survival exponent Σ_{active} (a − L_i)/b_i at the segment start a.
        let mut exponent = order[..pos]
            .iter()
            .map(|&i| (start - risks[i]) / noise_means[i])
            .sum::<f64>();
        let mut a = start;
        let mut total = 0.0;
        loop {
            let end = if pos < k { risks[order[pos]] } else { f64::INFINITY };
            let width = end - a;
            // ∫_a^end (1/b_j) e^{-exponent - rate (t - a)} dt
            let mass = if end.is_infinite() { 1.0 } else { -(-rate * width).exp_m1() };
            total += (-exponent).exp() * mass / (noise_means[j] * rate);
            if end.is_infinite() {
                break;
            }
            exponent += rate * width;
            a = end;
            while pos < k && risks[order[pos]] <= a {
                rate += 1.0 / noise_means[order[pos]];
                pos += 1;
            }
        }
        *pj = total;
    }
    Ok(probs)
}

/// Monte Carlo estimate of [`noisy_argmin_probabilities`] from one ChaCha stream.
pub fn noisy_argmin_sampled(risks: &[f64], noise_means: &[f64], samples: u64, seed: u64, stream: u64) -> Result<Vec<f64>> {
    check_noise(noise_means)?;
    if samples == 0 {
        return Err(Error::argument("Monte Carlo mode needs at least one sample"));
    }
    let noises: Vec<Exp<f64>> = noise_means
        .iter()
        .map(|b| Exp::new(1.0 / b).map_err(|e| Error::argument(e.to_string())))
        .collect::<Result<_>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut counts = vec![0u64; risks.len()];
    for _ in 0..samples {
        let mut best = 0;
        let mut best_value = f64::INFINITY;
        for (i, (r, noise)) in risks.iter().zip(&noises).enumerate() {
            let v = r + noise.sample(&mut rng);
            if v < best_value {
                best_value = v;
                best = i;
            }
        }
        counts[best] += 1;
    }
    Ok(counts.into_iter().map(|c| c as f64 / samples as f64).collect())
}

pub fn noisy_erm_kernel(
    loss: &LossTable,
    n: usize,
    noise_means: &[f64],
    mode: NoisyErmMode,
) -> Result<StochasticKernel> {
    check_noise(noise_means)?;
    let k = loss.num_hypotheses();
    if noise_means.len() != k {
        return Err(Error::dimension(format!("{} noise means for {k} hypotheses", noise_means.len())));
    }
    if mode == NoisyErmMode::Exact && k > EXACT_MAX_HYPOTHESES {
        return Err(Error::Capacity {
            what: "hypotheses for exact noisy-ERM integration".into(),
            required: k as u128,
            limit: EXACT_MAX_HYPOTHESES as u128,
        });
    }
    let space = DatasetSpace::new(loss.z_size(), n)?;
    check_enumerable("noisy ERM kernel cells", space.len() as u128 * k as u128)?;

    let rows: Vec<Vec<f64>> = (0..space.len() as u64)
        .into_par_iter()
        .map(|code| {
            let s = space.index(code);
            let risks: Vec<f64> = (0..k).map(|w| empirical_risk(loss, w, &s)).collect();
            match mode {
                NoisyErmMode::Exact => noisy_argmin_probabilities(&risks, noise_means),
                NoisyErmMode::MonteCarlo { samples, seed } => {
                    noisy_argmin_sampled(&risks, noise_means, samples, seed, code)
                }
            }
        })
        .collect::<Result<_>>()?;
    let data = rows.into_iter().flatten().collect();
    StochasticKernel::from_flat(space.len(), k, data, InputArity::Datasets { z_size: loss.z_size(), n })
}
