use super::kernel::{InputArity, StochasticKernel};
use crate::error::{Error, Result};
use crate::risk::{empirical_risk, LossTable};
use crate::spaces::{check_enumerable, DatasetSpace, FiniteDistribution};

/// Gibbs posterior row `∝ exp(−β L_s(w)) q(w)` for one vector of empirical risks.
pub fn gibbs_row(risks: &[f64], beta: f64, q: &[f64]) -> Vec<f64> {
    let logits: Vec<f64> = risks
        .iter()
        .zip(q)
        .map(|(&r, &qw)| if qw > 0.0 { -beta * r + qw.ln() } else { f64::NEG_INFINITY })
        .collect();
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logits.iter().map(|&l| (l - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

/// The Gibbs algorithm with inverse temperature `beta` and prior `q`.
pub fn gibbs_kernel(loss: &LossTable, n: usize, beta: f64, q: &FiniteDistribution) -> Result<StochasticKernel> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::argument(format!("Gibbs inverse temperature must be finite and >= 0, got {beta}")));
    }
    let k = loss.num_hypotheses();
    if q.len() != k {
        return Err(Error::dimension(format!("prior over {} points for {k} hypotheses", q.len())));
    }
    let space = DatasetSpace::new(loss.z_size(), n)?;
    check_enumerable("Gibbs kernel cells", space.len() as u128 * k as u128)?;
    let mut data = Vec::with_capacity(space.len() * k);
    let mut risks = vec![0.0; k];
    for s in space.iter() {
        for (w, r) in risks.iter_mut().enumerate() {
            *r = empirical_risk(loss, w, &s);
        }
        data.extend(gibbs_row(&risks, beta, q.probs()));
    }
    StochasticKernel::from_flat(space.len(), k, data, InputArity::Datasets { z_size: loss.z_size(), n })
}

/// `E[L_S(W)] + (1/β) D(P_{W|S} ‖ Q | P_S)`, the objective the Gibbs kernel minimizes.
pub fn gibbs_objective(
    mu: &FiniteDistribution,
    n: usize,
    kernel: &StochasticKernel,
    loss: &LossTable,
    beta: f64,
    q: &FiniteDistribution,
) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::argument(format!("objective needs β > 0, got {beta}")));
    }
    let space = DatasetSpace::new(mu.len(), n)?;
    kernel.check_inputs(space.len(), "datasets")?;
    let probs = space.probabilities(mu)?;
    let mut total = 0.0;
    for s in space.iter() {
        let ps = probs[s.code as usize];
        if ps == 0.0 {
            continue;
        }
        let mut value = 0.0;
        for (w, &p) in kernel.row(s.code as usize).iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let qw = q.prob(w);
            if qw == 0.0 {
                return Ok(f64::INFINITY);
            }
            value += p * empirical_risk(loss, w, &s) + p * (p / qw).ln() / beta;
        }
        total += ps * value;
    }
    Ok(total)
}
