use serde::{Deserialize, Serialize};

use super::kernel::{InputArity, StochasticKernel};
use crate::error::{Error, Result};
use crate::risk::LossTable;
use crate::spaces::{check_enumerable, DatasetSpace};

/// How ERM resolves hypotheses with exactly equal empirical risk.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieRule {
    #[default]
    LowestIndex,
    UniformOverArgmin,
}

/// Distribution over `candidates` that ERM places given integer risks.
///
/// `risks[i]` belongs to `candidates[i]`; the result has `outputs` entries.
pub(crate) fn argmin_row(risks: &[i64], candidates: &[usize], outputs: usize, tie: TieRule) -> Vec<f64> {
    let best = risks.iter().copied().min().expect("at least one candidate");
    let mut row = vec![0.0; outputs];
    let winners: Vec<usize> = candidates
        .iter()
        .zip(risks)
        .filter(|(_, &r)| r == best)
        .map(|(&w, _)| w)
        .collect();
    match tie {
        TieRule::LowestIndex => row[*winners.iter().min().unwrap()] = 1.0,
        TieRule::UniformOverArgmin => {
            let mass = 1.0 / winners.len() as f64;
            for w in winners {
                row[w] = mass;
            }
        }
    }
    row
}

/// Empirical risk minimization over every hypothesis in `loss`.
///
/// Ties are found by integer comparison, so the row of a dataset is a
/// function of its risk vector alone.
pub fn erm_kernel(loss: &LossTable, n: usize, tie: TieRule) -> Result<StochasticKernel> {
    let space = DatasetSpace::new(loss.z_size(), n)?;
    let k = loss.num_hypotheses();
    check_enumerable("ERM kernel cells", space.len() as u128 * k as u128)?;
    let candidates: Vec<usize> = (0..k).collect();
    let mut data = Vec::with_capacity(space.len() * k);
    for s in space.iter() {
        let key = loss.risk_key(&s);
        data.extend(argmin_row(&key, &candidates, k, tie));
    }
    StochasticKernel::from_flat(space.len(), k, data, InputArity::Datasets { z_size: loss.z_size(), n })
        .map_err(|e| Error::argument(format!("ERM kernel construction failed: {e}")))
}
