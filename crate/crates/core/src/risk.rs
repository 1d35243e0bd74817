//! Loss tables on a rational grid, empirical and population risk, and the
//! exact expected generalization error of a kernel.

use serde::{Deserialize, Serialize};

use crate::algorithms::StochasticKernel;
use crate::error::{Error, Result};
use crate::spaces::{DatasetIndex, DatasetSpace, FiniteDistribution};

/// Loss values `ℓ(w, z) = numerators[w][z] / denominator`.
///
/// Keeping integer numerators lets empirical-risk vectors be compared
/// exactly: `n·D·L_s(w)` is an integer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LossTable {
    numerators: Vec<Vec<i64>>,
    denominator: u64,
    /// Declared range `[a, b]` as numerators over the same denominator.
    bounds: (i64, i64),
}

impl LossTable {
    /// `bounds` are numerators of the declared range over `denominator`.
    pub fn new(numerators: Vec<Vec<i64>>, denominator: u64, bounds: (i64, i64)) -> Result<Self> {
        if denominator == 0 {
            return Err(Error::argument("loss denominator must be >= 1"));
        }
        let (lo, hi) = bounds;
        if lo < 0 || hi < lo {
            return Err(Error::argument(format!(
                "loss range [{lo}, {hi}]/{denominator} must satisfy 0 <= a <= b"
            )));
        }
        let z_size = numerators.first().map_or(0, Vec::len);
        if numerators.is_empty() || z_size == 0 {
            return Err(Error::argument("loss table needs at least one hypothesis and one instance"));
        }
        for (w, row) in numerators.iter().enumerate() {
            if row.len() != z_size {
                return Err(Error::dimension(format!(
                    "loss row {w} has {} entries, expected {z_size}",
                    row.len()
                )));
            }
            if let Some(&v) = row.iter().find(|&&v| v < lo || v > hi) {
                return Err(Error::Domain(format!(
                    "loss numerator {v} in row {w} outside [{lo}, {hi}]"
                )));
            }
        }
        Ok(Self { numerators, denominator, bounds })
    }

    /// Loss table with values in `[0, 1]` on the `1/D` grid.
    pub fn unit(numerators: Vec<Vec<i64>>, denominator: u64) -> Result<Self> {
        Self::new(numerators, denominator, (0, denominator as i64))
    }

    /// Snaps real values onto the `1/D` grid, failing for off-grid entries.
    pub fn from_values(values: &[Vec<f64>], denominator: u64, bounds: (f64, f64)) -> Result<Self> {
        let snap = |v: f64| -> Result<i64> {
            let scaled = v * denominator as f64;
            let rounded = scaled.round();
            if !v.is_finite() || (scaled - rounded).abs() > 1e-9 * scaled.abs().max(1.0) {
                return Err(Error::Grid { value: v, denominator });
            }
            Ok(rounded as i64)
        };
        let numerators = values
            .iter()
            .map(|row| row.iter().map(|&v| snap(v)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Self::new(numerators, denominator, (snap(bounds.0)?, snap(bounds.1)?))
    }

    /// 0/1 loss `ℓ(w, z) = 1{w ≠ z}` for `k` hypotheses over `k` labels.
    pub fn zero_one(k: usize) -> Self {
        let numerators = (0..k)
            .map(|w| (0..k).map(|z| i64::from(w != z)).collect())
            .collect();
        Self::unit(numerators, 1).expect("0/1 loss is valid")
    }

    pub fn num_hypotheses(&self) -> usize {
        self.numerators.len()
    }

    pub fn z_size(&self) -> usize {
        self.numerators[0].len()
    }

    pub fn denominator(&self) -> u64 {
        self.denominator
    }

    pub fn numerators(&self) -> &[Vec<i64>] {
        &self.numerators
    }

    pub fn numerator(&self, w: usize, z: usize) -> i64 {
        self.numerators[w][z]
    }

    pub fn value(&self, w: usize, z: usize) -> f64 {
        self.numerators[w][z] as f64 / self.denominator as f64
    }

    /// Declared range `(a, b)` as reals.
    pub fn bounds(&self) -> (f64, f64) {
        let d = self.denominator as f64;
        (self.bounds.0 as f64 / d, self.bounds.1 as f64 / d)
    }

    pub fn bound_numerators(&self) -> (i64, i64) {
        self.bounds
    }

    /// `(b − a)/2`, the subgaussian constant of any loss in `[a, b]`.
    pub fn hoeffding_sigma(&self) -> f64 {
        let (a, b) = self.bounds();
        (b - a) / 2.0
    }

    /// `n·D·L_s(w)`, an exact integer.
    pub fn risk_numerator(&self, w: usize, s: &DatasetIndex) -> i64 {
        let row = &self.numerators[w];
        s.digits().map(|z| row[z]).sum()
    }

    /// Integer key of the empirical-risk vector `Λ_W(s)`.
    pub fn risk_key(&self, s: &DatasetIndex) -> Vec<i64> {
        (0..self.num_hypotheses()).map(|w| self.risk_numerator(w, s)).collect()
    }

    pub(crate) fn check_mu(&self, mu: &FiniteDistribution) -> Result<()> {
        if mu.len() != self.z_size() {
            return Err(Error::dimension(format!(
                "distribution over {} instances for a loss table over {}",
                mu.len(),
                self.z_size()
            )));
        }
        Ok(())
    }
}

/// `L_s(w) = (1/n) Σ_i ℓ(w, Z_i)`.
pub fn empirical_risk(loss: &LossTable, w: usize, s: &DatasetIndex) -> f64 {
    loss.risk_numerator(w, s) as f64 / (s.n as f64 * loss.denominator as f64)
}

/// `L_μ(w) = Σ_z μ(z) ℓ(w, z)`.
pub fn population_risk(loss: &LossTable, w: usize, mu: &FiniteDistribution) -> f64 {
    (0..loss.z_size()).map(|z| mu.prob(z) * loss.value(w, z)).sum()
}

pub fn population_risks(loss: &LossTable, mu: &FiniteDistribution) -> Vec<f64> {
    (0..loss.num_hypotheses()).map(|w| population_risk(loss, w, mu)).collect()
}

/// Exact risk quantities of a learning algorithm under `μ^⊗n ⊗ P_{W|S}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskSummary {
    /// `E[L_S(W)]`
    pub expected_empirical: f64,
    /// `E[L_μ(W)]`
    pub expected_population: f64,
    /// `E[L_μ(W) − L_S(W)]`
    pub gen_error: f64,
    /// `E|L_μ(W) − L_S(W)|`
    pub abs_gen_error: f64,
    /// `E[L_μ(W)] − min_w L_μ(w)`
    pub excess_risk: f64,
}

pub fn exact_risk_summary(
    mu: &FiniteDistribution,
    n: usize,
    kernel: &StochasticKernel,
    loss: &LossTable,
) -> Result<RiskSummary> {
    loss.check_mu(mu)?;
    let space = DatasetSpace::new(mu.len(), n)?;
    kernel.check_inputs(space.len(), "datasets")?;
    kernel.check_outputs(loss.num_hypotheses(), "hypotheses")?;
    let pop = population_risks(loss, mu);
    let probs = space.probabilities(mu)?;

    let mut emp = 0.0;
    let mut popw = 0.0;
    let mut abs = 0.0;
    for s in space.iter() {
        let ps = probs[s.code as usize];
        if ps == 0.0 {
            continue;
        }
        let row = kernel.row(s.code as usize);
        let (mut e, mut p, mut a) = (0.0, 0.0, 0.0);
        for (w, &pw) in row.iter().enumerate() {
            if pw == 0.0 {
                continue;
            }
            let ls = empirical_risk(loss, w, &s);
            e += pw * ls;
            p += pw * pop[w];
            a += pw * (pop[w] - ls).abs();
        }
        emp += ps * e;
        popw += ps * p;
        abs += ps * a;
    }
    let min_pop = pop.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(RiskSummary {
        expected_empirical: emp,
        expected_population: popw,
        gen_error: popw - emp,
        abs_gen_error: abs,
        excess_risk: (popw - min_pop).max(0.0),
    })
}
