use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-sum tolerance for a [`StochasticKernel`].
pub const ROW_SUM_TOL: f64 = 1e-10;

/// What the rows of a kernel are indexed by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InputArity {
    /// Dataset codes in `Z^n`.
    Datasets { z_size: usize, n: usize },
    /// `dataset_code + |Z|^n · prior_code`, where `prior_code` indexes the
    /// outputs of earlier stages.
    DatasetsWithPrior { z_size: usize, n: usize, prior_outputs: usize },
    /// A plain finite input space.
    Points(usize),
}

/// A Markov kernel from a finite input space to hypotheses, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StochasticKernel {
    inputs: usize,
    outputs: usize,
    data: Vec<f64>,
    arity: InputArity,
}

impl StochasticKernel {
    pub fn new(rows: Vec<Vec<f64>>, arity: InputArity) -> Result<Self> {
        let inputs = rows.len();
        let outputs = rows.first().map_or(0, Vec::len);
        if inputs == 0 || outputs == 0 {
            return Err(Error::argument("kernel needs at least one row and one column"));
        }
        let mut data = Vec::with_capacity(inputs * outputs);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != outputs {
                return Err(Error::dimension(format!(
                    "kernel row {i} has {} entries, expected {outputs}",
                    row.len()
                )));
            }
            data.extend(row);
        }
        Self::from_flat(inputs, outputs, data, arity)
    }

    pub fn from_flat(inputs: usize, outputs: usize, data: Vec<f64>, arity: InputArity) -> Result<Self> {
        if data.len() != inputs * outputs {
            return Err(Error::dimension(format!(
                "{} entries for a {inputs}x{outputs} kernel",
                data.len()
            )));
        }
        let expected = arity_inputs(&arity);
        if expected != inputs {
            return Err(Error::dimension(format!("{arity:?} expects {expected} rows, got {inputs}")));
        }
        for (i, row) in data.chunks(outputs).enumerate() {
            if let Some(p) = row.iter().find(|p| !p.is_finite() || **p < 0.0) {
                return Err(Error::Distribution(format!("kernel row {i} has entry {p}")));
            }
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::Distribution(format!("kernel row {i} sums to {total}")));
            }
        }
        Ok(Self { inputs, outputs, data, arity })
    }

    /// Kernel whose rows are indexed by an unstructured finite space.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let inputs = rows.len();
        Self::new(rows, InputArity::Points(inputs))
    }

    /// Every row equal to `row`: the output ignores the input.
    pub fn constant(inputs: usize, row: &[f64]) -> Result<Self> {
        let data = row.iter().copied().cycle().take(inputs * row.len()).collect();
        Self::from_flat(inputs, row.len(), data, InputArity::Points(inputs))
    }

    pub fn identity(k: usize) -> Self {
        let mut data = vec![0.0; k * k];
        for i in 0..k {
            data[i * k + i] = 1.0;
        }
        Self { inputs: k, outputs: k, data, arity: InputArity::Points(k) }
    }

    /// Re-labels the row index space; the row count must agree.
    pub fn with_arity(mut self, arity: InputArity) -> Result<Self> {
        let expected = arity_inputs(&arity);
        if expected != self.inputs {
            return Err(Error::dimension(format!(
                "{arity:?} expects {expected} rows, kernel has {}",
                self.inputs
            )));
        }
        self.arity = arity;
        Ok(self)
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn arity(&self) -> InputArity {
        self.arity
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.outputs..(i + 1) * self.outputs]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.outputs)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.outputs + j]
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    /// Output law `Σ_x p(x) K(x, ·)`.
    pub fn output_marginal(&self, input: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.outputs];
        for (px, row) in input.iter().zip(self.rows()) {
            if *px == 0.0 {
                continue;
            }
            for (o, k) in out.iter_mut().zip(row) {
                *o += px * k;
            }
        }
        out
    }

    pub(crate) fn check_inputs(&self, expected: usize, what: &str) -> Result<()> {
        if self.inputs != expected {
            return Err(Error::dimension(format!(
                "kernel has {} rows, expected {expected} ({what})",
                self.inputs
            )));
        }
        Ok(())
    }

    pub(crate) fn check_outputs(&self, expected: usize, what: &str) -> Result<()> {
        if self.outputs != expected {
            return Err(Error::dimension(format!(
                "kernel has {} columns, expected {expected} ({what})",
                self.outputs
            )));
        }
        Ok(())
    }
}

fn arity_inputs(arity: &InputArity) -> usize {
    match *arity {
        InputArity::Datasets { z_size, n } => (z_size as u128).pow(n as u32) as usize,
        InputArity::DatasetsWithPrior { z_size, n, prior_outputs } => {
            (z_size as u128).pow(n as u32) as usize * prior_outputs
        }
        InputArity::Points(k) => k,
    }
}

/// Composite kernel `x ↦ Σ_y first(x, y) second(y, ·)`.
///
/// Models preprocessing `S → S̃ → W` and postprocessing `S → W̃ → W`.
pub fn chain_kernel(first: &StochasticKernel, second: &StochasticKernel) -> Result<StochasticKernel> {
    if first.outputs != second.inputs {
        return Err(Error::dimension(format!(
            "first kernel has {} outputs but second has {} inputs",
            first.outputs, second.inputs
        )));
    }
    let mut data = vec![0.0; first.inputs * second.outputs];
    for (i, row) in first.rows().enumerate() {
        let out = &mut data[i * second.outputs..(i + 1) * second.outputs];
        for (y, &p) in row.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            for (o, k) in out.iter_mut().zip(second.row(y)) {
                *o += p * k;
            }
        }
    }
    StochasticKernel::from_flat(first.inputs, second.outputs, data, first.arity)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_rows() {
        assert!(StochasticKernel::from_rows(vec![vec![0.5, 0.4]]).is_err());
        assert!(StochasticKernel::from_rows(vec![vec![1.5, -0.5]]).is_err());
        assert!(StochasticKernel::from_rows(vec![vec![1.0], vec![0.5, 0.5]]).is_err());
        assert!(StochasticKernel::new(vec![vec![1.0]; 3], InputArity::Datasets { z_size: 2, n: 2 }).is_err());
    }

    #[test]
    fn chain_with_identity_is_noop() {
        let k = StochasticKernel::from_rows(vec![vec![0.2, 0.8], vec![0.6, 0.4], vec![1.0, 0.0]]).unwrap();
        let c = chain_kernel(&k, &StochasticKernel::identity(2)).unwrap();
        assert_eq!(c, k);
    }

    #[test]
    fn chain_after_constant_is_constant() {
        let first = StochasticKernel::constant(4, &[0.3, 0.7]).unwrap();
        let second = StochasticKernel::from_rows(vec![vec![0.1, 0.9, 0.0], vec![0.5, 0.25, 0.25]]).unwrap();
        let c = chain_kernel(&first, &second).unwrap();
        for row in c.rows() {
            assert_eq!(row, c.row(0));
        }
    }

    #[test]
    fn chain_dimension_mismatch() {
        let a = StochasticKernel::identity(2);
        let b = StochasticKernel::identity(3);
        assert!(matches!(chain_kernel(&a, &b), Err(Error::Dimension(_))));
    }
}
