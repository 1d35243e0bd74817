//! Exact information measures in nats over explicit joint tables.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::algorithms::StochasticKernel;
use crate::error::{Error, Result};
use crate::risk::LossTable;
use crate::spaces::{check_enumerable, DatasetSpace, FiniteDistribution};

/// Tolerance on the total mass of a [`JointPMF`].
pub const JOINT_TOL: f64 = 1e-10;

/// Sum with pairwise (cascade) reduction, bit-stable for a fixed input order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// A joint probability table over two or three finite axes, stored in C order
/// (last axis fastest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointPMF {
    dims: Vec<usize>,
    table: Vec<f64>,
    axis_labels: Vec<String>,
}

impl JointPMF {
    pub fn new(dims: Vec<usize>, table: Vec<f64>, axis_labels: Vec<String>) -> Result<Self> {
        if !(2..=3).contains(&dims.len()) {
            return Err(Error::dimension(format!("joint tables have 2 or 3 axes, got {}", dims.len())));
        }
        if axis_labels.len() != dims.len() {
            return Err(Error::dimension(format!("{} labels for {} axes", axis_labels.len(), dims.len())));
        }
        if dims.contains(&0) {
            return Err(Error::dimension("joint axis of size 0"));
        }
        let cells = dims.iter().map(|&d| d as u128).product::<u128>();
        check_enumerable("joint table cells", cells)?;
        if table.len() as u128 != cells {
            return Err(Error::dimension(format!("{} entries for dims {dims:?}", table.len())));
        }
        if let Some(p) = table.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::Distribution(format!("joint entry {p}")));
        }
        let total = pairwise_sum(&table);
        if (total - 1.0).abs() > JOINT_TOL {
            return Err(Error::Distribution(format!("joint table sums to {total}")));
        }
        Ok(Self { dims, table, axis_labels })
    }

    /// `P_X ⊗ K`: axis 0 is the kernel input, axis 1 its output.
    pub fn from_kernel(input: &[f64], kernel: &StochasticKernel, labels: (&str, &str)) -> Result<Self> {
        kernel.check_inputs(input.len(), "input distribution")?;
        let k = kernel.outputs();
        let mut table = Vec::with_capacity(input.len() * k);
        for (px, row) in input.iter().zip(kernel.rows()) {
            table.extend(row.iter().map(|w| px * w));
        }
        Self::new(vec![input.len(), k], table, vec![labels.0.into(), labels.1.into()])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn axis_labels(&self) -> &[String] {
        &self.axis_labels
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        self.table[self.flat(index)]
    }

    fn flat(&self, index: &[usize]) -> usize {
        index.iter().zip(&self.dims).fold(0, |acc, (&i, &d)| acc * d + i)
    }

    fn unflat(&self, mut flat: usize, out: &mut [usize]) {
        for (slot, &d) in out.iter_mut().zip(&self.dims).rev() {
            *slot = flat % d;
            flat /= d;
        }
    }

    /// Marginal mass along `axis` as a raw vector.
    pub fn marginal_probs(&self, axis: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dims[axis]];
        let mut idx = vec![0; self.dims.len()];
        for (f, &p) in self.table.iter().enumerate() {
            self.unflat(f, &mut idx);
            out[idx[axis]] += p;
        }
        out
    }

    /// Marginal along `axis`, renormalized to absorb rounding.
    pub fn marginal(&self, axis: usize) -> Result<FiniteDistribution> {
        if axis >= self.dims.len() {
            return Err(Error::dimension(format!("no axis {axis}")));
        }
        let probs = self.marginal_probs(axis);
        let labels = (0..probs.len()).map(|i| format!("{}{i}", self.axis_labels[axis])).collect();
        let total: f64 = probs.iter().sum();
        FiniteDistribution::new(labels, probs.into_iter().map(|p| p / total).collect())
    }

    /// Two-axis joint of `keep.0` against `keep.1`, summing out any third axis.
    pub fn pair(&self, keep: (usize, usize)) -> Result<JointPMF> {
        let (a, b) = keep;
        if a == b || a >= self.dims.len() || b >= self.dims.len() {
            return Err(Error::dimension(format!("invalid axis pair {keep:?}")));
        }
        let (da, db) = (self.dims[a], self.dims[b]);
        let mut table = vec![0.0; da * db];
        let mut idx = vec![0; self.dims.len()];
        for (f, &p) in self.table.iter().enumerate() {
            self.unflat(f, &mut idx);
            table[idx[a] * db + idx[b]] += p;
        }
        Ok(JointPMF {
            dims: vec![da, db],
            table,
            axis_labels: vec![self.axis_labels[a].clone(), self.axis_labels[b].clone()],
        })
    }

    /// Merges axes `x` and `y` of a 3-axis table into one axis (`x` fastest),
    /// keeping the remaining axis first.
    pub fn merge(&self, x: usize, y: usize) -> Result<JointPMF> {
        if self.dims.len() != 3 || x == y || x > 2 || y > 2 {
            return Err(Error::dimension("merge needs two distinct axes of a 3-axis table"));
        }
        let other = 3 - x - y;
        let (dx, dy) = (self.dims[x], self.dims[y]);
        let mut table = vec![0.0; self.dims[other] * dx * dy];
        let mut idx = [0; 3];
        for (f, &p) in self.table.iter().enumerate() {
            self.unflat(f, &mut idx);
            table[idx[other] * dx * dy + idx[y] * dx + idx[x]] += p;
        }
        Ok(JointPMF {
            dims: vec![self.dims[other], dx * dy],
            table,
            axis_labels: vec![
                self.axis_labels[other].clone(),
                format!("({},{})", self.axis_labels[x], self.axis_labels[y]),
            ],
        })
    }

    /// Lumps the values of `axis` into `groups` classes via `group_of`.
    pub fn regroup(&self, axis: usize, group_of: &[usize], groups: usize) -> Result<JointPMF> {
        if axis >= self.dims.len() || group_of.len() != self.dims[axis] {
            return Err(Error::dimension("group map does not match the axis"));
        }
        if group_of.iter().any(|&g| g >= groups) {
            return Err(Error::Domain("group id out of range".into()));
        }
        let mut dims = self.dims.clone();
        dims[axis] = groups;
        let mut out = JointPMF { dims, table: Vec::new(), axis_labels: self.axis_labels.clone() };
        out.table = vec![0.0; out.dims.iter().product()];
        let mut idx = vec![0; self.dims.len()];
        for (f, &p) in self.table.iter().enumerate() {
            self.unflat(f, &mut idx);
            idx[axis] = group_of[idx[axis]];
            let g = out.flat(&idx);
            out.table[g] += p;
        }
        Ok(out)
    }

    /// Law of `m` independent copies of a 2-axis joint, as a joint of
    /// `(X_1..X_m)` against `(Y_1..Y_m)` with copy 1 least significant.
    pub fn tensor_power(&self, m: u32) -> Result<JointPMF> {
        if self.dims.len() != 2 || m == 0 {
            return Err(Error::argument("tensor power needs a 2-axis joint and m >= 1"));
        }
        let (dx, dy) = (self.dims[0], self.dims[1]);
        let nx = (dx as u128).pow(m);
        let ny = (dy as u128).pow(m);
        check_enumerable("product joint cells", nx * ny)?;
        let (nx, ny) = (nx as usize, ny as usize);
        let mut table = vec![0.0; nx * ny];
        for xc in 0..nx {
            for yc in 0..ny {
                let (mut a, mut b, mut p) = (xc, yc, 1.0);
                for _ in 0..m {
                    p *= self.table[(a % dx) * dy + b % dy];
                    a /= dx;
                    b /= dy;
                }
                table[xc * ny + yc] = p;
            }
        }
        Ok(JointPMF {
            dims: vec![nx, ny],
            table,
            axis_labels: vec![format!("{}^{m}", self.axis_labels[0]), format!("{}^{m}", self.axis_labels[1])],
        })
    }
}

fn entropy_of(probs: &[f64]) -> f64 {
    let terms: Vec<f64> = probs.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.ln()).collect();
    pairwise_sum(&terms).max(0.0)
}

/// Shannon entropy in nats.
pub fn entropy(p: &FiniteDistribution) -> f64 {
    entropy_of(p.probs())
}

/// `D(p ‖ q)` in nats; `q` is matched to `p` by label.
pub fn kl_divergence(p: &FiniteDistribution, q: &FiniteDistribution) -> Result<f64> {
    let q_index: HashMap<&str, usize> =
        q.labels().iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    if q_index.len() != p.len() {
        return Err(Error::Distribution("distributions have different label sets".into()));
    }
    let mut terms = Vec::with_capacity(p.len());
    for (label, &pi) in p.labels().iter().zip(p.probs()) {
        let j = *q_index
            .get(label.as_str())
            .ok_or_else(|| Error::Distribution(format!("label {label:?} missing from reference")))?;
        if pi == 0.0 {
            continue;
        }
        let qj = q.prob(j);
        if qj == 0.0 {
            return Err(Error::Support { label: label.clone(), p: pi });
        }
        terms.push(pi * (pi / qj).ln());
    }
    Ok(pairwise_sum(&terms).max(0.0))
}

fn mi_table(dx: usize, dy: usize, table: &[f64]) -> f64 {
    let mut px = vec![0.0; dx];
    let mut py = vec![0.0; dy];
    for x in 0..dx {
        for y in 0..dy {
            let p = table[x * dy + y];
            px[x] += p;
            py[y] += p;
        }
    }
    let mut terms = Vec::new();
    for x in 0..dx {
        for y in 0..dy {
            let p = table[x * dy + y];
            if p > 0.0 {
                terms.push(p * (p / (px[x] * py[y])).ln());
            }
        }
    }
    pairwise_sum(&terms).max(0.0)
}

/// `I(X;Y) = D(P_{X,Y} ‖ P_X ⊗ P_Y)` for a 2-axis joint.
pub fn mutual_information(j: &JointPMF) -> Result<f64> {
    if j.dims.len() != 2 {
        return Err(Error::dimension("mutual information needs a 2-axis joint"));
    }
    Ok(mi_table(j.dims[0], j.dims[1], &j.table))
}

/// `I(X;Y|Z)` where `given` names the conditioning axis of a 3-axis joint and
/// the other two axes are `X`, `Y` in order.
pub fn conditional_mi(j: &JointPMF, given: usize) -> Result<f64> {
    if j.dims.len() != 3 || given > 2 {
        return Err(Error::dimension("conditional MI needs a 3-axis joint and a conditioning axis"));
    }
    let (x, y) = match given {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let pz = j.marginal_probs(given);
    let pxz = j.pair((x, given))?;
    let pyz = j.pair((y, given))?;
    let dz = j.dims[given];
    let mut idx = [0; 3];
    let mut terms = Vec::new();
    for (f, &p) in j.table.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        j.unflat(f, &mut idx);
        let z = idx[given];
        let a = pxz.table[idx[x] * dz + z];
        let b = pyz.table[idx[y] * dz + z];
        terms.push(p * ((p * pz[z]) / (a * b)).ln());
    }
    Ok(pairwise_sum(&terms).max(0.0))
}

/// `P_{S,W} = μ^⊗n ⊗ P_{W|S}` as an explicit table.
pub fn io_joint(mu: &FiniteDistribution, n: usize, kernel: &StochasticKernel) -> Result<JointPMF> {
    let space = DatasetSpace::new(mu.len(), n)?;
    kernel.check_inputs(space.len(), "datasets")?;
    check_enumerable("joint (S, W) cells", space.len() as u128 * kernel.outputs() as u128)?;
    let probs = space.probabilities(mu)?;
    JointPMF::from_kernel(&probs, kernel, ("S", "W"))
}

/// True when every row equals the first, so the output ignores the input.
fn ignores_input(kernel: &StochasticKernel) -> bool {
    let first = kernel.row(0);
    kernel.rows().all(|r| r == first)
}

/// `I(S;W)` under `μ^⊗n ⊗ P_{W|S}`; exactly 0 for a kernel with identical rows.
pub fn io_mutual_information(mu: &FiniteDistribution, n: usize, kernel: &StochasticKernel) -> Result<f64> {
    let joint = io_joint(mu, n, kernel)?;
    if ignores_input(kernel) {
        return Ok(0.0);
    }
    mutual_information(&joint)
}

/// `I(X;Y)` for input law `input` pushed through `kernel`.
pub fn kernel_mutual_information(input: &[f64], kernel: &StochasticKernel) -> Result<f64> {
    let joint = JointPMF::from_kernel(input, kernel, ("X", "Y"))?;
    if ignores_input(kernel) {
        return Ok(0.0);
    }
    mutual_information(&joint)
}

/// Group id of every dataset under its integer risk key, numbered by first
/// occurrence in code order.
pub fn lambda_groups(loss: &LossTable, n: usize) -> Result<(Vec<usize>, usize)> {
    let space = DatasetSpace::new(loss.z_size(), n)?;
    let mut ids: HashMap<Vec<i64>, usize> = HashMap::new();
    let mut group_of = Vec::with_capacity(space.len());
    for s in space.iter() {
        let next = ids.len();
        group_of.push(*ids.entry(loss.risk_key(&s)).or_insert(next));
    }
    Ok((group_of, ids.len()))
}

/// Joint of `Λ_W(S)` (by group id) and `W`.
pub fn lambda_joint(
    mu: &FiniteDistribution,
    n: usize,
    kernel: &StochasticKernel,
    loss: &LossTable,
) -> Result<JointPMF> {
    loss.check_mu(mu)?;
    kernel.check_outputs(loss.num_hypotheses(), "hypotheses")?;
    let joint = io_joint(mu, n, kernel)?;
    let (group_of, groups) = lambda_groups(loss, n)?;
    let mut lumped = joint.regroup(0, &group_of, groups)?;
    lumped.axis_labels[0] = "Λ".into();
    Ok(lumped)
}

/// `I(Λ_W(S); W)`.
pub fn lambda_mutual_information(
    mu: &FiniteDistribution,
    n: usize,
    kernel: &StochasticKernel,
    loss: &LossTable,
) -> Result<f64> {
    let joint = lambda_joint(mu, n, kernel, loss)?;
    if ignores_input(kernel) {
        return Ok(0.0);
    }
    mutual_information(&joint)
}

/// A grid-certified subgaussian constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubgaussianCertificate {
    pub sigma: f64,
    pub lambda_grid: Vec<f64>,
    /// `max_λ [log E e^{λ(U−EU)} − λ²σ²/2]` over the grid.
    pub max_violation: f64,
}

/// Symmetric grid reaching `|λ| = 20/(b−a)`: 100 log-spaced magnitudes per sign.
pub fn default_lambda_grid(values: &[f64]) -> Vec<f64> {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let range = if hi > lo { hi - lo } else { 1.0 };
    let top = 20.0 / range;
    let mut grid = Vec::with_capacity(200);
    for k in 0..100 {
        let mag = top * 10f64.powf(-4.0 * (99 - k) as f64 / 99.0);
        grid.push(-mag);
        grid.push(mag);
    }
    grid.sort_by(f64::total_cmp);
    grid
}

fn centered_log_mgf(values: &[f64], probs: &[f64], mean: f64, lambda: f64) -> f64 {
    let logits: Vec<f64> = values
        .iter()
        .zip(probs)
        .filter(|(_, &p)| p > 0.0)
        .map(|(&v, &p)| p.ln() + lambda * (v - mean))
        .collect();
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + logits.iter().map(|l| (l - max).exp()).sum::<f64>().ln()
}

/// Smallest `σ` with `log E e^{λ(U−EU)} ≤ λ²σ²/2` at every grid point.
///
/// The optimum over a finite grid is `max_λ sqrt(2ψ(λ))/|λ|`; the result is
/// then nudged up until the inequality holds in floating point.
pub fn subgaussian_sigma(
    values: &[f64],
    probs: &FiniteDistribution,
    lambda_grid: &[f64],
) -> Result<SubgaussianCertificate> {
    if lambda_grid.is_empty() {
        return Err(Error::argument("empty λ grid"));
    }
    if values.len() != probs.len() {
        return Err(Error::dimension(format!("{} values for {} probabilities", values.len(), probs.len())));
    }
    if values.iter().chain(lambda_grid).any(|v| !v.is_finite()) {
        return Err(Error::argument("values and λ grid must be finite"));
    }
    let support: Vec<f64> = values.iter().zip(probs.probs()).filter(|(_, &p)| p > 0.0).map(|(&v, _)| v).collect();
    if support.windows(2).all(|w| w[0] == w[1]) {
        return Ok(SubgaussianCertificate { sigma: 0.0, lambda_grid: lambda_grid.to_vec(), max_violation: 0.0 });
    }
    let mean = probs.expect(values);
    let psi: Vec<(f64, f64)> = lambda_grid
        .iter()
        .filter(|&&l| l != 0.0)
        .map(|&l| (l, centered_log_mgf(values, probs.probs(), mean, l)))
        .collect();
    let violation = |sigma: f64| {
        psi.iter()
            .map(|&(l, v)| v - l * l * sigma * sigma / 2.0)
            .fold(if psi.is_empty() { 0.0 } else { f64::NEG_INFINITY }, f64::max)
    };
    let mut sigma = psi
        .iter()
        .map(|&(l, v)| (2.0 * v.max(0.0)).sqrt() / l.abs())
        .fold(0.0, f64::max);
    while violation(sigma) > 0.0 {
        sigma = if sigma == 0.0 { f64::MIN_POSITIVE } else { sigma * (1.0 + 1e-15) + f64::EPSILON * 1e-3 };
    }
    Ok(SubgaussianCertificate { sigma, lambda_grid: lambda_grid.to_vec(), max_violation: violation(sigma) })
}

/// Both sides of the decoupling estimate
/// `|E f(X,Y) − E f(X̄,Ȳ)| ≤ sqrt(2σ² I(X;Y))`, with `(X̄,Ȳ) ~ P_X ⊗ P_Y`.
pub fn dv_decoupling_check(j: &JointPMF, f: &[f64], sigma: f64) -> Result<(f64, f64)> {
    if j.dims.len() != 2 || f.len() != j.table.len() {
        return Err(Error::dimension("decoupling check needs a 2-axis joint and a matching f table"));
    }
    let (dx, dy) = (j.dims[0], j.dims[1]);
    let px = j.marginal_probs(0);
    let py = j.marginal_probs(1);
    let joint_terms: Vec<f64> = j.table.iter().zip(f).map(|(p, v)| p * v).collect();
    let mut product_terms = Vec::with_capacity(dx * dy);
    for x in 0..dx {
        for y in 0..dy {
            product_terms.push(px[x] * py[y] * f[x * dy + y]);
        }
    }
    let lhs = (pairwise_sum(&joint_terms) - pairwise_sum(&product_terms)).abs();
    let rhs = (2.0 * sigma * sigma * mutual_information(j)?).sqrt();
    Ok((lhs, rhs))
}

/// `log(1 + mean/b)`, the capacity of an additive exponential-noise channel
/// with input mean `mean` and noise mean `b`.
pub fn exp_channel_capacity_term(mean_risk: f64, b: f64) -> Result<f64> {
    if !(b > 0.0) || !b.is_finite() {
        return Err(Error::argument(format!("noise mean must be positive, got {b}")));
    }
    if !(mean_risk >= 0.0) {
        return Err(Error::argument(format!("mean risk must be nonnegative, got {mean_risk}")));
    }
    Ok((mean_risk / b).ln_1p())
}
