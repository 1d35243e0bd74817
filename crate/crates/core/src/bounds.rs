//! Closed-form generalization, risk and sample-complexity bounds.
//!
//! All information quantities are in nats. Every `*_report` function wraps a
//! formula in a [`BoundReport`] naming the inequality it evaluates.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::info::exp_channel_capacity_term;
use crate::spaces::FiniteDistribution;

/// Slack allowed when comparing a measured value against a bound.
pub const CHECK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub paper_anchor: String,
    pub inputs: IndexMap<String, f64>,
    pub bound_value: f64,
    pub measured_value: Option<f64>,
    pub satisfied: Option<bool>,
    /// `bound_value − measured_value`
    pub slack: Option<f64>,
}

impl BoundReport {
    pub fn new(name: &str, anchor: &str, inputs: &[(&str, f64)], bound_value: f64) -> Self {
        Self {
            name: name.to_string(),
            paper_anchor: anchor.to_string(),
            inputs: inputs.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            bound_value,
            measured_value: None,
            satisfied: None,
            slack: None,
        }
    }

    pub fn with_measured(mut self, measured: f64) -> Self {
        self.measured_value = Some(measured);
        self.satisfied = Some(measured <= self.bound_value + CHECK_TOL);
        self.slack = Some(self.bound_value - measured);
        self
    }

    pub fn with_input(mut self, key: &str, value: f64) -> Self {
        self.inputs.insert(key.to_string(), value);
        self
    }

    /// False only when a measurement exceeds the bound.
    pub fn passed(&self) -> bool {
        self.satisfied != Some(false)
    }
}

/// `sqrt(2σ² · mi / n)`; `mi` may be `I(S;W)`, `I(Λ_W(S);W)` or `H(W)`.
pub fn mi_gen_bound(sigma: f64, n: usize, mi: f64) -> f64 {
    (2.0 * sigma * sigma * mi.max(0.0) / n as f64).sqrt()
}

pub fn mi_gen_report(sigma: f64, n: usize, mi: f64) -> BoundReport {
    BoundReport::new(
        "mi_gen",
        "|gen| <= sqrt(2 sigma^2 I(S;W) / n)",
        &[("sigma", sigma), ("n", n as f64), ("mi", mi)],
        mi_gen_bound(sigma, n, mi),
    )
}

pub fn lambda_gen_report(sigma: f64, n: usize, lambda_mi: f64) -> BoundReport {
    BoundReport::new(
        "lambda_mi_gen",
        "|gen| <= sqrt(2 sigma^2 I(Lambda_W(S);W) / n)",
        &[("sigma", sigma), ("n", n as f64), ("lambda_mi", lambda_mi)],
        mi_gen_bound(sigma, n, lambda_mi),
    )
}

pub fn entropy_gen_report(sigma: f64, n: usize, entropy: f64) -> BoundReport {
    BoundReport::new(
        "entropy_gen",
        "|gen| <= sqrt(2 sigma^2 H(W) / n)",
        &[("sigma", sigma), ("n", n as f64), ("entropy", entropy)],
        mi_gen_bound(sigma, n, entropy),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleComplexityKind {
    /// Algorithm independent of the data: `(2σ²/α²) log(2/β)`.
    Independent,
    /// `(ε, μ)`-stable algorithm: `(8σ²/α²)(ε/β + log(2/β))`.
    MiStable,
}

/// Ceiling that ignores relative rounding noise below `1e-12`.
fn ceil_count(x: f64) -> u64 {
    let r = x.round();
    if (x - r).abs() <= 1e-12 * x.abs().max(1.0) {
        r as u64
    } else {
        x.ceil() as u64
    }
}

fn check_confidence(alpha: f64, beta_conf: f64) -> Result<()> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::argument(format!("accuracy alpha must be positive, got {alpha}")));
    }
    if !(beta_conf > 0.0 && beta_conf <= 1.0) {
        return Err(Error::argument(format!("confidence beta must lie in (0, 1], got {beta_conf}")));
    }
    Ok(())
}

/// Sample size guaranteeing `P[|L_μ(W) − L_S(W)| > α] ≤ β`.
pub fn sample_complexity(
    kind: SampleComplexityKind,
    sigma: f64,
    alpha: f64,
    beta_conf: f64,
    epsilon: Option<f64>,
) -> Result<u64> {
    check_confidence(alpha, beta_conf)?;
    let log_term = (2.0 / beta_conf).ln();
    let scale = sigma * sigma / (alpha * alpha);
    let value = match kind {
        SampleComplexityKind::Independent => 2.0 * scale * log_term,
        SampleComplexityKind::MiStable => {
            let eps = epsilon.ok_or_else(|| Error::argument("MI-stable sample complexity needs epsilon"))?;
            if !(eps >= 0.0) {
                return Err(Error::argument(format!("epsilon must be nonnegative, got {eps}")));
            }
            8.0 * scale * (eps / beta_conf + log_term)
        }
    };
    Ok(ceil_count(value))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthCheck {
    pub eps_ok: bool,
    pub n_ok: bool,
    /// `(g(n) − 1) β log(2/β)`
    pub eps_threshold: f64,
    /// `(8σ²/α²) log(2/β)`
    pub n_over_g_threshold: f64,
}

/// Conditions under which an algorithm with `I(S;W) ≤ ε` and a growth
/// function `g(n) ≥ 1` meets the `(α, β)` guarantee at sample size `n`.
pub fn cor1_check(g_at_n: f64, n: usize, epsilon: f64, beta_conf: f64, sigma: f64, alpha: f64) -> Result<GrowthCheck> {
    if !(g_at_n >= 1.0) {
        return Err(Error::argument(format!("growth value must be >= 1, got {g_at_n}")));
    }
    check_confidence(alpha, beta_conf)?;
    let log_term = (2.0 / beta_conf).ln();
    let eps_threshold = (g_at_n - 1.0) * beta_conf * log_term;
    let n_over_g_threshold = 8.0 * sigma * sigma / (alpha * alpha) * log_term;
    Ok(GrowthCheck {
        eps_ok: epsilon <= eps_threshold,
        n_ok: n as f64 / g_at_n >= n_over_g_threshold,
        eps_threshold,
        n_over_g_threshold,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbsGenBounds {
    /// `sqrt((2σ²/n)(ε + log 2))`
    pub thm4: f64,
    /// `σ/√n + 36 sqrt(2σ²ε/n)`
    pub russo_zou: f64,
}

pub fn abs_gen_bounds(sigma: f64, n: usize, epsilon: f64) -> AbsGenBounds {
    let n = n as f64;
    let eps = epsilon.max(0.0);
    AbsGenBounds {
        thm4: (2.0 * sigma * sigma / n * (eps + 2f64.ln())).sqrt(),
        russo_zou: sigma / n.sqrt() + 36.0 * (2.0 * sigma * sigma * eps / n).sqrt(),
    }
}

pub fn abs_gen_report(sigma: f64, n: usize, epsilon: f64) -> BoundReport {
    let b = abs_gen_bounds(sigma, n, epsilon);
    BoundReport::new(
        "abs_gen",
        "E|L_mu(W) - L_S(W)| <= sqrt((2 sigma^2 / n)(eps + log 2))",
        &[("sigma", sigma), ("n", n as f64), ("epsilon", epsilon), ("russo_zou", b.russo_zou)],
        b.thm4,
    )
}

/// `sqrt((2σ²d/n) log(2B√(dn)))`, the quantized-output bound with `r = 1/√n`.
pub fn covering_bound(sigma: f64, n: usize, d: usize, radius: f64) -> Result<f64> {
    if !(radius > 0.0) || d == 0 || n == 0 {
        return Err(Error::argument("covering bound needs B > 0, d >= 1, n >= 1"));
    }
    let (n, d) = (n as f64, d as f64);
    Ok((2.0 * sigma * sigma * d / n * (2.0 * radius * (d * n).sqrt()).ln()).sqrt())
}

/// `sqrt(V log(n1 + 1) / (2 n2))`
pub fn two_stage_bound(vc_dim: usize, n1: usize, n2: usize) -> f64 {
    (vc_dim as f64 * ((n1 + 1) as f64).ln() / (2.0 * n2 as f64)).sqrt()
}

/// `sqrt((2σ²/n)(mε + log 2m))`
pub fn monitor_bound(sigma: f64, n: usize, m: usize, epsilon: f64) -> f64 {
    let m = m as f64;
    (2.0 * sigma * sigma / n as f64 * (m * epsilon.max(0.0) + (2.0 * m).ln())).sqrt()
}

/// `D(N(w_o, a²I_d) ‖ N(w_Q, b²I_d))`
pub fn gaussian_kl(d: usize, a: f64, b: f64, w_o: &[f64], w_q: &[f64]) -> Result<f64> {
    if !(a > 0.0) || !(b > 0.0) {
        return Err(Error::argument("Gaussian widths must be positive"));
    }
    if w_o.len() != d || w_q.len() != d {
        return Err(Error::dimension(format!("points of length {} and {} in dimension {d}", w_o.len(), w_q.len())));
    }
    let r = a * a / (b * b);
    let dist2: f64 = w_o.iter().zip(w_q).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok(d as f64 / 2.0 * (r - 1.0 - r.ln()) + dist2 / (2.0 * b * b))
}

/// 64 log-spaced widths on `[1e-4, 1e2]`.
pub fn default_width_grid() -> Vec<f64> {
    (0..64).map(|i| 10f64.powf(-4.0 + 6.0 * i as f64 / 63.0)).collect()
}

/// Parameters of the Gibbs risk bounds; each variant reads only what it needs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContinuousBoundParams {
    pub d: Option<usize>,
    pub rho: Option<f64>,
    pub radius: Option<f64>,
    pub a_grid: Option<Vec<f64>>,
    pub b_width: Option<f64>,
    pub w_o: Option<Vec<f64>>,
    pub w_q: Option<Vec<f64>>,
    /// Gibbs inverse temperature.
    pub beta: Option<f64>,
    pub n: Option<usize>,
    pub epsilon: Option<f64>,
    pub sigma: Option<f64>,
    pub alpha: Option<f64>,
    /// Confidence level, kept apart from the inverse temperature.
    pub beta_conf: Option<f64>,
    pub g_at_n: Option<f64>,
    pub vc_dim: Option<usize>,
    pub m: Option<usize>,
    /// 1-based index of the population-risk minimizer.
    pub i_o: Option<usize>,
    pub k: Option<usize>,
}

fn need<T: Clone>(field: &Option<T>, name: &str, variant: &str) -> Result<T> {
    field.clone().ok_or_else(|| Error::argument(format!("{variant} needs `{name}`")))
}

fn positive(value: f64, name: &str) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::argument(format!("`{name}` must be positive, got {value}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GibbsVariant {
    /// `|gen| ≤ β/(2n)` for losses in `[0, 1]`.
    GenHoeffding,
    /// `I(S;W) ≤ 2β`.
    MiTwoBeta,
    /// Excess risk `≤ (1/β) log(1/Q(w_o)) + β/(2n)`.
    RiskCountable,
    /// Prior `Q(w_i) = 6/(π² i²)` with `β = √n`.
    RiskZipfPrior,
    /// Uniform prior on `k` hypotheses with `β = 2√(n log k)`.
    RiskUniformPrior,
    /// `ρ`-Lipschitz loss on `ℝ^d` with a Gaussian prior, infimum over a width grid.
    RiskLipschitz,
    /// The Lipschitz bound at the prescribed `b`, `β` and `a = b`.
    RiskLipschitzGaussian,
}

/// Bounds for the Gibbs algorithm. Risk variants bound the excess risk
/// `E[L_μ(W)] − inf_w L_μ(w)`.
pub fn gibbs_bound(
    params: &ContinuousBoundParams,
    q: Option<&FiniteDistribution>,
    variant: GibbsVariant,
) -> Result<BoundReport> {
    let tag = format!("{variant:?}");
    let v = tag.as_str();
    match variant {
        GibbsVariant::GenHoeffding => {
            let beta = need(&params.beta, "beta", v)?;
            let n = need(&params.n, "n", v)?;
            Ok(BoundReport::new(
                "gibbs_gen",
                "|gen| <= beta / (2n) for loss in [0,1]",
                &[("beta", beta), ("n", n as f64)],
                beta / (2.0 * n as f64),
            ))
        }
        GibbsVariant::MiTwoBeta => {
            let beta = need(&params.beta, "beta", v)?;
            Ok(BoundReport::new("gibbs_mi", "I(S;W) <= 2 beta for loss in [0,1]", &[("beta", beta)], 2.0 * beta))
        }
        GibbsVariant::RiskCountable => {
            let beta = positive(need(&params.beta, "beta", v)?, "beta")?;
            let n = need(&params.n, "n", v)?;
            let i_o = need(&params.i_o, "i_o", v)?;
            let q = q.ok_or_else(|| Error::argument(format!("{v} needs a prior q")))?;
            if i_o == 0 || i_o > q.len() {
                return Err(Error::Domain(format!("i_o = {i_o} outside 1..={}", q.len())));
            }
            let q_o = q.prob(i_o - 1);
            if q_o == 0.0 {
                return Err(Error::Support { label: q.labels()[i_o - 1].clone(), p: 1.0 });
            }
            Ok(BoundReport::new(
                "gibbs_risk_countable",
                "E[L_mu(W)] - min L_mu <= (1/beta) log(1/Q(w_o)) + beta/(2n)",
                &[("beta", beta), ("n", n as f64), ("i_o", i_o as f64), ("q_w_o", q_o)],
                -q_o.ln() / beta + beta / (2.0 * n as f64),
            ))
        }
        GibbsVariant::RiskZipfPrior => {
            let n = need(&params.n, "n", v)? as f64;
            let i_o = need(&params.i_o, "i_o", v)? as f64;
            if i_o < 1.0 {
                return Err(Error::Domain("i_o is 1-based".into()));
            }
            let beta = n.sqrt();
            let q_o = 6.0 / (std::f64::consts::PI.powi(2) * i_o * i_o);
            let general = -q_o.ln() / beta + beta / (2.0 * n);
            Ok(BoundReport::new(
                "gibbs_risk_zipf_prior",
                "E[L_mu(W)] - min L_mu <= (2 log i_o + 1)/sqrt(n) with Q(w_i) = 6/(pi^2 i^2), beta = sqrt(n)",
                &[("n", n), ("i_o", i_o), ("beta", beta), ("general_formula_value", general)],
                (2.0 * i_o.ln() + 1.0) / n.sqrt(),
            ))
        }
        GibbsVariant::RiskUniformPrior => {
            let n = need(&params.n, "n", v)? as f64;
            let k = need(&params.k, "k", v)?;
            if k < 2 {
                return Err(Error::argument("uniform-prior bound needs k >= 2"));
            }
            let log_k = (k as f64).ln();
            let beta = 2.0 * (n * log_k).sqrt();
            let general = log_k / beta + beta / (2.0 * n);
            Ok(BoundReport::new(
                "gibbs_risk_uniform_prior",
                "E[L_mu(W)] - min L_mu <= sqrt(log k / n) with uniform Q, beta = 2 sqrt(n log k)",
                &[("n", n), ("k", k as f64), ("beta", beta), ("general_formula_value", general)],
                (log_k / n).sqrt(),
            ))
        }
        GibbsVariant::RiskLipschitz => {
            let d = need(&params.d, "d", v)?;
            let rho = positive(need(&params.rho, "rho", v)?, "rho")?;
            let beta = positive(need(&params.beta, "beta", v)?, "beta")?;
            let n = need(&params.n, "n", v)?;
            let b = positive(need(&params.b_width, "b_width", v)?, "b_width")?;
            let w_o = need(&params.w_o, "w_o", v)?;
            let w_q = need(&params.w_q, "w_q", v)?;
            let grid = params.a_grid.clone().unwrap_or_else(default_width_grid);
            if grid.is_empty() {
                return Err(Error::argument("empty width grid"));
            }
            let mut best = (f64::INFINITY, f64::NAN);
            for &a in &grid {
                let a = positive(a, "a")?;
                let term = a * rho * (d as f64).sqrt() + gaussian_kl(d, a, b, &w_o, &w_q)? / beta;
                if term < best.0 {
                    best = (term, a);
                }
            }
            Ok(BoundReport::new(
                "gibbs_risk_lipschitz",
                "E[L_mu(W)] - min L_mu <= beta/(2n) + inf_a (a rho sqrt(d) + (1/beta) D(N(w_o, a^2 I) || N(w_Q, b^2 I)))",
                &[
                    ("d", d as f64),
                    ("rho", rho),
                    ("beta", beta),
                    ("n", n as f64),
                    ("b_width", b),
                    ("a_best", best.1),
                ],
                beta / (2.0 * n as f64) + best.0,
            ))
        }
        GibbsVariant::RiskLipschitzGaussian => {
            let d = need(&params.d, "d", v)?;
            let rho = positive(need(&params.rho, "rho", v)?, "rho")?;
            let n = need(&params.n, "n", v)? as f64;
            let w_o = need(&params.w_o, "w_o", v)?;
            let w_q = need(&params.w_q, "w_q", v)?;
            if w_o.len() != d || w_q.len() != d {
                return Err(Error::dimension("w_o and w_q must have length d"));
            }
            let dist2: f64 = w_o.iter().zip(&w_q).map(|(x, y)| (x - y) * (x - y)).sum();
            let df = d as f64;
            Ok(BoundReport::new(
                "gibbs_risk_lipschitz_gaussian",
                "E[L_mu(W)] - min L_mu <= d^(1/4) rho^(1/2) / (2 n^(1/4)) (||w_Q - w_o||^2 + 3)",
                &[
                    ("d", df),
                    ("rho", rho),
                    ("n", n),
                    ("b_width", (n * df).powf(-0.25) / rho.sqrt()),
                    ("beta", n.powf(0.75) * df.powf(0.25) * rho.sqrt()),
                ],
                df.powf(0.25) * rho.sqrt() / (2.0 * n.powf(0.25)) * (dist2 + 3.0),
            ))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoisyErmVariant {
    /// `min + b_{i_o} + sqrt((1/2n) Σ L_μ(w_i)/b_i) − (Σ 1/b_i)^{-1}`
    General,
    /// `b_i = i^{1.1}/n^{1/3}`: `min + (i_o^{1.1} + 3)/n^{1/3}`.
    PowerLaw,
}

/// Bound on `E[L_μ(W)]` for noisy ERM with exponential noise means `b`.
///
/// `i_o` is 1-based; for the general variant it defaults to the population
/// minimizer. Without population risks the power-law variant reports the
/// excess term alone.
pub fn noisy_erm_bound(
    pop_risks: &[f64],
    b: &[f64],
    n: usize,
    i_o: Option<usize>,
    variant: NoisyErmVariant,
) -> Result<BoundReport> {
    let min = pop_risks.iter().copied().fold(f64::INFINITY, f64::min);
    match variant {
        NoisyErmVariant::General => {
            if pop_risks.is_empty() || pop_risks.len() != b.len() {
                return Err(Error::dimension(format!("{} risks for {} noise means", pop_risks.len(), b.len())));
            }
            if let Some(bad) = b.iter().find(|x| !(**x > 0.0)) {
                return Err(Error::argument(format!("noise means must be positive, got {bad}")));
            }
            let argmin = pop_risks.iter().enumerate().min_by(|x, y| x.1.total_cmp(y.1)).unwrap().0 + 1;
            let i_o = i_o.unwrap_or(argmin);
            if i_o == 0 || i_o > b.len() {
                return Err(Error::Domain(format!("i_o = {i_o} outside 1..={}", b.len())));
            }
            let ratio: f64 = pop_risks.iter().zip(b).map(|(l, bi)| l / bi).sum();
            let harmonic = 1.0 / b.iter().map(|bi| 1.0 / bi).sum::<f64>();
            let excess = b[i_o - 1] + (ratio / (2.0 * n as f64)).sqrt() - harmonic;
            Ok(BoundReport::new(
                "noisy_erm_risk",
                "E[L_mu(W)] <= min L_mu + b_io + sqrt((1/2n) sum L_mu(w_i)/b_i) - (sum 1/b_i)^-1",
                &[("n", n as f64), ("i_o", i_o as f64), ("min_risk", min), ("excess", excess)],
                min + excess,
            ))
        }
        NoisyErmVariant::PowerLaw => {
            let i_o = i_o.ok_or_else(|| Error::argument("power-law variant needs i_o"))?;
            if i_o == 0 {
                return Err(Error::Domain("i_o is 1-based".into()));
            }
            let excess = ((i_o as f64).powf(1.1) + 3.0) / (n as f64).cbrt();
            let min = if pop_risks.is_empty() { 0.0 } else { min };
            Ok(BoundReport::new(
                "noisy_erm_risk_power_law",
                "E[L_mu(W)] <= min L_mu + (i_o^1.1 + 3)/n^(1/3) with b_i = i^1.1/n^(1/3)",
                &[("n", n as f64), ("i_o", i_o as f64), ("min_risk", min), ("excess", excess)],
                min + excess,
            ))
        }
    }
}

/// Noise means `b_i = i^{1.1}/n^{1/3}` for `i = 1..=k`.
pub fn power_law_noise(k: usize, n: usize) -> Vec<f64> {
    (1..=k).map(|i| (i as f64).powf(1.1) / (n as f64).cbrt()).collect()
}

/// `Σ_i log(1 + L_μ(w_i)/b_i)`, an upper bound on `I(S;W)` for noisy ERM.
pub fn capacity_chain(pop_risks: &[f64], b: &[f64]) -> Result<f64> {
    if pop_risks.len() != b.len() {
        return Err(Error::dimension(format!("{} risks for {} noise means", pop_risks.len(), b.len())));
    }
    pop_risks.iter().zip(b).map(|(&l, &bi)| exp_channel_capacity_term(l, bi)).sum()
}

pub fn capacity_chain_report(pop_risks: &[f64], b: &[f64]) -> Result<BoundReport> {
    Ok(BoundReport::new(
        "noisy_erm_mi",
        "I(S;W) <= sum_i log(1 + L_mu(w_i)/b_i)",
        &[("k", b.len() as f64)],
        capacity_chain(pop_risks, b)?,
    ))
}

pub fn two_stage_report(vc_dim: usize, n1: usize, n2: usize) -> BoundReport {
    BoundReport::new(
        "two_stage_gen",
        "E[L_mu(W)] - E[L_S2(W)] <= sqrt(V log(n1 + 1) / (2 n2))",
        &[("vc_dim", vc_dim as f64), ("n1", n1 as f64), ("n2", n2 as f64)],
        two_stage_bound(vc_dim, n1, n2),
    )
}

pub fn monitor_report(sigma: f64, n: usize, m: usize, epsilon: f64) -> BoundReport {
    BoundReport::new(
        "monitor_max_abs_gen",
        "E[max_t |L_mu(W_t) - L_St(W_t)|] <= sqrt((2 sigma^2 / n)(m eps + log 2m))",
        &[("sigma", sigma), ("n", n as f64), ("m", m as f64), ("epsilon", epsilon)],
        monitor_bound(sigma, n, m, epsilon),
    )
}

pub fn covering_report(sigma: f64, n: usize, d: usize, radius: f64) -> Result<BoundReport> {
    Ok(BoundReport::new(
        "covering_gen",
        "|gen| <= sqrt((2 sigma^2 d / n) log(2 B sqrt(d n)))",
        &[("sigma", sigma), ("n", n as f64), ("d", d as f64), ("radius", radius)],
        covering_bound(sigma, n, d, radius)?,
    ))
}

pub fn sample_complexity_report(
    kind: SampleComplexityKind,
    sigma: f64,
    alpha: f64,
    beta_conf: f64,
    epsilon: Option<f64>,
) -> Result<BoundReport> {
    let n = sample_complexity(kind, sigma, alpha, beta_conf, epsilon)?;
    let (name, anchor) = match kind {
        SampleComplexityKind::Independent => ("sample_complexity_independent", "n = (2 sigma^2 / alpha^2) log(2/beta)"),
        SampleComplexityKind::MiStable => {
            ("sample_complexity_mi_stable", "n = (8 sigma^2 / alpha^2)(eps/beta + log(2/beta))")
        }
    };
    let mut report = BoundReport::new(name, anchor, &[("sigma", sigma), ("alpha", alpha), ("beta_conf", beta_conf)], n as f64);
    if let Some(eps) = epsilon {
        report = report.with_input("epsilon", eps);
    }
    Ok(report)
}
