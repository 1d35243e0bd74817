//! Experiment configuration: JSON, unknown fields rejected.
//!
//! ```json
//! {
//!   "problem": { "mu": [0.5, 0.5], "loss": { "numerators": [[0, 1], [1, 0]], "denominator": 1 }, "n": 2 },
//!   "algorithm": { "kind": "gibbs", "beta": 2.0 },
//!   "analysis": { "bounds": ["mi_gen", "abs_gen"], "trials": 10000, "seed": 7 },
//!   "output": { "format": "json" }
//! }
//! ```

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::algorithms::{
    erm_kernel, gibbs_kernel, noisy_erm_kernel, HypothesisClassTable, InputArity, NoisyErmMode, StochasticKernel,
    TieRule,
};
use crate::bounds::{power_law_noise, ContinuousBoundParams};
use crate::risk::LossTable;
use crate::spaces::{DatasetSpace, FiniteDistribution};
use crate::sweep::SweepShape;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub problem: Option<ProblemConfig>,
    #[serde(default)]
    pub algorithm: Option<AlgorithmConfig>,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    /// Probabilities of the instances `z = 0..|Z|`.
    pub mu: Vec<f64>,
    #[serde(default)]
    pub labels: Option<Vec<String>>,
    #[serde(default)]
    pub loss: Option<LossConfig>,
    #[serde(default)]
    pub n: Option<usize>,
    /// Subgaussian parameter; defaults to `(b − a)/2` of the loss range.
    #[serde(default)]
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossConfig {
    /// `numerators[w][z]`; the loss is `numerators[w][z] / denominator`.
    pub numerators: Vec<Vec<i64>>,
    pub denominator: u64,
    /// Loss range as numerators; defaults to `[0, denominator]`.
    #[serde(default)]
    pub bounds: Option<[i64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AlgorithmConfig {
    Erm {
        #[serde(default = "default_tie")]
        tie_rule: TieRule,
    },
    Gibbs {
        beta: f64,
        /// Prior over hypotheses; uniform when absent.
        #[serde(default)]
        q: Option<Vec<f64>>,
    },
    NoisyErm {
        #[serde(default)]
        noise_means: Option<Vec<f64>>,
        /// Use `b_i = i^{1.1}/n^{1/3}` instead of explicit means.
        #[serde(default)]
        power_law_noise: bool,
        /// Estimate selection probabilities by sampling instead of exactly.
        #[serde(default)]
        monte_carlo_samples: Option<u64>,
    },
    /// Every dataset gets the same output distribution.
    Independent { row: Vec<f64> },
    /// Explicit rows, one per dataset code.
    Kernel { rows: Vec<Vec<f64>> },
    TwoStage {
        class: ClassConfig,
        n1: usize,
        n2: usize,
        #[serde(default = "default_tie")]
        tie_rule: TieRule,
    },
    Compose { stages: Vec<StageConfig> },
}

fn default_tie() -> TieRule {
    TieRule::LowestIndex
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassFamily {
    Thresholds,
    Intervals,
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassConfig {
    #[serde(default)]
    pub family: Option<ClassFamily>,
    /// Domain size for a named family.
    #[serde(default)]
    pub m: Option<usize>,
    /// Explicit truth table `truth[w][x]`.
    #[serde(default)]
    pub truth: Option<Vec<Vec<u8>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StageConfig {
    /// A dataset-only algorithm that ignores earlier outputs.
    Data { algorithm: Box<AlgorithmConfig> },
    /// Rows indexed by `dataset + |Z|^n · prior_code`.
    Adaptive { rows: Vec<Vec<f64>> },
    /// Rows indexed by the prior output code only.
    Post { rows: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundName {
    MiGen,
    LambdaMiGen,
    EntropyGen,
    AbsGen,
    SampleComplexityIndependent,
    SampleComplexityMiStable,
    GrowthCheck,
    Covering,
    TwoStage,
    Monitor,
    GibbsGen,
    GibbsMi,
    GibbsRiskCountable,
    GibbsRiskZipfPrior,
    GibbsRiskUniformPrior,
    GibbsRiskLipschitz,
    GibbsRiskLipschitzGaussian,
    NoisyErmGeneral,
    NoisyErmPowerLaw,
    CapacityChain,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Checks to run; each subcommand has its own default set.
    #[serde(default)]
    pub bounds: Option<Vec<BoundName>>,
    #[serde(default)]
    pub trials: Option<u64>,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Number of monitored copies.
    #[serde(default)]
    pub m: Option<usize>,
    /// Tail thresholds for Monte Carlo estimates.
    #[serde(default)]
    pub alphas: Option<Vec<f64>>,
    /// Parameters of closed-form bounds evaluated by `bound`.
    #[serde(default)]
    pub params: ContinuousBoundParams,
    /// Prior for Gibbs risk formulas evaluated by `bound`.
    #[serde(default)]
    pub q: Option<Vec<f64>>,
    /// Population risks for noisy ERM formulas evaluated by `bound`.
    #[serde(default)]
    pub pop_risks: Option<Vec<f64>>,
    #[serde(default)]
    pub noise_means: Option<Vec<f64>>,
    /// Number of random problems for `sweep`.
    #[serde(default)]
    pub problems: Option<u64>,
    /// Split sizes for the two-stage formula evaluated by `bound`.
    #[serde(default)]
    pub n1: Option<usize>,
    #[serde(default)]
    pub n2: Option<usize>,
    #[serde(default)]
    pub shape: Option<SweepShape>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub format: Option<Format>,
    #[serde(default)]
    pub path: Option<PathBuf>,
}

/// A configuration problem, located by a field path such as `algorithm.beta`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.path.is_empty() || self.path == "." {
            write!(f, "config error: {}", self.message)
        } else {
            write!(f, "config error at `{}`: {}", self.path, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

pub(crate) fn at(path: &str, message: impl std::fmt::Display) -> ConfigError {
    ConfigError { path: path.to_string(), message: message.to_string() }
}

/// Parses a config; syntax errors carry line and column, schema errors the field path.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        match inner.classify() {
            serde_json::error::Category::Data => at(&path, inner),
            _ => at("", format!("malformed JSON: {inner}")),
        }
    })?;
    config.validate()?;
    Ok(config)
}

fn check_probs(path: &str, probs: &[f64]) -> Result<(), ConfigError> {
    if probs.is_empty() {
        return Err(at(path, "must not be empty"));
    }
    for (i, p) in probs.iter().enumerate() {
        if !p.is_finite() || *p < 0.0 {
            return Err(at(&format!("{path}[{i}]"), format!("probability must be finite and nonnegative, got {p}")));
        }
    }
    FiniteDistribution::from_probs(probs.to_vec()).map(|_| ()).map_err(|e| at(path, e.to_string()))
}

fn check_rows(path: &str, rows: &[Vec<f64>]) -> Result<(), ConfigError> {
    if rows.is_empty() {
        return Err(at(path, "must not be empty"));
    }
    for (i, row) in rows.iter().enumerate() {
        check_probs(&format!("{path}[{i}]"), row)?;
        if row.len() != rows[0].len() {
            return Err(at(&format!("{path}[{i}]"), format!("expected {} entries, got {}", rows[0].len(), row.len())));
        }
    }
    Ok(())
}

impl ExperimentConfig {
    /// Shape checks that need no computation.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if let Some(p) = &self.problem {
            check_probs("problem.mu", &p.mu)?;
            if p.n == Some(0) {
                return Err(at("problem.n", "sample size must be at least 1"));
            }
            if let Some(labels) = &p.labels {
                if labels.len() != p.mu.len() {
                    return Err(at("problem.labels", format!("expected {} labels, got {}", p.mu.len(), labels.len())));
                }
            }
            if let Some(loss) = &p.loss {
                if loss.denominator == 0 {
                    return Err(at("problem.loss.denominator", "must be positive"));
                }
                if loss.numerators.is_empty() {
                    return Err(at("problem.loss.numerators", "needs at least one hypothesis"));
                }
                for (w, row) in loss.numerators.iter().enumerate() {
                    if row.len() != p.mu.len() {
                        return Err(at(
                            &format!("problem.loss.numerators[{w}]"),
                            format!("expected {} entries (one per instance), got {}", p.mu.len(), row.len()),
                        ));
                    }
                }
            }
            if let Some(s) = p.sigma {
                if !(s >= 0.0) || !s.is_finite() {
                    return Err(at("problem.sigma", format!("must be finite and nonnegative, got {s}")));
                }
            }
        }
        if let Some(a) = &self.algorithm {
            validate_algorithm("algorithm", a)?;
        }
        if self.analysis.trials == Some(0) {
            return Err(at("analysis.trials", "must be at least 1"));
        }
        if self.analysis.m == Some(0) {
            return Err(at("analysis.m", "must be at least 1"));
        }
        Ok(())
    }
}

fn validate_algorithm(path: &str, a: &AlgorithmConfig) -> Result<(), ConfigError> {
    match a {
        AlgorithmConfig::Erm { .. } => Ok(()),
        AlgorithmConfig::Gibbs { beta, q } => {
            if !(*beta >= 0.0) || !beta.is_finite() {
                return Err(at(&format!("{path}.beta"), format!("must be finite and nonnegative, got {beta}")));
            }
            match q {
                Some(q) => check_probs(&format!("{path}.q"), q),
                None => Ok(()),
            }
        }
        AlgorithmConfig::NoisyErm { noise_means, power_law_noise, monte_carlo_samples } => {
            match (noise_means, power_law_noise) {
                (Some(_), true) => {
                    return Err(at(path, "give either `noise_means` or `power_law_noise`, not both"));
                }
                (None, false) => return Err(at(path, "needs `noise_means` or `power_law_noise: true`")),
                (Some(b), false) => {
                    for (i, x) in b.iter().enumerate() {
                        if !(*x > 0.0) || !x.is_finite() {
                            return Err(at(&format!("{path}.noise_means[{i}]"), format!("must be positive, got {x}")));
                        }
                    }
                }
                (None, true) => {}
            }
            if *monte_carlo_samples == Some(0) {
                return Err(at(&format!("{path}.monte_carlo_samples"), "must be at least 1"));
            }
            Ok(())
        }
        AlgorithmConfig::Independent { row } => check_probs(&format!("{path}.row"), row),
        AlgorithmConfig::Kernel { rows } => check_rows(&format!("{path}.rows"), rows),
        AlgorithmConfig::TwoStage { class, n1, n2, .. } => {
            if *n1 == 0 || *n2 == 0 {
                return Err(at(path, "split sizes n1 and n2 must be at least 1"));
            }
            match (&class.family, &class.truth) {
                (Some(_), Some(_)) => Err(at(&format!("{path}.class"), "give either `family` or `truth`, not both")),
                (None, None) => Err(at(&format!("{path}.class"), "needs `family` and `m`, or `truth`")),
                (Some(_), None) if class.m.is_none() => Err(at(&format!("{path}.class.m"), "required with `family`")),
                _ => Ok(()),
            }
        }
        AlgorithmConfig::Compose { stages } => {
            if stages.is_empty() {
                return Err(at(&format!("{path}.stages"), "needs at least one stage"));
            }
            for (j, stage) in stages.iter().enumerate() {
                let p = format!("{path}.stages[{j}]");
                match stage {
                    StageConfig::Data { algorithm } => {
                        if matches!(**algorithm, AlgorithmConfig::Compose { .. } | AlgorithmConfig::TwoStage { .. }) {
                            return Err(at(&format!("{p}.algorithm.kind"), "must be a dataset-level algorithm"));
                        }
                        validate_algorithm(&format!("{p}.algorithm"), algorithm)?;
                    }
                    StageConfig::Adaptive { rows } | StageConfig::Post { rows } => check_rows(&format!("{p}.rows"), rows)?,
                }
            }
            Ok(())
        }
    }
}

/// A problem with its distribution and loss built and checked.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub mu: FiniteDistribution,
    pub loss: Option<LossTable>,
    pub n: Option<usize>,
    pub sigma: Option<f64>,
}

impl Problem {
    pub fn loss(&self) -> Result<&LossTable, ConfigError> {
        self.loss.as_ref().ok_or_else(|| at("problem.loss", "required by this command"))
    }

    pub fn n(&self) -> Result<usize, ConfigError> {
        self.n.ok_or_else(|| at("problem.n", "required by this command"))
    }

    /// The configured σ, else `(b − a)/2` of the loss range.
    pub fn sigma(&self) -> Result<f64, ConfigError> {
        match self.sigma {
            Some(s) => Ok(s),
            None => Ok(self.loss()?.hoeffding_sigma()),
        }
    }
}

impl ProblemConfig {
    pub fn build(&self) -> crate::Result<Problem> {
        let mu = match &self.labels {
            Some(labels) => FiniteDistribution::new(labels.clone(), self.mu.clone())?,
            None => FiniteDistribution::from_probs(self.mu.clone())?,
        };
        let loss = match &self.loss {
            Some(l) => {
                let bounds = l.bounds.map_or((0, l.denominator as i64), |[a, b]| (a, b));
                Some(LossTable::new(l.numerators.clone(), l.denominator, bounds)?)
            }
            None => None,
        };
        Ok(Problem { mu, loss, n: self.n, sigma: self.sigma })
    }
}

/// Failure to build an algorithm: a located config problem or a library error.
#[derive(Debug, Clone, PartialEq)]
pub enum BuildError {
    Config(ConfigError),
    Library(crate::Error),
}

impl From<ConfigError> for BuildError {
    fn from(e: ConfigError) -> Self {
        BuildError::Config(e)
    }
}

impl From<crate::Error> for BuildError {
    fn from(e: crate::Error) -> Self {
        BuildError::Library(e)
    }
}

/// Builds the dataset-level kernel of a non-composite algorithm.
pub fn build_kernel(algorithm: &AlgorithmConfig, problem: &Problem, seed: u64) -> Result<StochasticKernel, BuildError> {
    let (z, n) = (problem.mu.len(), problem.n()?);
    let arity = InputArity::Datasets { z_size: z, n };
    Ok(match algorithm {
        AlgorithmConfig::Erm { tie_rule } => erm_kernel(problem.loss()?, n, *tie_rule)?,
        AlgorithmConfig::Gibbs { beta, q } => {
            let q = match q {
                Some(q) => FiniteDistribution::from_probs(q.clone())?,
                None => FiniteDistribution::uniform(problem.loss()?.num_hypotheses())?,
            };
            gibbs_kernel(problem.loss()?, n, *beta, &q)?
        }
        AlgorithmConfig::NoisyErm { .. } => {
            let b = noise_means(algorithm, problem)?.expect("noisy ERM");
            let mode = match algorithm {
                AlgorithmConfig::NoisyErm { monte_carlo_samples: Some(samples), .. } => {
                    NoisyErmMode::MonteCarlo { samples: *samples, seed }
                }
                _ => NoisyErmMode::Exact,
            };
            noisy_erm_kernel(problem.loss()?, n, &b, mode)?
        }
        AlgorithmConfig::Independent { row } => {
            let datasets = DatasetSpace::new(z, n)?.len();
            StochasticKernel::new(vec![row.clone(); datasets], arity)?
        }
        AlgorithmConfig::Kernel { rows } => StochasticKernel::new(rows.clone(), arity)?,
        AlgorithmConfig::TwoStage { .. } | AlgorithmConfig::Compose { .. } => {
            return Err(at("algorithm.kind", "two-stage and composite algorithms have their own subcommands").into())
        }
    })
}

/// Noise means of a noisy ERM algorithm, expanding the power-law schedule.
pub fn noise_means(algorithm: &AlgorithmConfig, problem: &Problem) -> Result<Option<Vec<f64>>, ConfigError> {
    Ok(match algorithm {
        AlgorithmConfig::NoisyErm { noise_means: Some(b), .. } => Some(b.clone()),
        AlgorithmConfig::NoisyErm { power_law_noise: true, .. } => {
            Some(power_law_noise(problem.loss()?.num_hypotheses(), problem.n()?))
        }
        _ => None,
    })
}

impl ClassConfig {
    pub fn build(&self) -> crate::Result<HypothesisClassTable> {
        match (&self.family, self.m, &self.truth) {
            (Some(ClassFamily::Thresholds), Some(m), None) => Ok(HypothesisClassTable::thresholds(m)),
            (Some(ClassFamily::Intervals), Some(m), None) => Ok(HypothesisClassTable::intervals(m)),
            (Some(ClassFamily::Full), Some(m), None) => Ok(HypothesisClassTable::full(m)),
            (None, _, Some(truth)) => HypothesisClassTable::new(truth.clone()),
            _ => Err(crate::Error::Argument("class needs `family` and `m`, or `truth`".into())),
        }
    }
}
