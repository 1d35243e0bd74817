//! Batch front-end: read a JSON experiment, run the requested analysis and
//! write one report document.
//!
//! Exit codes: 0 when every bound check holds, 1 for I/O failures, 2 for
//! configuration errors, 3 when a problem is too large to enumerate and 4
//! when a measured value violates its bound.

pub mod config;
pub mod report;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};

use crate::algorithms::{
    compose_adaptive, two_stage_kernel, vc_stats, CompositionPlan, InputArity, Stage, StochasticKernel,
};
use crate::bounds::{
    abs_gen_report, capacity_chain_report, cor1_check, covering_report, entropy_gen_report, gibbs_bound,
    lambda_gen_report, mi_gen_report, monitor_report, noisy_erm_bound, sample_complexity_report, two_stage_report,
    BoundReport, ContinuousBoundParams, GibbsVariant, NoisyErmVariant, SampleComplexityKind,
};
use crate::info::{entropy, io_mutual_information, lambda_mutual_information};
use crate::montecarlo::{estimate_gen, monitor_experiment, parallel_lambda_mi};
use crate::risk::{exact_risk_summary, population_risks, LossTable, RiskSummary};
use crate::spaces::{DatasetSpace, FiniteDistribution};
use crate::sweep::run_sweep;
use config::{
    at, build_kernel, noise_means, parse_config, AlgorithmConfig, BoundName, BuildError, ConfigError, ExperimentConfig,
    Format, Problem, StageConfig,
};
use report::{emit, Report, ReportDocument};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;
pub const EXIT_VIOLATION: i32 = 4;

/// Environment variable holding the worker-thread count.
pub const WORKERS_ENV: &str = "GENBOUND_WORKERS";

const DEFAULT_TRIALS: u64 = 10_000;
const DEFAULT_MONITOR_M: usize = 4;
const DEFAULT_SWEEP_PROBLEMS: u64 = 1000;
const DEFAULT_ALPHAS: [f64; 3] = [0.05, 0.1, 0.2];

#[derive(Debug, Parser)]
#[command(name = "genbound", version, about = "Exact mutual-information generalization bounds over finite spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// JSON experiment file
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Monte Carlo trials
    #[arg(long, global = true)]
    pub trials: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Report file; stdout when absent
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Leave out the generation time so reruns are byte-identical
    #[arg(long, global = true)]
    pub no_timestamp: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Mutual information and the bounds built on it
    Mi,
    /// Evaluate closed-form bounds from `analysis.params`
    Bound,
    /// Exact risk summary, optionally with Monte Carlo estimates
    Risk,
    /// Gibbs algorithm bounds
    Gibbs,
    /// Noisy ERM risk and capacity bounds
    NoisyErm,
    /// Two-stage classifier over a hypothesis class
    TwoStage,
    /// Adaptive composition chain rule
    Compose,
    /// Monitor over m independent runs
    Monitor,
    /// Certify random problems
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Mi => "mi",
            Command::Bound => "bound",
            Command::Risk => "risk",
            Command::Gibbs => "gibbs",
            Command::NoisyErm => "noisy-erm",
            Command::TwoStage => "two-stage",
            Command::Compose => "compose",
            Command::Monitor => "monitor",
            Command::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    Config(String),
    Capacity(String),
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => EXIT_CONFIG,
            Failure::Capacity(_) => EXIT_CAPACITY,
            Failure::Io(_) => EXIT_IO,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Capacity(m) | Failure::Io(m) => m,
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<crate::Error> for Failure {
    fn from(e: crate::Error) -> Self {
        match e {
            crate::Error::Capacity { .. } => Failure::Capacity(e.to_string()),
            other => Failure::Config(other.to_string()),
        }
    }
}

impl From<BuildError> for Failure {
    fn from(e: BuildError) -> Self {
        match e {
            BuildError::Config(c) => c.into(),
            BuildError::Library(l) => l.into(),
        }
    }
}

/// Sizes the global worker pool from `GENBOUND_WORKERS` when it is set.
pub fn configure_workers() -> Result<(), Failure> {
    let Ok(value) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let workers: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|w| *w > 0)
        .ok_or_else(|| Failure::Config(format!("{WORKERS_ENV} must be a positive integer, got `{value}`")))?;
    // A pool that already exists keeps its size.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(workers).build_global();
    Ok(())
}

/// Options after merging the config with command-line overrides.
#[derive(Debug, Clone)]
pub struct Settings {
    pub seed: u64,
    pub trials: Option<u64>,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub timestamp: bool,
}

impl Settings {
    pub fn resolve(config: &ExperimentConfig, flags: &Flags) -> Self {
        Settings {
            seed: flags.seed.or(config.analysis.seed).unwrap_or(0),
            trials: flags.trials.or(config.analysis.trials),
            format: flags.format.or(config.output.format).unwrap_or_default(),
            out: flags.out.clone().or_else(|| config.output.path.clone()),
            timestamp: !flags.no_timestamp,
        }
    }
}

pub fn load_config(path: Option<&Path>) -> Result<ExperimentConfig, Failure> {
    match path {
        None => Ok(ExperimentConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Failure::Io(format!("cannot read {}: {e}", p.display())))?;
            parse_config(&text).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))
        }
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    match execute(cli, stdout) {
        Ok(doc) => {
            if doc.all_passed() {
                EXIT_OK
            } else {
                for r in &doc.reports {
                    if let Report::Bound(b) = r {
                        if !b.passed() {
                            let _ = writeln!(
                                stderr,
                                "bound violated: {} measured {} > bound {}",
                                b.name,
                                b.measured_value.map_or("none".to_string(), |v| v.to_string()),
                                b.bound_value
                            );
                        }
                    }
                }
                EXIT_VIOLATION
            }
        }
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message());
            f.exit_code()
        }
    }
}

/// Builds and writes the report document.
pub fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<ReportDocument, Failure> {
    configure_workers()?;
    let config = load_config(cli.flags.config.as_deref())?;
    let settings = Settings::resolve(&config, &cli.flags);
    let mut doc = build_document(cli.command, &config, &settings)?;
    if settings.timestamp {
        doc.generated_at_unix = Some(SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()));
    }
    let bytes = emit(&doc, settings.format).map_err(|e| Failure::Io(e.to_string()))?;
    match &settings.out {
        Some(path) => {
            std::fs::write(path, &bytes).map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))?
        }
        None => stdout.write_all(&bytes).map_err(|e| Failure::Io(e.to_string()))?,
    }
    Ok(doc)
}

/// Computes the reports of `command` without writing them.
pub fn build_document(command: Command, config: &ExperimentConfig, settings: &Settings) -> Result<ReportDocument, Failure> {
    let (reports, seeded) = match command {
        Command::Mi => (run_mi(config, settings)?, false),
        Command::Bound => (run_bound(config)?, false),
        Command::Risk => (run_risk(config, settings)?, settings.trials.is_some()),
        Command::Gibbs => (run_gibbs(config, settings)?, false),
        Command::NoisyErm => (run_noisy_erm(config, settings)?, uses_sampled_noise(config)),
        Command::TwoStage => (run_two_stage(config)?, false),
        Command::Compose => (run_compose(config, settings)?, false),
        Command::Monitor => (run_monitor(config, settings)?, true),
        Command::Sweep => (run_sweep_command(config, settings)?, true),
    };
    let mut doc = ReportDocument::new(command.name(), reports);
    if seeded {
        doc.seed = Some(settings.seed);
    }
    Ok(doc)
}

fn uses_sampled_noise(config: &ExperimentConfig) -> bool {
    matches!(config.algorithm, Some(AlgorithmConfig::NoisyErm { monte_carlo_samples: Some(_), .. }))
}

fn problem(config: &ExperimentConfig) -> Result<Problem, Failure> {
    let p = config.problem.as_ref().ok_or_else(|| at("problem", "required by this command"))?;
    Ok(p.build()?)
}

fn algorithm(config: &ExperimentConfig) -> Result<&AlgorithmConfig, Failure> {
    Ok(config.algorithm.as_ref().ok_or_else(|| at("algorithm", "required by this command"))?)
}

/// Requested checks, or `defaults` when the config names none.
fn requested(config: &ExperimentConfig, defaults: &[BoundName], allowed: &[BoundName], command: Command) -> Result<Vec<BoundName>, Failure> {
    match &config.analysis.bounds {
        None => Ok(defaults.to_vec()),
        Some(names) => {
            for (i, name) in names.iter().enumerate() {
                if !allowed.contains(name) {
                    return Err(at(&format!("analysis.bounds[{i}]"), format!("{name:?} is not available for `{}`", command.name())).into());
                }
            }
            Ok(names.clone())
        }
    }
}

fn unit_loss(loss: &LossTable) -> bool {
    let (a, b) = loss.bounds();
    a >= 0.0 && b <= 1.0
}

fn need_unit_loss(loss: &LossTable, name: BoundName) -> Result<(), Failure> {
    if unit_loss(loss) {
        Ok(())
    } else {
        Err(at("problem.loss.bounds", format!("{name:?} needs losses in [0, 1]")).into())
    }
}

/// Exact quantities shared by the kernel-level commands.
struct Exact {
    sigma: f64,
    n: usize,
    io_mi: f64,
    lambda_mi: f64,
    output_entropy: f64,
    summary: RiskSummary,
}

fn exact(problem: &Problem, kernel: &StochasticKernel) -> Result<Exact, Failure> {
    let n = problem.n()?;
    let loss = problem.loss()?;
    let probs = DatasetSpace::new(problem.mu.len(), n)?.probabilities(&problem.mu)?;
    Ok(Exact {
        sigma: problem.sigma()?,
        n,
        io_mi: io_mutual_information(&problem.mu, n, kernel)?,
        lambda_mi: lambda_mutual_information(&problem.mu, n, kernel, loss)?,
        output_entropy: entropy(&FiniteDistribution::from_weights(&kernel.output_marginal(&probs))?),
        summary: exact_risk_summary(&problem.mu, n, kernel, loss)?,
    })
}

const GEN_CHECKS: [BoundName; 4] = [BoundName::MiGen, BoundName::LambdaMiGen, BoundName::EntropyGen, BoundName::AbsGen];

fn gen_check(name: BoundName, e: &Exact) -> Option<BoundReport> {
    let gen = e.summary.gen_error.abs();
    Some(match name {
        BoundName::MiGen => mi_gen_report(e.sigma, e.n, e.io_mi).with_measured(gen),
        BoundName::LambdaMiGen => lambda_gen_report(e.sigma, e.n, e.lambda_mi).with_measured(gen),
        BoundName::EntropyGen => entropy_gen_report(e.sigma, e.n, e.output_entropy).with_measured(gen),
        BoundName::AbsGen => abs_gen_report(e.sigma, e.n, e.lambda_mi).with_measured(e.summary.abs_gen_error),
        _ => return None,
    })
}

fn dataset_kernel(config: &ExperimentConfig, problem: &Problem, settings: &Settings) -> Result<StochasticKernel, Failure> {
    Ok(build_kernel(algorithm(config)?, problem, settings.seed)?)
}

fn run_mi(config: &ExperimentConfig, settings: &Settings) -> Result<Vec<Report>, Failure> {
    let p = problem(config)?;
    let kernel = dataset_kernel(config, &p, settings)?;
    let e = exact(&p, &kernel)?;
    let names = requested(config, &GEN_CHECKS[..3], &GEN_CHECKS, Command::Mi)?;
    Ok(names.into_iter().filter_map(|n| gen_check(n, &e)).map(Report::Bound).collect())
}

fn run_risk(config: &ExperimentConfig, settings: &Settings) -> Result<Vec<Report>, Failure> {
    let p = problem(config)?;
    let kernel = dataset_kernel(config, &p, settings)?;
    let e = exact(&p, &kernel)?;
    let mut reports = vec![Report::risk("exact", e.summary.clone())];
    let names = requested(config, &[BoundName::MiGen, BoundName::AbsGen], &GEN_CHECKS, Command::Risk)?;
    reports.extend(names.into_iter().filter_map(|n| gen_check(n, &e)).map(Report::Bound));
    if let Some(trials) = settings.trials {
        let alphas = config.analysis.alphas.clone().unwrap_or_else(|| DEFAULT_ALPHAS.to_vec());
        let est = estimate_gen(&p.mu, e.n, &kernel, p.loss()?, trials, settings.seed, &alphas)?;
        reports.push(Report::estimate("gen", est.gen));
        reports.push(Report::estimate("abs_gen", est.abs_gen));
        for t in est.tail {
            reports.push(Report::estimate(&format!("tail_alpha_{}", t.alpha), t.estimate));
        }
    }
    Ok(reports)
}

fn argmin(values: &[f64]) -> usize {
    values.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).map_or(0, |(i, _)| i)
}

fn run_gibbs(config: &ExperimentConfig, settings: &Settings) -> Result<Vec<Report>, Failure> {
    let p = problem(config)?;
    let AlgorithmConfig::Gibbs { beta, q } = algorithm(config)? else {
        return Err(at("algorithm.kind", "`gibbs` needs a gibbs algorithm").into());
    };
    let kernel = dataset_kernel(config, &p, settings)?;
    let e = exact(&p, &kernel)?;
    let loss = p.loss()?;
    let prior = match q {
        Some(q) => FiniteDistribution::from_probs(q.clone())?,
        None => FiniteDistribution::uniform(loss.num_hypotheses())?,
    };
    let pop = population_risks(loss, &p.mu);
    let params = ContinuousBoundParams { beta: Some(*beta), n: Some(e.n), i_o: Some(argmin(&pop) + 1), ..Default::default() };
    let specific = [BoundName::GibbsGen, BoundName::GibbsMi, BoundName::GibbsRiskCountable];
    let defaults: Vec<BoundName> =
        if unit_loss(loss) { specific.iter().chain(&[BoundName::MiGen]).copied().collect() } else { vec![BoundName::MiGen] };
    let allowed: Vec<BoundName> = specific.iter().chain(&GEN_CHECKS).copied().collect();
    let mut reports = vec![Report::risk("exact", e.summary.clone())];
    for name in requested(config, &defaults, &allowed, Command::Gibbs)? {
        let r = match name {
            BoundName::GibbsGen => {
                need_unit_loss(loss, name)?;
                gibbs_bound(&params, None, GibbsVariant::GenHoeffding)?.with_measured(e.summary.gen_error.abs())
            }
            BoundName::GibbsMi => {
                need_unit_loss(loss, name)?;
                gibbs_bound(&params, None, GibbsVariant::MiTwoBeta)?.with_measured(e.io_mi)
            }
            BoundName::GibbsRiskCountable => {
                need_unit_loss(loss, name)?;
                gibbs_bound(&params, Some(&prior), GibbsVariant::RiskCountable)?.with_measured(e.summary.excess_risk)
            }
            other => gen_check(other, &e).expect("generic check"),
        };
        reports.push(Report::Bound(r));
    }
    Ok(reports)
}

fn run_noisy_erm(config: &ExperimentConfig, settings: &Settings) -> Result<Vec<Report>, Failure> {
    let p = problem(config)?;
    let alg = algorithm(config)?;
    let Some(b) = noise_means(alg, &p)? else {
        return Err(at("algorithm.kind", "`noisy-erm` needs a noisy_erm algorithm").into());
    };
    let power_law = matches!(alg, AlgorithmConfig::NoisyErm { power_law_noise: true, .. });
    let kernel = dataset_kernel(config, &p, settings)?;
    let e = exact(&p, &kernel)?;
    let loss = p.loss()?;
    let pop = population_risks(loss, &p.mu);
    let i_o = argmin(&pop) + 1;
    let mut defaults = vec![BoundName::CapacityChain, BoundName::MiGen];
    if unit_loss(loss) {
        defaults.insert(0, BoundName::NoisyErmGeneral);
        if power_law {
            defaults.insert(1, BoundName::NoisyErmPowerLaw);
        }
    }
    let specific = [BoundName::NoisyErmGeneral, BoundName::NoisyErmPowerLaw, BoundName::CapacityChain];
    let allowed: Vec<BoundName> = specific.iter().chain(&GEN_CHECKS).copied().collect();
    let mut reports = vec![Report::risk("exact", e.summary.clone())];
    for name in requested(config, &defaults, &allowed, Command::NoisyErm)? {
        let r = match name {
            BoundName::NoisyErmGeneral => {
                need_unit_loss(loss, name)?;
                noisy_erm_bound(&pop, &b, e.n, Some(i_o), NoisyErmVariant::General)?
                    .with_measured(e.summary.expected_population)
            }
            BoundName::NoisyErmPowerLaw => {
                need_unit_loss(loss, name)?;
                if !power_law {
                    return Err(at("algorithm.power_law_noise", "NoisyErmPowerLaw needs the power-law schedule").into());
                }
                noisy_erm_bound(&pop, &b, e.n, Some(i_o), NoisyErmVariant::PowerLaw)?
                    .with_measured(e.summary.expected_population)
            }
            BoundName::CapacityChain => capacity_chain_report(&pop, &b)?.with_measured(e.io_mi),
            other => gen_check(other, &e).expect("generic check"),
        };
        reports.push(Report::Bound(r));
    }
    Ok(reports)
}

fn run_two_stage(config: &ExperimentConfig) -> Result<Vec<Report>, Failure> {
    let AlgorithmConfig::TwoStage { class, n1, n2, tie_rule } = algorithm(config)? else {
        return Err(at("algorithm.kind", "`two-stage` needs a two_stage algorithm").into());
    };
    let pc = config.problem.as_ref().ok_or_else(|| at("problem", "required by this command"))?;
    if pc.loss.is_some() {
        return Err(at("problem.loss", "two-stage uses the 0-1 loss of its class").into());
    }
    if pc.n.is_some_and(|n| n != n1 + n2) {
        return Err(at("problem.n", format!("must equal n1 + n2 = {}", n1 + n2)).into());
    }
    let class = class.build()?;
    if pc.mu.len() != 2 * class.domain_size() {
        return Err(at(
            "problem.mu",
            format!("expected {} probabilities over (x, y) with z = 2x + y, got {}", 2 * class.domain_size(), pc.mu.len()),
        )
        .into());
    }
    let p = pc.build()?;
    let vc = vc_stats(&class, *n1)?.vc_dim;
    let two = two_stage_kernel(&class, *n1, *n2, *tie_rule)?;
    let stats = two.prefix_stats(&p.mu)?;
    let max_entropy = stats.iter().map(|s| s.conditional_entropy).fold(0.0, f64::max);
    let max_mi = stats.iter().map(|s| s.conditional_mi).fold(0.0, f64::max);
    let max_log_patterns = stats.iter().map(|s| (s.pattern_count as f64).ln()).fold(0.0, f64::max);
    let sauer = vc as f64 * ((*n1 + 1) as f64).ln();
    let inputs = [("vc_dim", vc as f64), ("n1", *n1 as f64)];
    let summary = exact_risk_summary(&p.mu, n1 + n2, &two.kernel, &two.loss)?;
    Ok(vec![
        Report::risk("full_dataset", summary),
        Report::Bound(
            BoundReport::new("two_stage_prefix_patterns", "log |W_1(s1)| <= V log(n1 + 1)", &inputs, sauer)
                .with_measured(max_log_patterns),
        ),
        Report::Bound(
            BoundReport::new("two_stage_prefix_entropy", "max_s1 H(W | S_1 = s1) <= V log(n1 + 1)", &inputs, sauer)
                .with_measured(max_entropy),
        ),
        Report::Bound(
            BoundReport::new("two_stage_prefix_mi", "max_s1 I(S_2; W | S_1 = s1) <= V log(n1 + 1)", &inputs, sauer)
                .with_measured(max_mi),
        ),
        Report::Bound(two_stage_report(vc, *n1, *n2).with_measured(two.second_split_gen(&p.mu)?)),
    ])
}

fn run_compose(config: &ExperimentConfig, settings: &Settings) -> Result<Vec<Report>, Failure> {
    let AlgorithmConfig::Compose { stages } = algorithm(config)? else {
        return Err(at("algorithm.kind", "`compose` needs a compose algorithm").into());
    };
    let p = problem(config)?;
    let (z, n) = (p.mu.len(), p.n()?);
    let mut built = Vec::with_capacity(stages.len());
    let mut prior = 1usize;
    for (j, stage) in stages.iter().enumerate() {
        let path = format!("algorithm.stages[{j}]");
        let located = |e: crate::Error| -> Failure {
            match e {
                crate::Error::Capacity { .. } => e.into(),
                other => at(&path, other).into(),
            }
        };
        let s = match stage {
            StageConfig::Data { algorithm } => {
                let kernel = build_kernel(algorithm, &p, settings.seed).map_err(|e| match e {
                    BuildError::Library(l) => located(l),
                    other => other.into(),
                })?;
                Stage::from_dataset_kernel(&kernel, z, n, prior).map_err(located)?
            }
            StageConfig::Adaptive { rows } => Stage::new(
                StochasticKernel::new(rows.clone(), InputArity::DatasetsWithPrior { z_size: z, n, prior_outputs: prior })
                    .map_err(located)?,
            ),
            StageConfig::Post { rows } => {
                if rows.len() != prior {
                    return Err(at(&format!("{path}.rows"), format!("expected {prior} rows, one per earlier output code, got {}", rows.len())).into());
                }
                Stage::from_prior_kernel(&StochasticKernel::from_rows(rows.clone()).map_err(located)?, z, n).map_err(located)?
            }
        };
        prior *= s.outputs;
        built.push(s);
    }
    let plan = CompositionPlan::new(z, n, built)?;
    let c = compose_adaptive(&plan, &p.mu)?;
    let sum: f64 = c.conditional_mi.iter().sum();
    let mut chain = BoundReport::new(
        "composition_chain_rule",
        "sum_j I(S; W_j | W^{j-1}) = I(S; W^k)",
        &[("stages", stages.len() as f64)],
        c.total_mi,
    );
    for (j, v) in c.conditional_mi.iter().enumerate() {
        chain = chain.with_input(&format!("stage_{}_mi", j + 1), *v);
    }
    let mut reports = vec![
        Report::Bound(chain.with_measured(sum)),
        Report::Bound(
            BoundReport::new("composition_final", "I(S; W_k) <= I(S; W^k)", &[("stages", stages.len() as f64)], c.total_mi)
                .with_measured(c.final_mi),
        ),
    ];
    if let Some(loss) = &p.loss {
        let last = plan.stages.last().expect("validated").outputs;
        if loss.num_hypotheses() == last {
            let stride = c.joint.outputs() / last;
            let d = c.joint.inputs();
            let mut rows = vec![0.0; d * last];
            for s in 0..d {
                for (code, &v) in c.joint.row(s).iter().enumerate() {
                    rows[s * last + code / stride] += v;
                }
            }
            let final_kernel = StochasticKernel::from_flat(d, last, rows, InputArity::Datasets { z_size: z, n })?;
            let summary = exact_risk_summary(&p.mu, n, &final_kernel, loss)?;
            reports.push(Report::risk("final_stage", summary.clone()));
            reports.push(Report::Bound(mi_gen_report(p.sigma()?, n, c.final_mi).with_measured(summary.gen_error.abs())));
        }
    }
    Ok(reports)
}

fn run_monitor(config: &ExperimentConfig, settings: &Settings) -> Result<Vec<Report>, Failure> {
    let p = problem(config)?;
    let kernel = dataset_kernel(config, &p, settings)?;
    let (n, loss, sigma) = (p.n()?, p.loss()?, p.sigma()?);
    let m = config.analysis.m.unwrap_or(DEFAULT_MONITOR_M);
    let trials = settings.trials.unwrap_or(DEFAULT_TRIALS);
    let eps = lambda_mutual_information(&p.mu, n, &kernel, loss)?;
    let outcome = monitor_experiment(&p.mu, n, &kernel, loss, m, trials, settings.seed)?;
    let est = outcome.max_abs_gen_estimate;
    let bound = monitor_report(sigma, n, m, eps)
        .with_input("estimate_mean", est.mean)
        .with_input("estimate_std_error", est.std_error)
        .with_measured(est.ci95.0);
    let mut reports = vec![
        Report::estimate("max_abs_gen", est),
        Report::estimate("signed_selected_gen", outcome.signed_estimate),
        Report::Bound(bound),
    ];
    if m <= 3 {
        match parallel_lambda_mi(&p.mu, n, &kernel, loss, m as u32) {
            Ok(joint_mi) => reports.push(Report::Bound(
                BoundReport::new(
                    "monitor_additivity",
                    "I(Lambda(S_1..S_m); W_1..W_m) = m I(Lambda(S);W)",
                    &[("m", m as f64), ("epsilon", eps)],
                    m as f64 * eps,
                )
                .with_measured(joint_mi),
            )),
            Err(crate::Error::Capacity { .. }) => {}
            Err(e) => return Err(e.into()),
        }
    }
    Ok(reports)
}

fn run_sweep_command(config: &ExperimentConfig, settings: &Settings) -> Result<Vec<Report>, Failure> {
    let count = config.analysis.problems.unwrap_or(DEFAULT_SWEEP_PROBLEMS);
    let shape = config.analysis.shape.unwrap_or_default();
    let records = run_sweep(settings.seed, count, shape)?;
    let mut reports = Vec::with_capacity(records.len() * 4);
    for r in records {
        let gen = r.summary.gen_error.abs();
        let tag = |b: BoundReport| {
            b.with_input("problem", r.index as f64)
                .with_input("z_size", r.z_size as f64)
                .with_input("hypotheses", r.hypotheses as f64)
        };
        reports.push(Report::Bound(tag(mi_gen_report(r.sigma, r.n, r.io_mi).with_measured(gen))));
        reports.push(Report::Bound(tag(lambda_gen_report(r.sigma, r.n, r.lambda_mi).with_measured(gen))));
        reports.push(Report::Bound(tag(
            BoundReport::new("lambda_mi_le_io_mi", "I(Lambda_W(S);W) <= I(S;W)", &[], r.io_mi).with_measured(r.lambda_mi),
        )));
        reports.push(Report::Bound(tag(abs_gen_report(r.sigma, r.n, r.lambda_mi).with_measured(r.summary.abs_gen_error))));
    }
    Ok(reports)
}

fn run_bound(config: &ExperimentConfig) -> Result<Vec<Report>, Failure> {
    let a = &config.analysis;
    let names = a.bounds.as_ref().filter(|b| !b.is_empty()).ok_or_else(|| at("analysis.bounds", "`bound` needs at least one formula"))?;
    let params = &a.params;
    let q = a.q.as_ref().map(|q| FiniteDistribution::from_probs(q.clone())).transpose()?;
    let mut reports = Vec::new();
    for (i, name) in names.iter().enumerate() {
        let path = format!("analysis.bounds[{i}]");
        let missing = |field: &str| -> Failure { at(&path, format!("{name:?} needs `{field}`")).into() };
        let sigma = || params.sigma.ok_or_else(|| missing("params.sigma"));
        let n = || params.n.ok_or_else(|| missing("params.n"));
        let eps = || params.epsilon.ok_or_else(|| missing("params.epsilon"));
        let located = |e: crate::Error| -> Failure {
            match e {
                crate::Error::Capacity { .. } => e.into(),
                other => at(&path, other).into(),
            }
        };
        let gibbs = |variant| gibbs_bound(params, q.as_ref(), variant).map_err(located);
        let mut push = |r: BoundReport| reports.push(Report::Bound(r));
        match name {
            BoundName::MiGen => push(mi_gen_report(sigma()?, n()?, eps()?)),
            BoundName::LambdaMiGen => push(lambda_gen_report(sigma()?, n()?, eps()?)),
            BoundName::EntropyGen => push(entropy_gen_report(sigma()?, n()?, eps()?)),
            BoundName::AbsGen => push(abs_gen_report(sigma()?, n()?, eps()?)),
            BoundName::SampleComplexityIndependent | BoundName::SampleComplexityMiStable => {
                let kind = if *name == BoundName::SampleComplexityIndependent {
                    SampleComplexityKind::Independent
                } else {
                    SampleComplexityKind::MiStable
                };
                let alpha = params.alpha.ok_or_else(|| missing("params.alpha"))?;
                let beta_conf = params.beta_conf.ok_or_else(|| missing("params.beta_conf"))?;
                push(sample_complexity_report(kind, sigma()?, alpha, beta_conf, params.epsilon).map_err(located)?)
            }
            BoundName::GrowthCheck => {
                let g = params.g_at_n.ok_or_else(|| missing("params.g_at_n"))?;
                let alpha = params.alpha.ok_or_else(|| missing("params.alpha"))?;
                let beta_conf = params.beta_conf.ok_or_else(|| missing("params.beta_conf"))?;
                let (n, eps, sigma) = (n()?, eps()?, sigma()?);
                let check = cor1_check(g, n, eps, beta_conf, sigma, alpha).map_err(located)?;
                let inputs = [("g_at_n", g), ("n", n as f64), ("beta_conf", beta_conf), ("sigma", sigma), ("alpha", alpha)];
                push(
                    BoundReport::new("growth_epsilon", "eps <= (g(n) - 1) beta log(2/beta)", &inputs, check.eps_threshold)
                        .with_measured(eps),
                );
                push(
                    BoundReport::new("growth_sample_size", "(8 sigma^2 / alpha^2) log(2/beta) <= n / g(n)", &inputs, n as f64 / g)
                        .with_measured(check.n_over_g_threshold),
                );
            }
            BoundName::Covering => {
                let d = params.d.ok_or_else(|| missing("params.d"))?;
                let radius = params.radius.ok_or_else(|| missing("params.radius"))?;
                push(covering_report(sigma()?, n()?, d, radius).map_err(located)?)
            }
            BoundName::TwoStage => {
                let vc = params.vc_dim.ok_or_else(|| missing("params.vc_dim"))?;
                let n1 = a.n1.ok_or_else(|| missing("n1"))?;
                let n2 = a.n2.ok_or_else(|| missing("n2"))?;
                push(two_stage_report(vc, n1, n2))
            }
            BoundName::Monitor => {
                let m = params.m.ok_or_else(|| missing("params.m"))?;
                push(monitor_report(sigma()?, n()?, m, eps()?))
            }
            BoundName::GibbsGen => push(gibbs(GibbsVariant::GenHoeffding)?),
            BoundName::GibbsMi => push(gibbs(GibbsVariant::MiTwoBeta)?),
            BoundName::GibbsRiskCountable => push(gibbs(GibbsVariant::RiskCountable)?),
            BoundName::GibbsRiskZipfPrior => push(gibbs(GibbsVariant::RiskZipfPrior)?),
            BoundName::GibbsRiskUniformPrior => push(gibbs(GibbsVariant::RiskUniformPrior)?),
            BoundName::GibbsRiskLipschitz => push(gibbs(GibbsVariant::RiskLipschitz)?),
            BoundName::GibbsRiskLipschitzGaussian => push(gibbs(GibbsVariant::RiskLipschitzGaussian)?),
            BoundName::NoisyErmGeneral => {
                let pop = a.pop_risks.as_ref().ok_or_else(|| missing("pop_risks"))?;
                let b = a.noise_means.as_ref().ok_or_else(|| missing("noise_means"))?;
                push(noisy_erm_bound(pop, b, n()?, params.i_o, NoisyErmVariant::General).map_err(located)?)
            }
            BoundName::NoisyErmPowerLaw => {
                let pop = a.pop_risks.clone().unwrap_or_default();
                push(noisy_erm_bound(&pop, &[], n()?, params.i_o, NoisyErmVariant::PowerLaw).map_err(located)?)
            }
            BoundName::CapacityChain => {
                let pop = a.pop_risks.as_ref().ok_or_else(|| missing("pop_risks"))?;
                let b = a.noise_means.as_ref().ok_or_else(|| missing("noise_means"))?;
                push(capacity_chain_report(pop, b).map_err(located)?)
            }
        }
    }
    Ok(reports)
}
