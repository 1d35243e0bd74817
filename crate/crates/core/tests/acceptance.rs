//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::time::{Duration, Instant};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use genbound::algorithms::{
    chain_kernel, compose_adaptive, erm_kernel, gibbs_kernel, gibbs_objective, noisy_argmin_probabilities,
    noisy_argmin_sampled, noisy_erm_kernel, two_stage_kernel, vc_stats, CompositionPlan, HypothesisClassTable,
    InputArity, NoisyErmMode, Stage, StochasticKernel, TieRule,
};
use genbound::bounds::{
    capacity_chain, gibbs_bound, monitor_bound, noisy_erm_bound, sample_complexity, two_stage_bound,
    ContinuousBoundParams, GibbsVariant, NoisyErmVariant, SampleComplexityKind,
};
use genbound::cli::config::{parse_config, Format};
use genbound::cli::report::emit;
use genbound::cli::{build_document, Command, Flags, Settings};
use genbound::info::{io_mutual_information, kernel_mutual_information, lambda_mutual_information};
use genbound::montecarlo::{monitor_experiment, parallel_lambda_mi};
use genbound::risk::{empirical_risk, exact_risk_summary, population_risks, LossTable};
use genbound::spaces::{DatasetSpace, FiniteDistribution};
use genbound::sweep::{run_sweep, SweepShape};

const SWEEP_SEED: u64 = 20_240_601;

struct Outcome {
    id: u8,
    title: &'static str,
    pass: bool,
    detail: String,
    elapsed: Duration,
}

fn timed(id: u8, title: &'static str, f: impl FnOnce() -> (bool, String)) -> Outcome {
    let start = Instant::now();
    let (pass, detail) = f();
    Outcome { id, title, pass, detail, elapsed: start.elapsed() }
}

fn simplex(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
    let t: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / t).collect()
}

/// `|Z| ≤ 3`, `|W| ≤ 5`, losses on the 1/1000 grid in `[0, 1]`.
fn random_unit_problem(rng: &mut ChaCha8Rng) -> (FiniteDistribution, LossTable) {
    let z = rng.gen_range(2..=3);
    let k = rng.gen_range(2..=5);
    let mu = FiniteDistribution::from_probs(simplex(rng, z)).unwrap();
    let numerators = (0..k).map(|_| (0..z).map(|_| rng.gen_range(0..=1000)).collect()).collect();
    (mu, LossTable::unit(numerators, 1000).unwrap())
}

fn sweep_criteria() -> Vec<Outcome> {
    let start = Instant::now();
    let records = run_sweep(SWEEP_SEED, 1000, SweepShape::default()).expect("sweep runs");
    let elapsed = start.elapsed();
    let total = records.len();
    let sigma_ok = records.iter().all(|r| r.sigma == 0.5);
    let io = records.iter().filter(|r| r.io_ok).count();
    let lambda = records.iter().filter(|r| r.lambda_ok).count();
    let abs = records.iter().filter(|r| r.abs_ok).count();
    let eligible: Vec<_> = records.iter().filter(|r| r.lambda_mi >= 0.01).collect();
    let tighter = eligible.iter().filter(|r| r.abs_bound < r.russo_zou).count();
    let max_ratio = records
        .iter()
        .filter(|r| r.io_bound > 0.0)
        .map(|r| r.summary.gen_error.abs() / r.io_bound)
        .fold(0.0, f64::max);
    vec![
        Outcome {
            id: 1,
            title: "|gen| <= sqrt(2 sigma^2 I(S;W)/n) on 1000 seeded problems",
            pass: io == total && total == 1000 && sigma_ok && elapsed <= Duration::from_secs(60),
            detail: format!("{io}/{total} hold, max |gen|/bound = {max_ratio:.4}, sweep took {:.1}s", elapsed.as_secs_f64()),
            elapsed,
        },
        Outcome {
            id: 2,
            title: "I(Lambda;W) <= I(S;W) and |gen| <= lambda bound",
            pass: lambda == total && total == 1000,
            detail: format!("{lambda}/{total} hold"),
            elapsed: Duration::ZERO,
        },
        Outcome {
            id: 3,
            title: "E|gen| <= sqrt((2 sigma^2/n)(eps + log 2)), tighter than Russo-Zou for eps >= 0.01",
            pass: abs == total && tighter == eligible.len() && total == 1000,
            detail: format!("{abs}/{total} hold; tighter in {tighter}/{} cases with eps >= 0.01", eligible.len()),
            elapsed: Duration::ZERO,
        },
    ]
}

fn gibbs_criterion() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    // (a) optimality against perturbations
    let mut worst_gap = f64::INFINITY;
    let mut checked = 0usize;
    for _ in 0..100 {
        let (mu, loss) = random_unit_problem(&mut rng);
        let n = rng.gen_range(1..=3);
        let beta = rng.gen_range(0.2..10.0);
        let k = loss.num_hypotheses();
        let q = FiniteDistribution::from_probs(simplex(&mut rng, k)).unwrap();
        let star = gibbs_kernel(&loss, n, beta, &q).unwrap();
        let best = gibbs_objective(&mu, n, &star, &loss, beta, &q).unwrap();
        let datasets = star.inputs();
        for _ in 0..100 {
            let t: f64 = rng.gen_range(0.0..1.0);
            let rows: Vec<Vec<f64>> = (0..datasets)
                .map(|s| {
                    let r = simplex(&mut rng, k);
                    star.row(s).iter().zip(&r).map(|(a, b)| (1.0 - t) * a + t * b).collect()
                })
                .collect();
            let other = StochasticKernel::new(rows, star.arity()).unwrap();
            let value = gibbs_objective(&mu, n, &other, &loss, beta, &q).unwrap();
            worst_gap = worst_gap.min(value - best);
            checked += 1;
        }
    }
    let optimal = worst_gap >= -1e-9;

    // (b), (c), (d) over the β and n grid
    let mut gen_ok = 0usize;
    let mut mi_ok = 0usize;
    let mut risk_ok = 0usize;
    let mut cases = 0usize;
    for &beta in &[0.5, 1.0, 2.0, 5.0, 10.0] {
        for n in 1..=4 {
            for _ in 0..10 {
                let (mu, loss) = random_unit_problem(&mut rng);
                let k = loss.num_hypotheses();
                let q = FiniteDistribution::from_probs(simplex(&mut rng, k)).unwrap();
                let kernel = gibbs_kernel(&loss, n, beta, &q).unwrap();
                let summary = exact_risk_summary(&mu, n, &kernel, &loss).unwrap();
                let mi = io_mutual_information(&mu, n, &kernel).unwrap();
                let pop = population_risks(&loss, &mu);
                let i_o = pop.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap().0 + 1;
                let params = ContinuousBoundParams { beta: Some(beta), n: Some(n), i_o: Some(i_o), ..Default::default() };
                let gen_bound = gibbs_bound(&params, None, GibbsVariant::GenHoeffding).unwrap().bound_value;
                let mi_bound = gibbs_bound(&params, None, GibbsVariant::MiTwoBeta).unwrap().bound_value;
                let risk_bound = gibbs_bound(&params, Some(&q), GibbsVariant::RiskCountable).unwrap().bound_value;
                cases += 1;
                gen_ok += (summary.gen_error.abs() <= gen_bound + 1e-9) as usize;
                mi_ok += (mi <= mi_bound + 1e-9) as usize;
                risk_ok += (summary.expected_population <= pop[i_o - 1] + risk_bound + 1e-9) as usize;
            }
        }
    }
    let pass = optimal && gen_ok == cases && mi_ok == cases && risk_ok == cases;
    (
        pass,
        format!(
            "(a) {checked} perturbations, min objective gap {worst_gap:.3e}; (b) {gen_ok}/{cases}; (c) {mi_ok}/{cases}; (d) {risk_ok}/{cases}"
        ),
    )
}

fn worked_examples() -> (bool, String) {
    let zipf = gibbs_bound(
        &ContinuousBoundParams { n: Some(100), i_o: Some(1), ..Default::default() },
        None,
        GibbsVariant::RiskZipfPrior,
    )
    .unwrap()
    .bound_value;
    let (k, n) = (10usize, 100usize);
    let uniform = gibbs_bound(
        &ContinuousBoundParams { n: Some(n), k: Some(k), ..Default::default() },
        None,
        GibbsVariant::RiskUniformPrior,
    )
    .unwrap()
    .bound_value;
    let uniform_expected = ((k as f64).ln() / n as f64).sqrt();
    let power = noisy_erm_bound(&[], &[], 1000, Some(1), NoisyErmVariant::PowerLaw).unwrap().bound_value;
    let count = sample_complexity(SampleComplexityKind::Independent, 1.0, 1.0, 2.0 / std::f64::consts::E, None).unwrap();

    // the same power-law example through the command-line path
    let config = parse_config(r#"{"analysis": {"bounds": ["noisy_erm_power_law"], "params": {"i_o": 1, "n": 1000}}}"#).unwrap();
    let settings = Settings::resolve(&config, &Flags::default());
    let doc = build_document(Command::Bound, &config, &settings).unwrap();
    let cli_power = match &doc.reports[0] {
        genbound::cli::report::Report::Bound(b) => b.inputs["excess"],
        _ => f64::NAN,
    };

    let pass = (zipf - 0.1).abs() <= 1e-12
        && (uniform - uniform_expected).abs() <= 1e-12
        && (power - 0.4).abs() <= 1e-12
        && (cli_power - 0.4).abs() <= 1e-12
        && count == 2;
    (
        pass,
        format!("zipf {zipf:.15}, uniform {uniform:.15} (expect {uniform_expected:.15}), power-law {power:.15}, cli {cli_power:.15}, n = {count}"),
    )
}

fn noisy_erm_criterion() -> (bool, String) {
    // (i) exact rows against 10^6 sampled draws
    let loss = LossTable::unit(vec![vec![200, 700], vec![500, 400], vec![900, 100]], 1000).unwrap();
    let b = [0.3, 0.5, 0.8];
    let n = 2;
    let exact = noisy_erm_kernel(&loss, n, &b, NoisyErmMode::Exact).unwrap();
    let space = DatasetSpace::new(2, n).unwrap();
    let draws = 1_000_000u64;
    let mut worst_z = 0.0f64;
    let mut entries = 0usize;
    let mut within = 0usize;
    for s in space.iter() {
        let risks: Vec<f64> = (0..3).map(|w| empirical_risk(&loss, w, &s)).collect();
        let p = noisy_argmin_probabilities(&risks, &b).unwrap();
        assert_eq!(p.as_slice(), exact.row(s.code as usize));
        let sampled = noisy_argmin_sampled(&risks, &b, draws, 606, s.code).unwrap();
        for (pe, ps) in p.iter().zip(&sampled) {
            let se = (pe * (1.0 - pe) / draws as f64).sqrt();
            let z = (ps - pe).abs() / se;
            worst_z = worst_z.max(z);
            entries += 1;
            within += (z <= 3.0) as usize;
        }
    }

    // (ii) risk bound and (iii) capacity chain on random problems
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut risk_ok = 0usize;
    let mut chain_ok = 0usize;
    let problems = 200usize;
    for _ in 0..problems {
        let (mu, loss) = random_unit_problem(&mut rng);
        let n = rng.gen_range(1..=4);
        let b: Vec<f64> = (0..loss.num_hypotheses()).map(|_| rng.gen_range(0.05..2.0)).collect();
        let kernel = noisy_erm_kernel(&loss, n, &b, NoisyErmMode::Exact).unwrap();
        let summary = exact_risk_summary(&mu, n, &kernel, &loss).unwrap();
        let pop = population_risks(&loss, &mu);
        let bound = noisy_erm_bound(&pop, &b, n, None, NoisyErmVariant::General).unwrap().bound_value;
        risk_ok += (summary.expected_population <= bound + 1e-9) as usize;
        let mi = io_mutual_information(&mu, n, &kernel).unwrap();
        chain_ok += (mi <= capacity_chain(&pop, &b).unwrap() + 1e-9) as usize;
    }
    let pass = within == entries && risk_ok == problems && chain_ok == problems;
    (
        pass,
        format!(
            "{within}/{entries} entries within 3 SE (max {worst_z:.2} SE); risk bound {risk_ok}/{problems}; capacity chain {chain_ok}/{problems}"
        ),
    )
}

fn two_stage_criterion() -> (bool, String) {
    let class = HypothesisClassTable::thresholds(4);
    let (n1, n2) = (2, 2);
    let vc = vc_stats(&class, n1).unwrap().vc_dim;
    let sauer = vc as f64 * ((n1 + 1) as f64).ln();
    let bound = two_stage_bound(vc, n1, n2);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut prefixes = 0usize;
    let mut prefix_ok = 0usize;
    let mut gen_ok = 0usize;
    let mut worst = f64::NEG_INFINITY;
    let distributions = 20usize;
    for i in 0..distributions {
        let tie = if i % 2 == 0 { TieRule::LowestIndex } else { TieRule::UniformOverArgmin };
        let two = two_stage_kernel(&class, n1, n2, tie).unwrap();
        let mu = FiniteDistribution::from_probs(simplex(&mut rng, 8)).unwrap();
        for s in two.prefix_stats(&mu).unwrap() {
            let log_count = (s.pattern_count as f64).ln();
            prefixes += 1;
            prefix_ok += (s.conditional_mi <= log_count + 1e-12 && log_count <= sauer + 1e-12) as usize;
        }
        let gen = two.second_split_gen(&mu).unwrap();
        worst = worst.max(gen);
        gen_ok += (gen <= bound + 1e-9) as usize;
    }
    (
        prefix_ok == prefixes && gen_ok == distributions && vc == 1,
        format!("V = {vc}; {prefix_ok}/{prefixes} prefixes; gen {gen_ok}/{distributions} (max {worst:.4} vs bound {bound:.4})"),
    )
}

fn random_rows(rng: &mut ChaCha8Rng, inputs: usize, outputs: usize) -> Vec<Vec<f64>> {
    (0..inputs).map(|_| simplex(rng, outputs)).collect()
}

/// Product kernel applying `channel` to every instance of a dataset.
fn per_instance_kernel(channel: &[Vec<f64>], z: usize, n: usize) -> StochasticKernel {
    let space = DatasetSpace::new(z, n).unwrap();
    let rows = space
        .iter()
        .map(|s| {
            space
                .iter()
                .map(|t| s.digits().zip(t.digits()).map(|(a, b)| channel[a][b]).product())
                .collect()
        })
        .collect();
    StochasticKernel::new(rows, InputArity::Datasets { z_size: z, n }).unwrap()
}

fn composition_criterion() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut chain_ok = 0usize;
    let mut final_ok = 0usize;
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let z = rng.gen_range(2..=3);
        let n = rng.gen_range(1..=3);
        let (k1, k2) = (rng.gen_range(2..=4), rng.gen_range(2..=4));
        let mu = FiniteDistribution::from_probs(simplex(&mut rng, z)).unwrap();
        let d = DatasetSpace::new(z, n).unwrap().len();
        let first = StochasticKernel::new(random_rows(&mut rng, d, k1), InputArity::Datasets { z_size: z, n }).unwrap();
        let second = StochasticKernel::new(
            random_rows(&mut rng, d * k1, k2),
            InputArity::DatasetsWithPrior { z_size: z, n, prior_outputs: k1 },
        )
        .unwrap();
        let plan = CompositionPlan::new(z, n, vec![Stage::new(first), Stage::new(second)]).unwrap();
        let c = compose_adaptive(&plan, &mu).unwrap();
        let gap = (c.conditional_mi.iter().sum::<f64>() - c.total_mi).abs();
        worst = worst.max(gap);
        chain_ok += (gap <= 1e-10) as usize;
        final_ok += (c.final_mi <= c.total_mi + 1e-10) as usize;
    }

    let mut pre_ok = 0usize;
    let mut post_ok = 0usize;
    for i in 0..100 {
        let (mu, loss) = random_unit_problem(&mut rng);
        let z = mu.len();
        let n = rng.gen_range(1..=2);
        let probs = DatasetSpace::new(z, n).unwrap().probabilities(&mu).unwrap();
        let beta = rng.gen_range(0.5..10.0);
        let q = FiniteDistribution::uniform(loss.num_hypotheses()).unwrap();
        if i % 2 == 0 {
            // S → S̃ (per-instance noise) → W (Gibbs on S̃)
            let noise = per_instance_kernel(&random_rows(&mut rng, z, z), z, n);
            let learner = gibbs_kernel(&loss, n, beta, &q).unwrap();
            let whole = chain_kernel(&noise, &learner).unwrap();
            let i_sw = kernel_mutual_information(&probs, &whole).unwrap();
            let i_ss = kernel_mutual_information(&probs, &noise).unwrap();
            let i_tw = kernel_mutual_information(&noise.output_marginal(&probs), &learner).unwrap();
            pre_ok += (i_sw <= i_ss.min(i_tw) + 1e-10) as usize;
        } else {
            // S → W̃ (Gibbs) → W (random channel on hypotheses)
            let learner = gibbs_kernel(&loss, n, beta, &q).unwrap();
            let k = loss.num_hypotheses();
            let outputs = rng.gen_range(2..=4);
            let post = StochasticKernel::from_rows(random_rows(&mut rng, k, outputs)).unwrap();
            let whole = chain_kernel(&learner, &post).unwrap();
            let i_sw = kernel_mutual_information(&probs, &whole).unwrap();
            let i_sv = kernel_mutual_information(&probs, &learner).unwrap();
            let i_vw = kernel_mutual_information(&learner.output_marginal(&probs), &post).unwrap();
            post_ok += (i_sw <= i_sv.min(i_vw) + 1e-10) as usize;
        }
    }
    (
        chain_ok == 100 && final_ok == 100 && pre_ok == 50 && post_ok == 50,
        format!(
            "chain rule {chain_ok}/100 (max gap {worst:.1e}); final <= total {final_ok}/100; preprocessing {pre_ok}/50; postprocessing {post_ok}/50"
        ),
    )
}

fn monitor_criterion() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut additivity_ok = 0usize;
    let mut additivity_cases = 0usize;
    let mut worst = 0.0f64;
    let mut mc_ok = 0usize;
    let problems = 10usize;
    let mut margins = Vec::new();
    for i in 0..problems {
        let z = 2;
        let n = rng.gen_range(1..=2);
        let k = rng.gen_range(2..=3);
        let mu = FiniteDistribution::from_probs(simplex(&mut rng, z)).unwrap();
        let numerators = (0..k).map(|_| (0..z).map(|_| rng.gen_range(0..=1000)).collect()).collect();
        let loss = LossTable::unit(numerators, 1000).unwrap();
        let kernel = if i % 2 == 0 {
            erm_kernel(&loss, n, TieRule::LowestIndex).unwrap()
        } else {
            gibbs_kernel(&loss, n, rng.gen_range(1.0..10.0), &FiniteDistribution::uniform(k).unwrap()).unwrap()
        };
        let eps = lambda_mutual_information(&mu, n, &kernel, &loss).unwrap();
        for m in 1..=3u32 {
            let joint = parallel_lambda_mi(&mu, n, &kernel, &loss, m).unwrap();
            let gap = (joint - m as f64 * eps).abs();
            worst = worst.max(gap);
            additivity_cases += 1;
            additivity_ok += (gap <= 1e-9) as usize;
        }
        let sigma = loss.hoeffding_sigma();
        let outcome = monitor_experiment(&mu, n, &kernel, &loss, 4, 10_000, 900 + i as u64).unwrap();
        let bound = monitor_bound(sigma, n, 4, eps);
        let lo = outcome.max_abs_gen_estimate.ci95.0;
        margins.push(bound - lo);
        mc_ok += (lo <= bound) as usize;
    }
    let min_margin = margins.iter().copied().fold(f64::INFINITY, f64::min);
    (
        additivity_ok == additivity_cases && mc_ok == problems,
        format!(
            "additivity {additivity_ok}/{additivity_cases} (max gap {worst:.1e}); m = 4 ci95.lo <= bound {mc_ok}/{problems} (min margin {min_margin:.4})"
        ),
    )
}

fn reproducibility_criterion() -> (bool, String) {
    let configs = [
        (
            Command::Risk,
            r#"{"problem": {"mu": [0.3, 0.7], "loss": {"numerators": [[0, 1], [1, 0], [1, 1]], "denominator": 1}, "n": 3},
                "algorithm": {"kind": "gibbs", "beta": 2.0}, "analysis": {"trials": 20000, "seed": 11}}"#,
        ),
        (
            Command::Monitor,
            r#"{"problem": {"mu": [0.5, 0.5], "loss": {"numerators": [[0, 1], [1, 0]], "denominator": 1}, "n": 2},
                "algorithm": {"kind": "erm"}, "analysis": {"m": 4, "trials": 10000, "seed": 12}}"#,
        ),
        (
            Command::NoisyErm,
            r#"{"problem": {"mu": [0.4, 0.6], "loss": {"numerators": [[100, 900], [600, 300]], "denominator": 1000}, "n": 2},
                "algorithm": {"kind": "noisy_erm", "noise_means": [0.2, 0.4], "monte_carlo_samples": 50000},
                "analysis": {"seed": 13}}"#,
        ),
        (Command::Sweep, r#"{"analysis": {"problems": 200, "seed": 14}}"#),
    ];
    let pools: Vec<rayon::ThreadPool> =
        [1, 4].iter().map(|&t| rayon::ThreadPoolBuilder::new().num_threads(t).build().unwrap()).collect();
    let mut identical = 0usize;
    let mut runs = 0usize;
    for (command, text) in configs {
        let config = parse_config(text).unwrap();
        let settings = Settings::resolve(&config, &Flags { no_timestamp: true, ..Flags::default() });
        let render = |format| {
            let doc = build_document(command, &config, &settings).unwrap();
            emit(&doc, format).unwrap()
        };
        for format in [Format::Json, Format::Csv] {
            let reference = render(format);
            for pool in &pools {
                for _ in 0..2 {
                    runs += 1;
                    identical += (pool.install(|| render(format)) == reference) as usize;
                }
            }
        }
    }
    (identical == runs, format!("{identical}/{runs} repeated runs byte-identical across 1 and 4 workers"))
}

fn main() {
    let mut outcomes = sweep_criteria();
    outcomes.push(timed(4, "Gibbs optimality, |gen| <= beta/2n, I(S;W) <= 2 beta, countable-prior risk", gibbs_criterion));
    outcomes.push(timed(5, "worked formula examples to 1e-12", worked_examples));
    outcomes.push(timed(6, "noisy ERM exact rows vs 10^6 draws, risk bound, capacity chain", noisy_erm_criterion));
    outcomes.push(timed(7, "two-stage thresholds |X| = 4, n1 = n2 = 2", two_stage_criterion));
    outcomes.push(timed(8, "composition chain rule and data processing", composition_criterion));
    outcomes.push(timed(9, "monitor additivity m <= 3 and m = 4 Monte Carlo", monitor_criterion));
    outcomes.push(timed(10, "byte-identical seeded reports", reproducibility_criterion));

    let limits = [(4u8, 120u64), (6, 120)];
    for o in outcomes.iter_mut() {
        if let Some(&(_, secs)) = limits.iter().find(|(id, _)| *id == o.id) {
            if o.elapsed > Duration::from_secs(secs) {
                o.pass = false;
                o.detail.push_str(&format!("; exceeded {secs}s"));
            }
        }
    }

    println!();
    for o in &outcomes {
        println!(
            "criterion {:>2} {} [{:.1}s] {}: {}",
            o.id,
            if o.pass { "PASS" } else { "FAIL" },
            o.elapsed.as_secs_f64(),
            o.title,
            o.detail
        );
    }
    let failed = outcomes.iter().filter(|o| !o.pass).count();
    println!("acceptance: {} passed, {failed} failed", outcomes.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
