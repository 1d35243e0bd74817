use proptest::prelude::*;

use genbound::algorithms::{
    chain_kernel, compose_adaptive, erm_kernel, gibbs_kernel, noisy_erm_kernel, CompositionPlan, InputArity,
    NoisyErmMode, Stage, StochasticKernel, TieRule, ROW_SUM_TOL,
};
use genbound::bounds::BoundReport;
use genbound::cli::config::Format;
use genbound::cli::report::{emit, parse, Report, ReportDocument};
use genbound::info::{io_mutual_information, kernel_mutual_information, lambda_mutual_information};
use genbound::montecarlo::EstimateWithCI;
use genbound::risk::{exact_risk_summary, LossTable, RiskSummary};
use genbound::spaces::{decode_dataset, encode_dataset, DatasetSpace, FiniteDistribution};

fn distribution(k: usize) -> impl Strategy<Value = FiniteDistribution> {
    prop::collection::vec(0.01f64..1.0, k).prop_map(|w| FiniteDistribution::from_weights(&w).unwrap())
}

fn stochastic_rows(inputs: usize, outputs: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(0.0f64..1.0, outputs), inputs).prop_map(|rows| {
        rows.into_iter()
            .map(|r| {
                let r: Vec<f64> = r.into_iter().map(|x| x + 1e-3).collect();
                let t: f64 = r.iter().sum();
                r.into_iter().map(|x| x / t).collect()
            })
            .collect()
    })
}

/// `(μ, loss, n)` with `|Z| ≤ 3`, `|W| ≤ 4`, `n ≤ 3`.
fn problem() -> impl Strategy<Value = (FiniteDistribution, LossTable, usize)> {
    (2usize..=3, 2usize..=4, 1usize..=3).prop_flat_map(|(z, k, n)| {
        (
            distribution(z),
            prop::collection::vec(prop::collection::vec(0i64..=10, z), k),
            Just(n),
        )
            .prop_map(|(mu, nums, n)| (mu, LossTable::unit(nums, 10).unwrap(), n))
    })
}

fn assert_row_stochastic(kernel: &StochasticKernel) {
    for row in kernel.rows() {
        assert!(row.iter().all(|p| *p >= 0.0));
        assert!((row.iter().sum::<f64>() - 1.0).abs() <= ROW_SUM_TOL);
    }
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![-1e6f64..1e6, -1.0f64..1.0, Just(0.0), 1e-20f64..1e-10]
}

fn report() -> impl Strategy<Value = Report> {
    let bound = (
        "[a-z_]{1,12}",
        "[ -~]{0,30}",
        prop::collection::vec(("[a-z_]{1,6}", finite()), 0..4),
        finite(),
        prop::option::of(finite()),
    )
        .prop_map(|(name, anchor, inputs, value, measured)| {
            let inputs: Vec<(&str, f64)> = inputs.iter().map(|(k, v)| (k.as_str(), *v)).collect();
            let b = BoundReport::new(&name, &anchor, &inputs, value);
            Report::Bound(match measured {
                Some(m) => b.with_measured(m),
                None => b,
            })
        });
    let risk = ("[a-z_]{1,8}", prop::collection::vec(finite(), 5)).prop_map(|(label, v)| {
        Report::risk(
            &label,
            RiskSummary {
                expected_empirical: v[0],
                expected_population: v[1],
                gen_error: v[2],
                abs_gen_error: v[3],
                excess_risk: v[4],
            },
        )
    });
    let estimate = ("[a-z_]{1,8}", finite(), 0.0f64..10.0, 1u64..1_000_000).prop_map(|(label, mean, se, trials)| {
        Report::estimate(&label, EstimateWithCI { mean, std_error: se, trials, ci95: (mean - 1.96 * se, mean + 1.96 * se) })
    });
    prop_oneof![bound, risk, estimate]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dataset_codes_round_trip(z in 1usize..6, tuple in prop::collection::vec(0usize..6, 1..6)) {
        let tuple: Vec<usize> = tuple.into_iter().map(|d| d % z).collect();
        let index = encode_dataset(&tuple, z).unwrap();
        prop_assert_eq!(decode_dataset(&index), tuple.clone());
        prop_assert_eq!(index.digits().collect::<Vec<_>>(), tuple);
    }

    #[test]
    fn dataset_probabilities_sum_to_one(mu in distribution(3), n in 1usize..5) {
        let probs = DatasetSpace::new(3, n).unwrap().probabilities(&mu).unwrap();
        prop_assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn algorithm_kernels_are_row_stochastic((_mu, loss, n) in problem(), beta in 0.1f64..20.0, b in 0.05f64..3.0) {
        let k = loss.num_hypotheses();
        assert_row_stochastic(&erm_kernel(&loss, n, TieRule::LowestIndex).unwrap());
        assert_row_stochastic(&erm_kernel(&loss, n, TieRule::UniformOverArgmin).unwrap());
        assert_row_stochastic(&gibbs_kernel(&loss, n, beta, &FiniteDistribution::uniform(k).unwrap()).unwrap());
        let noise: Vec<f64> = (1..=k).map(|i| b * i as f64).collect();
        assert_row_stochastic(&noisy_erm_kernel(&loss, n, &noise, NoisyErmMode::Exact).unwrap());
    }

    #[test]
    fn lambda_information_is_at_most_io((mu, loss, n) in problem(), beta in 0.1f64..20.0) {
        let k = loss.num_hypotheses();
        for kernel in [
            erm_kernel(&loss, n, TieRule::UniformOverArgmin).unwrap(),
            gibbs_kernel(&loss, n, beta, &FiniteDistribution::uniform(k).unwrap()).unwrap(),
        ] {
            let io = io_mutual_information(&mu, n, &kernel).unwrap();
            let lambda = lambda_mutual_information(&mu, n, &kernel, &loss).unwrap();
            prop_assert!(lambda >= 0.0);
            prop_assert!(lambda <= io + 1e-10, "lambda {} > io {}", lambda, io);
            let summary = exact_risk_summary(&mu, n, &kernel, &loss).unwrap();
            let bound = (2.0 * loss.hoeffding_sigma().powi(2) * lambda / n as f64).sqrt();
            prop_assert!(summary.gen_error.abs() <= bound + 1e-10);
        }
    }

    #[test]
    fn data_processing_inequality(
        input in distribution(4),
        first in stochastic_rows(4, 3),
        second in stochastic_rows(3, 5),
    ) {
        let p = StochasticKernel::from_rows(first).unwrap();
        let q = StochasticKernel::from_rows(second).unwrap();
        let pq = chain_kernel(&p, &q).unwrap();
        let whole = kernel_mutual_information(input.probs(), &pq).unwrap();
        let head = kernel_mutual_information(input.probs(), &p).unwrap();
        let tail = kernel_mutual_information(&p.output_marginal(input.probs()), &q).unwrap();
        prop_assert!(whole <= head.min(tail) + 1e-10);
    }

    #[test]
    fn composition_chain_rule(
        mu in distribution(2),
        first in stochastic_rows(4, 3),
        second in stochastic_rows(12, 2),
        third in stochastic_rows(24, 2),
    ) {
        let (z, n) = (2, 2);
        let stages = vec![
            Stage::new(StochasticKernel::new(first, InputArity::Datasets { z_size: z, n }).unwrap()),
            Stage::new(StochasticKernel::new(second, InputArity::DatasetsWithPrior { z_size: z, n, prior_outputs: 3 }).unwrap()),
            Stage::new(StochasticKernel::new(third, InputArity::DatasetsWithPrior { z_size: z, n, prior_outputs: 6 }).unwrap()),
        ];
        let c = compose_adaptive(&CompositionPlan::new(z, n, stages).unwrap(), &mu).unwrap();
        prop_assert!((c.conditional_mi.iter().sum::<f64>() - c.total_mi).abs() <= 1e-10);
        prop_assert!(c.final_mi <= c.total_mi + 1e-10);
        assert_row_stochastic(&c.joint);
    }

    #[test]
    fn reports_round_trip(reports in prop::collection::vec(report(), 1..6), seed in prop::option::of(any::<u64>())) {
        let mut doc = ReportDocument::new("sweep", reports);
        doc.seed = seed;
        for format in [Format::Json, Format::Csv] {
            let bytes = emit(&doc, format).unwrap();
            let back = parse(&bytes, format).unwrap();
            prop_assert_eq!(&back, &doc.rounded());
            prop_assert_eq!(emit(&back, format).unwrap(), bytes);
        }
    }
}
