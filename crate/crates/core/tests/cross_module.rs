use clt_lab::bounds::{
    aclt_estimate, big_inequality_check, duality_library, osipov_feller_check,
    osipov_feller_check_with, prokhorov_duality_diagnostic, truncated_eps_check_with, AcltMetric,
    BoundReport, LhsMode, OSIPOV_FELLER_C,
};
use clt_lab::dist::{make_discrete, DiscreteDistribution};
use clt_lab::metrics::{kolmogorov, wasserstein_normal};
use clt_lab::stein::{check_lemma42, gauss_expectation, mollify};
use clt_lab::{ArrayFamily, TestFunction};
use proptest::prelude::*;

fn standardized(raw: &[(f64, f64)]) -> DiscreteDistribution {
    let total: f64 = raw.iter().map(|r| r.1).sum();
    let probs: Vec<f64> = raw.iter().map(|r| r.1 / total).collect();
    let mean: f64 = raw.iter().zip(&probs).map(|(r, p)| r.0 * p).sum();
    let var: f64 = raw
        .iter()
        .zip(&probs)
        .map(|(r, p)| (r.0 - mean).powi(2) * p)
        .sum();
    let atoms = raw.iter().map(|r| (r.0 - mean) / var.sqrt()).collect();
    make_discrete(atoms, probs).unwrap()
}

fn arb_base() -> impl Strategy<Value = DiscreteDistribution> {
    prop::collection::vec((-3.0f64..3.0, 0.1f64..1.0), 2..=4)
        .prop_filter("spread atoms", |v| {
            let lo = v.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
            let hi = v.iter().map(|r| r.0).fold(f64::NEG_INFINITY, f64::max);
            hi - lo > 0.5
        })
        .prop_map(|v| standardized(&v))
}

#[test]
fn contractions_never_beat_wasserstein() {
    // W is the supremum of |E h(P) − E h(Q)| over contractions, so every
    // contraction in the library must sit below it.
    let mut hs = TestFunction::contractions();
    hs.push(mollify(&TestFunction::LogCoshContraction, 0.1).unwrap());
    let means: Vec<f64> = hs.iter().map(|h| gauss_expectation(h).unwrap()).collect();
    for fam in [ArrayFamily::Rademacher, ArrayFamily::jump(0.4).unwrap()] {
        for n in [1, 3, 20, 200] {
            let row = fam.row_sum_exact(n, 0.0).unwrap();
            let w = wasserstein_normal(&row.law).value;
            for (h, m) in hs.iter().zip(&means) {
                let gap = (m - row.law.expect(|x| h.eval(x))).abs();
                assert!(
                    gap <= w + 1e-9,
                    "{} n={n} {}: {gap} > {w}",
                    fam.description(),
                    h.name()
                );
            }
        }
    }
}

#[test]
fn asymptotic_checks_pass_for_analytic_families() {
    let families = [
        ArrayFamily::Rademacher,
        ArrayFamily::iid_scaled(DiscreteDistribution::rademacher(1.0)).unwrap(),
        ArrayFamily::jump(0.1).unwrap(),
        ArrayFamily::jump(0.2).unwrap(),
        ArrayFamily::jump(0.4).unwrap(),
    ];
    let metrics = [
        AcltMetric::K,
        AcltMetric::W,
        AcltMetric::P {
            lambda_grid: vec![0.25, 0.5, 1.0, 2.0, 4.0],
        },
    ];
    for fam in &families {
        for metric in &metrics {
            let r = aclt_estimate(fam, metric, &[250, 500, 1000, 2000]).unwrap();
            assert!(r.pass, "{} {:?}: {r:?}", fam.description(), metric);
            assert_eq!(r.params["lhs_trace_nonincreasing"], serde_json::json!(true));
        }
    }
}

#[test]
fn rademacher_kolmogorov_at_ten_thousand() {
    let r = aclt_estimate(&ArrayFamily::Rademacher, &AcltMetric::K, &[1000, 10_000]).unwrap();
    assert!(r.lhs < 0.02 && r.rhs == 0.0 && r.pass);
}

#[test]
fn duality_traces() {
    let lambdas = [0.25, 0.5, 1.0, 2.0, 4.0];
    let hs = duality_library();
    let d =
        prokhorov_duality_diagnostic(&ArrayFamily::Rademacher, &[1, 10, 100, 1000], &lambdas, &hs)
            .unwrap();
    for w in d.prokhorov_max.windows(2) {
        assert!(w[1] < w[0], "{:?}", d.prokhorov_max);
    }
    // Lattice aliasing against the narrow steps makes the test-function
    // side wobble once it is below 1e-3, so only the overall decay is
    // asserted there.
    let h = &d.test_function_max;
    assert!(h[1] < h[0] && h.iter().skip(2).all(|&v| v < h[1]), "{h:?}");
    assert!(*h.last().unwrap() < 1e-3, "{h:?}");
    let d = prokhorov_duality_diagnostic(
        &ArrayFamily::jump(0.4).unwrap(),
        &[500, 1000, 2000],
        &lambdas,
        &hs,
    )
    .unwrap();
    // The jump component keeps the test-function side at a positive level,
    // while the small-λ Prokhorov values still carry the n^{-1/2} lattice
    // term at this scale.
    let h = &d.test_function_max;
    assert!(h.iter().all(|&v| v > 5e-3), "{h:?}");
    assert!((h[2] - h[1]).abs() < 0.05 * h[1], "{h:?}");
    let p = &d.prokhorov_max;
    assert!(p.windows(2).all(|w| w[1] < w[0]) && p[2] > h[2], "{p:?}");
}

#[test]
fn monte_carlo_and_exact_lhs_agree() {
    let mode = LhsMode::MonteCarlo {
        reps: 200_000,
        seed: 31,
        delta: 1e-3,
    };
    for fam in [ArrayFamily::Rademacher, ArrayFamily::jump(0.2).unwrap()] {
        for n in [5, 60] {
            let exact = osipov_feller_check(&fam, n, OSIPOV_FELLER_C).unwrap();
            let mc = osipov_feller_check_with(&fam, n, OSIPOV_FELLER_C, mode).unwrap();
            assert!((exact.lhs - mc.lhs).abs() <= exact.error_budget + mc.error_budget);
            assert_eq!(exact.rhs, mc.rhs);
            let mc = truncated_eps_check_with(&fam, n, 0.3, OSIPOV_FELLER_C, mode).unwrap();
            assert!(mc.pass);
        }
    }
}

#[test]
fn report_json_round_trip() {
    let r = big_inequality_check(
        &ArrayFamily::jump(0.1).unwrap(),
        10,
        &TestFunction::ScaledArctan,
        0.3,
    )
    .unwrap();
    let text = serde_json::to_string(&r).unwrap();
    let back: BoundReport = serde_json::from_str(&text).unwrap();
    assert_eq!(back, r);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["lhs_method"], "exact");
    assert_eq!(v["params"]["h"], "scaled_arctan");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn row_sums_are_standardized(base in arb_base(), n in 1usize..40) {
        let fam = ArrayFamily::iid_scaled(base).unwrap();
        let cell = fam.cell_distribution(n, 1).unwrap();
        prop_assert!(cell.mean().abs() < 1e-12);
        prop_assert!((n as f64 * cell.variance() - 1.0).abs() < 1e-9);
        let row = fam.row_sum_exact(n, 0.0).unwrap().law;
        prop_assert!((row.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(row.mean().abs() < 1e-9);
        prop_assert!((row.variance() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn berry_esseen_type_bound_on_random_bases(base in arb_base(), n in 1usize..60) {
        let fam = ArrayFamily::iid_scaled(base).unwrap();
        let r = osipov_feller_check(&fam, n, OSIPOV_FELLER_C).unwrap();
        prop_assert!(r.pass, "{:?}", r);
        prop_assert!(r.pass == (r.lhs <= r.rhs + r.error_budget));
    }

    #[test]
    fn stein_inequality_on_random_cells(theta in 0.0f64..0.9, n in 1usize..80, eps in 0.05f64..1.5, which in 0usize..5) {
        let fam = ArrayFamily::jump(theta).unwrap();
        let h = &TestFunction::library()[which];
        let r = big_inequality_check(&fam, n, h, eps).unwrap();
        prop_assert!(r.pass, "{:?}", r);
    }

    #[test]
    fn derivative_bounds_for_random_steps(center in -3.0f64..3.0, width in 0.3f64..4.0) {
        let h = TestFunction::smooth_step(center, width).unwrap();
        let r = check_lemma42(&h).unwrap();
        prop_assert!(r.pass && r.margin >= 0.0, "{:?}", r);
    }

    #[test]
    fn samples_replay_and_track_exact(theta in 0.0f64..0.6, n in 1usize..50, seed in any::<u64>()) {
        let fam = ArrayFamily::jump(theta).unwrap();
        let a = fam.row_sum_sample(n, 20_000, seed).unwrap();
        let b = fam.row_sum_sample(n, 20_000, seed).unwrap();
        prop_assert_eq!(&a, &b);
        let exact = fam.row_sum_exact(n, 0.0).unwrap().law;
        // DKW at δ = 1e-6 so the property is essentially never flaky.
        let band = clt_lab::bounds::dkw_band(20_000, 1e-6);
        prop_assert!(kolmogorov(&a, &exact).value <= band);
    }
}
