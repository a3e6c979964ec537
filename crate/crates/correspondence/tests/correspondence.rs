use proptest::prelude::*;
use sdemsr_diagram::{rat, Rational};
use sdemsr_evaluator::QuadConfig;
use sdemsr_model::{CutoffFunction, ModelSpec, Polynomial1D};
use sdemsr_msr::Monomial;
use sdemsr_oracle::{exact_benchmark, simulate, Benchmark, MCConfig, Scheme};

use sdemsr_correspondence::*;

fn model(alpha: &[f64], beta: &[f64], theta0: Rational) -> ModelSpec {
    ModelSpec::new(
        Polynomial1D::from_constants(alpha),
        Polynomial1D::from_constants(beta),
        0.9,
        1.1,
        CutoffFunction::plateau(0.0, 0.2, 1.2, 1.4),
    )
    .with_theta0(theta0)
}

const TIMES: [f64; 2] = [0.7, 1.25];

#[test]
fn additive_pure_noise_gives_the_q_kernel() {
    let m = model(&[], &[1.0], Rational::from_integer(0.into()));
    let q = QuadConfig::default();
    let r = check_additive(&Monomial::x(&[0, 1]), &TIMES, &m, 4, Some(&q)).unwrap();
    assert!(r.passed, "{}", r.summary());
    let second = r.orders[2].numeric.as_ref().unwrap().sde_value;
    let want = 0.9 * m.chi.integral_pow_until(2, 0.7);
    assert!((second - want).abs() < 1e-8);
    assert!(r.orders[1].sde_classes == 0 && r.orders[3].sde_classes == 0);
}

#[test]
fn additive_linear_drift_mean_follows_the_exact_mean() {
    let m = model(&[0.0, 0.3], &[1.0], rat(1, 2));
    let q = QuadConfig::default();
    let r = check_additive(&Monomial::x(&[1]), &TIMES, &m, 3, Some(&q)).unwrap();
    assert!(r.passed);
    // β is x-independent, so the mean solves the noiseless linear equation
    for eps in [0.05f64, 0.1] {
        let sum: f64 = r.orders.iter().map(|o| o.numeric.as_ref().unwrap().sde_value * eps.powi(o.order as i32)).sum();
        let exact = exact_benchmark(Benchmark::LinearMean, &m.clone().with_epsilon(eps), &[TIMES[1]]).unwrap()[0].value;
        assert!((sum - exact).abs() < 2.0 * (0.3 * eps * 1.25f64).powi(4), "ε = {eps}");
    }
}

#[test]
fn order_zero_is_the_initial_value() {
    let m = model(&[0.0, 0.3], &[1.0], rat(0, 1));
    let r = check_additive(&Monomial::x(&[0, 0, 1]), &TIMES, &m, 0, Some(&QuadConfig::default())).unwrap();
    assert_eq!(r.orders.len(), 1);
    let n = r.orders[0].numeric.as_ref().unwrap();
    assert_eq!(n.sde_value, 1.1f64.powi(3));
    assert_eq!(n.msr_value, n.sde_value);
}

#[test]
fn multiplicative_mean_and_correlation() {
    let m = model(&[], &[0.0, 1.0], rat(1, 2));
    let q = QuadConfig::default();
    let r = check_multiplicative(&Monomial::x(&[0]), &TIMES, &m, 4, Some(&q)).unwrap();
    assert!(r.passed);
    let v = m.chi.integral_pow_until(2, 0.7);
    assert!((r.orders[2].numeric.as_ref().unwrap().msr_value - 0.45 * 1.1 * v).abs() < 1e-8);

    let r = check_multiplicative(&Monomial::x(&[0, 1]), &TIMES, &m, 2, Some(&q)).unwrap();
    assert!(r.passed);
    let total = r.orders[2].numeric.as_ref().unwrap().msr_value;
    let single_legs = 0.45 * 1.21 * (v + m.chi.integral_pow_until(2, 1.25));
    let connected = total - single_legs;
    assert!((connected - 0.9 * 1.21 * v).abs() < 1e-8);
}

#[test]
fn shape_and_convention_errors() {
    let m = model(&[], &[0.0, 1.0], rat(0, 1));
    assert!(matches!(
        check_multiplicative(&Monomial::x(&[0]), &TIMES, &m, 2, None),
        Err(CheckError::ThetaMismatch(t)) if t == "0"
    ));
    assert!(matches!(check_additive(&Monomial::x(&[0]), &TIMES, &m, 2, None), Err(CheckError::ShapeMismatch(_))));
    let drift = model(&[0.1], &[0.0, 1.0], rat(1, 2));
    assert!(matches!(
        check_multiplicative(&Monomial::x(&[0]), &TIMES, &drift, 2, None),
        Err(CheckError::ShapeMismatch(_))
    ));
    let open = Monomial::new(&[(0, 1)], &[(1, 1)], rat(1, 1)).unwrap();
    assert!(matches!(
        check_general(&open, &TIMES, &drift, 2, None),
        Err(CheckError::ResponseLegs)
    ));
    assert!(matches!(
        check_additive(&Monomial::x(&[0, 1]), &[1.0, 1.0], &model(&[], &[1.0], rat(0, 1)), 2, None),
        Err(CheckError::Msr(_) | CheckError::Sde(_))
    ));
}

#[test]
fn general_check_reduces_to_the_special_cases_and_is_flagged() {
    let additive = model(&[0.0, 0.3], &[1.0], rat(0, 1));
    let r = check_general(&Monomial::x(&[0]), &TIMES, &additive, 3, None).unwrap();
    assert!(r.passed && r.experimental);
    assert!(r.notes.iter().any(|n| n.contains("EXPERIMENTAL")));
    let mult = model(&[], &[0.0, 1.0], rat(0, 1));
    let g = check_general(&Monomial::x(&[0, 1]), &TIMES, &mult, 4, None).unwrap();
    let s = check_multiplicative(&Monomial::x(&[0, 1]), &TIMES, &mult.with_theta0(rat(1, 2)), 4, None).unwrap();
    assert!(g.passed && s.passed);
    assert_eq!(
        g.orders.iter().map(|o| o.msr_classes).collect::<Vec<_>>(),
        s.orders.iter().map(|o| o.msr_classes).collect::<Vec<_>>()
    );
}

#[test]
fn general_case_against_stratonovich_simulation() {
    let eps = 0.3f64;
    let m = model(&[0.0, 0.5], &[0.0, 1.0], rat(1, 2));
    let r = check_general(&Monomial::x(&[0]), &[1.25], &m, 4, Some(&QuadConfig::default())).unwrap();
    assert!(r.passed, "{}", r.summary());
    let series: f64 = r.orders.iter().map(|o| o.numeric.as_ref().unwrap().sde_value * eps.powi(o.order as i32)).sum();
    let cfg = MCConfig {
        scheme: Scheme::Heun,
        dt: 2e-3,
        paths: 40_000,
        seed: 11,
        times: vec![1.25],
        monomials: vec![vec![0]],
        antithetic: false,
    };
    let mc = simulate(&m.clone().with_epsilon(eps), &cfg).unwrap();
    let e = &mc.estimates[0];
    assert!((e.estimate - series).abs() < 3.0 * e.stderr, "{series} vs {e:?}");
}

#[test]
fn report_serialises_with_diffs() {
    let m = model(&[], &[0.0, 1.0], rat(1, 2));
    let r = check_multiplicative(&Monomial::x(&[0]), &TIMES, &m, 2, None).unwrap();
    let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
    assert_eq!(json["kind"], "multiplicative");
    assert_eq!(json["orders"].as_array().unwrap().len(), 3);
    assert_eq!(json["passed"], true);
    assert!(r.summary().contains("verdict: pass"));

    // A deliberate mismatch shows up as a diff with text forms.
    let sde = sdemsr_sde::sde_expectation(&[(0, 1)], &rat(1, 1), &TIMES, &m, 2).unwrap();
    let msr = sdemsr_msr::msr_expectation(&Monomial::x(&[0]), &TIMES, &m.clone().with_theta0(rat(0, 1)), 2).unwrap();
    let recs = structural(&sde, &msr);
    assert!(!recs[2].structural_equal);
    assert_eq!(recs[2].diff.len(), 1);
    assert!(recs[2].diff[0].diagram.starts_with("diagram"));
    assert_eq!(recs[2].diff[0].sde_coefficient, "1/2");
    assert_eq!(recs[2].diff[0].msr_coefficient, "0");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn multiplicative_check_holds_for_random_noise(b0 in -2i32..3, b1 in -3i32..4, b2 in -1i32..2, two in proptest::bool::ANY) {
        prop_assume!(b1 != 0 || b2 != 0);
        let beta = [b0 as f64 / 2.0, b1 as f64 / 2.0, b2 as f64 / 4.0];
        let m = model(&[], &beta, rat(1, 2));
        let f = if two { Monomial::x(&[0, 1]) } else { Monomial::x(&[1]) };
        let r = check_multiplicative(&f, &TIMES, &m, 2, None).unwrap();
        prop_assert!(r.passed);
    }

    #[test]
    fn additive_check_holds_for_random_drift(a0 in -2i32..3, a1 in -3i32..4, a2 in -1i32..2) {
        let alpha = [a0 as f64 / 2.0, a1 as f64 / 2.0, a2 as f64 / 4.0];
        let m = model(&alpha, &[1.0], rat(0, 1));
        let r = check_additive(&Monomial::x(&[0, 1]), &TIMES, &m, 3, None).unwrap();
        prop_assert!(r.passed);
    }
}
