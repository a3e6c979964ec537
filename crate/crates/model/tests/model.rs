use num_rational::BigRational;
use proptest::prelude::*;
use sdemsr_model::*;

#[test]
fn plateau_is_one_on_the_plateau_and_zero_outside() {
    let chi = CutoffFunction::plateau(0.0, 1.0, 2.0, 3.0);
    assert_eq!(chi.eval(-0.1), 0.0);
    assert_eq!(chi.eval(3.0), 0.0);
    assert_eq!(chi.eval(1.5), 1.0);
    assert!((chi.eval(0.5) - 0.5).abs() < 1e-15);
    assert!(chi.validate().is_ok());
    assert!(CutoffFunction::plateau(0.0, 2.0, 1.0, 3.0).validate().is_err());
}

#[test]
fn bump_peaks_at_one() {
    let chi = CutoffFunction::bump(-1.0, 1.0);
    assert!((chi.eval(0.0) - 1.0).abs() < 1e-15);
    assert!(chi.eval(0.999) < 1e-100);
}

#[test]
fn plateau_integral_is_symmetric_ramp_area() {
    // Each ramp integrates to half its width by the symmetry S(u) + S(1-u) = 1.
    let chi = CutoffFunction::plateau(0.0, 1.0, 2.0, 3.0);
    let total = chi.integral_pow_until(1, 10.0);
    assert!((total - 2.0).abs() < 1e-9, "{total}");
}

#[test]
fn polynomial_derivatives_match_finite_differences() {
    let p = Polynomial1D::new(vec![
        CoefficientFn::Constant(0.3),
        CoefficientFn::PolyT(vec![1.0, 2.0]),
        CoefficientFn::Sinusoid { amplitude: 0.5, frequency: 2.0, phase: 0.1, offset: 0.0 },
        CoefficientFn::Constant(-0.7),
    ]);
    assert_eq!(p.degree(), Some(3));
    let (x, t, h) = (0.4, 0.9, 1e-5);
    let fd = (p.eval(x + h, t) - p.eval(x - h, t)) / (2.0 * h);
    assert!((p.derivative(1, x, t) - fd).abs() < 1e-8);
    assert!((p.derivative(3, x, t) - 6.0 * -0.7).abs() < 1e-12);
    assert_eq!(p.derivative(4, x, t), 0.0);
}

#[test]
fn trailing_zero_coefficients_are_trimmed() {
    let p = Polynomial1D::from_constants(&[1.0, 0.0, 0.0]);
    assert_eq!(p.degree(), Some(0));
    assert!(Polynomial1D::from_constants(&[0.0]).is_zero());
    assert_eq!(Polynomial1D::zero().degree(), None);
}

#[test]
fn rationals_parse_exactly() {
    let half = BigRational::new(1.into(), 2.into());
    assert_eq!(parse_rational("1/2").unwrap(), half);
    assert_eq!(parse_rational("0.5").unwrap(), half);
    assert_eq!(parse_rational("5e-1").unwrap(), half);
    assert_eq!(parse_rational("-0.25").unwrap(), BigRational::new((-1).into(), 4.into()));
    assert!(parse_rational("1/0").is_err());
    assert!(parse_rational("abc").is_err());
}

#[test]
fn model_validation_rejects_bad_parameters() {
    let chi = CutoffFunction::plateau(0.0, 1.0, 2.0, 3.0);
    let m = ModelSpec::new(Polynomial1D::zero(), Polynomial1D::from_constants(&[1.0]), 1.0, 0.0, chi);
    assert!(m.validate().is_ok());
    let mut bad = m.clone();
    bad.sigma = 0.0;
    assert!(matches!(bad.validate(), Err(ModelError::BadSigma(_))));
    let bad = m.clone().with_theta0(BigRational::new(3.into(), 2.into()));
    assert!(matches!(bad.validate(), Err(ModelError::BadTheta(_))));
    let bad = m.with_epsilon(-1.0);
    assert!(matches!(bad.validate(), Err(ModelError::BadEpsilon(_))));
}

#[test]
fn monotone_cubic_preserves_monotonicity() {
    let c = MonotoneCubic::new(vec![0.0, 1.0, 2.0, 3.0], vec![0.0, 0.1, 0.9, 1.0]).unwrap();
    let mut prev = -1.0;
    for k in 0..=300 {
        let v = c.eval(k as f64 / 100.0);
        assert!(v >= prev - 1e-15);
        prev = v;
    }
    assert_eq!(c.eval(-5.0), 0.0);
    assert!(MonotoneCubic::new(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
}

proptest! {
    #[test]
    fn cutoff_stays_in_unit_interval(t in -1.0f64..4.0, k in 0.2f64..3.0) {
        let chi = CutoffFunction::Plateau { a: 0.0, a1: 1.0, b1: 2.0, b: 3.0, sharpness: k };
        let v = chi.eval(t);
        prop_assert!((0.0..=1.0).contains(&v));
    }

    #[test]
    fn integrate_1d_matches_polynomial_antiderivative(c in proptest::collection::vec(-2.0f64..2.0, 1..6), b in 0.1f64..3.0) {
        let q = integrate_1d(|x| horner(&c, x), 0.0, b, &[b / 3.0], 1e-13);
        let exact: f64 = c.iter().enumerate().map(|(k, ck)| ck * b.powi(k as i32 + 1) / (k as f64 + 1.0)).sum();
        prop_assert!((q.value - exact).abs() < 1e-10 * (1.0 + exact.abs()));
    }

    #[test]
    fn decimal_and_fraction_forms_agree(p in -1000i64..1000, e in 0u32..4) {
        let q = 10i64.pow(e);
        let text = format!("{}", p as f64 / q as f64);
        let r = parse_rational(&text).unwrap();
        prop_assert_eq!(r, BigRational::new(p.into(), q.into()));
    }
}
