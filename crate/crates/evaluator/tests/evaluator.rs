use proptest::prelude::*;
use sdemsr_diagram::{diagram_from_text, Diagram, DiagramSeries, DiagramSum};
use sdemsr_evaluator::*;
use sdemsr_model::{integrate_1d, CoefficientFn, CutoffFunction, ModelSpec, Polynomial1D};

fn d(text: &str) -> Diagram {
    diagram_from_text(text).unwrap()
}

fn model(alpha: &[f64], beta: &[f64]) -> ModelSpec {
    ModelSpec::new(
        Polynomial1D::from_constants(alpha),
        Polynomial1D::from_constants(beta),
        0.8,
        1.3,
        CutoffFunction::plateau(0.0, 0.4, 1.6, 2.0),
    )
}

/// ∫_{-∞}^{t} χ(s)^p ds by independent adaptive quadrature.
fn chi_int(m: &ModelSpec, p: i32, t: f64) -> f64 {
    m.chi.integral_pow_until(p, t)
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs().max(1e-300)
}

#[test]
fn external_only_diagram_is_a_power_of_x0() {
    let m = model(&[0.5], &[1.0]);
    let dg = d("diagram chi=0 coeff=3/1\nv0 ext(0,2,0)\nv1 ext(1,1,0)\nend");
    let e = evaluate_diagram(&dg, &m, &[0.3, 0.9], &QuadConfig::default()).unwrap();
    assert_eq!(e, Estimate::exact(3.0 * 1.3f64.powi(3)));
}

#[test]
fn single_drift_vertex_integrates_the_cutoff() {
    let m = model(&[0.7], &[]);
    let dg = d("diagram chi=1 coeff=1/1\nv0 ext(0,1,0)\nv1 drift(0)\ne 0.0 -> 1.0\nend");
    for t in [-0.5, 0.2, 1.0, 1.9, 3.0] {
        let e = evaluate_diagram(&dg, &m, &[t], &QuadConfig::default()).unwrap();
        let want = 0.7 * chi_int(&m, 1, t);
        assert!((e.value - want).abs() <= 1e-9 + 1e-7 * want.abs(), "t={t}: {} vs {want}", e.value);
    }
}

#[test]
fn drift_chain_gives_half_square() {
    // α = λx: Drift(1) carries λ, Drift(0) carries λx₀.
    let m = model(&[0.0, 0.6], &[]);
    let dg = d("diagram chi=2 coeff=1/1\nv0 ext(0,1,0)\nv1 drift(1)\nv2 drift(0)\ne 0.0 -> 1.0\ne 1.0 -> 2.0\nend");
    let t = 1.2;
    let e = evaluate_diagram(&dg, &m, &[t], &QuadConfig::default()).unwrap();
    let c = chi_int(&m, 1, t);
    assert!(close(e.value, 0.6 * 0.6 * 1.3 * c * c / 2.0, 1e-6));
}

#[test]
fn branching_drift_gives_cube() {
    let mu = 0.4;
    let m = model(&[0.0, 0.0, mu], &[]);
    let dg = d("diagram chi=3 coeff=1/2\nv0 ext(0,1,0)\nv1 drift(2)\nv2 drift(0)\nv3 drift(0)\n\
                e 0.0 -> 1.0\ne 1.0 -> 2.0\ne 1.0 -> 3.0\nend");
    let t = 1.7;
    let e = evaluate_diagram(&dg, &m, &[t], &QuadConfig::default()).unwrap();
    let c = chi_int(&m, 1, t);
    let x0: f64 = 1.3;
    let want = 0.5 * 2.0 * mu * (mu * x0 * x0).powi(2) * c.powi(3) / 3.0;
    assert!(close(e.value, want, 1e-6), "{} vs {want}", e.value);
}

#[test]
fn two_point_noise_diagram_is_sigma_q() {
    let m = model(&[], &[0.0, 1.0]);
    let dg = d("diagram chi=2 coeff=1/1\nv0 ext(0,1,0)\nv1 ext(1,1,0)\nv2 noise(0,0)\ne 0.0 -> 2.0\ne 1.0 -> 2.1\nend");
    let (t1, t2) = (1.1, 0.7);
    let e = evaluate_diagram(&dg, &m, &[t1, t2], &QuadConfig::default()).unwrap();
    let want = 0.8 * 1.3f64.powi(2) * chi_int(&m, 2, 0.7);
    assert!(close(e.value, want, 1e-6));
    let direct = kernel_at(&m, 0.7);
    assert!(close(direct, want, 1e-10));
}

#[test]
fn epsilon_scales_by_chi_order() {
    let m = model(&[0.0, 0.6], &[]);
    let dg = d("diagram chi=2 coeff=1/1\nv0 ext(0,1,0)\nv1 drift(1)\nv2 drift(0)\ne 0.0 -> 1.0\ne 1.0 -> 2.0\nend");
    let q = QuadConfig::default();
    let a = evaluate_diagram(&dg, &m, &[1.0], &q).unwrap().value;
    let b = evaluate_diagram(&dg, &m.clone().with_epsilon(0.3), &[1.0], &q).unwrap().value;
    assert!(close(b, 0.09 * a, 1e-14));
    let z = evaluate_diagram(&dg, &m.with_epsilon(0.0), &[1.0], &q).unwrap().value;
    assert_eq!(z, 0.0);
}

#[test]
fn leaf_kernels_agree_with_explicit_integration() {
    let m = model(&[0.2, 0.5], &[0.3, 1.0]);
    let dg = d("diagram chi=5 coeff=1/1\nv0 ext(0,1,0)\nv1 ext(1,3,0)\nv2 drift(1)\nv3 noise(0,0)\nv4 noise(0,0)\n\
                e 0.0 -> 2.0\ne 2.0 -> 3.0\ne 1.0 -> 3.1\ne 1.0 -> 4.0\ne 1.0 -> 4.1\nend");
    let times = [1.5, 0.9];
    let q = QuadConfig::default();
    let plain = Integrand::from_diagram(&dg, &m, &times, false).unwrap();
    let kern = Integrand::from_diagram(&dg, &m, &times, true).unwrap();
    assert_eq!(kern.payloads.len(), 1);
    assert_eq!(kern.kernels.len(), 2);
    let a = evaluate_integrand(&plain, &m, &q, &Propagator::Theta).unwrap();
    let b = evaluate_integrand(&kern, &m, &q, &Propagator::Theta).unwrap();
    assert!(close(a.value, b.value, 1e-6), "{} vs {}", a.value, b.value);
}

#[test]
fn unbound_slot_is_reported() {
    let m = model(&[1.0], &[]);
    let dg = d("diagram chi=1 coeff=1/1\nv0 ext(3,1,0)\nv1 drift(0)\ne 0.0 -> 1.0\nend");
    assert_eq!(evaluate_diagram(&dg, &m, &[0.0], &QuadConfig::default()), Err(EvalError::UnboundSlot { slot: 3 }));
}

#[test]
fn open_diagrams_are_rejected() {
    let m = model(&[1.0], &[]);
    let dg = d("diagram chi=0 coeff=1/1\nv0 ext(0,1,0)\nv1 ext(1,0,1)\nend");
    assert_eq!(evaluate_diagram(&dg, &m, &[0.0, 1.0], &QuadConfig::default()), Err(EvalError::NotClosed));
}

#[test]
fn resummed_propagator_matches_linear_mean() {
    // α = α₁x + c with the linear part resummed: ⟨x(t)⟩ = x₀e^{A(t)} + c∫_{s<t} e^{A(t)-A(s)}χ(s)ds.
    let lam = 0.9;
    let c0 = 0.25;
    let m = model(&[c0], &[]);
    let prop = Propagator::Resummed { alpha1: CoefficientFn::Constant(lam) };
    let t = 1.4;
    let q = QuadConfig::default();
    let zero = d("diagram chi=0 coeff=1/1\nv0 ext(0,1,0)\nend");
    let one = d("diagram chi=1 coeff=1/1\nv0 ext(0,1,0)\nv1 drift(0)\ne 0.0 -> 1.0\nend");
    let v0 = evaluate_integrand(&Integrand::from_diagram(&zero, &m, &[t], false).unwrap(), &m, &q, &prop).unwrap();
    let v1 = evaluate_integrand(&Integrand::from_diagram(&one, &m, &[t], false).unwrap(), &m, &q, &prop).unwrap();
    let a = |s: f64| lam * chi_int(&m, 1, s);
    let want1 = integrate_1d(|s| (a(t) - a(s)).exp() * m.chi.eval(s), 0.0, t, &[0.4], 1e-12).value * c0;
    assert!(close(v0.value, 1.3 * a(t).exp(), 1e-10));
    assert!(close(v1.value, want1, 1e-6), "{} vs {want1}", v1.value);
}

#[test]
fn series_sums_orders_and_scales() {
    let m = model(&[0.7], &[]).with_epsilon(0.5);
    let mut s = DiagramSeries::with_order(1);
    s.entries[0] = DiagramSum::collect([&d("diagram chi=0 coeff=1/1\nv0 ext(0,1,0)\nend")]).unwrap();
    s.entries[1] =
        DiagramSum::collect([&d("diagram chi=1 coeff=1/1\nv0 ext(0,1,0)\nv1 drift(0)\ne 0.0 -> 1.0\nend")]).unwrap();
    let n = evaluate_series(&s, &m, &[1.0], &QuadConfig::default()).unwrap();
    let c = chi_int(&m, 1, 1.0);
    assert!(close(n.coefficients[1].value, 0.7 * c, 1e-7));
    assert!(close(n.sum().value, 1.3 + 0.5 * 0.7 * c, 1e-7));
    assert!(close(n.partial_sum_at(1, 0.2).value, 1.3 + 0.2 * 0.7 * c, 1e-7));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// Relabelling internal vertices does not change the value.
    #[test]
    fn relabelling_invariance(lam in -1.0f64..1.0, mu in -1.0f64..1.0, t in 0.1f64..2.5) {
        let m = model(&[0.3, lam, mu], &[]);
        let a = d("diagram chi=4 coeff=1/1\nv0 ext(0,1,0)\nv1 drift(2)\nv2 drift(1)\nv3 drift(0)\nv4 drift(0)\n\
                   e 0.0 -> 1.0\ne 1.0 -> 2.0\ne 1.0 -> 3.0\ne 2.0 -> 4.0\nend");
        let b = d("diagram chi=4 coeff=1/1\nv0 ext(0,1,0)\nv1 drift(0)\nv2 drift(0)\nv3 drift(1)\nv4 drift(2)\n\
                   e 0.0 -> 4.0\ne 4.0 -> 3.0\ne 4.0 -> 2.0\ne 3.0 -> 1.0\nend");
        prop_assert_eq!(sdemsr_diagram::canonical_key(&a).unwrap(), sdemsr_diagram::canonical_key(&b).unwrap());
        let q = QuadConfig::default();
        let va = evaluate_diagram(&a, &m, &[t], &q).unwrap();
        let vb = evaluate_diagram(&b, &m, &[t], &q).unwrap();
        prop_assert!((va.value - vb.value).abs() <= 1e-12 * (1.0 + va.value.abs()));
    }

    /// The order-n drift chain for α = λx equals λⁿx₀Cⁿ/n!.
    #[test]
    fn drift_chains_match_exponential_terms(lam in -1.5f64..1.5, t in 0.05f64..2.2, n in 1usize..5) {
        let m = model(&[0.0, lam], &[]);
        let mut text = format!("diagram chi={n} coeff=1/1\nv0 ext(0,1,0)\n");
        for k in 1..=n {
            text += &format!("v{k} drift({})\n", if k < n { 1 } else { 0 });
        }
        for k in 0..n {
            text += &format!("e {k}.0 -> {}.0\n", k + 1);
        }
        text += "end";
        let e = evaluate_diagram(&d(&text), &m, &[t], &QuadConfig::default()).unwrap();
        let c = chi_int(&m, 1, t);
        let fact: f64 = (1..=n).map(|k| k as f64).product();
        let want = lam.powi(n as i32) * 1.3 * c.powi(n as i32) / fact;
        prop_assert!((e.value - want).abs() <= 1e-10 + 1e-6 * want.abs(), "{} vs {}", e.value, want);
    }
}
