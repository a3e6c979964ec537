use num_traits::{One, Zero};
use proptest::prelude::*;
use sdemsr_diagram::{rat, validate_diagram, DiagramSeries, Rational, VertexKind};
use sdemsr_evaluator::{evaluate_series, QuadConfig};
use sdemsr_model::{CutoffFunction, ModelSpec, Polynomial1D};
use sdemsr_msr::{msr_expectation, Monomial};
use sdemsr_sde::*;

fn model(alpha: &[f64], beta: &[f64]) -> ModelSpec {
    ModelSpec::new(
        Polynomial1D::from_constants(alpha),
        Polynomial1D::from_constants(beta),
        0.7,
        1.2,
        CutoffFunction::plateau(0.0, 0.3, 1.7, 2.0),
    )
    .with_theta0(rat(1, 2))
}

fn assert_same_series(a: &DiagramSeries, b: &DiagramSeries, what: &str) {
    assert_eq!(a.entries.len(), b.entries.len());
    for (m, (x, y)) in a.entries.iter().zip(&b.entries).enumerate() {
        let diff = x.diff(y);
        assert!(diff.is_empty(), "{what}, order {m}: {} differing classes, first {:?}", diff.len(), diff.first());
    }
}

/// Parent array plus ξ flags, root first.
fn flatten(t: &XiTree, parent: Option<usize>, out: &mut Vec<(Option<usize>, bool)>) {
    let me = out.len();
    out.push((parent, t.xi));
    for c in &t.children {
        flatten(c, Some(me), out);
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// Counts node permutations preserving the parent map and the ξ flags.
fn tree_automorphisms(t: &XiTree) -> u64 {
    let mut nodes = Vec::new();
    flatten(t, None, &mut nodes);
    permutations(nodes.len())
        .into_iter()
        .filter(|p| {
            nodes.iter().enumerate().all(|(v, &(parent, xi))| {
                let (img_parent, img_xi) = nodes[p[v]];
                img_xi == xi && img_parent == parent.map(|q| p[q])
            })
        })
        .count() as u64
}

#[test]
fn tree_coefficients_are_inverse_symmetry_factors() {
    let m = model(&[0.3, 0.5, 0.2], &[1.0, 0.4, 0.1]);
    let sol = perturb_solution(&m, 4).unwrap();
    assert!(sol.entries[0].is_empty());
    for (n, level) in sol.entries.iter().enumerate().skip(1) {
        assert!(!level.is_empty());
        for (t, c) in level {
            assert_eq!(t.size() as usize, n);
            assert_eq!(*c, Rational::one() / Rational::from_integer(tree_automorphisms(t).into()), "{t:?}");
        }
    }
    // order 1: one α leaf and one ξ leaf
    assert_eq!(sol.entries[1].len(), 2);
}

#[test]
fn degrees_prune_the_trees() {
    // linear drift, constant noise: only chains of α with a ξ or α leaf
    let m = model(&[0.0, 1.0], &[1.0]);
    let sol = perturb_solution(&m, 4).unwrap();
    for level in &sol.entries[1..] {
        assert_eq!(level.len(), 2);
        for t in level.keys() {
            assert!(t.xi_count() <= 1);
        }
    }
}

#[test]
fn every_tree_blooms_from_a_smaller_one() {
    let m = model(&[0.3, 0.5, 0.2], &[1.0, 0.4]);
    let sol = perturb_solution(&m, 4).unwrap();
    for n in 2..=4 {
        for t in sol.entries[n].keys() {
            let smaller = unbloom(t);
            assert!(!smaller.is_empty());
            assert!(smaller.iter().any(|s| sol.entries[n - 1].contains_key(s)), "{t:?}");
        }
    }
}

#[test]
fn odd_orders_vanish_for_pure_noise() {
    for beta in [&[0.0, 1.0][..], &[1.0, 0.0, 0.2]] {
        let m = model(&[], beta);
        let s = sde_expectation(&[(0, 1), (1, 1)], &Rational::one(), &[0.5, 1.1], &m, 4).unwrap();
        assert!(s.get(1).is_empty() && s.get(3).is_empty());
        assert!(!s.get(2).is_empty());
    }
}

#[test]
fn contracted_diagrams_are_well_formed() {
    let m = model(&[0.0, 0.5, 0.3], &[1.0, 0.5]);
    let s = sde_expectation(&[(0, 1), (1, 1)], &Rational::one(), &[0.5, 1.1], &m, 4).unwrap();
    for sum in &s.entries {
        for d in sum.diagrams() {
            validate_diagram(d).unwrap();
            assert!(d.is_closed());
            for (v, k) in d.vertices.iter().enumerate() {
                if matches!(k, VertexKind::Noise { .. }) {
                    assert_eq!(d.in_degree(v), 2);
                }
                if matches!(k, VertexKind::Correction { .. }) {
                    assert_eq!(d.in_degree(v), 1);
                }
            }
        }
    }
}

#[test]
fn adjacent_pairs_carry_one_half() {
    // E[x(t)] with β = x at order 2 is one correction vertex with weight 1/2.
    let m = model(&[], &[0.0, 1.0]);
    let s = sde_expectation(&[(0, 1)], &Rational::one(), &[1.5], &m, 2).unwrap();
    assert_eq!(s.get(2).len(), 1);
    let d = s.get(2).diagrams().next().unwrap();
    assert_eq!(d.coefficient, rat(1, 2));
    assert!(matches!(d.vertices[1], VertexKind::Correction { out: [0, 0] }));
    // numerically (σ/2) x₀ ∫χ²
    let n = evaluate_series(&s, &m, &[1.5], &QuadConfig::default()).unwrap();
    let expected = 0.7 / 2.0 * 1.2 * m.chi.integral_pow_until(2, 1.5);
    assert!((n.coefficients[2].value - expected).abs() < 1e-8);
}

#[test]
fn one_pair_of_leaves_gives_the_two_point_kernel() {
    // additive noise: the order-2 part of E[x(t)x(t')] is σβ₀² ∫_{s<min} χ²
    let m = model(&[], &[1.3]);
    let s = sde_expectation(&[(0, 1), (1, 1)], &Rational::one(), &[0.8, 1.4], &m, 2).unwrap();
    assert_eq!(s.get(2).len(), 1);
    let n = evaluate_series(&s, &m, &[0.8, 1.4], &QuadConfig::default()).unwrap();
    let expected = 0.7 * 1.3 * 1.3 * m.chi.integral_pow_until(2, 0.8);
    assert!((n.coefficients[2].value - expected).abs() < 1e-8);
}

fn monomial(legs: &[(usize, u32)]) -> Monomial {
    let slots: Vec<usize> = legs.iter().flat_map(|&(s, k)| std::iter::repeat_n(s, k as usize)).collect();
    Monomial::x(&slots)
}

#[test]
fn sde_and_msr_expansions_agree() {
    let cases: [(&[f64], &[f64], u32); 5] = [
        (&[0.0, 0.8], &[1.0], 4),
        (&[0.0, 0.8, -0.4], &[1.0], 4),
        (&[], &[0.0, 1.0], 4),
        (&[], &[1.0, 0.0, 0.2], 4),
        (&[0.1, 0.5], &[0.3, 1.0], 3),
    ];
    let observables: [&[(usize, u32)]; 3] = [&[(0, 1)], &[(0, 1), (1, 1)], &[(0, 2)]];
    let times = [0.6, 1.3];
    for (alpha, beta, order) in cases {
        let m = model(alpha, beta);
        for legs in observables {
            let sde = sde_expectation(legs, &Rational::one(), &times, &m, order).unwrap();
            let msr = msr_expectation(&monomial(legs), &times, &m, order).unwrap();
            assert!(!msr.get(2).is_empty());
            assert_same_series(&sde, &msr, &format!("α={alpha:?} β={beta:?} F={legs:?}"));
        }
    }
}

#[test]
fn kernel_route_matches_direct_contraction() {
    for alpha in [&[0.0, 0.8][..], &[0.0, 0.8, -0.4], &[0.2, 0.0, 0.0, 0.1]] {
        let m = model(alpha, &[1.0]);
        for legs in [&[(0usize, 1u32)][..], &[(0, 1), (1, 1)], &[(0, 3)]] {
            let a = sde_expectation_route(legs, &Rational::one(), &[0.6, 1.3], &m, 4, Route::Direct).unwrap();
            let b = sde_expectation_route(legs, &Rational::one(), &[0.6, 1.3], &m, 4, Route::Lemma42).unwrap();
            assert_same_series(&a, &b, &format!("α={alpha:?} F={legs:?}"));
        }
    }
}

#[test]
fn kernel_route_needs_constant_beta() {
    let m = model(&[], &[0.0, 1.0]);
    assert!(matches!(
        sde_expectation_leaves(&[(0, 1)], &Rational::one(), &[1.0], &m, 2),
        Err(SdeError::InvalidInput(_))
    ));
}

#[test]
fn input_errors() {
    let m = model(&[], &[1.0]);
    let one = Rational::one();
    assert!(matches!(
        sde_expectation(&[(0, 1), (1, 1)], &one, &[1.0, 1.0], &m, 2),
        Err(SdeError::CoincidentTimes { a: 0, b: 1 })
    ));
    assert!(matches!(sde_expectation(&[(3, 1)], &one, &[1.0], &m, 2), Err(SdeError::UnboundSlot(3))));
    assert!(matches!(sde_expectation(&[(0, 1)], &one, &[1.0], &m, 7), Err(SdeError::OrderTooLarge { .. })));
    let mult = model(&[], &[0.0, 1.0]);
    assert!(matches!(sde_expectation(&[(0, 1)], &one, &[1.0], &mult, 5), Err(SdeError::OrderTooLarge { .. })));
}

#[test]
fn scalar_prefactor_scales_everything() {
    let m = model(&[0.0, 0.5], &[1.0]);
    let a = sde_expectation(&[(0, 2)], &Rational::one(), &[1.0], &m, 4).unwrap();
    let b = sde_expectation(&[(0, 2)], &rat(3, 2), &[1.0], &m, 4).unwrap();
    for (x, y) in a.entries.iter().zip(&b.entries) {
        for (k, d) in x.iter() {
            assert_eq!(y.coefficient(k), &d.coefficient * rat(3, 2));
        }
    }
}

#[test]
fn census_small_cases() {
    let rows = contraction_pattern_census(1, 1).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].internal, vec![1]);
    assert_eq!(rows[0].direct_count, 1);

    let rows = contraction_pattern_census(1, 2).unwrap();
    assert_eq!(rows.len(), 3);
    for r in &rows {
        assert_eq!(r.direct_count, 1);
        assert!(r.consistent());
        assert_eq!(r.distribution_count, 1 << r.cross_total);
    }
    assert!(rows.iter().any(|r| r.cross_total == 1 && r.distribution_count == 2));

    let rows = contraction_pattern_census(2, 2).unwrap();
    let total: u64 = rows.iter().map(|r| r.distribution_count).sum();
    assert_eq!(total, 16);
    assert!(rows.iter().all(|r| r.consistent() && r.printed_formula_matches()));
}

#[test]
fn census_counts_are_multinomial_everywhere() {
    for n in 0..=4 {
        for k in 1..=4 {
            let rows = contraction_pattern_census(n, k).unwrap();
            let total: u64 = rows.iter().map(|r| r.direct_count).sum();
            let types = (k + k * (k - 1) / 2) as u64;
            assert_eq!(total, types.pow(n));
            assert!(rows.iter().all(CensusRow::consistent), "n={n} k={k}");
        }
    }
}

#[test]
fn printed_formula_differs_once_two_cross_types_mix() {
    let rows = contraction_pattern_census(2, 3).unwrap();
    let mixed = rows.iter().find(|r| r.cross.iter().filter(|c| c.1 == 1).count() == 2).unwrap();
    assert_eq!(mixed.direct_count, 2);
    assert_eq!(mixed.printed_formula, 1);
    assert!(!mixed.printed_formula_matches());
}

#[test]
fn census_bounds() {
    assert!(matches!(contraction_pattern_census(5, 2), Err(SdeError::BoundExceeded(_))));
    assert!(matches!(contraction_pattern_census(1, 5), Err(SdeError::BoundExceeded(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_degrees_keep_symmetry_factors(da in 0usize..3, db in 0usize..3, order in 1u32..4) {
        let alpha: Vec<f64> = (0..=da).map(|i| 0.3 + i as f64).collect();
        let beta: Vec<f64> = (0..=db).map(|i| 1.0 + i as f64).collect();
        let m = model(&alpha, &beta);
        let sol = perturb_solution(&m, order).unwrap();
        for level in &sol.entries {
            for (t, c) in level {
                prop_assert_eq!(c.clone(), Rational::one() / Rational::from_integer(tree_automorphisms(t).into()));
                prop_assert!(!c.is_zero());
            }
        }
    }

    #[test]
    fn expectations_are_closed_and_even(db in 0usize..3, order in 1u32..5) {
        let beta: Vec<f64> = (0..=db).map(|i| 1.0 + i as f64).collect();
        let m = model(&[], &beta);
        let s = sde_expectation(&[(0, 1)], &Rational::one(), &[1.0], &m, order).unwrap();
        for (k, sum) in s.entries.iter().enumerate() {
            if k % 2 == 1 {
                prop_assert!(sum.is_empty());
            }
            for d in sum.diagrams() {
                prop_assert!(d.is_closed());
            }
        }
    }
}
