use proptest::prelude::*;
use sdemsr_diagram::{
    automorphism_count, automorphism_count_brute_force, canonical_key, class_doubling_exponent, diagram_from_text,
    diagram_to_text, rat, slot_attachment_variants, validate_diagram, Diagram, DiagramSum, Edge, VertexKind,
    Violation,
};

fn d(vertices: Vec<VertexKind>, edges: Vec<Edge>, chi: u32) -> Diagram {
    Diagram { vertices, edges, coefficient: rat(1, 1), chi_order: chi }
}

fn ext(slot: usize, legs: u32) -> VertexKind {
    VertexKind::External { slot, legs, snaky: 0 }
}

/// Grows a random valid diagram. Every internal target slot picks a parent
/// among earlier vertices; out-counts are filled in afterwards.
fn grow(externals: usize, kinds: &[u8], picks: &[(usize, usize)]) -> Diagram {
    let n = externals + kinds.len();
    let mut out: Vec<[u32; 2]> = vec![[0, 0]; n];
    let mut edges = Vec::new();
    let mut pick = picks.iter().cycle();
    for (i, k) in kinds.iter().enumerate() {
        let v = externals + i;
        let targets = if *k == 2 { 2 } else { 1 };
        for t in 0..targets {
            let (p, s) = *pick.next().unwrap();
            let parent = p % v;
            let slots = if parent < externals || kinds[parent - externals] == 1 { 1 } else { 2 };
            let slot = s % slots;
            out[parent][slot] += 1;
            edges.push(Edge::new(parent, slot as u8, v, t as u8));
        }
    }
    let mut vertices = Vec::new();
    let mut chi = 0;
    for (v, o) in out.iter().enumerate().take(externals) {
        vertices.push(ext(v, o[0].max(1) + (v as u32 % 2)));
    }
    for (i, k) in kinds.iter().enumerate() {
        let o = out[externals + i];
        vertices.push(match k {
            1 => {
                chi += 1;
                VertexKind::Drift { out: o[0] }
            }
            2 => {
                chi += 2;
                VertexKind::Noise { out: o }
            }
            _ => {
                chi += 2;
                VertexKind::Correction { out: o }
            }
        });
    }
    d(vertices, edges, chi)
}

fn relabel(g: &Diagram, perm: &[usize]) -> Diagram {
    let mut vertices = vec![ext(0, 1); g.vertices.len()];
    for (v, k) in g.vertices.iter().enumerate() {
        vertices[perm[v]] = k.clone();
    }
    let mut edges: Vec<Edge> =
        g.edges.iter().map(|e| Edge::new(perm[e.src], e.src_slot, perm[e.dst], e.dst_slot)).collect();
    edges.reverse();
    Diagram { vertices, edges, ..g.clone() }
}

fn arb_diagram() -> impl Strategy<Value = Diagram> {
    (1usize..=2, prop::collection::vec(1u8..=3, 0..=5), prop::collection::vec((0usize..64, 0usize..2), 1..12))
        .prop_map(|(e, k, p)| grow(e, &k, &p))
}

fn arb_with_perm() -> impl Strategy<Value = (Diagram, Vec<usize>)> {
    arb_diagram().prop_flat_map(|g| {
        let n = g.vertices.len();
        (Just(g), Just((0..n).collect::<Vec<_>>()).prop_shuffle())
    })
}

proptest! {
    #[test]
    fn grown_diagrams_are_valid(g in arb_diagram()) {
        prop_assert_eq!(validate_diagram(&g), Ok(()));
    }

    #[test]
    fn canonical_key_ignores_vertex_labels((g, perm) in arb_with_perm()) {
        let h = relabel(&g, &perm);
        prop_assert_eq!(validate_diagram(&h), Ok(()));
        prop_assert_eq!(canonical_key(&g).unwrap(), canonical_key(&h).unwrap());
    }

    #[test]
    fn automorphisms_match_brute_force(g in arb_diagram()) {
        prop_assert_eq!(automorphism_count(&g).unwrap(), automorphism_count_brute_force(&g).unwrap());
    }

    #[test]
    fn collect_adds_coefficients_within_a_class((g, perm) in arb_with_perm()) {
        let mut h = relabel(&g, &perm);
        h.coefficient = rat(3, 7);
        let sum = DiagramSum::collect([&g, &h]).unwrap();
        prop_assert_eq!(sum.len(), 1);
        prop_assert_eq!(sum.coefficient(&canonical_key(&g).unwrap()), rat(10, 7));
    }

    #[test]
    fn text_round_trip(g in arb_diagram()) {
        let t = diagram_to_text(&g);
        let back = diagram_from_text(&t).unwrap();
        prop_assert_eq!(&back, &g);
        prop_assert_eq!(diagram_to_text(&back), t);
    }

    #[test]
    fn attachment_variants_number_two_to_the_c(g in arb_diagram()) {
        let variants = slot_attachment_variants(&g);
        prop_assert_eq!(variants.len(), 1usize << class_doubling_exponent(&g));
        for v in &variants {
            prop_assert_eq!(validate_diagram(v), Ok(()));
            prop_assert_eq!(canonical_key(v).unwrap(), canonical_key(&g).unwrap());
        }
    }
}

#[test]
fn drift_chain_is_valid() {
    let g = d(
        vec![ext(0, 1), VertexKind::Drift { out: 1 }, VertexKind::Drift { out: 0 }],
        vec![Edge::new(0, 0, 1, 0), Edge::new(1, 0, 2, 0)],
        2,
    );
    assert_eq!(validate_diagram(&g), Ok(()));
    assert_eq!(g.grade(), 2);
    assert!(g.is_closed());
    assert_eq!(automorphism_count(&g).unwrap(), 1);
}

#[test]
fn two_cycle_is_rejected() {
    let g = d(
        vec![VertexKind::Drift { out: 1 }, VertexKind::Drift { out: 1 }],
        vec![Edge::new(0, 0, 1, 0), Edge::new(1, 0, 0, 0)],
        2,
    );
    assert_eq!(validate_diagram(&g), Err(vec![Violation::CyclicDiagram]));
}

#[test]
fn doubly_fed_noise_slot_overflows() {
    let g = d(
        vec![ext(0, 2), VertexKind::Noise { out: [0, 0] }],
        vec![Edge::new(0, 0, 1, 0), Edge::new(0, 0, 1, 0)],
        2,
    );
    let errs = validate_diagram(&g).unwrap_err();
    assert!(errs.contains(&Violation::SlotOverflow { vertex: 1, slot: 0 }));
    assert!(errs.contains(&Violation::UnfedSlot { vertex: 1, slot: 1 }));
}

#[test]
fn self_loop_is_rejected() {
    let g = d(vec![VertexKind::Drift { out: 1 }], vec![Edge::new(0, 0, 0, 0)], 1);
    let errs = validate_diagram(&g).unwrap_err();
    assert!(errs.contains(&Violation::SelfLoop { vertex: 0 }));
    assert!(errs.contains(&Violation::CyclicDiagram));
}

#[test]
fn declared_grade_must_match() {
    let g = d(vec![ext(0, 1), VertexKind::Drift { out: 0 }], vec![Edge::new(0, 0, 1, 0)], 2);
    assert_eq!(validate_diagram(&g), Err(vec![Violation::BadGrade { declared: 2, actual: 1 }]));
}

#[test]
fn noise_fed_by_one_leg_group_is_not_doubled() {
    // both ends from the same external source slot: swapping slots changes nothing
    let same = d(
        vec![ext(0, 2), VertexKind::Noise { out: [0, 0] }],
        vec![Edge::new(0, 0, 1, 0), Edge::new(0, 0, 1, 1)],
        2,
    );
    assert_eq!(class_doubling_exponent(&same), 0);
    assert_eq!(slot_attachment_variants(&same).len(), 1);
    assert_eq!(automorphism_count(&same).unwrap(), 2);

    let split = d(
        vec![ext(0, 1), ext(1, 1), VertexKind::Noise { out: [0, 0] }],
        vec![Edge::new(0, 0, 2, 0), Edge::new(1, 0, 2, 1)],
        2,
    );
    assert_eq!(class_doubling_exponent(&split), 1);
    assert_eq!(slot_attachment_variants(&split).len(), 2);
    // the leaf's two source slots carry equal out-counts and may be exchanged
    assert_eq!(automorphism_count(&split).unwrap(), 2);
}

#[test]
fn symmetric_drift_fan_has_factorial_automorphisms() {
    // x(t)^3 with three identical drift leaves: Aut = 3!
    let g = d(
        vec![ext(0, 3), VertexKind::Drift { out: 0 }, VertexKind::Drift { out: 0 }, VertexKind::Drift { out: 0 }],
        vec![Edge::new(0, 0, 1, 0), Edge::new(0, 0, 2, 0), Edge::new(0, 0, 3, 0)],
        3,
    );
    assert_eq!(automorphism_count(&g).unwrap(), 6);
    assert_eq!(automorphism_count_brute_force(&g).unwrap(), 6);
}

#[test]
fn malformed_text_reports_the_line() {
    let err = diagram_from_text("diagram chi=0 coeff=1/1\nv0 blob(1)\nend\n").unwrap_err();
    assert_eq!(err.line, 2);
    assert!(diagram_from_text("diagram chi=0 coeff=1/0\nend\n").is_err());
}
