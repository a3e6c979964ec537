use std::collections::BTreeMap;

use num_traits::{One, Zero};
use sdemsr_diagram::{
    canonicalize, class_doubling_exponent, falling_factorial, CanonicalForm, CanonicalKey, Diagram, DiagramSeries,
    Edge, Rational, VertexKind, DEFAULT_CANON_BOUND,
};
use sdemsr_model::{ExpansionBounds, ModelSpec};

use crate::monomial::{check_distinct_times, Monomial};
use crate::vertex::{interacting_vertex, InteractingVertexTemplates, TemplateKind, VertexTemplate};
use crate::MsrError;

/// Coefficient of a closed MSR diagram class:
/// `θ₀^{#Correction} · Π_ext ℓ!/(ℓ−o)! · 2^{c(γ)} / |Aut(γ)|`.
///
/// The noise weight 1/2 cancels against the two orderings of its response
/// legs, which is why it does not appear.
pub fn class_coefficient(d: &Diagram, automorphisms: u64, theta0: &Rational) -> Rational {
    let mut c = Rational::one();
    for (v, k) in d.vertices.iter().enumerate() {
        match k {
            VertexKind::External { legs, .. } => c *= falling_factorial(*legs, d.out_degree(v) as u32),
            VertexKind::Correction { .. } => c *= theta0,
            _ => {}
        }
    }
    c *= Rational::from_integer(num_traits::pow(2.into(), class_doubling_exponent(d) as usize));
    c / Rational::from_integer(automorphisms.into())
}

/// Remaining capacity of source slot `g` of vertex `v`.
fn remaining(d: &Diagram, v: usize, g: usize, t: &InteractingVertexTemplates) -> u32 {
    let cap = match &d.vertices[v] {
        VertexKind::External { legs, .. } => return legs - d.out_degree(v) as u32,
        VertexKind::Drift { .. } => t.drift.as_ref().map_or(0, |x| x.capacity[0]),
        VertexKind::Noise { .. } => t.noise.as_ref().map_or(0, |x| x.capacity[g]),
        VertexKind::Correction { .. } => t.correction.as_ref().map_or(0, |x| x.capacity[g]),
    };
    cap.saturating_sub(d.vertices[v].slot_out(g))
}

fn bump_out(k: &mut VertexKind, g: usize) {
    match k {
        VertexKind::Drift { out } => *out += 1,
        VertexKind::Noise { out } | VertexKind::Correction { out } => out[g] += 1,
        VertexKind::External { .. } => {}
    }
}

/// All diagrams obtained by adding one sink vertex of template `tpl`.
fn extend(d: &Diagram, tpl: &VertexTemplate, t: &InteractingVertexTemplates) -> Vec<Diagram> {
    let mut endpoints = Vec::new();
    for v in 0..d.vertices.len() {
        for g in 0..d.vertices[v].source_slots() {
            let r = remaining(d, v, g, t);
            if r > 0 {
                endpoints.push((v, g, r));
            }
        }
    }
    let new = d.vertices.len();
    let kind = match tpl.kind {
        TemplateKind::Drift => VertexKind::Drift { out: 0 },
        TemplateKind::Noise => VertexKind::Noise { out: [0, 0] },
        TemplateKind::Correction => VertexKind::Correction { out: [0, 0] },
    };
    let attach = |sources: &[(usize, usize)]| {
        let mut nd = d.clone();
        nd.vertices.push(kind.clone());
        for (slot, &(v, g)) in sources.iter().enumerate() {
            bump_out(&mut nd.vertices[v], g);
            nd.edges.push(Edge::new(v, g as u8, new, slot as u8));
        }
        nd.chi_order += tpl.chi_order;
        nd
    };
    let mut out = Vec::new();
    if tpl.response_legs == 1 {
        for &(v, g, _) in &endpoints {
            out.push(attach(&[(v, g)]));
        }
    } else {
        for i in 0..endpoints.len() {
            for j in i..endpoints.len() {
                if i == j && endpoints[i].2 < 2 {
                    continue;
                }
                out.push(attach(&[(endpoints[i].0, endpoints[i].1), (endpoints[j].0, endpoints[j].1)]));
            }
        }
    }
    out
}

/// `⟨⟨F⟩⟩_{α,β,θ₀}` as a series of collected diagram sums, with the default
/// order bounds.
pub fn msr_expectation(f: &Monomial, times: &[f64], model: &ModelSpec, order: u32) -> Result<DiagramSeries, MsrError> {
    msr_expectation_bounded(f, times, model, order, &ExpansionBounds::default())
}

/// Generates every closed diagram class by inserting sink vertices one at a
/// time (each diagram has a topological order, so every class is reached),
/// then weights each class by [`class_coefficient`].
pub fn msr_expectation_bounded(
    f: &Monomial,
    times: &[f64],
    model: &ModelSpec,
    order: u32,
    bounds: &ExpansionBounds,
) -> Result<DiagramSeries, MsrError> {
    if f.xt_count() > 0 {
        return Err(MsrError::InvalidInput("observable must not contain response legs".into()));
    }
    let bound = bounds.for_model(model);
    if order > bound {
        return Err(MsrError::OrderTooLarge { order, bound });
    }
    check_distinct_times(&f.slots(), times)?;
    let templates = interacting_vertex(model);
    let mut levels: Vec<BTreeMap<CanonicalKey, CanonicalForm>> = vec![BTreeMap::new(); order as usize + 1];
    let root = Diagram::externals_only(&f.x_legs, Rational::one());
    let c = canonicalize(&root, DEFAULT_CANON_BOUND)?;
    levels[0].insert(c.key.clone(), c);
    for g in 0..=order as usize {
        let current: Vec<Diagram> = levels[g].values().map(|c| c.diagram.clone()).collect();
        for d in current {
            for tpl in templates.iter() {
                let ng = g + tpl.chi_order as usize;
                if ng > order as usize {
                    continue;
                }
                for nd in extend(&d, tpl, &templates) {
                    let c = canonicalize(&nd, DEFAULT_CANON_BOUND)?;
                    levels[ng].entry(c.key.clone()).or_insert(c);
                }
            }
        }
    }
    let mut series = DiagramSeries::with_order(order);
    for (g, level) in levels.into_iter().enumerate() {
        for (key, c) in level {
            let mut d = c.diagram;
            d.coefficient = class_coefficient(&d, c.automorphisms, &model.theta0) * &f.scalar;
            if !d.coefficient.is_zero() {
                series.entries[g].add_canonical(key, d);
            }
        }
    }
    Ok(series)
}
