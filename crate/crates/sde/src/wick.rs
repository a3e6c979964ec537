use num_traits::Zero;
use sdemsr_diagram::{factorial, falling_factorial, rat, Diagram, DiagramSeries, Edge, Rational, VertexKind};
use sdemsr_model::{ExpansionBounds, ModelSpec};

use crate::tree::{perturb_solution, SolutionSeries, XiTree};
use crate::{check_times, SdeError};

/// A forest of solution trees hanging from the observation points.
///
/// Internal vertices are `Drift { out }` vertices; those flagged in `xi`
/// carry `χβ_out√σ ξ` instead of `χα_out`.
#[derive(Clone, Debug, PartialEq)]
pub struct XiDiagram {
    pub diagram: Diagram,
    pub xi: Vec<bool>,
}

impl XiDiagram {
    fn parent(&self, v: usize) -> Option<(usize, u8)> {
        self.diagram.edges.iter().find(|e| e.dst == v).map(|e| (e.src, e.src_slot))
    }
}

/// Which construction `sde_expectation_route` uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    /// Wick contraction of the ξ-trees.
    Direct,
    /// For constant β: drift-only trees, then noise pairings applied as
    /// second derivatives against the kernel `(σ/2)Q`.
    Lemma42,
}

fn push_tree(t: &XiTree, parent: (usize, u8), d: &mut Diagram, xi: &mut Vec<bool>) {
    let v = d.vertices.len();
    d.vertices.push(VertexKind::Drift { out: t.children.len() as u32 });
    xi.push(t.xi);
    d.edges.push(Edge::new(parent.0, parent.1, v, 0));
    d.chi_order += 1;
    for c in &t.children {
        push_tree(c, (v, 0), d, xi);
    }
}

/// Labelled expansion of `F = scalar · Π x(t_i)^{ℓ_i}` with every leg copy
/// replaced by the solution series. `result[m]` lists the order-m forests.
pub fn forest_expansion(
    legs: &[(usize, u32)],
    scalar: &Rational,
    sol: &SolutionSeries,
    order: u32,
) -> Vec<Vec<XiDiagram>> {
    let copies: Vec<usize> = (0..legs.len()).flat_map(|i| std::iter::repeat_n(i, legs[i].1 as usize)).collect();
    let mut out = vec![Vec::new(); order as usize + 1];
    let mut choice: Vec<Option<(&XiTree, &Rational)>> = Vec::new();
    fn go<'a>(
        i: usize,
        budget: u32,
        copies: &[usize],
        legs: &[(usize, u32)],
        scalar: &Rational,
        sol: &'a SolutionSeries,
        choice: &mut Vec<Option<(&'a XiTree, &'a Rational)>>,
        out: &mut Vec<Vec<XiDiagram>>,
        order: u32,
    ) {
        if i == copies.len() {
            let mut d = Diagram::externals_only(legs, scalar.clone());
            let mut xi = vec![false; legs.len()];
            for (c, ch) in choice.iter().enumerate() {
                if let Some((t, coeff)) = ch {
                    d.coefficient *= *coeff;
                    push_tree(t, (copies[c], 0), &mut d, &mut xi);
                }
            }
            let m = (order - budget) as usize;
            out[m].push(XiDiagram { diagram: d, xi });
            return;
        }
        choice.push(None);
        go(i + 1, budget, copies, legs, scalar, sol, choice, out, order);
        choice.pop();
        for n in 1..=budget {
            for (t, c) in &sol.entries[n as usize] {
                choice.push(Some((t, c)));
                go(i + 1, budget - n, copies, legs, scalar, sol, choice, out, order);
                choice.pop();
            }
        }
    }
    go(0, order, &copies, legs, scalar, sol, &mut choice, &mut out, order);
    out
}

/// Perfect matchings of `0..n`.
fn matchings(n: usize) -> Vec<Vec<(usize, usize)>> {
    fn go(free: &mut Vec<usize>, cur: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        if free.is_empty() {
            out.push(cur.clone());
            return;
        }
        let a = free.remove(0);
        for i in 0..free.len() {
            let b = free.remove(i);
            cur.push((a, b));
            go(free, cur, out);
            cur.pop();
            free.insert(i, b);
        }
        free.insert(0, a);
    }
    let mut out = Vec::new();
    if n % 2 == 0 {
        go(&mut (0..n).collect(), &mut Vec::new(), &mut out);
    }
    out
}

/// Contracts one forest for one matching of its ξ-nodes. Returns `None` for
/// cyclic results, which vanish.
fn contract(x: &XiDiagram, pairs: &[(usize, usize)]) -> Option<Diagram> {
    let d = &x.diagram;
    let n = d.vertices.len();
    let parent: Vec<Option<(usize, u8)>> = (0..n).map(|v| x.parent(v)).collect();
    let children = |v: usize| d.out_degree(v) as u32;
    // new vertex and source group for each old vertex
    let mut target = vec![(usize::MAX, 0u8); n];
    let mut vertices = Vec::new();
    let mut removed_edge = Vec::new();
    let mut halves = 0;
    for v in 0..n {
        if !x.xi[v] {
            target[v] = (vertices.len(), 0);
            vertices.push(d.vertices[v].clone());
        }
    }
    for &(a, b) in pairs {
        let id = vertices.len();
        let (u, w) = if parent[b].map(|p| p.0) == Some(a) {
            (Some(a), b)
        } else if parent[a].map(|p| p.0) == Some(b) {
            (Some(b), a)
        } else {
            (None, 0)
        };
        match u {
            Some(u) => {
                // u is the parent of w: β_{j_w} on group 0, β_{1+rest} on group 1.
                target[w] = (id, 0);
                target[u] = (id, 1);
                vertices.push(VertexKind::Correction { out: [children(w), children(u) - 1] });
                removed_edge.push((u, w));
                halves += 1;
            }
            None => {
                target[a] = (id, 0);
                target[b] = (id, 1);
                vertices.push(VertexKind::Noise { out: [children(a), children(b)] });
            }
        }
    }
    let mut edges = Vec::new();
    for e in &d.edges {
        if removed_edge.contains(&(e.src, e.dst)) {
            continue;
        }
        let (src, group) = if x.xi[e.src] { target[e.src] } else { (target[e.src].0, e.src_slot) };
        let (dst, slot) = target[e.dst];
        let dst_slot = match vertices[dst] {
            VertexKind::Noise { .. } => slot,
            _ => 0,
        };
        edges.push(Edge::new(src, group, dst, dst_slot));
    }
    let out = Diagram {
        vertices,
        edges,
        coefficient: &d.coefficient * num_traits::pow(rat(1, 2), halves),
        chi_order: d.chi_order,
    };
    out.topological_order().map(|_| out)
}

/// Averages forests over ξ: sums over all perfect pairings of ξ-nodes and
/// collects. Forests with an odd number of ξ-nodes contribute nothing.
pub fn wick_contract(forests: &[Vec<XiDiagram>]) -> Result<DiagramSeries, SdeError> {
    let order = forests.len().saturating_sub(1) as u32;
    let mut series = DiagramSeries::with_order(order);
    for (m, list) in forests.iter().enumerate() {
        for x in list {
            let xi_nodes: Vec<usize> = (0..x.xi.len()).filter(|&v| x.xi[v]).collect();
            for pairing in matchings(xi_nodes.len()) {
                let pairs: Vec<(usize, usize)> = pairing.iter().map(|&(a, b)| (xi_nodes[a], xi_nodes[b])).collect();
                if let Some(d) = contract(x, &pairs) {
                    series.entries[m].add(&d)?;
                }
            }
        }
    }
    Ok(series)
}

fn check_f(legs: &[(usize, u32)], times: &[f64], model: &ModelSpec, order: u32) -> Result<(), SdeError> {
    let bound = ExpansionBounds::default().for_model(model);
    if order > bound {
        return Err(SdeError::OrderTooLarge { order, bound });
    }
    if legs.iter().any(|l| l.1 == 0) {
        return Err(SdeError::InvalidInput("leg multiplicities must be at least 1".into()));
    }
    let slots: Vec<usize> = legs.iter().map(|l| l.0).collect();
    let mut sorted = slots.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != slots.len() {
        return Err(SdeError::InvalidInput("each slot may appear once; use multiplicities".into()));
    }
    check_times(&slots, times)
}

/// `E[F(x_ξ)]` as a collected diagram series: perturbative solution, forest
/// expansion, Wick contraction.
pub fn sde_expectation(
    legs: &[(usize, u32)],
    scalar: &Rational,
    times: &[f64],
    model: &ModelSpec,
    order: u32,
) -> Result<DiagramSeries, SdeError> {
    check_f(legs, times, model, order)?;
    let sol = perturb_solution(model, order)?;
    wick_contract(&forest_expansion(legs, scalar, &sol, order))
}

pub fn sde_expectation_route(
    legs: &[(usize, u32)],
    scalar: &Rational,
    times: &[f64],
    model: &ModelSpec,
    order: u32,
    route: Route,
) -> Result<DiagramSeries, SdeError> {
    match route {
        Route::Direct => sde_expectation(legs, scalar, times, model, order),
        Route::Lemma42 => sde_expectation_leaves(legs, scalar, times, model, order),
    }
}

/// Additive route: expand F on the drift-only solution, then apply
/// `exp((σ/2)∫∫Q δ²/δx δx)`. Each pairing becomes a `Noise{0,0}` leaf whose
/// two ends land either on a bare leg copy (at most once per copy) or on a
/// drift node, raising its α-derivative.
pub fn sde_expectation_leaves(
    legs: &[(usize, u32)],
    scalar: &Rational,
    times: &[f64],
    model: &ModelSpec,
    order: u32,
) -> Result<DiagramSeries, SdeError> {
    check_f(legs, times, model, order)?;
    if model.beta.degree().unwrap_or(0) > 0 {
        return Err(SdeError::InvalidInput("the kernel route needs an x-independent β".into()));
    }
    let drift_only = ModelSpec { beta: sdemsr_model::Polynomial1D::zero(), ..model.clone() };
    let sol = perturb_solution(&drift_only, order)?;
    let da = model.alpha.degree();
    let mut series = DiagramSeries::with_order(order);
    let has_noise = model.beta.degree().is_some();
    for m_pairs in 0..=order / 2 {
        if m_pairs > 0 && !has_noise {
            break;
        }
        let forests = forest_expansion(legs, scalar, &sol, order - 2 * m_pairs);
        let weight = num_traits::pow(rat(1, 2), m_pairs as usize) / factorial(m_pairs);
        for (base_order, list) in forests.iter().enumerate() {
            for x in list {
                let d = &x.diagram;
                // Bare copies: the free legs of each external.
                let mut ends: Vec<(usize, u32)> = Vec::new();
                for (v, k) in d.vertices.iter().enumerate() {
                    match *k {
                        VertexKind::External { legs, .. } => ends.push((v, legs - d.out_degree(v) as u32)),
                        VertexKind::Drift { out } => {
                            ends.push((v, da.map_or(0, |deg| deg.saturating_sub(out))));
                        }
                        _ => {}
                    }
                }
                let ctx = Leaves { base: d, ends: &ends, pairs: m_pairs as usize, weight: &weight };
                let mut hits = vec![0u32; ends.len()];
                let mut picks = Vec::new();
                ctx.place(&mut hits, &mut picks, &mut |nd| series.entries[base_order + 2 * m_pairs as usize].add(nd))?;
            }
        }
    }
    Ok(series)
}

struct Leaves<'a> {
    base: &'a Diagram,
    /// (vertex, how many extra derivatives it can take)
    ends: &'a [(usize, u32)],
    pairs: usize,
    weight: &'a Rational,
}

impl Leaves<'_> {
    fn place(
        &self,
        hits: &mut Vec<u32>,
        picks: &mut Vec<usize>,
        emit: &mut dyn FnMut(&Diagram) -> Result<(), sdemsr_diagram::CanonError>,
    ) -> Result<(), SdeError> {
        if picks.len() == 2 * self.pairs {
            let mut d = self.base.clone();
            d.coefficient *= self.weight;
            for (i, &(v, _)) in self.ends.iter().enumerate() {
                match &mut d.vertices[v] {
                    // bare copies are distinguishable: ℓ_free!/(ℓ_free−h)!
                    VertexKind::External { .. } => d.coefficient *= falling_factorial(self.ends[i].1, hits[i]),
                    VertexKind::Drift { out } => *out += hits[i],
                    _ => {}
                }
            }
            for p in 0..self.pairs {
                let leaf = d.vertices.len();
                d.vertices.push(VertexKind::Noise { out: [0, 0] });
                d.chi_order += 2;
                for k in 0..2 {
                    d.edges.push(Edge::new(self.ends[picks[2 * p + k]].0, 0, leaf, k as u8));
                }
            }
            if !d.coefficient.is_zero() {
                emit(&d)?;
            }
            return Ok(());
        }
        for i in 0..self.ends.len() {
            if hits[i] >= self.ends[i].1 {
                continue;
            }
            hits[i] += 1;
            picks.push(i);
            self.place(hits, picks, emit)?;
            picks.pop();
            hits[i] -= 1;
        }
        Ok(())
    }
}
