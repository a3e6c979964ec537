use std::collections::BTreeMap;

use num_traits::{One, Zero};
use sdemsr_diagram::{factorial, falling_factorial, Diagram, DiagramSum, Edge, Rational, VertexKind};

use crate::monomial::{check_distinct_times, Monomial};
use crate::MsrError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct Stats {
    enumerated: usize,
    cyclic: usize,
}

fn external_slots(d: &Diagram) -> Vec<usize> {
    d.vertices
        .iter()
        .filter_map(|v| match v {
            VertexKind::External { slot, .. } => Some(*slot),
            _ => None,
        })
        .collect()
}

/// Applies `exp(sign · Υ_G)` to every term: all ways of joining a free
/// straight leg at one vertex with a free response leg at a different
/// vertex, each join becoming an edge. Same-vertex pairs are skipped
/// (`G(t, t) = 0` inside Γ_G) and cyclic results vanish.
fn gamma_apply(sum: &DiagramSum, times: &[f64], sign: i64) -> Result<(DiagramSum, Stats), MsrError> {
    let mut out = DiagramSum::new();
    let mut stats = Stats::default();
    for d in sum.diagrams() {
        check_distinct_times(&external_slots(d), times)?;
        let n = d.vertices.len();
        let mut free_x = vec![0u32; n];
        let mut free_xt = vec![0u32; n];
        for (v, k) in d.vertices.iter().enumerate() {
            if let VertexKind::External { legs, snaky, .. } = *k {
                free_x[v] = legs - d.out_degree(v) as u32;
                free_xt[v] = snaky - d.in_degree(v) as u32;
            }
        }
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|a| (0..n).map(move |b| (a, b)))
            .filter(|&(a, b)| a != b && free_x[a] > 0 && free_xt[b] > 0)
            .collect();
        let mut m = vec![0u32; pairs.len()];
        let mut used_x = vec![0u32; n];
        let mut used_xt = vec![0u32; n];
        let ctx = Ctx { d, pairs: &pairs, free_x: &free_x, free_xt: &free_xt, sign };
        ctx.recurse(0, &mut m, &mut used_x, &mut used_xt, &mut out, &mut stats)?;
    }
    Ok((out, stats))
}

struct Ctx<'a> {
    d: &'a Diagram,
    pairs: &'a [(usize, usize)],
    free_x: &'a [u32],
    free_xt: &'a [u32],
    sign: i64,
}

impl Ctx<'_> {
    fn recurse(
        &self,
        i: usize,
        m: &mut Vec<u32>,
        used_x: &mut Vec<u32>,
        used_xt: &mut Vec<u32>,
        out: &mut DiagramSum,
        stats: &mut Stats,
    ) -> Result<(), MsrError> {
        if i == self.pairs.len() {
            stats.enumerated += 1;
            let mut d = self.d.clone();
            let mut coeff = Rational::one();
            let mut total = 0;
            for (k, &(a, b)) in self.pairs.iter().enumerate() {
                for _ in 0..m[k] {
                    d.edges.push(Edge::new(a, 0, b, 0));
                }
                coeff /= factorial(m[k]);
                total += m[k];
            }
            for v in 0..d.vertices.len() {
                coeff *= falling_factorial(self.free_x[v], used_x[v]);
                coeff *= falling_factorial(self.free_xt[v], used_xt[v]);
            }
            if self.sign < 0 && total % 2 == 1 {
                coeff = -coeff;
            }
            if d.topological_order().is_none() {
                stats.cyclic += 1;
                return Ok(());
            }
            d.coefficient *= coeff;
            out.add(&d)?;
            return Ok(());
        }
        let (a, b) = self.pairs[i];
        let cap = (self.free_x[a] - used_x[a]).min(self.free_xt[b] - used_xt[b]);
        for k in 0..=cap {
            m[i] = k;
            used_x[a] += k;
            used_xt[b] += k;
            self.recurse(i + 1, m, used_x, used_xt, out, stats)?;
            used_x[a] -= k;
            used_xt[b] -= k;
        }
        m[i] = 0;
        Ok(())
    }
}

/// `Γ_G` applied to a sum of (possibly open) diagrams.
pub fn gamma_g_apply(sum: &DiagramSum, times: &[f64]) -> Result<DiagramSum, MsrError> {
    gamma_apply(sum, times, 1).map(|r| r.0)
}

/// `Γ_G⁻¹ = exp(−Υ_G)`.
pub fn gamma_g_inverse(sum: &DiagramSum, times: &[f64]) -> Result<DiagramSum, MsrError> {
    gamma_apply(sum, times, -1).map(|r| r.0)
}

/// Sets x̃ = 0: keeps only terms without free response legs.
pub fn restrict_xt_zero(sum: &DiagramSum) -> DiagramSum {
    let mut out = DiagramSum::new();
    for (k, d) in sum.iter() {
        if d.is_closed() {
            out.add_canonical(k.clone(), d.clone());
        }
    }
    out
}

/// Pointwise product of two diagrams: external vertices at the same slot
/// are merged, everything else is placed side by side.
pub fn diagram_product(a: &Diagram, b: &Diagram) -> Diagram {
    let mut vertices = a.vertices.clone();
    let mut by_slot: BTreeMap<usize, usize> = BTreeMap::new();
    for (v, k) in a.vertices.iter().enumerate() {
        if let VertexKind::External { slot, .. } = k {
            by_slot.insert(*slot, v);
        }
    }
    let mut map = Vec::with_capacity(b.vertices.len());
    for k in &b.vertices {
        match *k {
            VertexKind::External { slot, legs, snaky } if by_slot.contains_key(&slot) => {
                let v = by_slot[&slot];
                if let VertexKind::External { legs: l, snaky: s, .. } = &mut vertices[v] {
                    *l += legs;
                    *s += snaky;
                }
                map.push(v);
            }
            _ => {
                map.push(vertices.len());
                vertices.push(k.clone());
            }
        }
    }
    let mut edges = a.edges.clone();
    edges.extend(b.edges.iter().map(|e| Edge::new(map[e.src], e.src_slot, map[e.dst], e.dst_slot)));
    Diagram { vertices, edges, coefficient: &a.coefficient * &b.coefficient, chi_order: a.chi_order + b.chi_order }
}

pub fn sum_product(a: &DiagramSum, b: &DiagramSum) -> Result<DiagramSum, MsrError> {
    let mut out = DiagramSum::new();
    for x in a.diagrams() {
        for y in b.diagrams() {
            out.add(&diagram_product(x, y))?;
        }
    }
    Ok(out)
}

/// `F₁ ·_G F₂ = Γ_G(Γ_G⁻¹F₁ · Γ_G⁻¹F₂)`.
pub fn deformed_product(a: &DiagramSum, b: &DiagramSum, times: &[f64]) -> Result<DiagramSum, MsrError> {
    let p = sum_product(&gamma_g_inverse(a, times)?, &gamma_g_inverse(b, times)?)?;
    gamma_g_apply(&p, times)
}

/// Counts from a vanishing check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VanishingReport {
    /// Contraction patterns enumerated.
    pub enumerated: usize,
    /// Patterns dropped for containing a directed cycle.
    pub cyclic: usize,
    /// Surviving terms with no free response leg.
    pub survivors: usize,
}

impl VanishingReport {
    pub fn vanished(&self) -> bool {
        self.survivors == 0
    }
}

/// Expands `Γ_G(F₁⋯F_n)|_{x̃=0}` for local factors that each carry at least
/// one response leg.
pub fn vanishing_report(factors: &[Monomial], times: &[f64]) -> Result<VanishingReport, MsrError> {
    let mut seen = Vec::new();
    let mut product = Diagram::externals_only(&[], Rational::one());
    for f in factors {
        if f.xt_count() == 0 {
            return Err(MsrError::InvalidInput("every factor needs a response leg".into()));
        }
        if !f.is_local() {
            return Err(MsrError::InvalidInput("factors must be local (one time each)".into()));
        }
        let slot = f.slots()[0];
        if seen.contains(&slot) {
            return Err(MsrError::InvalidInput(format!("two factors share slot {slot}")));
        }
        seen.push(slot);
        product = diagram_product(&product, &f.to_open_diagram());
    }
    if product.coefficient.is_zero() {
        return Ok(VanishingReport { enumerated: 0, cyclic: 0, survivors: 0 });
    }
    let mut start = DiagramSum::new();
    start.add(&product)?;
    let (all, stats) = gamma_apply(&start, times, 1)?;
    let closed = restrict_xt_zero(&all);
    Ok(VanishingReport { enumerated: stats.enumerated, cyclic: stats.cyclic, survivors: closed.len() })
}

/// True iff `Γ_G(F₁⋯F_n)|_{x̃=0}` collects to the empty sum.
pub fn vanishing_check(factors: &[Monomial], times: &[f64]) -> Result<bool, MsrError> {
    vanishing_report(factors, times).map(|r| r.vanished())
}
