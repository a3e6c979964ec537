use num_traits::{One, Zero};
use sdemsr_diagram::{factorial, falling_factorial, Diagram, DiagramSeries, Edge, Rational, VertexKind};
use sdemsr_model::{ExpansionBounds, ModelSpec};

use crate::monomial::{check_distinct_times, Monomial};
use crate::vertex::{interacting_vertex, TemplateKind, VertexTemplate};
use crate::MsrError;

/// Brute-force route to `⟨⟨F⟩⟩`: expands `Γ_G(F ⟨V⟩ⁿ/n!)` over labelled
/// vertices, every response copy choosing its partner independently, and
/// only then collects. Exponential; intended as a cross-check of
/// [`crate::msr_expectation`] at low orders.
pub fn msr_expectation_labelled(f: &Monomial, times: &[f64], model: &ModelSpec, order: u32) -> Result<DiagramSeries, MsrError> {
    if f.xt_count() > 0 {
        return Err(MsrError::InvalidInput("observable must not contain response legs".into()));
    }
    let bound = ExpansionBounds::default().for_model(model);
    if order > bound {
        return Err(MsrError::OrderTooLarge { order, bound });
    }
    check_distinct_times(&f.slots(), times)?;
    let templates: Vec<VertexTemplate> = interacting_vertex(model).iter().cloned().collect();
    let mut series = DiagramSeries::with_order(order);
    let mut seq = Vec::new();
    sequences(&templates, order, &mut seq, &mut |seq| expand_sequence(f, seq, &mut series))?;
    for e in &mut series.entries {
        let scaled = e.scaled(&f.scalar);
        *e = scaled;
    }
    Ok(series)
}

fn sequences<'a>(
    templates: &'a [VertexTemplate],
    budget: u32,
    seq: &mut Vec<&'a VertexTemplate>,
    visit: &mut dyn FnMut(&[&VertexTemplate]) -> Result<(), MsrError>,
) -> Result<(), MsrError> {
    visit(seq)?;
    for t in templates {
        if t.chi_order <= budget {
            seq.push(t);
            sequences(templates, budget - t.chi_order, seq, visit)?;
            seq.pop();
        }
    }
    Ok(())
}

struct Labelled<'a> {
    vertices: Vec<VertexKind>,
    /// capacity per (vertex, group)
    caps: Vec<[u32; 2]>,
    /// owner of each response copy and its index at the owner
    copies: Vec<(usize, u8)>,
    base: &'a Rational,
}

fn expand_sequence(f: &Monomial, seq: &[&VertexTemplate], series: &mut DiagramSeries) -> Result<(), MsrError> {
    let mut vertices = Vec::new();
    let mut caps = Vec::new();
    for &(slot, legs) in &f.x_legs {
        vertices.push(VertexKind::External { slot, legs, snaky: 0 });
        caps.push([legs, 0]);
    }
    let mut weight = Rational::one() / factorial(seq.len() as u32);
    let mut copies = Vec::new();
    let mut chi = 0;
    for t in seq {
        let v = vertices.len();
        vertices.push(match t.kind {
            TemplateKind::Drift => VertexKind::Drift { out: 0 },
            TemplateKind::Noise => VertexKind::Noise { out: [0, 0] },
            TemplateKind::Correction => VertexKind::Correction { out: [0, 0] },
        });
        caps.push(t.capacity);
        for c in 0..t.response_legs {
            copies.push((v, c as u8));
        }
        weight *= &t.weight;
        chi += t.chi_order;
    }
    if weight.is_zero() {
        return Ok(());
    }
    let ctx = Labelled { vertices, caps, copies, base: &weight };
    let mut used = vec![[0u32; 2]; ctx.vertices.len()];
    let mut edges = Vec::new();
    ctx.assign(0, &mut used, &mut edges, chi, series)
}

impl Labelled<'_> {
    fn assign(
        &self,
        i: usize,
        used: &mut Vec<[u32; 2]>,
        edges: &mut Vec<Edge>,
        chi: u32,
        series: &mut DiagramSeries,
    ) -> Result<(), MsrError> {
        if i == self.copies.len() {
            let mut vertices = self.vertices.clone();
            let mut coeff = self.base.clone();
            for (v, k) in vertices.iter_mut().enumerate() {
                match k {
                    VertexKind::External { legs, .. } => coeff *= falling_factorial(*legs, used[v][0]),
                    VertexKind::Drift { out } => *out = used[v][0],
                    VertexKind::Noise { out } | VertexKind::Correction { out } => *out = used[v],
                }
            }
            let d = Diagram { vertices, edges: edges.clone(), coefficient: coeff, chi_order: chi };
            if d.topological_order().is_some() {
                series.entries[chi as usize].add(&d)?;
            }
            return Ok(());
        }
        let (owner, slot) = self.copies[i];
        for v in 0..self.vertices.len() {
            if v == owner {
                continue;
            }
            for g in 0..self.vertices[v].source_slots() {
                if used[v][g] >= self.caps[v][g] {
                    continue;
                }
                used[v][g] += 1;
                edges.push(Edge::new(v, g as u8, owner, slot));
                self.assign(i + 1, used, edges, chi, series)?;
                edges.pop();
                used[v][g] -= 1;
            }
        }
        Ok(())
    }
}
