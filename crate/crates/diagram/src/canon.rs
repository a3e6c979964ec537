//! Canonical labelling of diagrams.
//!
//! Two diagrams get the same key exactly when they describe the same
//! integrand: internal vertices may be relabelled, the two source slots of a
//! `Noise` vertex may be exchanged (β_{d1}β_{d2} is symmetric), and the
//! target slot an edge enters is irrelevant (it only names which response
//! leg was consumed).
//!
//! The search refines vertex colours Weisfeiler–Leman style and then tries
//! every colour-preserving labelling. Counting the labellings that hit the
//! minimal encoding yields |Aut| for free.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::diagram::{validate_diagram, Diagram, Edge, VertexKind, Violation};

/// Default bound on the number of internal vertices handled.
pub const DEFAULT_CANON_BOUND: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalKey(Vec<u32>);

impl CanonicalKey {
    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CanonError {
    #[error("invalid diagram: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error("diagram has {internal} internal vertices, above the bound {bound}")]
    TooLarge { internal: usize, bound: usize },
}

/// Canonical representative of a diagram's isomorphism class.
#[derive(Clone, Debug)]
pub struct CanonicalForm {
    pub key: CanonicalKey,
    /// The input relabelled into canonical order (externals first, by slot).
    pub diagram: Diagram,
    /// Order of the automorphism group, Noise slot swaps included.
    pub automorphisms: u64,
}

struct Prepared<'a> {
    d: &'a Diagram,
    externals: Vec<usize>,
    internals: Vec<usize>,
    /// node id of (vertex, source slot)
    group_node: Vec<Vec<usize>>,
    /// owner vertex of every group node, indexed by `node - nv`
    group_owner: Vec<usize>,
}

impl<'a> Prepared<'a> {
    fn new(d: &'a Diagram) -> Self {
        let nv = d.vertices.len();
        let mut externals: Vec<usize> = (0..nv).filter(|&v| d.vertices[v].is_external()).collect();
        externals.sort_by_key(|&v| match d.vertices[v] {
            VertexKind::External { slot, .. } => slot,
            _ => unreachable!(),
        });
        let internals = (0..nv).filter(|&v| !d.vertices[v].is_external()).collect();
        let mut group_node = Vec::with_capacity(nv);
        let mut group_owner = Vec::new();
        for (v, k) in d.vertices.iter().enumerate() {
            let ids = (0..k.source_slots())
                .map(|_| {
                    group_owner.push(v);
                    nv + group_owner.len() - 1
                })
                .collect();
            group_node.push(ids);
        }
        Prepared { d, externals, internals, group_node, group_owner }
    }

    /// Isomorphism-invariant colours of vertex and group nodes.
    fn refine(&self) -> Vec<u32> {
        let d = self.d;
        let nv = d.vertices.len();
        let total = nv + self.group_owner.len();
        let mut sigs: Vec<Vec<u64>> = vec![Vec::new(); total];
        for (v, k) in d.vertices.iter().enumerate() {
            sigs[v] = match k {
                VertexKind::External { slot, legs, snaky } => {
                    vec![0, *slot as u64, *legs as u64, *snaky as u64]
                }
                other => vec![other.tag() as u64],
            };
        }
        for (i, &owner) in self.group_owner.iter().enumerate() {
            let k = &d.vertices[owner];
            let slot = self.group_node[owner].iter().position(|&g| g == nv + i).unwrap();
            let role = match k {
                VertexKind::External { slot: s, .. } => 100 + *s as u64,
                VertexKind::Correction { .. } => slot as u64,
                _ => 0,
            };
            sigs[nv + i] = vec![10 + k.tag() as u64, role, k.slot_out(slot) as u64];
        }
        let mut colors = rank(&sigs);
        let mut classes = distinct(&colors);
        loop {
            let mut next: Vec<Vec<u64>> = Vec::with_capacity(total);
            for v in 0..nv {
                let mut own: Vec<u64> =
                    self.group_node[v].iter().map(|&g| colors[g] as u64).collect();
                own.sort_unstable();
                let mut incoming: Vec<u64> = d
                    .edges
                    .iter()
                    .filter(|e| e.dst == v)
                    .map(|e| colors[self.group_node[e.src][e.src_slot as usize]] as u64)
                    .collect();
                incoming.sort_unstable();
                let mut s = vec![colors[v] as u64];
                s.extend(own);
                s.push(u64::MAX);
                s.extend(incoming);
                next.push(s);
            }
            for (i, &owner) in self.group_owner.iter().enumerate() {
                let node = nv + i;
                let mut targets: Vec<u64> = d
                    .edges
                    .iter()
                    .filter(|e| self.group_node[e.src][e.src_slot as usize] == node)
                    .map(|e| colors[e.dst] as u64)
                    .collect();
                targets.sort_unstable();
                let mut s = vec![colors[node] as u64, colors[owner] as u64, u64::MAX];
                s.extend(targets);
                next.push(s);
            }
            let refined = rank(&next);
            let c = distinct(&refined);
            colors = refined;
            if c == classes {
                break;
            }
            classes = c;
        }
        colors
    }
}

fn rank(sigs: &[Vec<u64>]) -> Vec<u32> {
    let mut sorted: Vec<&Vec<u64>> = sigs.iter().collect();
    sorted.sort();
    sorted.dedup();
    let index: BTreeMap<&Vec<u64>, u32> =
        sorted.into_iter().enumerate().map(|(i, s)| (s, i as u32)).collect();
    sigs.iter().map(|s| index[s]).collect()
}

fn distinct(colors: &[u32]) -> usize {
    let mut c = colors.to_vec();
    c.sort_unstable();
    c.dedup();
    c.len()
}

/// One labelling: internal vertex -> position, plus per-vertex slot order.
struct Labelling<'p> {
    prep: &'p Prepared<'p>,
    position: Vec<usize>,
    /// swapped[v] = true exchanges the two source slots of Noise vertex v.
    swapped: Vec<bool>,
}

impl Labelling<'_> {
    fn index(&self, v: usize) -> u32 {
        let k = self.prep.externals.len();
        match self.prep.externals.iter().position(|&x| x == v) {
            Some(i) => i as u32,
            None => (k + self.position[v]) as u32,
        }
    }

    fn slot(&self, v: usize, s: u8) -> u32 {
        if self.swapped[v] {
            1 - s as u32
        } else {
            s as u32
        }
    }

    fn encode(&self) -> Vec<u32> {
        let d = self.prep.d;
        let mut code = vec![self.prep.externals.len() as u32, self.prep.internals.len() as u32];
        for &v in &self.prep.externals {
            if let VertexKind::External { slot, legs, snaky } = d.vertices[v] {
                code.extend([slot as u32, legs, snaky]);
            }
        }
        let mut by_pos = vec![0usize; self.prep.internals.len()];
        for &v in &self.prep.internals {
            by_pos[self.position[v]] = v;
        }
        for &v in &by_pos {
            let k = &d.vertices[v];
            code.push(k.tag());
            match k {
                VertexKind::Drift { out } => code.push(*out),
                VertexKind::Noise { out } | VertexKind::Correction { out } => {
                    if self.swapped[v] {
                        code.extend([out[1], out[0]]);
                    } else {
                        code.extend([out[0], out[1]]);
                    }
                }
                VertexKind::External { .. } => unreachable!(),
            }
        }
        let mut edges: Vec<[u32; 3]> = d
            .edges
            .iter()
            .map(|e| [self.index(e.src), self.slot(e.src, e.src_slot), self.index(e.dst)])
            .collect();
        edges.sort_unstable();
        for e in edges {
            code.extend(e);
        }
        code
    }
}

/// Computes the canonical form, key and automorphism count of `d`.
pub fn canonicalize(d: &Diagram, bound: usize) -> Result<CanonicalForm, CanonError> {
    validate_diagram(d).map_err(CanonError::Invalid)?;
    let internal = d.internal_count();
    if internal > bound {
        return Err(CanonError::TooLarge { internal, bound });
    }
    let prep = Prepared::new(d);
    let colors = prep.refine();

    // Cells of equally coloured internal vertices, ordered by colour.
    let mut cells: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for &v in &prep.internals {
        cells.entry(colors[v]).or_default().push(v);
    }
    let cells: Vec<Vec<usize>> = cells.into_values().collect();

    // Noise slot orders: decided by colour where possible.
    let mut fixed_swap = vec![false; d.vertices.len()];
    let mut free_swaps = Vec::new();
    let mut trivial_swaps = 0u32;
    for &v in &prep.internals {
        if let VertexKind::Noise { out } = d.vertices[v] {
            let g = &prep.group_node[v];
            let (c0, c1) = (colors[g[0]], colors[g[1]]);
            if c0 != c1 {
                fixed_swap[v] = c0 > c1;
            } else if out == [0, 0] {
                trivial_swaps += 1;
            } else {
                free_swaps.push(v);
            }
        }
    }

    let mut best: Option<(Vec<u32>, Vec<usize>, Vec<bool>)> = None;
    let mut hits: u64 = 0;
    let mut position = vec![usize::MAX; d.vertices.len()];
    let mut offsets = Vec::with_capacity(cells.len());
    let mut acc = 0;
    for c in &cells {
        offsets.push(acc);
        acc += c.len();
    }
    let mut perms: Vec<Vec<Vec<usize>>> = cells.iter().map(|c| permutations(c)).collect();
    let mut counters = vec![0usize; cells.len()];
    loop {
        for (ci, cell) in perms.iter().enumerate() {
            for (i, &v) in cell[counters[ci]].iter().enumerate() {
                position[v] = offsets[ci] + i;
            }
        }
        for mask in 0..(1u64 << free_swaps.len()) {
            let mut swapped = fixed_swap.clone();
            for (b, &v) in free_swaps.iter().enumerate() {
                swapped[v] = mask >> b & 1 == 1;
            }
            let lab = Labelling { prep: &prep, position: position.clone(), swapped };
            let code = lab.encode();
            match &best {
                Some((b, _, _)) if code > *b => {}
                Some((b, _, _)) if code == *b => hits += 1,
                _ => {
                    hits = 1;
                    best = Some((code, lab.position, lab.swapped));
                }
            }
        }
        // advance the mixed-radix counter over cell permutations
        let mut i = 0;
        loop {
            if i == counters.len() {
                perms.clear();
                break;
            }
            counters[i] += 1;
            if counters[i] < perms[i].len() {
                break;
            }
            counters[i] = 0;
            i += 1;
        }
        if perms.is_empty() {
            break;
        }
    }
    let (code, position, swapped) = best.expect("at least one labelling");
    let diagram = relabel(d, &prep, &position, &swapped);
    Ok(CanonicalForm {
        key: CanonicalKey(code),
        diagram,
        automorphisms: hits << trivial_swaps,
    })
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

fn relabel(d: &Diagram, prep: &Prepared<'_>, position: &[usize], swapped: &[bool]) -> Diagram {
    let k = prep.externals.len();
    let mut new_index = vec![0usize; d.vertices.len()];
    for (i, &v) in prep.externals.iter().enumerate() {
        new_index[v] = i;
    }
    for &v in &prep.internals {
        new_index[v] = k + position[v];
    }
    let mut vertices = vec![VertexKind::Drift { out: 0 }; d.vertices.len()];
    for (v, kind) in d.vertices.iter().enumerate() {
        vertices[new_index[v]] = match kind {
            VertexKind::Noise { out } if swapped[v] => VertexKind::Noise { out: [out[1], out[0]] },
            other => other.clone(),
        };
    }
    let mut edges: Vec<Edge> = d
        .edges
        .iter()
        .map(|e| {
            let src_slot = if swapped[e.src] { 1 - e.src_slot } else { e.src_slot };
            Edge::new(new_index[e.src], src_slot, new_index[e.dst], 0)
        })
        .collect();
    edges.sort();
    // Target slots carry no analytic meaning; hand them out in sorted order.
    let mut used = vec![0u8; vertices.len()];
    for e in &mut edges {
        if matches!(vertices[e.dst], VertexKind::Noise { .. }) {
            e.dst_slot = used[e.dst];
            used[e.dst] += 1;
        }
    }
    Diagram { vertices, edges, coefficient: d.coefficient.clone(), chi_order: d.chi_order }
}

/// Canonical key with the default bound.
pub fn canonical_key(d: &Diagram) -> Result<CanonicalKey, CanonError> {
    canonicalize(d, DEFAULT_CANON_BOUND).map(|c| c.key)
}

/// |Aut(γ)| with the default bound.
pub fn automorphism_count(d: &Diagram) -> Result<u64, CanonError> {
    canonicalize(d, DEFAULT_CANON_BOUND).map(|c| c.automorphisms)
}

/// Exhaustive |Aut(γ)|: tries every kind-preserving permutation of internal
/// vertices combined with every choice of Noise slot swaps. Exponential; meant
/// as a test oracle for small diagrams.
pub fn automorphism_count_brute_force(d: &Diagram) -> Result<u64, CanonError> {
    validate_diagram(d).map_err(CanonError::Invalid)?;
    let internals: Vec<usize> = (0..d.vertices.len()).filter(|&v| !d.vertices[v].is_external()).collect();
    let noise: Vec<usize> =
        internals.iter().copied().filter(|&v| matches!(d.vertices[v], VertexKind::Noise { .. })).collect();
    let reference = edge_multiset(d, &(0..d.vertices.len()).collect::<Vec<_>>(), &vec![false; d.vertices.len()]);
    let mut count = 0;
    for perm in permutations(&internals) {
        let mut map: Vec<usize> = (0..d.vertices.len()).collect();
        for (i, &v) in internals.iter().enumerate() {
            map[v] = perm[i];
        }
        if internals.iter().any(|&v| d.vertices[v].tag() != d.vertices[map[v]].tag()) {
            continue;
        }
        for mask in 0..(1u64 << noise.len()) {
            let mut swapped = vec![false; d.vertices.len()];
            for (b, &v) in noise.iter().enumerate() {
                swapped[v] = mask >> b & 1 == 1;
            }
            let outs_ok = internals.iter().all(|&v| {
                let image = &d.vertices[map[v]];
                match &d.vertices[v] {
                    VertexKind::Noise { out } if swapped[v] => {
                        *image == VertexKind::Noise { out: [out[1], out[0]] }
                    }
                    k => k == image,
                }
            });
            if outs_ok && edge_multiset(d, &map, &swapped) == reference {
                count += 1;
            }
        }
    }
    Ok(count)
}

fn edge_multiset(d: &Diagram, map: &[usize], swapped: &[bool]) -> Vec<(usize, u8, usize)> {
    let mut v: Vec<(usize, u8, usize)> = d
        .edges
        .iter()
        .map(|e| {
            let s = if swapped[e.src] { 1 - e.src_slot } else { e.src_slot };
            (map[e.src], s, map[e.dst])
        })
        .collect();
    v.sort_unstable();
    v
}

/// c(γ): Noise vertices whose two in-edges leave from distinct source slots.
///
/// A source slot is a (vertex, slot) pair: the two slots of one Noise vertex
/// count as distinct sources, exactly like two separate leaves before the
/// pair contraction merged them.
pub fn class_doubling_exponent(d: &Diagram) -> u32 {
    let mut c = 0;
    for (v, k) in d.vertices.iter().enumerate() {
        if matches!(k, VertexKind::Noise { .. }) {
            let src: Vec<(usize, u8)> =
                d.edges.iter().filter(|e| e.dst == v).map(|e| (e.src, e.src_slot)).collect();
            if src.len() == 2 && src[0] != src[1] {
                c += 1;
            }
        }
    }
    c
}

/// All labelled variants of `d` obtained by choosing, for every Noise vertex,
/// which target slot each of its in-edges enters. Variants that coincide as
/// labelled diagrams are counted once; the length is 2^{c(γ)}.
pub fn slot_attachment_variants(d: &Diagram) -> Vec<Diagram> {
    let noise: Vec<usize> =
        (0..d.vertices.len()).filter(|&v| matches!(d.vertices[v], VertexKind::Noise { .. })).collect();
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    for mask in 0..(1u64 << noise.len()) {
        let mut e = d.edges.clone();
        for (b, &v) in noise.iter().enumerate() {
            if mask >> b & 1 == 1 {
                for edge in e.iter_mut().filter(|edge| edge.dst == v) {
                    edge.dst_slot = 1 - edge.dst_slot;
                }
            }
        }
        let mut sorted = e.clone();
        sorted.sort();
        if seen.insert(sorted) {
            out.push(Diagram { edges: e, ..d.clone() });
        }
    }
    out
}
