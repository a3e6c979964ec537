use std::collections::BTreeSet;
use std::fmt;

use crate::Rational;

/// Kind of a diagram vertex together with its per-slot out-counts.
///
/// Out-counts are the number of x-derivatives taken at that slot, so a
/// `Drift { out: d }` vertex carries `χ α_d`, a `Noise { out: [d1, d2] }`
/// vertex carries `σ χ² β_{d1} β_{d2}` and a `Correction { out: [d1, d2] }`
/// vertex carries `σ χ² β_{d1} β_{1+d2}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum VertexKind {
    /// Observation point `x(t_slot)^legs`, optionally with `snaky` response
    /// legs `x̃(t_slot)` (only used for open diagrams fed to Γ_G).
    External { slot: usize, legs: u32, snaky: u32 },
    Drift { out: u32 },
    Noise { out: [u32; 2] },
    Correction { out: [u32; 2] },
}

impl VertexKind {
    pub fn is_external(&self) -> bool {
        matches!(self, VertexKind::External { .. })
    }

    /// Power of χ carried by the vertex.
    pub fn chi_order(&self) -> u32 {
        match self {
            VertexKind::External { .. } => 0,
            VertexKind::Drift { .. } => 1,
            VertexKind::Noise { .. } | VertexKind::Correction { .. } => 2,
        }
    }

    /// Number of source slots (out-groups).
    pub fn source_slots(&self) -> usize {
        match self {
            VertexKind::External { .. } | VertexKind::Drift { .. } => 1,
            VertexKind::Noise { .. } | VertexKind::Correction { .. } => 2,
        }
    }

    /// Number of target slots, i.e. response legs the vertex exposes.
    pub fn target_slots(&self) -> usize {
        match self {
            VertexKind::External { snaky, .. } => *snaky as usize,
            VertexKind::Drift { .. } | VertexKind::Correction { .. } => 1,
            VertexKind::Noise { .. } => 2,
        }
    }

    /// Declared out-count of an internal slot.
    pub fn slot_out(&self, slot: usize) -> u32 {
        match self {
            VertexKind::External { .. } => 0,
            VertexKind::Drift { out } => *out,
            VertexKind::Noise { out } | VertexKind::Correction { out } => out[slot],
        }
    }

    pub(crate) fn tag(&self) -> u32 {
        match self {
            VertexKind::External { .. } => 0,
            VertexKind::Drift { .. } => 1,
            VertexKind::Noise { .. } => 2,
            VertexKind::Correction { .. } => 3,
        }
    }
}

/// Directed edge `src.src_slot -> dst.dst_slot`, read as `G(t_src, t_dst)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub src: usize,
    pub src_slot: u8,
    pub dst: usize,
    pub dst_slot: u8,
}

impl Edge {
    pub fn new(src: usize, src_slot: u8, dst: usize, dst_slot: u8) -> Self {
        Edge { src, src_slot, dst, dst_slot }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagram {
    pub vertices: Vec<VertexKind>,
    pub edges: Vec<Edge>,
    pub coefficient: Rational,
    pub chi_order: u32,
}

/// A failed structural invariant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    CyclicDiagram,
    SelfLoop { vertex: usize },
    SlotOverflow { vertex: usize, slot: usize },
    BadGrade { declared: u32, actual: u32 },
    BadEndpoint { edge: usize },
    OutCountMismatch { vertex: usize, slot: usize, declared: u32, actual: u32 },
    ExternalOverflow { vertex: usize },
    DuplicateSlot { slot: usize },
    UnfedSlot { vertex: usize, slot: usize },
    EmptyExternal { vertex: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::CyclicDiagram => write!(f, "CyclicDiagram: directed cycle present"),
            Violation::SelfLoop { vertex } => write!(f, "SelfLoop at v{vertex}"),
            Violation::SlotOverflow { vertex, slot } => {
                write!(f, "SlotOverflow: more than one in-edge on v{vertex}.{slot}")
            }
            Violation::BadGrade { declared, actual } => {
                write!(f, "BadGrade: declared chi order {declared}, vertices give {actual}")
            }
            Violation::BadEndpoint { edge } => write!(f, "edge #{edge} has an invalid endpoint"),
            Violation::OutCountMismatch { vertex, slot, declared, actual } => write!(
                f,
                "out-count of v{vertex}.{slot} declared {declared} but {actual} edges depart"
            ),
            Violation::ExternalOverflow { vertex } => {
                write!(f, "external v{vertex} uses more legs than it has")
            }
            Violation::DuplicateSlot { slot } => write!(f, "observation slot {slot} used twice"),
            Violation::UnfedSlot { vertex, slot } => {
                write!(f, "internal slot v{vertex}.{slot} has no incoming edge")
            }
            Violation::EmptyExternal { vertex } => write!(f, "external v{vertex} has no legs"),
        }
    }
}

impl Diagram {
    /// The diagram with no internal vertices: `coefficient · x(t_0)…x(t_{k-1})`.
    pub fn externals_only(legs: &[(usize, u32)], coefficient: Rational) -> Self {
        Diagram {
            vertices: legs
                .iter()
                .map(|&(slot, legs)| VertexKind::External { slot, legs, snaky: 0 })
                .collect(),
            edges: Vec::new(),
            coefficient,
            chi_order: 0,
        }
    }

    pub fn internal_count(&self) -> usize {
        self.vertices.iter().filter(|v| !v.is_external()).count()
    }

    pub fn count_kind(&self, pred: impl Fn(&VertexKind) -> bool) -> usize {
        self.vertices.iter().filter(|v| pred(v)).count()
    }

    pub fn in_degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|e| e.dst == v).count()
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|e| e.src == v).count()
    }

    /// Sum of the χ powers of the vertices.
    pub fn grade(&self) -> u32 {
        self.vertices.iter().map(VertexKind::chi_order).sum()
    }

    /// True when no response leg is left open anywhere.
    pub fn is_closed(&self) -> bool {
        self.vertices.iter().enumerate().all(|(v, k)| match k {
            VertexKind::External { snaky, .. } => self.in_degree(v) == *snaky as usize,
            _ => true,
        })
    }

    /// Parents of `v` (edge sources), with multiplicity.
    pub fn parents(&self, v: usize) -> Vec<usize> {
        self.edges.iter().filter(|e| e.dst == v).map(|e| e.src).collect()
    }

    /// Internal vertices in a topological order (sources first), or `None`
    /// if the edge relation has a cycle.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let n = self.vertices.len();
        let mut indeg = vec![0usize; n];
        for e in &self.edges {
            indeg[e.dst] += 1;
        }
        let mut ready: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = ready.pop() {
            order.push(v);
            for e in self.edges.iter().filter(|e| e.src == v) {
                indeg[e.dst] -= 1;
                if indeg[e.dst] == 0 {
                    ready.push(e.dst);
                }
            }
        }
        (order.len() == n).then_some(order)
    }
}

/// Checks every structural invariant of `d`.
///
/// Internal vertices must always have all their response legs fed; external
/// vertices may keep open response legs (see [`Diagram::is_closed`]).
pub fn validate_diagram(d: &Diagram) -> Result<(), Vec<Violation>> {
    let mut out = Vec::new();
    let n = d.vertices.len();
    let mut slots = BTreeSet::new();
    for (v, k) in d.vertices.iter().enumerate() {
        if let VertexKind::External { slot, legs, snaky } = k {
            if !slots.insert(*slot) {
                out.push(Violation::DuplicateSlot { slot: *slot });
            }
            if *legs == 0 && *snaky == 0 {
                out.push(Violation::EmptyExternal { vertex: v });
            }
        }
    }
    let mut endpoints_ok = true;
    for (i, e) in d.edges.iter().enumerate() {
        if e.src >= n || e.dst >= n {
            out.push(Violation::BadEndpoint { edge: i });
            endpoints_ok = false;
            continue;
        }
        if e.src == e.dst {
            out.push(Violation::SelfLoop { vertex: e.src });
        }
        let src_ok = (e.src_slot as usize) < d.vertices[e.src].source_slots();
        let dst_ok = match &d.vertices[e.dst] {
            VertexKind::External { snaky, .. } => *snaky > 0 && e.dst_slot == 0,
            k => (e.dst_slot as usize) < k.target_slots(),
        };
        if !src_ok || !dst_ok {
            out.push(Violation::BadEndpoint { edge: i });
            endpoints_ok = false;
        }
    }
    if endpoints_ok {
        for (v, k) in d.vertices.iter().enumerate() {
            match k {
                VertexKind::External { legs, snaky, .. } => {
                    if d.out_degree(v) > *legs as usize || d.in_degree(v) > *snaky as usize {
                        out.push(Violation::ExternalOverflow { vertex: v });
                    }
                }
                _ => {
                    for slot in 0..k.target_slots() {
                        let fed = d
                            .edges
                            .iter()
                            .filter(|e| e.dst == v && (e.dst_slot as usize) == slot)
                            .count();
                        if fed > 1 {
                            out.push(Violation::SlotOverflow { vertex: v, slot });
                        } else if fed == 0 {
                            out.push(Violation::UnfedSlot { vertex: v, slot });
                        }
                    }
                    for slot in 0..k.source_slots() {
                        let actual = d
                            .edges
                            .iter()
                            .filter(|e| e.src == v && (e.src_slot as usize) == slot)
                            .count() as u32;
                        let declared = k.slot_out(slot);
                        if actual != declared {
                            out.push(Violation::OutCountMismatch { vertex: v, slot, declared, actual });
                        }
                    }
                }
            }
        }
        if d.topological_order().is_none() {
            out.push(Violation::CyclicDiagram);
        }
    }
    let actual = d.grade();
    if actual != d.chi_order {
        out.push(Violation::BadGrade { declared: d.chi_order, actual });
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}
