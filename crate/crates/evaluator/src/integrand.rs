use sdemsr_diagram::{validate_diagram, Diagram, VertexKind};
use sdemsr_model::{CoefficientFn, ModelSpec};

use crate::{rational_to_f64, EvalError};

/// Endpoint of an edge or kernel: a fixed observation time or an internal
/// integration variable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Node {
    External(f64),
    Internal(usize),
}

/// Analytic factor of an internal vertex, without θ₀ and the coefficient.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Payload {
    /// `χ α_d`
    Drift(u32),
    /// `σ^p χ² β_a β_b`
    Noise(u32, u32),
    /// `σ χ² β_a β_{1+b}`
    Correction(u32, u32),
}

impl Payload {
    pub(crate) fn max_alpha(&self) -> Option<u32> {
        match *self {
            Payload::Drift(d) => Some(d),
            _ => None,
        }
    }

    pub(crate) fn max_beta(&self) -> Option<u32> {
        match *self {
            Payload::Drift(_) => None,
            Payload::Noise(a, b) => Some(a.max(b)),
            Payload::Correction(a, b) => Some(a.max(b + 1)),
        }
    }
}

/// How edges are weighted.
#[derive(Clone, Debug, PartialEq, Default)]
pub enum Propagator {
    /// `G(t, s) = θ(t − s)`.
    #[default]
    Theta,
    /// `G₁(t, s) = θ(t − s) exp(∫_s^t χ α₁)`, with the straight external legs
    /// propagated from the far past by the same kernel.
    Resummed { alpha1: CoefficientFn },
}

impl Propagator {
    pub(crate) fn external_factor(&self, ig: &Integrand, model: &ModelSpec) -> f64 {
        match self {
            Propagator::Theta => 1.0,
            Propagator::Resummed { alpha1 } => ig
                .externals
                .iter()
                .map(|&(t, legs)| (legs as f64 * chi_integral(model, alpha1, t)).exp())
                .product(),
        }
    }
}

/// `∫_{-∞}^{t} χ(s) a(s) ds`.
pub fn chi_integral(model: &ModelSpec, a: &CoefficientFn, t: f64) -> f64 {
    let (lo, hi) = model.chi.support();
    let upper = t.min(hi);
    if upper <= lo {
        return 0.0;
    }
    let mut bp = model.chi.breakpoints();
    bp.push(upper);
    sdemsr_model::integrate_1d(|s| model.chi.eval(s) * a.eval(s), lo, upper, &bp, 1e-14).value
}

/// A diagram flattened into numbers and index lists.
#[derive(Clone, Debug, PartialEq)]
pub struct Integrand {
    pub payloads: Vec<Payload>,
    /// `(parent, child)`: factor θ(t_parent − t_child).
    pub edges: Vec<(Node, usize)>,
    /// Pairs joined by the noise-leaf kernel `h(min(t_a, t_b))`.
    pub kernels: Vec<(Node, Node)>,
    /// Coefficient, x₀ powers, ε powers and external-only θ factors.
    pub constant: f64,
    /// Observation times with their total straight-leg counts.
    pub externals: Vec<(f64, u32)>,
}

impl Integrand {
    /// Flattens a closed diagram. With `leaf_kernels`, each `Noise{0,0}`
    /// vertex is integrated out analytically into a kernel between its two
    /// parents.
    pub fn from_diagram(d: &Diagram, model: &ModelSpec, times: &[f64], leaf_kernels: bool) -> Result<Self, EvalError> {
        validate_diagram(d).map_err(|v| {
            EvalError::Invalid(v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; "))
        })?;
        if !d.is_closed() {
            return Err(EvalError::NotClosed);
        }
        let mut node = vec![Node::External(0.0); d.vertices.len()];
        let mut is_leaf = vec![false; d.vertices.len()];
        let mut payloads = Vec::new();
        let mut externals = Vec::new();
        let mut constant = rational_to_f64(&d.coefficient) * model.epsilon.powi(d.chi_order as i32);
        for (v, k) in d.vertices.iter().enumerate() {
            match *k {
                VertexKind::External { slot, legs, .. } => {
                    let t = *times.get(slot).ok_or(EvalError::UnboundSlot { slot })?;
                    node[v] = Node::External(t);
                    let used = d.out_degree(v) as u32;
                    constant *= model.x0.powi((legs - used) as i32);
                    externals.push((t, legs));
                }
                VertexKind::Noise { out: [0, 0] } if leaf_kernels => is_leaf[v] = true,
                _ => {
                    node[v] = Node::Internal(payloads.len());
                    payloads.push(match *k {
                        VertexKind::Drift { out } => Payload::Drift(out),
                        VertexKind::Noise { out } => Payload::Noise(out[0], out[1]),
                        VertexKind::Correction { out } => Payload::Correction(out[0], out[1]),
                        VertexKind::External { .. } => unreachable!(),
                    });
                }
            }
        }
        let mut edges = Vec::new();
        let mut kernels = Vec::new();
        for (v, leaf) in is_leaf.iter().enumerate() {
            if *leaf {
                let p = d.parents(v);
                kernels.push((node[p[0]], node[p[1]]));
            }
        }
        for e in &d.edges {
            if is_leaf[e.dst] {
                continue;
            }
            match (node[e.src], node[e.dst]) {
                (src, Node::Internal(c)) => edges.push((src, c)),
                (Node::External(a), Node::External(b)) => {
                    if a <= b {
                        constant = 0.0;
                    }
                }
                (Node::Internal(_), Node::External(_)) => {
                    return Err(EvalError::Invalid("internal vertex feeding an external response leg".into()))
                }
            }
        }
        Ok(Integrand { payloads, edges, kernels, constant, externals })
    }

    pub fn in_degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|e| e.1 == v).count()
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|e| e.0 == Node::Internal(v)).count()
    }

    pub(crate) fn external_times(&self) -> Vec<f64> {
        let mut t: Vec<f64> = self.externals.iter().map(|e| e.0).collect();
        for &(a, b) in &self.kernels {
            for n in [a, b] {
                if let Node::External(x) = n {
                    t.push(x);
                }
            }
        }
        t
    }
}
