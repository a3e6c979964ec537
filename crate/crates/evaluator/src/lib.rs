//! Numerical evaluation of closed diagrams.
//!
//! A closed diagram is an iterated integral over the times of its internal
//! vertices. The time-ordering constraints from the edges form a partial
//! order, so the integral is computed by dynamic programming over down-closed
//! vertex subsets: `D(S)(s)` is the integral over configurations of `S` with
//! all times below `s`, and
//!
//! ```text
//! D(S)(s) = Σ_{v ∈ S maximal} ∫_{-∞}^{s} f_v(u) D(S∖{v})(u) du.
//! ```
//!
//! Each `D` is tabulated on a piecewise-uniform grid by cumulative trapezoid
//! sums. The grid has breakpoints at the cutoff's kinks and at every
//! observation time, so all indicator factors are constant per interval.
//! Three nested refinements feed a two-stage Richardson extrapolation.

mod integrand;
mod series;

pub use integrand::{Integrand, Node, Payload, Propagator};
pub use series::{evaluate_series, evaluate_series_with, NumericSeries};

use std::collections::HashMap;

use num_traits::ToPrimitive;
use sdemsr_diagram::Diagram;
use sdemsr_model::{richardson, GridLevel, ModelSpec, PiecewiseGrid};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("observation slot {slot} has no time bound to it")]
    UnboundSlot { slot: usize },
    #[error("quadrature error estimate {error:e} above tolerance {tolerance:e} after maximal refinement")]
    QuadratureFailure { error: f64, tolerance: f64 },
    #[error("diagram is not closed; open response legs cannot be evaluated")]
    NotClosed,
    #[error("invalid diagram: {0}")]
    Invalid(String),
    #[error("{0} internal vertices exceed the evaluator limit of {MAX_INTERNAL}")]
    TooManyVertices(usize),
    #[error("kernel factors cannot be combined with a resummed propagator")]
    KernelWithResummation,
}

/// Largest number of internal vertices the subset recursion accepts.
pub const MAX_INTERNAL: usize = 12;

/// A value together with an error estimate.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate { value, error: 0.0 }
    }
}

impl std::ops::Add for Estimate {
    type Output = Estimate;
    fn add(self, o: Estimate) -> Estimate {
        Estimate { value: self.value + o.value, error: self.error + o.error }
    }
}

/// Quadrature controls.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadConfig {
    /// Intervals per grid piece on the coarsest of the three levels.
    pub grid_points: usize,
    /// Relative tolerance on the Richardson error estimate.
    pub tolerance: f64,
    /// Absolute tolerance; values whose error is below it are accepted.
    pub abs_tolerance: f64,
    /// Number of times `grid_points` may be doubled before giving up.
    pub max_refinements: u32,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig { grid_points: 16, tolerance: 1e-6, abs_tolerance: 1e-12, max_refinements: 6 }
    }
}

/// Evaluates a closed diagram at the model's ε with the plain propagator θ.
pub fn evaluate_diagram(d: &Diagram, model: &ModelSpec, times: &[f64], quad: &QuadConfig) -> Result<Estimate, EvalError> {
    let ig = Integrand::from_diagram(d, model, times, false)?;
    evaluate_integrand(&ig, model, quad, &Propagator::Theta)
}

/// Evaluates an integrand, refining the grid until the tolerance is met.
pub fn evaluate_integrand(
    ig: &Integrand,
    model: &ModelSpec,
    quad: &QuadConfig,
    prop: &Propagator,
) -> Result<Estimate, EvalError> {
    if ig.payloads.len() > MAX_INTERNAL {
        return Err(EvalError::TooManyVertices(ig.payloads.len()));
    }
    if !ig.kernels.is_empty() && !matches!(prop, Propagator::Theta) {
        return Err(EvalError::KernelWithResummation);
    }
    let ext_factor = prop.external_factor(ig, model);
    if ig.constant == 0.0 {
        return Ok(Estimate::exact(0.0));
    }
    let ext_factor = ext_factor
        * ig.kernels
            .iter()
            .map(|&(a, b)| match (a, b) {
                (Node::External(s), Node::External(t)) => kernel_at(model, s.min(t)),
                _ => 1.0,
            })
            .product::<f64>();
    if ig.payloads.is_empty() {
        return Ok(Estimate::exact(ig.constant * ext_factor));
    }
    let (lo, hi) = model.chi.support();
    let mut bps = model.chi.breakpoints();
    bps.extend(ig.external_times());
    let mut base = quad.grid_points.max(2);
    let mut last = None;
    for _ in 0..=quad.max_refinements {
        let grid = PiecewiseGrid::new(lo, hi, &bps, base);
        let mut t = [0.0; 3];
        for (l, slot) in t.iter_mut().enumerate() {
            *slot = integrate_on_level(ig, model, &grid.level(l as u32), prop);
        }
        let q = richardson(t);
        let scale = (ig.constant * ext_factor).abs();
        let est = Estimate { value: q.value * ig.constant * ext_factor, error: q.error_estimate * scale };
        if est.error <= quad.tolerance * est.value.abs() || est.error <= quad.abs_tolerance {
            return Ok(est);
        }
        last = Some(est);
        base *= 2;
    }
    let est = last.unwrap();
    Err(EvalError::QuadratureFailure { error: est.error, tolerance: quad.tolerance * est.value.abs() })
}

/// The noise-leaf kernel `σ^p ∫_{s<τ} χ²β₀²(x₀, s) ds`.
pub fn kernel_at(model: &ModelSpec, tau: f64) -> f64 {
    let (lo, hi) = model.chi.support();
    let upper = tau.min(hi);
    if upper <= lo {
        return 0.0;
    }
    let mut bp = model.chi.breakpoints();
    bp.push(upper);
    let f = |s: f64| {
        let c = model.chi.eval(s);
        let b = model.beta.derivative(0, model.x0, s);
        c * c * b * b
    };
    model.sigma.powi(model.vertex_sigma_power as i32) * sdemsr_model::integrate_1d(f, lo, upper, &bp, 1e-13).value
}

/// Unextrapolated value of the integral (without `constant`) on one level.
fn integrate_on_level(ig: &Integrand, model: &ModelSpec, level: &GridLevel, prop: &Propagator) -> f64 {
    let n = ig.payloads.len();
    let nodes = &level.nodes;
    let len = nodes.len();
    let chi: Vec<f64> = nodes.iter().map(|&u| model.chi.eval(u)).collect();
    let x0 = model.x0;
    let max_a = ig.payloads.iter().map(|p| p.max_alpha()).max().flatten();
    let max_b = ig.payloads.iter().map(|p| p.max_beta()).max().flatten();
    let alpha: Vec<Vec<f64>> = match max_a {
        Some(m) => (0..=m).map(|j| nodes.iter().map(|&u| model.alpha.derivative(j, x0, u)).collect()).collect(),
        None => Vec::new(),
    };
    let beta: Vec<Vec<f64>> = match max_b {
        Some(m) => (0..=m).map(|j| nodes.iter().map(|&u| model.beta.derivative(j, x0, u)).collect()).collect(),
        None => Vec::new(),
    };
    let sigma_noise = model.sigma.powi(model.vertex_sigma_power as i32);
    let mut f: Vec<Vec<f64>> = ig
        .payloads
        .iter()
        .map(|p| {
            (0..len)
                .map(|i| match *p {
                    Payload::Drift(d) => chi[i] * alpha[d as usize][i],
                    Payload::Noise(a, b) => sigma_noise * chi[i] * chi[i] * beta[a as usize][i] * beta[b as usize][i],
                    Payload::Correction(a, b) => {
                        model.sigma * chi[i] * chi[i] * beta[a as usize][i] * beta[b as usize + 1][i]
                    }
                })
                .collect()
        })
        .collect();

    if let Propagator::Resummed { alpha1 } = prop {
        let g: Vec<f64> = (0..len).map(|i| chi[i] * alpha1.eval(nodes[i])).collect();
        let a = level.cumulative(&g, |_| 1.0);
        for (v, fv) in f.iter_mut().enumerate() {
            let net = ig.out_degree(v) as f64 - ig.in_degree(v) as f64;
            if net != 0.0 {
                for (x, ai) in fv.iter_mut().zip(&a) {
                    *x *= (net * ai).exp();
                }
            }
        }
    }

    let h: Vec<f64> = if ig.kernels.is_empty() {
        Vec::new()
    } else {
        let g: Vec<f64> = (0..len)
            .map(|i| {
                let b = model.beta.derivative(0, x0, nodes[i]);
                chi[i] * chi[i] * b * b
            })
            .collect();
        level.cumulative(&g, |_| 1.0).into_iter().map(|x| sigma_noise * x).collect()
    };
    // Kernels with an external partner: tabulate h(min(T, u)).
    let ext_kernel = |tau: f64| -> Vec<f64> {
        let k = level.index_of(tau).min(len - 1);
        let cap = if nodes[k] <= tau + 1e-12 { h[k] } else { kernel_at(model, tau) };
        (0..len).map(|i| if nodes[i] < tau { h[i] } else { cap }).collect()
    };

    // Unary kernel factors (self pairs and external partners).
    for &(a, b) in &ig.kernels {
        match (a, b) {
            (Node::Internal(v), Node::Internal(w)) if v == w => {
                for i in 0..len {
                    f[v][i] *= h[i];
                }
            }
            (Node::Internal(v), Node::External(t)) | (Node::External(t), Node::Internal(v)) => {
                let hk = ext_kernel(t);
                for i in 0..len {
                    f[v][i] *= hk[i];
                }
            }
            _ => {}
        }
    }
    let pair_partner: Vec<Vec<usize>> = (0..n)
        .map(|v| {
            ig.kernels
                .iter()
                .filter_map(|&(a, b)| match (a, b) {
                    (Node::Internal(x), Node::Internal(y)) if x != y && x == v => Some(y),
                    (Node::Internal(x), Node::Internal(y)) if x != y && y == v => Some(x),
                    _ => None,
                })
                .collect()
        })
        .collect();

    let mut parent_mask = vec![0u32; n];
    let mut upper = vec![f64::INFINITY; n];
    for &(p, c) in &ig.edges {
        match p {
            Node::Internal(q) => parent_mask[c] |= 1 << q,
            Node::External(t) => upper[c] = upper[c].min(t),
        }
    }
    let masks: Vec<Vec<f64>> =
        upper.iter().map(|&b| level.mids.iter().map(|&m| if m < b { 1.0 } else { 0.0 }).collect()).collect();

    let mut memo: HashMap<u32, Vec<f64>> = HashMap::new();
    memo.insert(0, vec![1.0; len]);
    let full = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let ctx = Dp { f: &f, h: &h, parent_mask: &parent_mask, masks: &masks, partners: &pair_partner, level };
    let d = ctx.solve(full, &mut memo);
    d[len - 1]
}

struct Dp<'a> {
    f: &'a [Vec<f64>],
    h: &'a [f64],
    parent_mask: &'a [u32],
    masks: &'a [Vec<f64>],
    partners: &'a [Vec<usize>],
    level: &'a GridLevel,
}

impl Dp<'_> {
    fn solve(&self, s: u32, memo: &mut HashMap<u32, Vec<f64>>) -> Vec<f64> {
        if let Some(v) = memo.get(&s) {
            return v.clone();
        }
        let len = self.level.nodes.len();
        let mut acc = vec![0.0; len];
        for v in 0..self.f.len() {
            if s >> v & 1 == 0 || self.parent_mask[v] & s != 0 {
                continue;
            }
            let rest = s & !(1 << v);
            let inner = self.solve(rest, memo);
            let mut g: Vec<f64> = (0..len).map(|i| self.f[v][i] * inner[i]).collect();
            for &w in &self.partners[v] {
                if s >> w & 1 == 0 {
                    for (x, hi) in g.iter_mut().zip(self.h) {
                        *x *= hi;
                    }
                }
            }
            let mask = &self.masks[v];
            let c = self.level.cumulative(&g, |i| mask[i]);
            for (a, ci) in acc.iter_mut().zip(c) {
                *a += ci;
            }
        }
        memo.insert(s, acc.clone());
        acc
    }
}

pub(crate) fn rational_to_f64(r: &sdemsr_diagram::Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}
