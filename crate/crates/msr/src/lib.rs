//! The response-field side of the correspondence.
//!
//! Expectation values are generated as sums of closed diagrams built from
//! the observable's legs and copies of the interacting vertex
//! `χx̃α + (σ/2)χ²x̃²β² + θ₀σχ²x̃ββ₁`, with every response leg contracted
//! against a straight leg of a later vertex through `G = θ`.

mod expect;
mod gamma;
mod kernel;
mod labelled;
mod monomial;
mod vertex;

pub use expect::{class_coefficient, msr_expectation, msr_expectation_bounded};
pub use gamma::{
    deformed_product, diagram_product, gamma_g_apply, gamma_g_inverse, restrict_xt_zero, sum_product,
    vanishing_check, vanishing_report, VanishingReport,
};
pub use kernel::{chain_series, q_kernel, resummed_propagator, t_exp_apply, KernelTable};
pub use labelled::msr_expectation_labelled;
pub use monomial::{check_distinct_times, Monomial};
pub use vertex::{interacting_vertex, InteractingVertexTemplates, TemplateKind, VertexTemplate};

use sdemsr_diagram::CanonError;
use sdemsr_evaluator::EvalError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MsrError {
    #[error("observation slots {a} and {b} carry the same time")]
    CoincidentTimes { a: usize, b: usize },
    #[error("order {order} exceeds the configured bound {bound}")]
    OrderTooLarge { order: u32, bound: u32 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("observation slot {0} has no time")]
    UnboundSlot(usize),
    #[error("kernel quadrature error {error:e} above tolerance {tolerance:e}")]
    GridTooCoarse { error: f64, tolerance: f64 },
    #[error(transparent)]
    Canon(#[from] CanonError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}
