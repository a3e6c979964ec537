//! Diagram data model shared by the MSR and SDE expansion engines.
//!
//! A [`Diagram`] is a directed acyclic multigraph. External vertices are
//! observation points `x(t_i)`; internal vertices carry the drift, noise and
//! correction payloads of the interacting vertex. Edges run from the later
//! time to the earlier one and stand for the retarded kernel `G = θ`.
//!
//! Coefficients are exact rationals. Everything analytic (χ, σ, the α/β
//! derivatives, x₀ powers) lives in the vertex payloads and is only turned
//! into numbers by the evaluator.

mod canon;
mod diagram;
mod sum;
mod text;

pub use canon::{
    automorphism_count, automorphism_count_brute_force, canonical_key, canonicalize,
    class_doubling_exponent, slot_attachment_variants, CanonError, CanonicalForm, CanonicalKey,
    DEFAULT_CANON_BOUND,
};
pub use diagram::{validate_diagram, Diagram, Edge, VertexKind, Violation};
pub use sum::{DiagramSeries, DiagramSum, SumDiff};
pub use text::{
    diagram_from_text, diagram_to_dot, diagram_to_text, sum_from_text, sum_to_text, ParseError,
};

/// Exact arbitrary-precision rational used for every combinatorial weight.
pub type Rational = num_rational::BigRational;

/// Convenience constructor for small rationals.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(num.into(), den.into())
}

/// `n!` as an exact rational.
pub fn factorial(n: u32) -> Rational {
    let mut acc = num_bigint::BigInt::from(1);
    for k in 2..=n {
        acc *= k;
    }
    Rational::from_integer(acc)
}

/// Falling factorial `n (n-1) ... (n-k+1)` as an exact rational.
pub fn falling_factorial(n: u32, k: u32) -> Rational {
    if k > n {
        return Rational::from_integer(0.into());
    }
    let mut acc = num_bigint::BigInt::from(1);
    for j in 0..k {
        acc *= n - j;
    }
    Rational::from_integer(acc)
}
