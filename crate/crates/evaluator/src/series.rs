use rayon::prelude::*;
use sdemsr_diagram::DiagramSeries;
use sdemsr_model::ModelSpec;

use crate::{evaluate_integrand, Estimate, EvalError, Integrand, Propagator, QuadConfig};

/// Numeric truncated series in the χ-order.
///
/// `coefficients[m]` is the order-m value at unit scale; [`NumericSeries::entry`]
/// applies the scale ε the series was built for.
#[derive(Clone, Debug, PartialEq)]
pub struct NumericSeries {
    pub coefficients: Vec<Estimate>,
    pub epsilon: f64,
}

impl NumericSeries {
    pub fn order(&self) -> u32 {
        self.coefficients.len().saturating_sub(1) as u32
    }

    /// Order-m value at the series' own ε.
    pub fn entry(&self, m: u32) -> Estimate {
        self.entry_at(m, self.epsilon)
    }

    pub fn entry_at(&self, m: u32, eps: f64) -> Estimate {
        let c = self.coefficients[m as usize];
        let s = eps.powi(m as i32);
        Estimate { value: c.value * s, error: c.error * s.abs() }
    }

    /// Partial sum through order `n` at scale `eps`.
    pub fn partial_sum_at(&self, n: u32, eps: f64) -> Estimate {
        (0..=n.min(self.order())).map(|m| self.entry_at(m, eps)).fold(Estimate::default(), |a, b| a + b)
    }

    pub fn sum(&self) -> Estimate {
        self.partial_sum_at(self.order(), self.epsilon)
    }
}

/// Evaluates every entry of a diagram series with the plain propagator.
pub fn evaluate_series(s: &DiagramSeries, model: &ModelSpec, times: &[f64], quad: &QuadConfig) -> Result<NumericSeries, EvalError> {
    evaluate_series_with(s, model, times, quad, &Propagator::Theta, false)
}

/// Evaluates a diagram series. Diagrams are integrated in parallel; the
/// per-order sums are accumulated in key order so results do not depend on
/// scheduling.
pub fn evaluate_series_with(
    s: &DiagramSeries,
    model: &ModelSpec,
    times: &[f64],
    quad: &QuadConfig,
    prop: &Propagator,
    leaf_kernels: bool,
) -> Result<NumericSeries, EvalError> {
    let unit = ModelSpec { epsilon: 1.0, ..model.clone() };
    let mut coefficients = Vec::with_capacity(s.entries.len());
    for sum in &s.entries {
        let diagrams: Vec<_> = sum.diagrams().collect();
        let parts: Result<Vec<Estimate>, EvalError> = diagrams
            .par_iter()
            .map(|d| {
                let ig = Integrand::from_diagram(d, &unit, times, leaf_kernels)?;
                evaluate_integrand(&ig, &unit, quad, prop)
            })
            .collect();
        coefficients.push(parts?.into_iter().fold(Estimate::default(), |a, b| a + b));
    }
    Ok(NumericSeries { coefficients, epsilon: model.epsilon })
}
