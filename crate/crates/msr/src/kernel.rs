use sdemsr_evaluator::{evaluate_series_with, NumericSeries, Propagator, QuadConfig};
use sdemsr_model::{integrate_1d, CoefficientFn, CutoffFunction, ModelSpec, Polynomial1D};

use crate::labelled::msr_expectation_labelled;
use crate::monomial::Monomial;
use crate::{msr_expectation, MsrError};

/// A two-time kernel tabulated on a grid, `values[i][j] = K(grid[i], grid[j])`.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelTable {
    pub grid: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl KernelTable {
    /// Rows `(t, t_prime, value)` in row-major order.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.grid
            .iter()
            .enumerate()
            .flat_map(move |(i, &t)| self.grid.iter().enumerate().map(move |(j, &s)| (t, s, self.values[i][j])))
    }

    /// Largest `|∂_t K(t, t') − c(t) K(t, t')|` over interior grid points
    /// with `t' < t_{i-1}`, using central differences. For the resummed
    /// propagator with `c = χα₁` this is the weak-sense residual of
    /// `(d/dt − χα₁)G₁ = δ` away from the diagonal.
    pub fn operator_residual(&self, c: impl Fn(f64) -> f64) -> f64 {
        let g = &self.grid;
        let mut worst: f64 = 0.0;
        for i in 1..g.len().saturating_sub(1) {
            for j in 0..g.len() {
                if g[j] >= g[i - 1] {
                    continue;
                }
                let dk = (self.values[i + 1][j] - self.values[i - 1][j]) / (g[i + 1] - g[i - 1]);
                worst = worst.max((dk - c(g[i]) * self.values[i][j]).abs());
            }
        }
        worst
    }
}

/// `∫_{s<τ} f(s) ds` for a function vanishing outside `supp χ`.
fn cumulative(chi: &CutoffFunction, f: impl Fn(f64) -> f64, tau: f64, tol: f64) -> Result<f64, MsrError> {
    let (lo, hi) = chi.support();
    let upper = tau.min(hi);
    if upper <= lo {
        return Ok(0.0);
    }
    let mut bp = chi.breakpoints();
    bp.push(upper);
    let q = integrate_1d(f, lo, upper, &bp, tol * 1e-3);
    if q.error_estimate > tol * q.value.abs() && q.error_estimate > 1e-12 {
        return Err(MsrError::GridTooCoarse { error: q.error_estimate, tolerance: tol * q.value.abs() });
    }
    Ok(q.value)
}

/// `Q(t, t') = ∫_{s < min(t,t')} χ²(s) β²(x₀, s) ds` on `grid × grid`.
///
/// σ is not included. `tol` is the relative tolerance demanded of each
/// quadrature.
pub fn q_kernel(model: &ModelSpec, grid: &[f64], tol: f64) -> Result<KernelTable, MsrError> {
    let f = |s: f64| {
        let c = model.chi.eval(s);
        let b = model.beta.eval(model.x0, s);
        c * c * b * b
    };
    let cum: Vec<f64> = grid.iter().map(|&t| cumulative(&model.chi, f, t, tol)).collect::<Result<_, _>>()?;
    let values = (0..grid.len())
        .map(|i| (0..grid.len()).map(|j| if grid[i] <= grid[j] { cum[i] } else { cum[j] }).collect())
        .collect();
    Ok(KernelTable { grid: grid.to_vec(), values })
}

/// `G₁(t, t') = θ(t − t') exp(∫_{t'}^{t} χα₁)` on `grid × grid`; the diagonal
/// holds `diagonal` (the θ(0) convention of the calling engine).
pub fn resummed_propagator(
    alpha1: &CoefficientFn,
    chi: &CutoffFunction,
    grid: &[f64],
    diagonal: f64,
    tol: f64,
) -> Result<KernelTable, MsrError> {
    let a: Vec<f64> =
        grid.iter().map(|&t| cumulative(chi, |s| chi.eval(s) * alpha1.eval(s), t, tol)).collect::<Result<_, _>>()?;
    let values = (0..grid.len())
        .map(|i| {
            (0..grid.len())
                .map(|j| match grid[i].partial_cmp(&grid[j]) {
                    Some(std::cmp::Ordering::Greater) => (a[i] - a[j]).exp(),
                    Some(std::cmp::Ordering::Equal) => diagonal,
                    _ => 0.0,
                })
                .collect()
        })
        .collect();
    Ok(KernelTable { grid: grid.to_vec(), values })
}

/// Numeric series of the α₁-chain diagrams for `x(t)` under the drift
/// `α₁(t)x`, with x₀ = 1. Its partial sums approximate `G₁(t, t')` for any
/// `t'` before the support of χ.
pub fn chain_series(
    alpha1: &CoefficientFn,
    model: &ModelSpec,
    t: f64,
    order: u32,
    quad: &QuadConfig,
) -> Result<NumericSeries, MsrError> {
    let linear = ModelSpec {
        alpha: Polynomial1D::new(vec![CoefficientFn::Constant(0.0), alpha1.clone()]),
        beta: Polynomial1D::zero(),
        x0: 1.0,
        ..model.clone()
    };
    let s = msr_expectation(&Monomial::x(&[0]), &[t], &linear, order)?;
    Ok(evaluate_series_with(&s, &linear, &[t], quad, &Propagator::Theta, false)?)
}

/// Series of `⟨⟨F⟩⟩` computed through the factorised form: every noise
/// pairing whose vertex has no further derivatives is replaced by the
/// kernel `σ Q(min(τ_a, τ_b))` between its two partners, and the diagrams
/// are produced by the labelled expansion rather than the class formula.
pub fn t_exp_apply(
    f: &Monomial,
    times: &[f64],
    model: &ModelSpec,
    order: u32,
    quad: &QuadConfig,
) -> Result<NumericSeries, MsrError> {
    if f.x_count() > 4 {
        return Err(MsrError::InvalidInput("at most four straight legs".into()));
    }
    let s = msr_expectation_labelled(f, times, model, order)?;
    Ok(evaluate_series_with(&s, model, times, quad, &Propagator::Theta, true)?)
}
