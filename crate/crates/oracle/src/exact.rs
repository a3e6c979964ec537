use sdemsr_model::{integrate_1d, ModelSpec};
use serde::Serialize;

use crate::OracleError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Benchmark {
    /// `x₀ exp(ε∫_{s<t} χλ)` for α = λx with state-independent noise.
    LinearMean,
    /// First and second Stratonovich moments for α = 0, β = b·x.
    GbmMoments,
    /// Variance of the linear additive equation α = λx, β = b.
    OuVariance,
    /// `σb²ε² ∫_{s<min(t,t′)} χ²` for α = 0, β = b.
    BrownianCov,
}

impl std::str::FromStr for Benchmark {
    type Err = OracleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "linear_mean" => Ok(Benchmark::LinearMean),
            "gbm_moments" => Ok(Benchmark::GbmMoments),
            "ou_variance" => Ok(Benchmark::OuVariance),
            "brownian_cov" => Ok(Benchmark::BrownianCov),
            _ => Err(OracleError::UnknownBenchmark(s.to_string())),
        }
    }
}

impl Benchmark {
    pub fn name(self) -> &'static str {
        match self {
            Benchmark::LinearMean => "linear_mean",
            Benchmark::GbmMoments => "gbm_moments",
            Benchmark::OuVariance => "ou_variance",
            Benchmark::BrownianCov => "brownian_cov",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchmarkValue {
    pub label: String,
    pub value: f64,
}

fn value(label: String, value: f64) -> BenchmarkValue {
    BenchmarkValue { label, value }
}

const TOL: f64 = 1e-11;

/// Closed-form values; time-dependent coefficients are integrated
/// numerically.
pub fn exact_benchmark(which: Benchmark, model: &ModelSpec, times: &[f64]) -> Result<Vec<BenchmarkValue>, OracleError> {
    model.validate()?;
    let mismatch = |reason: &str| OracleError::ShapeMismatch { benchmark: which.name().into(), reason: reason.into() };
    let alpha = model.alpha.coefficients();
    let beta = model.beta.coefficients();
    let alpha_linear = model.alpha.degree().is_none_or(|d| d == 1) && alpha.first().is_none_or(|c| c.is_zero());
    let alpha_zero = model.alpha.is_zero();
    let beta_const = model.beta.degree().is_none_or(|d| d == 0);
    let beta_linear = model.beta.degree() == Some(1) && beta[0].is_zero();
    let chi = &model.chi;
    let eps = model.epsilon;
    let (a, _) = chi.support();
    let bps = chi.breakpoints();
    let integral = |f: &dyn Fn(f64) -> f64, t: f64| if t <= a { 0.0 } else { integrate_1d(f, a, t, &bps, TOL).value };
    let lambda = |s: f64| alpha.get(1).map_or(0.0, |c| c.eval(s));
    let b0 = |s: f64| beta.first().map_or(0.0, |c| c.eval(s));

    match which {
        Benchmark::LinearMean => {
            if !(alpha_linear && beta_const) {
                return Err(mismatch("needs α = λx and x-independent β"));
            }
            Ok(times
                .iter()
                .enumerate()
                .map(|(i, &t)| value(format!("E[x[{i}]]"), model.x0 * (eps * integral(&|s| chi.eval(s) * lambda(s), t)).exp()))
                .collect())
        }
        Benchmark::GbmMoments => {
            if !(alpha_zero && beta_linear) {
                return Err(mismatch("needs α = 0 and β = b·x"));
            }
            let mut out = Vec::new();
            for (i, &t) in times.iter().enumerate() {
                let v = eps * eps * integral(&|s| (chi.eval(s) * beta[1].eval(s)).powi(2), t);
                out.push(value(format!("E[x[{i}]]"), model.x0 * (model.sigma * v / 2.0).exp()));
                out.push(value(format!("E[x[{i}]^2]"), model.x0.powi(2) * (2.0 * model.sigma * v).exp()));
            }
            Ok(out)
        }
        Benchmark::OuVariance => {
            if !(alpha_linear && beta_const) {
                return Err(mismatch("needs α = λx and x-independent β"));
            }
            let growth = |s: f64, t: f64| if t <= s { 0.0 } else { eps * integral_between(model, &lambda, s, t) };
            Ok(times
                .iter()
                .enumerate()
                .map(|(i, &t)| {
                    let f = |s: f64| (eps * chi.eval(s) * b0(s)).powi(2) * (2.0 * growth(s, t)).exp();
                    value(format!("Var[x[{i}]]"), model.sigma * integral(&f, t))
                })
                .collect())
        }
        Benchmark::BrownianCov => {
            if !(alpha_zero && beta_const) {
                return Err(mismatch("needs α = 0 and x-independent β"));
            }
            let mut out = Vec::new();
            for i in 0..times.len() {
                for j in i..times.len() {
                    let m = times[i].min(times[j]);
                    let c = model.sigma * eps * eps * integral(&|s| (chi.eval(s) * b0(s)).powi(2), m);
                    out.push(value(format!("Cov[x[{i}],x[{j}]]"), c));
                }
            }
            Ok(out)
        }
    }
}

fn integral_between(model: &ModelSpec, lambda: &dyn Fn(f64) -> f64, s: f64, t: f64) -> f64 {
    let (a, b) = model.chi.support();
    let (lo, hi) = (s.max(a), t.min(b));
    if hi <= lo {
        return 0.0;
    }
    integrate_1d(|u| model.chi.eval(u) * lambda(u), lo, hi, &model.chi.breakpoints(), TOL).value
}
