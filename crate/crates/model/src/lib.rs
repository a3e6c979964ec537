//! Problem instances for the scalar SDE `ẋ = χ(α(x,t) + β(x,t)√σ η)`.

mod cutoff;
mod interp;
mod poly;
mod quad;

pub use cutoff::CutoffFunction;
pub use interp::MonotoneCubic;
pub use poly::{horner, CoefficientFn, Polynomial1D};
pub use quad::{integrate_1d, richardson, GridLevel, PiecewiseGrid, Quadrature};

use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("sigma must be positive, got {0}")]
    BadSigma(f64),
    #[error("theta0 must lie in [0,1], got {0}")]
    BadTheta(String),
    #[error("epsilon must be non-negative and finite, got {0}")]
    BadEpsilon(f64),
    #[error("invalid cutoff: {0}")]
    BadCutoff(String),
    #[error("invalid coefficient function: {0}")]
    BadCoefficient(String),
    #[error("cannot parse `{0}` as an exact rational")]
    BadRational(String),
}

/// The problem instance: drift α, diffusion β, noise strength σ, initial
/// value x₀, the θ₀ convention, the cutoff χ and a global scale ε on χ.
#[derive(Clone, Debug)]
pub struct ModelSpec {
    pub alpha: Polynomial1D,
    pub beta: Polynomial1D,
    pub sigma: f64,
    pub x0: f64,
    /// Exact, because it enters diagram coefficients.
    pub theta0: BigRational,
    pub chi: CutoffFunction,
    pub epsilon: f64,
    /// Power of σ carried by each Noise vertex. The default 1 gives the
    /// σ/2 interaction that matches the Gaussian two-point function.
    pub vertex_sigma_power: u32,
}

impl ModelSpec {
    pub fn new(alpha: Polynomial1D, beta: Polynomial1D, sigma: f64, x0: f64, chi: CutoffFunction) -> Self {
        ModelSpec {
            alpha,
            beta,
            sigma,
            x0,
            theta0: BigRational::zero(),
            chi,
            epsilon: 1.0,
            vertex_sigma_power: 1,
        }
    }

    pub fn with_theta0(mut self, theta0: BigRational) -> Self {
        self.theta0 = theta0;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn theta0_f64(&self) -> f64 {
        self.theta0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(ModelError::BadSigma(self.sigma));
        }
        if self.theta0 < BigRational::zero() || self.theta0 > BigRational::one() {
            return Err(ModelError::BadTheta(self.theta0.to_string()));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(ModelError::BadEpsilon(self.epsilon));
        }
        self.chi.validate()?;
        Ok(())
    }

    /// Drift `εχ(t)α(x,t)` of the simulated equation.
    pub fn drift(&self, x: f64, t: f64) -> f64 {
        self.epsilon * self.chi.eval(t) * self.alpha.eval(x, t)
    }

    /// Diffusion `εχ(t)β(x,t)√σ` of the simulated equation.
    pub fn diffusion(&self, x: f64, t: f64) -> f64 {
        self.epsilon * self.chi.eval(t) * self.beta.eval(x, t) * self.sigma.sqrt()
    }
}

/// Parses `"p/q"`, an integer, or a finite decimal such as `0.25` exactly.
pub fn parse_rational(text: &str) -> Result<BigRational, ModelError> {
    let t = text.trim();
    let bad = || ModelError::BadRational(text.to_string());
    if let Some((p, q)) = t.split_once('/') {
        let p: num_bigint::BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: num_bigint::BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(p, q));
    }
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (t, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if int.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    let all = format!("{int}{frac}");
    if !all.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let n: num_bigint::BigInt = all.parse().map_err(|_| bad())?;
    let scale = exp - frac.len() as i32;
    let ten = num_bigint::BigInt::from(10);
    let mut r = BigRational::from_integer(n);
    if scale >= 0 {
        r *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        r /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if neg { -r } else { r })
}

/// Upper limits on the χ-order of an expansion. Models whose β depends on x
/// produce far more diagrams per order, so they get the smaller bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExpansionBounds {
    pub additive: u32,
    pub multiplicative: u32,
}

impl Default for ExpansionBounds {
    fn default() -> Self {
        ExpansionBounds { additive: 6, multiplicative: 4 }
    }
}

impl ExpansionBounds {
    pub fn for_model(&self, model: &ModelSpec) -> u32 {
        if model.beta.degree().unwrap_or(0) >= 1 {
            self.multiplicative
        } else {
            self.additive
        }
    }
}
