use crate::interp::MonotoneCubic;

/// A coefficient of α or β as a function of time.
#[derive(Clone, Debug, PartialEq)]
pub enum CoefficientFn {
    Constant(f64),
    /// `Σ_k c_k t^k`
    PolyT(Vec<f64>),
    /// `offset + amplitude · sin(frequency · t + phase)`
    Sinusoid { amplitude: f64, frequency: f64, phase: f64, offset: f64 },
    Tabulated(MonotoneCubic),
}

impl CoefficientFn {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            CoefficientFn::Constant(c) => *c,
            CoefficientFn::PolyT(c) => c.iter().rev().fold(0.0, |acc, &ck| acc * t + ck),
            CoefficientFn::Sinusoid { amplitude, frequency, phase, offset } => {
                offset + amplitude * (frequency * t + phase).sin()
            }
            CoefficientFn::Tabulated(table) => table.eval(t),
        }
    }

    /// True only when the function is structurally the zero function.
    pub fn is_zero(&self) -> bool {
        match self {
            CoefficientFn::Constant(c) => *c == 0.0,
            CoefficientFn::PolyT(c) => c.iter().all(|&x| x == 0.0),
            CoefficientFn::Sinusoid { amplitude, offset, .. } => *amplitude == 0.0 && *offset == 0.0,
            CoefficientFn::Tabulated(_) => false,
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            CoefficientFn::Constant(c) => c.is_finite(),
            CoefficientFn::PolyT(c) => c.iter().all(|x| x.is_finite()),
            CoefficientFn::Sinusoid { amplitude, frequency, phase, offset } => {
                [amplitude, frequency, phase, offset].iter().all(|x| x.is_finite())
            }
            CoefficientFn::Tabulated(_) => true,
        }
    }
}

/// Polynomial in x whose coefficients depend on t:
/// `p(x, t) = Σ_{d=0}^{D} c_d(t) x^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial1D {
    coeffs: Vec<CoefficientFn>,
}

impl Polynomial1D {
    /// Trailing structurally-zero coefficients are dropped, so `degree`
    /// reflects the highest coefficient that is not identically zero.
    pub fn new(mut coeffs: Vec<CoefficientFn>) -> Self {
        while coeffs.last().is_some_and(CoefficientFn::is_zero) {
            coeffs.pop();
        }
        Polynomial1D { coeffs }
    }

    pub fn from_constants(c: &[f64]) -> Self {
        Self::new(c.iter().map(|&x| CoefficientFn::Constant(x)).collect())
    }

    pub fn zero() -> Self {
        Polynomial1D { coeffs: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.coeffs.len().checked_sub(1).map(|d| d as u32)
    }

    /// Whether `∂ₓ^j p` can be non-zero.
    pub fn has_derivative(&self, j: u32) -> bool {
        self.degree().is_some_and(|d| j <= d)
    }

    pub fn coefficient(&self, d: usize) -> Option<&CoefficientFn> {
        self.coeffs.get(d)
    }

    pub fn coefficients(&self) -> &[CoefficientFn] {
        &self.coeffs
    }

    pub fn eval(&self, x: f64, t: f64) -> f64 {
        self.derivative(0, x, t)
    }

    /// `∂ₓ^j p(x, t) = Σ_{d≥j} c_d(t) · d!/(d−j)! · x^{d−j}`.
    pub fn derivative(&self, j: u32, x: f64, t: f64) -> f64 {
        let j = j as usize;
        let mut acc = 0.0;
        for d in (j..self.coeffs.len()).rev() {
            let falling: f64 = ((d - j + 1)..=d).map(|k| k as f64).product();
            acc = acc * x + falling * self.coeffs[d].eval(t);
        }
        acc
    }

    /// Evaluates all coefficients at time `t` (for hot loops).
    pub fn coefficients_at(&self, t: f64) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.eval(t)).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(CoefficientFn::is_finite)
    }
}

/// Horner evaluation of `Σ c_d x^d` from pre-evaluated coefficients.
pub fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ck| acc * x + ck)
}
