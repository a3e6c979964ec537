use crate::interp::MonotoneCubic;
use crate::ModelError;

/// Smooth, compactly supported switching function χ with 0 ≤ χ ≤ 1.
#[derive(Clone, Debug, PartialEq)]
pub enum CutoffFunction {
    /// C^∞ bump on (a, b) peaking at 1 in the middle.
    Bump { a: f64, b: f64, sharpness: f64 },
    /// Smooth ramp on (a, a1), equal to 1 on [a1, b1], smooth ramp down on (b1, b).
    Plateau { a: f64, a1: f64, b1: f64, b: f64, sharpness: f64 },
    /// User tabulation, clamped to [0, 1] and set to 0 outside its table.
    Tabulated(MonotoneCubic),
}

fn flat(u: f64, k: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else {
        (-k / u).exp()
    }
}

/// Smooth step from 0 at u = 0 to 1 at u = 1.
fn smooth_step(u: f64, k: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return 1.0;
    }
    let (p, q) = (flat(u, k), flat(1.0 - u, k));
    p / (p + q)
}

impl CutoffFunction {
    pub fn plateau(a: f64, a1: f64, b1: f64, b: f64) -> Self {
        CutoffFunction::Plateau { a, a1, b1, b, sharpness: 1.0 }
    }

    pub fn bump(a: f64, b: f64) -> Self {
        CutoffFunction::Bump { a, b, sharpness: 1.0 }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let err = |m: &str| Err(ModelError::BadCutoff(m.to_string()));
        match *self {
            CutoffFunction::Bump { a, b, sharpness } => {
                if !(a < b && a.is_finite() && b.is_finite()) {
                    return err("bump needs finite a < b");
                }
                if !(sharpness > 0.0) {
                    return err("sharpness must be positive");
                }
            }
            CutoffFunction::Plateau { a, a1, b1, b, sharpness } => {
                if !(a < a1 && a1 <= b1 && b1 < b && a.is_finite() && b.is_finite()) {
                    return err("plateau needs a < a1 <= b1 < b");
                }
                if !(sharpness > 0.0) {
                    return err("sharpness must be positive");
                }
            }
            CutoffFunction::Tabulated(_) => {}
        }
        Ok(())
    }

    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            CutoffFunction::Bump { a, b, sharpness } => {
                if t <= a || t >= b {
                    return 0.0;
                }
                let u = 2.0 * (t - a) / (b - a) - 1.0;
                (sharpness - sharpness / (1.0 - u * u)).exp()
            }
            CutoffFunction::Plateau { a, a1, b1, b, sharpness } => {
                if t <= a || t >= b {
                    0.0
                } else if t < a1 {
                    smooth_step((t - a) / (a1 - a), sharpness)
                } else if t <= b1 {
                    1.0
                } else {
                    smooth_step((b - t) / (b - b1), sharpness)
                }
            }
            CutoffFunction::Tabulated(ref table) => {
                let (lo, hi) = table.domain();
                if t < lo || t > hi {
                    0.0
                } else {
                    table.eval(t).clamp(0.0, 1.0)
                }
            }
        }
    }

    /// Closed interval outside of which χ vanishes.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            CutoffFunction::Bump { a, b, .. } | CutoffFunction::Plateau { a, b, .. } => (a, b),
            CutoffFunction::Tabulated(ref t) => t.domain(),
        }
    }

    /// Points where χ is not analytic; quadrature grids place nodes there.
    pub fn breakpoints(&self) -> Vec<f64> {
        match *self {
            CutoffFunction::Bump { a, b, .. } => vec![a, b],
            CutoffFunction::Plateau { a, a1, b1, b, .. } => vec![a, a1, b1, b],
            CutoffFunction::Tabulated(ref t) => {
                let (lo, hi) = t.domain();
                vec![lo, hi]
            }
        }
    }

    /// `∫_{-∞}^{t} χ(s)^p ds`.
    pub fn integral_pow_until(&self, p: i32, t: f64) -> f64 {
        let (lo, hi) = self.support();
        let upper = t.min(hi);
        if upper <= lo {
            return 0.0;
        }
        let mut bp = self.breakpoints();
        bp.push(upper);
        crate::integrate_1d(|s| self.eval(s).powi(p), lo, upper, &bp, 1e-12).value
    }
}
