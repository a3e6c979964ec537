//! Runs both expansion engines on the same observable and compares them,
//! first class by class with exact coefficients, then optionally as numbers.

use std::time::Instant;

use sdemsr_diagram::{diagram_to_text, rat, DiagramSeries};
use sdemsr_evaluator::{evaluate_series, EvalError, QuadConfig};
use sdemsr_model::ModelSpec;
use sdemsr_msr::{msr_expectation, Monomial, MsrError};
use sdemsr_sde::{sde_expectation, SdeError};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CheckError {
    #[error("the multiplicative comparison needs θ₀ = 1/2, got {0}")]
    ThetaMismatch(String),
    #[error("model does not fit this check: {0}")]
    ShapeMismatch(String),
    #[error("observable must not contain response legs")]
    ResponseLegs,
    #[error(transparent)]
    Msr(#[from] MsrError),
    #[error(transparent)]
    Sde(#[from] SdeError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Additive,
    Multiplicative,
    General,
}

/// One class on which the two sides disagree.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiffEntry {
    pub diagram: String,
    pub sde_coefficient: String,
    pub msr_coefficient: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NumericRecord {
    pub sde_value: f64,
    pub sde_error: f64,
    pub msr_value: f64,
    pub msr_error: f64,
    pub difference: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrderRecord {
    pub order: u32,
    pub structural_equal: bool,
    pub sde_classes: usize,
    pub msr_classes: usize,
    pub diff: Vec<DiffEntry>,
    pub numeric: Option<NumericRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub kind: CheckKind,
    pub experimental: bool,
    pub observable: String,
    pub times: Vec<f64>,
    pub order: u32,
    pub theta0: String,
    pub notes: Vec<String>,
    pub orders: Vec<OrderRecord>,
    pub sde_ms: f64,
    pub msr_ms: f64,
    pub numeric_ms: Option<f64>,
    pub passed: bool,
}

impl CheckReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    pub fn structural_pass(&self) -> bool {
        self.orders.iter().all(|o| o.structural_equal)
    }

    /// A few lines for terminals.
    pub fn summary(&self) -> String {
        let mut s = format!(
            "{:?} check of {} through order {}{}\n",
            self.kind,
            self.observable,
            self.order,
            if self.experimental { " [EXPERIMENTAL]" } else { "" }
        );
        for o in &self.orders {
            s.push_str(&format!(
                "  order {}: {} ({} sde / {} msr classes)",
                o.order,
                if o.structural_equal { "equal" } else { "DIFFERENT" },
                o.sde_classes,
                o.msr_classes
            ));
            if let Some(n) = &o.numeric {
                s.push_str(&format!(
                    ", values {:.9e} / {:.9e} {}",
                    n.sde_value,
                    n.msr_value,
                    if n.passed { "ok" } else { "MISMATCH" }
                ));
            }
            s.push('\n');
        }
        for n in &self.notes {
            s.push_str(&format!("  note: {n}\n"));
        }
        s.push_str(if self.passed { "  verdict: pass\n" } else { "  verdict: FAIL\n" });
        s
    }
}

fn describe(f: &Monomial) -> String {
    let mut parts = Vec::new();
    if f.scalar != rat(1, 1) {
        parts.push(f.scalar.to_string());
    }
    for &(slot, k) in &f.x_legs {
        parts.push(if k == 1 { format!("x(t{slot})") } else { format!("x(t{slot})^{k}") });
    }
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join("*")
    }
}

/// Additive noise: β independent of x. θ₀ plays no role because β₁ = 0.
pub fn check_additive(
    f: &Monomial,
    times: &[f64],
    model: &ModelSpec,
    order: u32,
    quad: Option<&QuadConfig>,
) -> Result<CheckReport, CheckError> {
    if model.beta.degree().is_some_and(|d| d > 0) {
        return Err(CheckError::ShapeMismatch("the additive check needs an x-independent β".into()));
    }
    let notes = vec!["β₁ = 0, so no correction vertex appears and the result does not depend on θ₀".into()];
    compare(CheckKind::Additive, f, times, model, order, quad, notes)
}

/// Multiplicative noise with no drift, Stratonovich convention on the MSR
/// side.
pub fn check_multiplicative(
    f: &Monomial,
    times: &[f64],
    model: &ModelSpec,
    order: u32,
    quad: Option<&QuadConfig>,
) -> Result<CheckReport, CheckError> {
    if !model.alpha.is_zero() {
        return Err(CheckError::ShapeMismatch("the multiplicative check needs α = 0".into()));
    }
    if model.theta0 != rat(1, 2) {
        return Err(CheckError::ThetaMismatch(model.theta0.to_string()));
    }
    let notes = vec!["odd orders must be empty on both sides".into()];
    compare(CheckKind::Multiplicative, f, times, model, order, quad, notes)
}

/// Arbitrary α and β. The MSR side uses the vertex with θ₀ = 1/2, i.e. the
/// drift α + ½σχββ₁, whatever θ₀ the model carries. Reported as
/// experimental because equality is only established for α = 0 or β = 1.
pub fn check_general(
    f: &Monomial,
    times: &[f64],
    model: &ModelSpec,
    order: u32,
    quad: Option<&QuadConfig>,
) -> Result<CheckReport, CheckError> {
    let mut notes = vec!["EXPERIMENTAL: equality beyond α = 0 or x-independent β is not an established result".to_string()];
    if model.theta0 != rat(1, 2) {
        notes.push(format!("θ₀ = {} replaced by 1/2 for the MSR vertex", model.theta0));
    }
    let m = model.clone().with_theta0(rat(1, 2));
    let mut r = compare(CheckKind::General, f, times, &m, order, quad, notes)?;
    r.experimental = true;
    Ok(r)
}

fn compare(
    kind: CheckKind,
    f: &Monomial,
    times: &[f64],
    model: &ModelSpec,
    order: u32,
    quad: Option<&QuadConfig>,
    mut notes: Vec<String>,
) -> Result<CheckReport, CheckError> {
    if f.xt_count() > 0 {
        return Err(CheckError::ResponseLegs);
    }
    let clock = Instant::now();
    let sde = sde_expectation(&f.x_legs, &f.scalar, times, model, order)?;
    let sde_ms = clock.elapsed().as_secs_f64() * 1e3;
    let clock = Instant::now();
    let msr = msr_expectation(f, times, model, order)?;
    let msr_ms = clock.elapsed().as_secs_f64() * 1e3;

    let mut orders = structural(&sde, &msr);
    let mut numeric_ms = None;
    if let Some(q) = quad {
        let clock = Instant::now();
        let a = evaluate_series(&sde, model, times, q)?;
        let b = evaluate_series(&msr, model, times, q)?;
        for (rec, (x, y)) in orders.iter_mut().zip(a.coefficients.iter().zip(&b.coefficients)) {
            let difference = (x.value - y.value).abs();
            let slack = 1e-12 * (1.0 + x.value.abs());
            rec.numeric = Some(NumericRecord {
                sde_value: x.value,
                sde_error: x.error,
                msr_value: y.value,
                msr_error: y.error,
                difference,
                passed: difference <= x.error + y.error + slack,
            });
        }
        numeric_ms = Some(clock.elapsed().as_secs_f64() * 1e3);
    }
    if kind == CheckKind::Multiplicative {
        let odd_ok = orders.iter().filter(|o| o.order % 2 == 1).all(|o| o.sde_classes == 0 && o.msr_classes == 0);
        if !odd_ok {
            notes.push("an odd order is not empty".into());
        }
    }
    let passed = orders.iter().all(|o| o.structural_equal && o.numeric.as_ref().is_none_or(|n| n.passed))
        && (kind != CheckKind::Multiplicative
            || orders.iter().filter(|o| o.order % 2 == 1).all(|o| o.sde_classes == 0 && o.msr_classes == 0));
    Ok(CheckReport {
        kind,
        experimental: false,
        observable: describe(f),
        times: times.to_vec(),
        order,
        theta0: model.theta0.to_string(),
        notes,
        orders,
        sde_ms,
        msr_ms,
        numeric_ms,
        passed,
    })
}

/// Per-order class comparison.
pub fn structural(sde: &DiagramSeries, msr: &DiagramSeries) -> Vec<OrderRecord> {
    sde.entries
        .iter()
        .zip(&msr.entries)
        .enumerate()
        .map(|(m, (a, b))| {
            let diff: Vec<DiffEntry> = a
                .diff(b)
                .into_iter()
                .map(|d| DiffEntry {
                    diagram: diagram_to_text(&d.representative),
                    sde_coefficient: d.left.to_string(),
                    msr_coefficient: d.right.to_string(),
                })
                .collect();
            OrderRecord {
                order: m as u32,
                structural_equal: diff.is_empty(),
                sde_classes: a.len(),
                msr_classes: b.len(),
                diff,
                numeric: None,
            }
        })
        .collect()
}

