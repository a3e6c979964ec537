use num_traits::{One, Zero};
use sdemsr_diagram::{rat, Rational};
use sdemsr_model::ModelSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TemplateKind {
    Drift,
    Noise,
    Correction,
}

/// One term of the interacting vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexTemplate {
    pub kind: TemplateKind,
    /// 1 for drift, 1/2 for noise, θ₀ for the correction.
    pub weight: Rational,
    pub chi_order: u32,
    /// Number of x̃ factors.
    pub response_legs: u32,
    /// Largest useful out-count per source slot (derivatives beyond the
    /// polynomial degree vanish).
    pub capacity: [u32; 2],
}

/// The templates present for a model.
#[derive(Clone, Debug, PartialEq)]
pub struct InteractingVertexTemplates {
    pub drift: Option<VertexTemplate>,
    pub noise: Option<VertexTemplate>,
    pub correction: Option<VertexTemplate>,
}

impl InteractingVertexTemplates {
    pub fn iter(&self) -> impl Iterator<Item = &VertexTemplate> {
        [&self.drift, &self.noise, &self.correction].into_iter().flatten()
    }

    pub fn get(&self, kind: TemplateKind) -> Option<&VertexTemplate> {
        match kind {
            TemplateKind::Drift => self.drift.as_ref(),
            TemplateKind::Noise => self.noise.as_ref(),
            TemplateKind::Correction => self.correction.as_ref(),
        }
    }
}

pub fn interacting_vertex(model: &ModelSpec) -> InteractingVertexTemplates {
    let drift = model.alpha.degree().map(|d| VertexTemplate {
        kind: TemplateKind::Drift,
        weight: Rational::one(),
        chi_order: 1,
        response_legs: 1,
        capacity: [d, 0],
    });
    let noise = model.beta.degree().map(|d| VertexTemplate {
        kind: TemplateKind::Noise,
        weight: rat(1, 2),
        chi_order: 2,
        response_legs: 2,
        capacity: [d, d],
    });
    let correction = match model.beta.degree() {
        Some(d) if d >= 1 && !model.theta0.is_zero() => Some(VertexTemplate {
            kind: TemplateKind::Correction,
            weight: model.theta0.clone(),
            chi_order: 2,
            response_legs: 1,
            capacity: [d, d - 1],
        }),
        _ => None,
    };
    InteractingVertexTemplates { drift, noise, correction }
}
