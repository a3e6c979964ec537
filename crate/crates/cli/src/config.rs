use std::path::Path;

use sdemsr_model::{parse_rational, CoefficientFn, ExpansionBounds, CutoffFunction, ModelSpec, MonotoneCubic, Polynomial1D};
use sdemsr_oracle::{MCConfig, Scheme};
use sdemsr_evaluator::QuadConfig;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelBlock,
    pub chi: ChiBlock,
    pub observables: ObservablesBlock,
    #[serde(default)]
    pub expansion: ExpansionBlock,
    #[serde(default)]
    pub quadrature: QuadratureBlock,
    #[serde(default)]
    pub mc: McBlock,
    #[serde(default)]
    pub output: OutputBlock,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelBlock {
    /// Coefficients of α in powers of x.
    #[serde(default)]
    pub alpha: Vec<CoeffSpec>,
    #[serde(default)]
    pub beta: Vec<CoeffSpec>,
    pub sigma: f64,
    pub x0: f64,
    /// Exact rational: `"1/2"`, `0.5` or `"0"`.
    #[serde(default = "zero_theta")]
    pub theta0: NumberOrText,
    #[serde(default = "one")]
    pub epsilon: f64,
    #[serde(default = "one_u32")]
    pub vertex_sigma_power: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NumberOrText {
    Number(f64),
    Text(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoeffSpec {
    Number(f64),
    Function(FnSpec),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FnSpec {
    Constant {
        value: f64,
    },
    PolyT {
        coefficients: Vec<f64>,
    },
    Sinusoid {
        amplitude: f64,
        frequency: f64,
        #[serde(default)]
        phase: f64,
        #[serde(default)]
        offset: f64,
    },
    Tabulated {
        t: Vec<f64>,
        values: Vec<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChiBlock {
    Plateau {
        a: f64,
        a1: f64,
        b1: f64,
        b: f64,
        #[serde(default = "one")]
        sharpness: f64,
    },
    Bump {
        a: f64,
        b: f64,
        #[serde(default = "one")]
        sharpness: f64,
    },
    Tabulated {
        t: Vec<f64>,
        values: Vec<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservablesBlock {
    pub times: Vec<f64>,
    /// Each monomial lists time indices, repeated for powers.
    pub monomials: Vec<Vec<usize>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Pipeline {
    #[default]
    Both,
    Sde,
    Msr,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum RouteSpec {
    #[default]
    Direct,
    Lemma42,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CheckSpec {
    /// Additive if β is x-independent, multiplicative if α = 0, else general.
    #[default]
    Auto,
    Additive,
    Multiplicative,
    General,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExpansionBlock {
    pub order: u32,
    pub additive_bound: u32,
    pub multiplicative_bound: u32,
    pub pipeline: Pipeline,
    pub route: RouteSpec,
    pub check: CheckSpec,
    /// Also compare the two sides numerically in `check`.
    pub numeric_check: bool,
}

impl Default for ExpansionBlock {
    fn default() -> Self {
        ExpansionBlock {
            order: 2,
            additive_bound: 6,
            multiplicative_bound: 4,
            pipeline: Pipeline::Both,
            route: RouteSpec::Direct,
            check: CheckSpec::Auto,
            numeric_check: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureBlock {
    pub grid_points: usize,
    pub tolerance: f64,
    pub abs_tolerance: f64,
    pub max_refinements: u32,
    /// Points per axis of the `t,t_prime,value` kernel tables written by
    /// `evaluate`; 0 disables them.
    pub kernel_points: usize,
}

impl Default for QuadratureBlock {
    fn default() -> Self {
        let q = QuadConfig::default();
        QuadratureBlock {
            grid_points: q.grid_points,
            tolerance: q.tolerance,
            abs_tolerance: q.abs_tolerance,
            max_refinements: q.max_refinements,
            kernel_points: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McBlock {
    pub scheme: Scheme,
    pub dt: f64,
    pub paths: u64,
    pub seed: u64,
    pub antithetic: bool,
}

impl Default for McBlock {
    fn default() -> Self {
        McBlock { scheme: Scheme::Heun, dt: 1e-3, paths: 20_000, seed: 1, antithetic: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputBlock {
    pub directory: String,
    /// Diagram listing formats for `expand`: `text` and/or `dot`.
    pub formats: Vec<String>,
}

impl Default for OutputBlock {
    fn default() -> Self {
        OutputBlock { directory: "sdemsr-out".into(), formats: vec!["text".into()] }
    }
}

fn zero_theta() -> NumberOrText {
    NumberOrText::Text("0".into())
}

fn one() -> f64 {
    1.0
}

fn one_u32() -> u32 {
    1
}

fn config_err(field: &str, message: impl Into<String>) -> CliError {
    CliError::Config { field: field.into(), message: message.into() }
}

/// Reads a config file and applies `section.key=value` overrides.
pub fn load_config(path: &Path, overrides: &[String]) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| config_err(&path.display().to_string(), format!("cannot read: {e}")))?;
    parse_config(&text, overrides)
}

pub fn parse_config(text: &str, overrides: &[String]) -> Result<RunConfig, CliError> {
    let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| config_err("<file>", e.to_string()))?;
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    let cfg: RunConfig =
        toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| config_err("<file>", e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

/// `section.key=value`; the value is read as TOML and falls back to a
/// plain string.
fn apply_override(table: &mut toml::Table, spec: &str) -> Result<(), CliError> {
    let (path, raw) = spec.split_once('=').ok_or_else(|| config_err(spec, "expected section.key=value"))?;
    let keys: Vec<&str> = path.trim().split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(config_err(path, "empty key in override"));
    }
    let value = match format!("v = {}", raw.trim()).parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(raw.trim().to_string()),
    };
    let (last, parents) = keys.split_last().expect("non-empty");
    let mut cur = table;
    for k in parents {
        cur = cur
            .entry(k.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| config_err(path, format!("{k} is not a section")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

fn coefficient(spec: &CoeffSpec, field: &str) -> Result<CoefficientFn, CliError> {
    Ok(match spec {
        CoeffSpec::Number(v) => CoefficientFn::Constant(*v),
        CoeffSpec::Function(FnSpec::Constant { value }) => CoefficientFn::Constant(*value),
        CoeffSpec::Function(FnSpec::PolyT { coefficients }) => CoefficientFn::PolyT(coefficients.clone()),
        CoeffSpec::Function(FnSpec::Sinusoid { amplitude, frequency, phase, offset }) => {
            CoefficientFn::Sinusoid { amplitude: *amplitude, frequency: *frequency, phase: *phase, offset: *offset }
        }
        CoeffSpec::Function(FnSpec::Tabulated { t, values }) => {
            CoefficientFn::Tabulated(MonotoneCubic::new(t.clone(), values.clone()).map_err(|e| config_err(field, e))?)
        }
    })
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        let spec = self.model_spec()?;
        let times = &self.observables.times;
        for (i, a) in times.iter().enumerate() {
            if !a.is_finite() {
                return Err(config_err("observables.times", format!("time {i} is not finite")));
            }
            if let Some(j) = times[i + 1..].iter().position(|b| b == a) {
                return Err(config_err(
                    "observables.times",
                    format!("times {i} and {} coincide; observation times must be distinct", i + 1 + j),
                ));
            }
        }
        if self.observables.monomials.is_empty() {
            return Err(config_err("observables.monomials", "at least one monomial is needed"));
        }
        for m in &self.observables.monomials {
            if let Some(&bad) = m.iter().find(|&&i| i >= times.len()) {
                return Err(config_err("observables.monomials", format!("time index {bad} out of range")));
            }
        }
        let e = &self.expansion;
        let bound = ExpansionBounds { additive: e.additive_bound, multiplicative: e.multiplicative_bound }.for_model(&spec);
        if e.order > bound {
            return Err(config_err("expansion.order", format!("order {} exceeds the bound {bound}", e.order)));
        }
        let q = &self.quadrature;
        if q.grid_points < 2 || !(q.tolerance > 0.0) {
            return Err(config_err("quadrature", "grid_points must be at least 2 and tolerance positive"));
        }
        if !(self.mc.dt > 0.0) || self.mc.paths < 1000 {
            return Err(config_err("mc", "dt must be positive and paths at least 1000"));
        }
        for f in &self.output.formats {
            if f != "text" && f != "dot" {
                return Err(config_err("output.formats", format!("unknown format {f}")));
            }
        }
        Ok(())
    }

    pub fn model_spec(&self) -> Result<ModelSpec, CliError> {
        let m = &self.model;
        let poly = |c: &[CoeffSpec], field: &str| -> Result<Polynomial1D, CliError> {
            Ok(Polynomial1D::new(c.iter().map(|s| coefficient(s, field)).collect::<Result<_, _>>()?))
        };
        let chi = match &self.chi {
            ChiBlock::Plateau { a, a1, b1, b, sharpness } => {
                CutoffFunction::Plateau { a: *a, a1: *a1, b1: *b1, b: *b, sharpness: *sharpness }
            }
            ChiBlock::Bump { a, b, sharpness } => CutoffFunction::Bump { a: *a, b: *b, sharpness: *sharpness },
            ChiBlock::Tabulated { t, values } => CutoffFunction::Tabulated(
                MonotoneCubic::new(t.clone(), values.clone()).map_err(|e| config_err("chi", e))?,
            ),
        };
        let theta_text = match &m.theta0 {
            NumberOrText::Number(v) => v.to_string(),
            NumberOrText::Text(s) => s.clone(),
        };
        let theta0 = parse_rational(&theta_text).map_err(|e| config_err("model.theta0", e.to_string()))?;
        let mut spec = ModelSpec::new(poly(&m.alpha, "model.alpha")?, poly(&m.beta, "model.beta")?, m.sigma, m.x0, chi)
            .with_theta0(theta0)
            .with_epsilon(m.epsilon);
        spec.vertex_sigma_power = m.vertex_sigma_power;
        spec.validate().map_err(|e| config_err("model", e.to_string()))?;
        if !spec.alpha.is_finite() || !spec.beta.is_finite() || !m.x0.is_finite() {
            return Err(config_err("model", "coefficients and x0 must be finite"));
        }
        Ok(spec)
    }

    pub fn quad(&self) -> QuadConfig {
        let q = &self.quadrature;
        QuadConfig {
            grid_points: q.grid_points,
            tolerance: q.tolerance,
            abs_tolerance: q.abs_tolerance,
            max_refinements: q.max_refinements,
        }
    }

    pub fn mc_config(&self) -> MCConfig {
        MCConfig {
            scheme: self.mc.scheme,
            dt: self.mc.dt,
            paths: self.mc.paths,
            seed: self.mc.seed,
            times: self.observables.times.clone(),
            monomials: self.observables.monomials.clone(),
            antithetic: self.mc.antithetic,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }
}
