use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sdemsr_correspondence::{check_additive, check_general, check_multiplicative, CheckReport};
use sdemsr_diagram::{diagram_to_dot, sum_to_text, DiagramSeries};
use sdemsr_evaluator::{evaluate_series, NumericSeries};
use sdemsr_model::{ExpansionBounds, ModelSpec};
use sdemsr_msr::{msr_expectation_bounded, q_kernel, Monomial};
use sdemsr_oracle::{exact_benchmark, simulate, write_mc_csv, Benchmark};
use sdemsr_sde::{sde_expectation_route, Route};

use crate::config::{CheckSpec, Pipeline, RouteSpec, RunConfig};
use crate::{engine, CliError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Expand,
    Evaluate,
    Check,
    Simulate,
    Report,
}

/// What a run produced.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Outcome {
    pub artifacts: Vec<PathBuf>,
    pub summary: String,
    /// Correspondence checks that ran and did not pass.
    pub failed_checks: usize,
}

const VERSION: &str = env!("CARGO_PKG_VERSION");

fn header(cfg: &RunConfig, command: &str) -> String {
    let mut h = format!("# sdemsr {VERSION}\n# command: {command}\n# config:\n");
    for line in cfg.to_toml().lines() {
        h.push_str("# ");
        h.push_str(line);
        h.push('\n');
    }
    h
}

/// Recovers the config embedded in an artifact's `#` header.
pub fn embedded_config(artifact: &str) -> Option<String> {
    let mut lines = artifact.lines().skip_while(|l| *l != "# config:");
    lines.next()?;
    let body: Vec<&str> = lines.map_while(|l| l.strip_prefix("# ").or(if l == "#" { Some("") } else { None })).collect();
    Some(body.join("\n") + "\n")
}

fn write(out: &mut Outcome, dir: &Path, name: &str, content: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    std::fs::write(&path, content).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
    out.artifacts.push(path);
    Ok(())
}

fn label(mono: &[usize]) -> String {
    if mono.is_empty() {
        return "one".into();
    }
    mono.iter().map(|i| format!("x{i}")).collect::<Vec<_>>().join("-")
}

fn monomial(mono: &[usize]) -> Monomial {
    Monomial::x(mono)
}

fn bounds(cfg: &RunConfig) -> ExpansionBounds {
    ExpansionBounds { additive: cfg.expansion.additive_bound, multiplicative: cfg.expansion.multiplicative_bound }
}

fn msr_series(cfg: &RunConfig, model: &ModelSpec, mono: &[usize]) -> Result<DiagramSeries, CliError> {
    msr_expectation_bounded(&monomial(mono), &cfg.observables.times, model, cfg.expansion.order, &bounds(cfg))
        .map_err(engine)
}

fn sde_series(cfg: &RunConfig, model: &ModelSpec, mono: &[usize]) -> Result<DiagramSeries, CliError> {
    let f = monomial(mono);
    let route = match cfg.expansion.route {
        RouteSpec::Direct => Route::Direct,
        RouteSpec::Lemma42 => Route::Lemma42,
    };
    sde_expectation_route(&f.x_legs, &f.scalar, &cfg.observables.times, model, cfg.expansion.order, route)
        .map_err(engine)
}

/// Runs one subcommand, writing artifacts into `output.directory`.
pub fn run(command: Command, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let dir = PathBuf::from(&cfg.output.directory);
    std::fs::create_dir_all(&dir).map_err(|source| CliError::Io { path: dir.display().to_string(), source })?;
    let model = cfg.model_spec()?;
    match command {
        Command::Expand => expand(cfg, &model, &dir),
        Command::Evaluate => evaluate(cfg, &model, &dir),
        Command::Check => check(cfg, &model, &dir),
        Command::Simulate => simulate_cmd(cfg, &model, &dir),
        Command::Report => report(cfg, &model, &dir),
    }
}

fn expand(cfg: &RunConfig, model: &ModelSpec, dir: &Path) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    let pipelines: &[(&str, Pipeline)] = match cfg.expansion.pipeline {
        Pipeline::Both => &[("sde", Pipeline::Sde), ("msr", Pipeline::Msr)],
        Pipeline::Sde => &[("sde", Pipeline::Sde)],
        Pipeline::Msr => &[("msr", Pipeline::Msr)],
    };
    for mono in &cfg.observables.monomials {
        for &(name, p) in pipelines {
            let s = if p == Pipeline::Sde { sde_series(cfg, model, mono)? } else { msr_series(cfg, model, mono)? };
            let counts: Vec<String> = s.entries.iter().map(|e| e.len().to_string()).collect();
            writeln!(out.summary, "{name} {}: classes per order [{}]", label(mono), counts.join(", ")).unwrap();
            if cfg.output.formats.iter().any(|f| f == "text") {
                let mut text = header(cfg, "expand");
                for (m, sum) in s.entries.iter().enumerate() {
                    writeln!(text, "# order {m}: {} classes", sum.len()).unwrap();
                    text.push_str(&sum_to_text(sum));
                }
                write(&mut out, dir, &format!("expand_{name}_{}.txt", label(mono)), &text)?;
            }
            if cfg.output.formats.iter().any(|f| f == "dot") {
                let mut dot = String::new();
                for (m, sum) in s.entries.iter().enumerate() {
                    for (k, d) in sum.diagrams().enumerate() {
                        dot.push_str(&diagram_to_dot(d, &format!("order{m}_{k}")));
                    }
                }
                write(&mut out, dir, &format!("expand_{name}_{}.dot", label(mono)), &dot)?;
            }
        }
    }
    Ok(out)
}

fn numeric(cfg: &RunConfig, model: &ModelSpec, mono: &[usize]) -> Result<NumericSeries, CliError> {
    let s = match cfg.expansion.pipeline {
        Pipeline::Sde => sde_series(cfg, model, mono)?,
        _ => msr_series(cfg, model, mono)?,
    };
    evaluate_series(&s, model, &cfg.observables.times, &cfg.quad()).map_err(engine)
}

fn evaluate(cfg: &RunConfig, model: &ModelSpec, dir: &Path) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    for mono in &cfg.observables.monomials {
        let n = numeric(cfg, model, mono)?;
        let mut text = header(cfg, "evaluate");
        text.push_str("order,value,error\n");
        for m in 0..=n.order() {
            let e = n.entry_at(m, model.epsilon);
            writeln!(text, "{m},{:.15e},{:.3e}", e.value, e.error).unwrap();
        }
        let total = n.partial_sum_at(n.order(), model.epsilon);
        writeln!(out.summary, "E[{}] ≈ {:.12e} ± {:.2e}", label(mono), total.value, total.error).unwrap();
        write(&mut out, dir, &format!("evaluate_{}.csv", label(mono)), &text)?;
    }
    let k = cfg.quadrature.kernel_points;
    if k >= 2 && !model.beta.is_zero() {
        let (a, b) = model.chi.support();
        let grid: Vec<f64> = (0..k).map(|i| a + (b - a) * i as f64 / (k - 1) as f64).collect();
        let q = q_kernel(model, &grid, cfg.quadrature.tolerance).map_err(engine)?;
        let mut text = header(cfg, "evaluate");
        text.push_str("t,t_prime,value\n");
        let scale = model.sigma * model.epsilon * model.epsilon;
        for (t, tp, v) in q.rows() {
            writeln!(text, "{t:.9},{tp:.9},{:.15e}", scale * v).unwrap();
        }
        write(&mut out, dir, "kernel_sigma_q.csv", &text)?;
    }
    Ok(out)
}

fn check(cfg: &RunConfig, model: &ModelSpec, dir: &Path) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    let quad = cfg.quad();
    let quad = cfg.expansion.numeric_check.then_some(&quad);
    let times = &cfg.observables.times;
    let order = cfg.expansion.order;
    let kind = match cfg.expansion.check {
        CheckSpec::Auto if model.beta.degree().is_none_or(|d| d == 0) => CheckSpec::Additive,
        CheckSpec::Auto if model.alpha.is_zero() => CheckSpec::Multiplicative,
        CheckSpec::Auto => CheckSpec::General,
        k => k,
    };
    let mut reports: Vec<CheckReport> = Vec::new();
    for mono in &cfg.observables.monomials {
        let f = monomial(mono);
        let r = match kind {
            CheckSpec::Additive => check_additive(&f, times, model, order, quad),
            CheckSpec::Multiplicative => check_multiplicative(&f, times, model, order, quad),
            _ => check_general(&f, times, model, order, quad),
        }
        .map_err(engine)?;
        out.summary.push_str(&r.summary());
        reports.push(r);
    }
    let doc = serde_json::json!({
        "tool": "sdemsr",
        "version": VERSION,
        "config": cfg.to_toml(),
        "reports": reports,
    });
    write(&mut out, dir, "check.json", &serde_json::to_string_pretty(&doc).expect("json"))?;
    out.failed_checks = reports.iter().filter(|r| !r.passed).count();
    Ok(out)
}

fn simulate_cmd(cfg: &RunConfig, model: &ModelSpec, dir: &Path) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    let r = simulate(model, &cfg.mc_config()).map_err(engine)?;
    let mut buf = Vec::new();
    write_mc_csv(&r, &mut buf).map_err(engine)?;
    let mut text = header(cfg, "simulate");
    writeln!(text, "# seed: {}\n# dt: {}", r.seed, r.dt).unwrap();
    text.push_str(&String::from_utf8(buf).expect("utf8"));
    for e in &r.estimates {
        writeln!(out.summary, "{} [{}]: {:.9e} ± {:.2e}", e.label(), e.scheme.name(), e.estimate, e.stderr).unwrap();
    }
    write(&mut out, dir, "simulate.csv", &text)?;
    Ok(out)
}

fn read_csv(path: &Path) -> Option<Vec<BTreeMap<String, String>>> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path).ok()?;
    let headers = rdr.headers().ok()?.clone();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.ok()?;
        rows.push(headers.iter().zip(rec.iter()).map(|(h, v)| (h.to_string(), v.to_string())).collect());
    }
    Some(rows)
}

/// Closed-form value of a monomial, when one of the benchmarks covers it.
fn exact_value(model: &ModelSpec, times: &[f64], mono: &[usize]) -> Option<f64> {
    let lookup = |b: Benchmark, label: &str| -> Option<f64> {
        exact_benchmark(b, model, times).ok()?.into_iter().find(|v| v.label == label).map(|v| v.value)
    };
    match mono {
        [] => Some(1.0),
        [i] => lookup(Benchmark::GbmMoments, &format!("E[x[{i}]]"))
            .or_else(|| lookup(Benchmark::LinearMean, &format!("E[x[{i}]]"))),
        [i, j] if i == j => lookup(Benchmark::GbmMoments, &format!("E[x[{i}]^2]")).or_else(|| {
            lookup(Benchmark::BrownianCov, &format!("Cov[x[{i}],x[{i}]]")).map(|c| c + model.x0 * model.x0)
        }),
        [i, j] => {
            let (a, b) = (i.min(j), i.max(j));
            lookup(Benchmark::BrownianCov, &format!("Cov[x[{a}],x[{b}]]")).map(|c| c + model.x0 * model.x0)
        }
        _ => None,
    }
}

fn report(cfg: &RunConfig, model: &ModelSpec, dir: &Path) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    let mc_rows = read_csv(&dir.join("simulate.csv")).unwrap_or_default();
    let mut text = header(cfg, "report");
    text.push_str("monomial,series,series_error,mc,mc_stderr,exact,z_series_mc,series_minus_exact\n");
    let fmt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:.12e}"));
    for mono in &cfg.observables.monomials {
        let series = read_csv(&dir.join(format!("evaluate_{}.csv", label(mono)))).map(|rows| {
            rows.iter().fold((0.0, 0.0), |acc, r| {
                let v: f64 = r.get("value").and_then(|s| s.parse().ok()).unwrap_or(f64::NAN);
                let e: f64 = r.get("error").and_then(|s| s.parse().ok()).unwrap_or(f64::NAN);
                (acc.0 + v, acc.1 + e)
            })
        });
        let mc_label = mono.iter().map(|i| format!("x[{i}]")).collect::<Vec<_>>().join("*");
        let mc = mc_rows.iter().find(|r| r.get("monomial") == Some(&mc_label)).and_then(|r| {
            Some((r.get("estimate")?.parse::<f64>().ok()?, r.get("stderr")?.parse::<f64>().ok()?))
        });
        let exact = exact_value(model, &cfg.observables.times, mono);
        let z = match (series, mc) {
            (Some(s), Some(m)) if m.1 > 0.0 => Some((m.0 - s.0) / m.1),
            _ => None,
        };
        let gap = series.zip(exact).map(|(s, e)| s.0 - e);
        writeln!(
            text,
            "{},{},{},{},{},{},{},{}",
            label(mono),
            fmt(series.map(|s| s.0)),
            fmt(series.map(|s| s.1)),
            fmt(mc.map(|m| m.0)),
            fmt(mc.map(|m| m.1)),
            fmt(exact),
            z.map_or(String::new(), |z| format!("{z:.3}")),
            fmt(gap),
        )
        .unwrap();
        writeln!(
            out.summary,
            "{}: series {} mc {} exact {}{}",
            label(mono),
            fmt(series.map(|s| s.0)),
            fmt(mc.map(|m| m.0)),
            fmt(exact),
            z.map_or(String::new(), |z| format!(" (z = {z:.2}, tolerance 3)"))
        )
        .unwrap();
    }
    write(&mut out, dir, "report.csv", &text)?;
    Ok(out)
}
