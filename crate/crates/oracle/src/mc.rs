use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use sdemsr_model::ModelSpec;
use serde::{Deserialize, Serialize};

use crate::OracleError;

/// Paths per parallel work item. Fixed so that reductions happen in the same
/// order whatever the thread count.
pub const CHUNK_PATHS: u64 = 512;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Itô.
    EulerMaruyama,
    /// Stratonovich, predictor-corrector.
    Heun,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::EulerMaruyama => "euler_maruyama",
            Scheme::Heun => "heun",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MCConfig {
    pub scheme: Scheme,
    pub dt: f64,
    pub paths: u64,
    pub seed: u64,
    pub times: Vec<f64>,
    /// Each monomial lists time indices, repeated for powers: `[0, 0, 1]` is
    /// `x(t₀)² x(t₁)`.
    pub monomials: Vec<Vec<usize>>,
    /// Pair every path with its mirror image (negated increments).
    #[serde(default)]
    pub antithetic: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MCEstimate {
    pub monomial: Vec<usize>,
    pub estimate: f64,
    pub stderr: f64,
    pub paths: u64,
    pub scheme: Scheme,
}

impl MCEstimate {
    pub fn label(&self) -> String {
        self.monomial.iter().map(|i| format!("x[{i}]")).collect::<Vec<_>>().join("*")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MCResult {
    pub estimates: Vec<MCEstimate>,
    pub dt: f64,
    pub seed: u64,
}

impl MCConfig {
    fn validate(&self) -> Result<(), OracleError> {
        let bad = |m: &str| Err(OracleError::InvalidConfig(m.to_string()));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt must be positive");
        }
        if self.paths < 1000 {
            return bad("at least 1000 paths are required");
        }
        if self.antithetic && self.paths % 2 == 1 {
            return bad("antithetic sampling needs an even path count");
        }
        if self.times.iter().any(|t| !t.is_finite()) {
            return bad("observation times must be finite");
        }
        if self.monomials.iter().flatten().any(|&i| i >= self.times.len()) {
            return bad("monomial refers to a missing time index");
        }
        Ok(())
    }
}

/// Step grid from the start of supp χ to the last observation time; every
/// observation time is a grid node.
fn step_grid(start: f64, times: &[f64], dt: f64) -> Vec<f64> {
    let mut stops: Vec<f64> = times.iter().copied().filter(|&t| t > start).collect();
    stops.sort_by(f64::total_cmp);
    stops.dedup();
    let mut grid = vec![start];
    let mut t0 = start;
    for t1 in stops {
        let n = ((t1 - t0) / dt - 1e-9).ceil().max(1.0) as usize;
        for k in 1..n {
            grid.push(t0 + (t1 - t0) * k as f64 / n as f64);
        }
        grid.push(t1);
        t0 = t1;
    }
    grid
}

struct Path<'a> {
    model: &'a ModelSpec,
    scheme: Scheme,
    grid: &'a [f64],
    /// For each observation time, the grid index at which it is read
    /// (`None` before supp χ, where x = x₀).
    obs: &'a [Option<usize>],
}

impl Path<'_> {
    /// Integrates one path; `sign` flips every Brownian increment.
    fn run(&self, rng: &mut ChaCha8Rng, sign: f64, noise: &mut Vec<f64>, out: &mut [f64]) -> Option<f64> {
        let m = self.model;
        if sign > 0.0 {
            noise.clear();
            for w in self.grid.windows(2) {
                let z: f64 = StandardNormal.sample(rng);
                noise.push(z * (w[1] - w[0]).sqrt());
            }
        }
        let mut x = m.x0;
        let mut k_obs = vec![m.x0; self.obs.len()];
        let mut reads: Vec<(usize, usize)> =
            self.obs.iter().enumerate().filter_map(|(i, o)| o.map(|k| (k, i))).collect();
        reads.sort_unstable();
        let mut r = 0;
        while r < reads.len() && reads[r].0 == 0 {
            k_obs[reads[r].1] = x;
            r += 1;
        }
        for (k, w) in self.grid.windows(2).enumerate() {
            let (t0, t1) = (w[0], w[1]);
            let h = t1 - t0;
            let dw = sign * noise[k];
            let (a0, b0) = (m.drift(x, t0), m.diffusion(x, t0));
            x = match self.scheme {
                Scheme::EulerMaruyama => x + a0 * h + b0 * dw,
                Scheme::Heun => {
                    let p = x + a0 * h + b0 * dw;
                    x + 0.5 * (a0 + m.drift(p, t1)) * h + 0.5 * (b0 + m.diffusion(p, t1)) * dw
                }
            };
            if !x.is_finite() || x.abs() > 1e150 {
                return Some(t1);
            }
            while r < reads.len() && reads[r].0 == k + 1 {
                k_obs[reads[r].1] = x;
                r += 1;
            }
        }
        out.copy_from_slice(&k_obs);
        None
    }
}

/// Simulates `dx = εχ(t)[α dt + β√σ dW]` and estimates the requested
/// moments. Results depend only on the config, not on the thread count.
pub fn simulate(model: &ModelSpec, cfg: &MCConfig) -> Result<MCResult, OracleError> {
    model.validate()?;
    cfg.validate()?;
    let start = model.chi.support().0;
    let grid = step_grid(start, &cfg.times, cfg.dt);
    let obs: Vec<Option<usize>> = cfg
        .times
        .iter()
        .map(|&t| (t > start).then(|| grid.iter().position(|&g| g == t).expect("observation time on grid")))
        .collect();
    let path = Path { model, scheme: cfg.scheme, grid: &grid, obs: &obs };
    let n_mono = cfg.monomials.len();
    // one sample unit is a path, or an antithetic pair
    let per_unit = if cfg.antithetic { 2 } else { 1 };
    let units = cfg.paths / per_unit;
    // sums are taken around the noiseless value x₀^k for accuracy
    let shift: Vec<f64> = cfg.monomials.iter().map(|mono| mono.iter().map(|_| model.x0).product()).collect();
    let chunks = units.div_ceil(CHUNK_PATHS);

    let partial: Vec<Result<Vec<(f64, f64)>, OracleError>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![(0.0, 0.0); n_mono];
            let mut noise = Vec::with_capacity(grid.len());
            let mut xs = vec![0.0; cfg.times.len()];
            let mut vals = vec![0.0; n_mono];
            for u in c * CHUNK_PATHS..((c + 1) * CHUNK_PATHS).min(units) {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream(u);
                vals.iter_mut().for_each(|v| *v = 0.0);
                for s in 0..per_unit {
                    let sign = if s == 0 { 1.0 } else { -1.0 };
                    if let Some(time) = path.run(&mut rng, sign, &mut noise, &mut xs) {
                        return Err(OracleError::UnstablePath { path: u * per_unit + s, time, epsilon: model.epsilon });
                    }
                    for (v, mono) in vals.iter_mut().zip(&cfg.monomials) {
                        *v += mono.iter().map(|&i| xs[i]).product::<f64>() / per_unit as f64;
                    }
                }
                for ((a, v), k) in acc.iter_mut().zip(&vals).zip(&shift) {
                    let d = v - k;
                    a.0 += d;
                    a.1 += d * d;
                }
            }
            Ok(acc)
        })
        .collect();

    let mut total = vec![(0.0, 0.0); n_mono];
    for p in partial {
        for (t, a) in total.iter_mut().zip(p?) {
            t.0 += a.0;
            t.1 += a.1;
        }
    }
    let n = units as f64;
    let estimates = total
        .into_iter()
        .zip(&cfg.monomials)
        .zip(&shift)
        .map(|(((s, s2), mono), k)| {
            let mean = s / n;
            let var = ((s2 - n * mean * mean) / (n - 1.0)).max(0.0);
            MCEstimate { monomial: mono.clone(), estimate: k + mean, stderr: (var / n).sqrt(), paths: units * per_unit, scheme: cfg.scheme }
        })
        .collect();
    Ok(MCResult { estimates, dt: cfg.dt, seed: cfg.seed })
}

/// Writes `monomial,scheme,estimate,stderr,paths`.
pub fn write_mc_csv<W: std::io::Write>(result: &MCResult, out: W) -> Result<(), OracleError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["monomial", "scheme", "estimate", "stderr", "paths"])?;
    for e in &result.estimates {
        w.write_record([
            e.label(),
            e.scheme.name().to_string(),
            format!("{:.12e}", e.estimate),
            format!("{:.6e}", e.stderr),
            e.paths.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
