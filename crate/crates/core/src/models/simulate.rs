//! Discretized impact paths with Brownian noise.
//!
//! The deterministic trajectory of either model is evaluated on a uniform
//! grid and a Wiener term with independent `N(0, step * noise_scale^2)`
//! increments is added, mirroring how the rescaled log price decomposes into
//! expected impact plus diffusion. The grid is chosen so that the execution
//! boundary falls exactly on a grid point; for the propagator the kernel is
//! integrated exactly over each step, which keeps the VWAP discretization
//! error at pure rounding level and avoids evaluating the singular kernel at
//! the current time.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ac_trajectory, require_finite, AcParams, ModelError, PropagatorParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    /// Scale of the Wiener term; 1.0 reproduces rescaled-price units.
    pub noise_scale: f64,
    /// Requested grid step in the model's time variable. The actual step is
    /// shrunk so the execution horizon is an exact multiple of it.
    pub step: f64,
    pub seed: u64,
    /// Follow the path to `z = horizon_multiple` (completion is `z = 1`).
    pub horizon_multiple: f64,
}

impl SimulationConfig {
    pub fn new(noise_scale: f64, step: f64, seed: u64, horizon_multiple: f64) -> Result<Self, ModelError> {
        let cfg = SimulationConfig { noise_scale, step, seed, horizon_multiple };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        require_finite("noise_scale", self.noise_scale)?;
        require_finite("step", self.step)?;
        require_finite("horizon_multiple", self.horizon_multiple)?;
        if self.noise_scale < 0.0 {
            return Err(ModelError::Parameter {
                name: "noise_scale",
                value: self.noise_scale,
                requirement: ">= 0",
            });
        }
        if self.step <= 0.0 {
            return Err(ModelError::Parameter { name: "step", value: self.step, requirement: "> 0" });
        }
        if self.horizon_multiple < 1.0 {
            return Err(ModelError::Parameter {
                name: "horizon_multiple",
                value: self.horizon_multiple,
                requirement: ">= 1",
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ImpactModel {
    AlmgrenChriss(AcParams),
    Propagator(PropagatorParams),
}

impl ImpactModel {
    fn execution_span(&self) -> f64 {
        match self {
            ImpactModel::AlmgrenChriss(p) => p.horizon_t,
            ImpactModel::Propagator(p) => p.duration_f,
        }
    }

    fn validate(&self) -> Result<(), ModelError> {
        match self {
            ImpactModel::AlmgrenChriss(p) => p.validate(),
            ImpactModel::Propagator(p) => p.validate(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedPath {
    /// Grid in the model's time variable (volume time or clock time).
    pub times: Vec<f64>,
    pub impact: Vec<f64>,
    /// Set when the execution window spans fewer than 10 grid steps.
    pub coarse_grid: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathEnsemble {
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    pub std_error: Vec<f64>,
    pub n_paths: usize,
    pub coarse_grid: bool,
}

const MIN_EXECUTION_STEPS: usize = 10;
// Paths per parallel work item; chunk results are reduced in index order so
// the ensemble statistics do not depend on the thread count.
const CHUNK: usize = 256;

struct Grid {
    times: Vec<f64>,
    deterministic: Vec<f64>,
    exec_steps: usize,
    step: f64,
}

fn build_grid(model: &ImpactModel, cfg: &SimulationConfig) -> Result<Grid, ModelError> {
    model.validate()?;
    cfg.validate()?;
    let span = model.execution_span();
    let exec_steps = ((span / cfg.step).ceil() as usize).max(1);
    let total_steps = (cfg.horizon_multiple * exec_steps as f64).ceil() as usize;
    let times: Vec<f64> = (0..=total_steps)
        .map(|k| span * k as f64 / exec_steps as f64)
        .collect();

    let deterministic = match model {
        ImpactModel::AlmgrenChriss(p) => times
            .iter()
            .map(|&t| ac_trajectory(p, t.min(p.horizon_t)))
            .collect::<Result<Vec<_>, _>>()?,
        ImpactModel::Propagator(p) => {
            // Left-endpoint rate on each execution step, kernel step integrals
            // exact: with h = F / exec_steps both reduce to tabulated powers
            // of the step count difference.
            let ad = p.alpha * p.delta;
            let e = 1.0 - p.gamma;
            let base = (p.eta * (1.0 + p.alpha)).powf(p.delta);
            let rate_factor: Vec<f64> = (0..exec_steps)
                .map(|j| base * (1.0 - j as f64 / exec_steps as f64).powf(ad))
                .collect();
            let pw: Vec<f64> = (0..=total_steps).map(|m| (m as f64).powf(e)).collect();
            let scale = (span / exec_steps as f64).powf(e) / e;
            (0..=total_steps)
                .map(|k| {
                    let executed = k.min(exec_steps);
                    let sum: f64 = (0..executed)
                        .map(|j| rate_factor[j] * (pw[k - j] - pw[k - j - 1]))
                        .sum();
                    scale * sum
                })
                .collect()
        }
    };

    if exec_steps < MIN_EXECUTION_STEPS {
        log::warn!(
            "execution window spans only {exec_steps} grid steps; trajectory will be coarse"
        );
    }
    Ok(Grid { times, deterministic, exec_steps, step: span / exec_steps as f64 })
}

fn wiener(rng: &mut ChaCha12Rng, len: usize, sqrt_step: f64) -> Vec<f64> {
    let mut w = Vec::with_capacity(len);
    let mut acc = 0.0;
    w.push(0.0);
    for _ in 1..len {
        let xi: f64 = StandardNormal.sample(rng);
        acc += sqrt_step * xi;
        w.push(acc);
    }
    w
}

/// One noisy impact path. The same seed always yields the same path.
pub fn simulate_metaorder_path(
    model: &ImpactModel,
    cfg: &SimulationConfig,
) -> Result<SimulatedPath, ModelError> {
    let grid = build_grid(model, cfg)?;
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    let w = wiener(&mut rng, grid.times.len(), grid.step.sqrt());
    let impact = grid
        .deterministic
        .iter()
        .zip(&w)
        .map(|(d, w)| d + cfg.noise_scale * w)
        .collect();
    Ok(SimulatedPath {
        times: grid.times,
        impact,
        coarse_grid: grid.exec_steps < MIN_EXECUTION_STEPS,
    })
}

/// Pointwise mean and standard error over `n_paths` independent paths.
///
/// Path `i` uses RNG stream `i` of the configured seed, so path 0 is the
/// path [`simulate_metaorder_path`] returns and results are reproducible
/// independently of the number of worker threads.
pub fn simulate_ensemble(
    model: &ImpactModel,
    cfg: &SimulationConfig,
    n_paths: usize,
) -> Result<PathEnsemble, ModelError> {
    if n_paths == 0 {
        return Err(ModelError::Parameter {
            name: "n_paths",
            value: 0.0,
            requirement: ">= 1",
        });
    }
    let grid = build_grid(model, cfg)?;
    let len = grid.times.len();
    let sqrt_step = grid.step.sqrt();

    let n_chunks = n_paths.div_ceil(CHUNK);
    let partials: Vec<(Vec<f64>, Vec<f64>)> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut sum = vec![0.0; len];
            let mut sumsq = vec![0.0; len];
            for i in (c * CHUNK)..((c + 1) * CHUNK).min(n_paths) {
                let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
                rng.set_stream(i as u64);
                let w = wiener(&mut rng, len, sqrt_step);
                for k in 1..len {
                    sum[k] += w[k];
                    sumsq[k] += w[k] * w[k];
                }
            }
            (sum, sumsq)
        })
        .collect();

    let mut sum = vec![0.0; len];
    let mut sumsq = vec![0.0; len];
    for (s, s2) in partials {
        for k in 0..len {
            sum[k] += s[k];
            sumsq[k] += s2[k];
        }
    }

    let n = n_paths as f64;
    let mut mean = Vec::with_capacity(len);
    let mut std_error = Vec::with_capacity(len);
    for k in 0..len {
        let m = sum[k] / n;
        mean.push(grid.deterministic[k] + cfg.noise_scale * m);
        let var = if n_paths > 1 {
            ((sumsq[k] - n * m * m) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        std_error.push(cfg.noise_scale * (var / n).sqrt());
    }

    Ok(PathEnsemble {
        times: grid.times,
        mean,
        std_error,
        n_paths,
        coarse_grid: grid.exec_steps < MIN_EXECUTION_STEPS,
    })
}
