//! `simulate`: model-generated impact trajectories, one file per parameter
//! value, optionally averaged over a noise ensemble.

use anyhow::{bail, Result};
use clap::Args;
use serde::Serialize;

use impactlab::models::{
    simulate_ensemble, simulate_metaorder_path, AcParams, ImpactModel, PropagatorParams,
    SimulationConfig,
};

use crate::config::{ExperimentConfig, SimKind};
use crate::output::Artifacts;

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub kind: Option<SimKind>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub eta: Option<f64>,
    /// Propagator durations; repeat for a sweep.
    #[arg(long = "f", value_name = "F")]
    pub f_values: Vec<f64>,
    /// Risk aversions; repeat for a sweep.
    #[arg(long = "lambda", value_name = "LAMBDA")]
    pub lambda_values: Vec<f64>,
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub paths: Option<usize>,
}

#[derive(Serialize)]
struct PathRow {
    time: f64,
    impact: f64,
}

#[derive(Serialize)]
struct EnsembleRow {
    time: f64,
    mean: f64,
    std_error: f64,
}

pub fn apply_flags(cfg: &mut ExperimentConfig, args: &SimulateArgs) {
    let sim = &mut cfg.simulate;
    let model = &mut cfg.model;
    if let Some(kind) = args.kind {
        sim.kind = kind;
    }
    if let Some(v) = args.delta {
        model.delta = v;
    }
    if let Some(v) = args.gamma {
        model.gamma = v;
    }
    if let Some(v) = args.alpha {
        model.alpha = v;
    }
    if let Some(v) = args.eta {
        model.eta = v;
    }
    if !args.f_values.is_empty() {
        sim.f_values = args.f_values.clone();
    }
    if !args.lambda_values.is_empty() {
        sim.lambda_values = args.lambda_values.clone();
    }
    if let Some(v) = args.noise {
        sim.noise_scale = v;
    }
    if let Some(v) = args.paths {
        sim.n_paths = v;
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<Artifacts> {
    let sim = &cfg.simulate;
    if sim.steps_per_execution == 0 {
        bail!("simulate.steps_per_execution must be at least 1");
    }
    let sweep: Vec<(String, ImpactModel, f64)> = match sim.kind {
        SimKind::Propagator => sim
            .f_values
            .iter()
            .map(|&f| {
                let params = PropagatorParams::new(
                    cfg.model.delta,
                    cfg.model.gamma,
                    cfg.model.alpha,
                    cfg.model.eta,
                    f,
                )?;
                Ok((format!("trajectory_f{f}"), ImpactModel::Propagator(params), f))
            })
            .collect::<Result<_>>()?,
        SimKind::Ac => sim
            .lambda_values
            .iter()
            .map(|&lambda| {
                let ac = &cfg.model.ac;
                let params = AcParams {
                    a: ac.a,
                    sigma: ac.sigma,
                    lambda,
                    eta: ac.eta,
                    horizon_t: ac.horizon_t,
                };
                let name = format!("trajectory_lambda{lambda}");
                Ok((name, ImpactModel::AlmgrenChriss(params), ac.horizon_t))
            })
            .collect::<Result<_>>()?,
    };
    if sweep.is_empty() {
        bail!("simulate sweep is empty: no durations or risk aversions configured");
    }

    let mut artifacts = Artifacts::new(cfg);
    for (index, (name, model, span)) in sweep.iter().enumerate() {
        let step = span / sim.steps_per_execution as f64;
        // Distinct seed per sweep entry so ensembles do not share noise.
        let sim_cfg = SimulationConfig::new(
            sim.noise_scale,
            step,
            cfg.seed.wrapping_add(index as u64),
            sim.horizon_multiple,
        )?;
        if sim.n_paths <= 1 {
            let path = simulate_metaorder_path(model, &sim_cfg)?;
            let rows: Vec<PathRow> = path
                .times
                .iter()
                .zip(&path.impact)
                .map(|(&time, &impact)| PathRow { time, impact })
                .collect();
            artifacts.table(name, &rows)?;
        } else {
            let ensemble = simulate_ensemble(model, &sim_cfg, sim.n_paths)?;
            let rows: Vec<EnsembleRow> = ensemble
                .times
                .iter()
                .zip(ensemble.mean.iter().zip(&ensemble.std_error))
                .map(|(&time, (&mean, &std_error))| EnsembleRow { time, mean, std_error })
                .collect();
            artifacts.table(name, &rows)?;
        }
    }
    Ok(artifacts)
}
