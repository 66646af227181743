//! Heuristic price-impact models with closed-form trajectories.
//!
//! Two model families are implemented. [`ac`] covers the optimal-execution
//! model with linear instantaneous impact, whose risk-averse inventory
//! schedule is a ratio of hyperbolic sines. [`propagator`] covers the
//! continuous propagator model in volume time, where a power-law kernel
//! `(v - s)^{-gamma}` propagates a concave function `q^delta` of the trading
//! rate; VWAP and front-/back-loaded power-law profiles have closed-form
//! impact trajectories in terms of the Gauss hypergeometric function.
//!
//! [`simulate`] discretizes either model on a uniform grid and adds a
//! Brownian term so that estimation code can be exercised on paths whose
//! ground truth is known.

mod ac;
mod propagator;
mod simulate;

pub use ac::{ac_optimal_inventory, ac_trajectory, AcParams};
pub use propagator::{
    alpha_rate, alpha_temporary, alpha_trajectory, vwap_temporary, vwap_trajectory,
    PropagatorParams,
};
pub use simulate::{
    simulate_ensemble, simulate_metaorder_path, ImpactModel, PathEnsemble, SimulatedPath,
    SimulationConfig,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{name} = {value} outside its domain ({requirement})")]
    Parameter {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },
    #[error("impact integral diverges: 1 + alpha*delta - gamma = {0:e} <= 0")]
    DivergentImpact(f64),
    #[error("time {t} outside the execution window [0, {horizon}]")]
    TimeOutOfWindow { t: f64, horizon: f64 },
    #[error("rescaled time z = {0} must be > 0")]
    NonPositiveTime(f64),
    #[error("hypergeometric evaluation failed: {0}")]
    Hypergeometric(#[from] crate::specfn::Hyp2F1Error),
}

fn require_finite(name: &'static str, value: f64) -> Result<(), ModelError> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(ModelError::Parameter {
            name,
            value,
            requirement: "finite",
        })
    }
}
