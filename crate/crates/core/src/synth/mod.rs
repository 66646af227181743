//! Synthetic metaorder populations and market days with known ground truth.
//!
//! Order sizes follow the heavy-tailed participation and duration statistics
//! seen in real execution data: `eta` and `F` are independent truncated
//! power laws, start times are uniform within the day, and signs herd on a
//! per-day mood so that the same-sign overlap fraction is controllable.
//! [`generate_market`] turns a population into minute bars whose log price
//! superposes every active order's propagator trajectory plus Brownian
//! noise, then emits the bars and orders in the exact shapes the ingestion
//! code accepts, closing the generate -> estimate loop. Orders the tape
//! cannot absorb (stacked participation past 1 in some minute) are shed
//! first come, first served rather than failing the day.

mod market;
mod population;
mod sampler;

pub use market::{
    generate_market, synthesize_day, MarketConfig, SyntheticMarketDay, VolumeProfile,
    MINUTES_PER_DAY,
};
pub use population::{
    generate_population, sample_completion_impacts, CompletionSample, PlannedOrder, Population,
    PopulationConfig, TruncPowerLaw,
};
pub use sampler::sample_trunc_power;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error("{name} = {value} outside its domain ({requirement})")]
    Parameter {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },
    #[error("impact model rejected synthetic parameters: {0}")]
    Model(#[from] crate::models::ModelError),
}
