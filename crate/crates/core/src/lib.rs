//! Laboratory for studying the price impact of metaorders.
//!
//! The crate covers the full loop from raw market data to fitted impact laws:
//!
//! - [`market`]: minute bars, metaorders, the volume clock, execution
//!   descriptors, data filters, and impact extraction from price series.
//! - [`specfn`]: the Gauss hypergeometric function and adaptive quadrature
//!   with integrable endpoint singularities, as needed by the closed-form
//!   impact trajectories.
//! - [`models`]: optimal-execution impact (inventory trajectories) and the
//!   propagator model in volume time, with closed forms and a path simulator.
//! - [`book`]: a latent-liquidity order-book profile and the impact law
//!   obtained by inverting its cumulative depth.
//! - [`synth`]: synthetic metaorder populations and full synthetic market
//!   days (bars + order flow) with known ground truth.
//! - [`estimation`]: evenly-populated binning, weighted nonlinear fits,
//!   impact surfaces, trajectory/decay curves, and order-overlap statistics.

pub mod book;
pub mod estimation;
pub mod market;
pub mod models;
pub mod specfn;
pub mod synth;
