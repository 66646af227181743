//! From measured orders to fitted impact laws.
//!
//! The flow is: collect per-order samples (descriptors plus impact), reduce
//! them to evenly-populated bins ([`impact_curve`], [`fit_cells`]), then fit
//! a model family to the binned means weighted by their standard errors
//! ([`weighted_nls`]). Trajectory and decay shapes ([`trajectory_curves`],
//! [`decay_curves`]) and order-overlap statistics ([`overlap_stats`]) work
//! on the raw per-order paths instead.
//!
//! Model comparison here is by `e_rms`, the standard-error-weighted RMS
//! residual. With bin counts fixed across candidate families the parameter
//! counts differ by at most one, so information criteria would rank the
//! families the same way; we keep the statistic the paper trail can verify
//! by hand.

mod bins;
mod fit;
mod overlap;
mod paths;
mod surface;

pub use bins::{equal_count_bins, impact_curve, impact_curve_with_edges, BinnedCurve, CurveRow};
pub use fit::{default_init, e_rms, weighted_nls, FitFamily, FitPoint, FitResult};
pub use overlap::{overlap_stats, OverlapRow, DEFAULT_DURATION_BINS};
pub use paths::{
    decay_curves, order_path, trajectory_curves, DecayCurve, DecayPoint, OrderPath,
    TrajectoryCurve,
};
pub use surface::{
    fit_surface, local_exponent_map, residual_map, LocalExponents, SurfaceCell, SurfaceGrid,
};

use thiserror::Error;

/// Bins for one-descriptor impact curves.
pub const DEFAULT_CURVE_BINS: usize = 50;
/// Bins when the target is a book-family fit, which resolves the crossover
/// between the linear and logarithmic regimes only with a fine abscissa.
pub const DEFAULT_BOOK_FIT_BINS: usize = 1000;
/// Cells per axis for surfaces and exponent maps.
pub const DEFAULT_GRID_BINS: usize = 10;

#[derive(Debug, Error)]
pub enum EstimationError {
    #[error("{what} needs at least {needed} values, got {got}")]
    TooFewValues {
        what: &'static str,
        needed: usize,
        got: usize,
    },
    #[error("row {row} has zero standard error; drop the row or pass exact data only")]
    ZeroStandardError { row: usize },
    #[error("rows mix zero and positive standard errors; exact and noisy points cannot share one weighting")]
    MixedWeights,
    #[error("initial parameters {init:?} give a non-finite {family} model")]
    BadInit { family: FitFamily, init: Vec<f64> },
    #[error(
        "{family} fit stopped after {iterations} iterations at {params:?} \
         (cost {cost:.6e}, last step {step:.3e} above the 1e-10 tolerance)"
    )]
    NoConvergence {
        family: FitFamily,
        iterations: usize,
        params: Vec<f64>,
        cost: f64,
        step: f64,
    },
    #[error("{family} jacobian is singular at the optimum; a parameter is not identified by these points")]
    SingularJacobian { family: FitFamily },
    #[error("{name} = {value} outside its domain ({requirement})")]
    Parameter {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },
}
