//! Special functions backing the closed-form impact trajectories.
//!
//! Two building blocks live here: the Gauss hypergeometric function 2F1 on
//! the real axis left of z = 1, and an adaptive Gauss-Kronrod integrator that
//! accepts integrable endpoint singularities. The integrator is deliberately
//! independent of the hypergeometric code path so the two can cross-check
//! each other.

mod gamma;
mod hyp2f1;
mod quad;

pub use hyp2f1::{hyp2f1, Hyp2F1Args, Hyp2F1Error};
pub use quad::{integrate, QuadError, QuadResult, QuadratureSpec};
