//! Optimal execution with linear instantaneous impact.
//!
//! A metaorder of `Q = eta * horizon_t` shares is worked over `[0, T]`.
//! Instantaneous impact is `a * q(t)` and the trader penalizes inventory
//! variance with risk aversion `lambda`, so the optimal remaining inventory
//! solves `x'' = k^2 x` with `k = sqrt(lambda * sigma^2 / a)`:
//!
//! `x(t) = Q sinh(k (T - t)) / sinh(k T)`
//!
//! Impact along the schedule is `a (Q - x(t))`. Its completion value
//! `a * eta * T` does not depend on `lambda`: risk aversion reshapes the
//! path but not where it ends.

use serde::{Deserialize, Serialize};

use super::{require_finite, ModelError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AcParams {
    /// Linear impact coefficient, price units per share rate.
    pub a: f64,
    pub sigma: f64,
    pub lambda: f64,
    pub eta: f64,
    pub horizon_t: f64,
}

impl AcParams {
    pub fn new(a: f64, sigma: f64, lambda: f64, eta: f64, horizon_t: f64) -> Result<Self, ModelError> {
        let p = AcParams { a, sigma, lambda, eta, horizon_t };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let positive = |name, value: f64| -> Result<(), ModelError> {
            require_finite(name, value)?;
            if value > 0.0 {
                Ok(())
            } else {
                Err(ModelError::Parameter { name, value, requirement: "> 0" })
            }
        };
        let nonnegative = |name, value: f64| -> Result<(), ModelError> {
            require_finite(name, value)?;
            if value >= 0.0 {
                Ok(())
            } else {
                Err(ModelError::Parameter { name, value, requirement: ">= 0" })
            }
        };
        positive("a", self.a)?;
        nonnegative("sigma", self.sigma)?;
        nonnegative("lambda", self.lambda)?;
        nonnegative("eta", self.eta)?;
        positive("horizon_t", self.horizon_t)
    }

    /// Decay rate of the optimal schedule, `sqrt(lambda sigma^2 / a)`.
    pub fn k(&self) -> f64 {
        (self.lambda * self.sigma * self.sigma / self.a).sqrt()
    }

    pub fn total_shares(&self) -> f64 {
        self.eta * self.horizon_t
    }

    fn check_window(&self, t: f64) -> Result<(), ModelError> {
        if t.is_finite() && (0.0..=self.horizon_t).contains(&t) {
            Ok(())
        } else {
            Err(ModelError::TimeOutOfWindow { t, horizon: self.horizon_t })
        }
    }
}

// sinh(k(T-t)) / sinh(kT) without overflow: rewrite via exp(-k t) and expm1
// so kT in the thousands still yields a finite ratio, and k -> 0 degrades
// gracefully to the risk-neutral linear schedule.
fn inventory_fraction(k: f64, horizon: f64, t: f64) -> f64 {
    if k == 0.0 {
        return (horizon - t) / horizon;
    }
    let ratio = (-2.0 * k * (horizon - t)).exp_m1() / (-2.0 * k * horizon).exp_m1();
    (-k * t).exp() * ratio
}

/// Remaining inventory `x(t)` of the optimal schedule.
pub fn ac_optimal_inventory(p: &AcParams, t: f64) -> Result<f64, ModelError> {
    p.validate()?;
    p.check_window(t)?;
    Ok(p.total_shares() * inventory_fraction(p.k(), p.horizon_t, t))
}

/// Impact `a (Q - x(t))` accumulated while executing the optimal schedule.
pub fn ac_trajectory(p: &AcParams, t: f64) -> Result<f64, ModelError> {
    let executed = p.total_shares() - ac_optimal_inventory(p, t)?;
    Ok(p.a * executed)
}
