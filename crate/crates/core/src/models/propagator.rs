//! Continuous propagator model in volume time.
//!
//! A metaorder executes over the volume-time interval `[0, F]` with rate
//! profile `q(s)` (normalized by daily volume). Each slice moves the price
//! through a concave instantaneous impact `f(q) = q^delta` and relaxes under
//! the power-law kernel `G(t) = t^{-gamma}`, so the expected rescaled impact
//! at `v = z F` is
//!
//! `I(z) = integral of f(q(s)) (v - s)^{-gamma} over executed volume s`
//!
//! For the one-parameter profile family `q(s) ~ (F - s)^alpha` this integral
//! has closed forms in the Gauss hypergeometric function; `alpha = 0` is the
//! VWAP schedule where they collapse to elementary powers.
//!
//! Convergence of the completion integral needs `1 + alpha*delta - gamma > 0`,
//! enforced at construction. `delta + gamma < 1` admits price manipulation
//! (round trips with negative expected cost); it is reported, not rejected,
//! because several published fits land there.

use serde::{Deserialize, Serialize};

use super::{require_finite, ModelError};
use crate::specfn::{hyp2f1, Hyp2F1Args};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagatorParams {
    /// Instantaneous impact exponent, `f(q) = q^delta`, in `(0, 1]`.
    pub delta: f64,
    /// Kernel decay exponent, `G(t) = t^{-gamma}`, in `[0, 1)`.
    pub gamma: f64,
    /// Profile shape, `q(s) ~ (F - s)^alpha`, `> -1`. Positive front-loads.
    pub alpha: f64,
    /// Participation rate during execution.
    pub eta: f64,
    /// Execution duration as a fraction of the trading day.
    pub duration_f: f64,
}

impl PropagatorParams {
    pub fn new(delta: f64, gamma: f64, alpha: f64, eta: f64, duration_f: f64) -> Result<Self, ModelError> {
        let p = PropagatorParams { delta, gamma, alpha, eta, duration_f };
        p.validate()?;
        if p.admits_manipulation() {
            log::warn!(
                "delta + gamma = {} < 1: propagator admits price manipulation",
                delta + gamma
            );
        }
        Ok(p)
    }

    /// VWAP schedule (`alpha = 0`).
    pub fn vwap(delta: f64, gamma: f64, eta: f64, duration_f: f64) -> Result<Self, ModelError> {
        Self::new(delta, gamma, 0.0, eta, duration_f)
    }

    /// Critical VWAP: `delta = gamma = 1/2`, the square-root law with Y = 2.
    pub fn critical(eta: f64, duration_f: f64) -> Result<Self, ModelError> {
        Self::new(0.5, 0.5, 0.0, eta, duration_f)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for (name, value) in [
            ("delta", self.delta),
            ("gamma", self.gamma),
            ("alpha", self.alpha),
            ("eta", self.eta),
            ("duration_f", self.duration_f),
        ] {
            require_finite(name, value)?;
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(ModelError::Parameter {
                name: "delta",
                value: self.delta,
                requirement: "in (0, 1]",
            });
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(ModelError::Parameter {
                name: "gamma",
                value: self.gamma,
                requirement: "in [0, 1)",
            });
        }
        if self.alpha <= -1.0 {
            return Err(ModelError::Parameter {
                name: "alpha",
                value: self.alpha,
                requirement: "> -1",
            });
        }
        if self.eta < 0.0 {
            return Err(ModelError::Parameter {
                name: "eta",
                value: self.eta,
                requirement: ">= 0",
            });
        }
        if self.duration_f <= 0.0 {
            return Err(ModelError::Parameter {
                name: "duration_f",
                value: self.duration_f,
                requirement: "> 0",
            });
        }
        let margin = 1.0 + self.alpha * self.delta - self.gamma;
        if margin <= 0.0 {
            return Err(ModelError::DivergentImpact(margin));
        }
        Ok(())
    }

    /// True when `delta + gamma < 1`, the regime where round trips can have
    /// negative expected cost.
    pub fn admits_manipulation(&self) -> bool {
        self.delta + self.gamma < 1.0
    }

    /// Daily fraction executed, `pi = eta * F`.
    pub fn daily_fraction(&self) -> f64 {
        self.eta * self.duration_f
    }

    // Common prefactor eta^delta (1+alpha)^delta F^{1-gamma}; the remaining
    // factor depends only on z = v / F.
    fn prefactor(&self) -> f64 {
        self.eta.powf(self.delta)
            * (1.0 + self.alpha).powf(self.delta)
            * self.duration_f.powf(1.0 - self.gamma)
    }

    fn require_vwap(&self) -> Result<(), ModelError> {
        if self.alpha == 0.0 {
            Ok(())
        } else {
            Err(ModelError::Parameter {
                name: "alpha",
                value: self.alpha,
                requirement: "= 0 for the VWAP forms",
            })
        }
    }
}

fn check_z(z: f64) -> Result<(), ModelError> {
    if z.is_finite() && z > 0.0 {
        Ok(())
    } else {
        Err(ModelError::NonPositiveTime(z))
    }
}

/// Completion impact of a VWAP execution: `eta^delta F^{1-gamma} / (1-gamma)`.
pub fn vwap_temporary(p: &PropagatorParams) -> Result<f64, ModelError> {
    p.validate()?;
    p.require_vwap()?;
    Ok(p.eta.powf(p.delta) * p.duration_f.powf(1.0 - p.gamma) / (1.0 - p.gamma))
}

/// VWAP impact at rescaled time `z = v / F`, during and after execution.
pub fn vwap_trajectory(p: &PropagatorParams, z: f64) -> Result<f64, ModelError> {
    p.validate()?;
    p.require_vwap()?;
    check_z(z)?;
    let e = 1.0 - p.gamma;
    let shape = if z <= 1.0 { z.powf(e) } else { z.powf(e) - (z - 1.0).powf(e) };
    Ok(p.eta.powf(p.delta) * p.duration_f.powf(e) / e * shape)
}

/// Trading rate `q(s) = pi (alpha+1) (F-s)^alpha / F^{alpha+1}` at volume
/// time `s` into the execution. For `alpha < 0` the rate diverges
/// (integrably) as `s -> F`.
pub fn alpha_rate(p: &PropagatorParams, s: f64) -> Result<f64, ModelError> {
    p.validate()?;
    if !s.is_finite() || !(0.0..=p.duration_f).contains(&s) {
        return Err(ModelError::TimeOutOfWindow { t: s, horizon: p.duration_f });
    }
    Ok(p.eta * (p.alpha + 1.0) * ((p.duration_f - s) / p.duration_f).powf(p.alpha))
}

/// Completion impact of the `alpha` profile:
/// `eta^delta F^{1-gamma} (1+alpha)^delta / (1 + alpha delta - gamma)`.
pub fn alpha_temporary(p: &PropagatorParams) -> Result<f64, ModelError> {
    p.validate()?;
    Ok(p.prefactor() / (1.0 + p.alpha * p.delta - p.gamma))
}

/// Impact of the `alpha` profile at rescaled time `z = v / F`.
///
/// Writing `J(z)` for the integral of `(1-s)^{alpha delta} (z-s)^{-gamma}`
/// over the executed part of `[0, min(z, 1)]`, the closed forms are
///
/// - `z < 1`: `J(z) = z^{1-gamma} 2F1(1, -alpha delta; 2-gamma; z) / (1-gamma)`
/// - `z > 1`: `J(z) = z^{-gamma} 2F1(1, gamma; 2+alpha delta; 1/z) / (1+alpha delta)`
///
/// and the impact is `prefactor * J(z)`. At `z = 1` both branches converge
/// to the completion value, which is returned directly.
pub fn alpha_trajectory(p: &PropagatorParams, z: f64) -> Result<f64, ModelError> {
    p.validate()?;
    check_z(z)?;
    if z == 1.0 {
        return alpha_temporary(p);
    }
    let ad = p.alpha * p.delta;
    let shape = if z < 1.0 {
        let f = hyp2f1(Hyp2F1Args { a: 1.0, b: -ad, c: 2.0 - p.gamma, z })?;
        z.powf(1.0 - p.gamma) * f / (1.0 - p.gamma)
    } else {
        let f = hyp2f1(Hyp2F1Args { a: 1.0, b: p.gamma, c: 2.0 + ad, z: 1.0 / z })?;
        z.powf(-p.gamma) * f / (1.0 + ad)
    };
    Ok(p.prefactor() * shape)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfn::{integrate, QuadratureSpec};
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn params(delta: f64, gamma: f64, alpha: f64) -> PropagatorParams {
        PropagatorParams::new(delta, gamma, alpha, 0.01, 0.25).unwrap()
    }

    // Direct numerical evaluation of the impact integral, independent of the
    // hypergeometric closed forms.
    fn oracle(p: &PropagatorParams, z: f64) -> f64 {
        let ad = p.alpha * p.delta;
        let g = p.gamma;
        let (upper, hint) = if z <= 1.0 { (z, -g) } else { (1.0, ad) };
        let integrand = move |s: f64| (1.0 - s).powf(ad) * (z - s).powf(-g);
        let spec = QuadratureSpec::new(integrand, 0.0, upper)
            .rel_tol(1e-12)
            .upper_exponent(hint);
        let j = integrate(spec).unwrap().value;
        p.eta.powf(p.delta)
            * (1.0 + p.alpha).powf(p.delta)
            * p.duration_f.powf(1.0 - p.gamma)
            * j
    }

    #[test]
    fn vwap_temporary_examples() {
        let p = params(0.5, 0.5, 0.0);
        assert_relative_eq!(vwap_temporary(&p).unwrap(), 0.1, max_relative = 1e-15);

        let linear = PropagatorParams::vwap(1.0, 0.0, 0.01, 0.25).unwrap();
        assert_relative_eq!(vwap_temporary(&linear).unwrap(), 0.01 * 0.25);

        let idle = PropagatorParams::vwap(0.5, 0.5, 0.0, 0.25).unwrap();
        assert_abs_diff_eq!(vwap_temporary(&idle).unwrap(), 0.0);
    }

    #[test]
    fn critical_family_depends_only_on_daily_fraction() {
        // With delta + gamma = 1 the completion impact is a function of
        // pi = eta * F alone.
        for (delta, gamma) in [(0.5, 0.5), (0.3, 0.7), (0.9, 0.1)] {
            let base = PropagatorParams::vwap(delta, gamma, 0.01, 0.25).unwrap();
            let squeezed = PropagatorParams::vwap(delta, gamma, 0.05, 0.05).unwrap();
            let stretched = PropagatorParams::vwap(delta, gamma, 0.0025, 1.0).unwrap();
            let v = vwap_temporary(&base).unwrap();
            assert_relative_eq!(vwap_temporary(&squeezed).unwrap(), v, max_relative = 1e-12);
            assert_relative_eq!(vwap_temporary(&stretched).unwrap(), v, max_relative = 1e-12);
        }
        // And the critical square-root form is 2 sqrt(pi).
        let p = PropagatorParams::critical(0.04, 0.09).unwrap();
        assert_relative_eq!(
            vwap_temporary(&p).unwrap(),
            2.0 * (0.04f64 * 0.09).sqrt(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn vwap_trajectory_examples() {
        let p = params(0.5, 0.5, 0.0);
        assert_relative_eq!(
            vwap_trajectory(&p, 1.0).unwrap(),
            vwap_temporary(&p).unwrap(),
            max_relative = 1e-15
        );
        assert_relative_eq!(
            vwap_trajectory(&p, 2.0).unwrap(),
            0.0414213562373095,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            vwap_trajectory(&p, 0.5).unwrap(),
            0.1 * 0.5f64.sqrt(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn vwap_trajectory_shape() {
        let p = params(0.5, 0.4, 0.0);
        // Continuous through completion; the decay side approaches like
        // (z - 1)^{1-gamma}, so bound by that rate instead of a flat epsilon.
        let at = vwap_trajectory(&p, 1.0).unwrap();
        let dev = |eps: f64| {
            let lo = (vwap_trajectory(&p, 1.0 - eps).unwrap() - at).abs();
            let hi = (vwap_trajectory(&p, 1.0 + eps).unwrap() - at).abs();
            lo.max(hi) / at
        };
        assert!(dev(1e-9) < dev(1e-6));
        assert!(dev(1e-9) <= 20.0 * 1e-9f64.powf(1.0 - p.gamma));
        // Monotone build-up, monotone decay, vanishing tail.
        let mut prev = 0.0;
        for i in 1..=100 {
            let v = vwap_trajectory(&p, i as f64 / 100.0).unwrap();
            assert!(v > prev);
            prev = v;
        }
        for i in 101..=300 {
            let v = vwap_trajectory(&p, i as f64 / 100.0).unwrap();
            assert!(v < prev);
            prev = v;
        }
        assert!(vwap_trajectory(&p, 1e9).unwrap() < 1e-3 * at);
    }

    #[test]
    fn rate_integrates_to_daily_fraction() {
        for alpha in [-0.5, 0.0, 1.0, 4.0] {
            let p = params(0.5, 0.5, alpha);
            let rate = move |s: f64| alpha_rate(&p, s).unwrap();
            let spec = QuadratureSpec::new(rate, 0.0, p.duration_f)
                .rel_tol(1e-12)
                .upper_exponent(alpha.min(0.0));
            let q = integrate(spec).unwrap();
            assert_relative_eq!(q.value, p.daily_fraction(), max_relative = 1e-10);
        }
    }

    #[test]
    fn rate_examples() {
        let flat = params(0.5, 0.5, 0.0);
        assert_relative_eq!(alpha_rate(&flat, 0.0).unwrap(), 0.01);
        assert_relative_eq!(alpha_rate(&flat, 0.2).unwrap(), 0.01);
        let front = params(0.5, 0.5, 1.0);
        assert_abs_diff_eq!(alpha_rate(&front, 0.25).unwrap(), 0.0);
        let back = params(0.5, 0.5, -0.5);
        assert!(alpha_rate(&back, 0.25).unwrap().is_infinite());
        assert!(alpha_rate(&front, 0.3).is_err());
    }

    #[test]
    fn alpha_temporary_examples() {
        for (delta, gamma) in [(0.5, 0.5), (0.6, 0.3)] {
            let p = params(delta, gamma, 0.0);
            assert_relative_eq!(
                alpha_temporary(&p).unwrap(),
                vwap_temporary(&p).unwrap(),
                max_relative = 1e-15
            );
        }
        assert_relative_eq!(
            alpha_temporary(&params(0.5, 0.5, 1.0)).unwrap(),
            0.07071067811865475,
            max_relative = 1e-14
        );
        let unit = PropagatorParams::new(0.5, 0.5, 4.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(
            alpha_temporary(&unit).unwrap(),
            0.8944271909999159,
            max_relative = 1e-14
        );
    }

    #[test]
    fn trajectory_matches_quadrature() {
        for alpha in [-0.5, 0.0, 1.0, 4.0] {
            let p = params(0.5, 0.5, alpha);
            for z in [0.3, 0.9, 1.2, 2.5] {
                let closed = alpha_trajectory(&p, z).unwrap();
                assert_relative_eq!(closed, oracle(&p, z), max_relative = 1e-8);
            }
        }
        // Off the symmetric point too.
        let p = PropagatorParams::new(0.7, 0.2, 1.5, 0.02, 0.1).unwrap();
        for z in [0.4, 1.7] {
            assert_relative_eq!(alpha_trajectory(&p, z).unwrap(), oracle(&p, z), max_relative = 1e-8);
        }
    }

    #[test]
    fn alpha_zero_collapses_to_vwap() {
        let p = params(0.5, 0.4, 0.0);
        for z in [0.1, 0.5, 0.999, 1.0, 1.001, 2.0, 3.0] {
            assert_relative_eq!(
                alpha_trajectory(&p, z).unwrap(),
                vwap_trajectory(&p, z).unwrap(),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn trajectory_is_continuous_at_completion() {
        // The one-sided deviation shrinks like eps^min(1, 1+alpha*delta-gamma),
        // which is slow for back-loaded profiles, so the bound tracks that rate.
        for alpha in [-0.5, 1.0, 4.0] {
            let p = params(0.5, 0.5, alpha);
            let at = alpha_trajectory(&p, 1.0).unwrap();
            let rate = (1.0 + alpha * p.delta - p.gamma).min(1.0);
            let dev = |eps: f64| {
                let lo = (alpha_trajectory(&p, 1.0 - eps).unwrap() - at).abs();
                let hi = (alpha_trajectory(&p, 1.0 + eps).unwrap() - at).abs();
                lo.max(hi) / at
            };
            assert!(dev(1e-7) < dev(1e-4));
            assert!(dev(1e-7) <= 20.0 * 1e-7f64.powf(rate));
        }
    }

    #[test]
    fn front_loading_peaks_before_completion() {
        let p = params(0.5, 0.5, 4.0);
        let (mut best_z, mut best) = (0.0, 0.0);
        for i in 1..=1000 {
            let z = i as f64 / 1000.0;
            let v = alpha_trajectory(&p, z).unwrap();
            if v > best {
                best = v;
                best_z = z;
            }
        }
        assert_abs_diff_eq!(best_z, 0.3169872981077807, epsilon = 1.5e-3);
        assert!(best > alpha_temporary(&p).unwrap());
        // Back-loading instead approaches the completion value from below.
        let back = params(0.5, 0.5, -0.5);
        let tmp = alpha_temporary(&back).unwrap();
        let mut prev = 0.0;
        for i in 1..=1000 {
            let v = alpha_trajectory(&back, i as f64 / 1000.0).unwrap();
            assert!(v > prev && v <= tmp * (1.0 + 1e-12));
            prev = v;
        }
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(
            PropagatorParams::new(0.5, 1.0, 0.0, 0.01, 0.25),
            Err(ModelError::Parameter { name: "gamma", .. })
        ));
        assert!(matches!(
            PropagatorParams::new(0.0, 0.5, 0.0, 0.01, 0.25),
            Err(ModelError::Parameter { name: "delta", .. })
        ));
        assert!(matches!(
            PropagatorParams::new(0.5, 0.5, -1.0, 0.01, 0.25),
            Err(ModelError::Parameter { name: "alpha", .. })
        ));
        // 1 + alpha delta - gamma = 0 diverges.
        assert!(matches!(
            PropagatorParams::new(1.0, 0.5, -0.5, 0.01, 0.25),
            Err(ModelError::DivergentImpact(_))
        ));
        let p = params(0.5, 0.5, 0.0);
        assert!(matches!(vwap_trajectory(&p, 0.0), Err(ModelError::NonPositiveTime(_))));
        assert!(matches!(alpha_trajectory(&p, -1.0), Err(ModelError::NonPositiveTime(_))));
        let front = params(0.5, 0.5, 1.0);
        assert!(matches!(
            vwap_temporary(&front),
            Err(ModelError::Parameter { name: "alpha", .. })
        ));
    }

    #[test]
    fn manipulation_flag() {
        let p = PropagatorParams::vwap(0.4, 0.5, 0.01, 0.25).unwrap();
        assert!(p.admits_manipulation());
        assert!(!params(0.5, 0.5, 0.0).admits_manipulation());
    }
}
