//! Adaptive Gauss-Kronrod quadrature over finite intervals.
//!
//! The driver refines the subinterval with the largest error estimate until
//! the summed estimate meets the relative tolerance or the interval budget is
//! spent. Integrable endpoint singularities can be declared through exponent
//! hints: for an integrand behaving like (s - a)^p (p > -1) near the lower
//! endpoint, the substitution s = a + t^(1/(1+p)) makes the transformed
//! integrand bounded, and likewise at the upper endpoint. With both endpoints
//! hinted the interval is split at its midpoint and each half transformed.

use std::collections::BinaryHeap;

use thiserror::Error;

/// 15-point Kronrod abscissae on [-1, 1] (positive half; last entry is the
/// center). Shared with the embedded 7-point Gauss rule at odd indices.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_46,
    0.0,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

/// One definite integral with optional endpoint singularity hints.
pub struct QuadratureSpec<F: Fn(f64) -> f64> {
    pub integrand: F,
    pub lower: f64,
    pub upper: f64,
    /// Relative tolerance on the integral value.
    pub rel_tol: f64,
    /// Exponent p of an integrable (s - lower)^p factor, if any.
    pub lower_exponent: Option<f64>,
    /// Exponent p of an integrable (upper - s)^p factor, if any.
    pub upper_exponent: Option<f64>,
    /// Refinement budget: maximum number of subintervals.
    pub max_intervals: usize,
}

impl<F: Fn(f64) -> f64> QuadratureSpec<F> {
    pub fn new(integrand: F, lower: f64, upper: f64) -> Self {
        Self {
            integrand,
            lower,
            upper,
            rel_tol: 1e-10,
            lower_exponent: None,
            upper_exponent: None,
            max_intervals: 4096,
        }
    }

    pub fn rel_tol(mut self, tol: f64) -> Self {
        self.rel_tol = tol;
        self
    }

    pub fn lower_exponent(mut self, p: f64) -> Self {
        self.lower_exponent = Some(p);
        self
    }

    pub fn upper_exponent(mut self, p: f64) -> Self {
        self.upper_exponent = Some(p);
        self
    }

    pub fn max_intervals(mut self, n: usize) -> Self {
        self.max_intervals = n;
        self
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    /// Summed per-interval error estimate actually achieved.
    pub error_estimate: f64,
    pub intervals: usize,
}

#[derive(Debug, Error)]
pub enum QuadError {
    #[error("invalid integration interval [{lower}, {upper}]")]
    InvalidInterval { lower: f64, upper: f64 },
    #[error("relative tolerance {0} must be positive and finite")]
    InvalidTolerance(f64),
    #[error("endpoint exponent {0} <= -1 is not integrable")]
    NonIntegrable(f64),
    #[error("integrand returned a non-finite value near s = {near}")]
    NonFiniteIntegrand { near: f64 },
    #[error(
        "interval budget {budget} exhausted: best estimate {best_estimate} +/- {error_estimate}"
    )]
    BudgetExhausted {
        budget: usize,
        best_estimate: f64,
        error_estimate: f64,
    },
}

struct Gk15 {
    value: f64,
    err: f64,
}

fn gk15(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> Gk15 {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut resg = fc * WG[3];
    let mut resk = fc * WGK[7];
    let mut resabs = fc.abs() * WGK[7];
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let x = half * XGK[j];
        fv1[j] = f(center - x);
        fv2[j] = f(center + x);
        let fsum = fv1[j] + fv2[j];
        resk += WGK[j] * fsum;
        resabs += WGK[j] * (fv1[j].abs() + fv2[j].abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * fsum;
        }
    }
    let reskh = resk * 0.5;
    let mut resasc = WGK[7] * (fc - reskh).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - reskh).abs() + (fv2[j] - reskh).abs());
    }
    Gk15 {
        value: resk * half,
        err: rescale_error((resk - resg) * half, resabs * half.abs(), resasc * half.abs()),
    }
}

/// Error model lifted from the classic QUADPACK rescaling.
fn rescale_error(err: f64, resabs: f64, resasc: f64) -> f64 {
    let mut err = err.abs();
    if resasc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / resasc).powf(1.5);
        err = if scale < 1.0 { resasc * scale } else { resasc };
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    err
}

struct Piece {
    err: f64,
    value: f64,
    lo: f64,
    hi: f64,
    seg: usize,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

type Segment<'f> = (Box<dyn Fn(f64) -> f64 + 'f>, f64, f64);

pub fn integrate<F: Fn(f64) -> f64>(spec: QuadratureSpec<F>) -> Result<QuadResult, QuadError> {
    let QuadratureSpec {
        integrand,
        lower,
        upper,
        rel_tol,
        lower_exponent,
        upper_exponent,
        max_intervals,
    } = spec;
    if !(lower.is_finite() && upper.is_finite()) || lower > upper {
        return Err(QuadError::InvalidInterval { lower, upper });
    }
    if !(rel_tol.is_finite() && rel_tol > 0.0) {
        return Err(QuadError::InvalidTolerance(rel_tol));
    }
    for p in [lower_exponent, upper_exponent].into_iter().flatten() {
        if p <= -1.0 {
            return Err(QuadError::NonIntegrable(p));
        }
    }
    if lower == upper {
        return Ok(QuadResult {
            value: 0.0,
            error_estimate: 0.0,
            intervals: 0,
        });
    }

    // A zero exponent is no singularity at all.
    let p_lo = lower_exponent.filter(|p| *p != 0.0);
    let p_hi = upper_exponent.filter(|p| *p != 0.0);
    let f = &integrand;
    let mut segments: Vec<Segment> = Vec::new();
    match (p_lo, p_hi) {
        (None, None) => segments.push((Box::new(f), lower, upper)),
        (Some(p), None) => segments.push(lower_tx(f, lower, upper, p)),
        (None, Some(p)) => segments.push(upper_tx(f, lower, upper, p)),
        (Some(pl), Some(pu)) => {
            let mid = 0.5 * (lower + upper);
            segments.push(lower_tx(f, lower, mid, pl));
            segments.push(upper_tx(f, mid, upper, pu));
        }
    }

    let mut heap = BinaryHeap::new();
    let mut sum = 0.0;
    let mut err_sum = 0.0;
    let mut count = 0usize;
    for (seg, (g, lo, hi)) in segments.iter().enumerate() {
        let r = gk15(g.as_ref(), *lo, *hi);
        if !r.value.is_finite() {
            return Err(QuadError::NonFiniteIntegrand {
                near: 0.5 * (lo + hi),
            });
        }
        sum += r.value;
        err_sum += r.err;
        count += 1;
        heap.push(Piece {
            err: r.err,
            value: r.value,
            lo: *lo,
            hi: *hi,
            seg,
        });
    }

    while err_sum > rel_tol * sum.abs().max(f64::MIN_POSITIVE) {
        if count >= max_intervals {
            return Err(QuadError::BudgetExhausted {
                budget: max_intervals,
                best_estimate: sum,
                error_estimate: err_sum,
            });
        }
        let worst = heap.pop().expect("heap holds every live interval");
        let g = segments[worst.seg].0.as_ref();
        let mid = 0.5 * (worst.lo + worst.hi);
        let left = gk15(g, worst.lo, mid);
        let right = gk15(g, mid, worst.hi);
        if !(left.value.is_finite() && right.value.is_finite()) {
            return Err(QuadError::NonFiniteIntegrand { near: mid });
        }
        sum += left.value + right.value - worst.value;
        err_sum += left.err + right.err - worst.err;
        count += 1;
        heap.push(Piece {
            err: left.err,
            value: left.value,
            lo: worst.lo,
            hi: mid,
            seg: worst.seg,
        });
        heap.push(Piece {
            err: right.err,
            value: right.value,
            lo: mid,
            hi: worst.hi,
            seg: worst.seg,
        });
    }

    Ok(QuadResult {
        value: sum,
        error_estimate: err_sum,
        intervals: count,
    })
}

/// Substitution s = a + t^q, q = 1/(1+p), for a (s-a)^p factor at the lower
/// endpoint. Covers [a, b] with t in [0, (b-a)^(1/q)].
fn lower_tx<'f>(f: &'f dyn Fn(f64) -> f64, a: f64, b: f64, p: f64) -> Segment<'f> {
    let q = 1.0 / (1.0 + p);
    let g = move |t: f64| f(a + t.powf(q)) * q * t.powf(q - 1.0);
    (Box::new(g), 0.0, (b - a).powf(1.0 / q))
}

/// Mirror substitution s = b - t^q for an (b-s)^p factor at the upper endpoint.
fn upper_tx<'f>(f: &'f dyn Fn(f64) -> f64, a: f64, b: f64, p: f64) -> Segment<'f> {
    let q = 1.0 / (1.0 + p);
    let g = move |t: f64| f(b - t.powf(q)) * q * t.powf(q - 1.0);
    (Box::new(g), 0.0, (b - a).powf(1.0 / q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(QuadratureSpec::new(|s| s, 0.0, 1.0)).unwrap();
        assert_relative_eq!(r.value, 0.5, max_relative = 1e-14);
    }

    #[test]
    fn smooth_oscillatory() {
        let r = integrate(QuadratureSpec::new(f64::sin, 0.0, PI).rel_tol(1e-12)).unwrap();
        assert_relative_eq!(r.value, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn inverse_sqrt_upper_singularity() {
        let r = integrate(
            QuadratureSpec::new(|s: f64| (1.0 - s).powf(-0.5), 0.0, 1.0).upper_exponent(-0.5),
        )
        .unwrap();
        assert_relative_eq!(r.value, 2.0, max_relative = 1e-10);
    }

    #[test]
    fn indicator_cuts_off_before_the_singular_endpoint() {
        // The (2-s)^(-1/2) factor never blows up on the support of the
        // indicator, so plain refinement must cope with the jump at s = 1.
        let f = |s: f64| if s <= 1.0 { (2.0 - s).powf(-0.5) } else { 0.0 };
        let expected = 2.0 * (2.0f64.sqrt() - 1.0);
        let r = integrate(QuadratureSpec::new(f, 0.0, 2.0)).unwrap();
        assert_relative_eq!(r.value, expected, max_relative = 1e-9);
        // Declaring the (inactive) singularity must not break anything.
        let r = integrate(QuadratureSpec::new(f, 0.0, 2.0).upper_exponent(-0.5)).unwrap();
        assert_relative_eq!(r.value, expected, max_relative = 1e-9);
    }

    #[test]
    fn log_singularity_by_plain_refinement() {
        let r = integrate(QuadratureSpec::new(|s: f64| s.ln(), 1e-300, 1.0).rel_tol(1e-9))
            .unwrap();
        assert_relative_eq!(r.value, -1.0, max_relative = 1e-8);
    }

    #[test]
    fn both_endpoints_singular() {
        // int_0^1 s^(-1/2) (1-s)^(-1/2) ds = pi
        let f = |s: f64| s.powf(-0.5) * (1.0 - s).powf(-0.5);
        let r = integrate(
            QuadratureSpec::new(f, 0.0, 1.0)
                .lower_exponent(-0.5)
                .upper_exponent(-0.5),
        )
        .unwrap();
        assert_relative_eq!(r.value, PI, max_relative = 1e-10);
    }

    #[test]
    fn budget_exhaustion_reports_best_estimate() {
        // 1/s is not integrable on (0, 1]; the refinement budget must trip.
        let out = integrate(
            QuadratureSpec::new(|s: f64| 1.0 / s, 0.0, 1.0).max_intervals(64),
        );
        assert!(matches!(out, Err(QuadError::BudgetExhausted { .. })));
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(
            integrate(QuadratureSpec::new(|s| s, 1.0, 0.0)),
            Err(QuadError::InvalidInterval { .. })
        ));
        assert!(matches!(
            integrate(QuadratureSpec::new(|s| s, 0.0, 1.0).lower_exponent(-1.0)),
            Err(QuadError::NonIntegrable(_))
        ));
        assert!(matches!(
            integrate(QuadratureSpec::new(|s| s, 0.0, 1.0).rel_tol(0.0)),
            Err(QuadError::InvalidTolerance(_))
        ));
    }

    #[test]
    fn halving_tolerance_at_most_doubles_refinement() {
        let count = |tol: f64| {
            integrate(QuadratureSpec::new(|s: f64| (3.0 * s).cos() * s.exp(), 0.0, 2.0).rel_tol(tol))
                .unwrap()
                .intervals
        };
        let mut prev = count(1e-4);
        for k in 1..=8 {
            let next = count(1e-4 * 0.5f64.powi(k));
            assert!(
                next <= 2 * prev.max(1),
                "tolerance halving blew up refinement: {prev} -> {next}"
            );
            prev = next;
        }
    }
}
