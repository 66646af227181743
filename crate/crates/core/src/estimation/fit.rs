//! Weighted nonlinear least squares over the impact model families.
//!
//! The fitter is a damped Gauss-Newton loop (Levenberg style: the normal
//! equations get `lambda * diag(JtJ)` added, `lambda` shrinking tenfold on
//! an accepted step and growing tenfold on a rejected one) with a numeric
//! forward-difference jacobian. Model evaluations that leave a family's
//! domain return infinite cost, so the damping simply backs the step off;
//! no family needs hand-written constraints.

use super::EstimationError;
use crate::book::{impact_log_closed, BookDepth, BookParams};
use serde::{Deserialize, Serialize};
use std::f64::consts::LN_10;
use std::fmt;
use std::str::FromStr;

/// One weighted observation: descriptors in `x` (curve families read only
/// `x[0]`, surface families read `(eta, f)`), measured impact `y`, and the
/// standard error of that measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitPoint {
    pub x: [f64; 2],
    pub y: f64,
    pub se: f64,
}

const MAX_ITERATIONS: usize = 200;
const STEP_TOLERANCE: f64 = 1e-10;
const LAMBDA_FLOOR: f64 = 1e-12;
const LAMBDA_CEILING: f64 = 1e14;

/// Impact law families the fitter knows.
///
/// The `Pi` families are curves in the single variable `pi = eta * f`; the
/// `EtaF` families are surfaces in participation and duration; the `Book`
/// families invert a latent-liquidity book profile `x^n exp(bx)` (the `N0`
/// variant uses its closed logarithmic form).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitFamily {
    /// `y * pi^delta`
    PowerPi,
    /// `a * log10(1 + b * pi)`
    LogPi,
    /// `y * eta^delta * f^gamma1`
    PowerEtaF,
    /// `a * log10(1 + b * eta) * log10(1 + c * f)`
    LogEtaF,
    /// Book with a pure exponential profile, closed form.
    BookN0,
    /// Book profile `x * exp(bx)`, numeric inversion.
    BookN1,
    /// Book profile `x^n exp(bx)` with `n` free, numeric inversion.
    BookNFree,
}

impl FitFamily {
    pub const ALL: [FitFamily; 7] = [
        FitFamily::PowerPi,
        FitFamily::LogPi,
        FitFamily::PowerEtaF,
        FitFamily::LogEtaF,
        FitFamily::BookN0,
        FitFamily::BookN1,
        FitFamily::BookNFree,
    ];

    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            FitFamily::PowerPi => &["y", "delta"],
            FitFamily::LogPi => &["a", "b"],
            FitFamily::PowerEtaF => &["y", "delta", "gamma1"],
            FitFamily::LogEtaF => &["a", "b", "c"],
            FitFamily::BookN0 | FitFamily::BookN1 => &["y_norm", "b"],
            FitFamily::BookNFree => &["y_norm", "b", "n"],
        }
    }

    /// True for families over `(eta, f)` rather than a single descriptor.
    pub fn is_surface(self) -> bool {
        matches!(self, FitFamily::PowerEtaF | FitFamily::LogEtaF)
    }

    pub fn id(self) -> &'static str {
        match self {
            FitFamily::PowerPi => "power_pi",
            FitFamily::LogPi => "log_pi",
            FitFamily::PowerEtaF => "power_eta_f",
            FitFamily::LogEtaF => "log_eta_f",
            FitFamily::BookN0 => "book_n0",
            FitFamily::BookN1 => "book_n1",
            FitFamily::BookNFree => "book_n_free",
        }
    }
}

impl fmt::Display for FitFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for FitFamily {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FitFamily::ALL
            .into_iter()
            .find(|f| f.id() == s)
            .ok_or_else(|| {
                let ids: Vec<&str> = FitFamily::ALL.iter().map(|f| f.id()).collect();
                format!("unknown family {s:?}; expected one of {}", ids.join(", "))
            })
    }
}

/// A fitted family with asymptotic parameter errors and the weighted RMS
/// residual `e_rms`. For exact (all-zero-SE) inputs the fit is unweighted
/// and `e_rms` is the plain RMS residual.
#[derive(Debug, Clone, Serialize)]
pub struct FitResult {
    pub family: FitFamily,
    pub params: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub e_rms: f64,
    pub n_points: usize,
    pub iterations: usize,
}

impl FitResult {
    pub fn named_params(&self) -> Vec<(&'static str, f64)> {
        self.family
            .param_names()
            .iter()
            .zip(&self.params)
            .map(|(&n, &v)| (n, v))
            .collect()
    }

    pub fn predict(&self, x: [f64; 2]) -> f64 {
        predict_one(self.family, &self.params, x)
    }
}

/// Model values at the points' descriptors, `inf` wherever the parameters
/// leave the family's domain.
fn predict_one(family: FitFamily, params: &[f64], x: [f64; 2]) -> f64 {
    match family {
        FitFamily::PowerPi => params[0] * x[0].powf(params[1]),
        FitFamily::LogPi => params[0] * (params[1] * x[0]).ln_1p() / LN_10,
        FitFamily::PowerEtaF => params[0] * x[0].powf(params[1]) * x[1].powf(params[2]),
        FitFamily::LogEtaF => {
            params[0] * (params[1] * x[0]).ln_1p() / LN_10 * (params[2] * x[1]).ln_1p() / LN_10
        }
        FitFamily::BookN0 => {
            if params[0] > 0.0 && params[1] > 0.0 && params[1] <= 700.0 {
                impact_log_closed(params[0], params[1], x[0])
            } else {
                f64::INFINITY
            }
        }
        // Handled vectorized; the scalar path rebuilds the depth table.
        FitFamily::BookN1 | FitFamily::BookNFree => {
            let n = if family == FitFamily::BookN1 { 1.0 } else { params[2] };
            match BookParams::new(params[0], params[1], n).and_then(|p| BookDepth::new(&p)) {
                Ok(depth) => depth.invert(x[0]).unwrap_or(f64::INFINITY),
                Err(_) => f64::INFINITY,
            }
        }
    }
}

fn predict_all(family: FitFamily, params: &[f64], points: &[FitPoint]) -> Vec<f64> {
    match family {
        // One depth table per parameter trial, shared across points.
        FitFamily::BookN1 | FitFamily::BookNFree => {
            let n = if family == FitFamily::BookN1 { 1.0 } else { params[2] };
            let depth = BookParams::new(params[0], params[1], n).and_then(|p| BookDepth::new(&p));
            match depth {
                Ok(depth) => points
                    .iter()
                    .map(|pt| depth.invert(pt.x[0]).unwrap_or(f64::INFINITY))
                    .collect(),
                Err(_) => vec![f64::INFINITY; points.len()],
            }
        }
        _ => points
            .iter()
            .map(|pt| predict_one(family, params, pt.x))
            .collect(),
    }
}

fn residuals(family: FitFamily, params: &[f64], points: &[FitPoint], weights: &[f64]) -> Vec<f64> {
    predict_all(family, params, points)
        .into_iter()
        .zip(points)
        .zip(weights)
        .map(|((g, pt), &w)| (g - pt.y) * w)
        .collect()
}

fn cost_of(resid: &[f64]) -> f64 {
    resid.iter().map(|r| r * r).sum()
}

/// Fits `family` to weighted points by damped Gauss-Newton from `init`.
///
/// Weights are `1 / se`; exact data (every `se == 0`) is fitted unweighted,
/// while mixing exact and noisy rows is an error. Convergence is a relative
/// step below 1e-10 within 200 iterations; anything else is a
/// [`EstimationError::NoConvergence`] carrying the stopping state.
pub fn weighted_nls(
    family: FitFamily,
    points: &[FitPoint],
    init: &[f64],
) -> Result<FitResult, EstimationError> {
    let n_params = family.param_names().len();
    if init.len() != n_params {
        return Err(EstimationError::Parameter {
            name: "init",
            value: init.len() as f64,
            requirement: "one starting value per family parameter",
        });
    }
    if points.len() < n_params {
        return Err(EstimationError::TooFewValues {
            what: "fit points",
            needed: n_params,
            got: points.len(),
        });
    }
    let weights = weights_for(points)?;

    let mut params = init.to_vec();
    let mut resid = residuals(family, &params, points, &weights);
    let mut cost = cost_of(&resid);
    if !cost.is_finite() {
        return Err(EstimationError::BadInit {
            family,
            init: init.to_vec(),
        });
    }

    let mut lambda = 1e-3;
    let mut last_step = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    'outer: while iterations < MAX_ITERATIONS {
        iterations += 1;
        let jac = jacobian(family, &params, points, &weights, &resid)?;
        let a = normal_matrix(&jac);
        let grad = gradient(&jac, &resid);

        loop {
            let Some(delta) = solve_damped(&a, &grad, lambda) else {
                lambda *= 10.0;
                if lambda > LAMBDA_CEILING {
                    break 'outer;
                }
                continue;
            };
            let step = delta
                .iter()
                .zip(&params)
                .map(|(d, p)| d.abs() / p.abs().max(1.0))
                .fold(0.0, f64::max);
            if step <= STEP_TOLERANCE {
                last_step = step;
                converged = true;
                break 'outer;
            }
            let trial: Vec<f64> = params.iter().zip(&delta).map(|(p, d)| p + d).collect();
            let trial_resid = residuals(family, &trial, points, &weights);
            let trial_cost = cost_of(&trial_resid);
            if trial_cost.is_finite() && trial_cost < cost {
                params = trial;
                resid = trial_resid;
                cost = trial_cost;
                lambda = (lambda * 0.1).max(LAMBDA_FLOOR);
                last_step = step;
                break;
            }
            lambda *= 10.0;
            if lambda > LAMBDA_CEILING {
                // No direction improves the cost: either we sit on the
                // optimum (flat gradient) or the fit is stuck.
                let flat = grad.iter().all(|g| g.abs() <= 1e-10 * (1.0 + cost));
                converged = flat;
                break 'outer;
            }
        }
    }
    if !converged {
        return Err(EstimationError::NoConvergence {
            family,
            iterations,
            params,
            cost,
            step: last_step,
        });
    }

    let jac = jacobian(family, &params, points, &weights, &resid)?;
    let std_errors = standard_errors(family, &jac, points.len(), n_params, cost, &weights)?;
    Ok(FitResult {
        family,
        params,
        std_errors,
        e_rms: (cost / points.len() as f64).sqrt(),
        n_points: points.len(),
        iterations,
    })
}

fn weights_for(points: &[FitPoint]) -> Result<Vec<f64>, EstimationError> {
    let mut any_zero = false;
    let mut any_positive = false;
    for pt in points {
        if !pt.y.is_finite() || !pt.x[0].is_finite() || !pt.x[1].is_finite() {
            return Err(EstimationError::Parameter {
                name: "fit point",
                value: pt.y,
                requirement: "finite descriptors and impact",
            });
        }
        if !pt.se.is_finite() || pt.se < 0.0 {
            return Err(EstimationError::Parameter {
                name: "se",
                value: pt.se,
                requirement: ">= 0 and finite",
            });
        }
        if pt.se == 0.0 {
            any_zero = true;
        } else {
            any_positive = true;
        }
    }
    if any_zero && any_positive {
        return Err(EstimationError::MixedWeights);
    }
    Ok(if any_positive {
        points.iter().map(|pt| 1.0 / pt.se).collect()
    } else {
        vec![1.0; points.len()]
    })
}

/// Weighted-residual jacobian columns by forward differences, falling back
/// to a backward step when the forward one leaves the model's domain.
fn jacobian(
    family: FitFamily,
    params: &[f64],
    points: &[FitPoint],
    weights: &[f64],
    resid: &[f64],
) -> Result<Vec<Vec<f64>>, EstimationError> {
    let mut columns = Vec::with_capacity(params.len());
    for k in 0..params.len() {
        let h = 1e-7 * params[k].abs().max(1e-7);
        let mut column = diff_column(family, params, points, weights, resid, k, h);
        if column.iter().any(|d| !d.is_finite()) {
            column = diff_column(family, params, points, weights, resid, k, -h);
        }
        if column.iter().any(|d| !d.is_finite()) {
            return Err(EstimationError::SingularJacobian { family });
        }
        columns.push(column);
    }
    Ok(columns)
}

fn diff_column(
    family: FitFamily,
    params: &[f64],
    points: &[FitPoint],
    weights: &[f64],
    resid: &[f64],
    k: usize,
    h: f64,
) -> Vec<f64> {
    let mut shifted = params.to_vec();
    shifted[k] += h;
    residuals(family, &shifted, points, weights)
        .into_iter()
        .zip(resid)
        .map(|(r1, &r0)| (r1 - r0) / h)
        .collect()
}

fn normal_matrix(jac: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let p = jac.len();
    let mut a = vec![vec![0.0; p]; p];
    for j in 0..p {
        for k in j..p {
            let s: f64 = jac[j].iter().zip(&jac[k]).map(|(x, y)| x * y).sum();
            a[j][k] = s;
            a[k][j] = s;
        }
    }
    a
}

fn gradient(jac: &[Vec<f64>], resid: &[f64]) -> Vec<f64> {
    jac.iter()
        .map(|col| col.iter().zip(resid).map(|(j, r)| j * r).sum())
        .collect()
}

/// Solves `(A + lambda diag(A)) delta = -grad`.
fn solve_damped(a: &[Vec<f64>], grad: &[f64], lambda: f64) -> Option<Vec<f64>> {
    let mut m = a.to_vec();
    for (k, row) in m.iter_mut().enumerate() {
        row[k] += lambda * a[k][k];
    }
    let rhs: Vec<f64> = grad.iter().map(|g| -g).collect();
    solve(&mut m, rhs)
}

// Gaussian elimination with partial pivoting; fine at p <= 3. The system is
// equilibrated to a unit diagonal first (fit parameters live on wildly
// different scales, e.g. 0.03 against 465), after which a pivot below 1e-13
// means rank deficiency beyond what the forward-difference jacobian noise
// (~1e-7 per entry) can explain, not just bad scaling.
fn solve(m: &mut [Vec<f64>], mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let p = rhs.len();
    let d: Vec<f64> = (0..p).map(|k| m[k][k].abs().sqrt().max(1e-150)).collect();
    for j in 0..p {
        for k in 0..p {
            m[j][k] /= d[j] * d[k];
        }
        rhs[j] /= d[j];
    }
    for col in 0..p {
        let pivot_row = (col..p).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if !m[pivot_row][col].is_finite() || m[pivot_row][col].abs() < 1e-13 {
            return None;
        }
        m.swap(col, pivot_row);
        rhs.swap(col, pivot_row);
        let pivot = m[col][col..].to_vec();
        for row in col + 1..p {
            let f = m[row][col] / pivot[0];
            for (x, pv) in m[row][col..].iter_mut().zip(&pivot) {
                *x -= f * pv;
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; p];
    for col in (0..p).rev() {
        let mut acc = rhs[col];
        for c in col + 1..p {
            acc -= m[col][c] * x[c];
        }
        x[col] = acc / m[col][col];
        if !x[col].is_finite() {
            return None;
        }
    }
    for (xk, dk) in x.iter_mut().zip(&d) {
        *xk /= dk;
    }
    Some(x)
}

/// Asymptotic errors from `(JtJ)^-1`. With absolute weights (`1/se`) the
/// inverse is the covariance directly; on the unweighted path it is scaled
/// by the residual variance `cost / (n - p)`, so an exact fit reports zero.
fn standard_errors(
    family: FitFamily,
    jac: &[Vec<f64>],
    n_points: usize,
    n_params: usize,
    cost: f64,
    weights: &[f64],
) -> Result<Vec<f64>, EstimationError> {
    let a = normal_matrix(jac);
    let unweighted = weights.iter().all(|&w| w == 1.0);
    let scale = if unweighted {
        if n_points > n_params {
            cost / (n_points - n_params) as f64
        } else {
            0.0
        }
    } else {
        1.0
    };
    let mut errors = Vec::with_capacity(n_params);
    for k in 0..n_params {
        let mut m = a.clone();
        let mut e = vec![0.0; n_params];
        e[k] = 1.0;
        let col = solve(&mut m, e).ok_or(EstimationError::SingularJacobian { family })?;
        errors.push((col[k].max(0.0) * scale).sqrt());
    }
    Ok(errors)
}

/// The weighted RMS residual of a family at fixed parameters. Every row
/// must carry a positive standard error; zero-SE rows have no defined
/// weight and must be dropped by the caller first.
pub fn e_rms(
    family: FitFamily,
    params: &[f64],
    points: &[FitPoint],
) -> Result<f64, EstimationError> {
    if points.is_empty() {
        return Err(EstimationError::TooFewValues {
            what: "residual points",
            needed: 1,
            got: 0,
        });
    }
    for (row, pt) in points.iter().enumerate() {
        if pt.se.is_nan() || pt.se <= 0.0 {
            return Err(EstimationError::ZeroStandardError { row });
        }
    }
    let g = predict_all(family, params, points);
    let sum: f64 = g
        .iter()
        .zip(points)
        .map(|(g, pt)| {
            let r = (pt.y - g) / pt.se;
            r * r
        })
        .sum();
    Ok((sum / points.len() as f64).sqrt())
}

/// Data-driven starting point for a family.
///
/// Power laws start from ordinary least squares in log-log coordinates;
/// logarithmic laws from amplitude `max y` and slope `1 / median x`; book
/// families from a capacity of twice the largest observed fraction, a
/// moderate wing slope, and (when free) a linear near-quote profile.
pub fn default_init(family: FitFamily, points: &[FitPoint]) -> Result<Vec<f64>, EstimationError> {
    if points.is_empty() {
        return Err(EstimationError::TooFewValues {
            what: "fit points",
            needed: 1,
            got: 0,
        });
    }
    let max_y = points
        .iter()
        .map(|pt| pt.y)
        .fold(f64::NEG_INFINITY, f64::max)
        .max(1e-3);
    let max_x = points.iter().map(|pt| pt.x[0]).fold(0.0, f64::max);
    Ok(match family {
        FitFamily::PowerPi => {
            let rows: Vec<(f64, f64)> = points
                .iter()
                .filter(|pt| pt.x[0] > 0.0 && pt.y > 0.0)
                .map(|pt| (pt.x[0].ln(), pt.y.ln()))
                .collect();
            match ols_line(&rows) {
                Some((intercept, slope)) => vec![intercept.exp(), slope],
                None => vec![max_y, 0.5],
            }
        }
        FitFamily::LogPi => vec![max_y, 1.0 / median(points.iter().map(|pt| pt.x[0])).max(1e-12)],
        FitFamily::PowerEtaF => {
            let rows: Vec<([f64; 2], f64)> = points
                .iter()
                .filter(|pt| pt.x[0] > 0.0 && pt.x[1] > 0.0 && pt.y > 0.0)
                .map(|pt| ([pt.x[0].ln(), pt.x[1].ln()], pt.y.ln()))
                .collect();
            match ols_plane(&rows) {
                Some((intercept, s1, s2)) => vec![intercept.exp(), s1, s2],
                None => vec![max_y, 0.5, 0.5],
            }
        }
        FitFamily::LogEtaF => vec![
            max_y,
            1.0 / median(points.iter().map(|pt| pt.x[0])).max(1e-12),
            1.0 / median(points.iter().map(|pt| pt.x[1])).max(1e-12),
        ],
        FitFamily::BookN0 => vec![max_y, 5.0],
        // Start with the book able to absorb twice the largest fraction,
        // keeping the whole inversion away from saturation.
        FitFamily::BookN1 => vec![0.5 / max_x.max(1e-12), 5.0],
        FitFamily::BookNFree => vec![0.5 / max_x.max(1e-12), 5.0, 1.0],
    })
}

fn median(values: impl Iterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = values.collect();
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn ols_line(rows: &[(f64, f64)]) -> Option<(f64, f64)> {
    if rows.len() < 2 {
        return None;
    }
    let n = rows.len() as f64;
    let sx: f64 = rows.iter().map(|r| r.0).sum();
    let sy: f64 = rows.iter().map(|r| r.1).sum();
    let sxx: f64 = rows.iter().map(|r| r.0 * r.0).sum();
    let sxy: f64 = rows.iter().map(|r| r.0 * r.1).sum();
    let det = n * sxx - sx * sx;
    if det.abs() < 1e-12 * n * sxx.abs().max(1.0) {
        return None;
    }
    let slope = (n * sxy - sx * sy) / det;
    let intercept = (sy - slope * sx) / n;
    Some((intercept, slope))
}

fn ols_plane(rows: &[([f64; 2], f64)]) -> Option<(f64, f64, f64)> {
    if rows.len() < 3 {
        return None;
    }
    let mut a = vec![vec![0.0; 3]; 3];
    let mut rhs = vec![0.0; 3];
    for (x, y) in rows {
        let basis = [1.0, x[0], x[1]];
        for j in 0..3 {
            for k in 0..3 {
                a[j][k] += basis[j] * basis[k];
            }
            rhs[j] += basis[j] * y;
        }
    }
    let sol = solve(&mut a, rhs)?;
    Some((sol[0], sol[1], sol[2]))
}
