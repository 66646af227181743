//! Trajectory and decay shapes from per-order impact paths.
//!
//! Orders are compared in rescaled execution time `z = (v - v_start) / f`,
//! where execution covers `z` in [0, 1] and decay the tail beyond. Paths
//! stop at the session close, so decay averages at large `z` draw on fewer
//! orders; every output row carries its own count to keep that visible.

use super::{equal_count_bins, EstimationError};
use crate::market::{ExecutionDescriptors, ImpactSeries};
use serde::Serialize;

/// Grid resolution of trajectory and decay curves.
const GRID_POINTS: usize = 60;

/// Completion impacts smaller than this cannot renormalize a decay path.
const RENORM_FLOOR: f64 = 1e-9;

// Completion boundaries reconstructed from measured descriptors can land a
// half-ulp past 1, where the closed forms have an infinite-slope branch.
const Z_SNAP: f64 = 1e-12;

/// One order's impact path against rescaled execution time.
#[derive(Debug, Clone, Serialize)]
pub struct OrderPath {
    pub eta: f64,
    pub duration_f: f64,
    /// `(z, impact)` samples, `z` increasing from 0 (the order start).
    pub points: Vec<(f64, f64)>,
}

/// Rescales a measured impact series by the order's own duration.
pub fn order_path(series: &ImpactSeries, d: &ExecutionDescriptors) -> OrderPath {
    let f = series.v_end - series.v_start;
    let points = series
        .points
        .iter()
        .map(|&(v, impact)| {
            let z = (v - series.v_start) / f;
            let z = if (z - 1.0).abs() < Z_SNAP { 1.0 } else { z };
            (z, impact)
        })
        .collect();
    OrderPath {
        eta: d.eta,
        duration_f: d.duration,
        points,
    }
}

impl OrderPath {
    /// Linear interpolation on the path, `None` outside its support.
    /// Exact sample abscissae return the sample value bit for bit, which is
    /// what keeps renormalized decay curves exactly 1 at completion.
    pub fn value_at(&self, z: f64) -> Option<f64> {
        let pts = &self.points;
        let n = pts.len();
        if n == 0 || z < pts[0].0 || z > pts[n - 1].0 {
            return None;
        }
        let idx = pts.partition_point(|&(x, _)| x <= z);
        if idx == 0 {
            return Some(pts[0].1);
        }
        let (x0, y0) = pts[idx - 1];
        if z == x0 {
            return Some(y0);
        }
        let (x1, y1) = pts[idx];
        Some(y0 + (y1 - y0) * (z - x0) / (x1 - x0))
    }
}

/// Mean impact during execution for one duration bin, with the bin's mean
/// completion impact as a temporary-impact marker.
#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryCurve {
    pub eta_mean: f64,
    pub f_mean: f64,
    pub orders: usize,
    /// `(volume time since the start, mean impact, standard error)`;
    /// the time axis is `z * f_mean` so bins of different duration spread
    /// out as they do on a tape.
    pub points: Vec<(f64, f64, f64)>,
    /// Mean impact at completion, to plot at `f_mean`.
    pub marker_impact: f64,
    pub marker_se: f64,
}

/// Averages execution trajectories of the orders with `eta` inside
/// `eta_range` (closed), one curve per equal-count duration bin.
///
/// Each order is interpolated onto a shared grid in rescaled time, so every
/// order in a bin contributes to every grid point and the curve's endpoint
/// is exactly the bin's completion-impact marker. Single-order bins report
/// zero standard error.
pub fn trajectory_curves(
    paths: &[OrderPath],
    eta_range: (f64, f64),
    n_f_bins: usize,
) -> Result<Vec<TrajectoryCurve>, EstimationError> {
    if eta_range.0.is_nan() || eta_range.1.is_nan() || eta_range.0 > eta_range.1 {
        return Err(EstimationError::Parameter {
            name: "eta_range",
            value: eta_range.0,
            requirement: "lower bound <= upper bound",
        });
    }
    let selected: Vec<&OrderPath> = paths
        .iter()
        .filter(|p| p.eta >= eta_range.0 && p.eta <= eta_range.1)
        .collect();
    let durations: Vec<f64> = selected.iter().map(|p| p.duration_f).collect();
    let labels = equal_count_bins(&durations, n_f_bins)?;

    let mut curves = Vec::with_capacity(n_f_bins);
    for bin in 0..n_f_bins {
        let members: Vec<&OrderPath> = selected
            .iter()
            .zip(&labels)
            .filter(|&(_, &l)| l == bin)
            .map(|(&p, _)| p)
            .collect();
        let eta_mean = members.iter().map(|p| p.eta).sum::<f64>() / members.len() as f64;
        let f_mean = members.iter().map(|p| p.duration_f).sum::<f64>() / members.len() as f64;

        let mut points = Vec::with_capacity(GRID_POINTS);
        let mut marker = (0.0, 0.0);
        for k in 1..=GRID_POINTS {
            let z = k as f64 / GRID_POINTS as f64;
            // Execution covers every path's support up to z = 1: values
            // exist for all members.
            let values: Vec<f64> = members
                .iter()
                .map(|p| p.value_at(z).expect("execution grid inside path support"))
                .collect();
            let (mean, se) = mean_se(&values);
            points.push((z * f_mean, mean, se));
            if k == GRID_POINTS {
                marker = (mean, se);
            }
        }
        curves.push(TrajectoryCurve {
            eta_mean,
            f_mean,
            orders: members.len(),
            points,
            marker_impact: marker.0,
            marker_se: marker.1,
        });
    }
    Ok(curves)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DecayPoint {
    pub z: f64,
    pub i_ren: f64,
    pub se: f64,
    /// Orders still observable at this `z`; shrinks near the session close.
    pub count: usize,
}

/// Mean renormalized decay `impact(z) / impact(1)` for one descriptor cell.
#[derive(Debug, Clone, Serialize)]
pub struct DecayCurve {
    pub eta_mean: f64,
    pub f_mean: f64,
    pub orders: usize,
    /// Orders dropped because their completion impact was too small to
    /// renormalize by.
    pub excluded: usize,
    pub points: Vec<DecayPoint>,
}

/// Renormalized decay curves per (participation, duration) cell.
///
/// Orders get independent equal-count labels in `eta` and in duration; each
/// populated cell averages its members' `impact(z) / impact(1)` on a shared
/// grid of 60 points up to `horizon_multiple` durations. The grid contains
/// `z = 1` exactly, where every curve equals 1 by construction. Orders with
/// `|impact(1)|` below 1e-9 are excluded from the averages and counted.
/// Pass one bin each way for a single population-wide curve.
pub fn decay_curves(
    paths: &[OrderPath],
    n_eta_bins: usize,
    n_f_bins: usize,
    horizon_multiple: f64,
) -> Result<Vec<DecayCurve>, EstimationError> {
    if !horizon_multiple.is_finite() || horizon_multiple < 1.0 {
        return Err(EstimationError::Parameter {
            name: "horizon_multiple",
            value: horizon_multiple,
            requirement: ">= 1 so the grid reaches completion",
        });
    }
    let etas: Vec<f64> = paths.iter().map(|p| p.eta).collect();
    let durations: Vec<f64> = paths.iter().map(|p| p.duration_f).collect();
    let eta_labels = equal_count_bins(&etas, n_eta_bins)?;
    let f_labels = equal_count_bins(&durations, n_f_bins)?;

    let mut grid: Vec<f64> = (1..=GRID_POINTS)
        .map(|k| k as f64 * horizon_multiple / GRID_POINTS as f64)
        .collect();
    // Force completion onto the grid; at the default multiple of 3 the
    // twentieth point is already exactly 1.
    let nearest = grid
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| (*a - 1.0).abs().total_cmp(&(*b - 1.0).abs()))
        .map(|(i, _)| i)
        .expect("grid is nonempty");
    grid[nearest] = 1.0;

    let mut curves = Vec::new();
    for le in 0..n_eta_bins {
        for lf in 0..n_f_bins {
            let members: Vec<&OrderPath> = paths
                .iter()
                .zip(eta_labels.iter().zip(&f_labels))
                .filter(|&(_, (&e, &f))| e == le && f == lf)
                .map(|(p, _)| p)
                .collect();
            if members.is_empty() {
                continue;
            }
            let mut excluded = 0usize;
            let mut kept = Vec::with_capacity(members.len());
            for p in members {
                let i1 = p.value_at(1.0).expect("completion inside path support");
                if i1.abs() < RENORM_FLOOR {
                    excluded += 1;
                } else {
                    kept.push((p, i1));
                }
            }
            if kept.is_empty() {
                continue;
            }
            let eta_mean = kept.iter().map(|(p, _)| p.eta).sum::<f64>() / kept.len() as f64;
            let f_mean =
                kept.iter().map(|(p, _)| p.duration_f).sum::<f64>() / kept.len() as f64;

            let mut points = Vec::with_capacity(GRID_POINTS);
            for &z in &grid {
                let values: Vec<f64> = kept
                    .iter()
                    .filter_map(|(p, i1)| p.value_at(z).map(|v| v / i1))
                    .collect();
                if values.is_empty() {
                    continue;
                }
                let (i_ren, se) = mean_se(&values);
                points.push(DecayPoint {
                    z,
                    i_ren,
                    se,
                    count: values.len(),
                });
            }
            curves.push(DecayCurve {
                eta_mean,
                f_mean,
                orders: kept.len(),
                excluded,
                points,
            });
        }
    }
    Ok(curves)
}

fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt() / n.sqrt())
}
