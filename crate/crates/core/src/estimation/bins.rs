//! Evenly-populated binning of per-order samples.
//!
//! Impact grows slowly (roughly as a square root) while participations and
//! durations span decades, so equal-width bins starve one end of the curve.
//! Equal-count bins keep every row's standard error comparable.

use super::EstimationError;
use serde::Serialize;

/// One row of a binned curve: the bin's sample means and the standard error
/// of the impact mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveRow {
    pub x_mean: f64,
    pub impact_mean: f64,
    pub impact_se: f64,
    pub count: usize,
}

/// Binned impact means against a scalar descriptor, rows in ascending
/// `x_mean`, every row holding at least two samples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinnedCurve {
    pub rows: Vec<CurveRow>,
}

impl BinnedCurve {
    /// Rows as weighted fit points for a one-variable family.
    pub fn fit_points(&self) -> Vec<super::FitPoint> {
        self.rows
            .iter()
            .map(|r| super::FitPoint {
                x: [r.x_mean, 0.0],
                y: r.impact_mean,
                se: r.impact_se,
            })
            .collect()
    }
}

/// Assigns each value to one of `n_bins` bins of near-equal population.
///
/// Values are ranked by a stable sort (ties keep input order) and split so
/// that populations differ by at most one, any remainder going to the
/// leftmost bins: 7 values in 3 bins gives populations (3, 2, 2). Returns
/// the bin index of each input value.
pub fn equal_count_bins(values: &[f64], n_bins: usize) -> Result<Vec<usize>, EstimationError> {
    if n_bins == 0 || values.len() < n_bins {
        return Err(EstimationError::TooFewValues {
            what: "equal-count binning",
            needed: n_bins.max(1),
            got: values.len(),
        });
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));

    let base = values.len() / n_bins;
    let remainder = values.len() % n_bins;
    let mut labels = vec![0usize; values.len()];
    let mut next = 0usize;
    for bin in 0..n_bins {
        let size = base + usize::from(bin < remainder);
        for &i in &order[next..next + size] {
            labels[i] = bin;
        }
        next += size;
    }
    Ok(labels)
}

/// Bins `(x, impact)` samples into `n_bins` equal-count bins and reduces each
/// to its means. Bins left with fewer than two samples have no standard
/// error and are dropped with a warning.
pub fn impact_curve(samples: &[(f64, f64)], n_bins: usize) -> Result<BinnedCurve, EstimationError> {
    let xs: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let labels = equal_count_bins(&xs, n_bins)?;
    reduce_bins(samples, &labels, n_bins)
}

/// Like [`impact_curve`] but with caller-fixed bin edges, so two populations
/// can be compared row by row. `edges` must be strictly increasing; samples
/// fall in `[edges[j], edges[j+1])` (last bin closed above) and samples
/// outside `[edges[0], edges[n])` are ignored.
pub fn impact_curve_with_edges(
    samples: &[(f64, f64)],
    edges: &[f64],
) -> Result<BinnedCurve, EstimationError> {
    if edges.len() < 2 {
        return Err(EstimationError::TooFewValues {
            what: "bin edges",
            needed: 2,
            got: edges.len(),
        });
    }
    for w in edges.windows(2) {
        if w[0].is_nan() || w[1].is_nan() || w[1] <= w[0] {
            return Err(EstimationError::Parameter {
                name: "edges",
                value: w[1],
                requirement: "strictly increasing",
            });
        }
    }
    let n_bins = edges.len() - 1;
    let last = edges[n_bins];
    let mut kept = Vec::with_capacity(samples.len());
    let mut labels = Vec::with_capacity(samples.len());
    for &(x, y) in samples {
        if x < edges[0] || x > last {
            continue;
        }
        let bin = if x == last {
            n_bins - 1
        } else {
            edges.partition_point(|&e| e <= x) - 1
        };
        kept.push((x, y));
        labels.push(bin);
    }
    reduce_bins(&kept, &labels, n_bins)
}

fn reduce_bins(
    samples: &[(f64, f64)],
    labels: &[usize],
    n_bins: usize,
) -> Result<BinnedCurve, EstimationError> {
    let mut sums = vec![(0.0f64, 0.0f64, 0usize); n_bins];
    for (&(x, y), &bin) in samples.iter().zip(labels) {
        sums[bin].0 += x;
        sums[bin].1 += y;
        sums[bin].2 += 1;
    }
    let mut rows = Vec::with_capacity(n_bins);
    let mut dropped = 0usize;
    for (bin, &(sx, sy, n)) in sums.iter().enumerate() {
        if n < 2 {
            dropped += 1;
            continue;
        }
        let x_mean = sx / n as f64;
        let impact_mean = sy / n as f64;
        let ss: f64 = samples
            .iter()
            .zip(labels)
            .filter(|&(_, &b)| b == bin)
            .map(|(&(_, y), _)| (y - impact_mean) * (y - impact_mean))
            .sum();
        let impact_se = (ss / (n as f64 - 1.0)).sqrt() / (n as f64).sqrt();
        rows.push(CurveRow {
            x_mean,
            impact_mean,
            impact_se,
            count: n,
        });
    }
    if dropped > 0 {
        log::warn!("{dropped} of {n_bins} bins hold fewer than two samples and were dropped");
    }
    if rows.is_empty() {
        return Err(EstimationError::TooFewValues {
            what: "populated bins",
            needed: 1,
            got: 0,
        });
    }
    rows.sort_by(|a, b| a.x_mean.total_cmp(&b.x_mean));
    Ok(BinnedCurve { rows })
}
