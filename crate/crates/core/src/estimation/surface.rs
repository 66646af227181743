//! Impact surfaces over participation and duration.
//!
//! A surface keeps `eta` and `f` separate instead of collapsing them into
//! `pi = eta * f`, which is what distinguishes models that factorize from
//! models that only depend on the product. The grid uses independent
//! equal-count labels per axis, so marginal populations are even while
//! individual cells may stay thin or empty; empty cells are flagged, never
//! imputed.

use super::{
    default_init, equal_count_bins, weighted_nls, EstimationError, FitFamily, FitPoint, FitResult,
};
use serde::Serialize;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SurfaceCell {
    pub eta_mean: f64,
    pub f_mean: f64,
    pub impact_mean: f64,
    pub impact_se: f64,
    pub count: usize,
}

/// Rectangular grid of cell statistics. `cells[i][j]` covers eta bin `i`
/// and duration bin `j`; cells holding fewer than two samples are `None`.
#[derive(Debug, Clone, Serialize)]
pub struct SurfaceGrid {
    pub eta_edges: Vec<f64>,
    pub f_edges: Vec<f64>,
    pub cells: Vec<Vec<Option<SurfaceCell>>>,
}

impl SurfaceGrid {
    pub fn n_eta(&self) -> usize {
        self.cells.len()
    }

    pub fn n_f(&self) -> usize {
        self.cells.first().map_or(0, |row| row.len())
    }

    /// Populated cells as weighted fit points for a surface family.
    pub fn fit_points(&self) -> Vec<FitPoint> {
        self.cells
            .iter()
            .flatten()
            .flatten()
            .map(|c| FitPoint {
                x: [c.eta_mean, c.f_mean],
                y: c.impact_mean,
                se: c.impact_se,
            })
            .collect()
    }
}

/// Reduces `(eta, f, impact)` samples to an `n_eta` by `n_f` grid of cell
/// means under independent equal-count labels per axis.
pub fn build_grid(
    samples: &[(f64, f64, f64)],
    n_eta: usize,
    n_f: usize,
) -> Result<SurfaceGrid, EstimationError> {
    let etas: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let fs: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let eta_labels = equal_count_bins(&etas, n_eta)?;
    let f_labels = equal_count_bins(&fs, n_f)?;

    let mut count = vec![vec![0usize; n_f]; n_eta];
    let mut sums = vec![vec![[0.0f64; 3]; n_f]; n_eta];
    for (s, (&le, &lf)) in samples.iter().zip(eta_labels.iter().zip(&f_labels)) {
        count[le][lf] += 1;
        sums[le][lf][0] += s.0;
        sums[le][lf][1] += s.1;
        sums[le][lf][2] += s.2;
    }
    let mut ss = vec![vec![0.0f64; n_f]; n_eta];
    for (s, (&le, &lf)) in samples.iter().zip(eta_labels.iter().zip(&f_labels)) {
        let mean = sums[le][lf][2] / count[le][lf] as f64;
        ss[le][lf] += (s.2 - mean) * (s.2 - mean);
    }

    let cells = (0..n_eta)
        .map(|i| {
            (0..n_f)
                .map(|j| {
                    let n = count[i][j];
                    if n < 2 {
                        return None;
                    }
                    let nf = n as f64;
                    Some(SurfaceCell {
                        eta_mean: sums[i][j][0] / nf,
                        f_mean: sums[i][j][1] / nf,
                        impact_mean: sums[i][j][2] / nf,
                        impact_se: (ss[i][j] / (nf - 1.0)).sqrt() / nf.sqrt(),
                        count: n,
                    })
                })
                .collect()
        })
        .collect();
    Ok(SurfaceGrid {
        eta_edges: edges(&etas, &eta_labels, n_eta),
        f_edges: edges(&fs, &f_labels, n_f),
        cells,
    })
}

// Reporting edges: bin extremes, interior edges halfway between neighboring
// bins' closest members.
fn edges(values: &[f64], labels: &[usize], n_bins: usize) -> Vec<f64> {
    let mut lo = vec![f64::INFINITY; n_bins];
    let mut hi = vec![f64::NEG_INFINITY; n_bins];
    for (&v, &l) in values.iter().zip(labels) {
        lo[l] = lo[l].min(v);
        hi[l] = hi[l].max(v);
    }
    let mut edges = Vec::with_capacity(n_bins + 1);
    edges.push(lo[0]);
    for b in 1..n_bins {
        edges.push(0.5 * (hi[b - 1] + lo[b]));
    }
    edges.push(hi[n_bins - 1]);
    edges
}

/// Grids the samples and fits a surface family to the populated cell means.
/// `init` falls back to [`default_init`] over the cells.
pub fn fit_surface(
    samples: &[(f64, f64, f64)],
    n_eta: usize,
    n_f: usize,
    family: FitFamily,
    init: Option<&[f64]>,
) -> Result<(SurfaceGrid, FitResult), EstimationError> {
    if !family.is_surface() {
        return Err(EstimationError::Parameter {
            name: "family",
            value: f64::NAN,
            requirement: "a surface family over (eta, f)",
        });
    }
    let grid = build_grid(samples, n_eta, n_f)?;
    let points = grid.fit_points();
    let start = match init {
        Some(p) => p.to_vec(),
        None => default_init(family, &points)?,
    };
    let fit = weighted_nls(family, &points, &start)?;
    Ok((grid, fit))
}

/// Standardized residual `(mean - model) / se` per populated cell; `None`
/// where the cell is empty or carries no standard error to judge against.
pub fn residual_map(grid: &SurfaceGrid, fit: &FitResult) -> Vec<Vec<Option<f64>>> {
    grid.cells
        .iter()
        .map(|row| {
            row.iter()
                .map(|cell| {
                    let c = cell.as_ref()?;
                    if c.impact_se == 0.0 {
                        return None;
                    }
                    Some((c.impact_mean - fit.predict([c.eta_mean, c.f_mean])) / c.impact_se)
                })
                .collect()
        })
        .collect()
}

/// Per-cell power-law exponents from windowed local fits.
#[derive(Debug, Clone, Serialize)]
pub struct LocalExponents {
    pub grid: SurfaceGrid,
    /// Participation exponent per cell.
    pub delta: Vec<Vec<Option<f64>>>,
    /// Duration exponent per cell.
    pub gamma1: Vec<Vec<Option<f64>>>,
}

/// Fits `y * eta^delta * f^gamma1` on a window of cells around each grid
/// position, exposing how the exponents drift across the surface.
///
/// `window` is the full width in cells (5 means the center plus two each
/// way), truncated at the grid border. Positions whose window holds fewer
/// populated cells than parameters, or only a single distinct `eta` or `f`
/// (no slope to measure), are flagged `None`, as are windows whose local
/// fit fails; failures are logged.
pub fn local_exponent_map(
    samples: &[(f64, f64, f64)],
    n_eta: usize,
    n_f: usize,
    window: usize,
) -> Result<LocalExponents, EstimationError> {
    if window == 0 {
        return Err(EstimationError::Parameter {
            name: "window",
            value: 0.0,
            requirement: ">= 1 cell",
        });
    }
    let grid = build_grid(samples, n_eta, n_f)?;
    let half = window / 2;
    let mut delta = vec![vec![None; n_f]; n_eta];
    let mut gamma1 = vec![vec![None; n_f]; n_eta];
    for i in 0..n_eta {
        for j in 0..n_f {
            let mut points = Vec::new();
            for row in grid.cells[i.saturating_sub(half)..(i + half + 1).min(n_eta)].iter() {
                for cell in row[j.saturating_sub(half)..(j + half + 1).min(n_f)].iter().flatten() {
                    points.push(FitPoint {
                        x: [cell.eta_mean, cell.f_mean],
                        y: cell.impact_mean,
                        se: cell.impact_se,
                    });
                }
            }
            if points.len() < 3 || is_degenerate(&points) {
                continue;
            }
            let init = default_init(FitFamily::PowerEtaF, &points)?;
            match weighted_nls(FitFamily::PowerEtaF, &points, &init) {
                Ok(fit) => {
                    delta[i][j] = Some(fit.params[1]);
                    gamma1[i][j] = Some(fit.params[2]);
                }
                Err(err) => log::warn!("local exponent fit at cell ({i}, {j}) failed: {err}"),
            }
        }
    }
    Ok(LocalExponents { grid, delta, gamma1 })
}

fn is_degenerate(points: &[FitPoint]) -> bool {
    let first = points[0].x;
    points.iter().all(|p| p.x[0] == first[0]) || points.iter().all(|p| p.x[1] == first[1])
}
