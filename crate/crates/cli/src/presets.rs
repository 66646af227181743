//! Named impact laws for exercising the fitting pipeline without data.
//!
//! Coefficients sit in the range that fits over large execution datasets
//! tend to land in, so preset-driven runs produce plausible magnitudes,
//! but they are illustrations, not measurements.

use clap::ValueEnum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// `0.15 pi^0.47`
    CurvePower,
    /// `0.028 log10(1 + 465 pi)`
    CurveLog,
    /// `0.207 eta^0.52 f^0.54`
    SurfacePower,
    /// `0.035 log10(1 + 60 eta) log10(1 + 61 f)`
    SurfaceLog,
}

impl Preset {
    pub fn is_surface(self) -> bool {
        matches!(self, Preset::SurfacePower | Preset::SurfaceLog)
    }

    pub fn eval_curve(self, pi: f64) -> f64 {
        match self {
            Preset::CurvePower => 0.15 * pi.powf(0.47),
            Preset::CurveLog => 0.028 * (465.0 * pi).ln_1p() / std::f64::consts::LN_10,
            _ => unreachable!("surface preset evaluated as a curve"),
        }
    }

    pub fn eval_surface(self, eta: f64, f: f64) -> f64 {
        match self {
            Preset::SurfacePower => 0.207 * eta.powf(0.52) * f.powf(0.54),
            Preset::SurfaceLog => {
                let l10 = std::f64::consts::LN_10;
                0.035 * (60.0 * eta).ln_1p() / l10 * (61.0 * f).ln_1p() / l10
            }
            _ => unreachable!("curve preset evaluated as a surface"),
        }
    }
}
