//! Truncated power-law sampling by inverse CDF.

use rand::Rng;

use super::SynthError;

/// Draw from the density proportional to `x^exponent` on `[lo, hi]`.
///
/// The inverse CDF is evaluated in log space: for `t = (a+1) ln(hi/lo)`,
///
/// `x = lo * exp(ln(1 + u (e^t - 1)) / (a + 1))`
///
/// which stays accurate when `a` is close to the logarithmic case `a = -1`
/// (where the draw degrades smoothly to log-uniform) and when the interval
/// is narrow.
pub fn sample_trunc_power<R: Rng + ?Sized>(
    exponent: f64,
    lo: f64,
    hi: f64,
    rng: &mut R,
) -> Result<f64, SynthError> {
    if !exponent.is_finite() {
        return Err(SynthError::Parameter {
            name: "exponent",
            value: exponent,
            requirement: "finite",
        });
    }
    if !lo.is_finite() || lo <= 0.0 {
        return Err(SynthError::Parameter { name: "lo", value: lo, requirement: "> 0" });
    }
    if !hi.is_finite() || hi <= lo {
        return Err(SynthError::Parameter { name: "hi", value: hi, requirement: "> lo" });
    }
    let u: f64 = rng.gen();
    let span = (hi / lo).ln();
    if exponent == -1.0 {
        return Ok(lo * (u * span).exp());
    }
    let ap1 = exponent + 1.0;
    let t = ap1 * span;
    Ok(lo * ((u * t.exp_m1()).ln_1p() / ap1).exp())
}
