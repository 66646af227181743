//! Log-gamma and digamma on the real axis, including negative arguments.

use std::f64::consts::PI;

/// Lanczos coefficients for g = 7, giving close to machine precision on the
/// right half plane.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of |Gamma(x)| together with the sign of Gamma(x).
///
/// Returns `(f64::INFINITY, 0.0)` at the poles (x a non-positive integer);
/// callers that divide by Gamma treat that as an exact zero coefficient.
pub(crate) fn ln_gamma_sign(x: f64) -> (f64, f64) {
    if x >= 0.5 {
        return (lanczos_ln_gamma(x), 1.0);
    }
    // Reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x).
    let sin_pi = sin_pi(x);
    if sin_pi == 0.0 {
        return (f64::INFINITY, 0.0);
    }
    let (lg, _) = ln_gamma_sign(1.0 - x);
    ((PI / sin_pi.abs()).ln() - lg, sin_pi.signum())
}

fn lanczos_ln_gamma(x: f64) -> f64 {
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// sin(pi x) computed via argument reduction so that integer x gives exactly 0.
fn sin_pi(x: f64) -> f64 {
    let n = x.floor();
    let r = x - n;
    if r == 0.0 {
        return 0.0;
    }
    // Magnitude from the well-conditioned half of the period; the parity of n
    // restores the sign: sin(pi (n + r)) = (-1)^n sin(pi r).
    let mag = if r <= 0.5 {
        (PI * r).sin()
    } else {
        (PI * (1.0 - r)).sin()
    };
    if n.rem_euclid(2.0) == 0.0 {
        mag
    } else {
        -mag
    }
}

/// Digamma (psi) function for real non-pole arguments.
pub(crate) fn digamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        return f64::NAN;
    }
    if x < 0.5 {
        // psi(x) = psi(1 - x) - pi cot(pi x)
        let r = x - x.floor();
        return digamma(1.0 - x) - PI / (PI * r).tan();
    }
    // Shift into the asymptotic regime.
    let mut acc = 0.0;
    let mut y = x;
    while y < 10.0 {
        acc -= 1.0 / y;
        y += 1.0;
    }
    // Asymptotic series with Bernoulli-number coefficients.
    let inv2 = 1.0 / (y * y);
    let series = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 / 132.0))));
    acc + y.ln() - 0.5 / y - series
}
