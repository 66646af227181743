//! Latent order book profiles and the impact law they imply.
//!
//! The book holds volume `V(x) = x^n exp(bx) / (Y D)` at log-price offset
//! `x in [0, 1]`, with `D` normalizing the shape integral to 1 so the whole
//! book holds exactly `1/Y` of the daily volume. A metaorder of daily
//! fraction `pi` eats the book up to the offset `I` where the consumed
//! volume equals `pi`; that offset is the impact. `n` tilts the profile near
//! the best quote (polynomial growth), `b` controls the exponential far
//! wing, and their interplay decides whether impact looks square-root,
//! linear, or logarithmic.
//!
//! For `n = 0` inversion is elementary and gives a logarithm in `pi`. Two
//! versions coexist deliberately: [`invert_impact`] solves the integral
//! equation exactly as stated (for `n = 0` this yields
//! `ln(1 + Y c pi) / ln(1 + c)`), while [`impact_log_closed`] is the
//! three-parameter fit family `Y ln(1 + c pi) / ln(1 + c)` used by the
//! estimation code, with the depth normalizer outside the logarithm. They
//! coincide at `Y = 1` and are intentionally not reconciled elsewhere.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::specfn::{integrate, QuadratureSpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BookError {
    #[error("{name} = {value} outside its domain ({requirement})")]
    Parameter {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },
    #[error("log-price offset x = {0} outside [0, 1]")]
    OffsetOutOfRange(f64),
    #[error("order of daily fraction {pi} exceeds the book capacity {capacity}")]
    Saturated { pi: f64, capacity: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BookParams {
    /// Depth normalizer; the book's total capacity is `1 / y_norm`.
    pub y_norm: f64,
    /// Exponential slope of the far wing.
    pub b: f64,
    /// Polynomial exponent near the best quote.
    pub n: f64,
}

impl BookParams {
    pub fn new(y_norm: f64, b: f64, n: f64) -> Result<Self, BookError> {
        let p = BookParams { y_norm, b, n };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), BookError> {
        let check = |name, value: f64, ok: bool, requirement| {
            if value.is_finite() && ok {
                Ok(())
            } else {
                Err(BookError::Parameter { name, value, requirement })
            }
        };
        check("y_norm", self.y_norm, self.y_norm > 0.0, "> 0")?;
        // exp(b) must stay representable; the far wing is astronomically
        // steep long before this bound matters.
        check("b", self.b, self.b > 0.0 && self.b <= 700.0, "in (0, 700]")?;
        check("n", self.n, self.n >= 0.0, ">= 0")
    }

    /// Crossover constant `c = exp(b) - 1` separating the linear and
    /// logarithmic regimes of the implied impact.
    pub fn c(&self) -> f64 {
        self.b.exp_m1()
    }

    /// Largest daily fraction the book can absorb.
    pub fn capacity(&self) -> f64 {
        1.0 / self.y_norm
    }

    // Shape integral over [0, 1], the denominator of the profile.
    fn shape_norm(&self) -> f64 {
        if self.n == 0.0 {
            return self.b.exp_m1() / self.b;
        }
        let (b, n) = (self.b, self.n);
        let spec = QuadratureSpec::new(move |y: f64| y.powf(n) * (b * y).exp(), 0.0, 1.0)
            .rel_tol(1e-13)
            .lower_exponent(n);
        // Smooth positive integrand on the unit interval: cannot fail.
        integrate(spec).expect("shape integral").value
    }
}

/// Book depth at log-price offset `x`.
pub fn book_profile(p: &BookParams, x: f64) -> Result<f64, BookError> {
    p.validate()?;
    if !x.is_finite() || !(0.0..=1.0).contains(&x) {
        return Err(BookError::OffsetOutOfRange(x));
    }
    Ok(x.powf(p.n) * (p.b * x).exp() / (p.y_norm * p.shape_norm()))
}

const DEPTH_CELLS: usize = 10_000;

// 5-point Gauss-Legendre on [-1, 1]; per-cell quadrature of the smooth
// unnormalized depth, exact to rounding at cell widths of 1e-4.
const GL5: [(f64, f64); 5] = [
    (-0.906_179_845_938_664, 0.2369268850561891),
    (-0.5384693101056831, 0.4786286704993665),
    (0.0, 0.5688888888888889),
    (0.5384693101056831, 0.4786286704993665),
    (0.906_179_845_938_664, 0.2369268850561891),
];

/// Cumulative depth of a book, tabulated once so that repeated inversions
/// (the fit loop does thousands) cost a table lookup plus a few Newton
/// steps.
#[derive(Debug, Clone)]
pub struct BookDepth {
    params: BookParams,
    // Unnormalized cumulative integral of x^n exp(bx) at i / DEPTH_CELLS.
    cum: Vec<f64>,
}

impl BookDepth {
    pub fn new(params: &BookParams) -> Result<Self, BookError> {
        params.validate()?;
        let h = 1.0 / DEPTH_CELLS as f64;
        let mut cum = Vec::with_capacity(DEPTH_CELLS + 1);
        cum.push(0.0);
        // First cell by series: x^n has unbounded derivatives at 0 for
        // fractional n, where Gauss nodes lose accuracy.
        let mut acc = head_integral(params, h);
        cum.push(acc);
        for i in 1..DEPTH_CELLS {
            acc += gl5_cell(params, i as f64 * h, (i + 1) as f64 * h);
            cum.push(acc);
        }
        Ok(BookDepth { params: *params, cum })
    }

    pub fn params(&self) -> &BookParams {
        &self.params
    }

    pub fn capacity(&self) -> f64 {
        self.params.capacity()
    }

    /// The impact `I` solving `pi = integral of the profile over [0, I]`.
    pub fn invert(&self, pi: f64) -> Result<f64, BookError> {
        if !pi.is_finite() || pi < 0.0 {
            return Err(BookError::Parameter {
                name: "pi",
                value: pi,
                requirement: ">= 0",
            });
        }
        let total = *self.cum.last().unwrap();
        // Unnormalized target: pi = U / (y_norm * D) with D = total.
        let target = pi * self.params.y_norm * total;
        if target > total {
            return Err(BookError::Saturated { pi, capacity: self.params.capacity() });
        }
        if target == 0.0 {
            return Ok(0.0);
        }
        if target == total {
            return Ok(1.0);
        }

        let cell = self.cum.partition_point(|&c| c < target).min(DEPTH_CELLS) - 1;
        let h = 1.0 / DEPTH_CELLS as f64;
        let (lo, hi) = (cell as f64 * h, (cell + 1) as f64 * h);
        let residual = target - self.cum[cell];
        // Newton on g(I) = cell integral up to I minus residual, with a
        // bisection bracket for safety; g' is the unnormalized depth.
        let mut a = lo;
        let mut b = hi;
        let mut x = 0.5 * (lo + hi);
        for _ in 0..80 {
            let g = self.partial_cell(cell, x) - residual;
            if g > 0.0 {
                b = x;
            } else {
                a = x;
            }
            let slope = unnormalized_depth(&self.params, x);
            let mut next = x - g / slope;
            if !(next > a && next < b) {
                next = 0.5 * (a + b);
            }
            if (next - x).abs() <= 1e-15 {
                return Ok(next);
            }
            x = next;
        }
        Ok(x)
    }

    // Integral of the unnormalized depth over [cell start, x].
    fn partial_cell(&self, cell: usize, x: f64) -> f64 {
        if cell == 0 {
            head_integral(&self.params, x)
        } else {
            gl5_cell(&self.params, cell as f64 / DEPTH_CELLS as f64, x)
        }
    }
}

fn unnormalized_depth(p: &BookParams, x: f64) -> f64 {
    x.powf(p.n) * (p.b * x).exp()
}

fn gl5_cell(p: &BookParams, lo: f64, hi: f64) -> f64 {
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut sum = 0.0;
    for (node, weight) in GL5 {
        sum += weight * unnormalized_depth(p, mid + half * node);
    }
    sum * half
}

// integral of x^n e^{bx} over [0, h] = h^{n+1} sum_k (bh)^k / (k! (n+k+1)),
// exact for the tiny head cell where bh << 1.
fn head_integral(p: &BookParams, h: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0 / (p.n + 1.0);
    for k in 1..60 {
        term *= p.b * h / k as f64;
        let add = term / (p.n + k as f64 + 1.0);
        sum += add;
        if add.abs() <= f64::EPSILON * sum.abs() {
            break;
        }
    }
    h.powf(p.n + 1.0) * sum
}

/// One-shot inversion; builds the cumulative table each call. Use
/// [`BookDepth`] directly when inverting many `pi` against one book.
pub fn invert_impact(p: &BookParams, pi: f64) -> Result<f64, BookError> {
    BookDepth::new(p)?.invert(pi)
}

/// Logarithmic impact fit family `Y ln(1 + c pi) / ln(1 + c)`, `c = e^b - 1`,
/// with the depth normalizer outside the logarithm. Linear in `pi` below
/// `pi ~ 1/c`, logarithmic above. Expects `b > 0` and `pi >= 0`.
pub fn impact_log_closed(y_norm: f64, b: f64, pi: f64) -> f64 {
    let c = b.exp_m1();
    y_norm * (c * pi).ln_1p() / c.ln_1p()
}
