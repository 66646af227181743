//! Metaorder populations: who trades, how much, for how long, and which way.
//!
//! Participation rates and durations are drawn from truncated power laws and
//! are independent of each other. Order signs are correlated through a daily
//! "mood": each day flips a fair coin, and every order matches that day's
//! mood with probability `r` chosen so that two orders picked at random from
//! the same day agree in sign with the configured probability.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{sample_trunc_power, SynthError};
use crate::market::Sign;
use crate::models::{alpha_temporary, PropagatorParams};

/// Density proportional to `x^exponent` on `[lower, upper]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncPowerLaw {
    pub exponent: f64,
    pub lower: f64,
    pub upper: f64,
}

impl TruncPowerLaw {
    pub fn new(exponent: f64, lower: f64, upper: f64) -> Self {
        TruncPowerLaw { exponent, lower, upper }
    }

    /// Bounds must sit inside (0, 1]: both participation and duration are
    /// fractions of a day.
    fn validate(&self, what: &'static str) -> Result<(), SynthError> {
        if !self.exponent.is_finite() {
            return Err(SynthError::Parameter {
                name: what,
                value: self.exponent,
                requirement: "finite exponent",
            });
        }
        if !self.lower.is_finite() || self.lower <= 0.0 {
            return Err(SynthError::Parameter {
                name: what,
                value: self.lower,
                requirement: "lower bound > 0",
            });
        }
        if !self.upper.is_finite() || self.upper <= self.lower || self.upper > 1.0 {
            return Err(SynthError::Parameter {
                name: what,
                value: self.upper,
                requirement: "upper bound in (lower, 1]",
            });
        }
        Ok(())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64, SynthError> {
        sample_trunc_power(self.exponent, self.lower, self.upper, rng)
    }
}

/// Empirical fits for US large caps; see the README for provenance.
pub const DEFAULT_ETA_LAW: TruncPowerLaw =
    TruncPowerLaw { exponent: -0.864, lower: 1e-4, upper: 0.3 };
pub const DEFAULT_F_LAW: TruncPowerLaw =
    TruncPowerLaw { exponent: -0.932, lower: 0.005, upper: 1.0 };

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PopulationConfig {
    pub n_orders: usize,
    pub eta_law: TruncPowerLaw,
    pub f_law: TruncPowerLaw,
    /// Probability that two orders from the same day share a sign.
    pub herding_p_same: f64,
    pub days: usize,
    pub seed: u64,
}

impl Default for PopulationConfig {
    fn default() -> Self {
        PopulationConfig {
            n_orders: 1000,
            eta_law: DEFAULT_ETA_LAW,
            f_law: DEFAULT_F_LAW,
            herding_p_same: 0.55,
            days: 50,
            seed: 0,
        }
    }
}

impl PopulationConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        if self.n_orders == 0 {
            return Err(SynthError::Parameter {
                name: "n_orders",
                value: 0.0,
                requirement: ">= 1",
            });
        }
        if self.days == 0 {
            return Err(SynthError::Parameter { name: "days", value: 0.0, requirement: ">= 1" });
        }
        self.eta_law.validate("eta_law")?;
        self.f_law.validate("f_law")?;
        if !(0.5..=1.0).contains(&self.herding_p_same) {
            return Err(SynthError::Parameter {
                name: "herding_p_same",
                value: self.herding_p_same,
                requirement: "in [0.5, 1]",
            });
        }
        Ok(())
    }
}

/// An order before it meets a price path: placement in volume time only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlannedOrder {
    pub day: usize,
    pub sign: Sign,
    /// Participation rate within the execution window.
    pub eta: f64,
    /// Window length as a fraction of daily volume.
    pub duration_f: f64,
    /// Window start in volume time.
    pub v_start: f64,
}

impl PlannedOrder {
    pub fn v_end(&self) -> f64 {
        self.v_start + self.duration_f
    }

    pub fn daily_fraction(&self) -> f64 {
        self.eta * self.duration_f
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub orders: Vec<PlannedOrder>,
    /// Per-day majority sign the orders herd around.
    pub moods: Vec<Sign>,
}

// Two same-day orders agree when both match the mood or both miss it, so
// p_same = r^2 + (1-r)^2; solving for the match probability r >= 1/2.
fn mood_match_probability(p_same: f64) -> f64 {
    (1.0 + (2.0 * p_same - 1.0).sqrt()) / 2.0
}

pub fn generate_population(config: &PopulationConfig) -> Result<Population, SynthError> {
    config.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
    let moods: Vec<Sign> = (0..config.days)
        .map(|_| if rng.gen::<f64>() < 0.5 { Sign::Buy } else { Sign::Sell })
        .collect();
    let r = mood_match_probability(config.herding_p_same);
    let mut orders = Vec::with_capacity(config.n_orders);
    for _ in 0..config.n_orders {
        let day = rng.gen_range(0..config.days);
        let eta = config.eta_law.sample(&mut rng)?;
        let duration_f = config.f_law.sample(&mut rng)?;
        let v_start = rng.gen::<f64>() * (1.0 - duration_f);
        let mood = moods[day];
        let sign = if rng.gen::<f64>() < r { mood } else { mood.opposite() };
        orders.push(PlannedOrder { day, sign, eta, duration_f, v_start });
    }
    Ok(Population { orders, moods })
}

/// Completion impact of one order under a propagator model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompletionSample {
    pub eta: f64,
    pub duration_f: f64,
    pub impact: f64,
}

/// Draw (eta, F) pairs from the configured laws and record the model's
/// impact at completion, plus observation noise with standard deviation
/// `noise_scale * sqrt(F)`: a diffusive price contributes variance
/// proportional to the window length.
///
/// This skips price-path synthesis entirely, so it is the cheap way to make
/// a large regression dataset with known ground truth.
pub fn sample_completion_impacts(
    config: &PopulationConfig,
    delta: f64,
    gamma: f64,
    alpha: f64,
    noise_scale: f64,
) -> Result<Vec<CompletionSample>, SynthError> {
    config.validate()?;
    if !noise_scale.is_finite() || noise_scale < 0.0 {
        return Err(SynthError::Parameter {
            name: "noise_scale",
            value: noise_scale,
            requirement: ">= 0 and finite",
        });
    }
    // Validate the exponent triple once up front; per-sample construction
    // then only varies eta and F, which the laws keep in range.
    PropagatorParams::new(delta, gamma, alpha, 1.0, 1.0)?;
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
    let mut out = Vec::with_capacity(config.n_orders);
    for _ in 0..config.n_orders {
        let eta = config.eta_law.sample(&mut rng)?;
        let duration_f = config.f_law.sample(&mut rng)?;
        let params = PropagatorParams::new(delta, gamma, alpha, eta, duration_f)?;
        let clean = alpha_temporary(&params)?;
        let noise: f64 = rng.sample(StandardNormal);
        out.push(CompletionSample {
            eta,
            duration_f,
            impact: clean + noise_scale * duration_f.sqrt() * noise,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn populations_are_reproducible() {
        let config = PopulationConfig { n_orders: 500, seed: 42, ..Default::default() };
        let a = generate_population(&config).unwrap();
        let b = generate_population(&config).unwrap();
        assert_eq!(a, b);
        let c = generate_population(&PopulationConfig { seed: 43, ..config }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn orders_respect_law_bounds_and_fit_in_the_day() {
        let config = PopulationConfig { n_orders: 20_000, seed: 1, ..Default::default() };
        let pop = generate_population(&config).unwrap();
        assert_eq!(pop.orders.len(), 20_000);
        assert_eq!(pop.moods.len(), config.days);
        for o in &pop.orders {
            assert!(o.day < config.days);
            assert!((1e-4..=0.3).contains(&o.eta));
            assert!((0.005..=1.0).contains(&o.duration_f));
            assert!(o.v_start >= 0.0);
            assert!(o.v_end() <= 1.0 + 1e-12);
            assert!(o.daily_fraction() <= 0.3);
        }
    }

    #[test]
    fn full_herding_locks_signs_to_the_mood() {
        let config = PopulationConfig {
            n_orders: 2000,
            herding_p_same: 1.0,
            seed: 2,
            ..Default::default()
        };
        let pop = generate_population(&config).unwrap();
        assert!(pop.orders.iter().all(|o| o.sign == pop.moods[o.day]));
    }

    #[test]
    fn no_herding_means_independent_signs() {
        let config = PopulationConfig {
            n_orders: 100_000,
            herding_p_same: 0.5,
            seed: 3,
            ..Default::default()
        };
        let pop = generate_population(&config).unwrap();
        let matched = pop.orders.iter().filter(|o| o.sign == pop.moods[o.day]).count();
        let frac = matched as f64 / pop.orders.len() as f64;
        // r = 1/2, so mood matches are a fair coin.
        assert!((frac - 0.5).abs() < 3.0 * 0.5 / (pop.orders.len() as f64).sqrt());
    }

    #[test]
    fn pairwise_same_sign_fraction_hits_the_target() {
        let config = PopulationConfig {
            n_orders: 100_000,
            herding_p_same: 0.55,
            days: 50,
            seed: 4,
            ..Default::default()
        };
        let pop = generate_population(&config).unwrap();
        let mut buys = vec![0f64; config.days];
        let mut sells = vec![0f64; config.days];
        for o in &pop.orders {
            match o.sign {
                Sign::Buy => buys[o.day] += 1.0,
                Sign::Sell => sells[o.day] += 1.0,
            }
        }
        let pairs = |n: f64| n * (n - 1.0) / 2.0;
        let mut same = 0.0;
        let mut total = 0.0;
        for d in 0..config.days {
            same += pairs(buys[d]) + pairs(sells[d]);
            total += pairs(buys[d] + sells[d]);
        }
        let frac = same / total;
        assert!((frac - 0.55).abs() < 0.01, "pairwise same-sign fraction {frac}");
    }

    #[test]
    fn completion_samples_match_the_model_when_noiseless() {
        let config = PopulationConfig { n_orders: 200, seed: 5, ..Default::default() };
        let samples = sample_completion_impacts(&config, 0.5, 0.5, 0.0, 0.0).unwrap();
        for s in &samples {
            // delta = gamma = 1/2 at alpha = 0 is the square-root law.
            let expected = 2.0 * (s.eta * s.duration_f).sqrt();
            assert!((s.impact - expected).abs() <= 1e-12 * expected);
        }
    }

    #[test]
    fn completion_noise_scales_with_sqrt_duration() {
        let config = PopulationConfig { n_orders: 50_000, seed: 6, ..Default::default() };
        let noise_scale = 0.25;
        let noisy = sample_completion_impacts(&config, 0.5, 0.5, 0.0, noise_scale).unwrap();
        let clean = sample_completion_impacts(&config, 0.5, 0.5, 0.0, 0.0).unwrap();
        let n = noisy.len() as f64;
        // Same seed, so (eta, F) pairs pair up sample by sample; the noise
        // draw shifts the stream, which only reshuffles later (eta, F) pairs
        // relative to the clean run. Compare against the model instead.
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for s in &noisy {
            let expected = 2.0 * (s.eta * s.duration_f).sqrt();
            let z = (s.impact - expected) / (noise_scale * s.duration_f.sqrt());
            sum += z;
            sumsq += z * z;
        }
        assert_eq!(noisy.len(), clean.len());
        let mean = sum / n;
        let var = sumsq / n - mean * mean;
        assert!(mean.abs() < 3.0 / n.sqrt(), "standardized mean {mean}");
        assert!((var - 1.0).abs() < 5.0 * (2.0 / n).sqrt(), "standardized variance {var}");
    }

    #[test]
    fn config_validation() {
        let ok = PopulationConfig::default();
        assert!(ok.validate().is_ok());
        let bad = |f: fn(&mut PopulationConfig)| {
            let mut c = PopulationConfig::default();
            f(&mut c);
            c.validate().is_err()
        };
        assert!(bad(|c| c.n_orders = 0));
        assert!(bad(|c| c.days = 0));
        assert!(bad(|c| c.herding_p_same = 0.4));
        assert!(bad(|c| c.herding_p_same = 1.1));
        assert!(bad(|c| c.eta_law.lower = 0.0));
        assert!(bad(|c| c.eta_law.upper = 1.5));
        assert!(bad(|c| c.f_law.upper = c.f_law.lower));
    }

    #[test]
    fn match_probability_solves_the_pair_equation() {
        for p in [0.5, 0.55, 0.75, 1.0] {
            let r = mood_match_probability(p);
            assert!((r * r + (1.0 - r) * (1.0 - r) - p).abs() < 1e-14);
            assert!((0.5..=1.0).contains(&r));
        }
    }
}
