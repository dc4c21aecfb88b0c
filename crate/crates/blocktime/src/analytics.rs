//! Closed-form densities, CDFs, quantiles, and moments for the exponential,
//! Erlang, and Lomax families, plus the per-period blocktime law and the
//! hashrate estimator.
//!
//! Numerical ground rules: the Erlang CDF uses the finite Poisson sum (exact
//! for integer shape) evaluated in log space, and the Lomax density and CDF
//! go through exp(N*ln(theta/(x+theta))), because theta^N overflows a double
//! long before the Bitcoin-scale shape N = 2016.

use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{theta, ChainParams, HashrateSchedule};

/// An analytic distribution with fixed parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DistributionSpec {
    Exponential { rate: f64 },
    Erlang { shape: u32, rate: f64 },
    Lomax { shape: u32, scale: f64 },
}

impl DistributionSpec {
    pub fn exponential(rate: f64) -> Result<Self> {
        let spec = DistributionSpec::Exponential { rate };
        spec.validate()?;
        Ok(spec)
    }

    pub fn erlang(shape: u32, rate: f64) -> Result<Self> {
        let spec = DistributionSpec::Erlang { shape, rate };
        spec.validate()?;
        Ok(spec)
    }

    pub fn lomax(shape: u32, scale: f64) -> Result<Self> {
        let spec = DistributionSpec::Lomax { shape, scale };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let (name, value, shape) = match *self {
            DistributionSpec::Exponential { rate } => ("rate", rate, 1),
            DistributionSpec::Erlang { shape, rate } => ("rate", rate, shape),
            DistributionSpec::Lomax { shape, scale } => ("scale", scale, shape),
        };
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::domain(format!(
                "{name} must be positive and finite, got {value}"
            )));
        }
        if shape < 1 {
            return Err(Error::domain("shape must be at least 1"));
        }
        Ok(())
    }

    /// Probability density at x >= 0.
    pub fn pdf(&self, x: f64) -> Result<f64> {
        self.validate()?;
        check_support(x)?;
        Ok(match *self {
            DistributionSpec::Exponential { rate } => rate * (-rate * x).exp(),
            DistributionSpec::Erlang { shape, rate } => erlang_pdf(shape, rate, x),
            DistributionSpec::Lomax { shape, scale } => lomax_pdf(shape, scale, x),
        })
    }

    /// Cumulative distribution function at x >= 0.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        self.validate()?;
        check_support(x)?;
        Ok(match *self {
            DistributionSpec::Exponential { rate } => -(-rate * x).exp_m1(),
            DistributionSpec::Erlang { shape, rate } => erlang_cdf(shape, rate, x),
            DistributionSpec::Lomax { shape, scale } => lomax_cdf(shape, scale, x),
        })
    }

    /// Inverse CDF for u in [0,1). Closed form for the exponential and Lomax
    /// families; bracketed bisection on the CDF for Erlang.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        self.validate()?;
        if !(0.0..1.0).contains(&u) {
            return Err(Error::domain(format!(
                "quantile argument must lie in [0,1), got {u}"
            )));
        }
        Ok(match *self {
            DistributionSpec::Exponential { rate } => -(-u).ln_1p() / rate,
            DistributionSpec::Erlang { shape, rate } => erlang_quantile(shape, rate, u),
            DistributionSpec::Lomax { shape, scale } => {
                scale * ((-(-u).ln_1p() / f64::from(shape)).exp_m1())
            }
        })
    }

    /// Mean and variance, with explicit markers where they do not exist.
    pub fn moments(&self) -> MomentReport {
        predicted_moments(self)
    }
}

fn check_support(x: f64) -> Result<()> {
    if x < 0.0 || x.is_nan() {
        return Err(Error::domain(format!(
            "argument must be non-negative, got {x}"
        )));
    }
    Ok(())
}

/// ln(m!) by direct summation; exact enough for the shapes in play and
/// avoids a special-function dependency.
fn ln_factorial(m: u64) -> f64 {
    (2..=m).map(|j| (j as f64).ln()).sum()
}

fn erlang_pdf(shape: u32, rate: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if shape == 1 { rate } else { 0.0 };
    }
    let n = f64::from(shape);
    let ln_pdf = n * rate.ln() + (n - 1.0) * x.ln() - rate * x - ln_factorial(u64::from(shape) - 1);
    ln_pdf.exp()
}

/// 1 - e^{-θx} Σ_{j<N} (θx)^j/j!, with the sum taken by log-sum-exp so the
/// terms never overflow at N = 2016.
fn erlang_cdf(shape: u32, rate: f64, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let ln_rx = (rate * x).ln();
    let mut ln_terms = Vec::with_capacity(shape as usize);
    let mut ln_term = 0.0;
    ln_terms.push(ln_term);
    for j in 1..shape {
        ln_term += ln_rx - f64::from(j).ln();
        ln_terms.push(ln_term);
    }
    let max = ln_terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = ln_terms.iter().map(|t| (t - max).exp()).sum();
    let ln_survival = max + sum.ln() - rate * x;
    (-ln_survival.exp_m1()).clamp(0.0, 1.0)
}

fn erlang_quantile(shape: u32, rate: f64, u: f64) -> f64 {
    if u == 0.0 {
        return 0.0;
    }
    let n = f64::from(shape);
    let mut lo = 0.0;
    let mut hi = (n + 10.0 * n.sqrt()) / rate;
    while erlang_cdf(shape, rate, hi) < u {
        hi *= 2.0;
    }
    // Plain bisection: ~60 halvings reach machine resolution; the cap only
    // guards against pathological rounding.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if erlang_cdf(shape, rate, mid) < u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn lomax_pdf(shape: u32, scale: f64, x: f64) -> f64 {
    let n = f64::from(shape);
    let t = scale / (x + scale);
    (n / (x + scale)) * (n * t.ln()).exp()
}

fn lomax_cdf(shape: u32, scale: f64, x: f64) -> f64 {
    let n = f64::from(shape);
    let t = scale / (x + scale);
    -(n * t.ln()).exp_m1()
}

/// A possibly nonexistent moment. Serializes as a bare number, or as the
/// string "infinite"/"undefined".
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Moment {
    Value(f64),
    Infinite,
    Undefined,
}

impl Moment {
    pub fn value(&self) -> Option<f64> {
        match *self {
            Moment::Value(x) => Some(x),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Moment::Value(_))
    }
}

impl std::fmt::Display for Moment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            Moment::Value(x) => write!(f, "{x}"),
            Moment::Infinite => write!(f, "infinite"),
            Moment::Undefined => write!(f, "undefined"),
        }
    }
}

impl Serialize for Moment {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            Moment::Value(x) => serializer.serialize_f64(x),
            Moment::Infinite => serializer.serialize_str("infinite"),
            Moment::Undefined => serializer.serialize_str("undefined"),
        }
    }
}

impl<'de> Deserialize<'de> for Moment {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct MomentVisitor;

        impl Visitor<'_> for MomentVisitor {
            type Value = Moment;

            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a number, \"infinite\", or \"undefined\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Moment, E> {
                Ok(Moment::Value(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Moment, E> {
                Ok(Moment::Value(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Moment, E> {
                Ok(Moment::Value(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Moment, E> {
                match v {
                    "infinite" => Ok(Moment::Infinite),
                    "undefined" => Ok(Moment::Undefined),
                    other => Err(E::invalid_value(de::Unexpected::Str(other), &self)),
                }
            }
        }

        deserializer.deserialize_any(MomentVisitor)
    }
}

/// Mean and variance of a distribution, markers included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub mean: Moment,
    pub variance: Moment,
}

impl MomentReport {
    pub fn undefined() -> Self {
        MomentReport {
            mean: Moment::Undefined,
            variance: Moment::Undefined,
        }
    }
}

/// Mean and variance of the given family.
///
/// The Lomax mean exists only for shape > 1 and its variance is finite only
/// for shape > 2; shape 2 (the N = 2 experiment) has a mean but infinite
/// variance. Markers are values, not errors, because those regimes are
/// legitimate configurations.
pub fn predicted_moments(spec: &DistributionSpec) -> MomentReport {
    match *spec {
        DistributionSpec::Exponential { rate } => MomentReport {
            mean: Moment::Value(1.0 / rate),
            variance: Moment::Value(1.0 / (rate * rate)),
        },
        DistributionSpec::Erlang { shape, rate } => {
            let n = f64::from(shape);
            MomentReport {
                mean: Moment::Value(n / rate),
                variance: Moment::Value(n / (rate * rate)),
            }
        }
        DistributionSpec::Lomax { shape, scale } => {
            let n = f64::from(shape);
            let mean = if shape > 1 {
                Moment::Value(scale / (n - 1.0))
            } else {
                Moment::Undefined
            };
            let variance = match shape {
                0 | 1 => Moment::Undefined,
                2 => Moment::Infinite,
                _ => Moment::Value(scale * scale * n / ((n - 1.0) * (n - 1.0) * (n - 2.0))),
            };
            MomentReport { mean, variance }
        }
    }
}

/// Marginal blocktime law for the given period: exponential in period 1,
/// Lomax(N, theta_n) afterwards. `None` when the retarget rule (clamped or
/// bugged) admits no closed form.
pub fn predicted_blocktime(
    period: u32,
    params: &ChainParams,
    schedule: &HashrateSchedule,
) -> Result<Option<DistributionSpec>> {
    params.validate()?;
    if period < 1 {
        return Err(Error::contract("periods are 1-based"));
    }
    if period == 1 {
        let rate = schedule.rate(1) / params.initial_difficulty;
        return Ok(Some(DistributionSpec::exponential(rate)?));
    }
    if !params.rule.has_closed_form() {
        return Ok(None);
    }
    Ok(Some(DistributionSpec::lomax(
        params.period_length,
        theta(period, schedule, params)?,
    )?))
}

/// Hashrate estimate N*d/T from one period's difficulty and blocktimes.
///
/// The estimate is biased high by a factor N/(N-1): T is Erlang given the
/// period's rate, and E[1/T] = lambda/(N-1).
pub fn estimate_hashrate(difficulty: f64, period_blocktimes: &[f64]) -> Result<f64> {
    if !(difficulty > 0.0) || !difficulty.is_finite() {
        return Err(Error::domain(format!(
            "difficulty must be positive and finite, got {difficulty}"
        )));
    }
    if period_blocktimes.is_empty() {
        return Err(Error::domain("at least one blocktime is required"));
    }
    let mut total = 0.0;
    for x in period_blocktimes {
        if !(*x > 0.0) || !x.is_finite() {
            return Err(Error::domain(format!(
                "blocktimes must be positive and finite, got {x}"
            )));
        }
        total += x;
    }
    Ok(period_blocktimes.len() as f64 * difficulty / total)
}
