//! Seedable random variate generation for the exponential, Erlang, Lomax,
//! and geometric distributions.
//!
//! All continuous variates come from inverse transforms (or, for large-shape
//! Erlang, a gamma method) driven by a counter-based ChaCha stream, so a
//! `(seed, stream_id)` pair fully determines the output sequence. Distinct
//! stream ids under one seed give independent streams, which is what lets
//! ensemble runs execute in parallel without sharing generator state.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};

/// Largest Erlang shape drawn via the product-of-uniforms method; larger
/// shapes use one gamma variate instead of N uniforms.
const ERLANG_PRODUCT_MAX_SHAPE: u32 = 64;

/// A seeded, stream-addressable random source.
///
/// One handle is confined to one thread at a time; make handles with
/// distinct `stream_id`s to draw in parallel.
#[derive(Debug, Clone)]
pub struct RngHandle {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngHandle {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    pub fn with_stream(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        RngHandle {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Uniform draw on (0,1]; the closed right end avoids ln(0).
    fn uniform_open_closed(&mut self) -> f64 {
        1.0 - self.rng.random::<f64>()
    }

    /// Uniform draw on [0,1).
    fn uniform_half_open(&mut self) -> f64 {
        self.rng.random::<f64>()
    }
}

impl RngCore for RngHandle {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }
}

fn check_positive(name: &str, value: f64) -> Result<()> {
    if !(value > 0.0) || !value.is_finite() {
        return Err(Error::domain(format!(
            "{name} must be positive and finite, got {value}"
        )));
    }
    Ok(())
}

/// Inverse transform for Exp(rate): -ln(u)/rate with u in (0,1].
pub(crate) fn exponential_inverse(rate: f64, u: f64) -> f64 {
    -u.ln() / rate
}

/// Inverse transform for Lomax(shape, scale): scale*((1-u)^(-1/shape) - 1)
/// with u in [0,1).
pub(crate) fn lomax_inverse(shape: u32, scale: f64, u: f64) -> f64 {
    scale * ((-(-u).ln_1p() / shape as f64).exp_m1())
}

/// Inverse transform for Geometric(p) on {1, 2, ...}: the count of Bernoulli
/// trials up to and including the first success, with u in (0,1].
pub(crate) fn geometric_inverse(p: f64, u: f64) -> u64 {
    let trials = (u.ln() / (-p).ln_1p()).ceil();
    // u = 1 lands on the boundary of the first cell; fold it into trial 1.
    if trials < 1.0 {
        1
    } else {
        trials as u64
    }
}

/// One draw from Exp(rate); strictly positive.
pub fn sample_exponential(rate: f64, rng: &mut RngHandle) -> Result<f64> {
    check_positive("rate", rate)?;
    loop {
        // u = 1 maps to exactly zero; redraw to keep the output positive.
        let x = exponential_inverse(rate, rng.uniform_open_closed());
        if x > 0.0 {
            return Ok(x);
        }
    }
}

/// One draw from Erlang(shape, rate), the sum of `shape` independent
/// Exp(rate) variates; strictly positive.
pub fn sample_erlang(shape: u32, rate: f64, rng: &mut RngHandle) -> Result<f64> {
    if shape < 1 {
        return Err(Error::domain("shape must be at least 1"));
    }
    check_positive("rate", rate)?;
    loop {
        let x = if shape <= ERLANG_PRODUCT_MAX_SHAPE {
            erlang_product(shape, rate, rng)
        } else {
            erlang_gamma(shape, rate, rng)
        };
        if x > 0.0 && x.is_finite() {
            return Ok(x);
        }
    }
}

/// -ln(u_1 ... u_N)/rate, exact for integer shape; O(shape) uniforms.
fn erlang_product(shape: u32, rate: f64, rng: &mut RngHandle) -> f64 {
    let mut log_product = 0.0;
    for _ in 0..shape {
        log_product += rng.uniform_open_closed().ln();
    }
    -log_product / rate
}

/// Gamma(shape, 1/rate) variate; O(1) draws, used for large shapes.
fn erlang_gamma(shape: u32, rate: f64, rng: &mut RngHandle) -> f64 {
    let gamma = Gamma::new(f64::from(shape), 1.0 / rate).expect("parameters already validated");
    gamma.sample(rng)
}

/// One draw from Lomax(shape, scale) via its closed-form quantile.
///
/// Used as an independent oracle against the two-stage construction
/// (an exponential whose rate is itself Erlang-distributed).
pub fn sample_lomax(shape: u32, scale: f64, rng: &mut RngHandle) -> Result<f64> {
    if shape < 1 {
        return Err(Error::domain("shape must be at least 1"));
    }
    check_positive("scale", scale)?;
    Ok(lomax_inverse(shape, scale, rng.uniform_half_open()))
}

/// Number of Bernoulli(p) trials up to and including the first success.
pub fn sample_geometric(success_probability: f64, rng: &mut RngHandle) -> Result<u64> {
    let p = success_probability;
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::domain(format!(
            "success probability must lie in (0,1], got {p}"
        )));
    }
    Ok(geometric_inverse(p, rng.uniform_open_closed()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exponential_inverse_at_the_boundaries() {
        assert_eq!(exponential_inverse(0.1, 1.0), 0.0);
        assert_relative_eq!(
            exponential_inverse(0.1, (-1.0f64).exp()),
            10.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn exponential_sample_mean() {
        let mut rng = RngHandle::new(1);
        let m = 1_000_000;
        let mean: f64 = (0..m)
            .map(|_| sample_exponential(0.1, &mut rng).unwrap())
            .sum::<f64>()
            / m as f64;
        assert!((mean - 10.0).abs() < 0.05, "mean {mean}");
    }

    #[test]
    fn exponential_rejects_bad_rate() {
        let mut rng = RngHandle::new(0);
        assert!(sample_exponential(0.0, &mut rng).is_err());
        assert!(sample_exponential(-1.0, &mut rng).is_err());
        assert!(sample_exponential(f64::NAN, &mut rng).is_err());
    }

    #[test]
    fn erlang_shape_one_is_exponential() {
        // Same stream, same consumption: the two calls must agree bit for bit.
        let mut a = RngHandle::with_stream(7, 3);
        let mut b = RngHandle::with_stream(7, 3);
        for _ in 0..100 {
            let x = sample_erlang(1, 0.25, &mut a).unwrap();
            let y = sample_exponential(0.25, &mut b).unwrap();
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn erlang_sample_mean() {
        let mut rng = RngHandle::new(2);
        let m = 1_000_000;
        let mean: f64 = (0..m)
            .map(|_| sample_erlang(20, 200.0, &mut rng).unwrap())
            .sum::<f64>()
            / m as f64;
        assert!((mean - 0.1).abs() < 0.001, "mean {mean}");
    }

    #[test]
    fn erlang_sample_variance() {
        let mut rng = RngHandle::new(3);
        let m = 1_000_000usize;
        let xs: Vec<f64> = (0..m)
            .map(|_| sample_erlang(2, 20.0, &mut rng).unwrap())
            .collect();
        let mean = xs.iter().sum::<f64>() / m as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
        // true variance N/theta^2 = 0.005, checked to 5%
        assert!((var - 0.005).abs() < 0.005 * 0.05, "variance {var}");
    }

    #[test]
    fn erlang_product_and_gamma_methods_agree() {
        // Two-sample KS between the two construction paths at a shape both
        // support. Critical value at alpha = 0.01 for n = m = 20000 is
        // 1.628*sqrt(2/n) = 0.0163.
        let mut rng = RngHandle::new(11);
        let n = 20_000;
        let mut a: Vec<f64> = (0..n).map(|_| erlang_product(50, 5.0, &mut rng)).collect();
        let mut b: Vec<f64> = (0..n).map(|_| erlang_gamma(50, 5.0, &mut rng)).collect();
        a.sort_by(|x, y| x.partial_cmp(y).unwrap());
        b.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let mut d: f64 = 0.0;
        let (mut i, mut j) = (0usize, 0usize);
        while i < a.len() && j < b.len() {
            if a[i] <= b[j] {
                i += 1;
            } else {
                j += 1;
            }
            d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
        }
        assert!(d < 0.0163, "two-sample KS distance {d}");
    }

    #[test]
    fn lomax_inverse_at_the_boundaries() {
        assert_eq!(lomax_inverse(20, 200.0, 0.0), 0.0);
        assert_relative_eq!(
            lomax_inverse(20, 200.0, 0.5),
            200.0 * ((2.0f64).powf(1.0 / 20.0) - 1.0),
            max_relative = 1e-12
        );
    }

    #[test]
    fn lomax_sample_mean() {
        let mut rng = RngHandle::new(4);
        let m = 1_000_000;
        let mean: f64 = (0..m)
            .map(|_| sample_lomax(20, 200.0, &mut rng).unwrap())
            .sum::<f64>()
            / m as f64;
        let predicted = 200.0 / 19.0;
        assert!((mean - predicted).abs() < predicted * 0.01, "mean {mean}");
    }

    #[test]
    fn geometric_certain_success() {
        let mut rng = RngHandle::new(5);
        for _ in 0..100 {
            assert_eq!(sample_geometric(1.0, &mut rng).unwrap(), 1);
        }
    }

    #[test]
    fn geometric_sample_mean() {
        let mut rng = RngHandle::new(6);
        let m = 1_000_000;
        let mean: f64 = (0..m)
            .map(|_| sample_geometric(0.5, &mut rng).unwrap() as f64)
            .sum::<f64>()
            / m as f64;
        assert!((mean - 2.0).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn geometric_rejects_bad_probability() {
        let mut rng = RngHandle::new(0);
        assert!(sample_geometric(0.0, &mut rng).is_err());
        assert!(sample_geometric(1.5, &mut rng).is_err());
        assert!(sample_geometric(f64::NAN, &mut rng).is_err());
    }

    #[test]
    fn replay_is_deterministic() {
        let draw = |seed, stream| {
            let mut rng = RngHandle::with_stream(seed, stream);
            let mut out = Vec::new();
            for _ in 0..50 {
                out.push(sample_exponential(0.1, &mut rng).unwrap().to_bits());
                out.push(sample_erlang(20, 200.0, &mut rng).unwrap().to_bits());
                out.push(sample_erlang(100, 200.0, &mut rng).unwrap().to_bits());
                out.push(sample_lomax(2, 20.0, &mut rng).unwrap().to_bits());
                out.push(sample_geometric(1e-3, &mut rng).unwrap() as u64);
            }
            out
        };
        assert_eq!(draw(42, 0), draw(42, 0));
        assert_eq!(draw(42, 9), draw(42, 9));
        assert_ne!(draw(42, 0), draw(42, 1));
        assert_ne!(draw(42, 0), draw(43, 0));
    }

    #[test]
    fn samples_are_finite_and_positive() {
        let mut rng = RngHandle::new(8);
        for _ in 0..10_000 {
            let e = sample_exponential(1e-6, &mut rng).unwrap();
            assert!(e.is_finite() && e > 0.0);
            let g = sample_erlang(2016, 20160.0, &mut rng).unwrap();
            assert!(g.is_finite() && g > 0.0);
            let l = sample_lomax(2, 20.0, &mut rng).unwrap();
            assert!(l.is_finite() && l >= 0.0);
        }
    }
}
