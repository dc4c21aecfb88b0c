//! Empirical estimators and goodness-of-fit machinery: sample moments, a
//! one-sample Kolmogorov-Smirnov test, the Hill tail-index estimator, and
//! the end-to-end check that simulated marginals match the predicted laws.

use serde::{Deserialize, Serialize};

use crate::analytics::{predicted_blocktime, DistributionSpec, MomentReport};
use crate::error::{Error, Result};
use crate::model::{ChainParams, HashrateSchedule};
use crate::simulator::{run_ensemble, CollectTarget};

/// Outcome of a goodness-of-fit comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Consistent,
    Rejected,
    /// No closed-form reference exists for the configuration.
    NotApplicable,
}

/// Result of comparing a sample against an analytic reference.
///
/// `verdict` is `Rejected` exactly when the p-value falls below the
/// significance level the test was run at.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GofReport {
    pub sample_size: usize,
    pub ks_statistic: f64,
    pub p_value: f64,
    pub empirical_mean: f64,
    pub empirical_variance: f64,
    pub predicted: MomentReport,
    pub verdict: Verdict,
}

/// Arithmetic mean and unbiased (n-1) variance.
pub fn empirical_moments(samples: &[f64]) -> Result<(f64, f64)> {
    if samples.len() < 2 {
        return Err(Error::contract("at least two samples are required"));
    }
    for x in samples {
        if !x.is_finite() {
            return Err(Error::domain(format!("samples must be finite, got {x}")));
        }
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let variance = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    Ok((mean, variance))
}

/// Survival function of the Kolmogorov distribution, Q(lambda) = P(K > lambda).
///
/// Uses the theta-function series for small lambda and the alternating series
/// for large lambda; both are exact expansions of the same function.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        let t = std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda);
        let sum: f64 = (0..5)
            .map(|i| {
                let k = f64::from(2 * i + 1);
                (-k * k * t).exp()
            })
            .sum();
        let cdf = (2.0 * std::f64::consts::PI).sqrt() / lambda * sum;
        (1.0 - cdf).clamp(0.0, 1.0)
    } else {
        let sum: f64 = (1..=20)
            .map(|k| {
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                sign * (-2.0 * f64::from(k * k) * lambda * lambda).exp()
            })
            .sum();
        (2.0 * sum).clamp(0.0, 1.0)
    }
}

/// One-sample Kolmogorov-Smirnov test of `samples` against `reference`.
///
/// The p-value comes from the asymptotic Kolmogorov distribution at
/// sqrt(n)*D, adequate for the sample sizes used here (n >= 10 enforced,
/// Monte Carlo scale in practice).
pub fn ks_test(samples: &[f64], reference: &DistributionSpec, alpha: f64) -> Result<GofReport> {
    reference.validate()?;
    if samples.len() < 10 {
        return Err(Error::contract(format!(
            "at least 10 samples are required, got {}",
            samples.len()
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!(
            "significance level must lie in (0,1), got {alpha}"
        )));
    }
    let (empirical_mean, empirical_variance) = empirical_moments(samples)?;
    let mut sorted = samples.to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finiteness checked above"));

    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, x) in sorted.iter().enumerate() {
        let f = reference.cdf(*x)?;
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    let p_value = kolmogorov_survival(n.sqrt() * d);
    Ok(GofReport {
        sample_size: sorted.len(),
        ks_statistic: d,
        p_value,
        empirical_mean,
        empirical_variance,
        predicted: reference.moments(),
        verdict: if p_value < alpha {
            Verdict::Rejected
        } else {
            Verdict::Consistent
        },
    })
}

/// Hill estimator of the tail index over the `k_top` largest samples.
///
/// For Lomax(N, theta) data the estimate converges to 1/N as the sample
/// grows and the tail fraction shrinks; at moderate theta the shift by theta
/// biases it upward, so treat it as a diagnostic, not a fit.
pub fn hill_tail_index(samples: &[f64], k_top: usize) -> Result<f64> {
    if k_top < 1 || k_top >= samples.len() {
        return Err(Error::contract(format!(
            "k_top must lie in [1, {}), got {k_top}",
            samples.len()
        )));
    }
    for x in samples {
        if !(*x > 0.0) || !x.is_finite() {
            return Err(Error::domain(format!(
                "samples must be positive and finite, got {x}"
            )));
        }
    }
    let mut sorted = samples.to_vec();
    sorted.sort_unstable_by(|a, b| b.partial_cmp(a).expect("finiteness checked above"));
    let pivot = sorted[k_top];
    let sum: f64 = sorted[..k_top].iter().map(|x| (x / pivot).ln()).sum();
    Ok(sum / k_top as f64)
}

/// Monte Carlo check of the predicted blocktime marginal: collect the block
/// at (period, position) across `num_runs` independent chains and KS-test
/// the sample against the closed-form law.
///
/// Clamped and bugged rules have no closed-form marginal past period 1; they
/// yield a `NotApplicable` verdict with the empirical moments still filled
/// in. At least 100 runs are required for a verdict, keeping the asymptotic
/// p-value approximation comfortably valid.
pub fn verify_theorem(
    params: &ChainParams,
    schedule: &HashrateSchedule,
    period: u32,
    position: u32,
    num_runs: u64,
    seed: u64,
    alpha: f64,
) -> Result<GofReport> {
    if num_runs < 100 {
        return Err(Error::contract(format!(
            "at least 100 runs are required for a verdict, got {num_runs}"
        )));
    }
    let target = CollectTarget::Blocktime { period, position };
    let samples = run_ensemble(params, schedule, period, num_runs, seed, &[target])?
        .take(target)
        .expect("requested target is always collected");
    match predicted_blocktime(period, params, schedule)? {
        Some(reference) => ks_test(&samples, &reference, alpha),
        None => {
            let (empirical_mean, empirical_variance) = empirical_moments(&samples)?;
            Ok(GofReport {
                sample_size: samples.len(),
                ks_statistic: 0.0,
                p_value: 1.0,
                empirical_mean,
                empirical_variance,
                predicted: MomentReport::undefined(),
                verdict: Verdict::NotApplicable,
            })
        }
    }
}
