//! Protocol parameters and the difficulty-retargeting rules.
//!
//! Difficulty and hashrate are dimensionless positive reals; only their ratio
//! `lambda = hashrate / difficulty` carries physical meaning (inverse time).
//! A chain advances in retargeting periods of `N` blocks. At the end of each
//! period the difficulty is rescaled so that, if the hashrate were to stay
//! put, the next period's expected blocktime would return to the target
//! `beta`. Four variants of that rescaling are supported:
//!
//! * `Ideal` — multiply by `N·beta / T` where `T` is the period's total time.
//! * `Corrected` — multiply by `(N-1)·beta / T`, which removes the small
//!   systematic bias of the ideal rule (its expected blocktime exceeds the
//!   target by a factor `N/(N-1)`).
//! * `Clamped` — the ideal ratio is clipped to `[1/clamp_factor, clamp_factor]`
//!   before it is applied, like Bitcoin's factor-4 restriction.
//! * `BitcoinBug` — the ideal numerator `N·beta` is kept but the final
//!   blocktime of the period is dropped from the denominator sum, mirroring
//!   the well-known off-by-one in the Bitcoin client.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which difficulty update is applied at period boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RetargetRule {
    Ideal,
    Corrected,
    Clamped,
    BitcoinBug,
}

impl RetargetRule {
    /// Rules for which the period-n blocktime marginal has a closed form
    /// (a Lomax law). The clamp and the off-by-one variant do not.
    pub fn has_closed_form(self) -> bool {
        matches!(self, RetargetRule::Ideal | RetargetRule::Corrected)
    }

    pub fn name(self) -> &'static str {
        match self {
            RetargetRule::Ideal => "ideal",
            RetargetRule::Corrected => "corrected",
            RetargetRule::Clamped => "clamped",
            RetargetRule::BitcoinBug => "bitcoin_bug",
        }
    }
}

/// Protocol constants for one simulated chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainParams {
    /// Blocks per retargeting period (`N`).
    pub period_length: u32,
    /// Desired expected blocktime (`beta`), in abstract time units.
    pub target_blocktime: f64,
    /// Retargeting variant applied at period boundaries.
    pub rule: RetargetRule,
    /// Difficulty of the first period (`d_1`), initialized arbitrarily.
    pub initial_difficulty: f64,
    /// Maximum per-retarget adjustment ratio; only the `Clamped` rule uses it.
    pub clamp_factor: f64,
}

impl ChainParams {
    pub const DEFAULT_CLAMP_FACTOR: f64 = 4.0;

    pub fn new(
        period_length: u32,
        target_blocktime: f64,
        rule: RetargetRule,
        initial_difficulty: f64,
    ) -> Result<Self> {
        let params = ChainParams {
            period_length,
            target_blocktime,
            rule,
            initial_difficulty,
            clamp_factor: Self::DEFAULT_CLAMP_FACTOR,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_clamp_factor(mut self, clamp_factor: f64) -> Result<Self> {
        self.clamp_factor = clamp_factor;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.period_length < 1 {
            return Err(Error::domain("period_length must be at least 1"));
        }
        if !(self.target_blocktime > 0.0) || !self.target_blocktime.is_finite() {
            return Err(Error::domain(format!(
                "target_blocktime must be positive and finite, got {}",
                self.target_blocktime
            )));
        }
        if !(self.initial_difficulty > 0.0) || !self.initial_difficulty.is_finite() {
            return Err(Error::domain(format!(
                "initial_difficulty must be positive and finite, got {}",
                self.initial_difficulty
            )));
        }
        if !(self.clamp_factor >= 1.0) || !self.clamp_factor.is_finite() {
            return Err(Error::domain(format!(
                "clamp_factor must be >= 1 and finite, got {}",
                self.clamp_factor
            )));
        }
        Ok(())
    }
}

/// Exogenous per-period hashrate values.
///
/// When a simulation runs past the end of the sequence, the last value
/// persists, so the hashrate ratio `delta_n` is 1 from then on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct HashrateSchedule {
    rates: Vec<f64>,
}

impl HashrateSchedule {
    pub fn new(rates: Vec<f64>) -> Result<Self> {
        if rates.is_empty() {
            return Err(Error::domain("hashrate schedule must not be empty"));
        }
        for (i, r) in rates.iter().enumerate() {
            if !(*r > 0.0) || !r.is_finite() {
                return Err(Error::domain(format!(
                    "hashrate for period {} must be positive and finite, got {}",
                    i + 1,
                    r
                )));
            }
        }
        Ok(HashrateSchedule { rates })
    }

    pub fn constant(rate: f64) -> Result<Self> {
        Self::new(vec![rate])
    }

    /// Hashrate of the given 1-based period; the last entry persists.
    pub fn rate(&self, period: u32) -> f64 {
        assert!(period >= 1, "periods are 1-based");
        let idx = (period as usize - 1).min(self.rates.len() - 1);
        self.rates[idx]
    }

    /// Hashrate ratio `delta_n = r_n / r_{n-1}`, defined for periods n > 1.
    pub fn delta(&self, period: u32) -> Result<f64> {
        if period <= 1 {
            return Err(Error::contract(
                "delta is defined only for periods after the first",
            ));
        }
        Ok(self.rate(period) / self.rate(period - 1))
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }
}

impl TryFrom<Vec<f64>> for HashrateSchedule {
    type Error = String;

    fn try_from(rates: Vec<f64>) -> std::result::Result<Self, String> {
        HashrateSchedule::new(rates).map_err(|e| e.to_string())
    }
}

impl From<HashrateSchedule> for Vec<f64> {
    fn from(schedule: HashrateSchedule) -> Vec<f64> {
        schedule.rates
    }
}

/// Deterministic per-period state: difficulty, hashrate, the implied block
/// arrival rate, and (where defined) the scale parameter `theta_n` of the
/// period's rate and blocktime laws.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodState {
    pub period_index: u32,
    pub difficulty: f64,
    pub hashrate: f64,
    pub rate: f64,
    /// `None` for the first period and for rules without a closed form.
    pub theta: Option<f64>,
}

impl PeriodState {
    pub fn new(
        period_index: u32,
        difficulty: f64,
        schedule: &HashrateSchedule,
        params: &ChainParams,
    ) -> Result<Self> {
        if period_index < 1 {
            return Err(Error::contract("periods are 1-based"));
        }
        let hashrate = schedule.rate(period_index);
        let rate = rate_from(difficulty, hashrate)?;
        let theta = if period_index > 1 && params.rule.has_closed_form() {
            Some(theta(period_index, schedule, params)?)
        } else {
            None
        };
        Ok(PeriodState {
            period_index,
            difficulty,
            hashrate,
            rate,
            theta,
        })
    }
}

/// Block arrival rate implied by a difficulty and a hashrate.
///
/// Only the ratio matters: `rate_from(c*d, c*r) == rate_from(d, r)` up to
/// floating-point rounding.
pub fn rate_from(difficulty: f64, hashrate: f64) -> Result<f64> {
    if !(difficulty > 0.0) || !difficulty.is_finite() {
        return Err(Error::domain(format!(
            "difficulty must be positive and finite, got {difficulty}"
        )));
    }
    if !(hashrate > 0.0) || !hashrate.is_finite() {
        return Err(Error::domain(format!(
            "hashrate must be positive and finite, got {hashrate}"
        )));
    }
    Ok(hashrate / difficulty)
}

/// Difficulty for the next period, from the current difficulty and the N
/// blocktimes of the period that just ended.
pub fn retarget(
    current_difficulty: f64,
    period_blocktimes: &[f64],
    params: &ChainParams,
) -> Result<f64> {
    params.validate()?;
    let n = params.period_length as usize;
    if period_blocktimes.len() != n {
        return Err(Error::contract(format!(
            "expected {} blocktimes, got {}",
            n,
            period_blocktimes.len()
        )));
    }
    if !(current_difficulty > 0.0) || !current_difficulty.is_finite() {
        return Err(Error::domain(format!(
            "difficulty must be positive and finite, got {current_difficulty}"
        )));
    }
    for x in period_blocktimes {
        if !(*x > 0.0) || !x.is_finite() {
            return Err(Error::domain(format!(
                "blocktimes must be positive and finite, got {x}"
            )));
        }
    }

    // Form the adjustment ratio first so that an on-target period
    // (numerator == duration bit for bit) leaves the difficulty unchanged.
    let beta = params.target_blocktime;
    let n_beta = n as f64 * beta;
    match params.rule {
        RetargetRule::Ideal => {
            let total = checked_sum(period_blocktimes)?;
            Ok(current_difficulty * (n_beta / total))
        }
        RetargetRule::Corrected => {
            if n < 2 {
                return Err(Error::contract(
                    "the corrected rule requires a period length of at least 2",
                ));
            }
            let total = checked_sum(period_blocktimes)?;
            Ok(current_difficulty * ((n as f64 - 1.0) * beta / total))
        }
        RetargetRule::Clamped => {
            let total = checked_sum(period_blocktimes)?;
            let ratio = (n_beta / total).clamp(1.0 / params.clamp_factor, params.clamp_factor);
            Ok(current_difficulty * ratio)
        }
        RetargetRule::BitcoinBug => {
            if n < 2 {
                return Err(Error::contract(
                    "the bugged rule requires a period length of at least 2",
                ));
            }
            // The numerator keeps all N intervals; the sum drops the last one.
            let total = checked_sum(&period_blocktimes[..n - 1])?;
            Ok(current_difficulty * (n_beta / total))
        }
    }
}

fn checked_sum(blocktimes: &[f64]) -> Result<f64> {
    let total: f64 = blocktimes.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::domain(format!(
            "period duration must be positive and finite, got {total}"
        )));
    }
    Ok(total)
}

/// Scale parameter `theta_n` of the period-n rate and blocktime laws:
/// `N*beta/delta_n` under the ideal rule, `(N-1)*beta/delta_n` under the
/// corrected rule. Undefined for the first period and for rules without a
/// closed-form marginal.
pub fn theta(period: u32, schedule: &HashrateSchedule, params: &ChainParams) -> Result<f64> {
    params.validate()?;
    if period <= 1 {
        return Err(Error::contract(
            "theta is defined only for periods after the first",
        ));
    }
    let n = params.period_length as f64;
    let numerator = match params.rule {
        RetargetRule::Ideal => n * params.target_blocktime,
        RetargetRule::Corrected => {
            if params.period_length < 2 {
                return Err(Error::contract(
                    "the corrected rule requires a period length of at least 2",
                ));
            }
            (n - 1.0) * params.target_blocktime
        }
        RetargetRule::Clamped | RetargetRule::BitcoinBug => {
            return Err(Error::domain(format!(
                "theta has no closed form under the {} rule",
                params.rule.name()
            )));
        }
    };
    Ok(numerator / schedule.delta(period)?)
}
