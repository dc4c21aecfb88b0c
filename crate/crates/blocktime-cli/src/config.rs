//! Run configuration: JSON-loadable, flag-overridable, with documented
//! defaults (N = 2016, beta = 10, ideal rule, d_1 = beta * r_1, seed 0,
//! alpha 0.01).

use std::fs;
use std::path::PathBuf;

use blocktime::{ChainParams, DistributionSpec, HashrateSchedule, RetargetRule};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Blocks per retarget period (N).
    pub period_length: u32,
    /// Target blocktime (beta).
    pub target_blocktime: f64,
    pub rule: RetargetRule,
    /// Defaults to `target_blocktime * hashrates[0]`, which puts the first
    /// period exactly on target.
    pub initial_difficulty: Option<f64>,
    pub clamp_factor: f64,
    /// Per-period hashrates; the last entry persists. Ignored when
    /// `hashrate_file` is set.
    pub hashrates: Vec<f64>,
    /// Plain-text schedule, one hashrate per line.
    pub hashrate_file: Option<PathBuf>,
    pub num_periods: u32,
    /// Ensemble size for `verify`.
    pub num_runs: u64,
    pub seed: u64,
    /// KS significance level.
    pub alpha: f64,
    /// Within-period position whose blocktime `verify` tests.
    pub position: u32,
    /// Trace CSV (`simulate`), report JSON (`verify`).
    pub out: Option<PathBuf>,
    /// Per-period JSON summary written by `simulate`; defaults to the trace
    /// path with a `.summary.json` extension.
    pub summary_out: Option<PathBuf>,
    /// Test hook: replaces the predicted distribution in `verify` with a
    /// fixed reference so the rejection path can be exercised.
    pub reference_override: Option<DistributionSpec>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            period_length: 2016,
            target_blocktime: 10.0,
            rule: RetargetRule::Ideal,
            initial_difficulty: None,
            clamp_factor: ChainParams::DEFAULT_CLAMP_FACTOR,
            hashrates: vec![1.0],
            hashrate_file: None,
            num_periods: 2,
            num_runs: 10_000,
            seed: 0,
            alpha: 0.01,
            position: 1,
            out: None,
            summary_out: None,
            reference_override: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &PathBuf) -> Result<RunConfig, String> {
        let text = fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        serde_json::from_str(&text)
            .map_err(|e| format!("invalid config {}: {e}", path.display()))
    }

    /// Collects every offending field into one error so a bad config is
    /// reported in full rather than one field at a time.
    pub fn validate(&self) -> Result<(), String> {
        let mut bad = Vec::new();
        if self.period_length < 1 {
            bad.push("period_length: must be at least 1".to_string());
        }
        if !(self.target_blocktime > 0.0) || !self.target_blocktime.is_finite() {
            bad.push(format!(
                "target_blocktime: must be positive and finite, got {}",
                self.target_blocktime
            ));
        }
        if matches!(self.rule, RetargetRule::Corrected | RetargetRule::BitcoinBug)
            && self.period_length < 2
        {
            bad.push(format!(
                "rule: the {} rule needs period_length of at least 2",
                self.rule.name()
            ));
        }
        if let Some(d) = self.initial_difficulty {
            if !(d > 0.0) || !d.is_finite() {
                bad.push(format!(
                    "initial_difficulty: must be positive and finite, got {d}"
                ));
            }
        }
        if !(self.clamp_factor >= 1.0) || !self.clamp_factor.is_finite() {
            bad.push(format!(
                "clamp_factor: must be at least 1 and finite, got {}",
                self.clamp_factor
            ));
        }
        if self.hashrate_file.is_none() {
            if self.hashrates.is_empty() {
                bad.push("hashrates: must not be empty".to_string());
            }
            for (i, r) in self.hashrates.iter().enumerate() {
                if !(*r > 0.0) || !r.is_finite() {
                    bad.push(format!(
                        "hashrates[{i}]: must be positive and finite, got {r}"
                    ));
                }
            }
        }
        if self.num_periods < 1 {
            bad.push("num_periods: must be at least 1".to_string());
        }
        if self.num_runs < 1 {
            bad.push("num_runs: must be at least 1".to_string());
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            bad.push(format!("alpha: must lie in (0, 1), got {}", self.alpha));
        }
        if self.position < 1 || self.position > self.period_length {
            bad.push(format!(
                "position: must lie in 1..={}, got {}",
                self.period_length, self.position
            ));
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(format!("invalid config: {}", bad.join("; ")))
        }
    }

    pub fn schedule(&self) -> Result<HashrateSchedule, String> {
        let rates = match &self.hashrate_file {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| format!("cannot read hashrate file {}: {e}", path.display()))?;
                let mut rates = Vec::new();
                for (i, line) in text.lines().enumerate() {
                    let line = line.trim();
                    if line.is_empty() {
                        continue;
                    }
                    let r: f64 = line.parse().map_err(|_| {
                        format!("{}:{}: not a number: {line:?}", path.display(), i + 1)
                    })?;
                    rates.push(r);
                }
                rates
            }
            None => self.hashrates.clone(),
        };
        HashrateSchedule::new(rates).map_err(|e| format!("invalid hashrate schedule: {e}"))
    }

    pub fn chain_params(&self, schedule: &HashrateSchedule) -> Result<ChainParams, String> {
        let d1 = self
            .initial_difficulty
            .unwrap_or(self.target_blocktime * schedule.rate(1));
        ChainParams::new(self.period_length, self.target_blocktime, self.rule, d1)
            .and_then(|p| p.with_clamp_factor(self.clamp_factor))
            .map_err(|e| format!("invalid chain parameters: {e}"))
    }
}
