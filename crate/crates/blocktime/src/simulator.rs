//! Chain-trace generation and parallel ensemble execution.
//!
//! A trace draws each blocktime from Exp(lambda) with lambda fixed within a
//! period and re-derived from the retargeted difficulty at every period
//! boundary. The discrete Bernoulli-trial miner exists only as an oracle for
//! the exponential model; production sampling never goes through it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{rate_from, retarget, ChainParams, HashrateSchedule};
use crate::sampler::{sample_exponential, sample_geometric, RngHandle};

/// One mined block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockRecord {
    /// Global 1-based block index k.
    pub block_index: u64,
    /// 1-based retargeting period, ceil(k/N).
    pub period_index: u32,
    /// 1-based position within the period, in [1, N].
    pub position_in_period: u32,
    /// Waiting time since the previous block.
    pub blocktime: f64,
    /// Cumulative arrival time, t_0 = 0.
    pub arrival_time: f64,
    /// Difficulty in force for this block; constant within a period.
    pub difficulty: f64,
    /// Arrival rate hashrate/difficulty for this block's period.
    pub rate: f64,
}

/// Per-period aggregate state of one trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodSummary {
    pub period_index: u32,
    pub difficulty: f64,
    pub hashrate: f64,
    pub rate: f64,
    /// Sum of the period's blocktimes.
    pub total_time: f64,
}

/// A full simulated chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainTrace {
    pub params: ChainParams,
    pub schedule: HashrateSchedule,
    pub blocks: Vec<BlockRecord>,
    pub periods: Vec<PeriodSummary>,
}

/// Simulate `num_periods` retargeting periods of one chain.
pub fn simulate_chain(
    params: &ChainParams,
    schedule: &HashrateSchedule,
    num_periods: u32,
    rng: &mut RngHandle,
) -> Result<ChainTrace> {
    params.validate()?;
    if num_periods < 1 {
        return Err(Error::contract("num_periods must be at least 1"));
    }
    let n = params.period_length;
    let mut blocks = Vec::with_capacity(num_periods as usize * n as usize);
    let mut periods = Vec::with_capacity(num_periods as usize);
    let mut difficulty = params.initial_difficulty;
    let mut arrival_time = 0.0;
    let mut block_index = 0u64;

    for period_index in 1..=num_periods {
        let hashrate = schedule.rate(period_index);
        let rate = rate_from(difficulty, hashrate)?;
        let mut blocktimes = Vec::with_capacity(n as usize);
        for position in 1..=n {
            let blocktime = sample_exponential(rate, rng)?;
            arrival_time += blocktime;
            block_index += 1;
            blocktimes.push(blocktime);
            blocks.push(BlockRecord {
                block_index,
                period_index,
                position_in_period: position,
                blocktime,
                arrival_time,
                difficulty,
                rate,
            });
        }
        periods.push(PeriodSummary {
            period_index,
            difficulty,
            hashrate,
            rate,
            total_time: blocktimes.iter().sum(),
        });
        if period_index < num_periods {
            difficulty = retarget(difficulty, &blocktimes, params)?;
        }
    }

    Ok(ChainTrace {
        params: params.clone(),
        schedule: schedule.clone(),
        blocks,
        periods,
    })
}

/// Mine `num_blocks` by literal Bernoulli trials: each hash succeeds with
/// probability 1/d, attempts arrive at rate h, so a blocktime is
/// (trials to first success)/h. Requires d > 1; at d near 1 the geometric
/// discreteness is visible and the exponential limit does not hold.
pub fn simulate_discrete_miner(
    difficulty: f64,
    hashes_per_unit_time: f64,
    num_blocks: u64,
    rng: &mut RngHandle,
) -> Result<Vec<f64>> {
    if !(difficulty > 1.0) || !difficulty.is_finite() {
        return Err(Error::domain(format!(
            "difficulty must exceed 1 for the Bernoulli miner, got {difficulty}"
        )));
    }
    if !(hashes_per_unit_time > 0.0) || !hashes_per_unit_time.is_finite() {
        return Err(Error::domain(format!(
            "hash rate must be positive and finite, got {hashes_per_unit_time}"
        )));
    }
    if num_blocks < 1 {
        return Err(Error::contract("num_blocks must be at least 1"));
    }
    let p = 1.0 / difficulty;
    (0..num_blocks)
        .map(|_| Ok(sample_geometric(p, rng)? as f64 / hashes_per_unit_time))
        .collect()
}

/// What to collect from each ensemble run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CollectTarget {
    /// Blocktime of the block at (period, position), both 1-based.
    Blocktime { period: u32, position: u32 },
    /// The period's arrival rate lambda_n.
    PeriodRate { period: u32 },
}

/// Collected ensemble output: per target, one value from each of the M runs,
/// ordered by run index.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSamples {
    entries: Vec<(CollectTarget, Vec<f64>)>,
}

impl EnsembleSamples {
    pub fn get(&self, target: CollectTarget) -> Option<&[f64]> {
        self.entries
            .iter()
            .find(|(t, _)| *t == target)
            .map(|(_, xs)| xs.as_slice())
    }

    pub fn take(mut self, target: CollectTarget) -> Option<Vec<f64>> {
        let idx = self.entries.iter().position(|(t, _)| *t == target)?;
        Some(self.entries.swap_remove(idx).1)
    }

    pub fn targets(&self) -> impl Iterator<Item = CollectTarget> + '_ {
        self.entries.iter().map(|(t, _)| *t)
    }
}

/// Run M independent chains and collect the requested samples.
///
/// Run m uses stream id m of `seed`, so adding runs never perturbs existing
/// ones and the result is independent of scheduling order.
pub fn run_ensemble(
    params: &ChainParams,
    schedule: &HashrateSchedule,
    num_periods: u32,
    num_runs: u64,
    seed: u64,
    collect: &[CollectTarget],
) -> Result<EnsembleSamples> {
    params.validate()?;
    if num_runs < 1 {
        return Err(Error::contract("num_runs must be at least 1"));
    }
    if collect.is_empty() {
        return Err(Error::contract("at least one collect target is required"));
    }
    for target in collect {
        let (period, position) = match *target {
            CollectTarget::Blocktime { period, position } => (period, position),
            CollectTarget::PeriodRate { period } => (period, 1),
        };
        if period < 1 || period > num_periods {
            return Err(Error::contract(format!(
                "collect period {period} outside simulated range 1..={num_periods}"
            )));
        }
        if position < 1 || position > params.period_length {
            return Err(Error::contract(format!(
                "collect position {position} outside period range 1..={}",
                params.period_length
            )));
        }
    }

    let per_run: Vec<Vec<f64>> = (1..=num_runs)
        .into_par_iter()
        .map(|run| {
            let mut rng = RngHandle::with_stream(seed, run);
            let trace = simulate_chain(params, schedule, num_periods, &mut rng)?;
            Ok(collect.iter().map(|t| extract(&trace, *t)).collect())
        })
        .collect::<Result<_>>()?;

    let mut entries: Vec<(CollectTarget, Vec<f64>)> = collect
        .iter()
        .map(|t| (*t, Vec::with_capacity(num_runs as usize)))
        .collect();
    for run_values in &per_run {
        for (entry, value) in entries.iter_mut().zip(run_values) {
            entry.1.push(*value);
        }
    }
    Ok(EnsembleSamples { entries })
}

fn extract(trace: &ChainTrace, target: CollectTarget) -> f64 {
    let n = trace.params.period_length as usize;
    match target {
        CollectTarget::Blocktime { period, position } => {
            trace.blocks[(period as usize - 1) * n + position as usize - 1].blocktime
        }
        CollectTarget::PeriodRate { period } => trace.periods[period as usize - 1].rate,
    }
}
