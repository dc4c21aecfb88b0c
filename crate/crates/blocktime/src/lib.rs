//! Monte Carlo simulation and closed-form analysis of proof-of-work block
//! arrival times under difficulty retargeting.
//!
//! The model: block k arrives after an exponential waiting time with rate
//! `lambda_k = r_k / d_k` (hashrate over difficulty), and every N blocks the
//! difficulty is rescaled toward a target blocktime `beta`. Retargeting
//! couples each period's rate to the previous period's realized duration,
//! which makes the per-period rate Erlang-distributed and the marginal
//! blocktime in later periods Lomax-distributed with shape N and scale
//! `theta_n = N*beta/delta_n`. The heavy Lomax tail is real: for N = 2 the
//! blocktime variance is infinite, and even at Bitcoin scale (N = 2016) the
//! expected blocktime overshoots the target by a factor N/(N-1).
//!
//! The crate provides:
//!
//! * [`model`] — protocol parameters and the retargeting rules (ideal,
//!   corrected, clamped, off-by-one).
//! * [`sampler`] — deterministic, stream-seeded variate generation.
//! * [`simulator`] — chain traces, a discrete Bernoulli-trial miner, and
//!   parallel ensembles over independent streams.
//! * [`analytics`] — exponential/Erlang/Lomax densities, CDFs, quantiles,
//!   moments, the predicted blocktime law per period, and the hashrate
//!   estimator.
//! * [`stats`] — empirical moments, a one-sample Kolmogorov-Smirnov test,
//!   the Hill tail-index estimator, and the end-to-end distribution checks.

pub mod analytics;
pub mod error;
pub mod model;
pub mod sampler;
pub mod simulator;
pub mod stats;

pub use analytics::{
    estimate_hashrate, predicted_blocktime, predicted_moments, DistributionSpec, Moment,
    MomentReport,
};
pub use error::{Error, Result};
pub use model::{rate_from, retarget, theta, ChainParams, HashrateSchedule, PeriodState, RetargetRule};
pub use sampler::{
    sample_erlang, sample_exponential, sample_geometric, sample_lomax, RngHandle,
};
pub use simulator::{
    run_ensemble, simulate_chain, simulate_discrete_miner, BlockRecord, ChainTrace,
    CollectTarget, EnsembleSamples, PeriodSummary,
};
pub use stats::{
    empirical_moments, hill_tail_index, kolmogorov_survival, ks_test, verify_theorem, GofReport,
    Verdict,
};
