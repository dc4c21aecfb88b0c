//! Property tests for the retarget rules, the distribution machinery, and
//! the simulator's determinism and scaling contracts.

use blocktime::{
    rate_from, retarget, run_ensemble, simulate_chain, theta, ChainParams, CollectTarget,
    DistributionSpec, HashrateSchedule, RetargetRule, RngHandle,
};
use proptest::prelude::*;

fn rule_strategy() -> impl Strategy<Value = RetargetRule> {
    prop_oneof![
        Just(RetargetRule::Ideal),
        Just(RetargetRule::Corrected),
        Just(RetargetRule::Clamped),
        Just(RetargetRule::BitcoinBug),
    ]
}

/// Period length compatible with every rule (corrected and bugged need N >= 2).
fn blocktimes_strategy() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1e4, 2..=50)
}

fn params_for(n: usize, beta: f64, rule: RetargetRule, d: f64) -> ChainParams {
    ChainParams::new(n as u32, beta, rule, d).unwrap()
}

proptest! {
    /// A period that lands exactly on target leaves the difficulty unchanged,
    /// bit for bit. Integer-valued targets make the sum exact in binary.
    #[test]
    fn retarget_fixed_point_is_exact(
        d in 1e-3f64..1e6,
        beta_int in 1u32..=100,
        n in 1usize..=50,
    ) {
        let beta = f64::from(beta_int);
        let params = params_for(n, beta, RetargetRule::Ideal, d);
        let blocktimes = vec![beta; n];
        prop_assert_eq!(retarget(d, &blocktimes, &params).unwrap(), d);
    }

    /// For arbitrary real targets the fixed point holds to rounding.
    #[test]
    fn retarget_fixed_point_within_rounding(
        d in 1e-3f64..1e6,
        beta in 0.1f64..100.0,
        n in 1usize..=50,
    ) {
        let params = params_for(n, beta, RetargetRule::Ideal, d);
        let blocktimes = vec![beta; n];
        let out = retarget(d, &blocktimes, &params).unwrap();
        prop_assert!(((out - d) / d).abs() < 1e-12);
    }

    /// retarget(c*d) = c*retarget(d) for every rule.
    #[test]
    fn retarget_is_homogeneous(
        d in 1e-3f64..1e6,
        c in 1e-3f64..1e3,
        beta in 0.1f64..100.0,
        rule in rule_strategy(),
        blocktimes in blocktimes_strategy(),
    ) {
        let params = params_for(blocktimes.len(), beta, rule, d);
        let base = retarget(d, &blocktimes, &params).unwrap();
        let scaled = retarget(c * d, &blocktimes, &params).unwrap();
        prop_assert!(((scaled - c * base) / (c * base)).abs() < 1e-12);
    }

    #[test]
    fn retarget_outputs_stay_positive(
        d in 1e-3f64..1e6,
        beta in 0.1f64..100.0,
        rule in rule_strategy(),
        blocktimes in blocktimes_strategy(),
    ) {
        let params = params_for(blocktimes.len(), beta, rule, d);
        let out = retarget(d, &blocktimes, &params).unwrap();
        prop_assert!(out > 0.0 && out.is_finite());
    }

    /// The clamped rule never moves the difficulty by more than the clamp
    /// factor in either direction.
    #[test]
    fn clamp_containment(
        d in 1e-3f64..1e6,
        beta in 0.1f64..100.0,
        factor in 1.0f64..=8.0,
        blocktimes in blocktimes_strategy(),
    ) {
        let params = params_for(blocktimes.len(), beta, RetargetRule::Clamped, d)
            .with_clamp_factor(factor)
            .unwrap();
        let ratio = retarget(d, &blocktimes, &params).unwrap() / d;
        prop_assert!(ratio >= 1.0 / factor * (1.0 - 1e-12));
        prop_assert!(ratio <= factor * (1.0 + 1e-12));
    }

    #[test]
    fn rate_depends_only_on_the_ratio(
        d in 1e-3f64..1e9,
        r in 1e-3f64..1e9,
        c in 1e-6f64..1e6,
    ) {
        let base = rate_from(d, r).unwrap();
        let scaled = rate_from(c * d, c * r).unwrap();
        prop_assert!(((scaled - base) / base).abs() < 1e-12);
    }
}

fn spec_strategy() -> impl Strategy<Value = DistributionSpec> {
    let magnitude = -3.0f64..3.0;
    prop_oneof![
        magnitude
            .clone()
            .prop_map(|e| DistributionSpec::exponential(10f64.powf(e)).unwrap()),
        (1u32..=256, magnitude.clone())
            .prop_map(|(n, e)| DistributionSpec::erlang(n, 10f64.powf(e)).unwrap()),
        (1u32..=2016, magnitude)
            .prop_map(|(n, e)| DistributionSpec::lomax(n, 10f64.powf(e)).unwrap()),
    ]
}

proptest! {
    #[test]
    fn cdf_of_quantile_recovers_u(spec in spec_strategy(), u in 0.0f64..0.999999) {
        let x = spec.quantile(u).unwrap();
        prop_assert!(x >= 0.0 && x.is_finite());
        let back = spec.cdf(x).unwrap();
        prop_assert!((back - u).abs() < 1e-10, "u {} -> x {} -> {}", u, x, back);
    }

    /// Round-trip through the central mass: quantile(cdf(x)) returns x.
    #[test]
    fn quantile_of_cdf_recovers_x(spec in spec_strategy(), u in 0.005f64..0.995) {
        let x = spec.quantile(u).unwrap();
        let back = spec.quantile(spec.cdf(x).unwrap()).unwrap();
        prop_assert!(((back - x) / x.max(1e-300)).abs() < 1e-8,
            "x {} -> {}", x, back);
    }

    /// Monotone up to the absolute noise floor: many standard deviations into
    /// the left tail of a large-shape Erlang, the Poisson log-sum cancels
    /// against `rate * x` and the result is only accurate to ~1e-13.
    #[test]
    fn cdf_is_monotone(spec in spec_strategy(), a in 0.0f64..1e4, b in 0.0f64..1e4) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(spec.cdf(lo).unwrap() <= spec.cdf(hi).unwrap() + 1e-12);
    }
}

fn chain_config_strategy() -> impl Strategy<
    Value = (ChainParams, HashrateSchedule, u32, u64),
> {
    (
        2u32..=16,
        0.5f64..50.0,
        rule_strategy(),
        0.1f64..100.0,
        prop::collection::vec(0.1f64..10.0, 1..=3),
        1u32..=5,
        any::<u64>(),
    )
        .prop_map(|(n, beta, rule, d, rates, periods, seed)| {
            (
                ChainParams::new(n, beta, rule, d).unwrap(),
                HashrateSchedule::new(rates).unwrap(),
                periods,
                seed,
            )
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Every structural invariant of a trace, for every rule.
    #[test]
    fn trace_invariants((params, schedule, periods, seed) in chain_config_strategy()) {
        let mut rng = RngHandle::new(seed);
        let trace = simulate_chain(&params, &schedule, periods, &mut rng).unwrap();
        let n = params.period_length as usize;
        prop_assert_eq!(trace.blocks.len(), trace.periods.len() * n);
        prop_assert_eq!(trace.periods.len(), periods as usize);

        let mut t_prev = 0.0;
        for (i, b) in trace.blocks.iter().enumerate() {
            prop_assert_eq!(b.block_index, i as u64 + 1);
            prop_assert_eq!(b.period_index, i as u32 / params.period_length + 1);
            prop_assert_eq!(b.position_in_period, i as u32 % params.period_length + 1);
            prop_assert!(b.blocktime > 0.0 && b.blocktime.is_finite());
            prop_assert!(((b.arrival_time - (t_prev + b.blocktime)) / b.arrival_time).abs() < 1e-12);
            t_prev = b.arrival_time;
            let summary = &trace.periods[b.period_index as usize - 1];
            prop_assert_eq!(b.difficulty, summary.difficulty);
            prop_assert_eq!(b.rate, summary.rate);
        }

        for (k, summary) in trace.periods.iter().enumerate() {
            let total: f64 = trace.blocks[k * n..(k + 1) * n].iter().map(|b| b.blocktime).sum();
            prop_assert!(((summary.total_time - total) / total).abs() < 1e-9);
            prop_assert_eq!(summary.hashrate, schedule.rate(summary.period_index));
            prop_assert!(
                ((summary.rate - summary.hashrate / summary.difficulty) / summary.rate).abs()
                    < 1e-12
            );
        }

        // period recursions; theta is defined for the two closed-form rules
        for w in trace.periods.windows(2) {
            match params.rule {
                RetargetRule::Ideal => {
                    let predicted = w[0].difficulty
                        * (params.period_length as f64 * params.target_blocktime)
                        / w[0].total_time;
                    prop_assert!(((w[1].difficulty - predicted) / predicted).abs() < 1e-9);
                }
                RetargetRule::Corrected => {
                    let predicted = w[0].difficulty
                        * ((params.period_length - 1) as f64 * params.target_blocktime)
                        / w[0].total_time;
                    prop_assert!(((w[1].difficulty - predicted) / predicted).abs() < 1e-9);
                }
                _ => {}
            }
            if params.rule.has_closed_form() {
                let th = theta(w[1].period_index, &schedule, &params).unwrap();
                let predicted_rate = w[0].total_time / th * w[0].rate;
                prop_assert!(((w[1].rate - predicted_rate) / predicted_rate).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn traces_are_seed_deterministic((params, schedule, periods, seed) in chain_config_strategy()) {
        let a = simulate_chain(&params, &schedule, periods, &mut RngHandle::new(seed)).unwrap();
        let b = simulate_chain(&params, &schedule, periods, &mut RngHandle::new(seed)).unwrap();
        prop_assert_eq!(a, b);
    }

    /// Rescaling difficulty and hashrate together by a power of two leaves
    /// the blocktime sequence bit-identical (the rate ratio is unchanged and
    /// the draws consume the same stream).
    #[test]
    fn traces_are_scale_invariant((params, schedule, periods, seed) in chain_config_strategy()) {
        let base = simulate_chain(&params, &schedule, periods, &mut RngHandle::new(seed)).unwrap();

        let c = 4.0;
        let scaled_params = ChainParams::new(
            params.period_length,
            params.target_blocktime,
            params.rule,
            c * params.initial_difficulty,
        )
        .unwrap()
        .with_clamp_factor(params.clamp_factor)
        .unwrap();
        let scaled_schedule =
            HashrateSchedule::new(schedule.rates().iter().map(|r| c * r).collect()).unwrap();
        let scaled =
            simulate_chain(&scaled_params, &scaled_schedule, periods, &mut RngHandle::new(seed))
                .unwrap();
        for (a, b) in base.blocks.iter().zip(&scaled.blocks) {
            prop_assert_eq!(a.blocktime.to_bits(), b.blocktime.to_bits());
        }

        // an odd factor rounds the rate by an ulp; blocktimes track it closely
        let c = 3.0;
        let odd_params = ChainParams::new(
            params.period_length,
            params.target_blocktime,
            params.rule,
            c * params.initial_difficulty,
        )
        .unwrap()
        .with_clamp_factor(params.clamp_factor)
        .unwrap();
        let odd_schedule =
            HashrateSchedule::new(schedule.rates().iter().map(|r| c * r).collect()).unwrap();
        let odd =
            simulate_chain(&odd_params, &odd_schedule, periods, &mut RngHandle::new(seed))
                .unwrap();
        for (a, b) in base.blocks.iter().zip(&odd.blocks) {
            prop_assert!(((a.blocktime - b.blocktime) / a.blocktime).abs() < 1e-9);
        }
    }

    /// Ensemble collection equals running the member chains one by one.
    #[test]
    fn ensembles_are_order_independent(
        (params, schedule, periods, seed) in chain_config_strategy(),
        num_runs in 1u64..=16,
    ) {
        let position = params.period_length; // last block of the last period
        let target = CollectTarget::Blocktime { period: periods, position };
        let rate_target = CollectTarget::PeriodRate { period: periods };
        let ensemble =
            run_ensemble(&params, &schedule, periods, num_runs, seed, &[target, rate_target])
                .unwrap();
        for run in 1..=num_runs {
            let mut rng = RngHandle::with_stream(seed, run);
            let trace = simulate_chain(&params, &schedule, periods, &mut rng).unwrap();
            let i = run as usize - 1;
            let block = &trace.blocks[trace.blocks.len() - 1];
            prop_assert_eq!(ensemble.get(target).unwrap()[i].to_bits(), block.blocktime.to_bits());
            prop_assert_eq!(
                ensemble.get(rate_target).unwrap()[i].to_bits(),
                trace.periods[periods as usize - 1].rate.to_bits()
            );
        }
    }
}
