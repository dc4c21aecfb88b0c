//! `blocktime` command line: simulate retargeting chains, verify the
//! predicted blocktime law by Monte Carlo, print predicted moments, and plot
//! traces. Exit codes: 0 success, 1 verification rejected, 2 errors.

mod config;
mod format;
mod plot;
mod trace_io;

use std::path::PathBuf;

use blocktime::{
    ks_test, predicted_blocktime, predicted_moments, run_ensemble, simulate_chain, verify_theorem,
    CollectTarget, DistributionSpec, GofReport, Moment, RetargetRule, RngHandle, Verdict,
};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use config::RunConfig;
use format::format_sig;

#[derive(Parser)]
#[command(name = "blocktime", version, about = "Proof-of-work blocktime simulator and analytics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one chain; write a CSV trace and a JSON per-period summary
    Simulate(ConfigArgs),
    /// Compare simulated blocktimes against the predicted law per period
    Verify(ConfigArgs),
    /// Print predicted blocktime moments per period
    Moments(MomentsArgs),
    /// Render a trace CSV as an SVG figure
    Plot(PlotArgs),
}

/// Flags mirror the config fields; a flag beats the config file, which beats
/// the documented defaults.
#[derive(Args)]
struct ConfigArgs {
    /// JSON config file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Blocks per retarget period (N)
    #[arg(long)]
    period_length: Option<u32>,
    /// Target blocktime (beta)
    #[arg(long)]
    target_blocktime: Option<f64>,
    /// ideal | corrected | clamped | bitcoin_bug
    #[arg(long, value_parser = parse_rule)]
    rule: Option<RetargetRule>,
    /// Defaults to beta * first hashrate
    #[arg(long)]
    initial_difficulty: Option<f64>,
    #[arg(long)]
    clamp_factor: Option<f64>,
    /// Comma-separated per-period hashrates; the last persists
    #[arg(long, value_delimiter = ',')]
    hashrates: Option<Vec<f64>>,
    /// Plain-text schedule, one hashrate per line
    #[arg(long)]
    hashrate_file: Option<PathBuf>,
    #[arg(long)]
    num_periods: Option<u32>,
    /// Ensemble size for verify
    #[arg(long)]
    num_runs: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// KS significance level
    #[arg(long)]
    alpha: Option<f64>,
    /// Within-period position verified
    #[arg(long)]
    position: Option<u32>,
    /// Trace CSV (simulate) or report JSON (verify)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-period summary JSON (simulate)
    #[arg(long)]
    summary_out: Option<PathBuf>,
}

#[derive(Args)]
struct MomentsArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Emit a JSON array instead of a table
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct PlotArgs {
    /// Trace CSV produced by `simulate`
    trace: PathBuf,
    /// Output SVG; defaults to the trace path with an .svg extension
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_rule(s: &str) -> Result<RetargetRule, String> {
    match s {
        "ideal" => Ok(RetargetRule::Ideal),
        "corrected" => Ok(RetargetRule::Corrected),
        "clamped" => Ok(RetargetRule::Clamped),
        "bitcoin_bug" | "bitcoin-bug" => Ok(RetargetRule::BitcoinBug),
        _ => Err(format!(
            "unknown rule {s:?}; expected ideal, corrected, clamped, or bitcoin_bug"
        )),
    }
}

fn build_config(args: &ConfigArgs) -> Result<RunConfig, String> {
    let mut config = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(v) = args.period_length {
        config.period_length = v;
    }
    if let Some(v) = args.target_blocktime {
        config.target_blocktime = v;
    }
    if let Some(v) = args.rule {
        config.rule = v;
    }
    if let Some(v) = args.initial_difficulty {
        config.initial_difficulty = Some(v);
    }
    if let Some(v) = args.clamp_factor {
        config.clamp_factor = v;
    }
    if let Some(v) = &args.hashrates {
        config.hashrates = v.clone();
        config.hashrate_file = None;
    }
    if let Some(v) = &args.hashrate_file {
        config.hashrate_file = Some(v.clone());
    }
    if let Some(v) = args.num_periods {
        config.num_periods = v;
    }
    if let Some(v) = args.num_runs {
        config.num_runs = v;
    }
    if let Some(v) = args.seed {
        config.seed = v;
    }
    if let Some(v) = args.alpha {
        config.alpha = v;
    }
    if let Some(v) = args.position {
        config.position = v;
    }
    if let Some(v) = &args.out {
        config.out = Some(v.clone());
    }
    if let Some(v) = &args.summary_out {
        config.summary_out = Some(v.clone());
    }
    config.validate()?;
    Ok(config)
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => build_config(&args).and_then(|c| cmd_simulate(&c)),
        Command::Verify(args) => build_config(&args).and_then(|c| cmd_verify(&c)),
        Command::Moments(args) => {
            build_config(&args.config).and_then(|c| cmd_moments(&c, args.json))
        }
        Command::Plot(args) => cmd_plot(&args),
    };
    match result {
        Ok(code) => std::process::exit(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            std::process::exit(2);
        }
    }
}

#[derive(Serialize)]
struct SimulateSummary<'a> {
    periods: &'a [blocktime::PeriodSummary],
}

fn cmd_simulate(config: &RunConfig) -> Result<i32, String> {
    let schedule = config.schedule()?;
    let params = config.chain_params(&schedule)?;
    let mut rng = RngHandle::new(config.seed);
    let trace = simulate_chain(&params, &schedule, config.num_periods, &mut rng)
        .map_err(|e| e.to_string())?;

    let out = config.out.clone().unwrap_or_else(|| PathBuf::from("trace.csv"));
    trace_io::write_trace_csv(&out, &trace)?;

    let summary_out = config
        .summary_out
        .clone()
        .unwrap_or_else(|| out.with_extension("summary.json"));
    let summary = serde_json::to_string_pretty(&SimulateSummary { periods: &trace.periods })
        .expect("period summaries serialize");
    std::fs::write(&summary_out, summary)
        .map_err(|e| format!("cannot write {}: {e}", summary_out.display()))?;

    println!(
        "wrote {} ({} rows) and {}",
        out.display(),
        trace.blocks.len(),
        summary_out.display()
    );
    Ok(0)
}

#[derive(Serialize)]
struct VerifyEntry {
    period: u32,
    position: u32,
    #[serde(flatten)]
    report: GofReport,
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Consistent => "consistent",
        Verdict::Rejected => "rejected",
        Verdict::NotApplicable => "not_applicable",
    }
}

fn cmd_verify(config: &RunConfig) -> Result<i32, String> {
    let schedule = config.schedule()?;
    let params = config.chain_params(&schedule)?;
    let mut entries = Vec::new();
    for period in 1..=config.num_periods {
        let report = match &config.reference_override {
            Some(reference) => {
                let target =
                    CollectTarget::Blocktime { period, position: config.position };
                let ensemble = run_ensemble(
                    &params,
                    &schedule,
                    period,
                    config.num_runs,
                    config.seed,
                    &[target],
                )
                .map_err(|e| e.to_string())?;
                ks_test(ensemble.get(target).unwrap(), reference, config.alpha)
                    .map_err(|e| e.to_string())?
            }
            None => verify_theorem(
                &params,
                &schedule,
                period,
                config.position,
                config.num_runs,
                config.seed,
                config.alpha,
            )
            .map_err(|e| e.to_string())?,
        };
        println!(
            "period {period} position {}: {} (D={:.5}, p={:.4}, mean={})",
            config.position,
            verdict_name(report.verdict),
            report.ks_statistic,
            report.p_value,
            format_sig(report.empirical_mean),
        );
        entries.push(VerifyEntry { period, position: config.position, report });
    }

    let out = config.out.clone().unwrap_or_else(|| PathBuf::from("verify.json"));
    let text = serde_json::to_string_pretty(&entries).expect("reports serialize");
    std::fs::write(&out, text).map_err(|e| format!("cannot write {}: {e}", out.display()))?;
    println!("report written to {}", out.display());

    let rejected = entries.iter().any(|e| e.report.verdict == Verdict::Rejected);
    Ok(if rejected { 1 } else { 0 })
}

#[derive(Serialize)]
struct MomentsEntry {
    period: u32,
    /// `exponential` in period 1, `lomax` afterwards; absent when the rule
    /// has no closed-form law.
    family: Option<&'static str>,
    mean: Moment,
    variance: Moment,
    /// Predicted mean over the target blocktime beta.
    mean_ratio: Moment,
}

fn cmd_moments(config: &RunConfig, json: bool) -> Result<i32, String> {
    let schedule = config.schedule()?;
    let params = config.chain_params(&schedule)?;
    let mut entries = Vec::new();
    for period in 1..=config.num_periods {
        let predicted =
            predicted_blocktime(period, &params, &schedule).map_err(|e| e.to_string())?;
        let entry = match predicted {
            Some(spec) => {
                let report = predicted_moments(&spec);
                let family = match spec {
                    DistributionSpec::Exponential { .. } => "exponential",
                    DistributionSpec::Erlang { .. } => "erlang",
                    DistributionSpec::Lomax { .. } => "lomax",
                };
                let mean_ratio = match report.mean {
                    Moment::Value(m) => Moment::Value(m / config.target_blocktime),
                    other => other,
                };
                MomentsEntry {
                    period,
                    family: Some(family),
                    mean: report.mean,
                    variance: report.variance,
                    mean_ratio,
                }
            }
            None => MomentsEntry {
                period,
                family: None,
                mean: Moment::Undefined,
                variance: Moment::Undefined,
                mean_ratio: Moment::Undefined,
            },
        };
        entries.push(entry);
    }

    if json {
        println!("{}", serde_json::to_string_pretty(&entries).expect("moments serialize"));
    } else {
        println!(
            "{:<8} {:<12} {:<16} {:<16} {}",
            "period", "family", "mean", "variance", "mean_ratio"
        );
        for e in &entries {
            println!(
                "{:<8} {:<12} {:<16} {:<16} {}",
                e.period,
                e.family.unwrap_or("-"),
                moment_cell(e.mean),
                moment_cell(e.variance),
                moment_cell(e.mean_ratio),
            );
        }
    }
    Ok(0)
}

fn moment_cell(m: Moment) -> String {
    match m {
        Moment::Value(v) => format_sig(v),
        other => other.to_string(),
    }
}

fn cmd_plot(args: &PlotArgs) -> Result<i32, String> {
    let rows = trace_io::read_trace_csv(&args.trace)?;
    let out = args.out.clone().unwrap_or_else(|| args.trace.with_extension("svg"));
    plot::write_plot_svg(&out, &rows)?;
    println!("wrote {} ({} markers)", out.display(), rows.len());
    Ok(0)
}
