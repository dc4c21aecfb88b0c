//! Python bindings: chain simulation, the closed-form blocktime laws, and
//! the goodness-of-fit tooling, exposed as plain Python types. Traces come
//! back as dicts of column lists so they drop straight into numpy or pandas.

use blocktime as bt;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: bt::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_rule(rule: &str) -> PyResult<bt::RetargetRule> {
    match rule {
        "ideal" => Ok(bt::RetargetRule::Ideal),
        "corrected" => Ok(bt::RetargetRule::Corrected),
        "clamped" => Ok(bt::RetargetRule::Clamped),
        "bitcoin_bug" => Ok(bt::RetargetRule::BitcoinBug),
        _ => Err(PyValueError::new_err(format!(
            "unknown rule {rule:?}; expected ideal, corrected, clamped, or bitcoin_bug"
        ))),
    }
}

/// `infinite` and `undefined` moments come through as strings, everything
/// else as floats, mirroring the JSON report format.
fn moment_to_py(py: Python<'_>, m: bt::Moment) -> PyResult<Py<PyAny>> {
    Ok(match m {
        bt::Moment::Value(v) => v.into_pyobject(py)?.into_any().unbind(),
        other => other.to_string().into_pyobject(py)?.into_any().unbind(),
    })
}

fn report_to_dict(py: Python<'_>, report: &bt::GofReport) -> PyResult<Py<PyDict>> {
    let verdict = match report.verdict {
        bt::Verdict::Consistent => "consistent",
        bt::Verdict::Rejected => "rejected",
        bt::Verdict::NotApplicable => "not_applicable",
    };
    let predicted = PyDict::new(py);
    predicted.set_item("mean", moment_to_py(py, report.predicted.mean)?)?;
    predicted.set_item("variance", moment_to_py(py, report.predicted.variance)?)?;
    let dict = PyDict::new(py);
    dict.set_item("sample_size", report.sample_size)?;
    dict.set_item("ks_statistic", report.ks_statistic)?;
    dict.set_item("p_value", report.p_value)?;
    dict.set_item("empirical_mean", report.empirical_mean)?;
    dict.set_item("empirical_variance", report.empirical_variance)?;
    dict.set_item("predicted", predicted)?;
    dict.set_item("verdict", verdict)?;
    Ok(dict.unbind())
}

/// Retargeting chain parameters.
#[pyclass(name = "ChainParams", frozen)]
struct PyChainParams {
    inner: bt::ChainParams,
}

#[pymethods]
impl PyChainParams {
    /// `initial_difficulty` defaults to `target_blocktime`, which puts the
    /// first period exactly on target at unit hashrate.
    #[new]
    #[pyo3(signature = (period_length, target_blocktime=10.0, rule="ideal", initial_difficulty=None, clamp_factor=None))]
    fn new(
        period_length: u32,
        target_blocktime: f64,
        rule: &str,
        initial_difficulty: Option<f64>,
        clamp_factor: Option<f64>,
    ) -> PyResult<Self> {
        let d1 = initial_difficulty.unwrap_or(target_blocktime);
        let mut params = bt::ChainParams::new(period_length, target_blocktime, parse_rule(rule)?, d1)
            .map_err(err)?;
        if let Some(f) = clamp_factor {
            params = params.with_clamp_factor(f).map_err(err)?;
        }
        Ok(PyChainParams { inner: params })
    }

    #[getter]
    fn period_length(&self) -> u32 {
        self.inner.period_length
    }

    #[getter]
    fn target_blocktime(&self) -> f64 {
        self.inner.target_blocktime
    }

    #[getter]
    fn rule(&self) -> &'static str {
        self.inner.rule.name()
    }

    #[getter]
    fn initial_difficulty(&self) -> f64 {
        self.inner.initial_difficulty
    }

    #[getter]
    fn clamp_factor(&self) -> f64 {
        self.inner.clamp_factor
    }

    fn __repr__(&self) -> String {
        format!(
            "ChainParams(period_length={}, target_blocktime={}, rule='{}', initial_difficulty={}, clamp_factor={})",
            self.inner.period_length,
            self.inner.target_blocktime,
            self.inner.rule.name(),
            self.inner.initial_difficulty,
            self.inner.clamp_factor
        )
    }
}

/// One of the model's blocktime/rate laws: exponential, Erlang, or Lomax.
#[pyclass(name = "Distribution", frozen)]
struct PyDistribution {
    inner: bt::DistributionSpec,
}

#[pymethods]
impl PyDistribution {
    #[staticmethod]
    fn exponential(rate: f64) -> PyResult<Self> {
        Ok(PyDistribution { inner: bt::DistributionSpec::exponential(rate).map_err(err)? })
    }

    #[staticmethod]
    fn erlang(shape: u32, rate: f64) -> PyResult<Self> {
        Ok(PyDistribution { inner: bt::DistributionSpec::erlang(shape, rate).map_err(err)? })
    }

    #[staticmethod]
    fn lomax(shape: u32, scale: f64) -> PyResult<Self> {
        Ok(PyDistribution { inner: bt::DistributionSpec::lomax(shape, scale).map_err(err)? })
    }

    fn pdf(&self, x: f64) -> PyResult<f64> {
        self.inner.pdf(x).map_err(err)
    }

    fn cdf(&self, x: f64) -> PyResult<f64> {
        self.inner.cdf(x).map_err(err)
    }

    fn quantile(&self, u: f64) -> PyResult<f64> {
        self.inner.quantile(u).map_err(err)
    }

    /// Predicted mean and variance; `infinite`/`undefined` as strings.
    fn moments(&self, py: Python<'_>) -> PyResult<Py<PyDict>> {
        let report = bt::predicted_moments(&self.inner);
        let dict = PyDict::new(py);
        dict.set_item("mean", moment_to_py(py, report.mean)?)?;
        dict.set_item("variance", moment_to_py(py, report.variance)?)?;
        Ok(dict.unbind())
    }

    /// Draws `n` samples on a deterministic stream.
    #[pyo3(signature = (n, seed, stream=0))]
    fn sample(&self, n: usize, seed: u64, stream: u64) -> PyResult<Vec<f64>> {
        let mut rng = bt::RngHandle::with_stream(seed, stream);
        let draw = |rng: &mut bt::RngHandle| match self.inner {
            bt::DistributionSpec::Exponential { rate } => bt::sample_exponential(rate, rng),
            bt::DistributionSpec::Erlang { shape, rate } => bt::sample_erlang(shape, rate, rng),
            bt::DistributionSpec::Lomax { shape, scale } => bt::sample_lomax(shape, scale, rng),
        };
        (0..n).map(|_| draw(&mut rng).map_err(err)).collect()
    }

    fn __repr__(&self) -> String {
        match self.inner {
            bt::DistributionSpec::Exponential { rate } => format!("Distribution.exponential({rate})"),
            bt::DistributionSpec::Erlang { shape, rate } => {
                format!("Distribution.erlang({shape}, {rate})")
            }
            bt::DistributionSpec::Lomax { shape, scale } => {
                format!("Distribution.lomax({shape}, {scale})")
            }
        }
    }
}

fn schedule_from(hashrates: Vec<f64>) -> PyResult<bt::HashrateSchedule> {
    bt::HashrateSchedule::new(hashrates).map_err(err)
}

/// Simulates one chain; returns `{"blocks": {column: [...]}, "periods": {column: [...]}}`.
#[pyfunction]
#[pyo3(signature = (params, num_periods, seed=0, hashrates=vec![1.0]))]
fn simulate_chain(
    py: Python<'_>,
    params: &PyChainParams,
    num_periods: u32,
    seed: u64,
    hashrates: Vec<f64>,
) -> PyResult<Py<PyDict>> {
    let schedule = schedule_from(hashrates)?;
    let mut rng = bt::RngHandle::new(seed);
    let trace = bt::simulate_chain(&params.inner, &schedule, num_periods, &mut rng).map_err(err)?;

    let blocks = PyDict::new(py);
    let column = |f: &dyn Fn(&bt::BlockRecord) -> f64| -> Vec<f64> {
        trace.blocks.iter().map(f).collect()
    };
    blocks.set_item(
        "block_index",
        trace.blocks.iter().map(|b| b.block_index).collect::<Vec<_>>(),
    )?;
    blocks.set_item("period", trace.blocks.iter().map(|b| b.period_index).collect::<Vec<_>>())?;
    blocks.set_item(
        "position",
        trace.blocks.iter().map(|b| b.position_in_period).collect::<Vec<_>>(),
    )?;
    blocks.set_item("blocktime", column(&|b| b.blocktime))?;
    blocks.set_item("arrival_time", column(&|b| b.arrival_time))?;
    blocks.set_item("difficulty", column(&|b| b.difficulty))?;
    blocks.set_item("rate", column(&|b| b.rate))?;

    let periods = PyDict::new(py);
    periods.set_item(
        "period",
        trace.periods.iter().map(|p| p.period_index).collect::<Vec<_>>(),
    )?;
    periods.set_item(
        "difficulty",
        trace.periods.iter().map(|p| p.difficulty).collect::<Vec<_>>(),
    )?;
    periods.set_item(
        "hashrate",
        trace.periods.iter().map(|p| p.hashrate).collect::<Vec<_>>(),
    )?;
    periods.set_item("rate", trace.periods.iter().map(|p| p.rate).collect::<Vec<_>>())?;
    periods.set_item(
        "total_time",
        trace.periods.iter().map(|p| p.total_time).collect::<Vec<_>>(),
    )?;

    let out = PyDict::new(py);
    out.set_item("blocks", blocks)?;
    out.set_item("periods", periods)?;
    Ok(out.unbind())
}

/// Collects the blocktime at (period, position) across an ensemble of
/// independently seeded chains.
#[pyfunction]
#[pyo3(signature = (params, period, position, num_runs, seed=0, hashrates=vec![1.0]))]
fn collect_blocktimes(
    params: &PyChainParams,
    period: u32,
    position: u32,
    num_runs: u64,
    seed: u64,
    hashrates: Vec<f64>,
) -> PyResult<Vec<f64>> {
    let schedule = schedule_from(hashrates)?;
    let target = bt::CollectTarget::Blocktime { period, position };
    let ensemble = bt::run_ensemble(&params.inner, &schedule, period, num_runs, seed, &[target])
        .map_err(err)?;
    Ok(ensemble.take(target).expect("requested target is present"))
}

/// One-sample Kolmogorov-Smirnov test; returns the report as a dict.
#[pyfunction]
#[pyo3(signature = (samples, reference, alpha=0.01))]
fn ks_test(
    py: Python<'_>,
    samples: Vec<f64>,
    reference: &PyDistribution,
    alpha: f64,
) -> PyResult<Py<PyDict>> {
    let report = bt::ks_test(&samples, &reference.inner, alpha).map_err(err)?;
    report_to_dict(py, &report)
}

/// Simulates an ensemble and KS-tests the (period, position) blocktimes
/// against the predicted law.
#[pyfunction]
#[pyo3(signature = (params, period, position, num_runs, seed=0, alpha=0.01, hashrates=vec![1.0]))]
fn verify_theorem(
    py: Python<'_>,
    params: &PyChainParams,
    period: u32,
    position: u32,
    num_runs: u64,
    seed: u64,
    alpha: f64,
    hashrates: Vec<f64>,
) -> PyResult<Py<PyDict>> {
    let schedule = schedule_from(hashrates)?;
    let report =
        bt::verify_theorem(&params.inner, &schedule, period, position, num_runs, seed, alpha)
            .map_err(err)?;
    report_to_dict(py, &report)
}

/// Predicted blocktime law for a period, or None when the rule has no
/// closed form past period 1.
#[pyfunction]
#[pyo3(signature = (period, params, hashrates=vec![1.0]))]
fn predicted_blocktime(
    period: u32,
    params: &PyChainParams,
    hashrates: Vec<f64>,
) -> PyResult<Option<PyDistribution>> {
    let schedule = schedule_from(hashrates)?;
    let spec = bt::predicted_blocktime(period, &params.inner, &schedule).map_err(err)?;
    Ok(spec.map(|inner| PyDistribution { inner }))
}

/// Hill tail-index estimate from the `k_top` largest samples.
#[pyfunction]
fn hill_tail_index(samples: Vec<f64>, k_top: usize) -> PyResult<f64> {
    bt::hill_tail_index(&samples, k_top).map_err(err)
}

/// `N * d / sum(blocktimes)`, the plug-in hashrate estimator.
#[pyfunction]
fn estimate_hashrate(difficulty: f64, blocktimes: Vec<f64>) -> PyResult<f64> {
    bt::estimate_hashrate(difficulty, &blocktimes).map_err(err)
}

/// Next difficulty from one period's blocktimes.
#[pyfunction]
fn retarget(difficulty: f64, blocktimes: Vec<f64>, params: &PyChainParams) -> PyResult<f64> {
    bt::retarget(difficulty, &blocktimes, &params.inner).map_err(err)
}

/// Scale parameter theta_n of the period-n laws.
#[pyfunction]
#[pyo3(signature = (period, params, hashrates=vec![1.0]))]
fn theta(period: u32, params: &PyChainParams, hashrates: Vec<f64>) -> PyResult<f64> {
    let schedule = schedule_from(hashrates)?;
    bt::theta(period, &schedule, &params.inner).map_err(err)
}

#[pymodule]
fn blocktime_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyChainParams>()?;
    m.add_class::<PyDistribution>()?;
    m.add_function(wrap_pyfunction!(simulate_chain, m)?)?;
    m.add_function(wrap_pyfunction!(collect_blocktimes, m)?)?;
    m.add_function(wrap_pyfunction!(ks_test, m)?)?;
    m.add_function(wrap_pyfunction!(verify_theorem, m)?)?;
    m.add_function(wrap_pyfunction!(predicted_blocktime, m)?)?;
    m.add_function(wrap_pyfunction!(hill_tail_index, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_hashrate, m)?)?;
    m.add_function(wrap_pyfunction!(retarget, m)?)?;
    m.add_function(wrap_pyfunction!(theta, m)?)?;
    Ok(())
}
