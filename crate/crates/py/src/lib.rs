//! Python bindings: collections and sum evaluation, sieve helpers,
//! exponential sums, the Goldbach kit and the application sums.

use mtl_core::apps::{run_app, AppOptions, AppParams, AppResult, BenchmarkParams};
use mtl_core::bracket::{eval_bracket, eval_phase, BracketExpr, BracketValue, EvalGuardConfig};
use mtl_core::collection::{builtin_collection, random_collection, BuiltinParams, CollectionConfig, DataCollection};
use mtl_core::engine::{Engine, EngineConfig, Strategy, SumReport, SumValue};
use mtl_core::expsum::{fit_decay, mu_exp_sum, sup_scan, DecayModel, DEFAULT_GRID, DEFAULT_REFINE};
use mtl_core::goldbach::{
    exponent_value, parse_rational, r1_all_with, singular_series, vaughan_compare_with,
    CompareWeight, R1Method, COMPARE_CUTOFF, DEFAULT_FFT_BUDGET,
};
use mtl_core::selftest::{run_selftest, SelftestOptions};
use mtl_core::{sieve, ErrorCategory};
use num_bigint::BigInt;
use num_complex::Complex64;
use pyo3::exceptions::{PyArithmeticError, PyMemoryError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn py_err(e: mtl_core::Error) -> PyErr {
    let msg = e.to_string();
    match e.category() {
        ErrorCategory::Config => PyValueError::new_err(msg),
        ErrorCategory::Resource => PyMemoryError::new_err(msg),
        ErrorCategory::Ambiguity => PyArithmeticError::new_err(msg),
        ErrorCategory::Internal => PyRuntimeError::new_err(msg),
    }
}

trait OrPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for mtl_core::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

fn strategy(name: &str) -> PyResult<Strategy> {
    Ok(match name {
        "direct" => Strategy::Direct,
        "indexed" => Strategy::Indexed,
        "decomposition" | "decomp" => Strategy::Decomposition,
        "scan" => Strategy::Scan,
        other => return Err(PyValueError::new_err(format!("unknown strategy `{other}`"))),
    })
}

fn value_obj(py: Python<'_>, v: &SumValue) -> PyResult<Py<PyAny>> {
    match v {
        SumValue::Exact(i) => Ok(i.into_pyobject(py)?.into_any().unbind()),
        SumValue::Approx(z) => Ok(z.into_pyobject(py)?.into_any().unbind()),
    }
}

/// Result of one evaluation of `S(D; M)`.
#[pyclass(name = "SumReport", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySumReport {
    inner: SumReport,
}

#[pymethods]
impl PySumReport {
    #[getter]
    fn strategy(&self) -> &'static str {
        self.inner.strategy.name()
    }
    #[getter]
    fn target_m(&self) -> i64 {
        self.inner.target_m
    }
    /// `int` for integral weights, `complex` otherwise.
    #[getter]
    fn value(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        value_obj(py, &self.inner.value)
    }
    #[getter]
    fn trivial_bound(&self) -> u128 {
        self.inner.trivial_bound
    }
    #[getter]
    fn savings_ratio(&self) -> f64 {
        self.inner.savings_ratio
    }
    #[getter]
    fn terms_visited(&self) -> u64 {
        self.inner.terms_visited
    }
    #[getter]
    fn seconds(&self) -> f64 {
        self.inner.elapsed.as_secs_f64()
    }
    fn __repr__(&self) -> String {
        format!(
            "SumReport(strategy={}, M={}, value={}, trivial_bound={})",
            self.inner.strategy, self.inner.target_m, self.inner.value, self.inner.trivial_bound
        )
    }
}

/// A data collection `(A, B, N3, p, u, v, f, g)` with a target `M`.
#[pyclass(name = "DataCollection", skip_from_py_object)]
#[derive(Clone)]
struct PyCollection {
    inner: DataCollection,
    engine: EngineConfig,
}

impl PyCollection {
    fn wrap(inner: DataCollection) -> Self {
        Self {
            inner,
            engine: EngineConfig::default(),
        }
    }
}

#[pymethods]
impl PyCollection {
    /// One of the builtin collections; parameters as keyword arguments.
    #[staticmethod]
    #[pyo3(signature = (name, *, n=None, x=None, a_len=None, shift_a=None, shift_b=None, nu=None, alpha=None, beta=None, modulus=None, h=None))]
    #[allow(clippy::too_many_arguments)]
    fn builtin(
        name: &str,
        n: Option<u64>,
        x: Option<u64>,
        a_len: Option<u64>,
        shift_a: Option<i64>,
        shift_b: Option<i64>,
        nu: Option<u8>,
        alpha: Option<String>,
        beta: Option<String>,
        modulus: Option<u64>,
        h: Option<u64>,
    ) -> PyResult<Self> {
        let p = BuiltinParams {
            n,
            x,
            a_len,
            shift_a,
            shift_b,
            nu,
            alpha,
            beta,
            modulus,
            h,
        };
        builtin_collection(name, &p).py().map(Self::wrap)
    }

    /// Parses a collection from its JSON configuration text.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let cfg = CollectionConfig::from_json(text).py()?;
        cfg.into_collection(None).py().map(Self::wrap)
    }

    /// A seeded random collection with intervals inside `[1, max]`.
    #[staticmethod]
    #[pyo3(signature = (seed, max=40))]
    fn random(seed: u64, max: u64) -> Self {
        Self::wrap(random_collection(seed, max))
    }

    #[getter]
    fn target_m(&self) -> i64 {
        self.inner.target_m
    }

    fn with_target(&self, m: i64) -> Self {
        Self {
            inner: self.inner.with_target(m),
            engine: self.engine,
        }
    }

    /// Caps on visited triples/pairs and the index memory budget in bytes.
    #[pyo3(signature = (max_iterations=None, memory_budget=None))]
    fn set_budgets(&mut self, max_iterations: Option<u64>, memory_budget: Option<u64>) {
        if let Some(m) = max_iterations {
            self.engine.direct_cap = m as u128;
            self.engine.pair_cap = m as u128;
        }
        if let Some(b) = memory_budget {
            self.engine.memory_budget = b;
        }
    }

    fn is_valid(&self) -> bool {
        self.inner.validate().is_valid()
    }

    fn trivial_bound(&self) -> u128 {
        self.inner.trivial_bound()
    }

    #[pyo3(signature = (strategy="indexed"))]
    fn eval(&self, py: Python<'_>, strategy: &str) -> PyResult<PySumReport> {
        let s = self::strategy(strategy)?;
        let (dc, cfg) = (self.inner.clone(), self.engine);
        let r = py.detach(move || Engine::new(cfg).eval(&dc, s)).py()?;
        Ok(PySumReport { inner: r })
    }

    /// `S(D; M)` for every `M` in `[lo, hi]`.
    fn scan(&self, py: Python<'_>, lo: i64, hi: i64) -> PyResult<Vec<PySumReport>> {
        let (dc, cfg) = (self.inner.clone(), self.engine);
        let rows = py.detach(move || Engine::new(cfg).scan_m(&dc, lo, hi)).py()?;
        Ok(rows.into_iter().map(|inner| PySumReport { inner }).collect())
    }

    fn __repr__(&self) -> String {
        format!(
            "DataCollection(A={:?}, B={:?}, N3={:?}, p={}, M={})",
            self.inner.interval_a, self.inner.interval_b, self.inner.interval_n3, self.inner.wp, self.inner.target_m
        )
    }
}

/// A bracket polynomial in `n`.
#[pyclass(name = "BracketExpr", frozen, skip_from_py_object)]
struct PyBracket {
    inner: BracketExpr,
}

#[pymethods]
impl PyBracket {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: BracketExpr::parse(text).py()?,
        })
    }

    #[getter]
    fn complexity(&self) -> u32 {
        self.inner.complexity()
    }

    /// Exact value at `n`: `int`, `fractions.Fraction` or `float`.
    fn __call__(&self, py: Python<'_>, n: i64) -> PyResult<Py<PyAny>> {
        match eval_bracket(&self.inner, n, &EvalGuardConfig::default()).py()? {
            BracketValue::Integer(z) => Ok(z.into_pyobject(py)?.into_any().unbind()),
            BracketValue::Rational(q) => fraction(py, q.numer(), q.denom()),
            BracketValue::Real(x) => Ok(x.into_pyobject(py)?.into_any().unbind()),
        }
    }

    /// The value modulo 1, in `[0, 1)`.
    fn phase(&self, n: i64) -> PyResult<f64> {
        eval_phase(&self.inner, n, &EvalGuardConfig::default()).py()
    }

    fn __repr__(&self) -> String {
        format!("BracketExpr({:?})", self.inner.label())
    }
}

fn fraction(py: Python<'_>, num: &BigInt, den: &BigInt) -> PyResult<Py<PyAny>> {
    let cls = py.import("fractions")?.getattr("Fraction")?;
    Ok(cls.call1((num.clone(), den.clone()))?.unbind())
}

/// `mu(n)` for `lo <= n <= hi`.
#[pyfunction]
fn mobius(py: Python<'_>, lo: u64, hi: u64) -> PyResult<Vec<i8>> {
    py.detach(|| sieve::mobius_range(lo, hi)).py()
}

/// `M(x) = sum_{n <= x} mu(n)`.
#[pyfunction]
fn mertens(py: Python<'_>, x: u64) -> PyResult<i64> {
    py.detach(|| sieve::mertens(x)).py()
}

#[pyfunction]
fn prime_pi(py: Python<'_>, x: u64) -> u64 {
    py.detach(|| sieve::prime_pi(x))
}

/// `sum_{n <= N, n = a (mod d)} mu(n) e(alpha n)`.
#[pyfunction]
#[pyo3(signature = (n, alpha, d=1, a=0))]
fn mu_exp_sum_py(py: Python<'_>, n: u64, alpha: f64, d: u64, a: u64) -> PyResult<Complex64> {
    Ok(py.detach(|| mu_exp_sum(n, alpha, d, a)).py()?.value)
}

/// `(alpha_star, |F(alpha_star)|)`, a lower bound for the sup over alpha.
#[pyfunction(name = "sup_scan")]
#[pyo3(signature = (n, grid=DEFAULT_GRID, refine=DEFAULT_REFINE))]
fn sup_scan_py(py: Python<'_>, n: u64, grid: usize, refine: u32) -> PyResult<(f64, f64)> {
    let r = py.detach(|| sup_scan(n, grid, refine)).py()?;
    Ok((r.alpha_star, r.sup_lower_bound))
}

/// Fits `value = K N (log N)^(-C)` (`log_power`) or `K N^b` (`power`);
/// returns the exponent and the RMS residual.
#[pyfunction(name = "fit_decay")]
#[pyo3(signature = (points, model="log_power"))]
fn fit_decay_py(points: Vec<(f64, f64)>, model: &str) -> PyResult<(f64, f64)> {
    let model = match model {
        "log_power" => DecayModel::LogPower,
        "power" => DecayModel::Power,
        other => return Err(PyValueError::new_err(format!("unknown model `{other}`"))),
    };
    let fit = fit_decay(&points, model).py()?;
    Ok((fit.parameter, fit.residual))
}

/// `R_1(m)` for every `m <= x`, indexed by `m`.
#[pyfunction]
#[pyo3(signature = (x, method="auto"))]
fn r1_all(py: Python<'_>, x: u64, method: &str) -> PyResult<Vec<f64>> {
    let method = match method {
        "auto" => R1Method::Auto,
        "direct" => R1Method::Direct,
        "fft" => R1Method::Fft,
        other => return Err(PyValueError::new_err(format!("unknown method `{other}`"))),
    };
    py.detach(|| r1_all_with(x, method, DEFAULT_FFT_BUDGET)).py()
}

/// `(value, prime_cutoff, tail_bound)` for the singular series at `m`.
#[pyfunction(name = "singular_series")]
#[pyo3(signature = (m, tolerance=1e-9))]
fn singular_series_py(py: Python<'_>, m: u64, tolerance: f64) -> PyResult<(f64, u64, f64)> {
    let s = py.detach(|| singular_series(m, tolerance)).py()?;
    Ok((s.value, s.prime_cutoff, s.tail_bound))
}

/// Weighted sums of `R_1(m)` and `m S_1(m)` over `m <= x`, as a dict.
#[pyfunction]
#[pyo3(signature = (x, weight="mobius", cutoff=COMPARE_CUTOFF))]
fn vaughan_compare<'py>(py: Python<'py>, x: u64, weight: &str, cutoff: u64) -> PyResult<Bound<'py, PyDict>> {
    let weight = match weight {
        "mobius" => CompareWeight::Mobius,
        "abs_mobius" => CompareWeight::AbsMobius,
        "one" => CompareWeight::One,
        other => return Err(PyValueError::new_err(format!("unknown weight `{other}`"))),
    };
    let c = py.detach(|| vaughan_compare_with(x, weight, cutoff)).py()?;
    let d = PyDict::new(py);
    d.set_item("x", c.x)?;
    d.set_item("left", c.left)?;
    d.set_item("right", c.right)?;
    d.set_item("left_normalized", c.left_normalized)?;
    d.set_item("right_normalized", c.right_normalized)?;
    d.set_item("difference_normalized", c.difference_normalized)?;
    d.set_item("cutoff", c.prime_cutoff)?;
    Ok(d)
}

/// `(b(sigma), c(sigma))` as `fractions.Fraction`; `sigma` like `"4/7"`.
#[pyfunction]
fn exponents(py: Python<'_>, sigma: &str) -> PyResult<(Py<PyAny>, Py<PyAny>)> {
    let v = exponent_value(&parse_rational(sigma).py()?).py()?;
    Ok((
        fraction(py, v.b.numer(), v.b.denom())?,
        fraction(py, v.c.numer(), v.c.denom())?,
    ))
}

fn app_dict<'py>(py: Python<'py>, r: &AppResult) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("app", &r.app_name)?;
    d.set_item("params", r.params.clone())?;
    d.set_item("report", PySumReport { inner: r.report.clone() })?;
    d.set_item("value", value_obj(py, &r.report.value)?)?;
    d.set_item("normalized", r.normalized)?;
    let bench: Vec<(String, f64)> = r.benchmarks.iter().map(|b| (b.name.clone(), b.value)).collect();
    d.set_item("benchmarks", bench)?;
    Ok(d)
}

/// Runs an application sum by name; see the command line `app` help.
#[pyfunction]
#[pyo3(signature = (name, *, strategy="indexed", x=None, a=None, b=None, a_len=None, nu=None, alpha=None, beta=None, m=None, n=None, h=None, sigma="1/2"))]
#[allow(clippy::too_many_arguments)]
fn app<'py>(
    py: Python<'py>,
    name: &str,
    strategy: &str,
    x: Option<u64>,
    a: Option<i64>,
    b: Option<i64>,
    a_len: Option<u64>,
    nu: Option<u8>,
    alpha: Option<String>,
    beta: Option<String>,
    m: Option<u64>,
    n: Option<u64>,
    h: Option<u64>,
    sigma: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let params = AppParams {
        x,
        a,
        b,
        a_len,
        nu,
        alpha,
        beta,
        m,
        n,
        h,
        bench: BenchmarkParams {
            sigma: parse_rational(sigma).py()?,
            ..BenchmarkParams::default()
        },
    };
    let opts = AppOptions {
        strategy: self::strategy(strategy)?,
        ..AppOptions::default()
    };
    let r = py.detach(|| run_app(name, &params, &opts)).py()?;
    app_dict(py, &r)
}

/// Runs the invariant suite; returns `(name, passed, detail)` triples.
#[pyfunction]
#[pyo3(signature = (quick=true, seed=0))]
fn selftest(py: Python<'_>, quick: bool, seed: u64) -> Vec<(String, bool, String)> {
    py.detach(|| run_selftest(SelftestOptions { quick, seed }))
        .into_iter()
        .map(|c| (c.name, c.passed, c.detail))
        .collect()
}

#[pymodule(name = "mtl")]
fn mtl_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", mtl_core::VERSION)?;
    m.add_class::<PyCollection>()?;
    m.add_class::<PySumReport>()?;
    m.add_class::<PyBracket>()?;
    m.add_function(wrap_pyfunction!(mobius, m)?)?;
    m.add_function(wrap_pyfunction!(mertens, m)?)?;
    m.add_function(wrap_pyfunction!(prime_pi, m)?)?;
    m.add("mu_exp_sum", wrap_pyfunction!(mu_exp_sum_py, m)?)?;
    m.add_function(wrap_pyfunction!(sup_scan_py, m)?)?;
    m.add_function(wrap_pyfunction!(fit_decay_py, m)?)?;
    m.add_function(wrap_pyfunction!(r1_all, m)?)?;
    m.add_function(wrap_pyfunction!(singular_series_py, m)?)?;
    m.add_function(wrap_pyfunction!(vaughan_compare, m)?)?;
    m.add_function(wrap_pyfunction!(exponents, m)?)?;
    m.add_function(wrap_pyfunction!(app, m)?)?;
    m.add_function(wrap_pyfunction!(selftest, m)?)?;
    Ok(())
}
