//! Python bindings for the `qwalk` crate.
//!
//! Positions of a `PureState` are integer keys on the internal lattice, which
//! is the physical lattice scaled by `WalkConfig.scale`. Distributions and
//! limit measures report physical coordinates.

use pyo3::create_exception;
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyTuple};

use nalgebra::DMatrix;
use qwalk::limit::{default_grid_points, sample_measure};
use qwalk::metrics::{default_omega_range, omega_grid};
use qwalk::runconfig::RunConfig;
use qwalk::{Complex64, Rational, RationalVec, WalkError};

create_exception!(pyqwalk, NumericalError, PyArithmeticError);

fn to_py(e: WalkError) -> PyErr {
    if e.is_numerical() {
        NumericalError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

#[derive(FromPyObject)]
enum Coord {
    Int(i64),
    Frac((i64, i64)),
}

fn parse_shifts(shifts: Vec<Vec<Coord>>) -> PyResult<Vec<RationalVec>> {
    shifts
        .into_iter()
        .map(|v| {
            v.into_iter()
                .map(|c| match c {
                    Coord::Int(n) => Ok(Rational::integer(n)),
                    Coord::Frac((n, d)) => Rational::new(n, d).map_err(to_py),
                })
                .collect::<PyResult<Vec<_>>>()
                .map(RationalVec::new)
        })
        .collect()
}

fn parse_coin(rows: Vec<Vec<Complex64>>) -> PyResult<DMatrix<Complex64>> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("coin must be a square matrix"));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

/// Walk definition: rational shift vectors and a unitary coin.
#[pyclass(name = "WalkConfig", module = "pyqwalk", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyWalkConfig {
    inner: qwalk::WalkConfig,
}

#[pymethods]
impl PyWalkConfig {
    /// `shifts` holds one vector per coin state; each coordinate is an int or a
    /// `(num, den)` pair. `coin` is a list of rows of complex numbers.
    #[new]
    fn new(shifts: Vec<Vec<Coord>>, coin: Vec<Vec<Complex64>>) -> PyResult<Self> {
        let shifts = parse_shifts(shifts)?;
        let dim = shifts.first().map(|v| v.dim()).unwrap_or(0);
        let inner = qwalk::WalkConfig::new(dim, shifts, parse_coin(coin)?).map_err(to_py)?;
        Ok(PyWalkConfig { inner })
    }

    #[staticmethod]
    fn hadamard() -> Self {
        PyWalkConfig { inner: qwalk::WalkConfig::hadamard() }
    }

    #[staticmethod]
    fn grover(dimension: usize) -> PyResult<Self> {
        if dimension == 0 {
            return Err(PyValueError::new_err("dimension must be positive"));
        }
        Ok(PyWalkConfig { inner: qwalk::WalkConfig::grover(dimension) })
    }

    /// Identity coin: each coin state moves along its own shift forever.
    #[staticmethod]
    fn ballistic(shifts: Vec<Vec<Coord>>) -> PyResult<Self> {
        let shifts = parse_shifts(shifts)?;
        let dim = shifts.first().map(|v| v.dim()).unwrap_or(0);
        let n = shifts.len();
        let inner = qwalk::WalkConfig::new(dim, shifts, DMatrix::identity(n, n)).map_err(to_py)?;
        Ok(PyWalkConfig { inner })
    }

    #[getter]
    fn dimension(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn coin_size(&self) -> usize {
        self.inner.coin_size()
    }

    /// Common denominator of all shift coordinates.
    #[getter]
    fn scale(&self) -> i64 {
        self.inner.scale()
    }

    #[getter]
    fn shifts(&self) -> Vec<Vec<f64>> {
        self.inner.shifts_f64()
    }

    #[getter]
    fn coin(&self) -> Vec<Vec<Complex64>> {
        let c = self.inner.coin();
        (0..c.nrows()).map(|i| (0..c.ncols()).map(|j| c[(i, j)]).collect()).collect()
    }

    /// Problems with this configuration; empty when valid.
    fn validate(&self) -> Vec<String> {
        qwalk::validate_config(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!("WalkConfig(dimension={}, coin_size={}, scale={})", self.inner.dim(), self.inner.coin_size(), self.inner.scale())
    }
}

/// Finitely supported state on the internal lattice.
#[pyclass(name = "PureState", module = "pyqwalk", frozen, from_py_object)]
#[derive(Clone)]
struct PyPureState {
    inner: qwalk::PureState,
}

#[pymethods]
impl PyPureState {
    /// `entries` is a list of `(position, coin_amplitudes)` pairs.
    #[new]
    fn new(dimension: usize, coin_size: usize, entries: Vec<(Vec<i64>, Vec<Complex64>)>) -> PyResult<Self> {
        let inner = qwalk::PureState::from_entries(dimension, coin_size, entries).map_err(to_py)?;
        Ok(PyPureState { inner })
    }

    #[staticmethod]
    fn localized(position: Vec<i64>, coin: Vec<Complex64>) -> Self {
        PyPureState { inner: qwalk::PureState::localized(position, coin) }
    }

    #[getter]
    fn dimension(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn coin_size(&self) -> usize {
        self.inner.coin_size()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn norm_sqr(&self) -> f64 {
        self.inner.norm_sqr()
    }

    fn normalized(&self) -> PyResult<Self> {
        Ok(PyPureState { inner: self.inner.clone().normalized().map_err(to_py)? })
    }

    fn entries(&self) -> Vec<(Vec<i64>, Vec<Complex64>)> {
        self.inner.iter().map(|(p, a)| (p.to_vec(), a.to_vec())).collect()
    }

    fn get(&self, position: Vec<i64>) -> Option<Vec<Complex64>> {
        self.inner.get(&position).map(<[Complex64]>::to_vec)
    }

    fn step(&self, config: &PyWalkConfig) -> PyResult<Self> {
        Ok(PyPureState { inner: qwalk::step(&self.inner, &config.inner).map_err(to_py)? })
    }

    fn evolve(&self, config: &PyWalkConfig, n: usize) -> PyResult<Self> {
        Ok(PyPureState { inner: qwalk::evolve(&self.inner, &config.inner, n).map_err(to_py)? })
    }

    /// Amplitude of the momentum state `ψ̂(k)` per coin component.
    fn fourier(&self, k: Vec<f64>) -> PyResult<Vec<Complex64>> {
        if k.len() != self.inner.dim() {
            return Err(to_py(WalkError::DimensionMismatch { expected: self.inner.dim(), found: k.len() }));
        }
        Ok(qwalk::fourier_state(&self.inner, &k))
    }
}

/// Probability mixture of pure states.
#[pyclass(name = "Ensemble", module = "pyqwalk", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyEnsemble {
    inner: qwalk::Ensemble,
}

#[pymethods]
impl PyEnsemble {
    #[new]
    fn new(members: Vec<(f64, PyPureState)>) -> PyResult<Self> {
        let members = members.into_iter().map(|(w, s)| (w, s.inner)).collect();
        Ok(PyEnsemble { inner: qwalk::Ensemble::new(members).map_err(to_py)? })
    }

    #[staticmethod]
    fn pure(state: PyPureState) -> PyResult<Self> {
        Ok(PyEnsemble { inner: qwalk::Ensemble::pure(state.inner).map_err(to_py)? })
    }

    /// Uniform mixture of the coin basis states at the origin.
    #[staticmethod]
    fn origin_mixed(dimension: usize, coin_size: usize) -> Self {
        PyEnsemble { inner: qwalk::Ensemble::origin_mixed(dimension, coin_size) }
    }

    #[getter]
    fn dimension(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn coin_size(&self) -> usize {
        self.inner.coin_size()
    }

    fn members(&self) -> Vec<(f64, PyPureState)> {
        self.inner.members().iter().map(|(w, s)| (*w, PyPureState { inner: s.clone() })).collect()
    }

    fn evolve(&self, config: &PyWalkConfig, n: usize) -> PyResult<Self> {
        Ok(PyEnsemble { inner: self.inner.evolve(&config.inner, n).map_err(to_py)? })
    }
}

/// Position distribution, optionally rescaled by the step count.
#[pyclass(name = "PositionDistribution", module = "pyqwalk", frozen)]
struct PyDistribution {
    inner: qwalk::PositionDistribution,
}

#[pymethods]
impl PyDistribution {
    #[getter]
    fn n(&self) -> u64 {
        self.inner.n()
    }

    #[getter]
    fn is_rescaled(&self) -> bool {
        self.inner.is_rescaled()
    }

    fn total_mass(&self) -> f64 {
        self.inner.total_mass()
    }

    /// `(coordinates, mass)` pairs in lattice order.
    fn atoms(&self) -> Vec<(Vec<f64>, f64)> {
        self.inner.atoms().collect()
    }

    /// Masses keyed by internal lattice position as a tuple.
    fn masses<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        for (key, mass) in self.inner.masses() {
            d.set_item(PyTuple::new(py, key)?, mass)?;
        }
        Ok(d)
    }

    fn rescale(&self, n: u64) -> PyResult<Self> {
        Ok(PyDistribution { inner: qwalk::rescale(&self.inner, n).map_err(to_py)? })
    }

    fn total_variation(&self, other: &PyDistribution) -> f64 {
        self.inner.total_variation(&other.inner)
    }

    fn cf(&self, omega: Vec<f64>) -> PyResult<Complex64> {
        qwalk::empirical_cf(&self.inner, &omega).map_err(to_py)
    }

    fn __len__(&self) -> usize {
        self.inner.masses().len()
    }
}

/// Eigenvalues, eigenvectors and band velocities of `Û_k`.
#[pyclass(name = "Spectrum", module = "pyqwalk", frozen)]
struct PySpectrum {
    #[pyo3(get)]
    k: Vec<f64>,
    #[pyo3(get)]
    eigenvalues: Vec<Complex64>,
    /// One list per band.
    #[pyo3(get)]
    eigenvectors: Vec<Vec<Complex64>>,
    #[pyo3(get)]
    min_gap: f64,
    /// `None` when bands cross within the gap tolerance.
    #[pyo3(get)]
    velocities: Option<Vec<Vec<f64>>>,
}

/// Bands of the walk at momentum `k`, sorted by eigenvalue phase.
#[pyfunction]
#[pyo3(signature = (config, k, gap_tol = qwalk::spectral::DEFAULT_GAP_TOL))]
fn eigensystem(config: &PyWalkConfig, k: Vec<f64>, gap_tol: f64) -> PyResult<PySpectrum> {
    let um = qwalk::build_uk(&config.inner, &k).map_err(to_py)?;
    let mut es = qwalk::spectral::decompose(&um).map_err(to_py)?;
    es.gap_tol = gap_tol;
    let velocities = if es.is_degenerate() {
        None
    } else {
        Some(qwalk::spectral::band_velocities(&config.inner, &es).map_err(to_py)?)
    };
    let eigenvectors = (0..es.len()).map(|j| es.eigenvector(j).iter().copied().collect()).collect();
    Ok(PySpectrum { k, eigenvalues: es.eigenvalues, eigenvectors, min_gap: es.min_gap, velocities })
}

/// Weak limit of `X_n / n` as atoms at band velocities.
#[pyclass(name = "LimitMeasure", module = "pyqwalk", frozen)]
struct PyLimitMeasure {
    inner: qwalk::LimitMeasure,
}

#[pymethods]
impl PyLimitMeasure {
    #[new]
    fn new(dimension: usize, atoms: Vec<(Vec<f64>, f64)>) -> PyResult<Self> {
        if atoms.iter().any(|(v, _)| v.len() != dimension) {
            return Err(PyValueError::new_err("atom dimension mismatch"));
        }
        Ok(PyLimitMeasure { inner: qwalk::LimitMeasure::from_atoms(dimension, atoms) })
    }

    #[getter]
    fn raw_total(&self) -> f64 {
        self.inner.raw_total()
    }

    #[getter]
    fn excluded_points(&self) -> usize {
        self.inner.excluded_points()
    }

    fn total_mass(&self) -> f64 {
        self.inner.total_mass()
    }

    fn atoms(&self) -> Vec<(Vec<f64>, f64)> {
        self.inner.atoms().map(|(v, m)| (v.to_vec(), m)).collect()
    }

    /// Same measure with identical velocities combined and zero atoms dropped.
    fn merged(&self) -> Self {
        PyLimitMeasure { inner: self.inner.merged_exact() }
    }

    fn normalized(&self) -> Self {
        PyLimitMeasure { inner: self.inner.normalized() }
    }

    fn cf(&self, omega: Vec<f64>) -> PyResult<Complex64> {
        if omega.len() != self.inner.dim() {
            return Err(to_py(WalkError::DimensionMismatch { expected: self.inner.dim(), found: omega.len() }));
        }
        Ok(qwalk::limit_cf(&self.inner, &omega))
    }

    /// Draws from this measure by inverse CDF over its atoms.
    fn sample(&self, count: usize, seed: u64) -> PyResult<Vec<Vec<f64>>> {
        sample_measure(&self.inner, count, seed).map_err(to_py)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

/// Evolves `ensemble` for `n` steps and returns its position distribution,
/// rescaled by `n` unless `raw` is set or `n` is zero.
#[pyfunction]
#[pyo3(signature = (config, ensemble, n, raw = false))]
fn simulate(config: &PyWalkConfig, ensemble: &PyEnsemble, n: u64, raw: bool) -> PyResult<PyDistribution> {
    let evolved = ensemble.inner.evolve(&config.inner, n as usize).map_err(to_py)?;
    let dist = qwalk::position_distribution(&evolved, &config.inner);
    let inner = if raw || n == 0 { dist } else { qwalk::rescale(&dist, n).map_err(to_py)? };
    Ok(PyDistribution { inner })
}

/// Distribution computed by evolving in momentum space on a grid of
/// `grid_points` per axis.
#[pyfunction]
fn evolve_momentum(config: &PyWalkConfig, state: &PyPureState, n: usize, grid_points: usize) -> PyResult<PyDistribution> {
    let inner = qwalk::evolve_momentum(&state.inner, &config.inner, n, grid_points).map_err(to_py)?;
    Ok(PyDistribution { inner })
}

#[pyfunction]
#[pyo3(signature = (config, ensemble, grid_points = None))]
fn limit_measure(config: &PyWalkConfig, ensemble: &PyEnsemble, grid_points: Option<usize>) -> PyResult<PyLimitMeasure> {
    let dim = config.inner.dim();
    let grid = qwalk::KGrid::new(dim, grid_points.unwrap_or_else(|| default_grid_points(dim)));
    Ok(PyLimitMeasure { inner: qwalk::limit_measure(&config.inner, &ensemble.inner, &grid).map_err(to_py)? })
}

/// Samples the limit for the origin-mixed initial state by drawing a
/// uniform momentum and band.
#[pyfunction]
fn sample_limit(config: &PyWalkConfig, count: usize, seed: u64) -> PyResult<Vec<Vec<f64>>> {
    qwalk::sample_limit(&config.inner, count, seed).map_err(to_py)
}

/// Kolmogorov distance between two 1d atom lists of `(x, mass)`.
#[pyfunction]
fn ks_distance(a: Vec<(f64, f64)>, b: Vec<(f64, f64)>) -> PyResult<f64> {
    qwalk::ks_distance(&a, &b).map_err(to_py)
}

/// One dict per `n` with keys `n`, `ks`, `cf_sup`, `mean_error`, `m2_error`.
/// `omega_range` is a per-axis `(min, max, step)` applied to every axis.
#[pyfunction]
#[pyo3(signature = (config, ensemble, n_list, grid_points = None, omega_range = None))]
fn convergence_series<'py>(
    py: Python<'py>,
    config: &PyWalkConfig,
    ensemble: &PyEnsemble,
    n_list: Vec<u64>,
    grid_points: Option<usize>,
    omega_range: Option<(f64, f64, f64)>,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let dim = config.inner.dim();
    let grid = qwalk::KGrid::new(dim, grid_points.unwrap_or_else(|| default_grid_points(dim)));
    let range = omega_range.unwrap_or_else(|| default_omega_range(dim));
    let omegas = omega_grid(&vec![range; dim]);
    let report = qwalk::convergence_series(&config.inner, &ensemble.inner, &n_list, &grid, &omegas).map_err(to_py)?;
    report
        .rows
        .iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("n", r.n)?;
            d.set_item("ks", r.ks)?;
            d.set_item("cf_sup", r.cf_sup)?;
            d.set_item("mean_error", r.mean_error_norm())?;
            d.set_item("m2_error", r.second_moment_error)?;
            Ok(d)
        })
        .collect()
}

/// Parses a JSON run configuration into `(WalkConfig, Ensemble)`.
#[pyfunction]
fn load_config(text: &str) -> PyResult<(PyWalkConfig, PyEnsemble)> {
    let rc = RunConfig::from_json(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let (cfg, ens) = rc.build().map_err(|problems| PyValueError::new_err(problems.join("; ")))?;
    Ok((PyWalkConfig { inner: cfg }, PyEnsemble { inner: ens }))
}

#[pymodule]
pub fn pyqwalk(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("NumericalError", m.py().get_type::<NumericalError>())?;
    m.add_class::<PyWalkConfig>()?;
    m.add_class::<PyPureState>()?;
    m.add_class::<PyEnsemble>()?;
    m.add_class::<PyDistribution>()?;
    m.add_class::<PySpectrum>()?;
    m.add_class::<PyLimitMeasure>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(evolve_momentum, m)?)?;
    m.add_function(wrap_pyfunction!(eigensystem, m)?)?;
    m.add_function(wrap_pyfunction!(limit_measure, m)?)?;
    m.add_function(wrap_pyfunction!(sample_limit, m)?)?;
    m.add_function(wrap_pyfunction!(ks_distance, m)?)?;
    m.add_function(wrap_pyfunction!(convergence_series, m)?)?;
    m.add_function(wrap_pyfunction!(load_config, m)?)?;
    Ok(())
}
