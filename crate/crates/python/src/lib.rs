//! Python bindings: `import gyrostat_py`.

use gyrostat::bifurcation::{self, RegionLabel};
use gyrostat::contour::{self, RankTolerance};
use gyrostat::dynamics;
use gyrostat::rpm;
use gyrostat::sphere::{GridSpec, SpherePoint};
use gyrostat::{GyrostatParams, IntegralConstants, State, Vec3};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: gyrostat::Error) -> PyErr {
    if e.is_input_error() {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

fn arr(v: Vec3) -> [f64; 3] {
    v.into()
}

/// Principal moments of inertia `A` and gyrostatic moment `lambda`.
#[pyclass(name = "Params", frozen, from_py_object)]
#[derive(Clone)]
struct PyParams(GyrostatParams);

#[pymethods]
impl PyParams {
    #[new]
    fn new(inertia: [f64; 3], lambda: [f64; 3]) -> PyResult<Self> {
        GyrostatParams::new(inertia, lambda).map(Self).map_err(to_py)
    }

    #[getter]
    fn inertia(&self) -> [f64; 3] {
        arr(self.0.inertia())
    }

    #[getter]
    fn lambda_(&self) -> [f64; 3] {
        arr(self.0.lambda())
    }

    fn is_generic(&self) -> bool {
        self.0.is_generic()
    }

    fn __repr__(&self) -> String {
        format!("Params(A={:?}, lambda={:?})", arr(self.0.inertia()), arr(self.0.lambda()))
    }
}

/// Angular velocity and unit Poisson vector.
#[pyclass(name = "State", frozen, from_py_object)]
#[derive(Clone)]
struct PyState(State);

#[pymethods]
impl PyState {
    #[new]
    #[pyo3(signature = (omega, nu, normalize = false))]
    fn new(omega: [f64; 3], nu: [f64; 3], normalize: bool) -> PyResult<Self> {
        let r = if normalize {
            State::normalized(omega.into(), nu.into())
        } else {
            State::new(omega.into(), nu.into())
        };
        r.map(Self).map_err(to_py)
    }

    #[getter]
    fn omega(&self) -> [f64; 3] {
        arr(self.0.omega)
    }

    #[getter]
    fn nu(&self) -> [f64; 3] {
        arr(self.0.nu())
    }

    fn __repr__(&self) -> String {
        format!("State(omega={:?}, nu={:?})", arr(self.0.omega), arr(self.0.nu()))
    }
}

fn k_of(k: [f64; 3]) -> IntegralConstants {
    k.into()
}

/// `(K1, K2, K3)` at a state.
#[pyfunction]
fn integrals(state: &PyState, params: &PyParams) -> [f64; 3] {
    gyrostat::integrals(&state.0, &params.0).to_array()
}

/// `(d omega/dt, d nu/dt)`.
#[pyfunction]
fn rhs(state: &PyState, params: &PyParams) -> ([f64; 3], [f64; 3]) {
    let t = gyrostat::rhs(&state.0, &params.0);
    (arr(t.d_omega), arr(t.d_nu))
}

#[pyfunction]
fn angular_momentum(omega: [f64; 3], params: &PyParams) -> [f64; 3] {
    arr(gyrostat::angular_momentum(&omega.into(), &params.0))
}

#[pyfunction]
fn curve8(sigma: f64, params: &PyParams) -> PyResult<(f64, f64)> {
    bifurcation::curve8(sigma, &params.0).map_err(to_py)
}

#[pyfunction]
fn branch_f(k1: f64, params: &PyParams) -> PyResult<f64> {
    bifurcation::branch_f(k1, &params.0).map_err(to_py)
}

#[pyfunction]
fn branch_g(k1: f64, params: &PyParams) -> PyResult<f64> {
    bifurcation::branch_g(k1, &params.0).map_err(to_py)
}

/// Region label: "R1".."R4" or "ON_SIGMA".
#[pyfunction]
#[pyo3(signature = (k, params, tol = bifurcation::DEFAULT_SIGMA_TOLERANCE))]
fn classify(k: [f64; 3], params: &PyParams, tol: f64) -> PyResult<&'static str> {
    bifurcation::classify(&k_of(k), &params.0, tol).map(|l: RegionLabel| l.as_str()).map_err(to_py)
}

/// Admissible velocities over `nu` and whether the count is uncertain.
#[pyfunction]
fn admissible_velocities(nu: [f64; 3], k: [f64; 3], params: &PyParams) -> PyResult<(Vec<[f64; 3]>, bool)> {
    let nu = SpherePoint::new(nu.into()).map_err(to_py)?;
    let f = rpm::admissible_velocities(&nu, &k_of(k), &params.0).map_err(to_py)?;
    Ok((f.omegas.into_iter().map(arr).collect(), f.uncertain))
}

#[pyfunction]
fn q_factor(omega: [f64; 3], k: [f64; 3], params: &PyParams) -> PyResult<f64> {
    rpm::q_factor(&omega.into(), &k_of(k), &params.0).map_err(to_py)
}

/// Boundary curves as `(sign_pattern, [nu, ...])` pairs.
#[pyfunction]
fn generalized_boundary(k: [f64; 3], params: &PyParams) -> PyResult<Vec<(String, Vec<[f64; 3]>)>> {
    let b = rpm::generalized_boundary(&k_of(k), &params.0).map_err(to_py)?;
    Ok(b.curves
        .iter()
        .map(|c| (c.sign_pattern.to_string(), c.curve.points.iter().map(|p| arr(p.vec())).collect()))
        .collect())
}

/// Fiber counts on an icosphere and the RPM component structure.
#[pyclass(name = "RpmReport", frozen)]
struct PyRpmReport(rpm::RpmReport);

#[pymethods]
impl PyRpmReport {
    #[getter]
    fn components(&self) -> usize {
        self.0.component_count()
    }

    #[getter]
    fn support_components(&self) -> usize {
        self.0.support_components
    }

    #[getter]
    fn tori(&self) -> usize {
        self.0.tori
    }

    #[getter]
    fn counts(&self) -> Vec<u8> {
        self.0.counts.clone()
    }

    #[getter]
    fn vertices(&self) -> Vec<[f64; 3]> {
        self.0.mesh.vertices.iter().map(|v| arr(*v)).collect()
    }

    #[getter]
    fn uncertain(&self) -> Vec<u32> {
        self.0.uncertain.clone()
    }

    fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[pyfunction]
#[pyo3(signature = (k, params, n_lat = 128, n_lon = 256))]
fn rpm_map(py: Python<'_>, k: [f64; 3], params: &PyParams, n_lat: usize, n_lon: usize) -> PyResult<PyRpmReport> {
    let grid = GridSpec::new(n_lat, n_lon).map_err(to_py)?;
    let p = params.0;
    py.detach(|| rpm::rpm_map(&k_of(k), &p, grid)).map(PyRpmReport).map_err(to_py)
}

/// Integrates a trajectory; returns `(times, omegas, nus, max_drift)`.
#[pyfunction]
#[pyo3(signature = (state, params, t_end, tol = 1e-12))]
fn integrate(
    py: Python<'_>,
    state: &PyState,
    params: &PyParams,
    t_end: f64,
    tol: f64,
) -> PyResult<(Vec<f64>, Vec<[f64; 3]>, Vec<[f64; 3]>, f64)> {
    let (s, p) = (state.0, params.0);
    let traj = py.detach(|| dynamics::integrate(&s, &p, t_end, tol)).map_err(to_py)?;
    let omegas = traj.states.iter().map(|s| arr(s.omega)).collect();
    let nus = traj.states.iter().map(|s| arr(s.nu())).collect();
    Ok((traj.times, omegas, nus, traj.drift.max_integral()))
}

#[pyfunction]
fn contour_condition(state: &PyState, params: &PyParams) -> f64 {
    contour::contour_condition(&state.0, &params.0)
}

/// Singular values of the fiber Jacobian, descending.
#[pyfunction]
fn singular_values(state: &PyState, params: &PyParams) -> [f64; 3] {
    contour::fiber_jacobian(&state.0, &params.0).singular_values
}

#[pyfunction]
#[pyo3(signature = (state, params, tol = 1e-10))]
fn rank_defect(state: &PyState, params: &PyParams, tol: f64) -> PyResult<usize> {
    let tol = RankTolerance::new(tol).map_err(to_py)?;
    Ok(contour::rank_defect(&state.0, &params.0, tol))
}

#[pymodule]
fn gyrostat_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyParams>()?;
    m.add_class::<PyState>()?;
    m.add_class::<PyRpmReport>()?;
    m.add_function(wrap_pyfunction!(integrals, m)?)?;
    m.add_function(wrap_pyfunction!(rhs, m)?)?;
    m.add_function(wrap_pyfunction!(angular_momentum, m)?)?;
    m.add_function(wrap_pyfunction!(curve8, m)?)?;
    m.add_function(wrap_pyfunction!(branch_f, m)?)?;
    m.add_function(wrap_pyfunction!(branch_g, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(admissible_velocities, m)?)?;
    m.add_function(wrap_pyfunction!(q_factor, m)?)?;
    m.add_function(wrap_pyfunction!(generalized_boundary, m)?)?;
    m.add_function(wrap_pyfunction!(rpm_map, m)?)?;
    m.add_function(wrap_pyfunction!(integrate, m)?)?;
    m.add_function(wrap_pyfunction!(contour_condition, m)?)?;
    m.add_function(wrap_pyfunction!(singular_values, m)?)?;
    m.add_function(wrap_pyfunction!(rank_defect, m)?)?;
    Ok(())
}
