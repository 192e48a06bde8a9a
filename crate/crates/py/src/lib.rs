//! Python module `obstacle_lab_py`: paraboloid solutions, thin profiles,
//! the monotonicity functionals and the projected SOR solver.

use std::sync::Arc;

use obstacle_lab as lab;
use obstacle_lab::{FieldSampler, FunctionalConfig, LabError, Point2, PotentialConfig};
use pyo3::exceptions::{PyArithmeticError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: LabError) -> PyErr {
    match e {
        LabError::NonConvergence { .. } => PyRuntimeError::new_err(e.to_string()),
        LabError::Degenerate(_) => PyArithmeticError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn point(x1: f64, x2: f64) -> PyResult<Point2> {
    Point2::try_new(x1, x2).map_err(to_py)
}

fn fcfg(n_angular: usize, n_radial: usize) -> PyResult<FunctionalConfig> {
    FunctionalConfig::new(n_angular, n_radial).map_err(to_py)
}

fn pcfg(abs_tol: f64) -> PyResult<PotentialConfig> {
    let c = PotentialConfig::with_abs_tol(abs_tol);
    c.validate().map_err(to_py)?;
    Ok(c)
}

#[pyclass(frozen, skip_from_py_object, name = "Paraboloid")]
#[derive(Clone, Copy)]
struct PyParaboloid(lab::Paraboloid);

#[pymethods]
impl PyParaboloid {
    #[new]
    #[pyo3(signature = (gamma, sigma = 0.0))]
    fn new(gamma: f64, sigma: f64) -> PyResult<Self> {
        lab::Paraboloid::new(gamma, sigma).map(Self).map_err(to_py)
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.0.gamma()
    }

    #[getter]
    fn sigma(&self) -> f64 {
        self.0.sigma()
    }

    fn contains(&self, x1: f64, x2: f64) -> PyResult<bool> {
        Ok(self.0.contains(point(x1, x2)?))
    }

    fn half_width(&self, y2: f64) -> f64 {
        self.0.half_width(y2)
    }

    /// `V_{γP}` and its gradient at `x`.
    #[pyo3(signature = (x1, x2, abs_tol = 1e-8))]
    fn potential(&self, x1: f64, x2: f64, abs_tol: f64) -> PyResult<(f64, f64, f64)> {
        let (v, g) = lab::potential_with_gradient(&self.0, point(x1, x2)?, &pcfg(abs_tol)?);
        Ok((v, g[0], g[1]))
    }

    /// The global solution `u_{γP}` at `x`.
    #[pyo3(signature = (x1, x2, abs_tol = 1e-8))]
    fn solution(&self, x1: f64, x2: f64, abs_tol: f64) -> PyResult<f64> {
        Ok(lab::u_paraboloid(&self.0, point(x1, x2)?, &pcfg(abs_tol)?))
    }

    fn __repr__(&self) -> String {
        format!("Paraboloid(gamma={}, sigma={})", self.0.gamma(), self.0.sigma())
    }
}

/// A scalar field the functionals can integrate.
#[pyclass(frozen, skip_from_py_object, name = "Sampler")]
#[derive(Clone)]
struct PySampler {
    inner: Arc<dyn FieldSampler + Send + Sync>,
    label: String,
}

#[pymethods]
impl PySampler {
    /// The normalized 3/2-homogeneous thin-obstacle profile.
    #[staticmethod]
    fn vhat() -> Self {
        Self { inner: Arc::new(lab::VHat), label: "vhat".into() }
    }

    /// `kind` is one of `even_polynomial`, `re_half_integer`, `im_odd`.
    #[staticmethod]
    #[pyo3(signature = (kind, m, scale = 1.0))]
    fn thin(kind: &str, m: u32, scale: f64) -> PyResult<Self> {
        let k = match kind {
            "even_polynomial" => lab::ThinKind::EvenPolynomial,
            "re_half_integer" => lab::ThinKind::ReHalfInteger,
            "im_odd" => lab::ThinKind::ImOdd,
            other => return Err(PyValueError::new_err(format!("unknown thin kind {other:?}"))),
        };
        let p = lab::ThinProfile::new(k, m, scale).map_err(to_py)?;
        Ok(Self { inner: Arc::new(p), label: format!("thin({kind}, {m}, {scale})") })
    }

    /// `u_{γP} - p` with the paraboloid shifted by `sigma`.
    #[staticmethod]
    #[pyo3(signature = (gamma, sigma = 0.0, abs_tol = 1e-8))]
    fn paraboloid_deviation(gamma: f64, sigma: f64, abs_tol: f64) -> PyResult<Self> {
        let p = lab::Paraboloid::new(gamma, sigma).map_err(to_py)?;
        Ok(Self {
            inner: Arc::new(lab::ParaboloidDeviation::new(p, pcfg(abs_tol)?)),
            label: format!("paraboloid_deviation({gamma}, {sigma})"),
        })
    }

    /// `u_{γP}` itself.
    #[staticmethod]
    #[pyo3(signature = (gamma, sigma = 0.0, abs_tol = 1e-8))]
    fn paraboloid_solution(gamma: f64, sigma: f64, abs_tol: f64) -> PyResult<Self> {
        let p = lab::Paraboloid::new(gamma, sigma).map_err(to_py)?;
        Ok(Self {
            inner: Arc::new(lab::ParaboloidSolution::new(p, pcfg(abs_tol)?)),
            label: format!("paraboloid_solution({gamma}, {sigma})"),
        })
    }

    fn value(&self, x1: f64, x2: f64) -> PyResult<f64> {
        self.inner.value(point(x1, x2)?).map_err(to_py)
    }

    fn gradient(&self, x1: f64, x2: f64) -> PyResult<(f64, f64)> {
        let x = point(x1, x2)?;
        let g = match self.inner.gradient(x) {
            Some(g) => g,
            None => lab::functionals::sampler_gradient(&*self.inner, x, 1e-6),
        }
        .map_err(to_py)?;
        Ok((g[0], g[1]))
    }

    fn __repr__(&self) -> String {
        format!("Sampler.{}", self.label)
    }
}

#[pyfunction]
#[pyo3(signature = (w, r, n_angular = 1024, n_radial = 128))]
fn almgren(w: &PySampler, r: f64, n_angular: usize, n_radial: usize) -> PyResult<f64> {
    lab::almgren(&*w.inner, r, &fcfg(n_angular, n_radial)?).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (w, radii, n_angular = 1024, n_radial = 128))]
fn almgren_profile(w: &PySampler, radii: Vec<f64>, n_angular: usize, n_radial: usize) -> PyResult<Vec<f64>> {
    let p = lab::almgren_profile(&*w.inner, &radii, &fcfg(n_angular, n_radial)?).map_err(to_py)?;
    Ok(p.values().to_vec())
}

#[pyfunction]
#[pyo3(signature = (w, r, n_angular = 1024))]
fn boundary_l2(w: &PySampler, r: f64, n_angular: usize) -> PyResult<f64> {
    lab::boundary_l2(&*w.inner, r, &fcfg(n_angular, 2)?).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (w, r, n_angular = 1024, n_radial = 128))]
fn dirichlet_energy(w: &PySampler, r: f64, n_angular: usize, n_radial: usize) -> PyResult<f64> {
    lab::dirichlet_energy(&*w.inner, r, &fcfg(n_angular, n_radial)?).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (w, r, n_angular = 1024))]
fn doubling_ratio(w: &PySampler, r: f64, n_angular: usize) -> PyResult<f64> {
    lab::doubling_ratio(&*w.inner, r, &fcfg(n_angular, 2)?).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (w, r, n_angular = 1024))]
fn matching_functional(w: &PySampler, r: f64, n_angular: usize) -> PyResult<f64> {
    lab::matching_functional(&*w.inner, r, &fcfg(n_angular, 2)?).map_err(to_py)
}

/// Richardson-extrapolated blow-down coefficient over `radii`.
#[pyfunction]
#[pyo3(signature = (w, radii, n_angular = 1024))]
fn alpha_extrapolated(w: &PySampler, radii: Vec<f64>, n_angular: usize) -> PyResult<f64> {
    lab::blowdown::alpha_extrapolated(&*w.inner, &radii, &fcfg(n_angular, 2)?).map_err(to_py)
}

#[pyfunction]
fn gamma_match(alpha_u: f64) -> PyResult<f64> {
    lab::gamma_match(alpha_u, lab::ALPHA_1).map_err(to_py)
}

/// Output of [`solve`]: nodal values in row-major order (`x1` fastest).
#[pyclass(frozen, name = "Solution")]
struct PySolution {
    field: lab::ScalarField,
    report: lab::SolverReport,
}

#[pymethods]
impl PySolution {
    #[getter]
    fn shape(&self) -> (usize, usize) {
        let g = self.field.grid();
        (g.ny, g.nx)
    }

    #[getter]
    fn h(&self) -> f64 {
        self.field.grid().h()
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.report.iterations
    }

    #[getter]
    fn residual(&self) -> f64 {
        self.report.residual
    }

    #[getter]
    fn hessian_bound(&self) -> f64 {
        self.report.hessian_bound
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.field.values().to_vec()
    }

    #[getter]
    fn mask(&self) -> Vec<bool> {
        self.report.mask.flags().to_vec()
    }

    /// Bilinear interpolant of the discrete solution.
    fn at(&self, x1: f64, x2: f64) -> PyResult<f64> {
        self.field.bilinear(point(x1, x2)?).map_err(to_py)
    }

    #[pyo3(signature = (delta = 0.5, r2 = 1.0))]
    fn growth_check(&self, delta: f64, r2: f64) -> PyResult<bool> {
        lab::coincidence_growth_check(&self.report.mask, delta, r2).map_err(to_py)
    }
}

/// Projected SOR on the box with `u_{γP}` as boundary data.
#[pyfunction]
#[pyo3(signature = (xmin, xmax, ymin, ymax, h, gamma = 1.0, omega = None, tol = 1e-6, max_iter = 200_000))]
#[allow(clippy::too_many_arguments)]
fn solve(
    py: Python<'_>,
    xmin: f64,
    xmax: f64,
    ymin: f64,
    ymax: f64,
    h: f64,
    gamma: f64,
    omega: Option<f64>,
    tol: f64,
    max_iter: usize,
) -> PyResult<PySolution> {
    let grid = lab::Grid2::snapped(xmin, xmax, ymin, ymax, h).map_err(to_py)?;
    let p = lab::Paraboloid::new(gamma, 0.0).map_err(to_py)?;
    let boundary = lab::ParaboloidSolution::new(p, PotentialConfig::default());
    let cfg = lab::SolverConfig {
        omega: omega.unwrap_or_else(|| lab::SolverConfig::optimal_omega(&grid)),
        tol,
        max_iter,
        ..lab::SolverConfig::default()
    };
    let (field, report) = py.detach(|| lab::solve_obstacle(grid, &boundary, &cfg)).map_err(to_py)?;
    Ok(PySolution { field, report })
}

#[pyfunction]
fn vhat(x1: f64, x2: f64) -> PyResult<f64> {
    Ok(lab::vhat32(point(x1, x2)?))
}

#[pymodule]
fn obstacle_lab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("ALPHA_1", lab::ALPHA_1)?;
    m.add_class::<PyParaboloid>()?;
    m.add_class::<PySampler>()?;
    m.add_class::<PySolution>()?;
    m.add_function(wrap_pyfunction!(vhat, m)?)?;
    m.add_function(wrap_pyfunction!(almgren, m)?)?;
    m.add_function(wrap_pyfunction!(almgren_profile, m)?)?;
    m.add_function(wrap_pyfunction!(boundary_l2, m)?)?;
    m.add_function(wrap_pyfunction!(dirichlet_energy, m)?)?;
    m.add_function(wrap_pyfunction!(doubling_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(matching_functional, m)?)?;
    m.add_function(wrap_pyfunction!(alpha_extrapolated, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_match, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    Ok(())
}
