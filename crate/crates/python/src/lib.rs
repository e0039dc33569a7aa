//! Python bindings for the helmpml solver.

use std::path::PathBuf;

use ::helmpml::assembly::{assemble_system, Source};
use ::helmpml::error::Error;
use ::helmpml::experiments::{self, StudyConfig};
use ::helmpml::geometry::{build_disk_mesh, Mesh, RegionSel};
use ::helmpml::norms::error_vs_reference;
use ::helmpml::oracle;
use ::helmpml::pml::PmlParams;
use ::helmpml::specialfun;
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::NearSingular { .. }
        | Error::Factorization(_)
        | Error::NotPositiveDefinite(_)
        | Error::NegativeEnergy(_)
        | Error::Quadrature { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn region_sel(name: &str) -> PyResult<RegionSel> {
    match name {
        "physical" => Ok(RegionSel::Physical),
        "layer" => Ok(RegionSel::Layer),
        "all" => Ok(RegionSel::All),
        other => Err(PyValueError::new_err(format!("unknown region '{other}' (physical, layer, all)"))),
    }
}

#[pyclass(name = "PmlParams", frozen, from_py_object)]
#[derive(Clone)]
struct PyPmlParams(PmlParams);

#[pymethods]
impl PyPmlParams {
    #[new]
    #[pyo3(signature = (k, r_inner = 1.0, r_outer = 2.0, sigma0 = 5.0))]
    fn new(k: f64, r_inner: f64, r_outer: f64, sigma0: f64) -> PyResult<Self> {
        PmlParams::new(k, r_inner, r_outer, sigma0).map(Self).map_err(to_py)
    }

    #[getter]
    fn k(&self) -> f64 {
        self.0.k
    }

    #[getter]
    fn r_inner(&self) -> f64 {
        self.0.r_inner
    }

    #[getter]
    fn r_outer(&self) -> f64 {
        self.0.r_outer
    }

    #[getter]
    fn sigma0(&self) -> f64 {
        self.0.sigma0
    }

    /// Stretching factors (alpha, beta) at radius r.
    fn alpha_beta(&self, r: f64) -> (Complex64, Complex64) {
        let (a, b, _) = self.0.alpha_beta(r);
        (a, b)
    }

    fn __repr__(&self) -> String {
        format!("PmlParams(k={}, r_inner={}, r_outer={}, sigma0={})", self.0.k, self.0.r_inner, self.0.r_outer, self.0.sigma0)
    }
}

#[pyclass(name = "Mesh", frozen)]
struct PyMesh(Mesh);

#[pymethods]
impl PyMesh {
    #[staticmethod]
    #[pyo3(signature = (h, r_inner = 1.0, r_outer = 2.0))]
    fn disk(h: f64, r_inner: f64, r_outer: f64) -> PyResult<Self> {
        build_disk_mesh(r_inner, r_outer, h).map(Self).map_err(to_py)
    }

    #[getter]
    fn num_vertices(&self) -> usize {
        self.0.num_vertices()
    }

    #[getter]
    fn num_triangles(&self) -> usize {
        self.0.num_triangles()
    }

    #[getter]
    fn h_max(&self) -> f64 {
        self.0.h_max
    }

    #[getter]
    fn min_angle(&self) -> f64 {
        self.0.min_angle
    }

    fn vertices(&self) -> Vec<(f64, f64)> {
        self.0.vertices.iter().map(|v| (v[0], v[1])).collect()
    }

    fn triangles(&self) -> Vec<(usize, usize, usize)> {
        self.0.triangles.iter().map(|t| (t[0], t[1], t[2])).collect()
    }

    fn validate(&self) -> PyResult<()> {
        self.0.validate().map_err(to_py)
    }
}

/// Solves the PML problem with f = 1 on the physical disk; returns nodal values
/// and the certified relative residual.
#[pyfunction]
#[pyo3(signature = (mesh, params, gamma = Complex64::new(0.0, 0.0)))]
fn solve(py: Python<'_>, mesh: &PyMesh, params: &PyPmlParams, gamma: Complex64) -> PyResult<(Vec<Complex64>, f64)> {
    py.detach(|| {
        let sys = assemble_system(&mesh.0, &params.0, gamma, &Source::default())?;
        let sol = sys.solve()?;
        Ok((sol.nodal, sol.report.relative_residual))
    })
    .map_err(to_py)
}

/// Relative (L2, H1-seminorm) errors against the exact free-space solution.
#[pyfunction]
#[pyo3(signature = (mesh, nodal, k, region = "physical"))]
fn disk_errors(mesh: &PyMesh, nodal: Vec<Complex64>, k: f64, region: &str) -> PyResult<(Option<f64>, Option<f64>)> {
    let sel = region_sel(region)?;
    if nodal.len() != mesh.0.num_vertices() {
        return Err(to_py(Error::DimensionMismatch { expected: mesh.0.num_vertices(), got: nodal.len() }));
    }
    let exact = |x: [f64; 2]| oracle::exact_solution_disk_xy(k, x);
    let rep = error_vs_reference(&mesh.0, &nodal, &exact, sel, k);
    Ok((rep.rel_l2, rep.rel_h1_semi))
}

#[pyfunction]
fn penalty_gamma(kh: f64) -> Complex64 {
    experiments::penalty_gamma(kh)
}

#[pyfunction]
fn bessel_j(n: i64, x: f64) -> PyResult<f64> {
    specialfun::bessel_j(n, x).map_err(to_py)
}

#[pyfunction]
fn bessel_y(n: i64, x: f64) -> PyResult<f64> {
    specialfun::bessel_y(n, x).map_err(to_py)
}

#[pyfunction]
fn hankel1(n: i64, x: f64) -> PyResult<Complex64> {
    specialfun::hankel1(n, x).map_err(to_py)
}

/// Exact solution (value, radial derivative) of the unbounded disk problem.
#[pyfunction]
fn exact_disk(k: f64, r: f64) -> (Complex64, Complex64) {
    oracle::exact_solution_disk(k, r)
}

/// Closed-form 1D PML solution for f = 1 on |x| < r_inner at the given points.
#[pyfunction]
fn pml_1d_exact(params: &PyPmlParams, xs: Vec<f64>) -> PyResult<Vec<Complex64>> {
    let r = params.0.r_inner;
    let f = move |x: f64| Complex64::new(if x.abs() < r { 1.0 } else { 0.0 }, 0.0);
    let exact = oracle::Pml1dExact::new(params.0, f).map_err(to_py)?;
    xs.iter().map(|&x| exact.eval(x).map_err(to_py)).collect()
}

/// Mode-0 radial PML reference on `cells` cells: (r, u).
#[pyfunction]
#[pyo3(signature = (params, cells = 20000))]
fn radial_reference(py: Python<'_>, params: &PyPmlParams, cells: usize) -> PyResult<(Vec<f64>, Vec<Complex64>)> {
    let r = params.0.r_inner;
    let f = move |s: f64| Complex64::new(if s < r { 1.0 } else { 0.0 }, 0.0);
    let prof = py.detach(|| oracle::radial_mode_reference(&params.0, 0, f, cells)).map_err(to_py)?;
    Ok((prof.r, prof.values))
}

/// Runs a study from config text and writes its CSV, SVG and config echo.
#[pyfunction]
fn run_study(py: Python<'_>, config_text: &str, out_dir: PathBuf) -> PyResult<usize> {
    let cfg = StudyConfig::parse(config_text).map_err(to_py)?;
    py.detach(|| {
        let out = experiments::run_study(&cfg)?;
        std::fs::create_dir_all(&out_dir)?;
        experiments::write_outputs(&cfg, &out, &out_dir)?;
        Ok(out.table.rows.len())
    })
    .map_err(to_py)
}

#[pymodule]
fn helmpml(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPmlParams>()?;
    m.add_class::<PyMesh>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(disk_errors, m)?)?;
    m.add_function(wrap_pyfunction!(penalty_gamma, m)?)?;
    m.add_function(wrap_pyfunction!(bessel_j, m)?)?;
    m.add_function(wrap_pyfunction!(bessel_y, m)?)?;
    m.add_function(wrap_pyfunction!(hankel1, m)?)?;
    m.add_function(wrap_pyfunction!(exact_disk, m)?)?;
    m.add_function(wrap_pyfunction!(pml_1d_exact, m)?)?;
    m.add_function(wrap_pyfunction!(radial_reference, m)?)?;
    m.add_function(wrap_pyfunction!(run_study, m)?)?;
    Ok(())
}
