//! Python bindings for the ground-state solver: grids, fields, problems,
//! the fractional Laplacian, energies, the Nehari projection, the descent
//! solver, and the certification suite.
//!
//! Build with `cargo build -p nehari-fs-py --release` and import the
//! produced cdylib as `nehari_fs_py` (see `python/smoke_test.py`).

use nehari_fs::config::{Mode, RunConfig};
use nehari_fs::grid::{Field, FracOrder, TorusGrid};
use nehari_fs::model::CertStatus;
use nehari_fs::solve::SolverConfig;
use nehari_fs::{energy, nehari, pv, solve, spectral, verify};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(name = "TorusGrid", from_py_object)]
#[derive(Clone)]
struct PyTorusGrid {
    inner: TorusGrid,
}

#[pymethods]
impl PyTorusGrid {
    #[new]
    #[pyo3(signature = (dim, side_length, points_per_cell))]
    fn new(dim: usize, side_length: usize, points_per_cell: usize) -> PyResult<Self> {
        Ok(PyTorusGrid {
            inner: TorusGrid::new(dim, side_length, points_per_cell).map_err(value_err)?,
        })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn side_length(&self) -> usize {
        self.inner.side_length()
    }

    #[getter]
    fn points_per_cell(&self) -> usize {
        self.inner.points_per_cell()
    }

    fn len(&self) -> usize {
        self.inner.len()
    }

    fn spacing(&self) -> f64 {
        self.inner.spacing()
    }

    /// Coordinates of every lattice point, flattened.
    fn points(&self) -> Vec<Vec<f64>> {
        (0..self.inner.len())
            .map(|i| {
                let p = self.inner.point(i);
                p[..self.inner.dim()].to_vec()
            })
            .collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "TorusGrid(dim={}, side_length={}, points_per_cell={})",
            self.inner.dim(),
            self.inner.side_length(),
            self.inner.points_per_cell()
        )
    }
}

#[pyclass(name = "Field", from_py_object)]
#[derive(Clone)]
struct PyField {
    inner: Field,
}

#[pymethods]
impl PyField {
    #[new]
    fn new(grid: PyTorusGrid, values: Vec<f64>) -> PyResult<Self> {
        Ok(PyField {
            inner: Field::new(grid.inner, values).map_err(value_err)?,
        })
    }

    fn values(&self) -> Vec<f64> {
        self.inner.values().to_vec()
    }

    fn grid(&self) -> PyTorusGrid {
        PyTorusGrid {
            inner: self.inner.grid().clone(),
        }
    }

    fn scale(&self, c: f64) -> PyField {
        PyField {
            inner: self.inner.scale(c),
        }
    }

    fn max_abs(&self) -> f64 {
        self.inner.max_abs()
    }

    fn __repr__(&self) -> String {
        format!(
            "Field(len={}, max_abs={:.6e})",
            self.inner.len(),
            self.inner.max_abs()
        )
    }
}

#[pyclass(name = "Problem", from_py_object)]
#[derive(Clone)]
struct PyProblem {
    inner: nehari_fs::Problem,
}

#[pymethods]
impl PyProblem {
    /// Assemble a problem from the same specifier strings the CLI config
    /// uses (`const:1`, `power:p=4,b_base=0.5`, `zero`, …).
    #[new]
    #[pyo3(signature = (grid, alpha, potential, gamma, nonlinearity, q))]
    fn new(
        grid: PyTorusGrid,
        alpha: f64,
        potential: &str,
        gamma: &str,
        nonlinearity: &str,
        q: f64,
    ) -> PyResult<Self> {
        let cfg = RunConfig {
            alpha,
            dim: grid.inner.dim(),
            side_length: grid.inner.side_length(),
            points_per_cell: grid.inner.points_per_cell(),
            potential_spec: potential.to_string(),
            gamma_spec: gamma.to_string(),
            nonlinearity_spec: nonlinearity.to_string(),
            q,
            solver: SolverConfig::default(),
            mode: Mode::Solve,
            out_dir: std::path::PathBuf::from("out"),
            seed: 0,
        };
        FracOrder::new(alpha).map_err(value_err)?;
        Ok(PyProblem {
            inner: cfg.build_problem().map_err(value_err)?,
        })
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha().value()
    }

    #[getter]
    fn q(&self) -> f64 {
        self.inner.q()
    }

    #[getter]
    fn p(&self) -> f64 {
        self.inner.p()
    }

    /// (name, status, detail) triples of the model certification bundle.
    fn certify(&self) -> Vec<(String, String, String)> {
        self.inner
            .certify()
            .items
            .into_iter()
            .map(|i| (i.name, status_name(&i.status).to_string(), i.detail))
            .collect()
    }

    fn certified(&self) -> bool {
        self.inner.certify().passed()
    }

    fn __repr__(&self) -> String {
        format!(
            "Problem(alpha={}, q={}, p={})",
            self.inner.alpha().value(),
            self.inner.q(),
            self.inner.p()
        )
    }
}

#[pyclass(name = "SolveReport")]
struct PySolveReport {
    #[pyo3(get)]
    j_final: f64,
    #[pyo3(get)]
    residual_final: f64,
    #[pyo3(get)]
    iterations: usize,
    #[pyo3(get)]
    converged: bool,
    #[pyo3(get)]
    norm_e: f64,
    solution: Field,
}

#[pymethods]
impl PySolveReport {
    fn solution(&self) -> PyField {
        PyField {
            inner: self.solution.clone(),
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "SolveReport(j_final={:.8}, residual={:.3e}, iterations={}, converged={})",
            self.j_final, self.residual_final, self.iterations, self.converged
        )
    }
}

fn status_name(s: &CertStatus) -> &'static str {
    match s {
        CertStatus::Pass => "pass",
        CertStatus::Fail => "fail",
        CertStatus::Skip => "skip",
    }
}

/// (−Δ)^{α/2} u via the Fourier multiplier |ξ|^α.
#[pyfunction]
fn frac_laplacian(field: &PyField, alpha: f64) -> PyResult<PyField> {
    let order = FracOrder::new(alpha).map_err(value_err)?;
    Ok(PyField {
        inner: spectral::frac_laplacian(&field.inner, order),
    })
}

/// Gagliardo seminorm squared ∫|ξ|^α|û|².
#[pyfunction]
fn seminorm_sq(field: &PyField, alpha: f64) -> PyResult<f64> {
    let order = FracOrder::new(alpha).map_err(value_err)?;
    Ok(spectral::seminorm_sq(&field.inner, order))
}

/// ‖u‖_{H^{α/2}}.
#[pyfunction]
fn norm_h(field: &PyField, alpha: f64) -> PyResult<f64> {
    let order = FracOrder::new(alpha).map_err(value_err)?;
    Ok(spectral::norm_h(&field.inner, order))
}

/// ‖u‖_E for the problem's α and V.
#[pyfunction]
fn norm_e(problem: &PyProblem, field: &PyField) -> f64 {
    energy::norm_e(&field.inner, &problem.inner)
}

/// L^r norm.
#[pyfunction]
fn lp_norm(field: &PyField, r: f64) -> f64 {
    spectral::lp_norm(&field.inner, r)
}

/// Integer-cell translation u(· − k).
#[pyfunction]
fn translate(field: &PyField, shift: Vec<i64>) -> PyField {
    PyField {
        inner: spectral::translate(&field.inner, &shift),
    }
}

/// Energy components (kinetic, potential, F-term, Γ-term, I, J).
#[pyfunction]
fn eval_j(problem: &PyProblem, field: &PyField) -> (f64, f64, f64, f64, f64, f64) {
    let e = energy::eval_j(&field.inner, &problem.inner);
    (
        e.kinetic,
        e.potential,
        e.f_term,
        e.gamma_term,
        e.i_term,
        e.j,
    )
}

/// (|r|₂, |r|₂/‖u‖_E) of the strong-form residual.
#[pyfunction]
fn residual_norms(problem: &PyProblem, field: &PyField) -> (f64, f64) {
    let r = energy::residual(&field.inner, &problem.inner);
    (r.l2, r.relative)
}

/// Project onto the Nehari manifold: returns (t_star, J(t·u), projected field).
#[pyfunction]
fn project(problem: &PyProblem, field: &PyField) -> PyResult<(f64, f64, PyField)> {
    let (point, prof) = nehari::project_default(&field.inner, &problem.inner).map_err(value_err)?;
    Ok((
        prof.t_star,
        prof.j_at_t_star,
        PyField {
            inner: point.into_field(),
        },
    ))
}

/// Minimize J∘m from the given start field.
#[pyfunction]
#[pyo3(signature = (problem, start, max_iters = 2000, tol_res = 1e-6, tol_grad = 1e-7))]
fn minimize(
    problem: &PyProblem,
    start: &PyField,
    max_iters: usize,
    tol_res: f64,
    tol_grad: f64,
) -> PyResult<PySolveReport> {
    let cfg = SolverConfig {
        max_iters,
        tol_res,
        tol_grad,
        ..Default::default()
    };
    let report = solve::minimize(&start.inner, &problem.inner, &cfg).map_err(value_err)?;
    Ok(PySolveReport {
        j_final: report.j_final,
        residual_final: report.residual_final,
        iterations: report.iterations,
        converged: report.converged,
        norm_e: report.solution.norm_e(),
        solution: report.solution.into_field(),
    })
}

/// Multi-start: returns (reports sorted by J, number of distinct orbits).
#[pyfunction]
#[pyo3(signature = (problem, n_starts = 8, seed = 0, sign_aware = false))]
fn multi_start(
    problem: &PyProblem,
    n_starts: usize,
    seed: u64,
    sign_aware: bool,
) -> (Vec<PySolveReport>, usize) {
    let cfg = SolverConfig {
        n_starts,
        seed,
        sign_aware,
        ..Default::default()
    };
    let ms = solve::multi_start(&problem.inner, &cfg);
    let orbits = ms.distinct_orbits();
    let reports = ms
        .reports
        .into_iter()
        .map(|r| PySolveReport {
            j_final: r.j_final,
            residual_final: r.residual_final,
            iterations: r.iterations,
            converged: r.converged,
            norm_e: r.solution.norm_e(),
            solution: r.solution.into_field(),
        })
        .collect();
    (reports, orbits)
}

/// E-distance of v to the ℤ^d-translation orbit of u.
#[pyfunction]
#[pyo3(signature = (problem, u, v, sign_aware = false))]
fn orbit_distance(problem: &PyProblem, u: &PyField, v: &PyField, sign_aware: bool) -> f64 {
    solve::orbit_distance(&u.inner, &v.inner, &problem.inner, sign_aware).distance
}

/// PV quadrature of (−Δ)^{α/2} f at x for a Python callable f.
#[pyfunction]
#[pyo3(signature = (f, alpha, x, eps = 1e-2, truncation = 80.0, tol = 1e-4))]
fn frac_laplacian_pv(
    f: &Bound<'_, PyAny>,
    alpha: f64,
    x: f64,
    eps: f64,
    truncation: f64,
    tol: f64,
) -> PyResult<f64> {
    let call = |y: f64| -> f64 {
        f.call1((y,))
            .and_then(|v| v.extract::<f64>())
            .unwrap_or(f64::NAN)
    };
    pv::frac_laplacian_pv(&call, alpha, x, eps, truncation, tol).map_err(value_err)
}

/// Run the certification suite; returns (name, status, detail) triples.
#[pyfunction]
#[pyo3(signature = (problem, seed = 0))]
fn run_verification(problem: &PyProblem, seed: u64) -> Vec<(String, String, String)> {
    verify::run_all(&problem.inner, seed)
        .results
        .into_iter()
        .map(|r| (r.name, status_name(&r.status).to_string(), r.detail))
        .collect()
}

#[pymodule]
fn nehari_fs_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTorusGrid>()?;
    m.add_class::<PyField>()?;
    m.add_class::<PyProblem>()?;
    m.add_class::<PySolveReport>()?;
    m.add_function(wrap_pyfunction!(frac_laplacian, m)?)?;
    m.add_function(wrap_pyfunction!(seminorm_sq, m)?)?;
    m.add_function(wrap_pyfunction!(norm_h, m)?)?;
    m.add_function(wrap_pyfunction!(norm_e, m)?)?;
    m.add_function(wrap_pyfunction!(lp_norm, m)?)?;
    m.add_function(wrap_pyfunction!(translate, m)?)?;
    m.add_function(wrap_pyfunction!(eval_j, m)?)?;
    m.add_function(wrap_pyfunction!(residual_norms, m)?)?;
    m.add_function(wrap_pyfunction!(project, m)?)?;
    m.add_function(wrap_pyfunction!(minimize, m)?)?;
    m.add_function(wrap_pyfunction!(multi_start, m)?)?;
    m.add_function(wrap_pyfunction!(orbit_distance, m)?)?;
    m.add_function(wrap_pyfunction!(frac_laplacian_pv, m)?)?;
    m.add_function(wrap_pyfunction!(run_verification, m)?)?;
    Ok(())
}
