//! Python bindings for the main types and operations: Pareto front geometry,
//! the exact improvement distribution, acquisition functions, Monte-Carlo
//! sampling, ZDT problems and Latin-hypercube designs.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use hvi_core::acquisition;
use hvi_core::bo;
use hvi_core::dist::{BiGaussian, HviDistribution as CoreDistribution};
use hvi_core::gauss::QuadratureConfig;
use hvi_core::mc::{self, McConfig};
use hvi_core::pareto::{self, ParetoFront2D, Point2};
use hvi_core::problems::{lhs as core_lhs, DoePlan, Problem};

fn value_err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn pred_from(mu: (f64, f64), sigma: (f64, f64)) -> PyResult<BiGaussian> {
    BiGaussian::new(mu.0, mu.1, sigma.0, sigma.1).map_err(value_err)
}

/// A strictly non-dominated set of bi-objective points with a reference
/// point, exposing hypervolume and improvement queries.
#[pyclass(name = "ParetoFront", from_py_object)]
#[derive(Clone)]
struct PyParetoFront {
    inner: ParetoFront2D,
}

#[pymethods]
impl PyParetoFront {
    #[new]
    fn new(points: Vec<(f64, f64)>, reference: (f64, f64)) -> PyResult<Self> {
        let pts: Vec<Point2> = points.iter().map(|&(a, b)| Point2::new(a, b)).collect();
        let inner =
            ParetoFront2D::new(pts, Point2::new(reference.0, reference.1)).map_err(value_err)?;
        Ok(Self { inner })
    }

    /// Builds the front of an arbitrary observation set, dropping dominated
    /// points and points outside the reference box.
    #[staticmethod]
    fn from_observations(points: Vec<(f64, f64)>, reference: (f64, f64)) -> PyResult<Self> {
        let pts: Vec<Point2> = points.iter().map(|&(a, b)| Point2::new(a, b)).collect();
        let inner = ParetoFront2D::from_observations(&pts, Point2::new(reference.0, reference.1))
            .map_err(value_err)?;
        Ok(Self { inner })
    }

    fn points(&self) -> Vec<(f64, f64)> {
        self.inner.points().iter().map(|p| (p.y1, p.y2)).collect()
    }

    fn reference(&self) -> (f64, f64) {
        let r = self.inner.ref_point();
        (r.y1, r.y2)
    }

    fn hypervolume(&self) -> f64 {
        self.inner.hypervolume()
    }

    fn hvi_plus(&self, y: (f64, f64)) -> f64 {
        self.inner.hvi_plus(Point2::new(y.0, y.1))
    }

    /// Generalized improvement: positive gain on the non-dominated side,
    /// negative penalty on the dominated side.
    fn hvi(&self, y: (f64, f64)) -> f64 {
        self.inner.generalized_hvi(Point2::new(y.0, y.1))
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "ParetoFront({} points, hv={:.6})",
            self.inner.len(),
            self.inner.hypervolume()
        )
    }
}

/// Exact law of the generalized hypervolume improvement under independent
/// Gaussian marginals.
#[pyclass(name = "HviDistribution")]
struct PyHviDistribution {
    inner: CoreDistribution,
    front: ParetoFront2D,
}

#[pymethods]
impl PyHviDistribution {
    #[new]
    #[pyo3(signature = (front, mu, sigma, quad_tol=1e-8))]
    fn new(
        front: &PyParetoFront,
        mu: (f64, f64),
        sigma: (f64, f64),
        quad_tol: f64,
    ) -> PyResult<Self> {
        let pred = pred_from(mu, sigma)?;
        let quad = QuadratureConfig::with_tol(quad_tol);
        let inner = CoreDistribution::build(&front.inner, &pred, &quad).map_err(value_err)?;
        Ok(Self {
            inner,
            front: front.inner.clone(),
        })
    }

    fn pdf(&self, delta: f64) -> f64 {
        self.inner.marginal_pdf(delta)
    }

    fn cdf(&self, delta: f64) -> f64 {
        self.inner.marginal_cdf(delta)
    }

    fn quantile(&self, omega: f64) -> PyResult<f64> {
        self.inner.quantile(omega).map_err(value_err)
    }

    fn support(&self) -> (f64, f64) {
        self.inner.support()
    }

    /// Quantile upper confidence bound acquisition value.
    fn ucb(&self, omega: f64) -> PyResult<f64> {
        acquisition::ucb(&self.inner, omega).map_err(value_err)
    }

    /// Probability of improving the front hypervolume by at least `eps`
    /// as a fraction.
    fn eps_pohvi(&self, eps: f64) -> f64 {
        acquisition::eps_pohvi(&self.inner, &self.front, eps)
    }

    fn cell_count(&self) -> usize {
        self.inner.cell_count_retained()
    }

    fn retained_mass(&self) -> f64 {
        self.inner.retained_mass()
    }
}

/// Probability that a Gaussian objective point improves the front.
#[pyfunction]
fn poi(front: &PyParetoFront, mu: (f64, f64), sigma: (f64, f64)) -> PyResult<f64> {
    Ok(acquisition::poi(&pred_from(mu, sigma)?, &front.inner))
}

#[pyfunction]
fn eps_poi(front: &PyParetoFront, mu: (f64, f64), sigma: (f64, f64), eps: f64) -> PyResult<f64> {
    Ok(acquisition::eps_poi(
        &pred_from(mu, sigma)?,
        &front.inner,
        eps,
    ))
}

#[pyfunction]
fn naive_ucb(
    front: &PyParetoFront,
    mu: (f64, f64),
    sigma: (f64, f64),
    omega: f64,
) -> PyResult<f64> {
    Ok(acquisition::naive_ucb(
        &pred_from(mu, sigma)?,
        &front.inner,
        omega,
    ))
}

/// Non-dominated filter over raw objective points.
#[pyfunction]
fn non_dominated(points: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    let pts: Vec<Point2> = points.iter().map(|&(a, b)| Point2::new(a, b)).collect();
    pareto::non_dominated_filter(&pts)
        .iter()
        .map(|p| (p.y1, p.y2))
        .collect()
}

/// Monte-Carlo draws of the generalized improvement, deterministic per seed.
#[pyfunction]
#[pyo3(signature = (front, mu, sigma, n_samples, seed=0))]
fn mc_hvi_samples(
    front: &PyParetoFront,
    mu: (f64, f64),
    sigma: (f64, f64),
    n_samples: usize,
    seed: u64,
) -> PyResult<Vec<f64>> {
    Ok(mc::sample_hvi(
        &front.inner,
        &pred_from(mu, sigma)?,
        &McConfig { n_samples, seed },
    ))
}

/// Evaluates a ZDT problem (`zdt1`..`zdt4`, `zdt6`) at a decision vector.
#[pyfunction]
fn zdt(name: &str, x: Vec<f64>) -> PyResult<(f64, f64)> {
    let problem = Problem::by_name(name).map_err(value_err)?;
    let y = problem.evaluate(&x).map_err(value_err)?;
    Ok((y.y1, y.y2))
}

#[pyfunction]
fn zdt_dim(name: &str) -> PyResult<usize> {
    Ok(Problem::by_name(name).map_err(value_err)?.dim())
}

/// Latin-hypercube design over the unit box.
#[pyfunction]
#[pyo3(signature = (n_points, dim, seed=0))]
fn lhs(n_points: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    core_lhs(&DoePlan { n_points, seed }, &vec![[0.0, 1.0]; dim])
}

/// Runs one Bayesian-optimization repetition from a TOML experiment config;
/// returns the best-so-far hypervolume per iteration.
#[pyfunction]
#[pyo3(signature = (config_toml, rep=0))]
fn run_bo(config_toml: &str, rep: u64) -> PyResult<Vec<f64>> {
    let cfg = hvi_core::report::parse_experiment_config(config_toml).map_err(value_err)?;
    let record = bo::run_indexed(&cfg, rep).map_err(value_err)?;
    Ok(record.rows.iter().map(|r| r.hv_best).collect())
}

#[pymodule]
fn hvi_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyParetoFront>()?;
    m.add_class::<PyHviDistribution>()?;
    m.add_function(wrap_pyfunction!(poi, m)?)?;
    m.add_function(wrap_pyfunction!(eps_poi, m)?)?;
    m.add_function(wrap_pyfunction!(naive_ucb, m)?)?;
    m.add_function(wrap_pyfunction!(non_dominated, m)?)?;
    m.add_function(wrap_pyfunction!(mc_hvi_samples, m)?)?;
    m.add_function(wrap_pyfunction!(zdt, m)?)?;
    m.add_function(wrap_pyfunction!(zdt_dim, m)?)?;
    m.add_function(wrap_pyfunction!(lhs, m)?)?;
    m.add_function(wrap_pyfunction!(run_bo, m)?)?;
    Ok(())
}
