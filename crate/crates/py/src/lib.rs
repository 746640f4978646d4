//! Python module `nlkg_kam`. Reports and records come back as plain
//! dicts and lists.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

use kamcore::config::RunConfig;
use kamcore::hamalg::{self, NormContext};
use kamcore::kam::{run_kam_with, schedule_params, KamOptions};
use kamcore::nlkg::{self, ModelParams};
use kamcore::resonance::{estimate_resonant_measure, EllBudget};
use kamcore::verify::{run_suite, SuiteOptions};

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(err)?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Sparse polynomial Hamiltonian.
#[pyclass(module = "nlkg_kam", name = "Hamiltonian", skip_from_py_object)]
#[derive(Clone)]
pub struct PyHamiltonian {
    pub inner: hamalg::Hamiltonian,
}

#[pymethods]
impl PyHamiltonian {
    /// Parse the line text format.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(PyHamiltonian {
            inner: hamalg::parse_hamiltonian(text).map_err(err)?,
        })
    }

    fn to_text(&self) -> String {
        hamalg::write_hamiltonian(&self.inner)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        let m = self.inner.meta();
        format!("Hamiltonian(terms={}, n_max={}, d_max={}, c={})", self.inner.len(), m.n_max, m.d_max, m.c)
    }

    fn __add__(&self, other: &Self) -> PyResult<Self> {
        Ok(PyHamiltonian {
            inner: self.inner.add(&other.inner).map_err(err)?,
        })
    }

    fn __sub__(&self, other: &Self) -> PyResult<Self> {
        Ok(PyHamiltonian {
            inner: self.inner.sub(&other.inner).map_err(err)?,
        })
    }

    /// Poisson bracket `{self, other}`.
    fn bracket(&self, other: &Self) -> PyResult<Self> {
        Ok(PyHamiltonian {
            inner: hamalg::poisson_bracket(&self.inner, &other.inner).map_err(err)?,
        })
    }

    fn expand_j(&self) -> PyResult<Self> {
        Ok(PyHamiltonian {
            inner: self.inner.expand_j().map_err(err)?,
        })
    }

    fn canonical(&self) -> Self {
        PyHamiltonian {
            inner: self.inner.canonical(),
        }
    }

    /// `(R0, R1, R2)` by the number of `J` factors.
    fn split(&self) -> (Self, Self, Self) {
        let (a, b, c) = self.inner.split();
        (PyHamiltonian { inner: a }, PyHamiltonian { inner: b }, PyHamiltonian { inner: c })
    }

    fn max_abs_coeff(&self) -> f64 {
        self.inner.max_abs_coeff()
    }

    #[pyo3(signature = (rho, r=None))]
    fn norm(&self, rho: f64, r: Option<f64>) -> PyResult<f64> {
        let m = self.inner.meta();
        let ctx = NormContext::new(m.sigma, rho, r.unwrap_or(m.r), m.c).map_err(err)?;
        Ok(hamalg::norm(&self.inner, &ctx))
    }

    /// Plus norm, taken on the `J`-expanded form.
    #[pyo3(signature = (rho, r=None))]
    fn norm_plus(&self, rho: f64, r: Option<f64>) -> PyResult<f64> {
        let m = self.inner.meta();
        let ctx = NormContext::new(m.sigma, rho, r.unwrap_or(m.r), m.c).map_err(err)?;
        hamalg::norm_plus(&self.inner.expand_j().map_err(err)?, &ctx).map_err(err)
    }
}

/// Model parameters `(c, V, ε, σ, r, N_max, D_max)`.
#[pyclass(module = "nlkg_kam", name = "Model", skip_from_py_object)]
#[derive(Clone)]
pub struct PyModel {
    pub inner: ModelParams,
}

#[pymethods]
impl PyModel {
    /// `v` lists `V_n` for `n = -n_max..=n_max`; when absent it is drawn from `v_seed`.
    #[new]
    #[pyo3(signature = (c, eps, v=None, v_seed=0, sigma=3.0, r=1.5, n_max=4, d_max=8))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        c: f64,
        eps: f64,
        v: Option<Vec<f64>>,
        v_seed: u64,
        sigma: f64,
        r: f64,
        n_max: u32,
        d_max: u32,
    ) -> PyResult<Self> {
        let v = match v {
            Some(v) => kamcore::indices::ModeVec::from_vec(n_max, v)
                .ok_or_else(|| err(format!("V must have 2·n_max+1 = {} entries", 2 * n_max + 1)))?,
            None => nlkg::draw_potential(n_max, v_seed),
        };
        let inner = ModelParams {
            c,
            v,
            eps,
            sigma,
            r,
            n_max,
            d_max,
        };
        inner.validate().map_err(err)?;
        Ok(PyModel { inner })
    }

    /// Model from a JSON config document.
    #[staticmethod]
    fn from_config(text: &str) -> PyResult<Self> {
        Ok(PyModel {
            inner: RunConfig::from_json(text).map_err(err)?.model(),
        })
    }

    #[getter]
    fn v(&self) -> Vec<f64> {
        self.inner.v.as_slice().to_vec()
    }

    /// `(N, R)`.
    fn build(&self) -> PyResult<(PyHamiltonian, PyHamiltonian)> {
        let (n, r) = nlkg::build_hamiltonian(&self.inner).map_err(err)?;
        Ok((PyHamiltonian { inner: n }, PyHamiltonian { inner: r }))
    }

    /// `λ_n` for `n = -n_max..=n_max`.
    fn frequencies(&self) -> Vec<f64> {
        nlkg::frequencies(&self.inner).lambda.into_vec()
    }

    /// Initial actions `I_n(0)`.
    fn amplitudes(&self) -> Vec<f64> {
        nlkg::initial_amplitudes(&self.inner).into_vec()
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!("Model(c={}, eps={}, sigma={}, r={}, n_max={}, d_max={})", p.c, p.eps, p.sigma, p.r, p.n_max, p.d_max)
    }
}

/// Run the KAM iteration; returns the report as a dict.
#[pyfunction]
#[pyo3(signature = (model, gamma=1e-3, steps=3, seed=0))]
fn run_kam<'py>(py: Python<'py>, model: &PyModel, gamma: f64, steps: u32, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    let opts = KamOptions {
        gamma,
        steps,
        seed,
        ..KamOptions::default()
    };
    let p = model.inner.clone();
    let report = py.detach(move || run_kam_with(&p, opts)).map_err(err)?;
    to_py(py, &report)
}

/// Iteration parameters of step `s`.
#[pyfunction]
fn schedule<'py>(py: Python<'py>, s: u32, eps0: f64) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &schedule_params(s, eps0).map_err(err)?)
}

/// Monte Carlo estimate of the resonant fraction.
#[pyfunction]
#[pyo3(signature = (c, gamma, samples=10_000, support=3, height=3, n3max=8, seed=0))]
#[allow(clippy::too_many_arguments)]
fn resonant_measure<'py>(
    py: Python<'py>,
    c: f64,
    gamma: f64,
    samples: usize,
    support: usize,
    height: u32,
    n3max: u32,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let budget = EllBudget {
        max_support: support,
        max_height: height,
        max_n3star: n3max,
        n_max: None,
    };
    let est = py
        .detach(move || estimate_resonant_measure(c, gamma, &budget, samples, seed))
        .map_err(err)?;
    to_py(py, &est)
}

/// Resolve a JSON config with defaults applied.
#[pyfunction]
fn parse_config<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &RunConfig::from_json(text).map_err(err)?)
}

/// The property suite; one dict per criterion.
#[pyfunction]
#[pyo3(signature = (quick=true, seed=0))]
fn verify(py: Python<'_>, quick: bool, seed: u64) -> PyResult<Bound<'_, PyAny>> {
    let checks = py.detach(move || run_suite(&SuiteOptions { seed, quick }));
    to_py(py, &checks)
}

#[pymodule]
fn nlkg_kam(m: &Bound<'_, PyModule>) -> PyResult<()> {
    register(m)
}

/// Add the classes and functions to `m`.
pub fn register(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyHamiltonian>()?;
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(run_kam, m)?)?;
    m.add_function(wrap_pyfunction!(schedule, m)?)?;
    m.add_function(wrap_pyfunction!(resonant_measure, m)?)?;
    m.add_function(wrap_pyfunction!(parse_config, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
