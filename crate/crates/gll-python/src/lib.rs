//! Python bindings for the gll toolkit: level profiles, admissibility
//! checks, Bernoulli certificates, matrices over `Z/p^e` with the layer
//! `exp/log` maps, bracket generation, and reduced-scale model simulation.

use gll::arith::Modulus;
use gll::galmodel::SyntheticModel;
use gll::generation;
use gll::matgroup::{self, MatJson, MatZq};
use gll::rand_util::SeedSplitter;
use gll::spectrum::{self, ExponentTuple};
use num_bigint::BigInt;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn value_err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Derived level profile `(m, M, N, t)`.
#[pyclass(module = "gll_py", name = "Profile", skip_from_py_object)]
#[derive(Clone)]
pub struct PyProfile {
    inner: spectrum::ParamProfile,
}

#[pymethods]
impl PyProfile {
    #[getter]
    fn p(&self) -> u64 {
        self.inner.p
    }

    #[getter]
    fn n(&self) -> u32 {
        self.inner.n
    }

    #[getter]
    fn m(&self) -> u32 {
        self.inner.m
    }

    #[getter]
    #[pyo3(name = "M")]
    fn big_m(&self) -> u32 {
        self.inner.big_m
    }

    #[getter]
    #[pyo3(name = "N")]
    fn big_n(&self) -> u32 {
        self.inner.big_n
    }

    #[getter]
    fn t(&self) -> u32 {
        self.inner.t
    }

    fn __repr__(&self) -> String {
        format!(
            "Profile(p={}, n={}, m={}, M={}, N={}, t={})",
            self.inner.p, self.inner.n, self.inner.m, self.inner.big_m, self.inner.big_n,
            self.inner.t
        )
    }
}

/// Level profile for a prime `p` and dimension `n`.
#[pyfunction]
fn profile(p: u64, n: u32) -> PyResult<PyProfile> {
    Ok(PyProfile { inner: spectrum::compute_profile(p, n).map_err(value_err)? })
}

/// The doubling exponent family for an odd anchor `k`.
#[pyfunction]
fn canonical_exponents(p: u64, n: u32, k: u64) -> PyResult<Vec<BigInt>> {
    let t = ExponentTuple::canonical(p, n, k).map_err(value_err)?;
    Ok(t.ks().to_vec())
}

/// Integer admissibility test at level `m`.
#[pyfunction]
fn check_admissible(p: u64, ks: Vec<BigInt>, m: u32) -> PyResult<bool> {
    let t = ExponentTuple::raw(p, ks).map_err(value_err)?;
    Ok(spectrum::check_admissible(&t, m))
}

/// Pointwise-evaluation admissibility oracle at level `m`.
#[pyfunction]
fn admissibility_oracle(p: u64, ks: Vec<BigInt>, m: u32) -> PyResult<bool> {
    let t = ExponentTuple::raw(p, ks).map_err(value_err)?;
    spectrum::admissibility_oracle(&t, m).map_err(value_err)
}

/// Bernoulli numbers `B_0 .. B_{p-3}` mod `p`.
#[pyfunction]
fn bernoulli_mod(p: u64) -> PyResult<Vec<u64>> {
    spectrum::bernoulli_mod(p).map_err(value_err)
}

/// Even indices `a` with `p | B_a`.
#[pyfunction]
fn irregular_indices(p: u64) -> PyResult<Vec<u32>> {
    let table = spectrum::bernoulli_mod(p).map_err(value_err)?;
    Ok(spectrum::irregular_indices(&table))
}

/// Anchor-certificate scan, as a dict mirroring the report JSON.
#[pyfunction]
fn scan_k(py: Python<'_>, p: u64) -> PyResult<Py<PyDict>> {
    let report = spectrum::scan_assumption_k(p).map_err(value_err)?;
    let dict = PyDict::new(py);
    dict.set_item("p", report.p)?;
    dict.set_item("bernoulli_table", &report.bernoulli_table)?;
    dict.set_item("irregular_indices", &report.irregular_indices)?;
    dict.set_item("e_upper", report.e_upper)?;
    dict.set_item("admissible_ks", &report.admissible_ks)?;
    dict.set_item("eigenspace_bound_ok", report.eigenspace_bound_ok)?;
    dict.set_item("unconditional_k", report.unconditional_k)?;
    Ok(dict.into())
}

/// A matrix over `Z/p^e`.
#[pyclass(module = "gll_py", name = "Matrix", skip_from_py_object)]
#[derive(Clone)]
pub struct PyMatrix {
    inner: MatZq,
}

#[pymethods]
impl PyMatrix {
    /// Builds a matrix from row-major entries (Python ints, reduced mod p^e).
    #[new]
    fn new(p: u64, e: u32, n: usize, entries: Vec<BigInt>) -> PyResult<Self> {
        let modulus = Modulus::new(p, e).map_err(value_err)?;
        if entries.len() != n * n {
            return Err(PyValueError::new_err("entry count must be n*n"));
        }
        let vals = entries
            .iter()
            .map(|v| gll::arith::ModInt::from_bigint(v, modulus.clone()).value().clone())
            .collect();
        Ok(PyMatrix { inner: MatZq::from_entries(n, modulus, vals) })
    }

    #[staticmethod]
    fn identity(p: u64, e: u32, n: usize) -> PyResult<Self> {
        let modulus = Modulus::new(p, e).map_err(value_err)?;
        Ok(PyMatrix { inner: MatZq::identity(n, modulus) })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let json: MatJson = serde_json::from_str(text).map_err(value_err)?;
        Ok(PyMatrix { inner: MatZq::from_json(&json).map_err(value_err)? })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner.to_json()).map_err(value_err)
    }

    fn entries(&self) -> Vec<BigInt> {
        self.inner.entries().iter().map(|v| BigInt::from(v.clone())).collect()
    }

    fn mul(&self, other: &PyMatrix) -> PyResult<PyMatrix> {
        if self.inner.modulus() != other.inner.modulus() || self.inner.n() != other.inner.n() {
            return Err(PyValueError::new_err("matrices live over different rings"));
        }
        Ok(PyMatrix { inner: self.inner.mul(&other.inner) })
    }

    fn add(&self, other: &PyMatrix) -> PyResult<PyMatrix> {
        if self.inner.modulus() != other.inner.modulus() || self.inner.n() != other.inner.n() {
            return Err(PyValueError::new_err("matrices live over different rings"));
        }
        Ok(PyMatrix { inner: self.inner.add(&other.inner) })
    }

    fn det(&self) -> BigInt {
        BigInt::from(self.inner.det().value().clone())
    }

    fn is_invertible(&self) -> bool {
        self.inner.is_invertible()
    }

    fn inverse(&self) -> Option<PyMatrix> {
        self.inner.inverse().map(|inner| PyMatrix { inner })
    }

    /// Entrywise reduction to a lower level.
    fn reduce(&self, level: u32) -> PyResult<PyMatrix> {
        if level < 1 || level > self.inner.modulus().exponent() {
            return Err(PyValueError::new_err("bad reduction level"));
        }
        Ok(PyMatrix { inner: self.inner.reduce(level) })
    }

    /// Largest `i` with `self ≡ I (mod p^i)`.
    fn congruence_level(&self) -> u32 {
        self.inner.congruence_level()
    }

    fn __repr__(&self) -> String {
        format!(
            "Matrix(p={}, e={}, n={})",
            self.inner.modulus().prime(),
            self.inner.modulus().exponent(),
            self.inner.n()
        )
    }

    fn __eq__(&self, other: &PyMatrix) -> bool {
        self.inner == other.inner
    }
}

/// `I + p^m A` from an `F_p` matrix given as flat entries.
#[pyfunction]
fn exp_level(p: u64, n: usize, entries: Vec<u64>, m: u32) -> PyResult<PyMatrix> {
    if entries.len() != n * n {
        return Err(PyValueError::new_err("entry count must be n*n"));
    }
    let a = matgroup::MatFp::from_entries(n, p, entries);
    Ok(PyMatrix { inner: matgroup::exp_level(&a, m).map_err(value_err)? })
}

/// Inverse of `exp_level` on the level-`m` congruence layer.
#[pyfunction]
fn log_level(x: &PyMatrix, m: u32) -> PyResult<Vec<u64>> {
    let a = matgroup::log_level(&x.inner, m).map_err(value_err)?;
    Ok(a.entries().to_vec())
}

/// Bracket-closure generation report as a dict.
#[pyfunction]
fn verify_sln_generation(py: Python<'_>, n: usize, p: u64) -> PyResult<Py<PyDict>> {
    if !(2..=16).contains(&n) {
        return Err(PyValueError::new_err("n out of range"));
    }
    let report = generation::verify_sln_generation(n, p);
    let dict = PyDict::new(py);
    dict.set_item("n", report.n)?;
    dict.set_item("p", report.p)?;
    dict.set_item("steps_to_sln", report.steps_to_sln)?;
    dict.set_item("dims_per_step", &report.dims_per_step)?;
    dict.set_item("pass", report.pass)?;
    Ok(dict.into())
}

/// Builds a reduced-scale synthetic model, applies the standard twist, and
/// returns the simulation report as a JSON string.
#[pyfunction]
#[pyo3(signature = (p, n, m, big_m, seed = 0))]
fn simulate_reduced(p: u64, n: u32, m: u32, big_m: u32, seed: u64) -> PyResult<String> {
    let config = gll::cli::RunConfig {
        p,
        n: Some(n),
        k: None,
        mode: gll::cli::Mode::Reduced,
        m: Some(m),
        big_m: Some(big_m),
        seed,
        out: None,
        cap: None,
        model: None,
        instances: 20,
    };
    let report = gll::cli::run(&gll::cli::Command::Simulate(config)).map_err(value_err)?;
    serde_json::to_string_pretty(&report.json).map_err(value_err)
}

/// Runs the full verification chain at reduced scale; returns
/// `(passed, report_json)`.
#[pyfunction]
#[pyo3(signature = (p, n, m, big_m, seed = 0))]
fn verify_all_reduced(p: u64, n: u32, m: u32, big_m: u32, seed: u64) -> PyResult<(bool, String)> {
    let config = gll::cli::RunConfig {
        p,
        n: Some(n),
        k: None,
        mode: gll::cli::Mode::Reduced,
        m: Some(m),
        big_m: Some(big_m),
        seed,
        out: None,
        cap: None,
        model: None,
        instances: 20,
    };
    let report = gll::cli::run(&gll::cli::Command::VerifyAll(config)).map_err(value_err)?;
    let text = serde_json::to_string_pretty(&report.json).map_err(value_err)?;
    Ok((report.pass, text))
}

/// Serialized reduced-scale model (with its standard twist) as JSON.
#[pyfunction]
fn reduced_model_json(p: u64, n: u32, m: u32, big_m: u32) -> PyResult<String> {
    let (model, _admissible) = SyntheticModel::reduced(p, n, m, big_m).map_err(value_err)?;
    let twist = model.standard_twist().map_err(value_err)?;
    serde_json::to_string_pretty(&model.to_json(Some(&twist))).map_err(value_err)
}

/// Deterministic random-stream probe, mainly to document the seeding scheme.
#[pyfunction]
fn stream_probe(seed: u64, name: &str) -> u64 {
    use rand::RngCore;
    SeedSplitter::new(seed).stream(name).next_u64()
}

#[pymodule]
fn gll_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyProfile>()?;
    m.add_class::<PyMatrix>()?;
    m.add_function(wrap_pyfunction!(profile, m)?)?;
    m.add_function(wrap_pyfunction!(canonical_exponents, m)?)?;
    m.add_function(wrap_pyfunction!(check_admissible, m)?)?;
    m.add_function(wrap_pyfunction!(admissibility_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(bernoulli_mod, m)?)?;
    m.add_function(wrap_pyfunction!(irregular_indices, m)?)?;
    m.add_function(wrap_pyfunction!(scan_k, m)?)?;
    m.add_function(wrap_pyfunction!(exp_level, m)?)?;
    m.add_function(wrap_pyfunction!(log_level, m)?)?;
    m.add_function(wrap_pyfunction!(verify_sln_generation, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_reduced, m)?)?;
    m.add_function(wrap_pyfunction!(verify_all_reduced, m)?)?;
    m.add_function(wrap_pyfunction!(reduced_model_json, m)?)?;
    m.add_function(wrap_pyfunction!(stream_probe, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn module_exposes_the_pipeline() {
        Python::initialize();
        Python::attach(|py| {
            let module = PyModule::new(py, "gll_py").unwrap();
            gll_py(&module).unwrap();
            for name in [
                "profile",
                "canonical_exponents",
                "check_admissible",
                "bernoulli_mod",
                "scan_k",
                "exp_level",
                "verify_sln_generation",
                "simulate_reduced",
                "Matrix",
                "Profile",
            ] {
                assert!(module.getattr(name).is_ok(), "missing {name}");
            }
        });
    }

    #[test]
    fn profile_and_exponents_round_trip_through_python_types() {
        Python::initialize();
        Python::attach(|_py| {
            let pr = profile(7, 2).unwrap();
            assert_eq!((pr.m(), pr.big_m(), pr.big_n(), pr.t()), (3, 7, 14, 56));
            let ks = canonical_exponents(7, 2, 3).unwrap();
            assert_eq!(ks, vec![BigInt::from(14), BigInt::from(31)]);
            assert!(check_admissible(7, ks.clone(), 3).unwrap());
            assert!(admissibility_oracle(7, ks, 3).unwrap());
        });
    }

    #[test]
    fn matrix_layer_maps_round_trip() {
        Python::initialize();
        Python::attach(|_py| {
            let x = exp_level(5, 2, vec![1, 2, 3, 4], 2).unwrap();
            assert_eq!(x.congruence_level(), 2);
            assert_eq!(log_level(&x, 2).unwrap(), vec![1, 2, 3, 4]);
            let json = x.to_json().unwrap();
            let back = PyMatrix::from_json(&json).unwrap();
            assert!(back.__eq__(&x));
        });
    }
}
