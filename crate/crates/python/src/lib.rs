use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyInt, PyModule};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use tensor_lrpc::analysis as an;
use tensor_lrpc::glrpc::{classical_tensor, sample_error as sample_err, t_expand};
use tensor_lrpc::tensor::ScanMode;
use tensor_lrpc::{Algorithm, Axis, Error, FieldCtx, GlrpcInstance, GlrpcParams, MatrixFq, Strictness, TensorMode};

type Rows = Vec<Vec<u32>>;

fn err(e: Error) -> PyErr {
    match e {
        Error::Io(_) | Error::Format(_) | Error::HashMismatch => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn to_py<'py, T: Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    PyModule::import(py, "json")?.call_method1("loads", (text,))
}

fn matrix(q: u32, rows: &Rows) -> PyResult<MatrixFq> {
    let cols = rows.first().map(|r| r.len()).unwrap_or(0);
    MatrixFq::from_rows(q, cols, rows).map_err(err)
}

fn axis(a: usize) -> PyResult<Axis> {
    Axis::from_index(a).map_err(err)
}

fn parse<T: std::str::FromStr>(s: &str) -> PyResult<T>
where
    T::Err: std::fmt::Display,
{
    s.parse().map_err(|e: T::Err| PyValueError::new_err(e.to_string()))
}

fn strictness(strict: bool) -> Strictness {
    if strict {
        Strictness::Strict
    } else {
        Strictness::Lenient
    }
}

#[pyclass(name = "Params", frozen, from_py_object)]
#[derive(Clone)]
struct PyParams {
    inner: GlrpcParams,
}

#[pymethods]
impl PyParams {
    #[new]
    #[pyo3(signature = (q=2, m=20, n=20, k=10, d=2, r=2, seed=0))]
    fn new(q: u32, m: usize, n: usize, k: usize, d: usize, r: usize, seed: u64) -> PyResult<Self> {
        let inner = GlrpcParams { q, m, n, k, d, r, seed };
        inner.validate().map_err(err)?;
        Ok(PyParams { inner })
    }
    #[getter]
    fn q(&self) -> u32 {
        self.inner.q
    }
    #[getter]
    fn m(&self) -> usize {
        self.inner.m
    }
    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }
    #[getter]
    fn k(&self) -> usize {
        self.inner.k
    }
    #[getter]
    fn d(&self) -> usize {
        self.inner.d
    }
    #[getter]
    fn r(&self) -> usize {
        self.inner.r
    }
    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }
    fn redundancy(&self) -> usize {
        self.inner.redundancy()
    }
    fn in_decoding_regime(&self) -> bool {
        self.inner.in_decoding_regime()
    }
    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!("Params(q={}, m={}, n={}, k={}, d={}, r={}, seed={})", p.q, p.m, p.n, p.k, p.d, p.r, p.seed)
    }
}

#[pyclass(name = "Tensor", frozen, from_py_object)]
#[derive(Clone)]
struct PyTensor {
    inner: tensor_lrpc::Tensor3,
}

#[pymethods]
impl PyTensor {
    /// Row-major data, last index fastest.
    #[new]
    fn new(q: u32, dims: [usize; 3], data: Vec<u32>) -> PyResult<Self> {
        Ok(PyTensor { inner: tensor_lrpc::Tensor3::new(q, dims, data).map_err(err)? })
    }
    #[staticmethod]
    fn classical(q: u32, m: usize) -> PyResult<Self> {
        let ctx = FieldCtx::standard(q, m).map_err(err)?;
        Ok(PyTensor { inner: classical_tensor(&ctx).map_err(err)? })
    }
    #[staticmethod]
    #[pyo3(signature = (q, dims, seed=0))]
    fn random(q: u32, dims: [usize; 3], seed: u64) -> Self {
        PyTensor { inner: tensor_lrpc::Tensor3::random(q, dims, &mut ChaCha8Rng::seed_from_u64(seed)) }
    }
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = serde_json::from_str(text).map_err(|e| PyIOError::new_err(e.to_string()))?;
        Ok(PyTensor { inner })
    }
    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner).expect("serializable")
    }
    #[getter]
    fn q(&self) -> u32 {
        self.inner.q()
    }
    #[getter]
    fn dims(&self) -> [usize; 3] {
        self.inner.dims()
    }
    fn data(&self) -> Vec<u32> {
        self.inner.data().to_vec()
    }
    /// Axis is 1, 2 or 3; index is zero-based.
    fn slice(&self, ax: usize, index: usize) -> PyResult<Rows> {
        Ok(self.inner.slice(axis(ax)?, index).map_err(err)?.row_vecs())
    }
    fn dir_mult(&self, ax: usize, v: Vec<u32>) -> PyResult<Rows> {
        Ok(self.inner.dir_mult(axis(ax)?, &v).map_err(err)?.row_vecs())
    }
    fn t_product(&self, a: Vec<u32>, b: Vec<u32>) -> PyResult<Vec<u32>> {
        self.inner.t_product(&a, &b).map_err(err)
    }
    fn t_inner(&self, x: Rows, y: Rows) -> PyResult<Vec<u32>> {
        let q = self.inner.q();
        self.inner.t_inner(&matrix(q, &x)?, &matrix(q, &y)?).map_err(err)
    }
    /// `(compatible, slice ranks)` for the given basis rows.
    fn is_compatible(&self, basis: Rows) -> PyResult<(bool, Vec<usize>)> {
        let c = self.inner.is_compatible(&matrix(self.inner.q(), &basis)?).map_err(err)?;
        Ok((c.compatible, c.ranks))
    }
    #[pyo3(signature = (samples=None, seed=0))]
    fn is_presemifield<'py>(&self, py: Python<'py>, samples: Option<u64>, seed: u64) -> PyResult<Bound<'py, PyAny>> {
        let mode = match samples {
            Some(samples) => ScanMode::Sampled { samples, seed },
            None => ScanMode::Exhaustive,
        };
        let v = py.detach(|| self.inner.is_presemifield(mode)).map_err(err)?;
        to_py(py, &v)
    }
    fn permute(&self, sigma: [usize; 3]) -> PyResult<Self> {
        Ok(PyTensor { inner: self.inner.permute(sigma).map_err(err)? })
    }
    fn isotope(&self, a: Rows, b: Rows, c: Rows) -> PyResult<Self> {
        let q = self.inner.q();
        let inner = self.inner.isotope(&matrix(q, &a)?, &matrix(q, &b)?, &matrix(q, &c)?).map_err(err)?;
        Ok(PyTensor { inner })
    }
    /// Dimension of the expansion of the given parity matrices.
    fn expansion_dim(&self, h: Vec<Rows>) -> PyResult<usize> {
        let q = self.inner.q();
        let hs = h.iter().map(|x| matrix(q, x)).collect::<PyResult<Vec<_>>>()?;
        Ok(t_expand(&hs, &self.inner).map_err(err)?.dim())
    }
    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }
    fn __repr__(&self) -> String {
        format!("Tensor(q={}, dims={:?})", self.inner.q(), self.inner.dims())
    }
}

#[pyclass(name = "Instance", frozen, from_py_object)]
#[derive(Clone)]
struct PyInstance {
    inner: GlrpcInstance,
}

#[pymethods]
impl PyInstance {
    /// `mode` is "random" or "classical", or pass `tensor` for a supplied one.
    #[staticmethod]
    #[pyo3(signature = (params, mode="classical", tensor=None))]
    fn generate(py: Python<'_>, params: &PyParams, mode: &str, tensor: Option<&PyTensor>) -> PyResult<Self> {
        let mode = match tensor {
            Some(t) => TensorMode::Supplied(t.inner.clone()),
            None => parse::<TensorMode>(mode)?,
        };
        let p = params.inner;
        let inner = py.detach(|| GlrpcInstance::generate(&p, &mode)).map_err(err)?;
        Ok(PyInstance { inner })
    }
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyInstance { inner: GlrpcInstance::from_json(text).map_err(err)? })
    }
    fn to_json(&self) -> String {
        self.inner.to_json()
    }
    #[getter]
    fn params(&self) -> PyParams {
        PyParams { inner: *self.inner.params() }
    }
    #[getter]
    fn tensor(&self) -> PyTensor {
        PyTensor { inner: self.inner.tensor().clone() }
    }
    #[getter]
    fn tensor_mode(&self) -> String {
        self.inner.tensor_mode().to_string()
    }
    #[getter]
    fn code_dim(&self) -> usize {
        self.inner.code_dim()
    }
    #[getter]
    fn expansion_dim(&self) -> usize {
        self.inner.expansion_dim()
    }
    #[getter]
    fn content_hash(&self) -> String {
        self.inner.content_hash()
    }
    fn support_basis(&self) -> Rows {
        self.inner.support_basis().row_vecs()
    }
    fn parity(&self) -> Vec<Rows> {
        self.inner.parity().iter().map(|h| h.row_vecs()).collect()
    }
    fn encode(&self, msg: Vec<u32>) -> PyResult<Rows> {
        Ok(self.inner.encode(&msg).map_err(err)?.row_vecs())
    }
    #[pyo3(signature = (seed=0))]
    fn random_codeword(&self, seed: u64) -> PyResult<Rows> {
        Ok(self.inner.random_codeword(&mut ChaCha8Rng::seed_from_u64(seed)).map_err(err)?.row_vecs())
    }
    fn syndromes(&self, y: Rows) -> PyResult<Rows> {
        self.inner.syndromes(&matrix(self.inner.params().q, &y)?).map_err(err)
    }
    fn is_codeword(&self, y: Rows) -> PyResult<bool> {
        self.inner.is_codeword(&matrix(self.inner.params().q, &y)?).map_err(err)
    }
    /// Decode outcome as a dict; matrices appear as `{q, rows, cols, data}`.
    #[pyo3(signature = (y, algorithm="basic", strict=true))]
    fn decode<'py>(&self, py: Python<'py>, y: Rows, algorithm: &str, strict: bool) -> PyResult<Bound<'py, PyAny>> {
        let alg = parse::<Algorithm>(algorithm)?;
        let y = matrix(self.inner.params().q, &y)?;
        let out = py.detach(|| tensor_lrpc::decode(&self.inner, &y, alg, strictness(strict))).map_err(err)?;
        to_py(py, &out)
    }
    fn __repr__(&self) -> String {
        let p = self.inner.params();
        format!(
            "Instance(q={}, m={}, n={}, k={}, d={}, mode={}, code_dim={})",
            p.q,
            p.m,
            p.n,
            p.k,
            p.d,
            self.inner.tensor_mode(),
            self.inner.code_dim()
        )
    }
}

/// `(F, X, E)` with `E = F X` of rank r.
#[pyfunction]
#[pyo3(signature = (q, m, n, r, seed=0))]
fn sample_error(q: u32, m: usize, n: usize, r: usize, seed: u64) -> PyResult<(Rows, Rows, Rows)> {
    let s = sample_err(q, m, n, r, &mut ChaCha8Rng::seed_from_u64(seed)).map_err(err)?;
    Ok((s.f.row_vecs(), s.x.row_vecs(), s.e.row_vecs()))
}

#[pyfunction]
fn gauss_binomial<'py>(py: Python<'py>, m: usize, r: usize, q: u32) -> PyResult<Bound<'py, PyAny>> {
    py.get_type::<PyInt>().call1((an::gauss_binomial(m, r, q).to_string(),))
}

#[pyfunction]
fn path_polynomial(m: usize, r: usize) -> PyResult<Vec<u64>> {
    an::path_polynomial(m, r).map_err(err)
}

fn dist_rows(d: an::DimDistribution) -> Vec<(usize, String, f64)> {
    d.support.into_iter().map(|(v, p)| (v, p.exact.to_string(), p.approx)).collect()
}

/// `[(t, "num/den", float)]` for dim(A + B) = a + t.
#[pyfunction]
fn dim_sum_distribution(m: usize, a: usize, b: usize, q: u32) -> PyResult<Vec<(usize, String, f64)>> {
    Ok(dist_rows(an::dim_sum_distribution(m, a, b, q).map_err(err)?))
}

/// `[(eps, "num/den", float)]` with preimage dimension rd + eps.
#[pyfunction]
fn preimage_dim_distribution(m: usize, a: usize, rd: usize, q: u32) -> PyResult<Vec<(usize, String, f64)>> {
    Ok(dist_rows(an::preimage_dim_distribution(m, a, rd, q).map_err(err)?))
}

#[pyfunction]
fn dfr_bound<'py>(py: Python<'py>, params: &PyParams) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &an::dfr_bound(&params.inner))
}

#[pyfunction]
#[pyo3(signature = (params, mode="classical", algorithm="basic", strict=true, trials=100, seed=0, threads=None))]
#[allow(clippy::too_many_arguments)]
fn monte_carlo_dfr<'py>(
    py: Python<'py>,
    params: &PyParams,
    mode: &str,
    algorithm: &str,
    strict: bool,
    trials: u64,
    seed: u64,
    threads: Option<usize>,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = an::DfrConfig {
        params: params.inner,
        tensor_mode: parse::<TensorMode>(mode)?,
        algorithm: parse::<Algorithm>(algorithm)?,
        strictness: strictness(strict),
        trials,
        master_seed: seed,
    };
    let rep = py.detach(|| an::monte_carlo_dfr(&cfg, threads)).map_err(err)?;
    to_py(py, &rep)
}

#[pyfunction]
fn mix64(master: u64, index: u64) -> u64 {
    an::mix64(master, index)
}

#[pymodule]
fn tensorlrpc(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyParams>()?;
    m.add_class::<PyTensor>()?;
    m.add_class::<PyInstance>()?;
    m.add_function(wrap_pyfunction!(sample_error, m)?)?;
    m.add_function(wrap_pyfunction!(gauss_binomial, m)?)?;
    m.add_function(wrap_pyfunction!(path_polynomial, m)?)?;
    m.add_function(wrap_pyfunction!(dim_sum_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(preimage_dim_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(dfr_bound, m)?)?;
    m.add_function(wrap_pyfunction!(monte_carlo_dfr, m)?)?;
    m.add_function(wrap_pyfunction!(mix64, m)?)?;
    Ok(())
}
