//! Python bindings: matrices, Hadamard generators, the decomposition
//! pipelines, certificate verification, the parameter predictor and the
//! exhaustive oracle.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use rigidity::cert::{verify_cert, LowRankSparseCert, VerificationReport, VerifyOptions};
use rigidity::decomp::{
    decompose_kron_product, decompose_unequal, hadamard_family_pipeline, DecompOptions, DeltaChoice, PipelineReport,
    UnequalMode,
};
use rigidity::hadamard::{self, HadamardMatrix};
use rigidity::io::{parse_cert, parse_matrix, peek_field, render_cert, render_matrix, MatrixFormat};
use rigidity::matrix::{DenseMatrix, KroneckerSpec};
use rigidity::oracle::{brute_rc_rigidity, brute_rigidity};
use rigidity::predict::{predict_parameters, PredictConfig};
use rigidity::score::WeightFn;
use rigidity::{Field, FieldSpec, PrimeField, Rationals};

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_field(s: &str) -> PyResult<FieldSpec> {
    s.parse().map_err(err)
}

#[derive(Clone)]
enum AnyMatrix {
    Fp(DenseMatrix<PrimeField>),
    Q(DenseMatrix<Rationals>),
}

/// Dispatches on the concrete field of an `AnyMatrix`-like enum.
macro_rules! each {
    ($v:expr, |$m:ident| $body:expr) => {
        match $v {
            AnyMatrix::Fp($m) => $body,
            AnyMatrix::Q($m) => $body,
        }
    };
}

/// An exact dense matrix over `Fp p` or `Q`.
#[pyclass(name = "Matrix", module = "rigidity_py", from_py_object)]
#[derive(Clone)]
struct PyMatrix {
    inner: AnyMatrix,
}

fn rows_from<F: Field>(f: &F, rows: &[Vec<String>]) -> PyResult<DenseMatrix<F>> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(PyValueError::new_err("rows have different lengths"));
    }
    let data = rows
        .iter()
        .flatten()
        .map(|s| f.parse_elem(s))
        .collect::<Result<Vec<_>, _>>()
        .map_err(err)?;
    DenseMatrix::from_vec(f, n, m, data).map_err(err)
}

fn entries_of<F: Field>(m: &DenseMatrix<F>) -> Vec<Vec<String>> {
    let f = m.field();
    (0..m.rows()).map(|i| m.row(i).iter().map(|v| f.format_elem(v)).collect()).collect()
}

impl PyMatrix {
    fn spec(&self) -> FieldSpec {
        each!(&self.inner, |m| m.field().spec())
    }

    fn from_hadamard(h: rigidity::Result<HadamardMatrix>, field: &str) -> PyResult<Self> {
        let h = h.map_err(err)?;
        let inner = match parse_field(field)? {
            FieldSpec::Prime(p) => AnyMatrix::Fp(h.to_dense(&PrimeField::new(p).map_err(err)?).map_err(err)?),
            FieldSpec::Rational => AnyMatrix::Q(h.to_dense(&Rationals).map_err(err)?),
        };
        Ok(PyMatrix { inner })
    }
}

#[pymethods]
impl PyMatrix {
    /// Builds a matrix from rows of integers or strings such as `"3/2"`.
    #[new]
    #[pyo3(signature = (rows, field = "Q"))]
    fn new(rows: Vec<Vec<Bound<'_, PyAny>>>, field: &str) -> PyResult<Self> {
        let text: Vec<Vec<String>> = rows
            .iter()
            .map(|r| r.iter().map(|v| v.str().map(|s| s.to_string())).collect::<PyResult<_>>())
            .collect::<PyResult<_>>()?;
        let inner = match parse_field(field)? {
            FieldSpec::Prime(p) => AnyMatrix::Fp(rows_from(&PrimeField::new(p).map_err(err)?, &text)?),
            FieldSpec::Rational => AnyMatrix::Q(rows_from(&Rationals, &text)?),
        };
        Ok(PyMatrix { inner })
    }

    /// Parses the matrix file format.
    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        let inner = match peek_field(text).map_err(err)? {
            FieldSpec::Prime(p) => {
                AnyMatrix::Fp(parse_matrix(text, &PrimeField::new(p).map_err(err)?).map_err(err)?.0.to_dense())
            }
            FieldSpec::Rational => AnyMatrix::Q(parse_matrix(text, &Rationals).map_err(err)?.0.to_dense()),
        };
        Ok(PyMatrix { inner })
    }

    #[pyo3(signature = (format = "dense"))]
    fn to_text(&self, format: &str) -> PyResult<String> {
        let fmt = format.parse::<MatrixFormat>().map_err(err)?;
        Ok(each!(&self.inner, |m| render_matrix(&m.to_sparse(), fmt)))
    }

    #[getter]
    fn rows(&self) -> usize {
        each!(&self.inner, |m| m.rows())
    }

    #[getter]
    fn cols(&self) -> usize {
        each!(&self.inner, |m| m.cols())
    }

    #[getter]
    fn field(&self) -> String {
        self.spec().to_string()
    }

    /// Entries as strings, row by row.
    fn entries(&self) -> Vec<Vec<String>> {
        each!(&self.inner, |m| entries_of(m))
    }

    fn rank(&self) -> usize {
        each!(&self.inner, |m| m.rank())
    }

    fn kron(&self, other: &PyMatrix) -> PyResult<PyMatrix> {
        let inner = match (&self.inner, &other.inner) {
            (AnyMatrix::Fp(a), AnyMatrix::Fp(b)) if a.field() == b.field() => AnyMatrix::Fp(a.kron(b)),
            (AnyMatrix::Q(a), AnyMatrix::Q(b)) => AnyMatrix::Q(a.kron(b)),
            _ => return Err(PyValueError::new_err(format!("field mismatch: {} vs {}", self.field(), other.field()))),
        };
        Ok(PyMatrix { inner })
    }

    fn __eq__(&self, other: &PyMatrix) -> bool {
        match (&self.inner, &other.inner) {
            (AnyMatrix::Fp(a), AnyMatrix::Fp(b)) => a == b,
            (AnyMatrix::Q(a), AnyMatrix::Q(b)) => a == b,
            _ => false,
        }
    }

    fn __repr__(&self) -> String {
        format!("Matrix({}x{} over {})", self.rows(), self.cols(), self.field())
    }
}

#[derive(Clone)]
enum AnyCert {
    Fp(LowRankSparseCert<PrimeField>),
    Q(LowRankSparseCert<Rationals>),
}

macro_rules! each_cert {
    ($v:expr, |$c:ident| $body:expr) => {
        match $v {
            AnyCert::Fp($c) => $body,
            AnyCert::Q($c) => $body,
        }
    };
}

/// A low-rank plus sparse certificate `T = E + Z`.
#[pyclass(name = "Certificate", module = "rigidity_py", skip_from_py_object)]
#[derive(Clone)]
struct PyCertificate {
    inner: AnyCert,
}

fn kv_dict<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    for line in text.lines() {
        if let Some((k, v)) = line.split_once(": ") {
            d.set_item(k, v)?;
        }
    }
    Ok(d)
}

fn verification_dict<'py>(py: Python<'py>, v: &VerificationReport) -> PyResult<Bound<'py, PyDict>> {
    let d = kv_dict(py, &v.to_kv())?;
    d.set_item("verified", v.verified())?;
    d.set_item("reconstruction_exact", v.reconstruction_exact)?;
    d.set_item("rank_ok", v.rank_ok)?;
    d.set_item("sparsity_ok", v.sparsity_ok)?;
    d.set_item("max_row_nnz", v.max_row_nnz)?;
    d.set_item("max_col_nnz", v.max_col_nnz)?;
    Ok(d)
}

fn check_with<F: Field>(c: &LowRankSparseCert<F>, factors: Vec<DenseMatrix<F>>) -> PyResult<VerificationReport> {
    let spec = KroneckerSpec::new(&c.field, factors).map_err(err)?;
    if spec.order() != c.rows || !c.is_square() {
        return Err(PyValueError::new_err(format!(
            "certificate is {}x{} but target has order {}",
            c.rows,
            c.cols,
            spec.order()
        )));
    }
    Ok(verify_cert(c, &spec, &VerifyOptions::for_field(c.spec())))
}

#[pymethods]
impl PyCertificate {
    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        let inner = match peek_field(text).map_err(err)? {
            FieldSpec::Prime(p) => AnyCert::Fp(parse_cert(text, &PrimeField::new(p).map_err(err)?).map_err(err)?),
            FieldSpec::Rational => AnyCert::Q(parse_cert(text, &Rationals).map_err(err)?),
        };
        Ok(PyCertificate { inner })
    }

    fn to_text(&self) -> String {
        each_cert!(&self.inner, |c| render_cert(c))
    }

    #[getter]
    fn claimed_rank(&self) -> usize {
        each_cert!(&self.inner, |c| c.claimed_rank)
    }

    #[getter]
    fn claimed_sparsity(&self) -> usize {
        each_cert!(&self.inner, |c| c.claimed_sparsity)
    }

    #[getter]
    fn rows(&self) -> usize {
        each_cert!(&self.inner, |c| c.rows)
    }

    #[getter]
    fn cols(&self) -> usize {
        each_cert!(&self.inner, |c| c.cols)
    }

    #[getter]
    fn target(&self) -> String {
        each_cert!(&self.inner, |c| c.target.clone())
    }

    #[getter]
    fn lowrank_kind(&self) -> &'static str {
        each_cert!(&self.inner, |c| c.low_rank.kind())
    }

    /// The sparse part `Z`.
    fn sparse(&self) -> PyMatrix {
        let inner = match &self.inner {
            AnyCert::Fp(c) => AnyMatrix::Fp(c.sparse.to_dense()),
            AnyCert::Q(c) => AnyMatrix::Q(c.sparse.to_dense()),
        };
        PyMatrix { inner }
    }

    /// Checks the certificate against the Kronecker product of `factors`.
    fn verify<'py>(&self, py: Python<'py>, factors: Vec<PyMatrix>) -> PyResult<Bound<'py, PyDict>> {
        let report = match &self.inner {
            AnyCert::Fp(c) => check_with(c, unwrap_fp(&factors, c.field)?)?,
            AnyCert::Q(c) => check_with(c, unwrap_q(&factors)?)?,
        };
        verification_dict(py, &report)
    }

    fn __repr__(&self) -> String {
        format!(
            "Certificate({}x{}, rank <= {}, sparsity <= {}, {})",
            self.rows(),
            self.cols(),
            self.claimed_rank(),
            self.claimed_sparsity(),
            self.lowrank_kind()
        )
    }
}

fn unwrap_fp(ms: &[PyMatrix], f: PrimeField) -> PyResult<Vec<DenseMatrix<PrimeField>>> {
    ms.iter()
        .map(|m| match &m.inner {
            AnyMatrix::Fp(a) if *a.field() == f => Ok(a.clone()),
            _ => Err(PyValueError::new_err(format!("factor over {} where Fp {} was expected", m.field(), f.modulus()))),
        })
        .collect()
}

fn unwrap_q(ms: &[PyMatrix]) -> PyResult<Vec<DenseMatrix<Rationals>>> {
    ms.iter()
        .map(|m| match &m.inner {
            AnyMatrix::Q(a) => Ok(a.clone()),
            _ => Err(PyValueError::new_err(format!("factor over {} where Q was expected", m.field()))),
        })
        .collect()
}

#[pyfunction]
#[pyo3(signature = (k, field = "Q"))]
fn walsh(k: u32, field: &str) -> PyResult<PyMatrix> {
    PyMatrix::from_hadamard(hadamard::walsh(k), field)
}

#[pyfunction]
#[pyo3(signature = (q, field = "Q"))]
fn paley1(q: u64, field: &str) -> PyResult<PyMatrix> {
    PyMatrix::from_hadamard(hadamard::paley1(q), field)
}

#[pyfunction]
#[pyo3(signature = (q, field = "Q"))]
fn paley2(q: u64, field: &str) -> PyResult<PyMatrix> {
    PyMatrix::from_hadamard(hadamard::paley2(q), field)
}

fn run_pipeline<F: Field>(
    f: &F,
    mats: Vec<DenseMatrix<F>>,
    eps: f64,
    mode: &str,
    opts: &DecompOptions,
    b: f64,
) -> PyResult<(LowRankSparseCert<F>, PipelineReport, VerificationReport)> {
    let spec = KroneckerSpec::new(f, mats.clone()).map_err(err)?;
    let (cert, report) = match mode {
        "equal" => decompose_kron_product(&spec, eps, opts),
        "binpack" => decompose_unequal(f, &mats, eps, UnequalMode::BinPack, opts),
        "hadamard" => hadamard_family_pipeline(f, &mats, &vec![None; mats.len()], eps, b, 1.0, opts),
        other => return Err(PyValueError::new_err(format!("unknown mode {other:?}"))),
    }
    .map_err(err)?;
    let v = verify_cert(&cert, &spec, &VerifyOptions::for_field(f.spec()));
    Ok((cert, report, v))
}

/// Builds a certificate for the Kronecker product of `factors` and checks
/// it. Returns `(certificate, report, verification)`; the report is the
/// key-value text of the pipeline ledger.
#[pyfunction]
#[pyo3(signature = (factors, epsilon, mode = "equal", delta = None, b = 4.0))]
fn decompose<'py>(
    py: Python<'py>,
    factors: Vec<PyMatrix>,
    epsilon: f64,
    mode: &str,
    delta: Option<f64>,
    b: f64,
) -> PyResult<(PyCertificate, String, Bound<'py, PyDict>)> {
    let first = factors.first().ok_or_else(|| PyValueError::new_err("no factors"))?;
    let opts = DecompOptions {
        delta: delta.map_or(DeltaChoice::Auto, DeltaChoice::Fixed),
        ..DecompOptions::default()
    };
    let (cert, report, v) = match first.spec() {
        FieldSpec::Prime(p) => {
            let f = PrimeField::new(p).map_err(err)?;
            let (c, r, v) = run_pipeline(&f, unwrap_fp(&factors, f)?, epsilon, mode, &opts, b)?;
            (AnyCert::Fp(c), r, v)
        }
        FieldSpec::Rational => {
            let (c, r, v) = run_pipeline(&Rationals, unwrap_q(&factors)?, epsilon, mode, &opts, b)?;
            (AnyCert::Q(c), r, v)
        }
    };
    Ok((PyCertificate { inner: cert }, report.to_kv(), verification_dict(py, &v)?))
}

/// Predicted split parameters for the given dimensions, as a dict of the
/// report's key-value lines.
#[pyfunction]
#[pyo3(signature = (dims, epsilon, c = 1.0))]
fn predict<'py>(py: Python<'py>, dims: Vec<usize>, epsilon: f64, c: f64) -> PyResult<Bound<'py, PyDict>> {
    let cfg = PredictConfig {
        c,
        ..PredictConfig::default()
    };
    let r = predict_parameters(&dims, epsilon, &WeightFn::Uniform, &cfg).map_err(err)?;
    let d = kv_dict(py, &r.to_kv())?;
    d.set_item("K", r.k_min)?;
    d.set_item("L", r.l_max)?;
    d.set_item("feasible", r.feasible())?;
    Ok(d)
}

/// Exact rigidity (or row-column rigidity with `rc=True`) of a tiny matrix.
#[pyfunction]
#[pyo3(signature = (matrix, rank, rc = false))]
fn oracle(matrix: &PyMatrix, rank: usize, rc: bool) -> PyResult<usize> {
    each!(&matrix.inner, |m| {
        let r = if rc { brute_rc_rigidity(m, rank) } else { brute_rigidity(m, rank) };
        r.map(|r| r.value).map_err(err)
    })
}

#[pymodule]
fn rigidity_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMatrix>()?;
    m.add_class::<PyCertificate>()?;
    m.add_function(wrap_pyfunction!(walsh, m)?)?;
    m.add_function(wrap_pyfunction!(paley1, m)?)?;
    m.add_function(wrap_pyfunction!(paley2, m)?)?;
    m.add_function(wrap_pyfunction!(decompose, m)?)?;
    m.add_function(wrap_pyfunction!(predict, m)?)?;
    m.add_function(wrap_pyfunction!(oracle, m)?)?;
    Ok(())
}
