use crate::error::{Error, Result};
use crate::field::Field;
use crate::matrix::dense::DenseMatrix;
use crate::matrix::sparse::SparseMatrix;
use crate::matrix::DEFAULT_DIM_CAP;

/// Bijection between tuples in `[d_1] x ... x [d_k]` (0-based) and `0..n`,
/// with coordinate 1 the most significant digit.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MixedRadix {
    dims: Vec<usize>,
    strides: Vec<usize>,
    size: usize,
}

impl MixedRadix {
    pub fn new(dims: &[usize]) -> Result<Self> {
        let mut strides = vec![0; dims.len()];
        let mut size: usize = 1;
        for (i, &d) in dims.iter().enumerate().rev() {
            if d == 0 {
                return Err(Error::InvalidParameter("zero dimension".into()));
            }
            strides[i] = size;
            size = size
                .checked_mul(d)
                .ok_or(Error::SizeCap { size: usize::MAX, cap: usize::MAX })?;
        }
        Ok(MixedRadix {
            dims: dims.to_vec(),
            strides,
            size,
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn encode(&self, tuple: &[usize]) -> Result<usize> {
        if tuple.len() != self.dims.len() {
            return Err(Error::DimensionMismatch(format!(
                "tuple of length {} for {} coordinates",
                tuple.len(),
                self.dims.len()
            )));
        }
        let mut idx = 0;
        for ((&x, &d), &s) in tuple.iter().zip(&self.dims).zip(&self.strides) {
            if x >= d {
                return Err(Error::OutOfRange { index: x, bound: d });
            }
            idx += x * s;
        }
        Ok(idx)
    }

    pub fn decode(&self, mut idx: usize) -> Vec<usize> {
        debug_assert!(idx < self.size);
        let mut out = vec![0; self.dims.len()];
        for (i, &s) in self.strides.iter().enumerate() {
            out[i] = idx / s;
            idx %= s;
        }
        out
    }

    /// Coordinate `i` of index `idx`.
    pub fn digit(&self, idx: usize, i: usize) -> usize {
        (idx / self.strides[i]) % self.dims[i]
    }
}

/// An ordered list of square factors whose Kronecker product is the target.
#[derive(Clone, Debug, PartialEq)]
pub struct KroneckerSpec<F: Field> {
    field: F,
    factors: Vec<DenseMatrix<F>>,
}

impl<F: Field> KroneckerSpec<F> {
    pub fn new(field: &F, factors: Vec<DenseMatrix<F>>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidParameter("no factors".into()));
        }
        for (i, m) in factors.iter().enumerate() {
            if !m.is_square() {
                return Err(Error::DimensionMismatch(format!(
                    "factor {} is {}x{}, not square",
                    i + 1,
                    m.rows(),
                    m.cols()
                )));
            }
            if m.rows() < 2 {
                return Err(Error::InvalidParameter(format!("factor {} has dimension < 2", i + 1)));
            }
        }
        MixedRadix::new(&factors.iter().map(|m| m.rows()).collect::<Vec<_>>())?;
        Ok(KroneckerSpec {
            field: field.clone(),
            factors,
        })
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn factors(&self) -> &[DenseMatrix<F>] {
        &self.factors
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(|m| m.rows()).collect()
    }

    pub fn k(&self) -> usize {
        self.factors.len()
    }

    pub fn order(&self) -> usize {
        self.factors.iter().map(|m| m.rows()).product()
    }

    pub fn radix(&self) -> MixedRadix {
        MixedRadix::new(&self.dims()).expect("validated at construction")
    }

    /// Entry at `(row, col)` of the product, without materializing it.
    pub fn entry(&self, row: usize, col: usize) -> F::Elem {
        let radix = self.radix();
        let f = &self.field;
        let mut acc = f.one();
        for (i, m) in self.factors.iter().enumerate() {
            let v = m.get(radix.digit(row, i), radix.digit(col, i));
            if f.is_zero(v) {
                return f.zero();
            }
            acc = f.mul(&acc, v);
        }
        acc
    }

    pub fn materialize(&self) -> Result<SparseMatrix<F>> {
        self.materialize_capped(DEFAULT_DIM_CAP)
    }

    pub fn materialize_capped(&self, cap: usize) -> Result<SparseMatrix<F>> {
        check_cap(self.order(), cap)?;
        let mut acc = self.factors[0].to_sparse();
        for m in &self.factors[1..] {
            acc = acc.kron(&m.to_sparse());
        }
        Ok(acc)
    }
}

pub fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap {
        Err(Error::SizeCap { size: n, cap })
    } else {
        Ok(())
    }
}

/// Kronecker product of sparse factors with an output-dimension guard.
pub fn kron_all<F: Field>(field: &F, parts: &[SparseMatrix<F>], cap: usize) -> Result<SparseMatrix<F>> {
    let rows: usize = parts.iter().map(|m| m.rows()).product();
    let cols: usize = parts.iter().map(|m| m.cols()).product();
    check_cap(rows.max(cols), cap)?;
    let mut acc = SparseMatrix::identity(field, 1);
    for m in parts {
        acc = acc.kron(m);
    }
    Ok(acc)
}
