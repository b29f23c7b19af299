//! Dense, sparse, monomial and Kronecker-structured matrices.

pub mod dense;
pub mod elim;
pub mod kron;
pub mod monomial;
pub mod sparse;

pub use dense::DenseMatrix;
pub use kron::{check_cap, KroneckerSpec, MixedRadix};
pub use monomial::{MonomialMatrix, Permutation};
pub use sparse::SparseMatrix;

use crate::error::Result;
use crate::field::Field;

/// Largest dimension materialized by default.
pub const DEFAULT_DIM_CAP: usize = 65_536;

/// A matrix in either storage format. Conversions are entry-exact.
#[derive(Clone, Debug, PartialEq)]
pub enum ExactMatrix<F: Field> {
    Dense(DenseMatrix<F>),
    Sparse(SparseMatrix<F>),
}

impl<F: Field> ExactMatrix<F> {
    pub fn rows(&self) -> usize {
        match self {
            ExactMatrix::Dense(m) => m.rows(),
            ExactMatrix::Sparse(m) => m.rows(),
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            ExactMatrix::Dense(m) => m.cols(),
            ExactMatrix::Sparse(m) => m.cols(),
        }
    }

    pub fn field(&self) -> &F {
        match self {
            ExactMatrix::Dense(m) => m.field(),
            ExactMatrix::Sparse(m) => m.field(),
        }
    }

    pub fn to_dense(&self) -> DenseMatrix<F> {
        match self {
            ExactMatrix::Dense(m) => m.clone(),
            ExactMatrix::Sparse(m) => m.to_dense(),
        }
    }

    pub fn to_sparse(&self) -> SparseMatrix<F> {
        match self {
            ExactMatrix::Dense(m) => m.to_sparse(),
            ExactMatrix::Sparse(m) => m.clone(),
        }
    }

    pub fn rank(&self) -> usize {
        match self {
            ExactMatrix::Dense(m) => m.rank(),
            ExactMatrix::Sparse(m) => m.rank(),
        }
    }

    pub fn row_col_nnz(&self) -> (usize, usize) {
        match self {
            ExactMatrix::Dense(m) => m.row_col_nnz(),
            ExactMatrix::Sparse(m) => m.row_col_nnz(),
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        match (self, other) {
            (ExactMatrix::Dense(a), ExactMatrix::Dense(b)) => a.mul(b).map(ExactMatrix::Dense),
            (ExactMatrix::Sparse(a), ExactMatrix::Dense(b)) => a.mul_dense(b).map(ExactMatrix::Dense),
            _ => self.to_sparse().mul(&other.to_sparse()).map(ExactMatrix::Sparse),
        }
    }

    pub fn kron(&self, other: &Self, cap: usize) -> Result<Self> {
        kron::check_cap(self.rows() * other.rows(), cap)?;
        kron::check_cap(self.cols() * other.cols(), cap)?;
        Ok(match (self, other) {
            (ExactMatrix::Dense(a), ExactMatrix::Dense(b)) => ExactMatrix::Dense(a.kron(b)),
            _ => ExactMatrix::Sparse(self.to_sparse().kron(&other.to_sparse())),
        })
    }

    pub fn transpose(&self) -> Self {
        match self {
            ExactMatrix::Dense(m) => ExactMatrix::Dense(m.transpose()),
            ExactMatrix::Sparse(m) => ExactMatrix::Sparse(m.transpose()),
        }
    }
}

impl<F: Field> From<DenseMatrix<F>> for ExactMatrix<F> {
    fn from(m: DenseMatrix<F>) -> Self {
        ExactMatrix::Dense(m)
    }
}

impl<F: Field> From<SparseMatrix<F>> for ExactMatrix<F> {
    fn from(m: SparseMatrix<F>) -> Self {
        ExactMatrix::Sparse(m)
    }
}
