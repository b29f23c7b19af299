use std::fmt;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::matrix::dense::DenseMatrix;

/// Compressed sparse row matrix. Column indices within a row are strictly
/// increasing and no stored value is zero, so equal matrices have identical
/// storage.
#[derive(Clone, PartialEq)]
pub struct SparseMatrix<F: Field> {
    field: F,
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<F::Elem>,
}

impl<F: Field> SparseMatrix<F> {
    pub fn zeros(field: &F, rows: usize, cols: usize) -> Self {
        SparseMatrix {
            field: field.clone(),
            rows,
            cols,
            row_ptr: vec![0; rows + 1],
            col_idx: Vec::new(),
            vals: Vec::new(),
        }
    }

    pub fn identity(field: &F, n: usize) -> Self {
        let trip = (0..n).map(|i| (i, i, field.one())).collect();
        Self::from_sorted_unique(field, n, n, trip)
    }

    /// Builds from arbitrary triplets: sorts, sums duplicates, drops zeros.
    pub fn from_triplets(
        field: &F,
        rows: usize,
        cols: usize,
        mut trip: Vec<(usize, usize, F::Elem)>,
    ) -> Result<Self> {
        for (i, j, _) in &trip {
            if *i >= rows {
                return Err(Error::OutOfRange { index: *i, bound: rows });
            }
            if *j >= cols {
                return Err(Error::OutOfRange { index: *j, bound: cols });
            }
        }
        trip.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut merged: Vec<(usize, usize, F::Elem)> = Vec::with_capacity(trip.len());
        for (i, j, v) in trip {
            match merged.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 = field.add(&last.2, &v),
                _ => merged.push((i, j, v)),
            }
        }
        merged.retain(|t| !field.is_zero(&t.2));
        Ok(Self::from_sorted_unique(field, rows, cols, merged))
    }

    /// Trusted constructor: triplets already sorted, unique, nonzero, in range.
    pub(crate) fn from_sorted_unique(
        field: &F,
        rows: usize,
        cols: usize,
        trip: Vec<(usize, usize, F::Elem)>,
    ) -> Self {
        let mut row_ptr = vec![0usize; rows + 1];
        let mut col_idx = Vec::with_capacity(trip.len());
        let mut vals = Vec::with_capacity(trip.len());
        for (i, j, v) in trip {
            debug_assert!(i < rows && j < cols && !field.is_zero(&v));
            row_ptr[i + 1] += 1;
            col_idx.push(j);
            vals.push(v);
        }
        for i in 0..rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        SparseMatrix {
            field: field.clone(),
            rows,
            cols,
            row_ptr,
            col_idx,
            vals,
        }
    }

    /// Builds row by row; each row's entries must have increasing columns.
    pub(crate) fn from_rows(field: &F, cols: usize, rows: Vec<Vec<(usize, F::Elem)>>) -> Self {
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        let mut vals = Vec::new();
        let n = rows.len();
        for row in rows {
            for (j, v) in row {
                debug_assert!(j < cols);
                if !field.is_zero(&v) {
                    col_idx.push(j);
                    vals.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        SparseMatrix {
            field: field.clone(),
            rows: n,
            cols,
            row_ptr,
            col_idx,
            vals,
        }
    }

    pub fn field(&self) -> &F {
        &self.field
    }
    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Entries of row `i` as `(column, value)` pairs in column order.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, &F::Elem)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(&self.vals[r])
    }

    pub fn row_nnz(&self, i: usize) -> usize {
        self.row_ptr[i + 1] - self.row_ptr[i]
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, &F::Elem)> + '_ {
        (0..self.rows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> F::Elem {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[r.clone()].binary_search(&j) {
            Ok(pos) => self.vals[r.start + pos].clone(),
            Err(_) => self.field.zero(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.vals.is_empty()
    }

    pub fn to_dense(&self) -> DenseMatrix<F> {
        let mut d = DenseMatrix::zeros(&self.field, self.rows, self.cols);
        for (i, j, v) in self.triplets() {
            d.set(i, j, v.clone());
        }
        d
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.cols + 1];
        for &j in &self.col_idx {
            counts[j + 1] += 1;
        }
        for j in 0..self.cols {
            counts[j + 1] += counts[j];
        }
        let row_ptr = counts.clone();
        let mut next = counts;
        let mut col_idx = vec![0usize; self.nnz()];
        let mut vals: Vec<Option<F::Elem>> = vec![None; self.nnz()];
        for (i, j, v) in self.triplets() {
            let pos = next[j];
            next[j] += 1;
            col_idx[pos] = i;
            vals[pos] = Some(v.clone());
        }
        SparseMatrix {
            field: self.field.clone(),
            rows: self.cols,
            cols: self.rows,
            row_ptr,
            col_idx,
            vals: vals.into_iter().map(|v| v.expect("every slot filled")).collect(),
        }
    }

    /// Gustavson row-by-row product.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = &self.field;
        let mut acc: Vec<Option<F::Elem>> = vec![None; other.cols];
        let mut touched: Vec<usize> = Vec::new();
        let mut out_rows = Vec::with_capacity(self.rows);
        for i in 0..self.rows {
            for (k, a) in self.row(i) {
                for (j, b) in other.row(k) {
                    let prod = f.mul(a, b);
                    match &mut acc[j] {
                        Some(v) => *v = f.add(v, &prod),
                        slot @ None => {
                            *slot = Some(prod);
                            touched.push(j);
                        }
                    }
                }
            }
            touched.sort_unstable();
            let row: Vec<(usize, F::Elem)> = touched
                .drain(..)
                .map(|j| (j, acc[j].take().expect("touched slot")))
                .collect();
            out_rows.push(row);
        }
        Ok(Self::from_rows(f, other.cols, out_rows))
    }

    pub fn mul_dense(&self, other: &DenseMatrix<F>) -> Result<DenseMatrix<F>> {
        if self.cols != other.rows() {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows,
                self.cols,
                other.rows(),
                other.cols()
            )));
        }
        let f = &self.field;
        let mut out = DenseMatrix::zeros(f, self.rows, other.cols());
        for i in 0..self.rows {
            for (k, a) in self.row(i) {
                for j in 0..other.cols() {
                    let b = other.get(k, j);
                    if !f.is_zero(b) {
                        let v = f.add(out.get(i, j), &f.mul(a, b));
                        out.set(i, j, v);
                    }
                }
            }
        }
        Ok(out)
    }

    fn merge(&self, other: &Self, negate_other: bool) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = &self.field;
        let mut rows = Vec::with_capacity(self.rows);
        for i in 0..self.rows {
            let mut a = self.row(i).peekable();
            let mut b = other.row(i).peekable();
            let mut row = Vec::new();
            loop {
                let next = match (a.peek(), b.peek()) {
                    (None, None) => break,
                    (Some(&(ja, va)), Some(&(jb, vb))) if ja == jb => {
                        a.next();
                        b.next();
                        let v = if negate_other { f.sub(va, vb) } else { f.add(va, vb) };
                        (ja, v)
                    }
                    (Some(&(ja, va)), Some(&(jb, _))) if ja < jb => {
                        a.next();
                        (ja, va.clone())
                    }
                    (Some(&(ja, va)), None) => {
                        a.next();
                        (ja, va.clone())
                    }
                    (_, Some(&(jb, vb))) => {
                        b.next();
                        (jb, if negate_other { f.neg(vb) } else { vb.clone() })
                    }
                };
                row.push(next);
            }
            rows.push(row);
        }
        Ok(Self::from_rows(f, self.cols, rows))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.merge(other, false)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.merge(other, true)
    }

    pub fn scale(&self, c: &F::Elem) -> Self {
        let f = &self.field;
        let rows = (0..self.rows)
            .map(|i| self.row(i).map(|(j, v)| (j, f.mul(c, v))).collect())
            .collect();
        Self::from_rows(f, self.cols, rows)
    }

    /// Kronecker product under factor-1-most-significant indexing.
    pub fn kron(&self, other: &Self) -> Self {
        let f = &self.field;
        let mut rows = Vec::with_capacity(self.rows * other.rows);
        for i1 in 0..self.rows {
            for i2 in 0..other.rows {
                let mut row = Vec::with_capacity(self.row_nnz(i1) * other.row_nnz(i2));
                for (j1, a) in self.row(i1) {
                    for (j2, b) in other.row(i2) {
                        row.push((j1 * other.cols + j2, f.mul(a, b)));
                    }
                }
                rows.push(row);
            }
        }
        Self::from_rows(f, self.cols * other.cols, rows)
    }

    /// Maximum nonzero count over rows and over columns.
    pub fn row_col_nnz(&self) -> (usize, usize) {
        let max_row = (0..self.rows).map(|i| self.row_nnz(i)).max().unwrap_or(0);
        let mut col_counts = vec![0usize; self.cols];
        for &j in &self.col_idx {
            col_counts[j] += 1;
        }
        (max_row, col_counts.into_iter().max().unwrap_or(0))
    }

    pub fn rank(&self) -> usize {
        self.to_dense().rank()
    }

    /// `B[i, j] = A[row_map[i], col_map[j]]` for bijective maps.
    pub fn permute(&self, row_map: &[usize], col_map: &[usize]) -> Self {
        debug_assert_eq!(row_map.len(), self.rows);
        debug_assert_eq!(col_map.len(), self.cols);
        let mut inv_col = vec![0usize; self.cols];
        for (j, &c) in col_map.iter().enumerate() {
            inv_col[c] = j;
        }
        let rows = row_map
            .iter()
            .map(|&src| {
                let mut row: Vec<(usize, F::Elem)> =
                    self.row(src).map(|(j, v)| (inv_col[j], v.clone())).collect();
                row.sort_by_key(|e| e.0);
                row
            })
            .collect();
        Self::from_rows(&self.field, self.cols, rows)
    }

    /// Keeps the entries for which `keep(i, j)` holds.
    pub fn filter(&self, keep: impl Fn(usize, usize) -> bool) -> Self {
        let rows = (0..self.rows)
            .map(|i| {
                self.row(i)
                    .filter(|(j, _)| keep(i, *j))
                    .map(|(j, v)| (j, v.clone()))
                    .collect()
            })
            .collect();
        Self::from_rows(&self.field, self.cols, rows)
    }

    pub fn hstack(parts: &[&Self]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| Error::DimensionMismatch("empty hstack".into()))?;
        let rows = first.rows;
        if parts.iter().any(|p| p.rows != rows) {
            return Err(Error::DimensionMismatch("hstack row counts differ".into()));
        }
        let mut out = Vec::with_capacity(rows);
        for i in 0..rows {
            let mut row = Vec::new();
            let mut offset = 0;
            for p in parts {
                row.extend(p.row(i).map(|(j, v)| (j + offset, v.clone())));
                offset += p.cols;
            }
            out.push(row);
        }
        let cols = parts.iter().map(|p| p.cols).sum();
        Ok(Self::from_rows(&first.field, cols, out))
    }

    pub fn vstack(parts: &[&Self]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| Error::DimensionMismatch("empty vstack".into()))?;
        let cols = first.cols;
        if parts.iter().any(|p| p.cols != cols) {
            return Err(Error::DimensionMismatch("vstack column counts differ".into()));
        }
        let mut out = Vec::new();
        for p in parts {
            for i in 0..p.rows {
                out.push(p.row(i).map(|(j, v)| (j, v.clone())).collect());
            }
        }
        Ok(Self::from_rows(&first.field, cols, out))
    }
}

impl<F: Field> fmt::Debug for SparseMatrix<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "SparseMatrix {}x{} over {} ({} nnz)",
            self.rows,
            self.cols,
            self.field.spec(),
            self.nnz()
        )?;
        if self.nnz() <= 64 {
            for (i, j, v) in self.triplets() {
                write!(f, " ({i},{j})={}", self.field.format_elem(v))?;
            }
        }
        Ok(())
    }
}
