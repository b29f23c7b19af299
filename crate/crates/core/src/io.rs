//! Text formats for matrices and certificates.
//!
//! Matrix files carry `field:`, `rows:`, `cols:` and `format:` headers
//! followed by row-major entries (`dense`) or `i j value` triplets
//! (`sparse`). Lines starting with `#` are comments.

use std::fmt::Write as _;

use crate::cert::{LowRankPart, LowRankSparseCert};
use crate::error::{Error, Result};
use crate::field::{Field, FieldSpec};
use crate::matrix::{DenseMatrix, SparseMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixFormat {
    Dense,
    Sparse,
}

impl std::str::FromStr for MatrixFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "dense" => Ok(MatrixFormat::Dense),
            "sparse" => Ok(MatrixFormat::Sparse),
            other => Err(Error::InvalidParameter(format!("unknown matrix format {other:?}"))),
        }
    }
}

/// Non-comment, non-blank lines with their 1-based line numbers.
struct Lines<'a> {
    inner: std::iter::Peekable<Box<dyn Iterator<Item = (usize, &'a str)> + 'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let it: Box<dyn Iterator<Item = (usize, &'a str)> + 'a> = Box::new(
            text.lines()
                .enumerate()
                .map(|(i, l)| (i + 1, l.trim()))
                .filter(|(_, l)| !l.is_empty() && !l.starts_with('#')),
        );
        Lines {
            inner: it.peekable(),
            last: 0,
        }
    }

    fn next_line(&mut self) -> Result<(usize, &'a str)> {
        match self.inner.next() {
            Some((n, l)) => {
                self.last = n;
                Ok((n, l))
            }
            None => Err(Error::parse(self.last + 1, "unexpected end of input")),
        }
    }

    fn header(&mut self, key: &str) -> Result<(usize, &'a str)> {
        let (n, l) = self.next_line()?;
        let rest = l
            .strip_prefix(key)
            .and_then(|r| r.strip_prefix(':'))
            .ok_or_else(|| Error::parse(n, format!("expected `{key}:`")))?;
        Ok((n, rest.trim()))
    }

    fn header_usize(&mut self, key: &str) -> Result<usize> {
        let (n, v) = self.header(key)?;
        v.parse().map_err(|_| Error::parse(n, format!("`{key}` must be a non-negative integer")))
    }

    fn finish(&mut self) -> Result<()> {
        match self.inner.next() {
            Some((n, _)) => Err(Error::parse(n, "trailing content")),
            None => Ok(()),
        }
    }
}

fn parse_field(n: usize, v: &str) -> Result<FieldSpec> {
    v.parse().map_err(|e: Error| Error::parse(n, e.to_string()))
}

/// Field named in the first header of a matrix or certificate file.
pub fn peek_field(text: &str) -> Result<FieldSpec> {
    let mut lines = Lines::new(text);
    let (n, v) = lines.header("field")?;
    parse_field(n, v)
}

fn field_check<F: Field>(field: &F, n: usize, spec: FieldSpec) -> Result<()> {
    if spec != field.spec() {
        return Err(Error::parse(n, format!("file is over {spec}, expected {}", field.spec())));
    }
    Ok(())
}

fn parse_triplet<F: Field>(field: &F, n: usize, line: &str, rows: usize, cols: usize) -> Result<(usize, usize, F::Elem)> {
    let mut parts = line.split_whitespace();
    let (Some(i), Some(j), Some(v), None) = (parts.next(), parts.next(), parts.next(), parts.next()) else {
        return Err(Error::parse(n, "expected `i j value`"));
    };
    let i: usize = i.parse().map_err(|_| Error::parse(n, "bad row index"))?;
    let j: usize = j.parse().map_err(|_| Error::parse(n, "bad column index"))?;
    if i >= rows || j >= cols {
        return Err(Error::parse(n, format!("entry ({i}, {j}) outside {rows}x{cols}")));
    }
    let v = field.parse_elem(v).map_err(|e| Error::parse(n, e.to_string()))?;
    Ok((i, j, v))
}

fn parse_triplets<F: Field>(
    field: &F,
    lines: &mut Lines<'_>,
    count: usize,
    rows: usize,
    cols: usize,
) -> Result<SparseMatrix<F>> {
    let mut trip = Vec::with_capacity(count);
    let mut last: Option<(usize, usize)> = None;
    for _ in 0..count {
        let (n, l) = lines.next_line()?;
        let (i, j, v) = parse_triplet(field, n, l, rows, cols)?;
        if last.is_some_and(|p| p >= (i, j)) {
            return Err(Error::parse(n, "triplets must be sorted and distinct"));
        }
        if field.is_zero(&v) {
            return Err(Error::parse(n, "explicit zero in triplet list"));
        }
        last = Some((i, j));
        trip.push((i, j, v));
    }
    SparseMatrix::from_triplets(field, rows, cols, trip)
}

fn write_triplets<F: Field>(s: &mut String, m: &SparseMatrix<F>) {
    let f = m.field();
    for (i, j, v) in m.triplets() {
        let _ = writeln!(s, "{i} {j} {}", f.format_elem(v));
    }
}

pub fn render_matrix<F: Field>(m: &SparseMatrix<F>, format: MatrixFormat) -> String {
    let f = m.field();
    let mut s = String::new();
    let _ = writeln!(s, "field: {}", f.spec());
    let _ = writeln!(s, "rows: {}", m.rows());
    let _ = writeln!(s, "cols: {}", m.cols());
    match format {
        MatrixFormat::Dense => {
            let _ = writeln!(s, "format: dense");
            let d = m.to_dense();
            for i in 0..m.rows() {
                let row: Vec<String> = d.row(i).iter().map(|v| f.format_elem(v)).collect();
                let _ = writeln!(s, "{}", row.join(" "));
            }
        }
        MatrixFormat::Sparse => {
            let _ = writeln!(s, "format: sparse");
            let _ = writeln!(s, "nnz: {}", m.nnz());
            write_triplets(&mut s, m);
        }
    }
    s
}

/// Parses a matrix file over `field`; returns the matrix and its format.
pub fn parse_matrix<F: Field>(text: &str, field: &F) -> Result<(SparseMatrix<F>, MatrixFormat)> {
    let mut lines = Lines::new(text);
    let (n, v) = lines.header("field")?;
    field_check(field, n, parse_field(n, v)?)?;
    let rows = lines.header_usize("rows")?;
    let cols = lines.header_usize("cols")?;
    let (n, v) = lines.header("format")?;
    let format: MatrixFormat = v.parse().map_err(|e: Error| Error::parse(n, e.to_string()))?;
    let m = match format {
        MatrixFormat::Dense => {
            let mut data = Vec::with_capacity(rows * cols);
            for _ in 0..rows {
                let (n, l) = lines.next_line()?;
                let vals: Vec<&str> = l.split_whitespace().collect();
                if vals.len() != cols {
                    return Err(Error::parse(n, format!("expected {cols} entries, found {}", vals.len())));
                }
                for v in vals {
                    data.push(field.parse_elem(v).map_err(|e| Error::parse(n, e.to_string()))?);
                }
            }
            DenseMatrix::from_vec(field, rows, cols, data)?.to_sparse()
        }
        MatrixFormat::Sparse => {
            let nnz = lines.header_usize("nnz")?;
            parse_triplets(field, &mut lines, nnz, rows, cols)?
        }
    };
    lines.finish()?;
    Ok((m, format))
}

pub fn render_cert<F: Field>(c: &LowRankSparseCert<F>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# low-rank plus sparse certificate");
    let _ = writeln!(s, "field: {}", c.field.spec());
    let _ = writeln!(s, "rows: {}", c.rows);
    let _ = writeln!(s, "cols: {}", c.cols);
    let _ = writeln!(s, "target: {}", c.target);
    let _ = writeln!(s, "claimed_rank: {}", c.claimed_rank);
    let _ = writeln!(s, "claimed_sparsity: {}", c.claimed_sparsity);
    let _ = writeln!(s, "lowrank: {}", c.low_rank.kind());
    let list = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    match &c.low_rank {
        LowRankPart::Zero | LowRankPart::Implicit => {}
        LowRankPart::Support { rows, cols, e } => {
            let _ = writeln!(s, "support_rows: {}", list(rows));
            let _ = writeln!(s, "support_cols: {}", list(cols));
            let _ = writeln!(s, "e_nnz: {}", e.nnz());
            write_triplets(&mut s, e);
        }
        LowRankPart::Explicit(e) => {
            let _ = writeln!(s, "e_nnz: {}", e.nnz());
            write_triplets(&mut s, e);
        }
        LowRankPart::Factored { u, v } => {
            let _ = writeln!(s, "inner: {}", u.cols());
            let _ = writeln!(s, "u_nnz: {}", u.nnz());
            write_triplets(&mut s, u);
            let _ = writeln!(s, "v_nnz: {}", v.nnz());
            write_triplets(&mut s, v);
        }
    }
    let _ = writeln!(s, "z_nnz: {}", c.sparse.nnz());
    write_triplets(&mut s, &c.sparse);
    s
}

fn parse_index_list(n: usize, v: &str, bound: usize) -> Result<Vec<usize>> {
    let out: Vec<usize> = v
        .split_whitespace()
        .map(|x| x.parse::<usize>().map_err(|_| Error::parse(n, format!("bad index {x:?}"))))
        .collect::<Result<_>>()?;
    if out.windows(2).any(|w| w[0] >= w[1]) || out.last().is_some_and(|&x| x >= bound) {
        return Err(Error::parse(n, "indices must be increasing and in range"));
    }
    Ok(out)
}

pub fn parse_cert<F: Field>(text: &str, field: &F) -> Result<LowRankSparseCert<F>> {
    let mut lines = Lines::new(text);
    let (n, v) = lines.header("field")?;
    field_check(field, n, parse_field(n, v)?)?;
    let rows = lines.header_usize("rows")?;
    let cols = lines.header_usize("cols")?;
    let (_, target) = lines.header("target")?;
    let target = target.to_string();
    let claimed_rank = lines.header_usize("claimed_rank")?;
    let claimed_sparsity = lines.header_usize("claimed_sparsity")?;
    let (n, kind) = lines.header("lowrank")?;
    let low_rank = match kind {
        "zero" => LowRankPart::Zero,
        "implicit" => LowRankPart::Implicit,
        "support" => {
            let (n1, r) = lines.header("support_rows")?;
            let srows = parse_index_list(n1, r, rows)?;
            let (n2, c) = lines.header("support_cols")?;
            let scols = parse_index_list(n2, c, cols)?;
            let k = lines.header_usize("e_nnz")?;
            let e = parse_triplets(field, &mut lines, k, rows, cols)?;
            LowRankPart::Support {
                rows: srows,
                cols: scols,
                e,
            }
        }
        "explicit" => {
            let k = lines.header_usize("e_nnz")?;
            LowRankPart::Explicit(parse_triplets(field, &mut lines, k, rows, cols)?)
        }
        "factored" => {
            let inner = lines.header_usize("inner")?;
            let k = lines.header_usize("u_nnz")?;
            let u = parse_triplets(field, &mut lines, k, rows, inner)?;
            let k = lines.header_usize("v_nnz")?;
            let v = parse_triplets(field, &mut lines, k, inner, cols)?;
            LowRankPart::Factored { u, v }
        }
        other => return Err(Error::parse(n, format!("unknown low-rank kind {other:?}"))),
    };
    let k = lines.header_usize("z_nnz")?;
    let sparse = parse_triplets(field, &mut lines, k, rows, cols)?;
    lines.finish()?;
    Ok(LowRankSparseCert {
        field: field.clone(),
        rows,
        cols,
        target,
        low_rank,
        sparse,
        claimed_rank,
        claimed_sparsity,
    })
}
