//! Low-rank plus sparse certificates `T = E + Z`, the rules that combine
//! them, and the verifier.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::field::{Field, FieldSpec};
use crate::matrix::{DenseMatrix, KroneckerSpec, MonomialMatrix, SparseMatrix};

/// The low-rank part `E` of a certificate.
#[derive(Clone, Debug, PartialEq)]
pub enum LowRankPart<F: Field> {
    Zero,
    /// `E` vanishes outside the listed rows and columns, so its rank is at
    /// most `rows.len() + cols.len()`. Index lists are sorted.
    Support {
        rows: Vec<usize>,
        cols: Vec<usize>,
        e: SparseMatrix<F>,
    },
    /// `E = U V`; its rank is at most the inner dimension.
    Factored { u: SparseMatrix<F>, v: SparseMatrix<F> },
    Explicit(SparseMatrix<F>),
    /// `E = T - Z` by definition; only checkable by computing a rank.
    Implicit,
}

impl<F: Field> LowRankPart<F> {
    pub fn kind(&self) -> &'static str {
        match self {
            LowRankPart::Zero => "zero",
            LowRankPart::Support { .. } => "support",
            LowRankPart::Factored { .. } => "factored",
            LowRankPart::Explicit(_) => "explicit",
            LowRankPart::Implicit => "implicit",
        }
    }

    /// Rank bound readable off the representation without elimination.
    pub fn structural_rank(&self) -> Option<usize> {
        match self {
            LowRankPart::Zero => Some(0),
            LowRankPart::Support { rows, cols, .. } => Some(rows.len() + cols.len()),
            LowRankPart::Factored { u, .. } => Some(u.cols()),
            LowRankPart::Explicit(_) | LowRankPart::Implicit => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LowRankSparseCert<F: Field> {
    pub field: F,
    pub rows: usize,
    pub cols: usize,
    pub target: String,
    pub low_rank: LowRankPart<F>,
    pub sparse: SparseMatrix<F>,
    pub claimed_rank: usize,
    pub claimed_sparsity: usize,
}

impl<F: Field> LowRankSparseCert<F> {
    pub fn spec(&self) -> FieldSpec {
        self.field.spec()
    }

    /// `E` as a sparse matrix, or `None` when it is implicit.
    pub fn low_rank_matrix(&self) -> Option<SparseMatrix<F>> {
        match &self.low_rank {
            LowRankPart::Zero => Some(SparseMatrix::zeros(&self.field, self.rows, self.cols)),
            LowRankPart::Support { e, .. } | LowRankPart::Explicit(e) => Some(e.clone()),
            LowRankPart::Factored { u, v } => Some(u.mul(v).expect("inner dimensions agree")),
            LowRankPart::Implicit => None,
        }
    }

    /// `E = U V` with `U` of width equal to the structural rank, when `E`
    /// is stored in a form that has one.
    pub fn low_rank_factors(&self) -> Option<(SparseMatrix<F>, SparseMatrix<F>)> {
        let f = &self.field;
        match &self.low_rank {
            LowRankPart::Zero => Some((
                SparseMatrix::zeros(f, self.rows, 0),
                SparseMatrix::zeros(f, 0, self.cols),
            )),
            LowRankPart::Factored { u, v } => Some((u.clone(), v.clone())),
            LowRankPart::Support { rows, cols, e } => Some(support_factors(e, rows, cols)),
            LowRankPart::Explicit(e) => Some((SparseMatrix::identity(f, self.rows), e.clone())),
            LowRankPart::Implicit => None,
        }
    }

    /// `E + Z`, the matrix this certificate describes.
    pub fn reconstruct(&self) -> Option<SparseMatrix<F>> {
        self.low_rank_matrix()
            .map(|e| e.add(&self.sparse).expect("shapes agree"))
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Replaces `E` by `Implicit`, dropping stored factors.
    pub fn into_implicit(mut self) -> Self {
        self.low_rank = LowRankPart::Implicit;
        self
    }

    pub fn with_target(mut self, target: impl Into<String>) -> Self {
        self.target = target.into();
        self
    }
}

/// `U = [I_R | E restricted to columns C off the rows R]`,
/// `V = [E restricted to rows R ; I_C]`.
fn support_factors<F: Field>(e: &SparseMatrix<F>, rows: &[usize], cols: &[usize]) -> (SparseMatrix<F>, SparseMatrix<F>) {
    let f = e.field();
    let n = e.rows();
    let m = e.cols();
    let mut row_pos = vec![usize::MAX; n];
    for (k, &r) in rows.iter().enumerate() {
        row_pos[r] = k;
    }
    let mut col_pos = vec![usize::MAX; m];
    for (k, &c) in cols.iter().enumerate() {
        col_pos[c] = k;
    }
    let nr = rows.len();
    let mut ut = Vec::new();
    for i in 0..n {
        if row_pos[i] != usize::MAX {
            ut.push((i, row_pos[i], f.one()));
        } else {
            for (j, v) in e.row(i) {
                if col_pos[j] != usize::MAX {
                    ut.push((i, nr + col_pos[j], v.clone()));
                }
            }
        }
    }
    let mut vt = Vec::new();
    for (k, &r) in rows.iter().enumerate() {
        for (j, v) in e.row(r) {
            vt.push((k, j, v.clone()));
        }
    }
    for (k, &c) in cols.iter().enumerate() {
        vt.push((nr + k, c, f.one()));
    }
    let inner = nr + cols.len();
    (
        SparseMatrix::from_triplets(f, n, inner, ut).expect("in range"),
        SparseMatrix::from_triplets(f, inner, m, vt).expect("in range"),
    )
}

pub fn zero_cert<F: Field>(field: &F, rows: usize, cols: usize, target: impl Into<String>) -> LowRankSparseCert<F> {
    LowRankSparseCert {
        field: field.clone(),
        rows,
        cols,
        target: target.into(),
        low_rank: LowRankPart::Zero,
        sparse: SparseMatrix::zeros(field, rows, cols),
        claimed_rank: 0,
        claimed_sparsity: 0,
    }
}

/// A monomial matrix is its own sparse part: claims `(0, 1)`.
pub fn monomial_cert<F: Field>(field: &F, m: &MonomialMatrix<F>, target: impl Into<String>) -> LowRankSparseCert<F> {
    let n = m.dim();
    LowRankSparseCert {
        field: field.clone(),
        rows: n,
        cols: n,
        target: target.into(),
        low_rank: LowRankPart::Zero,
        sparse: m.to_sparse(field),
        claimed_rank: 0,
        claimed_sparsity: 1,
    }
}

/// `Z = T`, claims `(0, max(rows, cols))`.
pub fn trivial_cert<F: Field>(t: &SparseMatrix<F>, target: impl Into<String>) -> LowRankSparseCert<F> {
    LowRankSparseCert {
        field: t.field().clone(),
        rows: t.rows(),
        cols: t.cols(),
        target: target.into(),
        low_rank: LowRankPart::Zero,
        sparse: t.clone(),
        claimed_rank: 0,
        claimed_sparsity: t.rows().max(t.cols()),
    }
}

/// `E = T`, `Z = 0`, claims `(min(rows, cols), 0)`.
pub fn full_rank_cert<F: Field>(t: &SparseMatrix<F>, target: impl Into<String>) -> LowRankSparseCert<F> {
    let f = t.field();
    let (u, v) = if t.rows() <= t.cols() {
        (SparseMatrix::identity(f, t.rows()), t.clone())
    } else {
        (t.clone(), SparseMatrix::identity(f, t.cols()))
    };
    LowRankSparseCert {
        field: f.clone(),
        rows: t.rows(),
        cols: t.cols(),
        target: target.into(),
        low_rank: LowRankPart::Factored { u, v },
        sparse: SparseMatrix::zeros(f, t.rows(), t.cols()),
        claimed_rank: t.rows().min(t.cols()),
        claimed_sparsity: 0,
    }
}

pub fn transpose_cert<F: Field>(c: &LowRankSparseCert<F>) -> LowRankSparseCert<F> {
    let low_rank = match &c.low_rank {
        LowRankPart::Zero => LowRankPart::Zero,
        LowRankPart::Support { rows, cols, e } => LowRankPart::Support {
            rows: cols.clone(),
            cols: rows.clone(),
            e: e.transpose(),
        },
        LowRankPart::Factored { u, v } => LowRankPart::Factored {
            u: v.transpose(),
            v: u.transpose(),
        },
        LowRankPart::Explicit(e) => LowRankPart::Explicit(e.transpose()),
        LowRankPart::Implicit => LowRankPart::Implicit,
    };
    LowRankSparseCert {
        field: c.field.clone(),
        rows: c.cols,
        cols: c.rows,
        target: transposed_name(&c.target),
        low_rank,
        sparse: c.sparse.transpose(),
        claimed_rank: c.claimed_rank,
        claimed_sparsity: c.claimed_sparsity,
    }
}

fn transposed_name(name: &str) -> String {
    match name.strip_suffix("^T") {
        Some(inner) if inner.starts_with('(') && inner.ends_with(')') => inner[1..inner.len() - 1].to_string(),
        _ => format!("({name})^T"),
    }
}

/// Stored factors above this many entries are dropped in favour of an
/// implicit low-rank part.
pub const FACTOR_BUDGET: usize = 1 << 24;

/// Keeps `U V` only while it is a useful certificate: the rank claim is
/// below the trivial bound and the factors fit the budget.
pub(crate) fn factored_or_implicit<F: Field>(u: SparseMatrix<F>, v: SparseMatrix<F>, claimed_rank: usize) -> LowRankPart<F> {
    if claimed_rank >= u.rows().min(v.cols()) || u.nnz() + v.nnz() > FACTOR_BUDGET {
        LowRankPart::Implicit
    } else {
        LowRankPart::Factored { u, v }
    }
}

/// Certificate for `A B` from certificates for `A` and `B`:
/// `A B = (E_a B + S_a E_b) + S_a S_b`, claims `(r_a + r_b, t_a t_b)`.
pub fn compose_product<F: Field>(a: &LowRankSparseCert<F>, b: &LowRankSparseCert<F>) -> Result<LowRankSparseCert<F>> {
    if a.cols != b.rows {
        return Err(Error::DimensionMismatch(format!(
            "cannot compose {}x{} with {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let z = a.sparse.mul(&b.sparse)?;
    let claimed_rank = a.claimed_rank.saturating_add(b.claimed_rank);
    let low_rank = match (&a.low_rank, &b.low_rank) {
        (LowRankPart::Zero, LowRankPart::Zero) => LowRankPart::Zero,
        _ if claimed_rank >= a.rows.min(b.cols) => LowRankPart::Implicit,
        _ => match (a.low_rank_factors(), b.low_rank_factors(), b.reconstruct()) {
            (Some((ua, va)), Some((ub, vb)), Some(bm)) => {
                let u = SparseMatrix::hstack(&[&ua, &a.sparse.mul(&ub)?])?;
                let v = SparseMatrix::vstack(&[&va.mul(&bm)?, &vb])?;
                factored_or_implicit(u, v, claimed_rank)
            }
            _ => LowRankPart::Implicit,
        },
    };
    Ok(LowRankSparseCert {
        field: a.field.clone(),
        rows: a.rows,
        cols: b.cols,
        target: format!("{} * {}", a.target, b.target),
        low_rank,
        sparse: z,
        claimed_rank,
        claimed_sparsity: a.claimed_sparsity.saturating_mul(b.claimed_sparsity),
    })
}

/// Certificate for `A (x) B` (`A` is `n x n`, `B` is `m x m`):
/// `A (x) B = (E_a (x) B + S_a (x) E_b) + S_a (x) S_b`, claims
/// `(r_a m + r_b n, t_a t_b)`.
pub fn compose_kron<F: Field>(
    a: &LowRankSparseCert<F>,
    b: &LowRankSparseCert<F>,
    cap: usize,
) -> Result<LowRankSparseCert<F>> {
    if !a.is_square() || !b.is_square() {
        return Err(Error::DimensionMismatch("Kronecker composition needs square factors".into()));
    }
    let (n, m) = (a.rows, b.rows);
    let size = n.checked_mul(m).ok_or(Error::SizeCap { size: usize::MAX, cap })?;
    crate::matrix::kron::check_cap(size, cap)?;
    let f = &a.field;
    let z = a.sparse.kron(&b.sparse);
    let claimed_rank = a
        .claimed_rank
        .saturating_mul(m)
        .saturating_add(b.claimed_rank.saturating_mul(n));
    let low_rank = match (&a.low_rank, &b.low_rank) {
        (LowRankPart::Zero, LowRankPart::Zero) => LowRankPart::Zero,
        _ if claimed_rank >= size => LowRankPart::Implicit,
        _ => match (a.low_rank_factors(), b.low_rank_factors(), b.reconstruct()) {
            (Some((ua, va)), Some((ub, vb)), Some(bm)) => {
                let u = SparseMatrix::hstack(&[&ua.kron(&SparseMatrix::identity(f, m)), &a.sparse.kron(&ub)])?;
                let v = SparseMatrix::vstack(&[&va.kron(&bm), &SparseMatrix::identity(f, n).kron(&vb)])?;
                factored_or_implicit(u, v, claimed_rank)
            }
            _ => LowRankPart::Implicit,
        },
    };
    Ok(LowRankSparseCert {
        field: f.clone(),
        rows: size,
        cols: size,
        target: format!("({}) (x) ({})", a.target, b.target),
        low_rank,
        sparse: z,
        claimed_rank,
        claimed_sparsity: a.claimed_sparsity.saturating_mul(b.claimed_sparsity),
    })
}

/// Certificate for `B[i, j] = T[row_map[i], col_map[j]]`; claims unchanged.
pub fn permute_cert<F: Field>(c: &LowRankSparseCert<F>, row_map: &[usize], col_map: &[usize]) -> Result<LowRankSparseCert<F>> {
    crate::matrix::Permutation::new(row_map.to_vec())?;
    crate::matrix::Permutation::new(col_map.to_vec())?;
    if row_map.len() != c.rows || col_map.len() != c.cols {
        return Err(Error::DimensionMismatch("permutation size differs from certificate".into()));
    }
    let ident = |k: usize| -> Vec<usize> { (0..k).collect() };
    let inverse = |map: &[usize]| {
        let mut inv = vec![0; map.len()];
        for (i, &v) in map.iter().enumerate() {
            inv[v] = i;
        }
        inv
    };
    let low_rank = match &c.low_rank {
        LowRankPart::Zero => LowRankPart::Zero,
        LowRankPart::Support { rows, cols, e } => {
            let (ri, ci) = (inverse(row_map), inverse(col_map));
            let mut rows: Vec<usize> = rows.iter().map(|&r| ri[r]).collect();
            let mut cols: Vec<usize> = cols.iter().map(|&x| ci[x]).collect();
            rows.sort_unstable();
            cols.sort_unstable();
            LowRankPart::Support {
                rows,
                cols,
                e: e.permute(row_map, col_map),
            }
        }
        LowRankPart::Factored { u, v } => LowRankPart::Factored {
            u: u.permute(row_map, &ident(u.cols())),
            v: v.permute(&ident(v.rows()), col_map),
        },
        LowRankPart::Explicit(e) => LowRankPart::Explicit(e.permute(row_map, col_map)),
        LowRankPart::Implicit => LowRankPart::Implicit,
    };
    Ok(LowRankSparseCert {
        field: c.field.clone(),
        rows: c.rows,
        cols: c.cols,
        target: format!("permuted {}", c.target),
        low_rank,
        sparse: c.sparse.permute(row_map, col_map),
        claimed_rank: c.claimed_rank,
        claimed_sparsity: c.claimed_sparsity,
    })
}

/// Anything that can produce the rows of a target matrix on demand.
pub trait RowSource<F: Field> {
    fn n_rows(&self) -> usize;
    fn n_cols(&self) -> usize;
    /// Nonzero entries of row `i`, sorted by column.
    fn sparse_row(&self, i: usize) -> Vec<(usize, F::Elem)>;
}

impl<F: Field> RowSource<F> for SparseMatrix<F> {
    fn n_rows(&self) -> usize {
        self.rows()
    }
    fn n_cols(&self) -> usize {
        self.cols()
    }
    fn sparse_row(&self, i: usize) -> Vec<(usize, F::Elem)> {
        self.row(i).map(|(j, v)| (j, v.clone())).collect()
    }
}

impl<F: Field> RowSource<F> for DenseMatrix<F> {
    fn n_rows(&self) -> usize {
        self.rows()
    }
    fn n_cols(&self) -> usize {
        self.cols()
    }
    fn sparse_row(&self, i: usize) -> Vec<(usize, F::Elem)> {
        let f = self.field();
        self.row(i)
            .iter()
            .enumerate()
            .filter(|(_, v)| !f.is_zero(v))
            .map(|(j, v)| (j, v.clone()))
            .collect()
    }
}

impl<F: Field> RowSource<F> for KroneckerSpec<F> {
    fn n_rows(&self) -> usize {
        self.order()
    }
    fn n_cols(&self) -> usize {
        self.order()
    }
    fn sparse_row(&self, i: usize) -> Vec<(usize, F::Elem)> {
        let f = self.field();
        let radix = self.radix();
        let mut acc: Vec<(usize, F::Elem)> = vec![(0, f.one())];
        for (t, m) in self.factors().iter().enumerate() {
            let row = m.sparse_row(radix.digit(i, t));
            let d = m.cols();
            let mut next = Vec::with_capacity(acc.len() * row.len());
            for (j, a) in &acc {
                for (jj, b) in &row {
                    next.push((j * d + jj, f.mul(a, b)));
                }
            }
            acc = next;
        }
        acc
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyOptions {
    /// Exact rank of `T - Z` is computed when `max(rows, cols)` is at most
    /// this.
    pub exact_rank_cap: usize,
}

impl VerifyOptions {
    pub fn for_field(spec: FieldSpec) -> Self {
        VerifyOptions {
            exact_rank_cap: match spec {
                FieldSpec::Prime(_) => 1024,
                FieldSpec::Rational => 96,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerificationReport {
    pub dimensions_match: bool,
    pub reconstruction_exact: bool,
    pub first_mismatch: Option<(usize, usize)>,
    /// `E` vanishes outside its declared support (vacuous for other forms).
    pub support_respected: bool,
    pub structural_rank: Option<usize>,
    /// `min(rank(T - Z), claimed_rank + 1)`, when computed.
    pub exact_rank: Option<usize>,
    pub max_row_nnz: usize,
    pub max_col_nnz: usize,
    pub claimed_rank: usize,
    pub claimed_sparsity: usize,
    pub rank_ok: bool,
    pub sparsity_ok: bool,
}

impl VerificationReport {
    pub fn verified(&self) -> bool {
        self.dimensions_match && self.reconstruction_exact && self.support_respected && self.rank_ok && self.sparsity_ok
    }

    /// Best known upper bound on `rank(E)`.
    pub fn rank_bound(&self) -> Option<usize> {
        match (self.exact_rank, self.structural_rank) {
            (Some(e), _) if e <= self.claimed_rank => Some(e),
            (_, Some(s)) if self.support_respected => Some(s),
            (Some(e), _) => Some(e),
            _ => None,
        }
    }

    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        let opt = |v: Option<usize>| v.map_or("unknown".to_string(), |x| x.to_string());
        let _ = writeln!(s, "verified: {}", self.verified());
        let _ = writeln!(s, "dimensions_match: {}", self.dimensions_match);
        let _ = writeln!(s, "reconstruction_exact: {}", self.reconstruction_exact);
        if let Some((i, j)) = self.first_mismatch {
            let _ = writeln!(s, "first_mismatch: {i} {j}");
        }
        let _ = writeln!(s, "support_respected: {}", self.support_respected);
        let _ = writeln!(s, "claimed_rank: {}", self.claimed_rank);
        let _ = writeln!(s, "structural_rank: {}", opt(self.structural_rank));
        let exact = match self.exact_rank {
            Some(r) if r > self.claimed_rank => format!("> {}", self.claimed_rank),
            other => opt(other),
        };
        let _ = writeln!(s, "exact_rank: {exact}");
        let _ = writeln!(s, "rank_ok: {}", self.rank_ok);
        let _ = writeln!(s, "claimed_sparsity: {}", self.claimed_sparsity);
        let _ = writeln!(s, "max_row_nnz: {}", self.max_row_nnz);
        let _ = writeln!(s, "max_col_nnz: {}", self.max_col_nnz);
        let _ = writeln!(s, "sparsity_ok: {}", self.sparsity_ok);
        s
    }
}

/// Adds two sorted sparse rows.
fn add_rows<F: Field>(f: &F, a: &[(usize, F::Elem)], b: &[(usize, F::Elem)]) -> Vec<(usize, F::Elem)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
            out.push(a[i].clone());
            i += 1;
        } else if i == a.len() || b[j].0 < a[i].0 {
            out.push(b[j].clone());
            j += 1;
        } else {
            let v = f.add(&a[i].1, &b[j].1);
            if !f.is_zero(&v) {
                out.push((a[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// Row `i` of `U V`.
fn product_row<F: Field>(f: &F, u: &SparseMatrix<F>, v: &SparseMatrix<F>, i: usize, acc: &mut [Option<F::Elem>]) -> Vec<(usize, F::Elem)> {
    let mut touched = Vec::new();
    for (k, a) in u.row(i) {
        for (j, b) in v.row(k) {
            let p = f.mul(a, b);
            match &mut acc[j] {
                Some(x) => *x = f.add(x, &p),
                slot @ None => {
                    *slot = Some(p);
                    touched.push(j);
                }
            }
        }
    }
    touched.sort_unstable();
    touched
        .into_iter()
        .filter_map(|j| {
            let v = acc[j].take().expect("touched");
            (!f.is_zero(&v)).then_some((j, v))
        })
        .collect()
}

/// Checks `E + Z = T`, the rank claim and the sparsity claim.
pub fn verify_cert<F: Field, T: RowSource<F>>(
    cert: &LowRankSparseCert<F>,
    target: &T,
    opts: &VerifyOptions,
) -> VerificationReport {
    let f = &cert.field;
    let (max_row_nnz, max_col_nnz) = cert.sparse.row_col_nnz();
    let mut report = VerificationReport {
        dimensions_match: target.n_rows() == cert.rows
            && target.n_cols() == cert.cols
            && cert.sparse.rows() == cert.rows
            && cert.sparse.cols() == cert.cols,
        reconstruction_exact: false,
        first_mismatch: None,
        support_respected: true,
        structural_rank: cert.low_rank.structural_rank(),
        exact_rank: None,
        max_row_nnz,
        max_col_nnz,
        claimed_rank: cert.claimed_rank,
        claimed_sparsity: cert.claimed_sparsity,
        rank_ok: false,
        sparsity_ok: max_row_nnz <= cert.claimed_sparsity && max_col_nnz <= cert.claimed_sparsity,
    };
    if !report.dimensions_match {
        return report;
    }
    let shapes_ok = match &cert.low_rank {
        LowRankPart::Support { e, rows, cols } => {
            e.rows() == cert.rows
                && e.cols() == cert.cols
                && rows.iter().all(|&r| r < cert.rows)
                && cols.iter().all(|&c| c < cert.cols)
        }
        LowRankPart::Explicit(e) => e.rows() == cert.rows && e.cols() == cert.cols,
        LowRankPart::Factored { u, v } => u.rows() == cert.rows && v.cols() == cert.cols && u.cols() == v.rows(),
        _ => true,
    };
    if !shapes_ok {
        report.dimensions_match = false;
        return report;
    }
    let mut in_rows = vec![false; cert.rows];
    let mut in_cols = vec![false; cert.cols];
    if let LowRankPart::Support { rows, cols, .. } = &cert.low_rank {
        for &r in rows {
            in_rows[r] = true;
        }
        for &c in cols {
            in_cols[c] = true;
        }
    }
    let mut acc: Vec<Option<F::Elem>> = vec![None; cert.cols];
    let mut mismatch = None;
    if !matches!(cert.low_rank, LowRankPart::Implicit) {
        for i in 0..cert.rows {
            let e_row: Vec<(usize, F::Elem)> = match &cert.low_rank {
                LowRankPart::Zero | LowRankPart::Implicit => Vec::new(),
                LowRankPart::Support { e, .. } => {
                    let row: Vec<_> = e.row(i).map(|(j, v)| (j, v.clone())).collect();
                    if !in_rows[i] && row.iter().any(|(j, _)| !in_cols[*j]) {
                        report.support_respected = false;
                    }
                    row
                }
                LowRankPart::Explicit(e) => e.row(i).map(|(j, v)| (j, v.clone())).collect(),
                LowRankPart::Factored { u, v } => product_row(f, u, v, i, &mut acc),
            };
            let z_row: Vec<_> = cert.sparse.row(i).map(|(j, v)| (j, v.clone())).collect();
            let got = add_rows(f, &e_row, &z_row);
            let want = target.sparse_row(i);
            if got != want {
                let col = first_difference(&got, &want);
                mismatch = Some((i, col));
                break;
            }
        }
    }
    report.first_mismatch = mismatch;
    report.reconstruction_exact = mismatch.is_none();
    let trivially_ok = cert.claimed_rank >= cert.rows.min(cert.cols);
    let structural_ok = trivially_ok
        || match report.structural_rank {
            Some(s) => report.support_respected && s <= cert.claimed_rank,
            None => false,
        };
    if !trivially_ok && cert.rows.max(cert.cols) <= opts.exact_rank_cap {
        let mut d = DenseMatrix::zeros(f, cert.rows, cert.cols);
        for i in 0..cert.rows {
            for (j, v) in target.sparse_row(i) {
                d.set(i, j, v);
            }
        }
        for (i, j, v) in cert.sparse.triplets() {
            let x = f.sub(d.get(i, j), v);
            d.set(i, j, x);
        }
        let r = d.rank_capped(cert.claimed_rank.saturating_add(1));
        report.exact_rank = Some(r);
        report.rank_ok = r <= cert.claimed_rank;
    } else {
        report.rank_ok = structural_ok;
    }
    report
}

fn first_difference<E: PartialEq>(a: &[(usize, E)], b: &[(usize, E)]) -> usize {
    let mut i = 0;
    while i < a.len() && i < b.len() && a[i] == b[i] {
        i += 1;
    }
    match (a.get(i), b.get(i)) {
        (Some(x), Some(y)) => x.0.min(y.0),
        (Some(x), None) => x.0,
        (None, Some(y)) => y.0,
        (None, None) => 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PrimeField;
    use crate::matrix::Permutation;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn f5() -> PrimeField {
        PrimeField::new(5).unwrap()
    }

    /// A certificate for a random matrix: `E` is the first `r` rows, `Z` the
    /// rest.
    fn row_split_cert(t: &SparseMatrix<PrimeField>, r: usize) -> LowRankSparseCert<PrimeField> {
        let rows: Vec<usize> = (0..r).collect();
        let e = t.filter(|i, _| i < r);
        let z = t.filter(|i, _| i >= r);
        let (zr, zc) = z.row_col_nnz();
        LowRankSparseCert {
            field: t.field().clone(),
            rows: t.rows(),
            cols: t.cols(),
            target: "T".into(),
            low_rank: LowRankPart::Support { rows, cols: vec![], e },
            sparse: z,
            claimed_rank: r,
            claimed_sparsity: zr.max(zc),
        }
    }

    fn rand_sparse(n: usize, rng: &mut ChaCha8Rng) -> SparseMatrix<PrimeField> {
        DenseMatrix::random(&f5(), n, n, rng).to_sparse()
    }

    #[test]
    fn valid_and_corrupted() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let t = rand_sparse(6, &mut rng);
        let c = row_split_cert(&t, 2);
        let opts = VerifyOptions::for_field(c.spec());
        let rep = verify_cert(&c, &t, &opts);
        assert!(rep.verified(), "{}", rep.to_kv());
        let mut bad = c.clone();
        let (i, j, v) = bad.sparse.triplets().map(|(i, j, v)| (i, j, *v)).next().unwrap();
        let mut trip: Vec<_> = bad.sparse.triplets().map(|(a, b, w)| (a, b, *w)).collect();
        trip[0] = (i, j, (v + 1) % 5);
        bad.sparse = SparseMatrix::from_triplets(&f5(), 6, 6, trip).unwrap();
        let rep = verify_cert(&bad, &t, &opts);
        assert!(!rep.reconstruction_exact);
        assert_eq!(rep.first_mismatch, Some((i, j)));
    }

    #[test]
    fn under_claimed_rank_is_caught() {
        let f = f5();
        let t = DenseMatrix::from_i64_rows(&f, &[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]).to_sparse();
        let mut c = full_rank_cert(&t, "I3");
        assert!(verify_cert(&c, &t, &VerifyOptions::for_field(c.spec())).verified());
        c.claimed_rank = 2;
        let rep = verify_cert(&c, &t, &VerifyOptions::for_field(c.spec()));
        assert!(!rep.rank_ok && rep.reconstruction_exact);
        assert_eq!(rep.exact_rank, Some(3));
    }

    #[test]
    fn support_violation_is_caught() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let t = rand_sparse(4, &mut rng);
        let mut c = row_split_cert(&t, 1);
        if let LowRankPart::Support { e, .. } = &mut c.low_rank {
            *e = t.clone();
        }
        c.sparse = SparseMatrix::zeros(&f5(), 4, 4);
        let rep = verify_cert(&c, &t, &VerifyOptions { exact_rank_cap: 0 });
        assert!(rep.reconstruction_exact);
        assert!(!rep.support_respected);
        assert!(!rep.verified());
    }

    #[test]
    fn transpose_swaps_counts() {
        let f = f5();
        let z = SparseMatrix::from_triplets(&f, 3, 3, vec![(0, 0, 1), (0, 1, 1), (1, 0, 1), (2, 0, 1)]).unwrap();
        let c = trivial_cert(&z, "Z");
        assert_eq!(c.sparse.row_col_nnz(), (2, 3));
        let t = transpose_cert(&c);
        assert_eq!(t.sparse.row_col_nnz(), (3, 2));
        assert_eq!(transpose_cert(&t), c);
        let sym = SparseMatrix::identity(&f, 3);
        let s = monomial_cert(&f, &MonomialMatrix::identity(&f, 3), "I");
        let st = transpose_cert(&s);
        assert_eq!((st.claimed_rank, st.claimed_sparsity), (0, 1));
        assert_eq!(st.sparse, sym);
    }

    #[test]
    fn product_and_kron_claims() {
        let f = f5();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let p = MonomialMatrix::new(Permutation::random(4, &mut rng), vec![1, 2, 3, 4]).unwrap();
        let q = MonomialMatrix::new(Permutation::random(4, &mut rng), vec![4, 4, 1, 1]).unwrap();
        let c = compose_product(&monomial_cert(&f, &p, "P"), &monomial_cert(&f, &q, "Q")).unwrap();
        assert_eq!((c.claimed_rank, c.claimed_sparsity), (0, 1));
        assert!(matches!(c.low_rank, LowRankPart::Zero));
        let k = compose_kron(&monomial_cert(&f, &p, "P"), &monomial_cert(&f, &q, "Q"), 1 << 16).unwrap();
        assert_eq!((k.claimed_rank, k.claimed_sparsity), (0, 1));
        assert!(MonomialMatrix::from_sparse(&k.sparse).is_some());

        let t = rand_sparse(8, &mut rng);
        let a = row_split_cert(&t, 3);
        let id = monomial_cert(&f, &MonomialMatrix::identity(&f, 8), "I");
        let c = compose_product(&a, &id).unwrap();
        assert_eq!((c.claimed_rank, c.claimed_sparsity), (3, a.claimed_sparsity));

        let a2 = LowRankSparseCert { claimed_sparsity: 1, claimed_rank: 1, ..trivial_cert(&SparseMatrix::identity(&f, 2), "A") };
        let b2 = LowRankSparseCert { claimed_sparsity: 2, claimed_rank: 0, ..trivial_cert(&SparseMatrix::identity(&f, 2), "B") };
        let k = compose_kron(&a2, &b2, 64).unwrap();
        assert_eq!((k.claimed_rank, k.claimed_sparsity), (2, 2));
        assert!(compose_kron(&a2, &b2, 3).is_err());
    }

    #[test]
    fn random_compositions_reconstruct() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..10 {
            let ta = rand_sparse(8, &mut rng);
            let tb = rand_sparse(8, &mut rng);
            let a = row_split_cert(&ta, 3);
            let b = transpose_cert(&row_split_cert(&tb.transpose(), 2));
            let c = compose_product(&a, &b).unwrap();
            let target = ta.mul(&tb).unwrap();
            let rep = verify_cert(&c, &target, &VerifyOptions::for_field(c.spec()));
            assert!(rep.verified(), "{}", rep.to_kv());
            assert_eq!(c.claimed_rank, 5);
            assert_eq!(c.claimed_sparsity, a.claimed_sparsity * b.claimed_sparsity);

            let sa = rand_sparse(4, &mut rng);
            let sb = rand_sparse(4, &mut rng);
            let k = compose_kron(&row_split_cert(&sa, 1), &row_split_cert(&sb, 2), 1 << 16).unwrap();
            let rep = verify_cert(&k, &sa.kron(&sb), &VerifyOptions::for_field(k.spec()));
            assert!(rep.verified(), "{}", rep.to_kv());
            assert_eq!(k.claimed_rank, 4 + 2 * 4);
        }
    }

    #[test]
    fn permutation_of_certificates() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let t = rand_sparse(6, &mut rng);
        let c = row_split_cert(&t, 2);
        let rp = Permutation::random(6, &mut rng);
        let cp = Permutation::random(6, &mut rng);
        let pc = permute_cert(&c, rp.as_slice(), cp.as_slice()).unwrap();
        let pt = t.permute(rp.as_slice(), cp.as_slice());
        assert!(verify_cert(&pc, &pt, &VerifyOptions::for_field(pc.spec())).verified());
        let fc = LowRankSparseCert { low_rank: { let (u, v) = c.low_rank_factors().unwrap(); LowRankPart::Factored { u, v } }, ..c.clone() };
        let pf = permute_cert(&fc, rp.as_slice(), cp.as_slice()).unwrap();
        assert!(verify_cert(&pf, &pt, &VerifyOptions::for_field(pf.spec())).verified());
    }

    #[test]
    fn kronecker_rows_match_materialized() {
        let f = f5();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let spec = KroneckerSpec::new(&f, vec![DenseMatrix::random(&f, 2, 2, &mut rng), DenseMatrix::random(&f, 3, 3, &mut rng)]).unwrap();
        let m = spec.materialize().unwrap();
        for i in 0..6 {
            let mut row = spec.sparse_row(i);
            row.retain(|(_, v)| *v != 0);
            assert_eq!(row, m.sparse_row(i));
        }
    }
}
