//! Exhaustive rigidity and row-column rigidity for tiny matrices.
//!
//! A support is feasible when some matrix `B` agreeing with `A` off the
//! support has rank at most `r`. Feasibility is decided exactly:
//! - `r = 0`: `B = 0`, so the support must cover every nonzero;
//! - `r = 1`: rank-one completion with a case split on which free
//!   parameters vanish;
//! - `r = n - 1` (square): `det B` is multilinear in the free entries and
//!   has a root unless it is a nonzero constant;
//! - otherwise, over `F_p` only, enumeration of all values on the support.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::field::{Field, FieldSpec};
use crate::matrix::{DenseMatrix, SparseMatrix};

/// Largest matrix side the oracle accepts over `F_p` and `Q`.
pub const PRIME_SIDE_CAP: usize = 4;
pub const RATIONAL_SIDE_CAP: usize = 3;
pub const PRIME_MODULUS_CAP: u64 = 5;
/// Upper limit on rank evaluations spent enumerating support values.
pub const ENUMERATION_BUDGET: u64 = 20_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleKind {
    Rigidity,
    RowColumn,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult<F: Field> {
    pub kind: OracleKind,
    pub rank: usize,
    /// Minimum number of changes, or minimum per-row/column count.
    pub value: usize,
    pub witness: SparseMatrix<F>,
}

impl<F: Field> OracleResult<F> {
    pub fn to_kv(&self) -> String {
        let f = self.witness.field();
        let mut s = String::new();
        let kind = match self.kind {
            OracleKind::Rigidity => "rigidity",
            OracleKind::RowColumn => "row-column rigidity",
        };
        let _ = writeln!(s, "measure: {kind}");
        let _ = writeln!(s, "field: {}", f.spec());
        let _ = writeln!(s, "target_rank: {}", self.rank);
        let _ = writeln!(s, "value: {}", self.value);
        let _ = writeln!(s, "witness_nnz: {}", self.witness.nnz());
        for (i, j, v) in self.witness.triplets() {
            let _ = writeln!(s, "witness: {i} {j} {}", f.format_elem(v));
        }
        s
    }
}

fn check_caps<F: Field>(a: &DenseMatrix<F>) -> Result<()> {
    let side = a.rows().max(a.cols());
    match a.field().spec() {
        FieldSpec::Prime(p) if p > PRIME_MODULUS_CAP => {
            Err(Error::OracleRefused(format!("modulus {p} above {PRIME_MODULUS_CAP}")))
        }
        FieldSpec::Prime(_) if side > PRIME_SIDE_CAP => Err(Error::OracleRefused(format!(
            "{}x{} is above the {PRIME_SIDE_CAP}x{PRIME_SIDE_CAP} cap",
            a.rows(),
            a.cols()
        ))),
        FieldSpec::Rational if side > RATIONAL_SIDE_CAP => Err(Error::OracleRefused(format!(
            "{}x{} is above the {RATIONAL_SIDE_CAP}x{RATIONAL_SIDE_CAP} cap over Q",
            a.rows(),
            a.cols()
        ))),
        _ => Ok(()),
    }
}

struct Search<'a, F: Field> {
    a: &'a DenseMatrix<F>,
    r: usize,
    budget: u64,
}

impl<'a, F: Field> Search<'a, F> {
    fn rank_at_most(&self, b: &DenseMatrix<F>) -> bool {
        b.rank_capped(self.r + 1) <= self.r
    }

    /// A completion `B` of `A` off `support` with rank at most `r`.
    fn feasible(&mut self, support: &[bool]) -> Result<Option<DenseMatrix<F>>> {
        let (n, m) = (self.a.rows(), self.a.cols());
        let f = self.a.field();
        if self.r == 0 {
            let ok = (0..n * m).all(|p| support[p] || f.is_zero(self.a.get(p / m, p % m)));
            return Ok(ok.then(|| DenseMatrix::zeros(f, n, m)));
        }
        if self.r == 1 {
            return Ok(rank_one_completion(self.a, support));
        }
        if n == m && self.r + 1 == n {
            return Ok(singular_completion(self.a, support));
        }
        self.enumerate(support)
    }

    fn enumerate(&mut self, support: &[bool]) -> Result<Option<DenseMatrix<F>>> {
        let f = self.a.field();
        let p = match f.spec() {
            FieldSpec::Prime(p) => p,
            FieldSpec::Rational => {
                return Err(Error::OracleRefused(format!("rank {} over Q has no exact search here", self.r)))
            }
        };
        let free: Vec<usize> = (0..support.len()).filter(|&i| support[i]).collect();
        let count = p.checked_pow(free.len() as u32).unwrap_or(u64::MAX);
        if count > self.budget {
            return Err(Error::OracleRefused("enumeration budget exhausted".into()));
        }
        self.budget -= count;
        let m = self.a.cols();
        let mut b = self.a.clone();
        for code in 0..count {
            let mut c = code;
            for &pos in &free {
                b.set(pos / m, pos % m, f.from_i64((c % p) as i64));
                c /= p;
            }
            if self.rank_at_most(&b) {
                return Ok(Some(b));
            }
        }
        Ok(None)
    }
}

/// Rank-one completion. With a fixed nonzero pivot `a = B[i0][j0]`, rank one
/// forces `B[i][j] = x_i y_j / a` where `x = B[., j0]`, `y = B[i0, .]`.
fn rank_one_completion<F: Field>(a: &DenseMatrix<F>, support: &[bool]) -> Option<DenseMatrix<F>> {
    let f = a.field();
    let (n, m) = (a.rows(), a.cols());
    let known = |i: usize, j: usize| !support[i * m + j];
    let pivot = (0..n * m).find(|&p| known(p / m, p % m) && !f.is_zero(a.get(p / m, p % m)));
    let Some(p) = pivot else {
        return Some(DenseMatrix::zeros(f, n, m));
    };
    let (i0, j0) = (p / m, p % m);
    let piv = a.get(i0, j0).clone();
    // Variables: x_i (index i) and y_j (index n + j); the pivot pair is fixed.
    let nv = n + m;
    let mut base: Vec<Option<F::Elem>> = vec![None; nv];
    for i in 0..n {
        if known(i, j0) {
            base[i] = Some(a.get(i, j0).clone());
        }
    }
    for j in 0..m {
        if known(i0, j) {
            base[n + j] = Some(a.get(i0, j).clone());
        }
    }
    let unknown: Vec<usize> = (0..nv).filter(|&v| base[v].is_none()).collect();
    let eqs: Vec<(usize, usize, F::Elem)> = (0..n)
        .flat_map(|i| (0..m).map(move |j| (i, j)))
        .filter(|&(i, j)| i != i0 && j != j0 && known(i, j))
        .map(|(i, j)| (i, n + j, f.mul(&piv, a.get(i, j))))
        .collect();
    for mask in 0u32..(1u32 << unknown.len()) {
        let mut val = base.clone();
        let mut nonzero_free = vec![false; nv];
        for (bit, &v) in unknown.iter().enumerate() {
            if mask >> bit & 1 == 1 {
                val[v] = Some(f.zero());
            } else {
                nonzero_free[v] = true;
            }
        }
        if solve_products(f, &mut val, &nonzero_free, &eqs) {
            let vals: Vec<F::Elem> = val.into_iter().map(|v| v.expect("all assigned")).collect();
            let inv = f.inv(&piv).expect("pivot is nonzero");
            let b = DenseMatrix::from_fn(f, n, m, |i, j| {
                if known(i, j) {
                    a.get(i, j).clone()
                } else {
                    f.mul(&f.mul(&vals[i], &vals[n + j]), &inv)
                }
            });
            if b.rank_capped(2) <= 1 {
                return Some(b);
            }
        }
    }
    None
}

/// Assigns the free nonzero variables so that every `x_u * y_v = k` holds.
fn solve_products<F: Field>(
    f: &F,
    val: &mut [Option<F::Elem>],
    nonzero_free: &[bool],
    eqs: &[(usize, usize, F::Elem)],
) -> bool {
    loop {
        let mut progress = false;
        for (u, v, k) in eqs {
            match (val[*u].clone(), val[*v].clone()) {
                (Some(a), Some(b)) => {
                    if f.mul(&a, &b) != *k {
                        return false;
                    }
                }
                (Some(a), None) | (None, Some(a)) => {
                    let other = if val[*u].is_none() { *u } else { *v };
                    if f.is_zero(&a) {
                        if !f.is_zero(k) {
                            return false;
                        }
                    } else {
                        if f.is_zero(k) {
                            return false;
                        }
                        debug_assert!(nonzero_free[other]);
                        val[other] = Some(f.div(k, &a).expect("nonzero"));
                        progress = true;
                    }
                }
                (None, None) => {
                    if f.is_zero(k) {
                        return false;
                    }
                }
            }
        }
        if progress {
            continue;
        }
        // Every remaining equation links two unassigned nonzero variables.
        // Pin one variable per component to 1 and propagate; cycle
        // conditions do not depend on that choice.
        match val.iter().position(Option::is_none) {
            None => return true,
            Some(root) => {
                val[root] = Some(f.one());
            }
        }
    }
}

fn det<F: Field>(m: &DenseMatrix<F>) -> F::Elem {
    let f = m.field();
    let n = m.rows();
    let mut a = m.data().to_vec();
    let mut d = f.one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| !f.is_zero(&a[r * n + c])) else {
            return f.zero();
        };
        if p != c {
            for j in 0..n {
                a.swap(p * n + j, c * n + j);
            }
            d = f.neg(&d);
        }
        let inv = f.inv(&a[c * n + c]).expect("pivot");
        d = f.mul(&d, &a[c * n + c]);
        for r in c + 1..n {
            let factor = f.mul(&a[r * n + c], &inv);
            if f.is_zero(&factor) {
                continue;
            }
            for j in c..n {
                let t = f.mul(&factor, &a[c * n + j]);
                a[r * n + j] = f.sub(&a[r * n + j], &t);
            }
        }
    }
    d
}

/// Makes `B` singular by choosing its support entries.
fn singular_completion<F: Field>(a: &DenseMatrix<F>, support: &[bool]) -> Option<DenseMatrix<F>> {
    let f = a.field();
    let n = a.rows();
    let free: Vec<usize> = (0..n * n).filter(|&p| support[p]).collect();
    let build = |vals: &[F::Elem]| {
        let mut b = a.clone();
        for (&p, v) in free.iter().zip(vals) {
            b.set(p / n, p % n, v.clone());
        }
        b
    };
    let s = free.len();
    if s == 0 {
        return f.is_zero(&det(a)).then(|| a.clone());
    }
    // det = z_i * Q + R with Q, R free of z_i; a nonzero multilinear Q is
    // nonzero at some 0/1 point.
    for i in 0..s {
        for mask in 0u32..(1u32 << (s - 1)) {
            let mut vals: Vec<F::Elem> = Vec::with_capacity(s);
            let mut bit = 0;
            for t in 0..s {
                if t == i {
                    vals.push(f.zero());
                } else {
                    vals.push(if mask >> bit & 1 == 1 { f.one() } else { f.zero() });
                    bit += 1;
                }
            }
            let r0 = det(&build(&vals));
            vals[i] = f.one();
            let q = f.sub(&det(&build(&vals)), &r0);
            if !f.is_zero(&q) {
                vals[i] = f.neg(&f.div(&r0, &q).expect("nonzero"));
                return Some(build(&vals));
            }
        }
    }
    // det does not depend on the support entries.
    let zeros = vec![f.zero(); s];
    let b = build(&zeros);
    f.is_zero(&det(&b)).then_some(b)
}

fn witness<F: Field>(a: &DenseMatrix<F>, b: &DenseMatrix<F>) -> SparseMatrix<F> {
    a.sub(b).expect("same shape").to_sparse()
}

/// Supports of size `s` in lexicographic order.
fn for_each_combination(total: usize, s: usize, mut visit: impl FnMut(&[usize]) -> Result<bool>) -> Result<bool> {
    let mut idx: Vec<usize> = (0..s).collect();
    if s > total {
        return Ok(false);
    }
    loop {
        if visit(&idx)? {
            return Ok(true);
        }
        let mut i = s;
        loop {
            if i == 0 {
                return Ok(false);
            }
            i -= 1;
            if idx[i] != i + total - s {
                break;
            }
        }
        idx[i] += 1;
        for j in i + 1..s {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Minimum number of entries of `a` to change so its rank drops to `r`.
pub fn brute_rigidity<F: Field>(a: &DenseMatrix<F>, r: usize) -> Result<OracleResult<F>> {
    check_caps(a)?;
    let f = a.field();
    let (n, m) = (a.rows(), a.cols());
    let done = |value: usize, w: SparseMatrix<F>| OracleResult {
        kind: OracleKind::Rigidity,
        rank: r,
        value,
        witness: w,
    };
    if a.rank() <= r {
        return Ok(done(0, SparseMatrix::zeros(f, n, m)));
    }
    if r == 0 {
        return Ok(done(a.nnz(), a.to_sparse()));
    }
    let mut search = Search {
        a,
        r,
        budget: ENUMERATION_BUDGET,
    };
    for s in 1..=n * m {
        let mut found = None;
        for_each_combination(n * m, s, |idx| {
            let mut support = vec![false; n * m];
            for &p in idx {
                support[p] = true;
            }
            if let Some(b) = search.feasible(&support)? {
                found = Some(b);
                return Ok(true);
            }
            Ok(false)
        })?;
        if let Some(b) = found {
            return Ok(done(s, witness(a, &b)));
        }
    }
    unreachable!("the full support is always feasible")
}

/// Minimum `t` such that changing at most `t` entries per row and column
/// brings the rank down to `r`.
pub fn brute_rc_rigidity<F: Field>(a: &DenseMatrix<F>, r: usize) -> Result<OracleResult<F>> {
    check_caps(a)?;
    let f = a.field();
    let (n, m) = (a.rows(), a.cols());
    let done = |value: usize, w: SparseMatrix<F>| OracleResult {
        kind: OracleKind::RowColumn,
        rank: r,
        value,
        witness: w,
    };
    if a.rank() <= r {
        return Ok(done(0, SparseMatrix::zeros(f, n, m)));
    }
    if r == 0 {
        let (rr, cc) = a.row_col_nnz();
        return Ok(done(rr.max(cc), a.to_sparse()));
    }
    let mut search = Search {
        a,
        r,
        budget: ENUMERATION_BUDGET,
    };
    let cells = n * m;
    for t in 1..=n.max(m) {
        // Feasibility is monotone in the support, so maximal supports
        // suffice.
        for mask in 0u32..(1u32 << cells) {
            let support: Vec<bool> = (0..cells).map(|p| mask >> p & 1 == 1).collect();
            let row_count = |i: usize| (0..m).filter(|&j| support[i * m + j]).count();
            let col_count = |j: usize| (0..n).filter(|&i| support[i * m + j]).count();
            if (0..n).any(|i| row_count(i) > t) || (0..m).any(|j| col_count(j) > t) {
                continue;
            }
            let maximal = (0..cells).all(|p| support[p] || row_count(p / m) == t || col_count(p % m) == t);
            if !maximal {
                continue;
            }
            if let Some(b) = search.feasible(&support)? {
                let z = witness(a, &b);
                let (rr, cc) = z.row_col_nnz();
                return Ok(done(rr.max(cc), z));
            }
        }
    }
    unreachable!("the full support is always feasible")
}
