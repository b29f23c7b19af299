//! Factorization of a square matrix into V-matrices, monomial matrices and
//! one diagonal matrix.
//!
//! `G_d(x)` is the identity except for its last column, which is `x`.
//! A single step writes `A = P1 * G(y)^T * diag(B, lambda) * G(x) * P2` and
//! recursing on `B` yields `4d - 3` factors in the fixed pattern
//! `[M, V^T] * (d-1), W, [V, M] * (d-1)`.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::matrix::elim;
use crate::matrix::{DenseMatrix, MonomialMatrix, Permutation, SparseMatrix};

/// `G_d(x)` (or its transpose) as a sparse matrix.
pub fn make_v_matrix<F: Field>(field: &F, x: &[F::Elem], transposed: bool) -> SparseMatrix<F> {
    let d = x.len();
    let mut trip = Vec::with_capacity(2 * d);
    for i in 0..d.saturating_sub(1) {
        trip.push((i, i, field.one()));
    }
    for (i, v) in x.iter().enumerate() {
        trip.push((i, d - 1, v.clone()));
    }
    if transposed {
        for t in trip.iter_mut() {
            std::mem::swap(&mut t.0, &mut t.1);
        }
    }
    SparseMatrix::from_triplets(field, d, d, trip).expect("indices in range")
}

/// The last standard basis vector `e_d`, for which `G_d(e_d) = I`.
pub fn unit_last<F: Field>(field: &F, d: usize) -> Vec<F::Elem> {
    let mut v = vec![field.zero(); d];
    if d > 0 {
        v[d - 1] = field.one();
    }
    v
}

/// One step of the factorization.
#[derive(Clone, Debug, PartialEq)]
pub struct VStep<F: Field> {
    pub p1: Permutation,
    pub y: Vec<F::Elem>,
    pub b: DenseMatrix<F>,
    pub lambda: F::Elem,
    pub x: Vec<F::Elem>,
    pub p2: Permutation,
}

impl<F: Field> VStep<F> {
    /// `P1 * G(y)^T * diag(B, lambda) * G(x) * P2`.
    pub fn product(&self) -> SparseMatrix<F> {
        let f = self.b.field();
        let d = self.x.len();
        let mut core = DenseMatrix::zeros(f, d, d);
        for i in 0..d - 1 {
            for j in 0..d - 1 {
                core.set(i, j, self.b.get(i, j).clone());
            }
        }
        core.set(d - 1, d - 1, self.lambda.clone());
        let parts = [
            self.p1.to_sparse(f),
            make_v_matrix(f, &self.y, true),
            core.to_sparse(),
            make_v_matrix(f, &self.x, false),
            self.p2.to_sparse(f),
        ];
        product_of(f, d, &parts)
    }
}

fn product_of<F: Field>(f: &F, d: usize, parts: &[SparseMatrix<F>]) -> SparseMatrix<F> {
    parts
        .iter()
        .fold(SparseMatrix::identity(f, d), |acc, m| acc.mul(m).expect("square factors of equal size"))
}

fn rank_without<F: Field>(a: &DenseMatrix<F>, skip_row: Option<usize>, skip_col: Option<usize>) -> usize {
    let rows: Vec<usize> = (0..a.rows()).filter(|&i| Some(i) != skip_row).collect();
    let cols: Vec<usize> = (0..a.cols()).filter(|&j| Some(j) != skip_col).collect();
    a.select(&rows, &cols).rank()
}

/// Splits off the last row and column of `a` (after permutations).
///
/// Full rank gives `lambda = 1`; rank-deficient input gives `lambda = 0`.
/// Ties are broken toward the largest admissible index.
pub fn v_factor_step<F: Field>(a: &DenseMatrix<F>) -> Result<VStep<F>> {
    let f = a.field().clone();
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!("{}x{} is not square", a.rows(), a.cols())));
    }
    let d = a.rows();
    if d < 2 {
        return Err(Error::Degenerate("a 1x1 matrix has no V-step; treat it as diagonal".into()));
    }
    let rank = a.rank();
    let m = d - 1;
    if rank == d {
        // A mu = e_d; the entries of mu give the last column as a combination
        // of the others on every row but the last.
        let mu = elim::solve(&f, d, d, a.data(), &unit_last(&f, d)).expect("full rank");
        let j = (0..d).rev().find(|&j| !f.is_zero(&mu[j])).expect("mu is nonzero");
        let p2 = Permutation::transposition(d, j, m);
        let mut ap = a.clone();
        ap.swap_cols(j, m);
        let mut mu = mu;
        mu.swap(j, m);
        let inv_last = f.inv(&mu[m]).expect("pivot is nonzero");
        let mut x: Vec<F::Elem> = (0..m).map(|i| f.neg(&f.mul(&mu[i], &inv_last))).collect();
        x.push(inv_last);
        let idx: Vec<usize> = (0..m).collect();
        let b = ap.select(&idx, &idx);
        let last_row: Vec<F::Elem> = (0..m).map(|j| ap.get(m, j).clone()).collect();
        let bt = b.transpose();
        let mut y = elim::solve(&f, m, m, bt.data(), &last_row).expect("leading block is invertible");
        y.push(f.one());
        Ok(VStep {
            p1: Permutation::identity(d),
            y,
            b,
            lambda: f.one(),
            x,
            p2,
        })
    } else {
        let j = (0..d)
            .rev()
            .find(|&j| rank_without(a, None, Some(j)) == rank)
            .expect("a dependent column exists");
        let p2 = Permutation::transposition(d, j, m);
        let mut ap = a.clone();
        ap.swap_cols(j, m);
        let i = (0..d)
            .rev()
            .find(|&i| rank_without(&ap, Some(i), None) == rank)
            .expect("a dependent row exists");
        let p1 = Permutation::transposition(d, i, m);
        ap.swap_rows(i, m);
        let idx: Vec<usize> = (0..m).collect();
        let all: Vec<usize> = (0..d).collect();
        let left = ap.select(&all, &idx);
        let alpha = elim::solve(&f, d, m, left.data(), &ap.column(m)).expect("column is dependent");
        let top = ap.select(&idx, &all).transpose();
        let beta = elim::solve(&f, d, m, top.data(), ap.row(m)).expect("row is dependent");
        let b = ap.select(&idx, &idx);
        let mut x = alpha;
        x.push(f.one());
        let mut y = beta;
        y.push(f.one());
        Ok(VStep {
            p1,
            y,
            b,
            lambda: f.zero(),
            x,
            p2,
        })
    }
}

/// Cyclic relabeling `pi` with `diag(G_{d-t}(x), I_t) = P * G_d((0^t, x)) * P^{-1}`.
fn block_shift(d: usize, t: usize) -> Permutation {
    let s = d - t;
    let map = (0..d).map(|a| if a < s { a + t } else { a - s }).collect();
    Permutation::new(map).expect("cyclic shift is a bijection")
}

/// Embeds `G_{d-t}(x)` into dimension `d`: returns `(P1, y, P2)` with
/// `diag(G_{d-t}(x), I_t) = P1 * G_d(y) * P2` and `y = (0^t, x)`.
pub fn embed_small_v<F: Field>(field: &F, x: &[F::Elem], d: usize) -> Result<(Permutation, Vec<F::Elem>, Permutation)> {
    if x.is_empty() || x.len() > d {
        return Err(Error::InvalidParameter(format!(
            "cannot embed a V-matrix of size {} into dimension {d}",
            x.len()
        )));
    }
    let t = d - x.len();
    let pi = block_shift(d, t);
    let mut y = vec![field.zero(); t];
    y.extend_from_slice(x);
    let inv = pi.inverse();
    Ok((pi, y, inv))
}

#[derive(Clone, Debug, PartialEq)]
pub enum VFactor<F: Field> {
    Monomial(MonomialMatrix<F>),
    V(Vec<F::Elem>),
    VTransposed(Vec<F::Elem>),
    Diagonal(Vec<F::Elem>),
}

impl<F: Field> VFactor<F> {
    pub fn dim(&self) -> usize {
        match self {
            VFactor::Monomial(m) => m.dim(),
            VFactor::V(x) | VFactor::VTransposed(x) | VFactor::Diagonal(x) => x.len(),
        }
    }

    pub fn kind(&self) -> FactorKind {
        match self {
            VFactor::Monomial(_) => FactorKind::Monomial,
            VFactor::V(_) => FactorKind::V,
            VFactor::VTransposed(_) => FactorKind::VTransposed,
            VFactor::Diagonal(_) => FactorKind::Diagonal,
        }
    }

    pub fn to_sparse(&self, field: &F) -> SparseMatrix<F> {
        match self {
            VFactor::Monomial(m) => m.to_sparse(field),
            VFactor::V(x) => make_v_matrix(field, x, false),
            VFactor::VTransposed(x) => make_v_matrix(field, x, true),
            VFactor::Diagonal(d) => MonomialMatrix::diagonal(d.clone()).to_sparse(field),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FactorKind {
    Monomial,
    V,
    VTransposed,
    Diagonal,
}

/// Ordered factors whose product is the original matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct VFactorization<F: Field> {
    field: F,
    dim: usize,
    factors: Vec<VFactor<F>>,
}

impl<F: Field> VFactorization<F> {
    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn factors(&self) -> &[VFactor<F>] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn product(&self) -> SparseMatrix<F> {
        let parts: Vec<_> = self.factors.iter().map(|v| v.to_sparse(&self.field)).collect();
        product_of(&self.field, self.dim, &parts)
    }
}

pub fn v_factor_full<F: Field>(a: &DenseMatrix<F>) -> Result<VFactorization<F>> {
    let f = a.field().clone();
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!("{}x{} is not square", a.rows(), a.cols())));
    }
    let d = a.rows();
    if d == 0 {
        return Err(Error::Degenerate("empty matrix".into()));
    }
    if d == 1 {
        return Ok(VFactorization {
            field: f,
            dim: 1,
            factors: vec![VFactor::Diagonal(vec![a.get(0, 0).clone()])],
        });
    }
    let embed = |p: &Permutation| -> Permutation {
        let mut map = p.as_slice().to_vec();
        map.extend(p.len()..d);
        Permutation::new(map).expect("extension of a permutation")
    };
    let mono = |p: Permutation| VFactor::Monomial(p.to_monomial(&f));
    let mut left = Vec::new();
    let mut right_rev = Vec::new();
    let mut lambdas = Vec::new();
    let mut core = a.clone();
    for s in (2..=d).rev() {
        let t = d - s;
        let step = v_factor_step(&core)?;
        let pi = block_shift(d, t);
        let pi_inv = pi.inverse();
        let (_, y, _) = embed_small_v(&f, &step.y, d)?;
        let (_, x, _) = embed_small_v(&f, &step.x, d)?;
        left.push(mono(embed(&step.p1).compose(&pi)));
        left.push(VFactor::VTransposed(y));
        left.push(mono(pi_inv.clone()));
        right_rev.push(mono(pi_inv.compose(&embed(&step.p2))));
        right_rev.push(VFactor::V(x));
        right_rev.push(mono(pi));
        lambdas.push(step.lambda);
        core = step.b;
    }
    let mut diag = vec![core.get(0, 0).clone()];
    diag.extend(lambdas.into_iter().rev());
    let mut raw = left;
    raw.push(VFactor::Monomial(MonomialMatrix::diagonal(diag)));
    raw.extend(right_rev.into_iter().rev());

    // Merge runs of monomials; the run around the diagonal stays diagonal.
    let mut factors: Vec<VFactor<F>> = Vec::with_capacity(4 * d - 3);
    for fac in raw {
        match (factors.last_mut(), fac) {
            (Some(VFactor::Monomial(prev)), VFactor::Monomial(m)) => {
                *prev = prev.mul(&f, &m)?;
            }
            (_, fac) => factors.push(fac),
        }
    }
    let mid = 2 * (d - 1);
    debug_assert_eq!(factors.len(), 4 * d - 3);
    let middle = match &factors[mid] {
        VFactor::Monomial(m) if m.is_diagonal() => m.scale().to_vec(),
        other => {
            return Err(Error::Degenerate(format!(
                "middle factor is not diagonal: {:?}",
                other.kind()
            )))
        }
    };
    factors[mid] = VFactor::Diagonal(middle);
    Ok(VFactorization { field: f, dim: d, factors })
}

/// Pads with identity factors (`M = I`, `G(e_d) = I`) on both ends so the
/// factor count becomes `4 * target - 3` while keeping the layer pattern.
pub fn pad_factorization<F: Field>(fact: &VFactorization<F>, target: usize) -> Result<VFactorization<F>> {
    let d = fact.dim;
    if target < d {
        return Err(Error::InvalidParameter(format!(
            "cannot pad a dimension-{d} factorization down to {target}"
        )));
    }
    let f = &fact.field;
    let extra = target - d;
    let mut factors = Vec::with_capacity(4 * target - 3);
    for _ in 0..extra {
        factors.push(VFactor::Monomial(MonomialMatrix::identity(f, d)));
        factors.push(VFactor::VTransposed(unit_last(f, d)));
    }
    factors.extend(fact.factors.iter().cloned());
    for _ in 0..extra {
        factors.push(VFactor::V(unit_last(f, d)));
        factors.push(VFactor::Monomial(MonomialMatrix::identity(f, d)));
    }
    // A 1x1 factorization is a lone diagonal; its padded positions hold
    // 1x1 identities, which still fit the layer pattern.
    Ok(VFactorization {
        field: f.clone(),
        dim: d,
        factors,
    })
}

/// The kind expected at each position of a `4d - 3` factorization.
pub fn layer_kind(target: usize, pos: usize) -> FactorKind {
    let mid = 2 * (target - 1);
    match pos.cmp(&mid) {
        std::cmp::Ordering::Equal => FactorKind::Diagonal,
        std::cmp::Ordering::Less if pos % 2 == 0 => FactorKind::Monomial,
        std::cmp::Ordering::Less => FactorKind::VTransposed,
        std::cmp::Ordering::Greater if (pos - mid) % 2 == 1 => FactorKind::V,
        std::cmp::Ordering::Greater => FactorKind::Monomial,
    }
}
