use crate::error::{Error, Result};
use crate::field::Field;
use crate::matrix::dense::DenseMatrix;
use crate::matrix::sparse::SparseMatrix;

/// Permutation matrix with `P[i, map[i]] = 1`, so `(P A)` has row `i` equal
/// to row `map[i]` of `A`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation { map: (0..n).collect() }
    }

    pub fn new(map: Vec<usize>) -> Result<Self> {
        let n = map.len();
        let mut seen = vec![false; n];
        for &v in &map {
            if v >= n || seen[v] {
                return Err(Error::InvalidPermutation(format!("{map:?} is not a bijection on 0..{n}")));
            }
            seen[v] = true;
        }
        Ok(Permutation { map })
    }

    pub fn transposition(n: usize, a: usize, b: usize) -> Self {
        let mut map: Vec<usize> = (0..n).collect();
        map.swap(a, b);
        Permutation { map }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.map[i]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &v)| i == v)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.map.len()];
        for (i, &v) in self.map.iter().enumerate() {
            inv[v] = i;
        }
        Permutation { map: inv }
    }

    /// Matrix product `self * other`.
    pub fn compose(&self, other: &Self) -> Self {
        Permutation {
            map: self.map.iter().map(|&v| other.map[v]).collect(),
        }
    }

    pub fn kron(&self, other: &Self) -> Self {
        let m = other.len();
        let mut map = Vec::with_capacity(self.len() * m);
        for &a in &self.map {
            for &b in &other.map {
                map.push(a * m + b);
            }
        }
        Permutation { map }
    }

    pub fn random<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        use rand::seq::SliceRandom;
        let mut map: Vec<usize> = (0..n).collect();
        map.shuffle(rng);
        Permutation { map }
    }

    pub fn to_monomial<F: Field>(&self, field: &F) -> MonomialMatrix<F> {
        MonomialMatrix {
            perm: self.clone(),
            scale: vec![field.one(); self.len()],
        }
    }

    pub fn to_sparse<F: Field>(&self, field: &F) -> SparseMatrix<F> {
        self.to_monomial(field).to_sparse(field)
    }
}

/// `M[i, perm[i]] = scale[i]`; a diagonal matrix when `perm` is the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct MonomialMatrix<F: Field> {
    perm: Permutation,
    scale: Vec<F::Elem>,
}

impl<F: Field> MonomialMatrix<F> {
    pub fn new(perm: Permutation, scale: Vec<F::Elem>) -> Result<Self> {
        if perm.len() != scale.len() {
            return Err(Error::DimensionMismatch(format!(
                "permutation of length {} with {} scales",
                perm.len(),
                scale.len()
            )));
        }
        Ok(MonomialMatrix { perm, scale })
    }

    pub fn identity(field: &F, n: usize) -> Self {
        Permutation::identity(n).to_monomial(field)
    }

    pub fn diagonal(diag: Vec<F::Elem>) -> Self {
        MonomialMatrix {
            perm: Permutation::identity(diag.len()),
            scale: diag,
        }
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn perm(&self) -> &Permutation {
        &self.perm
    }

    pub fn scale(&self) -> &[F::Elem] {
        &self.scale
    }

    pub fn is_diagonal(&self) -> bool {
        self.perm.is_identity()
    }

    pub fn is_identity(&self, field: &F) -> bool {
        self.perm.is_identity() && self.scale.iter().all(|s| field.is_one(s))
    }

    /// Matrix product `self * other`.
    pub fn mul(&self, field: &F, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "monomial {} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        let scale = (0..self.dim())
            .map(|i| field.mul(&self.scale[i], &other.scale[self.perm.apply(i)]))
            .collect();
        Ok(MonomialMatrix {
            perm: self.perm.compose(&other.perm),
            scale,
        })
    }

    pub fn transpose(&self) -> Self {
        let inv = self.perm.inverse();
        let scale = (0..self.dim()).map(|j| self.scale[inv.apply(j)].clone()).collect();
        MonomialMatrix { perm: inv, scale }
    }

    pub fn kron(&self, field: &F, other: &Self) -> Self {
        let mut scale = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.scale {
            for b in &other.scale {
                scale.push(field.mul(a, b));
            }
        }
        MonomialMatrix {
            perm: self.perm.kron(&other.perm),
            scale,
        }
    }

    pub fn to_sparse(&self, field: &F) -> SparseMatrix<F> {
        let trip = (0..self.dim())
            .map(|i| (i, self.perm.apply(i), self.scale[i].clone()))
            .collect();
        SparseMatrix::from_triplets(field, self.dim(), self.dim(), trip).expect("indices in range")
    }

    pub fn to_dense(&self, field: &F) -> DenseMatrix<F> {
        self.to_sparse(field).to_dense()
    }

    /// Recognizes a matrix with at most one nonzero per row and column.
    pub fn from_sparse(m: &SparseMatrix<F>) -> Option<Self> {
        let n = m.rows();
        if m.cols() != n {
            return None;
        }
        let f = m.field();
        let mut map = vec![usize::MAX; n];
        let mut scale = vec![f.zero(); n];
        let mut used = vec![false; n];
        for i in 0..n {
            let mut it = m.row(i);
            if let Some((j, v)) = it.next() {
                if it.next().is_some() || used[j] {
                    return None;
                }
                used[j] = true;
                map[i] = j;
                scale[i] = v.clone();
            }
        }
        // Zero rows pair with unused columns to complete the permutation.
        let mut free = (0..n).filter(|&j| !used[j]);
        for slot in map.iter_mut().filter(|v| **v == usize::MAX) {
            *slot = free.next().expect("counts agree");
        }
        Some(MonomialMatrix {
            perm: Permutation { map },
            scale,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PrimeField;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn permutation_times_inverse() {
        let f = PrimeField::new(7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..8 {
            let p = Permutation::random(n, &mut rng);
            let prod = p.to_sparse(&f).mul(&p.inverse().to_sparse(&f)).unwrap();
            assert_eq!(prod, SparseMatrix::identity(&f, n));
            assert!(p.compose(&p.inverse()).is_identity());
        }
        assert!(Permutation::new(vec![0, 0]).is_err());
    }

    proptest! {
        #[test]
        fn monomial_algebra_matches_sparse(
            seed in any::<u64>(),
            n in 1usize..6,
            m in 1usize..4,
        ) {
            let f = PrimeField::new(5).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mk = |rng: &mut ChaCha8Rng, n| {
                let p = Permutation::random(n, rng);
                let s = (0..n).map(|_| f.random(rng)).collect();
                MonomialMatrix::new(p, s).unwrap()
            };
            let a = mk(&mut rng, n);
            let b = mk(&mut rng, n);
            let c = mk(&mut rng, m);
            prop_assert_eq!(a.mul(&f, &b).unwrap().to_sparse(&f), a.to_sparse(&f).mul(&b.to_sparse(&f)).unwrap());
            prop_assert_eq!(a.transpose().to_sparse(&f), a.to_sparse(&f).transpose());
            prop_assert_eq!(a.kron(&f, &c).to_sparse(&f), a.to_sparse(&f).kron(&c.to_sparse(&f)));
            let back = MonomialMatrix::from_sparse(&a.to_sparse(&f)).unwrap();
            prop_assert_eq!(back.to_sparse(&f), a.to_sparse(&f));
            let (r, c2) = a.to_sparse(&f).row_col_nnz();
            prop_assert!(r <= 1 && c2 <= 1);
        }
    }
}
