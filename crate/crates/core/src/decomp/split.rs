use num_rational::BigRational;

use crate::cert::{LowRankPart, LowRankSparseCert};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::matrix::{kron::check_cap, SparseMatrix};
use crate::score::{threshold_sets, ScoreProfile, SplitCounts};
use crate::vfactor::make_v_matrix;

#[derive(Clone, Debug)]
pub struct GSplit<F: Field> {
    pub counts: SplitCounts,
    /// `None` when the Kronecker product is above the size cap.
    pub cert: Option<LowRankSparseCert<F>>,
}

/// `G(x_1) (x) ... (x) G(x_k)`.
pub fn g_kron_matrix<F: Field>(field: &F, xs: &[Vec<F::Elem>], cap: usize) -> Result<SparseMatrix<F>> {
    let n = xs
        .iter()
        .try_fold(1usize, |a, x| a.checked_mul(x.len()))
        .ok_or(Error::SizeCap { size: usize::MAX, cap })?;
    check_cap(n, cap)?;
    let mut acc = SparseMatrix::identity(field, 1);
    for x in xs {
        acc = acc.kron(&make_v_matrix(field, x, false));
    }
    Ok(acc)
}

/// Splits `G(X)` into the entries on rows of `R` or columns of `C` (the
/// low-rank part) and the rest.
pub fn split_g_kron<F: Field>(
    field: &F,
    xs: &[Vec<F::Elem>],
    profile: &ScoreProfile,
    offset: &BigRational,
    cap: usize,
) -> Result<GSplit<F>> {
    if xs.len() != profile.k() || xs.iter().zip(profile.dims()).any(|(x, &d)| x.len() != d) {
        return Err(Error::DimensionMismatch(format!(
            "vectors of lengths {:?} do not match dims {:?}",
            xs.iter().map(Vec::len).collect::<Vec<_>>(),
            profile.dims()
        )));
    }
    let sets = threshold_sets(profile, offset)?;
    let counts = sets.counts();
    let n = match profile.order() {
        Some(n) if n <= cap as u128 => n as usize,
        _ => return Ok(GSplit { counts, cert: None }),
    };
    let g = g_kron_matrix(field, xs, cap)?;
    let (in_c, in_r) = sets.membership()?;
    let e = g.filter(|i, j| in_r[i] || in_c[j]);
    let z = g.filter(|i, j| !(in_r[i] || in_c[j]));
    let rows: Vec<usize> = (0..n).filter(|&i| in_r[i]).collect();
    let cols: Vec<usize> = (0..n).filter(|&j| in_c[j]).collect();
    let claimed_rank = usize::try_from(counts.rank()).expect("bounded by 2n");
    let claimed_sparsity = usize::try_from(counts.sparsity()).expect("bounded by n");
    let cert = LowRankSparseCert {
        field: field.clone(),
        rows: n,
        cols: n,
        target: format!("G{:?}", profile.dims()),
        low_rank: LowRankPart::Support { rows, cols, e },
        sparse: z,
        claimed_rank,
        claimed_sparsity,
    };
    Ok(GSplit { counts, cert: Some(cert) })
}
