//! Elimination kernels: rank over `F_p` and `Q`, reduced row echelon form,
//! and linear solves.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::field::Field;

/// Rank of a row-major matrix over `F_p`, capped at `limit`.
///
/// Rows are inserted one at a time into a reduced basis, so the cost is
/// `O(rows * cols * rank)`; low-rank inputs are cheap even when large.
pub fn prime_rank_capped(p: u64, rows: usize, cols: usize, data: Vec<u64>, limit: usize) -> usize {
    debug_assert_eq!(data.len(), rows * cols);
    if rows == 0 || cols == 0 || limit == 0 {
        return 0;
    }
    let small = p < (1 << 31);
    let mul = |a: u64, b: u64| -> u64 {
        if small {
            a * b % p
        } else {
            ((a as u128 * b as u128) % p as u128) as u64
        }
    };
    let inv = |a: u64| crate::field::pow_mod(a, p - 2, p);
    // Basis rows are normalized so that their pivot entry is 1 and every other
    // basis row is zero in that pivot column.
    let mut basis: Vec<(usize, Vec<u64>)> = Vec::new();
    let mut row = vec![0u64; cols];
    for r in 0..rows {
        row.copy_from_slice(&data[r * cols..(r + 1) * cols]);
        for (pc, prow) in &basis {
            let c = row[*pc];
            if c == 0 {
                continue;
            }
            let f = p - c;
            for (x, y) in row.iter_mut().zip(prow.iter()) {
                if *y != 0 {
                    *x = (*x + mul(f, *y)) % p;
                }
            }
        }
        let Some(pc) = row.iter().position(|&v| v != 0) else {
            continue;
        };
        let s = inv(row[pc]);
        for x in row.iter_mut() {
            if *x != 0 {
                *x = mul(*x, s);
            }
        }
        for (_, prow) in basis.iter_mut() {
            let c = prow[pc];
            if c == 0 {
                continue;
            }
            let f = p - c;
            for (x, y) in prow.iter_mut().zip(row.iter()) {
                if *y != 0 {
                    *x = (*x + mul(f, *y)) % p;
                }
            }
        }
        basis.push((pc, row.clone()));
        if basis.len() >= limit || basis.len() == cols {
            break;
        }
    }
    basis.len().min(limit)
}

pub fn prime_rank(p: u64, rows: usize, cols: usize, data: Vec<u64>) -> usize {
    prime_rank_capped(p, rows, cols, data, usize::MAX)
}

/// Rank over `Q` by fraction-free (Bareiss) elimination.
///
/// Each row is first scaled by the lcm of its denominators so that the
/// elimination runs on integers; exact divisions by the previous pivot keep
/// intermediate entries equal to minors of the scaled matrix.
pub fn bareiss_rank_rational_capped(
    rows: usize,
    cols: usize,
    data: Vec<BigRational>,
    limit: usize,
) -> usize {
    debug_assert_eq!(data.len(), rows * cols);
    let mut m: Vec<Vec<BigInt>> = data
        .chunks(cols.max(1))
        .take(rows)
        .map(|row| {
            let l = row
                .iter()
                .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
            row.iter()
                .map(|q| q.numer() * (&l / q.denom()))
                .collect()
        })
        .collect();
    bareiss_rank_int(&mut m, cols, limit)
}

pub fn bareiss_rank_rational(rows: usize, cols: usize, data: Vec<BigRational>) -> usize {
    bareiss_rank_rational_capped(rows, cols, data, usize::MAX)
}

fn bareiss_rank_int(m: &mut [Vec<BigInt>], cols: usize, limit: usize) -> usize {
    let rows = m.len();
    let mut prev = BigInt::one();
    let mut rank = 0;
    let mut col = 0;
    while rank < rows && col < cols && rank < limit {
        let Some(piv) = (rank..rows).find(|&r| !m[r][col].is_zero()) else {
            col += 1;
            continue;
        };
        m.swap(rank, piv);
        let (top, bottom) = m.split_at_mut(rank + 1);
        let prow = &top[rank];
        let pval = prow[col].clone();
        for row in bottom.iter_mut() {
            let a = std::mem::take(&mut row[col]);
            for j in col + 1..cols {
                let v = &pval * &row[j] - &a * &prow[j];
                row[j] = if prev.is_one() { v } else { v / &prev };
            }
        }
        prev = pval;
        rank += 1;
        col += 1;
    }
    rank
}

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref<F: Field>(f: &F, rows: usize, cols: usize, data: &mut [F::Elem]) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(piv) = (r..rows).find(|&i| !f.is_zero(&data[i * cols + c])) else {
            continue;
        };
        if piv != r {
            for j in 0..cols {
                data.swap(piv * cols + j, r * cols + j);
            }
        }
        let s = f.inv(&data[r * cols + c]).expect("pivot is nonzero");
        for j in c..cols {
            data[r * cols + j] = f.mul(&data[r * cols + j], &s);
        }
        for i in 0..rows {
            if i == r || f.is_zero(&data[i * cols + c]) {
                continue;
            }
            let factor = data[i * cols + c].clone();
            for j in c..cols {
                let t = f.mul(&factor, &data[r * cols + j]);
                data[i * cols + j] = f.sub(&data[i * cols + j], &t);
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Some solution of `A x = b` (free variables set to zero), or `None` when
/// the system is inconsistent. `a` is row-major `rows x cols`.
pub fn solve<F: Field>(
    f: &F,
    rows: usize,
    cols: usize,
    a: &[F::Elem],
    b: &[F::Elem],
) -> Option<Vec<F::Elem>> {
    assert_eq!(a.len(), rows * cols);
    assert_eq!(b.len(), rows);
    let w = cols + 1;
    let mut aug = Vec::with_capacity(rows * w);
    for i in 0..rows {
        aug.extend_from_slice(&a[i * cols..(i + 1) * cols]);
        aug.push(b[i].clone());
    }
    let pivots = rref(f, rows, w, &mut aug);
    if pivots.last() == Some(&cols) {
        return None;
    }
    let mut x = vec![f.zero(); cols];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = aug[r * w + cols].clone();
    }
    Some(x)
}

/// Basis of the right null space `{x : A x = 0}`.
pub fn nullspace<F: Field>(f: &F, rows: usize, cols: usize, a: &[F::Elem]) -> Vec<Vec<F::Elem>> {
    let mut m = a.to_vec();
    let pivots = rref(f, rows, cols, &mut m);
    let mut basis = Vec::new();
    for free in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![f.zero(); cols];
        v[free] = f.one();
        for (r, &c) in pivots.iter().enumerate() {
            v[c] = f.neg(&m[r * cols + free]);
        }
        basis.push(v);
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{PrimeField, Rationals};

    fn q(v: i64) -> BigRational {
        BigRational::from_integer(v.into())
    }

    #[test]
    fn small_ranks() {
        assert_eq!(prime_rank(5, 2, 2, vec![1, 2, 2, 4]), 1);
        assert_eq!(prime_rank(5, 2, 2, vec![1, 2, 2, 3]), 2);
        assert_eq!(prime_rank(5, 3, 3, vec![0; 9]), 0);
        assert_eq!(prime_rank_capped(7, 3, 3, vec![1, 0, 0, 0, 1, 0, 0, 0, 1], 2), 2);
        let ones: Vec<_> = (0..16).map(|_| q(1)).collect();
        assert_eq!(bareiss_rank_rational(4, 4, ones), 1);
        let m = vec![q(0), q(1), q(1), q(0), q(0), q(2)];
        assert_eq!(bareiss_rank_rational(2, 3, m), 2);
        let half = BigRational::new(1.into(), 2.into());
        let m = vec![half.clone(), q(1), q(1), q(2)];
        assert_eq!(bareiss_rank_rational(2, 2, m), 1);
    }

    #[test]
    fn solve_and_nullspace() {
        let f = PrimeField::new(7).unwrap();
        let a = [1, 2, 3, 4];
        let x = solve(&f, 2, 2, &a, &[5, 6]).unwrap();
        assert_eq!(f.add(&f.mul(&1, &x[0]), &f.mul(&2, &x[1])), 5);
        assert_eq!(f.add(&f.mul(&3, &x[0]), &f.mul(&4, &x[1])), 6);
        assert!(solve(&f, 2, 2, &[1, 1, 1, 1], &[0, 1]).is_none());
        let r = Rationals;
        let a = [q(1), q(1), q(2), q(2)];
        let ns = nullspace(&r, 2, 2, &a);
        assert_eq!(ns, vec![vec![q(-1), q(1)]]);
    }
}
