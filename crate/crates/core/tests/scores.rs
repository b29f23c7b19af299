//! Split counts against a direct enumeration of the Kronecker V-matrix
//! pattern, monotonicity along the offset grid, and a sampling check of the
//! score mean.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rigidity::decomp::split_g_kron;
use rigidity::score::{offset_grid, threshold_sets, ScoreProfile, WeightFn};
use rigidity::PrimeField;

fn digits(mut idx: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for i in (0..dims.len()).rev() {
        out[i] = idx % dims[i];
        idx /= dims[i];
    }
    out
}

struct Oracle {
    c: u128,
    r: u128,
    m_c: u128,
    m_r: u128,
}

/// Enumerates `G(x_1) (x) ... (x) G(x_k)` for nonzero `x`: entry `(I, J)` is
/// present iff every coordinate has `J_i` maximal or `I_i = J_i`.
fn enumerate(dims: &[usize], weights: &[BigRational], offset: &BigRational) -> Oracle {
    let n: usize = dims.iter().product();
    let mean: BigRational = dims
        .iter()
        .zip(weights)
        .fold(BigRational::zero(), |acc, (&d, w)| acc + w / BigInt::from(d));
    let tuples: Vec<Vec<usize>> = (0..n).map(|i| digits(i, dims)).collect();
    let score = |t: &[usize]| {
        t.iter()
            .zip(dims)
            .zip(weights)
            .filter(|((&x, &d), _)| x == d - 1)
            .fold(BigRational::zero(), |acc, (_, w)| acc + w)
    };
    let in_c: Vec<bool> = tuples.iter().map(|t| score(t) >= &mean + offset).collect();
    let in_r: Vec<bool> = tuples.iter().map(|t| score(t) <= &mean - offset).collect();
    let mut row = vec![0u128; n];
    let mut col = vec![0u128; n];
    for i in 0..n {
        for j in 0..n {
            let present = tuples[i]
                .iter()
                .zip(&tuples[j])
                .zip(dims)
                .all(|((&a, &b), &d)| b == d - 1 || a == b);
            if present && !in_r[i] && !in_c[j] {
                row[i] += 1;
                col[j] += 1;
            }
        }
    }
    Oracle {
        c: in_c.iter().filter(|&&b| b).count() as u128,
        r: in_r.iter().filter(|&&b| b).count() as u128,
        m_c: col.into_iter().max().unwrap_or(0),
        m_r: row.into_iter().max().unwrap_or(0),
    }
}

fn check_dims(dims: &[usize], w: &WeightFn, seed: u64) {
    let f = PrimeField::new(7).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let profile = ScoreProfile::new(dims, w).unwrap();
    let weights: Vec<BigRational> = dims.iter().map(|&d| w.weight(d).unwrap()).collect();
    let xs: Vec<Vec<u64>> = dims.iter().map(|&d| (0..d).map(|_| rng.gen_range(1..7)).collect()).collect();
    let mut prev: Option<(usize, usize)> = None;
    for pt in offset_grid(&profile, 0.5, 12).unwrap() {
        let o = enumerate(dims, &weights, &pt.offset);
        let counts = threshold_sets(&profile, &pt.offset).unwrap().counts();
        assert_eq!(
            (counts.c_size, counts.r_size, counts.m_c, counts.m_r),
            (o.c, o.r, o.m_c, o.m_r),
            "dims {dims:?} offset {}",
            pt.offset
        );
        let cert = split_g_kron(&f, &xs, &profile, &pt.offset, 4096).unwrap().cert.unwrap();
        assert_eq!(cert.claimed_rank as u128, o.c + o.r);
        assert_eq!(cert.claimed_sparsity as u128, o.m_c.max(o.m_r));
        let (row_max, col_max) = cert.sparse.row_col_nnz();
        assert_eq!((row_max as u128, col_max as u128), (o.m_r, o.m_c));
        if let Some((r, t)) = prev {
            assert!(cert.claimed_rank <= r && cert.claimed_sparsity >= t);
        }
        prev = Some((cert.claimed_rank, cert.claimed_sparsity));
    }
}

#[test]
fn equal_dims_three() {
    for k in 1..=5 {
        check_dims(&vec![3; k], &WeightFn::Uniform, k as u64);
    }
}

#[test]
fn mixed_dims_uniform() {
    check_dims(&[2, 3, 4], &WeightFn::Uniform, 1);
    check_dims(&[5, 2, 2, 3], &WeightFn::Uniform, 2);
}

#[test]
fn mixed_dims_weighted() {
    let r = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
    let table: BTreeMap<usize, BigRational> = [(2, BigRational::one()), (3, r(3, 2)), (4, r(2, 1))].into();
    let w = WeightFn::table(table).unwrap();
    check_dims(&[2, 3, 4], &w, 3);
    check_dims(&[4, 2, 3, 2], &w, 4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn grid_trade_off_is_monotone(dims in prop::collection::vec(2usize..6, 1..8), eps in 0.1f64..0.9) {
        let profile = ScoreProfile::uniform(&dims).unwrap();
        let mut prev: Option<(u128, u128)> = None;
        for pt in offset_grid(&profile, eps, 32).unwrap() {
            let c = threshold_sets(&profile, &pt.offset).unwrap().counts();
            if let Some((r, t)) = prev {
                prop_assert!(c.rank() <= r && c.sparsity() >= t);
            }
            prev = Some((c.rank(), c.sparsity()));
        }
    }
}

#[test]
fn sampled_score_mean_is_within_five_sigma() {
    let dims = [2usize, 3, 3, 5, 7, 7, 11];
    let r = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
    let table: BTreeMap<usize, BigRational> =
        [(2, r(1, 1)), (3, r(1, 1)), (5, r(3, 2)), (7, r(2, 1)), (11, r(5, 2))].into();
    let w = WeightFn::table(table).unwrap();
    let profile = ScoreProfile::new(&dims, &w).unwrap();
    let to_f = |q: &BigRational| q.numer().to_string().parse::<f64>().unwrap() / q.denom().to_string().parse::<f64>().unwrap();
    let mean = to_f(profile.mean());
    let var = to_f(profile.variance());
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    const N: usize = 100_000;
    let mut sum = 0.0;
    for _ in 0..N {
        let t: Vec<usize> = dims.iter().map(|&d| rng.gen_range(0..d)).collect();
        sum += to_f(&profile.score(&t).unwrap());
    }
    let est = sum / N as f64;
    assert!((est - mean).abs() <= 5.0 * var.sqrt() / (N as f64).sqrt(), "{est} vs {mean}");
}
