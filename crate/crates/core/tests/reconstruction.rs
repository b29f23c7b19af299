//! Reconstruction identity after every combiner, on random inputs over F5,
//! F7 and Q.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rigidity::cert::{
    compose_kron, compose_product, full_rank_cert, permute_cert, transpose_cert, verify_cert, LowRankSparseCert,
    VerifyOptions,
};
use rigidity::decomp::{
    bucket_pipeline, decompose_kron_product, decompose_unequal, regroup_map, split_g_kron, subset_expand_combine,
    DecompOptions, FactorInput, UnequalMode,
};
use rigidity::io::{parse_cert, render_cert};
use rigidity::matrix::{DenseMatrix, KroneckerSpec, SparseMatrix};
use rigidity::score::{offset_grid, ScoreProfile};
use rigidity::vfactor::{pad_factorization, v_factor_full};
use rigidity::{Field, PrimeField, Rationals};

fn check<F: Field>(c: &LowRankSparseCert<F>, target: &SparseMatrix<F>) {
    let v = verify_cert(c, target, &VerifyOptions::for_field(c.spec()));
    assert!(v.verified(), "{}", v.to_kv());
    let back = parse_cert(&render_cert(c), &c.field).unwrap();
    assert_eq!(&back, c);
}

fn random_dense<F: Field>(f: &F, d: usize, rng: &mut ChaCha8Rng) -> DenseMatrix<F> {
    let mut m = DenseMatrix::random(f, d, d, rng);
    if rng.gen_bool(0.25) {
        // Repeat a row to force a rank drop.
        let (a, b) = (rng.gen_range(0..d), rng.gen_range(0..d));
        for j in 0..d {
            let v = m.get(a, j).clone();
            m.set(b, j, v);
        }
    }
    m
}

fn v_factor_case<F: Field>(f: &F, seed: u64, d: usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = random_dense(f, d, &mut rng);
    let fact = v_factor_full(&a).unwrap();
    assert_eq!(fact.product(), a.to_sparse());
    let padded = pad_factorization(&fact, d + 2).unwrap();
    assert_eq!(padded.len(), 4 * (d + 2) - 3);
    assert_eq!(padded.product(), a.to_sparse());
}

fn pipeline_case<F: Field>(f: &F, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.gen_range(1..=4);
    let dims: Vec<usize> = (0..k).map(|_| rng.gen_range(2..=4)).collect();
    let mats: Vec<DenseMatrix<F>> = dims.iter().map(|&d| random_dense(f, d, &mut rng)).collect();
    let spec = KroneckerSpec::new(f, mats.clone()).unwrap();
    let target = spec.materialize().unwrap();
    let eps = rng.gen_range(0.2..0.8);
    let opts = DecompOptions::default();
    let (c, r) = decompose_kron_product(&spec, eps, &opts).unwrap();
    assert!(r.ledger_consistent());
    check(&c, &target);
    let (c, r) = decompose_unequal(f, &mats, eps, UnequalMode::BinPack, &opts).unwrap();
    assert!(r.ledger_consistent());
    check(&c, &target);
}

fn combiner_case<F: Field>(f: &F, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.gen_range(2..=5);
    let xs: Vec<Vec<F::Elem>> = (0..k).map(|_| (0..3).map(|_| f.random(&mut rng)).collect()).collect();
    let profile = ScoreProfile::uniform(&vec![3; k]).unwrap();
    let grid = offset_grid(&profile, 0.5, 16).unwrap();
    let off = &grid[rng.gen_range(0..grid.len())].offset;
    let split = split_g_kron(f, &xs, &profile, off, 1 << 12).unwrap().cert.unwrap();
    let g = split.reconstruct().unwrap();
    check(&split, &g);
    let t = transpose_cert(&split);
    check(&t, &g.transpose());

    let n = g.rows();
    let other = DenseMatrix::random(f, n, n, &mut rng).to_sparse();
    let p = compose_product(&split, &full_rank_cert(&other, "B")).unwrap();
    check(&p, &g.mul(&other).unwrap());

    let small = DenseMatrix::random(f, 2, 2, &mut rng).to_sparse();
    let kc = compose_kron(&full_rank_cert(&small, "S"), &t, 1 << 12).unwrap();
    check(&kc, &small.kron(&g.transpose()));

    let order: Vec<usize> = {
        let mut o: Vec<usize> = (0..k).collect();
        o.reverse();
        o
    };
    let phi = regroup_map(&vec![3; k], &order).unwrap();
    let pc = permute_cert(&split, &phi, &phi).unwrap();
    let expect = g.permute(&phi, &phi);
    check(&pc, &expect);
}

fn subset_and_bucket_case<F: Field>(f: &F, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eps = 0.4;
    let opts = DecompOptions::default();
    let dims: Vec<usize> = (0..3).map(|_| rng.gen_range(8..=12)).collect();
    let inputs: Vec<FactorInput<F>> = dims
        .iter()
        .map(|&d| FactorInput::with_default_cert(random_dense(f, d, &mut rng), eps, &opts).unwrap())
        .collect();
    let target = KroneckerSpec::new(f, inputs.iter().map(|i| i.matrix.clone()).collect())
        .unwrap()
        .materialize()
        .unwrap();
    let certs: Vec<_> = inputs.iter().map(|i| i.cert.clone()).collect();
    let (c, r) = subset_expand_combine(&certs, eps, &opts).unwrap();
    assert!(r.ledger_consistent());
    check(&c, &target);
    let (c, r) = bucket_pipeline(f, &inputs, eps, 8, &opts).unwrap();
    assert!(r.ledger_consistent());
    check(&c, &target);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn v_factorization_reproduces_input(seed in any::<u64>(), d in 1usize..=8) {
        v_factor_case(&PrimeField::new(5).unwrap(), seed, d);
        v_factor_case(&PrimeField::new(7).unwrap(), seed, d);
        v_factor_case(&Rationals, seed, d.min(6));
    }

    #[test]
    fn pipelines_reconstruct(seed in any::<u64>()) {
        pipeline_case(&PrimeField::new(5).unwrap(), seed);
        pipeline_case(&PrimeField::new(7).unwrap(), seed);
        pipeline_case(&Rationals, seed);
    }

    #[test]
    fn combiners_reconstruct(seed in any::<u64>()) {
        combiner_case(&PrimeField::new(5).unwrap(), seed);
        combiner_case(&PrimeField::new(7).unwrap(), seed);
        combiner_case(&Rationals, seed);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn subset_and_bucket_reconstruct(seed in any::<u64>()) {
        subset_and_bucket_case(&PrimeField::new(5).unwrap(), seed);
        subset_and_bucket_case(&PrimeField::new(7).unwrap(), seed);
        subset_and_bucket_case(&Rationals, seed);
    }
}
