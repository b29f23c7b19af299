//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line per
//! criterion and exits non-zero if any failed.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rigidity::cert::{
    compose_kron, compose_product, full_rank_cert, monomial_cert, transpose_cert, trivial_cert, verify_cert, zero_cert,
    LowRankSparseCert, VerifyOptions,
};
use rigidity::decomp::{
    decompose_kron_product, decompose_unequal, g_kron_matrix, hadamard_family_pipeline, split_g_kron, Claim,
    DecompOptions, DeltaChoice, Rule, Stage, UnequalMode,
};
use rigidity::hadamard::{hadamard_kron, paley1, paley2, walsh, HadamardMatrix};
use rigidity::matrix::{DenseMatrix, KroneckerSpec, MonomialMatrix, Permutation, SparseMatrix};
use rigidity::oracle::{brute_rc_rigidity, brute_rigidity};
use rigidity::predict::{predict_parameters, PredictConfig};
use rigidity::score::{binom_partial_sum, offset_grid, threshold_sets, ScoreProfile, WeightFn, GRID_POINTS};
use rigidity::{Field, PrimeField, Rationals};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e2s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

// Criterion 1: randomized pipelines end to end.

#[derive(Clone, Copy, Debug)]
enum Mode {
    Equal,
    Binpack,
    Hadamard,
}

/// Random factor sizes in `2..=5` with product at most 4096.
fn random_dims(rng: &mut ChaCha8Rng, mode: Mode, d: usize) -> Vec<usize> {
    let cap = 4096usize;
    let mut dims = vec![d];
    let target_k = rng.gen_range(1..=6);
    while dims.len() < target_k {
        let next = match mode {
            Mode::Equal => d,
            _ => rng.gen_range(2..=d.max(2)),
        };
        if dims.iter().product::<usize>() * next > cap {
            break;
        }
        dims.push(next);
    }
    dims
}

fn random_factor<F: Field>(f: &F, d: usize, rng: &mut ChaCha8Rng, hadamard_ok: bool) -> DenseMatrix<F> {
    match rng.gen_range(0..6) {
        0 if hadamard_ok && d == 2 => walsh(1).unwrap().to_dense(f).unwrap(),
        0 if hadamard_ok && d == 4 => paley1(3).unwrap().to_dense(f).unwrap(),
        1 => {
            // Rank deficient: one row is zero.
            let mut m = DenseMatrix::random(f, d, d, rng);
            let r = rng.gen_range(0..d);
            for j in 0..d {
                m.set(r, j, f.zero());
            }
            m
        }
        _ => DenseMatrix::random(f, d, d, rng),
    }
}

/// Returns `n` and whether the rank claim is below `n`.
fn run_pipeline<F: Field>(
    f: &F,
    mode: Mode,
    dims: &[usize],
    eps: f64,
    rng: &mut ChaCha8Rng,
) -> Result<(usize, bool), String> {
    let mats: Vec<DenseMatrix<F>> = dims.iter().map(|&d| random_factor(f, d, rng, true)).collect();
    let spec = KroneckerSpec::new(f, mats.clone()).map_err(e2s)?;
    // The automatic offset keeps sparsity within n^eps, which at these
    // sizes forces rank claims of n or more; a large fixed offset trades
    // sparsity for rank claims below n that the verifier must check.
    let mut opts = DecompOptions::default();
    if rng.gen_bool(0.5) {
        let d_max = *dims.iter().max().unwrap() as f64;
        opts.delta = DeltaChoice::Fixed(rng.gen_range(0.6..0.95) / d_max);
    }
    let (cert, report) = match mode {
        Mode::Equal => decompose_kron_product(&spec, eps, &opts),
        Mode::Binpack => decompose_unequal(f, &mats, eps, UnequalMode::BinPack, &opts),
        Mode::Hadamard => hadamard_family_pipeline(f, &mats, &vec![None; mats.len()], eps, 4.0, 1.0, &opts),
    }
    .map_err(|e| format!("{mode:?} {dims:?} over {}: {e}", f.spec()))?;
    let v = verify_cert(&cert, &spec, &VerifyOptions::for_field(f.spec()));
    let ctx = || format!("{mode:?} dims {dims:?} eps {eps} over {}", f.spec());
    ensure(v.reconstruction_exact, || format!("{}: reconstruction fails at {:?}", ctx(), v.first_mismatch))?;
    ensure(v.rank_ok, || format!("{}: rank claim {} not met", ctx(), v.claimed_rank))?;
    ensure(v.sparsity_ok, || {
        format!("{}: nnz {}/{} above {}", ctx(), v.max_row_nnz, v.max_col_nnz, v.claimed_sparsity)
    })?;
    ensure(v.verified(), || format!("{}: {}", ctx(), v.to_kv()))?;
    ensure(report.ledger_consistent(), || format!("{}: inconsistent ledger", ctx()))?;
    Ok((spec.order(), cert.claimed_rank < spec.order()))
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    let modes = [Mode::Equal, Mode::Binpack, Mode::Hadamard];
    let mut largest = 0;
    let mut per_field = [0usize; 3];
    let mut below_n = 0;
    for i in 0..200 {
        let mode = modes[(i / 3) % 3];
        let d = rng.gen_range(2..=5);
        let dims = random_dims(&mut rng, mode, d);
        let eps = rng.gen_range(0.2..0.8);
        let (n, nontrivial) = match i % 3 {
            0 => run_pipeline(&PrimeField::new(5).unwrap(), mode, &dims, eps, &mut rng)?,
            1 => run_pipeline(&PrimeField::new(7).unwrap(), mode, &dims, eps, &mut rng)?,
            _ => run_pipeline(&Rationals, mode, &dims, eps, &mut rng)?,
        };
        per_field[i % 3] += 1;
        largest = largest.max(n);
        below_n += nontrivial as usize;
    }
    Ok(format!(
        "200 pipelines verified (F5 {}, F7 {}, Q {}), largest n = {largest}, {below_n} with rank claim below n",
        per_field[0], per_field[1], per_field[2]
    ))
}

// Criteria 2 and 7: split counts against enumeration of the pattern.

/// Counts from the pattern of `G_2(x)^{(x)k}` with `x` nonzero: entry
/// `(i, j)` is present iff the bits of `i` are contained in those of `j`.
/// Returns `(|C|, |R|, M_c, M_r)`.
fn enumerate_d2(k: usize, offset: &BigRational) -> (u128, u128, u128, u128) {
    let n = 1usize << k;
    // score = popcount; C: 2 s >= k + 2 off, R: 2 s <= k - 2 off.
    let two_off = offset * BigInt::from(2);
    let in_c: Vec<bool> = (0..n)
        .map(|j| BigRational::from_integer(BigInt::from(2 * (j as u32).count_ones() as i64 - k as i64)) >= two_off)
        .collect();
    let in_r: Vec<bool> = (0..n)
        .map(|i| BigRational::from_integer(BigInt::from(k as i64 - 2 * (i as u32).count_ones() as i64)) >= two_off)
        .collect();
    let mut col_nnz = vec![0u128; n];
    let mut row_nnz = vec![0u128; n];
    for j in 0..n {
        if in_c[j] {
            continue;
        }
        // Submasks of j.
        let mut i = j;
        loop {
            if !in_r[i] {
                col_nnz[j] += 1;
                row_nnz[i] += 1;
            }
            if i == 0 {
                break;
            }
            i = (i - 1) & j;
        }
    }
    let c = in_c.iter().filter(|&&b| b).count() as u128;
    let r = in_r.iter().filter(|&&b| b).count() as u128;
    (c, r, col_nnz.into_iter().max().unwrap_or(0), row_nnz.into_iter().max().unwrap_or(0))
}

struct SweepResult {
    checked: usize,
    claims: Vec<(usize, Vec<(usize, usize)>)>,
}

fn split_sweep() -> Result<SweepResult, String> {
    let f = PrimeField::new(5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
    let mut checked = 0;
    let mut claims = Vec::new();
    for k in 2..=12usize {
        let dims = vec![2; k];
        let profile = ScoreProfile::uniform(&dims).map_err(e2s)?;
        let grid = offset_grid(&profile, 0.5, GRID_POINTS).map_err(e2s)?;
        let xs: Vec<Vec<u64>> = (0..k).map(|_| vec![rng.gen_range(1..5), rng.gen_range(1..5)]).collect();
        let target = g_kron_matrix(&f, &xs, 1 << 12).map_err(e2s)?;
        let mut seq = Vec::with_capacity(grid.len());
        for (gi, pt) in grid.iter().enumerate() {
            let (c, r, m_c, m_r) = enumerate_d2(k, &pt.offset);
            let ctx = || format!("k={k} grid {gi} (offset {})", pt.offset);
            let counts = threshold_sets(&profile, &pt.offset).map_err(e2s)?.counts();
            ensure((counts.c_size, counts.r_size, counts.m_c, counts.m_r) == (c, r, m_c, m_r), || {
                format!("{}: library counts {counts:?}, enumeration {:?}", ctx(), (c, r, m_c, m_r))
            })?;
            let split = split_g_kron(&f, &xs, &profile, &pt.offset, 1 << 12).map_err(e2s)?;
            let cert = split.cert.ok_or_else(|| format!("{}: no certificate", ctx()))?;
            ensure(cert.claimed_rank as u128 == c + r, || {
                format!("{}: claimed rank {} vs |C|+|R| = {}", ctx(), cert.claimed_rank, c + r)
            })?;
            ensure(cert.claimed_sparsity as u128 == m_c.max(m_r), || {
                format!("{}: claimed sparsity {} vs {}", ctx(), cert.claimed_sparsity, m_c.max(m_r))
            })?;
            let (row_max, col_max) = cert.sparse.row_col_nnz();
            ensure((col_max as u128, row_max as u128) == (m_c, m_r), || {
                format!("{}: Z has row/col maxima {row_max}/{col_max}, expected {m_r}/{m_c}", ctx())
            })?;
            let v = verify_cert(&cert, &target, &VerifyOptions::for_field(f.spec()));
            ensure(v.verified(), || format!("{}: {}", ctx(), v.to_kv()))?;
            seq.push((cert.claimed_rank, cert.claimed_sparsity));
            checked += 1;
        }
        claims.push((k, seq));
    }
    Ok(SweepResult { checked, claims })
}

fn criterion_2(sweep: &Result<SweepResult, String>) -> Outcome {
    let s = sweep.as_ref().map_err(Clone::clone)?;
    Ok(format!("{} (k, offset) pairs match enumeration for k = 2..12", s.checked))
}

fn criterion_7(sweep: &Result<SweepResult, String>) -> Outcome {
    let s = sweep.as_ref().map_err(|e| format!("sweep failed: {e}"))?;
    let mut pairs = 0;
    for (k, seq) in &s.claims {
        for (i, w) in seq.windows(2).enumerate() {
            let ((r0, t0), (r1, t1)) = (w[0], w[1]);
            ensure(r1 <= r0 && t1 >= t0, || {
                format!("k={k}: grid {i} -> {}: rank {r0} -> {r1}, sparsity {t0} -> {t1}", i + 1)
            })?;
            pairs += 1;
        }
    }
    Ok(format!("{pairs} consecutive grid pairs monotone"))
}

// Criterion 3: composition ledger.

fn dense_target<F: Field>(c: &LowRankSparseCert<F>) -> SparseMatrix<F> {
    c.reconstruct().expect("explicit certificate")
}

fn random_cert<F: Field>(f: &F, n: usize, rng: &mut ChaCha8Rng) -> LowRankSparseCert<F> {
    let m = DenseMatrix::random(f, n, n, rng).to_sparse();
    match rng.gen_range(0..6) {
        0 => full_rank_cert(&m, "full"),
        1 => trivial_cert(&m, "trivial"),
        2 => {
            let scale = (0..n)
                .map(|_| loop {
                    let v = f.random(rng);
                    if !f.is_zero(&v) {
                        break v;
                    }
                })
                .collect();
            monomial_cert(f, &MonomialMatrix::new(Permutation::random(n, rng), scale).unwrap(), "monomial")
        }
        3 => zero_cert(f, n, n, "zero"),
        _ => {
            // A split of G(x) for n = 2^k, transposed half of the time.
            let k = n.trailing_zeros() as usize;
            let xs: Vec<Vec<F::Elem>> = (0..k).map(|_| vec![f.random(rng), f.random(rng)]).collect();
            let profile = ScoreProfile::uniform(&vec![2; k]).unwrap();
            let grid = offset_grid(&profile, 0.5, 8).unwrap();
            let off = &grid[rng.gen_range(0..grid.len())].offset;
            let c = split_g_kron(f, &xs, &profile, off, 256).unwrap().cert.unwrap();
            if rng.gen_bool(0.5) {
                transpose_cert(&c)
            } else {
                c
            }
        }
    }
}

fn ledger_checks<F: Field>(f: &F, rng: &mut ChaCha8Rng) -> Result<usize, String> {
    let mut checked = 0;
    for _ in 0..30 {
        let n = [2usize, 4, 8, 16][rng.gen_range(0..4)];
        let a = random_cert(f, n, rng);
        let b = random_cert(f, n, rng);
        let p = compose_product(&a, &b).map_err(e2s)?;
        let want = (
            a.claimed_rank.saturating_add(b.claimed_rank),
            a.claimed_sparsity.saturating_mul(b.claimed_sparsity),
        );
        ensure((p.claimed_rank, p.claimed_sparsity) == want, || {
            format!("product claims {:?}, expected {want:?}", (p.claimed_rank, p.claimed_sparsity))
        })?;
        let target = dense_target(&a).mul(&dense_target(&b)).map_err(e2s)?;
        let v = verify_cert(&p, &target, &VerifyOptions::for_field(f.spec()));
        ensure(v.verified() && v.exact_rank.is_some() || p.claimed_rank >= n, || {
            format!("product of {}x{n} certificates: {}", n, v.to_kv())
        })?;
        ensure(v.verified(), || format!("product: {}", v.to_kv()))?;

        let m = [2usize, 4, 8, 16][rng.gen_range(0..4)];
        if n * m <= 256 {
            let b = random_cert(f, m, rng);
            let k = compose_kron(&a, &b, 256).map_err(e2s)?;
            let want = (
                a.claimed_rank * m + b.claimed_rank * n,
                a.claimed_sparsity * b.claimed_sparsity,
            );
            ensure((k.claimed_rank, k.claimed_sparsity) == want, || {
                format!("kron claims {:?}, expected {want:?}", (k.claimed_rank, k.claimed_sparsity))
            })?;
            let target = dense_target(&a).kron(&dense_target(&b));
            let v = verify_cert(&k, &target, &VerifyOptions::for_field(f.spec()));
            ensure(v.verified(), || format!("kron {n} x {m}: {}", v.to_kv()))?;
        }
        checked += 1;
    }
    Ok(checked)
}

fn criterion_3() -> Outcome {
    // Symbolic: the ledger rules on arbitrary claims, including values no
    // certificate of this size would produce.
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0003);
    for _ in 0..1000 {
        let (n, m) = (rng.gen_range(1..1000), rng.gen_range(1..1000));
        let a = Claim {
            dim: n,
            rank: rng.gen_range(0..=n),
            sparsity: rng.gen_range(0..=n),
        };
        let b = Claim {
            dim: m,
            rank: rng.gen_range(0..=m),
            sparsity: rng.gen_range(0..=m),
        };
        let prod = Stage {
            label: "p".into(),
            rule: Rule::Product,
            inputs: vec![a, Claim { dim: n, ..b }],
            output: Claim {
                dim: n,
                rank: a.rank + b.rank,
                sparsity: a.sparsity * b.sparsity,
            },
        };
        ensure(prod.consistent(), || format!("product rule rejects {a:?} {b:?}"))?;
        let kron = Stage {
            label: "k".into(),
            rule: Rule::Kron,
            inputs: vec![a, b],
            output: Claim {
                dim: n * m,
                rank: a.rank * m + b.rank * n,
                sparsity: a.sparsity * b.sparsity,
            },
        };
        ensure(kron.consistent(), || format!("kron rule rejects {a:?} {b:?}"))?;
        let off = Stage {
            output: Claim {
                rank: kron.output.rank + 1,
                ..kron.output
            },
            ..kron.clone()
        };
        ensure(!off.consistent(), || "kron rule accepts a wrong rank".into())?;
    }
    let a = ledger_checks(&PrimeField::new(5).unwrap(), &mut rng)?;
    let b = ledger_checks(&PrimeField::new(7).unwrap(), &mut rng)?;
    let c = ledger_checks(&Rationals, &mut rng)?;
    Ok(format!("1000 symbolic rule checks, {} materialized compositions at n <= 256", a + b + c))
}

// Criterion 4: tail bounds.

fn binom(n: u64, k: u64) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

fn criterion_4() -> Outcome {
    let mut checks = 0;
    for d in 2..=5usize {
        for k in 1..=20usize {
            let dims = vec![d; k];
            let profile = ScoreProfile::uniform(&dims).map_err(e2s)?;
            let grid = offset_grid(&profile, 0.5, GRID_POINTS).map_err(e2s)?;
            for pt in grid.iter().step_by(GRID_POINTS / 10).take(10) {
                let delta = pt.delta;
                // Exact counts by the binomial distribution of the number of
                // maximal coordinates; offset is delta * k here.
                let off_k = &pt.offset;
                let mean = BigRational::new(BigInt::from(k), BigInt::from(d));
                let (mut c, mut r) = (0u128, 0u128);
                for j in 0..=k {
                    let s = BigRational::from_integer(BigInt::from(j));
                    let cnt = binom(k as u64, j as u64) * ((d - 1) as u128).pow((k - j) as u32);
                    if s >= &mean + off_k {
                        c += cnt;
                    }
                    if s <= &mean - off_k {
                        r += cnt;
                    }
                }
                let counts = threshold_sets(&profile, off_k).map_err(e2s)?.counts();
                ensure((counts.c_size, counts.r_size) == (c, r), || {
                    format!("d={d} k={k} delta={delta}: library ({}, {}) vs DP ({c}, {r})", counts.c_size, counts.r_size)
                })?;
                let bound = (((d as f64).ln() - delta * delta * d as f64 / 3.0) * k as f64).exp();
                ensure(c as f64 <= bound && r as f64 <= bound, || {
                    format!("d={d} k={k} delta={delta}: |C|={c}, |R|={r} exceed {bound}")
                })?;
                checks += 1;
            }
        }
    }
    let mut partial = 0;
    for n in 1..=30usize {
        for k in 1..=n {
            let exact: u128 = (0..=k).map(|i| binom(n as u64, i as u64)).sum();
            ensure(binom_partial_sum(n, k) == Some(exact), || format!("partial sum n={n} k={k}"))?;
            let bound = (std::f64::consts::E * n as f64 / k as f64).powi(k as i32);
            ensure(exact as f64 <= bound, || format!("n={n} k={k}: {exact} > (en/k)^k = {bound}"))?;
            partial += 1;
        }
    }
    Ok(format!("{checks} (d, k, delta) tail checks, {partial} partial-sum checks"))
}

// Criterion 5: oracle consistency.

fn all_2x2<F: Field>(f: &F, q: u64) -> Vec<DenseMatrix<F>> {
    (0..q.pow(4))
        .map(|mut code| {
            let vals: Vec<i64> = (0..4)
                .map(|_| {
                    let v = code % q;
                    code /= q;
                    v as i64
                })
                .collect();
            DenseMatrix::from_i64_rows(f, &[&vals[0..2], &vals[2..4]])
        })
        .collect()
}

fn oracle_checks<F: Field>(f: &F, mats: &[DenseMatrix<F>]) -> Result<(usize, usize), String> {
    let mut certs = 0;
    let mut instances = 0;
    for a in mats {
        let n = a.rows();
        let mut prev: Option<(usize, usize)> = None;
        for r in 0..=n {
            let rig = brute_rigidity(a, r).map_err(e2s)?.value;
            let rc = brute_rc_rigidity(a, r).map_err(e2s)?.value;
            ensure(rig <= n * rc, || format!("{a:?} r={r}: R = {rig} > n * R^rc = {}", n * rc))?;
            if let Some((p_rig, p_rc)) = prev {
                ensure(rig <= p_rig && rc <= p_rc, || format!("{a:?}: not monotone at r={r}"))?;
            }
            prev = Some((rig, rc));
            instances += 1;
        }
        for eps in [0.3, 0.5, 0.9] {
            let spec = KroneckerSpec::new(f, vec![a.clone()]).map_err(e2s)?;
            let (cert, _) = decompose_kron_product(&spec, eps, &DecompOptions::default()).map_err(e2s)?;
            let rc = brute_rc_rigidity(a, cert.claimed_rank.min(n)).map_err(e2s)?.value;
            ensure(rc <= cert.claimed_sparsity, || {
                format!(
                    "{a:?}: R^rc at rank {} is {rc}, claim {}",
                    cert.claimed_rank, cert.claimed_sparsity
                )
            })?;
            let fr = brute_rigidity(a, cert.claimed_rank.min(n)).map_err(e2s)?.value;
            ensure(fr <= n * cert.claimed_sparsity, || format!("{a:?}: R above n t"))?;
            certs += 1;
        }
    }
    Ok((certs, instances))
}

fn criterion_5() -> Outcome {
    let f2 = PrimeField::new(2).unwrap();
    let f3 = PrimeField::new(3).unwrap();
    let (c2, i2) = oracle_checks(&f2, &all_2x2(&f2, 2))?;
    let (c3, i3) = oracle_checks(&f3, &all_2x2(&f3, 3))?;
    let h2 = walsh(1).unwrap().to_dense(&Rationals).map_err(e2s)?;
    let (cq, iq) = oracle_checks(&Rationals, &[h2.clone()])?;
    let r = brute_rigidity(&h2, 1).map_err(e2s)?.value;
    let rc = brute_rc_rigidity(&h2, 1).map_err(e2s)?.value;
    ensure((r, rc) == (1, 1), || format!("H2 over Q: R = {r}, R^rc = {rc}, expected 1, 1"))?;
    Ok(format!(
        "{} pipeline certificates and {} oracle instances consistent (F2, F3, H2 over Q)",
        c2 + c3 + cq,
        i2 + i3 + iq
    ))
}

// Criterion 6: Hadamard generators.

fn gram_is_scalar(h: &HadamardMatrix) -> bool {
    let n = h.order();
    (0..n).all(|i| {
        (0..n).all(|j| {
            let dot: i64 = (0..n).map(|l| h.get(i, l) as i64 * h.get(j, l) as i64).sum();
            dot == if i == j { n as i64 } else { 0 }
        })
    })
}

fn criterion_6() -> Outcome {
    let mut hs: Vec<HadamardMatrix> = (0..=6).map(|k| walsh(k).unwrap()).collect();
    for q in [3, 7, 11, 19, 23] {
        hs.push(paley1(q).map_err(e2s)?);
    }
    for q in [5, 13] {
        hs.push(paley2(q).map_err(e2s)?);
    }
    hs.push(hadamard_kron(&[paley1(3).unwrap(), walsh(1).unwrap()]).map_err(e2s)?);
    hs.push(hadamard_kron(&[paley2(5).unwrap(), paley1(7).unwrap()]).map_err(e2s)?);
    hs.push(hadamard_kron(&[walsh(2).unwrap(), paley1(11).unwrap(), walsh(1).unwrap()]).map_err(e2s)?);
    for h in &hs {
        ensure(h.entries().iter().all(|&e| e == 1 || e == -1), || format!("{}: entry not +-1", h.provenance()))?;
        ensure(gram_is_scalar(h), || format!("{}: H H^T != n I", h.provenance()))?;
    }
    Ok(format!("{} matrices satisfy H H^T = n I (largest order {})", hs.len(), hs.iter().map(|h| h.order()).max().unwrap()))
}

// Criterion 8: K and L.

/// Smallest K in (i) and largest L in (ii) with uniform weights, evaluated
/// straight from the sums.
fn direct_k_l(dims: &[usize]) -> (f64, f64) {
    let dk = *dims.iter().max().unwrap() as f64;
    let m: f64 = dims.iter().map(|&d| 1.0 / d as f64).sum();
    let lam: f64 = dims.iter().map(|&d| (d as f64).ln() / dk.ln()).sum();
    (m * dk / lam, m * dk / lam)
}

fn check_k_l(dims: &[usize], bound: f64) -> Result<f64, String> {
    let r = predict_parameters(dims, 0.5, &WeightFn::Uniform, &PredictConfig::default()).map_err(e2s)?;
    let (k, l) = direct_k_l(dims);
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * b.abs().max(1.0);
    ensure(close(r.k_min, k) && close(r.l_max, l), || {
        format!("dims {dims:?}: reported K={} L={}, direct {k} {l}", r.k_min, r.l_max)
    })?;
    ensure(r.conditions_hold == (true, true), || format!("dims {dims:?}: conditions fail at reported K, L"))?;
    // Direct evaluation of (i) and (ii) at the reported values and just past them.
    let dk = *dims.iter().max().unwrap() as f64;
    let m: f64 = dims.iter().map(|&d| 1.0 / d as f64).sum();
    let lam: f64 = dims.iter().map(|&d| (d as f64).ln() / dk.ln()).sum();
    let cond_i = |kk: f64| m <= kk * lam / dk;
    let cond_ii = |ll: f64| m >= ll * lam / dk;
    ensure(cond_i(r.k_min * (1.0 + 1e-9)) && !cond_i(r.k_min * (1.0 - 1e-6)), || {
        format!("dims {dims:?}: K is not the least constant in (i)")
    })?;
    ensure(cond_ii(r.l_max * (1.0 - 1e-9)) && !cond_ii(r.l_max * (1.0 + 1e-6)), || {
        format!("dims {dims:?}: L is not the largest constant in (ii)")
    })?;
    ensure(r.k_min <= bound * (1.0 + 1e-12), || format!("dims {dims:?}: K = {} above {bound}", r.k_min))?;
    Ok(r.k_min)
}

fn criterion_8() -> Outcome {
    let mut n = 0;
    for d in [2, 3, 5, 16] {
        for k in [1, 4, 10] {
            let k_val = check_k_l(&vec![d; k], 1.0)?;
            ensure((k_val - 1.0).abs() < 1e-12, || format!("equal dims {d}^{k}: K = {k_val}"))?;
            n += 1;
        }
    }
    // Sizes in [c d, d] with c = 1/4, d = 64: K = L <= (1/c) log2(1/c) = 8.
    let c = 0.25f64;
    let bound = (1.0 / c) * (1.0 / c).log2();
    let mut worst: f64 = 0.0;
    for small in 0..=12 {
        for large in 0..=12 {
            if small + large == 0 {
                continue;
            }
            let mut dims = vec![16; small];
            dims.extend(vec![64; large]);
            dims.extend(if small + large > 1 { vec![32] } else { vec![] });
            worst = worst.max(check_k_l(&dims, bound)?);
            n += 1;
        }
    }
    // One size >= 2, the rest in [sqrt(d), d], k > d: K = L <= 4 sqrt(d).
    let d = 16usize;
    let root = (d as f64).sqrt();
    for first in [2, 3, 4] {
        for split in 0..=20 {
            let mut dims = vec![first];
            dims.extend(vec![4; split]);
            dims.extend(vec![16; 20 - split]);
            check_k_l(&dims, 4.0 * root)?;
            n += 1;
        }
    }
    Ok(format!("{n} dimension lists; two-valued worst K = {worst:.4} <= {bound}"))
}

// Criterion 9: CLI determinism.

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_rigidity")
}

fn run_cli(args: &[&str], dir: &Path) -> Result<Vec<u8>, String> {
    let out = Command::new(bin()).args(args).current_dir(dir).output().map_err(e2s)?;
    let mut bytes = format!("exit {:?}\n", out.status.code()).into_bytes();
    bytes.extend(out.stdout);
    bytes.extend(out.stderr);
    Ok(bytes)
}

fn scratch(name: &str) -> PathBuf {
    let p = std::env::temp_dir().join(format!("rigidity-acceptance-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&p);
    std::fs::create_dir_all(&p).unwrap();
    p
}

fn criterion_9() -> Outcome {
    let commands: Vec<Vec<&str>> = vec![
        vec!["generate", "--walsh", "1", "--out", "h2.txt"],
        vec!["generate", "--random", "4", "--field", "Q", "--seed", "3", "--format", "sparse"],
        vec![
            "decompose", "--random", "3", "--random", "3", "--random", "3", "--field", "Fp 5", "--seed", "7",
            "--epsilon", "0.5", "--out", "c.txt", "--report", "r.txt",
        ],
        vec!["verify", "--cert", "c.txt", "--random", "3", "--random", "3", "--random", "3", "--field", "Fp 5", "--seed", "7"],
        vec!["decompose", "--paley1", "3", "--walsh", "2", "--mode", "hadamard", "--epsilon", "0.4"],
        vec!["decompose", "--random", "2", "--random", "3", "--random", "2", "--mode", "binpack", "--epsilon", "0.5", "--seed", "11"],
        vec!["predict", "--dims", "2*10", "--epsilon", "0.5"],
        vec!["oracle", "--file", "h2.txt", "--rank", "1", "--rc"],
        vec!["oracle", "--file", "h2.txt", "--rank", "1"],
    ];
    let files = ["h2.txt", "c.txt", "r.txt"];
    let runs: Vec<(Vec<Vec<u8>>, Vec<Vec<u8>>)> = ["a", "b"]
        .iter()
        .map(|tag| {
            let dir = scratch(tag);
            let outs = commands.iter().map(|c| run_cli(c, &dir)).collect::<Result<Vec<_>, _>>()?;
            let contents = files.iter().map(|f| std::fs::read(dir.join(f)).unwrap_or_default()).collect();
            let _ = std::fs::remove_dir_all(&dir);
            Ok((outs, contents))
        })
        .collect::<Result<_, String>>()?;
    for (i, c) in commands.iter().enumerate() {
        ensure(runs[0].0[i] == runs[1].0[i], || format!("`{}` output differs between runs", c.join(" ")))?;
        ensure(runs[0].0[i].starts_with(b"exit Some(0)"), || {
            format!("`{}` failed: {}", c.join(" "), String::from_utf8_lossy(&runs[0].0[i]))
        })?;
    }
    for (i, f) in files.iter().enumerate() {
        ensure(!runs[0].1[i].is_empty(), || format!("{f} was not written"))?;
        ensure(runs[0].1[i] == runs[1].1[i], || format!("{f} differs between runs"))?;
    }
    Ok(format!("{} commands and {} files byte-identical across two runs", commands.len(), files.len()))
}

fn main() {
    // Respect the test harness's filter and listing conventions.
    let args: Vec<String> = std::env::args().collect();
    if args.iter().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let filter = args.iter().skip(1).find(|a| !a.starts_with('-'));
    if filter.is_some_and(|f| !"acceptance".contains(f.as_str())) {
        return;
    }

    let mut failed = 0;
    let mut report = |id: u32, name: &str, f: &dyn Fn() -> Outcome| {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {id} ({name}): {detail} [{secs:.1}s]"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {id} ({name}): {why} [{secs:.1}s]");
            }
        }
    };
    report(1, "reconstruction master suite", &criterion_1);
    let sweep = {
        let start = Instant::now();
        let s = split_sweep();
        println!("split sweep for criteria 2 and 7 took {:.1}s", start.elapsed().as_secs_f64());
        s
    };
    report(2, "split counts match enumeration", &|| criterion_2(&sweep));
    report(3, "composition ledger", &criterion_3);
    report(4, "tail-bound dominance", &criterion_4);
    report(5, "oracle consistency", &criterion_5);
    report(6, "Hadamard generators", &criterion_6);
    report(7, "trade-off monotonicity", &|| criterion_7(&sweep));
    report(8, "K and L parameter checks", &criterion_8);
    report(9, "CLI determinism", &criterion_9);
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all 9 acceptance criteria passed");
}
