use super::{
    pipeline::{decompose_kron_product, decompose_unequal, UnequalMode},
    regroup_map, subset_claim, Claim, DecompOptions, PipelineReport, Rule, Stage,
};
use crate::cert::{
    compose_kron, factored_or_implicit, full_rank_cert, permute_cert, trivial_cert, LowRankPart, LowRankSparseCert,
};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::matrix::{kron::check_cap, DenseMatrix, KroneckerSpec, SparseMatrix};
use crate::predict::fmt_f64;

fn claim<F: Field>(c: &LowRankSparseCert<F>) -> Claim {
    Claim {
        dim: c.rows,
        rank: c.claimed_rank,
        sparsity: c.claimed_sparsity,
    }
}

fn kron_chain<F: Field>(field: &F, parts: &[SparseMatrix<F>]) -> SparseMatrix<F> {
    parts
        .iter()
        .fold(SparseMatrix::identity(field, 1), |acc, p| acc.kron(p))
}

fn fold_kron<F: Field>(certs: &[LowRankSparseCert<F>], cap: usize) -> Result<LowRankSparseCert<F>> {
    let mut it = certs.iter();
    let mut acc = it.next().ok_or_else(|| Error::InvalidParameter("nothing to compose".into()))?.clone();
    for c in it {
        acc = compose_kron(&acc, c, cap)?;
    }
    Ok(acc)
}

/// Smallest integer at least `eps * k`, tolerant to rounding in `eps`.
fn subset_threshold(eps: f64, k: usize) -> usize {
    let x = eps * k as f64;
    let r = x.round();
    if (x - r).abs() < 1e-9 {
        r as usize
    } else {
        x.ceil() as usize
    }
}

/// Certificate for `M_1 (x) ... (x) M_k` from certificates `M_i = A_i + Z_i`
/// by expanding the product over all subsets `S` of factors taken from the
/// low-rank parts: subsets with `|S| >= ceil(eps k)` form the low-rank part,
/// the rest the sparse part. Above `opts.subset_cap` factors, or when some
/// low-rank part is implicit, falls back to iterated Kronecker composition.
pub fn subset_expand_combine<F: Field>(
    certs: &[LowRankSparseCert<F>],
    eps: f64,
    opts: &DecompOptions,
) -> Result<(LowRankSparseCert<F>, PipelineReport)> {
    let first = certs.first().ok_or_else(|| Error::InvalidParameter("no factor certificates".into()))?;
    if let Some(c) = certs.iter().find(|c| !c.is_square()) {
        return Err(Error::DimensionMismatch(format!("{}x{} factor certificate", c.rows, c.cols)));
    }
    let f = &first.field;
    let dims: Vec<usize> = certs.iter().map(|c| c.rows).collect();
    let n = dims
        .iter()
        .try_fold(1usize, |a, &d| a.checked_mul(d))
        .ok_or(Error::SizeCap { size: usize::MAX, cap: opts.max_n })?;
    check_cap(n, opts.max_n)?;
    let k = certs.len();
    let tau = subset_threshold(eps, k);
    let mut report = PipelineReport::new("subset-expand", f.spec(), &dims, eps);
    report.param("tau", tau);
    let inputs: Vec<Claim> = certs.iter().map(claim).collect();
    for (i, c) in inputs.iter().enumerate() {
        report.stages.push(Stage::leaf(format!("factor {i}"), *c));
    }
    if k == 1 {
        let c = first.clone();
        report.stages.push(Stage {
            label: "subset expansion".into(),
            rule: Rule::Subset { tau },
            inputs,
            output: claim(&c),
        });
        report.finish(c.claimed_rank, c.claimed_sparsity);
        return Ok((c, report));
    }
    let implicit = certs.iter().any(|c| matches!(c.low_rank, LowRankPart::Implicit));
    if k > opts.subset_cap || implicit {
        report.notes.push(if implicit {
            "a factor has an implicit low-rank part; fell back to iterated Kronecker composition".into()
        } else {
            format!("k = {k} exceeds the subset cap {}; fell back to iterated Kronecker composition", opts.subset_cap)
        });
        let c = fold_kron(certs, opts.max_n)?;
        report.stages.push(Stage {
            label: "kron fallback".into(),
            rule: Rule::Kron,
            inputs,
            output: claim(&c),
        });
        report.finish(c.claimed_rank, c.claimed_sparsity);
        return Ok((c, report));
    }

    let factors: Vec<(SparseMatrix<F>, SparseMatrix<F>)> =
        certs.iter().map(|c| c.low_rank_factors().expect("not implicit")).collect();
    let lows: Vec<SparseMatrix<F>> = certs.iter().map(|c| c.low_rank_matrix().expect("not implicit")).collect();
    let ids: Vec<SparseMatrix<F>> = dims.iter().map(|&d| SparseMatrix::identity(f, d)).collect();
    let mut us = Vec::new();
    let mut vs = Vec::new();
    let mut z = SparseMatrix::zeros(f, n, n);
    for mask in 0u64..(1u64 << k) {
        let in_s = |i: usize| mask >> i & 1 == 1;
        let zero_term = (0..k).any(|i| {
            if in_s(i) {
                inputs[i].rank == 0
            } else {
                inputs[i].sparsity == 0
            }
        });
        if zero_term {
            continue;
        }
        if mask.count_ones() as usize >= tau {
            let u_parts: Vec<_> = (0..k).map(|i| if in_s(i) { factors[i].0.clone() } else { ids[i].clone() }).collect();
            let v_parts: Vec<_> = (0..k)
                .map(|i| if in_s(i) { factors[i].1.clone() } else { certs[i].sparse.clone() })
                .collect();
            us.push(kron_chain(f, &u_parts));
            vs.push(kron_chain(f, &v_parts));
        } else {
            let parts: Vec<_> = (0..k).map(|i| if in_s(i) { lows[i].clone() } else { certs[i].sparse.clone() }).collect();
            z = z.add(&kron_chain(f, &parts))?;
        }
    }
    let out = subset_claim(&inputs, tau);
    let low_rank = if us.is_empty() {
        LowRankPart::Zero
    } else {
        let u = SparseMatrix::hstack(&us.iter().collect::<Vec<_>>())?;
        let v = SparseMatrix::vstack(&vs.iter().collect::<Vec<_>>())?;
        factored_or_implicit(u, v, out.rank)
    };
    let targets: Vec<&str> = certs.iter().map(|c| c.target.as_str()).collect();
    let cert = LowRankSparseCert {
        field: f.clone(),
        rows: n,
        cols: n,
        target: targets.join(" (x) "),
        low_rank,
        sparse: z,
        claimed_rank: out.rank,
        claimed_sparsity: out.sparsity,
    };
    report.stages.push(Stage {
        label: "subset expansion".into(),
        rule: Rule::Subset { tau },
        inputs,
        output: out,
    });
    report.finish(out.rank, out.sparsity);
    Ok((cert, report))
}

/// Groups factor indices by size class: bucket 1 holds sizes in `[b, b^2]`,
/// bucket `t > 1` sizes in `(b^(2^(t-1)), b^(2^t)]`. Empty buckets are
/// omitted.
pub fn buckets(dims: &[usize], b: usize) -> Result<Vec<(usize, Vec<usize>)>> {
    if b < 2 {
        return Err(Error::InvalidParameter(format!("bucket base must be at least 2, got {b}")));
    }
    let mut out: Vec<(usize, Vec<usize>)> = Vec::new();
    for (i, &d) in dims.iter().enumerate() {
        if d < b {
            return Err(Error::InvalidParameter(format!("factor {i} has size {d} below the bucket base {b}")));
        }
        let mut t = 1;
        let mut bound = b.saturating_mul(b);
        while d > bound {
            bound = bound.saturating_mul(bound);
            t += 1;
        }
        match out.iter_mut().find(|(s, _)| *s == t) {
            Some((_, v)) => v.push(i),
            None => out.push((t, vec![i])),
        }
    }
    out.sort_by_key(|(t, _)| *t);
    Ok(out)
}

/// `eps^2 min(gamma) / (4 log log d_max) - log log log d_max / log n`, base 2;
/// `None` where the iterated logarithms are undefined.
pub fn psi_value(eps: f64, gammas: &[f64], d_max: usize, n: usize) -> Option<f64> {
    let ll = (d_max as f64).log2().log2();
    let lll = ll.log2();
    let gamma = gammas.iter().copied().fold(f64::INFINITY, f64::min);
    if !(ll > 0.0) || !lll.is_finite() || n < 2 || !gamma.is_finite() {
        return None;
    }
    Some(eps * eps * gamma / (4.0 * ll) - lll / (n as f64).log2())
}

/// `gamma` with `rank = d^(1 - gamma)`, clamped to `[0, 1]`.
fn rank_gamma(rank: usize, d: usize) -> f64 {
    if rank == 0 {
        1.0
    } else {
        (1.0 - (rank as f64).ln() / (d as f64).ln()).clamp(0.0, 1.0)
    }
}

/// A factor with the certificate used for it in the bucket and family
/// pipelines.
#[derive(Clone, Debug)]
pub struct FactorInput<F: Field> {
    pub matrix: DenseMatrix<F>,
    pub cert: LowRankSparseCert<F>,
}

impl<F: Field> FactorInput<F> {
    /// Attaches the best available certificate with sparsity at most
    /// `d^eps`: the single-factor V-factorization pipeline when it meets
    /// that bound with rank below `d`, otherwise `(d, 0)`.
    pub fn with_default_cert(matrix: DenseMatrix<F>, eps: f64, opts: &DecompOptions) -> Result<Self> {
        let f = matrix.field().clone();
        let d = matrix.rows();
        let spec = KroneckerSpec::new(&f, vec![matrix.clone()])?;
        let budget = (d as f64).powf(eps) + 1e-9;
        let cert = match decompose_kron_product(&spec, eps, opts) {
            Ok((c, _)) if c.claimed_rank < d && (c.claimed_sparsity as f64) <= budget => c,
            _ => full_rank_cert(&matrix.to_sparse(), format!("{d}x{d} factor")),
        };
        Ok(FactorInput { matrix, cert })
    }
}

fn grouped<F: Field>(
    dims: &[usize],
    order: &[usize],
    certs: &[LowRankSparseCert<F>],
    cap: usize,
    target: String,
) -> Result<(LowRankSparseCert<F>, LowRankSparseCert<F>)> {
    let joined = fold_kron(certs, cap)?;
    let phi = regroup_map(dims, order)?;
    let back = permute_cert(&joined, &phi, &phi)?.with_target(target);
    Ok((joined, back))
}

/// Buckets the factors by size class, combines each large bucket by subset
/// expansion, absorbs small buckets into a trivial sparse term and joins the
/// pieces by Kronecker composition.
pub fn bucket_pipeline<F: Field>(
    field: &F,
    inputs: &[FactorInput<F>],
    eps: f64,
    b: usize,
    opts: &DecompOptions,
) -> Result<(LowRankSparseCert<F>, PipelineReport)> {
    if inputs.is_empty() {
        return Err(Error::InvalidParameter("no factors".into()));
    }
    if (b as f64) < 3.0 / eps - 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "bucket base {b} is below 3/epsilon = {}",
            fmt_f64(3.0 / eps)
        )));
    }
    for (i, inp) in inputs.iter().enumerate() {
        if inp.cert.rows != inp.matrix.rows() || !inp.matrix.is_square() {
            return Err(Error::DimensionMismatch(format!("factor {i}: certificate does not match the matrix")));
        }
    }
    let dims: Vec<usize> = inputs.iter().map(|x| x.matrix.rows()).collect();
    let n = dims
        .iter()
        .try_fold(1usize, |a, &d| a.checked_mul(d))
        .ok_or(Error::SizeCap { size: usize::MAX, cap: opts.max_n })?;
    check_cap(n, opts.max_n)?;
    let bs = buckets(&dims, b)?;
    let big_l = bs.last().map(|(t, _)| *t).unwrap_or(1);
    let threshold = eps / big_l as f64 * (n as f64).ln() - 1e-9;
    let mut report = PipelineReport::new("bucket", field.spec(), &dims, eps);
    report.param("base", b);
    report.param("L", big_l);
    let desc: Vec<String> = bs
        .iter()
        .map(|(t, m)| {
            let ds: Vec<String> = m.iter().map(|&i| dims[i].to_string()).collect();
            format!("t={t}:{{{}}}", ds.join(","))
        })
        .collect();
    report.param("buckets", desc.join(" "));
    let gammas: Vec<f64> = inputs.iter().map(|x| rank_gamma(x.cert.claimed_rank, x.matrix.rows())).collect();
    let d_max = *dims.iter().max().expect("nonempty");
    report.param("psi", psi_value(eps, &gammas, d_max, n).map_or("undefined".into(), fmt_f64));
    report.param("min_gamma", fmt_f64(gammas.iter().copied().fold(f64::INFINITY, f64::min)));

    let mut order = Vec::new();
    let mut parts = Vec::new();
    let mut large = Vec::new();
    let mut residue = Vec::new();
    for (t, members) in &bs {
        let n_t: usize = members.iter().map(|&i| dims[i]).product();
        if (n_t as f64).ln() >= threshold {
            large.push(*t);
            let certs: Vec<_> = members.iter().map(|&i| inputs[i].cert.clone()).collect();
            let (c, sub) = subset_expand_combine(&certs, eps, opts)?;
            report.subreports.push((format!("bucket{t}"), sub));
            parts.push(c);
            order.extend(members.iter().copied());
        } else {
            residue.extend(members.iter().copied());
        }
    }
    let list: Vec<String> = large.iter().map(|t| t.to_string()).collect();
    report.param("large_buckets", if list.is_empty() { "none".into() } else { list.join(",") });
    if !residue.is_empty() {
        residue.sort_unstable();
        let mats: Vec<SparseMatrix<F>> = residue.iter().map(|&i| inputs[i].matrix.to_sparse()).collect();
        let r = trivial_cert(&kron_chain(field, &mats), "small buckets");
        report.stages.push(Stage::leaf("small buckets (trivial)", claim(&r)));
        parts.push(r);
        order.extend(residue.iter().copied());
    }
    if large.is_empty() {
        report.notes.push("degenerate: every bucket is below n^(eps/L); the certificate is trivial".into());
    }
    for (i, c) in parts.iter().enumerate().take(large.len()) {
        report.stages.insert(i, Stage::leaf(format!("bucket {}", large[i]), claim(c)));
    }
    let (joined, cert) = grouped(&dims, &order, &parts, opts.max_n, format!("kron{dims:?}"))?;
    report.stages.push(Stage {
        label: "join buckets".into(),
        rule: Rule::Kron,
        inputs: parts.iter().map(claim).collect(),
        output: claim(&joined),
    });
    report.stages.push(Stage {
        label: "restore factor order".into(),
        rule: Rule::Permute,
        inputs: vec![claim(&joined)],
        output: claim(&cert),
    });
    report.finish(cert.claimed_rank, cert.claimed_sparsity);
    Ok((cert, report))
}

/// Which way the family pipeline combines the small part `F` and the large
/// part `H`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyCase {
    /// Both parts certified and joined.
    Both,
    /// `N_F <= n^eps`: `F` enters as a trivial sparse term.
    SmallF,
    /// `N_H <= n^eps`: `H` enters as a trivial sparse term.
    SmallH,
    /// `N_b > N_F >= n^eps`: `n` is bounded in terms of `b` and `eps`.
    Bounded,
}

impl FamilyCase {
    pub fn name(self) -> &'static str {
        match self {
            FamilyCase::Both => "both",
            FamilyCase::SmallF => "small-F",
            FamilyCase::SmallH => "small-H",
            FamilyCase::Bounded => "bounded",
        }
    }
}

/// Constants of the family pipeline; `N_b` is kept as `log2 N_b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FamilyConstants {
    pub b_star: f64,
    pub gamma_b: f64,
    pub log2_n_b: f64,
}

impl FamilyConstants {
    pub fn new(b: f64, eps: f64, c0: f64) -> Self {
        let b_star = b.max(3.0 / eps);
        let lb = b_star.log2();
        let li = (1.0 / eps).log2();
        let gamma_b = c0 / (b_star.powf(1.5) * lb.powi(3)) * eps * eps / (li * li);
        FamilyConstants {
            b_star,
            gamma_b,
            log2_n_b: 24.0 / (eps * gamma_b) * lb,
        }
    }
}

/// Case selection on the orders `N_F`, `N_H` (`n = N_F N_H`). With
/// `gate = false` the `N_F >= N_b` requirement is treated as met.
pub fn select_case(n_f: usize, n_h: usize, eps: f64, log2_n_b: f64, gate: bool) -> FamilyCase {
    let ln_n = (n_f as f64).ln() + (n_h as f64).ln();
    let small = |x: usize| (x as f64).ln() <= eps * ln_n + 1e-9;
    let below_gate = gate && (n_f as f64).log2() < log2_n_b;
    if small(n_f) {
        FamilyCase::SmallF
    } else if below_gate {
        FamilyCase::Bounded
    } else if small(n_h) {
        FamilyCase::SmallH
    } else {
        FamilyCase::Both
    }
}

/// Splits the factors into small (`d <= b_*`) and large ones, certifies the
/// small part through bin packing and the large part through bucketing, and
/// joins them according to [`select_case`]. `certs[i]`, when given, is used
/// for large factor `i`.
pub fn hadamard_family_pipeline<F: Field>(
    field: &F,
    matrices: &[DenseMatrix<F>],
    certs: &[Option<LowRankSparseCert<F>>],
    eps: f64,
    b: f64,
    c0: f64,
    opts: &DecompOptions,
) -> Result<(LowRankSparseCert<F>, PipelineReport)> {
    if matrices.is_empty() {
        return Err(Error::InvalidParameter("no factors".into()));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon must lie in (0, 1), got {eps}")));
    }
    let spec = KroneckerSpec::new(field, matrices.to_vec())?;
    let dims = spec.dims();
    let n = spec.order();
    check_cap(n, opts.max_n)?;
    let consts = FamilyConstants::new(b, eps, c0);
    let (small, large): (Vec<usize>, Vec<usize>) = (0..dims.len()).partition(|&i| dims[i] as f64 <= consts.b_star);
    let n_f: usize = small.iter().map(|&i| dims[i]).product();
    let n_h: usize = large.iter().map(|&i| dims[i]).product();
    let case = select_case(n_f, n_h, eps, consts.log2_n_b, opts.gate_asymptotic);
    let mut report = PipelineReport::new("hadamard-family", field.spec(), &dims, eps);
    report.param("b", fmt_f64(b));
    report.param("b_star", fmt_f64(consts.b_star));
    report.param("gamma_b", fmt_f64(consts.gamma_b));
    report.param("log2_N_b", fmt_f64(consts.log2_n_b));
    report.param("c0", fmt_f64(c0));
    report.param("N_F", n_f);
    report.param("N_H", n_h);
    report.param("case", case.name());
    report.param("size_gate", if opts.gate_asymptotic { "enforced" } else { "bypassed" });
    let target = format!("kron{dims:?}");

    if case == FamilyCase::Bounded {
        report
            .notes
            .push("n is bounded in terms of b and eps (N_F below N_b); returning the trivial certificate".into());
        let c = trivial_cert(&spec.materialize_capped(opts.max_n)?, target);
        report.stages.push(Stage::leaf("trivial", claim(&c)));
        report.finish(c.claimed_rank, c.claimed_sparsity);
        return Ok((c, report));
    }

    let mut parts = Vec::new();
    let mut order = Vec::new();
    if !small.is_empty() {
        let mats: Vec<DenseMatrix<F>> = small.iter().map(|&i| matrices[i].clone()).collect();
        let c = if case == FamilyCase::SmallF {
            let sp: Vec<_> = mats.iter().map(DenseMatrix::to_sparse).collect();
            trivial_cert(&kron_chain(field, &sp), "F")
        } else {
            let max_small = small.iter().map(|&i| dims[i]).max().expect("nonempty");
            let sub_opts = DecompOptions {
                bin_cap: Some((consts.b_star.floor() as usize).max(max_small)),
                ..opts.clone()
            };
            let (c, sub) = decompose_unequal(field, &mats, eps, UnequalMode::BinPack, &sub_opts)?;
            report.subreports.push(("F".into(), sub));
            c
        };
        report.stages.push(Stage::leaf(
            if case == FamilyCase::SmallF { "F (trivial)" } else { "F" },
            claim(&c),
        ));
        parts.push(c);
        order.extend(small.iter().copied());
    }
    if !large.is_empty() {
        let c = if case == FamilyCase::SmallH {
            let sp: Vec<_> = large.iter().map(|&i| matrices[i].to_sparse()).collect();
            trivial_cert(&kron_chain(field, &sp), "H")
        } else {
            let mut inputs = Vec::with_capacity(large.len());
            for &i in &large {
                let input = match certs.get(i).cloned().flatten() {
                    Some(cert) => FactorInput {
                        matrix: matrices[i].clone(),
                        cert,
                    },
                    None => FactorInput::with_default_cert(matrices[i].clone(), eps, opts)?,
                };
                inputs.push(input);
            }
            let base = consts.b_star.ceil() as usize;
            let (c, sub) = bucket_pipeline(field, &inputs, eps, base, opts)?;
            report.subreports.push(("H".into(), sub));
            c
        };
        report.stages.push(Stage::leaf(
            if case == FamilyCase::SmallH { "H (trivial)" } else { "H" },
            claim(&c),
        ));
        parts.push(c);
        order.extend(large.iter().copied());
    }
    let (joined, cert) = grouped(&dims, &order, &parts, opts.max_n, target)?;
    report.stages.push(Stage {
        label: "join F and H".into(),
        rule: Rule::Kron,
        inputs: parts.iter().map(claim).collect(),
        output: claim(&joined),
    });
    report.stages.push(Stage {
        label: "restore factor order".into(),
        rule: Rule::Permute,
        inputs: vec![claim(&joined)],
        output: claim(&cert),
    });
    report.finish(cert.claimed_rank, cert.claimed_sparsity);
    Ok((cert, report))
}
