use num_rational::BigRational;

use super::{regroup_map, split::split_g_kron, Claim, DecompOptions, DeltaChoice, PipelineReport, Rule, Stage};
use crate::cert::{compose_product, monomial_cert, permute_cert, transpose_cert, zero_cert, LowRankSparseCert};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::matrix::{kron::check_cap, DenseMatrix, KroneckerSpec, MonomialMatrix};
use crate::predict::fmt_f64;
use crate::score::{offset_for_delta, offset_grid, split_counts, ScoreProfile, GRID_POINTS};
use crate::vfactor::{layer_kind, pad_factorization, v_factor_full, FactorKind, VFactor};

fn claim<F: Field>(c: &LowRankSparseCert<F>) -> Claim {
    Claim {
        dim: c.rows,
        rank: c.claimed_rank,
        sparsity: c.claimed_sparsity,
    }
}

/// Picks the split offset for `layers` G-layers sharing `profile`.
///
/// Returns `(delta, offset, met)`: the largest grid offset whose composed
/// sparsity `t^layers` is at most `n^eps`, or the smallest grid offset
/// (least sparsity) with `met = false` when none qualifies.
pub fn choose_offset(profile: &ScoreProfile, eps: f64, layers: usize) -> Result<(f64, BigRational, bool)> {
    let grid = offset_grid(profile, eps, GRID_POINTS)?;
    let n = profile.order().map(|n| n as f64).unwrap_or(f64::INFINITY);
    let budget = eps * n.ln() + 1e-9;
    let mut best = None;
    for p in &grid {
        let counts = split_counts(profile, &p.offset)?;
        let t = counts.sparsity().max(1) as f64;
        if layers as f64 * t.ln() <= budget {
            best = Some((p.delta, p.offset.clone(), true));
        }
    }
    match best {
        Some(b) => Ok(b),
        None => {
            let p = &grid[0];
            Ok((p.delta, p.offset.clone(), false))
        }
    }
}

/// End-to-end certificate for a Kronecker product through V-factorization
/// of each factor, one split per G-layer and a product fold.
pub fn decompose_kron_product<F: Field>(
    spec: &KroneckerSpec<F>,
    eps: f64,
    opts: &DecompOptions,
) -> Result<(LowRankSparseCert<F>, PipelineReport)> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon must lie in (0, 1), got {eps}")));
    }
    let f = spec.field();
    let dims = spec.dims();
    let n = spec.order();
    check_cap(n, opts.max_n)?;
    let mut report = PipelineReport::new("kron-product", f.spec(), &dims, eps);
    let target = format!("kron{dims:?}");
    if spec.factors().iter().any(DenseMatrix::is_zero) {
        report.notes.push("zero factor: target is the zero matrix".into());
        let c = zero_cert(f, n, n, target);
        report.stages.push(Stage::leaf("zero", claim(&c)));
        report.finish(0, 0);
        return Ok((c, report));
    }
    let big_d = *dims.iter().max().expect("nonempty");
    let layers = 4 * big_d - 3;
    let split_layers = 2 * (big_d - 1);
    let profile = ScoreProfile::new(&dims, &opts.weights)?;
    let (delta, offset, met) = match opts.delta {
        DeltaChoice::Auto => choose_offset(&profile, eps, split_layers)?,
        DeltaChoice::Fixed(d) => (d, offset_for_delta(&profile, d)?, true),
    };
    report.param("weights", if opts.weights.is_uniform() { "uniform" } else { "table" });
    report.param("delta", fmt_f64(delta));
    report.param("offset", &offset);
    report.param("layers", layers);
    report.param("split_layers", split_layers);
    if !met {
        report.notes.push(format!(
            "no grid offset keeps the composed sparsity within n^{}; using the densest split",
            fmt_f64(eps)
        ));
    }

    let mut facts = Vec::with_capacity(dims.len());
    for (i, m) in spec.factors().iter().enumerate() {
        let fact = v_factor_full(m)?;
        if fact.product() != m.to_sparse() {
            return Err(Error::LayerReconstruction(format!("V-factorization of factor {i} does not reproduce it")));
        }
        facts.push(pad_factorization(&fact, big_d)?);
    }

    let mut acc: Option<LowRankSparseCert<F>> = None;
    let mut leaf_claims = Vec::with_capacity(layers);
    for pos in 0..layers {
        let kind = layer_kind(big_d, pos);
        let parts: Vec<&VFactor<F>> = facts.iter().map(|fa| &fa.factors()[pos]).collect();
        if let Some((i, p)) = parts.iter().enumerate().find(|(_, p)| p.kind() != kind) {
            return Err(Error::LayerReconstruction(format!(
                "layer {pos}: factor {i} has kind {:?}, expected {kind:?}",
                p.kind()
            )));
        }
        let (cert, label) = match kind {
            FactorKind::Monomial | FactorKind::Diagonal => {
                let mut m = MonomialMatrix::identity(f, 1);
                for p in &parts {
                    let pm = match p {
                        VFactor::Monomial(x) => x.clone(),
                        VFactor::Diagonal(d) => MonomialMatrix::diagonal(d.clone()),
                        _ => unreachable!("kind checked"),
                    };
                    m = m.kron(f, &pm);
                }
                let label = if kind == FactorKind::Diagonal { "diagonal" } else { "monomial" };
                (monomial_cert(f, &m, format!("layer {pos}")), label)
            }
            FactorKind::V | FactorKind::VTransposed => {
                let xs: Vec<Vec<F::Elem>> = parts
                    .iter()
                    .map(|p| match p {
                        VFactor::V(x) | VFactor::VTransposed(x) => x.clone(),
                        _ => unreachable!("kind checked"),
                    })
                    .collect();
                let split = split_g_kron(f, &xs, &profile, &offset, opts.max_n)?;
                let c = split
                    .cert
                    .ok_or_else(|| Error::LayerReconstruction(format!("layer {pos}: split above size cap")))?;
                if kind == FactorKind::VTransposed {
                    (transpose_cert(&c), "split-transposed")
                } else {
                    (c, "split")
                }
            }
        };
        let expected = parts
            .iter()
            .map(|p| p.to_sparse(f))
            .fold(crate::matrix::SparseMatrix::identity(f, 1), |a, b| a.kron(&b));
        if cert.reconstruct().as_ref() != Some(&expected) {
            return Err(Error::LayerReconstruction(format!("layer {pos} ({label}) does not reconstruct")));
        }
        let cert = cert.with_target(format!("layer {pos}"));
        leaf_claims.push(claim(&cert));
        report.stages.push(Stage::leaf(format!("layer {pos} {label}"), claim(&cert)));
        acc = Some(match acc {
            None => cert,
            Some(a) => compose_product(&a, &cert)?,
        });
    }
    let cert = acc.expect("at least one layer").with_target(target);
    report.stages.push(Stage {
        label: "product of layers".into(),
        rule: Rule::Product,
        inputs: leaf_claims,
        output: claim(&cert),
    });
    report.finish(cert.claimed_rank, cert.claimed_sparsity);
    Ok((cert, report))
}

/// A bin of factor indices and the product of their dimensions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bin {
    pub members: Vec<usize>,
    pub product: usize,
}

/// First-fit decreasing packing of `dims` into bins of product at most
/// `cap`. Members within a bin keep their input order.
pub fn bin_pack(dims: &[usize], cap: usize) -> Result<Vec<Bin>> {
    if let Some(&d) = dims.iter().find(|&&d| d > cap) {
        return Err(Error::InvalidParameter(format!("dimension {d} exceeds the bin capacity {cap}")));
    }
    let mut order: Vec<usize> = (0..dims.len()).collect();
    order.sort_by(|&a, &b| dims[b].cmp(&dims[a]).then(a.cmp(&b)));
    let mut bins: Vec<Bin> = Vec::new();
    for i in order {
        match bins.iter_mut().find(|b| b.product.checked_mul(dims[i]).is_some_and(|p| p <= cap)) {
            Some(b) => {
                b.members.push(i);
                b.product *= dims[i];
            }
            None => bins.push(Bin {
                members: vec![i],
                product: dims[i],
            }),
        }
    }
    for b in &mut bins {
        b.members.sort_unstable();
    }
    Ok(bins)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnequalMode {
    Direct,
    BinPack,
}

/// Kronecker product of factors of unequal sizes, either directly or
/// after grouping them into bins.
pub fn decompose_unequal<F: Field>(
    field: &F,
    matrices: &[DenseMatrix<F>],
    eps: f64,
    mode: UnequalMode,
    opts: &DecompOptions,
) -> Result<(LowRankSparseCert<F>, PipelineReport)> {
    let spec = KroneckerSpec::new(field, matrices.to_vec())?;
    check_cap(spec.order(), opts.max_n)?;
    if mode == UnequalMode::Direct || matrices.len() == 1 {
        let (c, mut r) = decompose_kron_product(&spec, eps, opts)?;
        r.mode = "unequal-direct".into();
        return Ok((c, r));
    }
    let dims = spec.dims();
    let cap = opts.bin_cap.unwrap_or_else(|| *dims.iter().max().expect("nonempty"));
    let bins = bin_pack(&dims, cap)?;
    let order: Vec<usize> = bins.iter().flat_map(|b| b.members.iter().copied()).collect();
    let grouped: Vec<DenseMatrix<F>> = bins
        .iter()
        .map(|b| {
            b.members[1..]
                .iter()
                .fold(matrices[b.members[0]].clone(), |acc, &i| acc.kron(&matrices[i]))
        })
        .collect();
    let grouped_spec = KroneckerSpec::new(field, grouped)?;
    let (inner, sub) = decompose_kron_product(&grouped_spec, eps, opts)?;
    let phi = regroup_map(&dims, &order)?;
    let cert = permute_cert(&inner, &phi, &phi)?.with_target(format!("kron{dims:?}"));

    let mut report = PipelineReport::new("unequal-binpack", field.spec(), &dims, eps);
    report.param("bin_cap", cap);
    let desc: Vec<String> = bins
        .iter()
        .map(|b| {
            let ds: Vec<String> = b.members.iter().map(|&i| dims[i].to_string()).collect();
            format!("{{{}}}", ds.join(","))
        })
        .collect();
    report.param("bins", desc.join(" "));
    report.stages.push(Stage {
        label: "regroup bins".into(),
        rule: Rule::Permute,
        inputs: vec![claim(&inner)],
        output: claim(&cert),
    });
    report.subreports.push(("grouped".into(), sub));
    report.finish(cert.claimed_rank, cert.claimed_sparsity);
    Ok((cert, report))
}
