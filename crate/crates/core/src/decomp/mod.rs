//! Constructive decompositions: the G-split, the V-factorization pipeline,
//! bin packing, subset expansion, bucketing and the Hadamard-family
//! pipeline.

mod family;
mod pipeline;
mod split;

use std::fmt::Write as _;

pub use family::{
    bucket_pipeline, buckets, hadamard_family_pipeline, psi_value, select_case, subset_expand_combine, FactorInput,
    FamilyCase, FamilyConstants,
};
pub use pipeline::{bin_pack, choose_offset, decompose_kron_product, decompose_unequal, Bin, UnequalMode};
pub use split::{g_kron_matrix, split_g_kron, GSplit};

use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::matrix::DEFAULT_DIM_CAP;
use crate::predict::fmt_f64;
use crate::score::WeightFn;

#[derive(Clone, Debug, PartialEq)]
pub enum DeltaChoice {
    /// Largest grid offset whose composed sparsity stays within `n^eps`.
    Auto,
    Fixed(f64),
}

#[derive(Clone, Debug)]
pub struct DecompOptions {
    pub delta: DeltaChoice,
    pub weights: WeightFn,
    /// Largest Kronecker order any stage may materialize.
    pub max_n: usize,
    /// Follow the size gates of the family pipeline literally.
    pub gate_asymptotic: bool,
    /// Largest `k` for which subset expansion enumerates all `2^k` terms.
    pub subset_cap: usize,
    /// Bin capacity for bin packing; defaults to the largest dimension.
    pub bin_cap: Option<usize>,
}

impl Default for DecompOptions {
    fn default() -> Self {
        DecompOptions {
            delta: DeltaChoice::Auto,
            weights: WeightFn::Uniform,
            max_n: DEFAULT_DIM_CAP,
            gate_asymptotic: false,
            subset_cap: 16,
            bin_cap: None,
        }
    }
}

/// Claimed `(rank, sparsity)` of a square certificate of order `dim`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Claim {
    pub dim: usize,
    pub rank: usize,
    pub sparsity: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rule {
    /// A certificate built directly (split, monomial, trivial, input).
    Leaf,
    /// `A_1 A_2 ... A_L`: ranks add, sparsities multiply.
    Product,
    /// `A_1 (x) A_2 (x) ...`, folded left to right.
    Kron,
    /// Subset expansion with threshold `tau`; inputs are the factors.
    Subset { tau: usize },
    /// Reordering of Kronecker factors; claims unchanged.
    Permute,
}

impl Rule {
    fn name(&self) -> String {
        match self {
            Rule::Leaf => "leaf".into(),
            Rule::Product => "product".into(),
            Rule::Kron => "kron".into(),
            Rule::Subset { tau } => format!("subset(tau={tau})"),
            Rule::Permute => "permute".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stage {
    pub label: String,
    pub rule: Rule,
    pub inputs: Vec<Claim>,
    pub output: Claim,
}

impl Stage {
    pub fn leaf(label: impl Into<String>, output: Claim) -> Self {
        Stage {
            label: label.into(),
            rule: Rule::Leaf,
            inputs: Vec::new(),
            output,
        }
    }

    /// The output claim the rule predicts from the inputs.
    pub fn expected(&self) -> Option<Claim> {
        match &self.rule {
            Rule::Leaf => Some(self.output),
            Rule::Permute => self.inputs.first().copied(),
            Rule::Product => {
                let first = self.inputs.first()?;
                Some(Claim {
                    dim: first.dim,
                    rank: self.inputs.iter().fold(0usize, |a, c| a.saturating_add(c.rank)),
                    sparsity: self.inputs.iter().fold(1usize, |a, c| a.saturating_mul(c.sparsity)),
                })
            }
            Rule::Kron => {
                let mut it = self.inputs.iter();
                let mut acc = *it.next()?;
                for c in it {
                    acc = Claim {
                        dim: acc.dim.saturating_mul(c.dim),
                        rank: acc.rank.saturating_mul(c.dim).saturating_add(c.rank.saturating_mul(acc.dim)),
                        sparsity: acc.sparsity.saturating_mul(c.sparsity),
                    };
                }
                Some(acc)
            }
            Rule::Subset { tau } => Some(subset_claim(&self.inputs, *tau)),
        }
    }

    pub fn consistent(&self) -> bool {
        self.expected() == Some(self.output)
    }
}

/// Claims of the subset expansion: terms with at least `tau` low-rank
/// factors go to the rank, the others to the sparsity. Terms containing a
/// zero part are skipped.
pub(crate) fn subset_claim(inputs: &[Claim], tau: usize) -> Claim {
    let k = inputs.len();
    let dim = inputs.iter().fold(1usize, |a, c| a.saturating_mul(c.dim));
    let mut rank = 0usize;
    let mut sparsity = 0usize;
    for mask in 0u64..(1u64 << k) {
        let size = mask.count_ones() as usize;
        let in_s = |i: usize| mask >> i & 1 == 1;
        if size >= tau {
            // rank(A_S (x) Z_rest) <= prod r_i * prod d_j
            if (0..k).any(|i| if in_s(i) { inputs[i].rank == 0 } else { inputs[i].sparsity == 0 }) {
                continue;
            }
            let term = (0..k).fold(1usize, |a, i| a.saturating_mul(if in_s(i) { inputs[i].rank } else { inputs[i].dim }));
            rank = rank.saturating_add(term);
        } else {
            if (0..k).any(|i| if in_s(i) { inputs[i].rank == 0 } else { inputs[i].sparsity == 0 }) {
                continue;
            }
            let term = (0..k).fold(1usize, |a, i| {
                a.saturating_mul(if in_s(i) { inputs[i].dim } else { inputs[i].sparsity })
            });
            sparsity = sparsity.saturating_add(term);
        }
    }
    Claim { dim, rank, sparsity }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineReport {
    pub mode: String,
    pub field: FieldSpec,
    pub dims: Vec<usize>,
    pub n: usize,
    pub epsilon: f64,
    pub params: Vec<(String, String)>,
    pub stages: Vec<Stage>,
    pub subreports: Vec<(String, PipelineReport)>,
    pub final_rank: usize,
    pub final_sparsity: usize,
    pub notes: Vec<String>,
}

impl PipelineReport {
    pub(crate) fn new(mode: &str, field: FieldSpec, dims: &[usize], epsilon: f64) -> Self {
        PipelineReport {
            mode: mode.to_string(),
            field,
            dims: dims.to_vec(),
            n: dims.iter().product(),
            epsilon,
            params: Vec::new(),
            stages: Vec::new(),
            subreports: Vec::new(),
            final_rank: 0,
            final_sparsity: 0,
            notes: Vec::new(),
        }
    }

    pub(crate) fn param(&mut self, key: &str, value: impl ToString) {
        self.params.push((key.to_string(), value.to_string()));
    }

    pub(crate) fn finish(&mut self, rank: usize, sparsity: usize) {
        self.final_rank = rank;
        self.final_sparsity = sparsity;
    }

    pub fn get_param(&self, key: &str) -> Option<&str> {
        self.params.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// `log_n r` (0 when `r = 0`).
    pub fn rank_exponent(&self) -> f64 {
        log_ratio(self.final_rank, self.n)
    }

    pub fn sparsity_exponent(&self) -> f64 {
        log_ratio(self.final_sparsity, self.n)
    }

    /// Every stage matches its rule, the last stage carries the final
    /// claims, and every sub-report is consistent as well.
    pub fn ledger_consistent(&self) -> bool {
        let stages_ok = self.stages.iter().all(Stage::consistent);
        let final_ok = match self.stages.last() {
            Some(s) => s.output.rank == self.final_rank && s.output.sparsity == self.final_sparsity,
            None => true,
        };
        stages_ok && final_ok && self.subreports.iter().all(|(_, r)| r.ledger_consistent())
    }

    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        self.write_kv(&mut s, "");
        s
    }

    fn write_kv(&self, s: &mut String, prefix: &str) {
        let dims: Vec<String> = self.dims.iter().map(|d| d.to_string()).collect();
        let _ = writeln!(s, "{prefix}mode: {}", self.mode);
        let _ = writeln!(s, "{prefix}field: {}", self.field);
        let _ = writeln!(s, "{prefix}dims: {}", dims.join(","));
        let _ = writeln!(s, "{prefix}n: {}", self.n);
        let _ = writeln!(s, "{prefix}epsilon: {}", fmt_f64(self.epsilon));
        for (k, v) in &self.params {
            let _ = writeln!(s, "{prefix}{k}: {v}");
        }
        for (i, st) in self.stages.iter().enumerate() {
            let _ = writeln!(
                s,
                "{prefix}stage.{i}: {} rule={} dim={} rank={} sparsity={}",
                st.label,
                st.rule.name(),
                st.output.dim,
                st.output.rank,
                st.output.sparsity
            );
        }
        for (name, sub) in &self.subreports {
            sub.write_kv(s, &format!("{prefix}{name}."));
        }
        let _ = writeln!(s, "{prefix}final_rank: {}", self.final_rank);
        let _ = writeln!(s, "{prefix}final_sparsity: {}", self.final_sparsity);
        let _ = writeln!(s, "{prefix}rank_exponent: {}", fmt_f64(self.rank_exponent()));
        let _ = writeln!(s, "{prefix}sparsity_exponent: {}", fmt_f64(self.sparsity_exponent()));
        let _ = writeln!(s, "{prefix}ledger_consistent: {}", self.ledger_consistent());
        for note in &self.notes {
            let _ = writeln!(s, "{prefix}note: {note}");
        }
    }
}

fn log_ratio(x: usize, n: usize) -> f64 {
    if x == 0 || n < 2 {
        0.0
    } else {
        (x as f64).ln() / (n as f64).ln()
    }
}

/// Index map `phi` with `K[i, j] = K'[phi(i), phi(j)]`, where `K'` is the
/// Kronecker product of the same factors taken in `order`.
pub fn regroup_map(dims: &[usize], order: &[usize]) -> Result<Vec<usize>> {
    let mut seen = vec![false; dims.len()];
    if order.len() != dims.len() || order.iter().any(|&i| i >= dims.len() || std::mem::replace(&mut seen[i], true)) {
        return Err(Error::InvalidPermutation(format!("{order:?} does not reorder {} factors", dims.len())));
    }
    let n: usize = dims.iter().product();
    let src = crate::matrix::MixedRadix::new(dims)?;
    let new_dims: Vec<usize> = order.iter().map(|&i| dims[i]).collect();
    let dst = crate::matrix::MixedRadix::new(&new_dims)?;
    Ok((0..n)
        .map(|idx| {
            let t = src.decode(idx);
            let reordered: Vec<usize> = order.iter().map(|&i| t[i]).collect();
            dst.encode(&reordered).expect("digits in range")
        })
        .collect())
}
