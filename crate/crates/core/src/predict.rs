//! Analytic parameter prediction for the score split of unequal-size
//! Kronecker products.
//!
//! `K` and `L` are the tightest constants in the two conditions
//! `m <= K * Lambda * w(d_1) / d_k` and `m >= L * Lambda * w(d_k) / d_k`,
//! where `m` is the mean score and `Lambda = sum ln d_i / ln d_k`.

use std::fmt::Write as _;

use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::field::{format_rational, rational_to_f64};
use crate::score::{
    bernstein_general, ln_binom_sum_bound, offset_grid, split_counts, ScoreProfile, SplitCounts, WeightFn,
    GRID_POINTS,
};

#[derive(Clone, Debug, PartialEq)]
pub struct PredictConfig {
    /// The unspecified absolute constant in the `gamma` formula.
    pub c: f64,
    pub grid_points: usize,
    /// Also compute exact counts at the chosen offset.
    pub exact: bool,
}

impl Default for PredictConfig {
    fn default() -> Self {
        PredictConfig {
            c: 1.0,
            grid_points: GRID_POINTS,
            exact: true,
        }
    }
}

/// Predicted quantities at one grid point, as natural logarithms.
#[derive(Clone, Debug, PartialEq)]
pub struct PredictedPoint {
    pub index: usize,
    pub delta: f64,
    pub offset: f64,
    pub t_max: usize,
    pub ln_c: f64,
    pub ln_r: f64,
    pub ln_rank: f64,
    pub ln_m_c: f64,
    pub ln_m_r: f64,
    pub ln_sparsity: f64,
    /// Sparsity within `n^eps` and a rank bound below `n`.
    pub feasible: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParameterReport {
    pub dims: Vec<usize>,
    pub eps: f64,
    pub uniform_weights: bool,
    pub ln_n: f64,
    pub mean: BigRational,
    pub variance: BigRational,
    pub lambda: f64,
    pub k_min: f64,
    pub l_max: f64,
    pub conditions_hold: (bool, bool),
    pub grid: Vec<PredictedPoint>,
    pub chosen: Option<usize>,
    pub exact: Option<SplitCounts>,
    pub c: f64,
    pub gamma: f64,
}

/// `Lambda = sum ln d_i / ln d_k`.
pub fn log_ratio_sum(dims: &[usize]) -> f64 {
    let dk = *dims.iter().max().expect("nonempty") as f64;
    dims.iter().map(|&d| (d as f64).ln()).sum::<f64>() / dk.ln()
}

/// Direct evaluation of the two conditions for given `K` and `L`.
pub fn check_conditions(profile: &ScoreProfile, k: f64, l: f64) -> (bool, bool) {
    let dims = profile.dims();
    let dk = profile.max_dim();
    let d1 = *dims.iter().min().expect("nonempty");
    let w = |d: usize| {
        let i = dims.iter().position(|&x| x == d).expect("present");
        rational_to_f64(&profile.weights()[i])
    };
    let m = rational_to_f64(profile.mean());
    let lam = log_ratio_sum(dims);
    // Relative slack absorbs rounding in the floating-point evaluation.
    let tol = 1e-12 * m.abs().max(1.0);
    let cond_i = m <= k * lam * w(d1) / dk as f64 + tol;
    let cond_ii = m + tol >= l * lam * w(dk) / dk as f64;
    (cond_i, cond_ii)
}

/// `gamma = c L eps^2 / (d_k ln d_k K^2 ln^2(K / eps))`.
pub fn gamma_formula(c: f64, k: f64, l: f64, eps: f64, dk: usize) -> f64 {
    let dk = dk as f64;
    let lk = (k / eps).ln();
    c * l * eps * eps / (dk * dk.ln() * k * k * lk * lk)
}

pub fn predict_parameters(dims: &[usize], eps: f64, w: &WeightFn, cfg: &PredictConfig) -> Result<ParameterReport> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon must lie in (0, 1), got {eps}")));
    }
    let mut sorted = dims.to_vec();
    sorted.sort_unstable();
    let profile = ScoreProfile::new(&sorted, w)?;
    let k = sorted.len();
    let d1 = sorted[0];
    let dk = sorted[k - 1];
    let w1 = rational_to_f64(&w.weight(d1)?);
    let wk = rational_to_f64(&w.weight(dk)?);
    let m = rational_to_f64(profile.mean());
    let var = rational_to_f64(profile.variance());
    let lambda = log_ratio_sum(&sorted);
    let k_min = m * dk as f64 / (lambda * w1);
    let l_max = m * dk as f64 / (lambda * wk);
    let ln_n: f64 = sorted.iter().map(|&d| (d as f64).ln()).sum();
    let w_min = profile
        .weights()
        .iter()
        .map(rational_to_f64)
        .fold(f64::INFINITY, f64::min);
    let dev_bound = sorted
        .iter()
        .zip(profile.weights())
        .map(|(&d, wt)| rational_to_f64(wt) * (1.0 - 1.0 / d as f64))
        .fold(0.0, f64::max);

    let points = offset_grid(&profile, eps, cfg.grid_points)?;
    let mut grid = Vec::with_capacity(points.len());
    for (index, pt) in points.iter().enumerate() {
        let off = rational_to_f64(&pt.offset);
        let ln_tail = bernstein_general(var, dev_bound, off).ln();
        let ln_c = ln_n + ln_tail;
        let ln_r = ln_n + ln_tail;
        let ln_rank = ln_c + std::f64::consts::LN_2;
        // Columns reachable from a surviving row differ on a set of maximal
        // coordinates of total weight at most 2 * offset.
        let t_max = ((2.0 * off / w_min) + 1e-12).floor() as usize;
        let t_r = t_max.min(k);
        let ln_m_r = if t_r == k {
            k as f64 * std::f64::consts::LN_2
        } else {
            ln_binom_sum_bound(k as f64, t_r as f64)
        };
        let s_max = (((m + off) / w_min) + 1e-12).floor().min(k as f64);
        let t_c = (t_max as f64).min(s_max);
        let ln_m_c = if t_c <= 0.0 {
            0.0
        } else {
            let choose = if t_c >= s_max {
                s_max * std::f64::consts::LN_2
            } else {
                ln_binom_sum_bound(s_max, t_c)
            };
            t_c * ((dk - 1) as f64).ln() + choose
        };
        let ln_sparsity = ln_m_c.max(ln_m_r);
        grid.push(PredictedPoint {
            index,
            delta: pt.delta,
            offset: off,
            t_max,
            ln_c,
            ln_r,
            ln_rank,
            ln_m_c,
            ln_m_r,
            ln_sparsity,
            // A rank bound of n or more certifies nothing.
            feasible: ln_sparsity <= eps * ln_n + 1e-12 && ln_rank < ln_n,
        });
    }
    let chosen = grid
        .iter()
        .filter(|p| p.feasible)
        .min_by(|a, b| a.ln_rank.total_cmp(&b.ln_rank).then(a.index.cmp(&b.index)))
        .map(|p| p.index);
    let exact = match (cfg.exact, chosen) {
        (true, Some(i)) => split_counts(&profile, &points[i].offset).ok(),
        _ => None,
    };
    Ok(ParameterReport {
        dims: sorted,
        eps,
        uniform_weights: w.is_uniform(),
        ln_n,
        mean: profile.mean().clone(),
        variance: profile.variance().clone(),
        lambda,
        k_min,
        l_max,
        conditions_hold: check_conditions(&profile, k_min, l_max),
        grid,
        chosen,
        exact,
        c: cfg.c,
        gamma: gamma_formula(cfg.c, k_min, l_max, eps, dk),
    })
}

pub(crate) fn fmt_f64(x: f64) -> String {
    if x.is_finite() && x != 0.0 && (x.abs() >= 1e9 || x.abs() < 1e-4) {
        format!("{x:.6e}")
    } else {
        format!("{x:.6}")
    }
}

impl ParameterReport {
    pub fn feasible(&self) -> bool {
        self.chosen.is_some()
    }

    pub fn chosen_point(&self) -> Option<&PredictedPoint> {
        self.chosen.map(|i| &self.grid[i])
    }

    /// Key-value text block, one `key: value` per line.
    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        let dims: Vec<String> = self.dims.iter().map(|d| d.to_string()).collect();
        let dk = *self.dims.last().expect("nonempty");
        let _ = writeln!(s, "dims: {}", dims.join(","));
        let _ = writeln!(s, "k: {}", self.dims.len());
        let _ = writeln!(s, "epsilon: {}", fmt_f64(self.eps));
        let _ = writeln!(s, "weights: {}", if self.uniform_weights { "uniform" } else { "table" });
        let _ = writeln!(s, "log_n: {}", fmt_f64(self.ln_n));
        let _ = writeln!(s, "mean_score: {}", format_rational(&self.mean));
        let _ = writeln!(s, "variance: {}", format_rational(&self.variance));
        let _ = writeln!(s, "log_ratio_sum: {}", fmt_f64(self.lambda));
        let _ = writeln!(s, "K: {}", fmt_f64(self.k_min));
        let _ = writeln!(s, "L: {}", fmt_f64(self.l_max));
        let _ = writeln!(s, "condition_i: {}", self.conditions_hold.0);
        let _ = writeln!(s, "condition_ii: {}", self.conditions_hold.1);
        match self.chosen_point() {
            Some(p) => {
                let _ = writeln!(s, "verdict: feasible");
                let _ = writeln!(s, "delta: {}", fmt_f64(p.delta));
                let _ = writeln!(s, "offset: {}", fmt_f64(p.offset));
                let _ = writeln!(s, "predicted_rank: {}", fmt_f64(p.ln_rank.exp()));
                let _ = writeln!(s, "predicted_rank_exponent: {}", fmt_f64(p.ln_rank / self.ln_n));
                let _ = writeln!(s, "predicted_sparsity: {}", fmt_f64(p.ln_sparsity.exp()));
                let _ = writeln!(s, "predicted_sparsity_exponent: {}", fmt_f64(p.ln_sparsity / self.ln_n));
                let layers = 2 * (dk - 1);
                let ln_final_rank = (layers as f64).ln() + p.ln_rank;
                let _ = writeln!(s, "predicted_final_rank: {}", fmt_f64(ln_final_rank.exp()));
                let _ = writeln!(
                    s,
                    "predicted_final_sparsity_exponent: {}",
                    fmt_f64(layers as f64 * p.ln_sparsity / self.ln_n)
                );
            }
            None => {
                let _ = writeln!(s, "verdict: infeasible");
            }
        }
        if let Some(e) = &self.exact {
            let _ = writeln!(s, "exact_c_size: {}", e.c_size);
            let _ = writeln!(s, "exact_r_size: {}", e.r_size);
            let _ = writeln!(s, "exact_m_c: {}", e.m_c);
            let _ = writeln!(s, "exact_m_r: {}", e.m_r);
        }
        let _ = writeln!(s, "gamma_constant_c: {}", fmt_f64(self.c));
        let _ = writeln!(s, "gamma: {}", fmt_f64(self.gamma));
        let _ = writeln!(s, "gamma_note: asymptotic only; c is a configured stand-in for an unspecified constant");
        s
    }
}
