//! Scores of index tuples, the high/low threshold sets, their neighborhood
//! counts, and the analytic tail bounds used to predict them.
//!
//! Tuples are 0-based: coordinate `i` is "maximal" when it equals `d_i - 1`.
//! Every count here is exact. Counting works on *profiles*: coordinates are
//! grouped into classes of equal `(d, w)`, and a profile records how many
//! coordinates of each class are maximal, which is all the score depends on.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::field::{rational_from_f64, rational_to_f64};
use crate::matrix::MixedRadix;

/// Tuples are listed explicitly up to this many indices.
pub const EXPLICIT_LIMIT: usize = 1_000_000;

/// Profile enumeration refuses to go past this many profiles.
pub const PROFILE_LIMIT: usize = 4_000_000;

/// Weight function `w` on dimensions.
#[derive(Clone, Debug, PartialEq, Default)]
pub enum WeightFn {
    #[default]
    Uniform,
    Table(BTreeMap<usize, BigRational>),
}

impl WeightFn {
    /// Checks `w >= 1` and that `w` is non-decreasing.
    pub fn table(entries: BTreeMap<usize, BigRational>) -> Result<Self> {
        let mut prev: Option<(&usize, &BigRational)> = None;
        for (d, w) in &entries {
            if *w < BigRational::one() {
                return Err(Error::InvalidWeights(format!("w({d}) = {w} is below 1")));
            }
            if let Some((pd, pw)) = prev {
                if w < pw {
                    return Err(Error::InvalidWeights(format!(
                        "w is decreasing: w({pd}) = {pw} > w({d}) = {w}"
                    )));
                }
            }
            prev = Some((d, w));
        }
        Ok(WeightFn::Table(entries))
    }

    pub fn weight(&self, d: usize) -> Result<BigRational> {
        match self {
            WeightFn::Uniform => Ok(BigRational::one()),
            WeightFn::Table(t) => t
                .get(&d)
                .cloned()
                .ok_or_else(|| Error::InvalidWeights(format!("no weight given for dimension {d}"))),
        }
    }

    pub fn is_uniform(&self) -> bool {
        match self {
            WeightFn::Uniform => true,
            WeightFn::Table(t) => t.values().all(|w| w.is_one()),
        }
    }
}

/// One class of coordinates sharing dimension and weight.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Class {
    pub dim: usize,
    pub weight: BigRational,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScoreProfile {
    dims: Vec<usize>,
    weights: Vec<BigRational>,
    mean: BigRational,
    variance: BigRational,
    classes: Vec<Class>,
    class_of: Vec<usize>,
}

impl ScoreProfile {
    pub fn new(dims: &[usize], w: &WeightFn) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidParameter("empty dimension vector".into()));
        }
        if let Some(&d) = dims.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidParameter(format!("dimension {d} is below 2")));
        }
        let weights = dims.iter().map(|&d| w.weight(d)).collect::<Result<Vec<_>>>()?;
        let mut sorted: Vec<(usize, &BigRational)> = dims.iter().copied().zip(&weights).collect();
        sorted.sort_by(|a, b| a.0.cmp(&b.0));
        for pair in sorted.windows(2) {
            if pair[1].1 < pair[0].1 {
                return Err(Error::InvalidWeights(format!(
                    "w is decreasing between dimensions {} and {}",
                    pair[0].0, pair[1].0
                )));
            }
        }
        if let Some(bad) = weights.iter().find(|w| **w < BigRational::one()) {
            return Err(Error::InvalidWeights(format!("weight {bad} is below 1")));
        }
        let (mean, variance) = moments(dims, &weights);
        let mut classes: Vec<Class> = Vec::new();
        let mut class_of = Vec::with_capacity(dims.len());
        for (&d, wt) in dims.iter().zip(&weights) {
            let idx = match classes.iter().position(|c| c.dim == d && c.weight == *wt) {
                Some(i) => i,
                None => {
                    classes.push(Class {
                        dim: d,
                        weight: wt.clone(),
                        count: 0,
                    });
                    classes.len() - 1
                }
            };
            classes[idx].count += 1;
            class_of.push(idx);
        }
        Ok(ScoreProfile {
            dims: dims.to_vec(),
            weights,
            mean,
            variance,
            classes,
            class_of,
        })
    }

    pub fn uniform(dims: &[usize]) -> Result<Self> {
        Self::new(dims, &WeightFn::Uniform)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }
    pub fn weights(&self) -> &[BigRational] {
        &self.weights
    }
    pub fn mean(&self) -> &BigRational {
        &self.mean
    }
    pub fn variance(&self) -> &BigRational {
        &self.variance
    }
    pub fn classes(&self) -> &[Class] {
        &self.classes
    }
    pub fn k(&self) -> usize {
        self.dims.len()
    }

    /// `n` as an exact integer, or `None` if it overflows `u128`.
    pub fn order(&self) -> Option<u128> {
        self.dims.iter().try_fold(1u128, |acc, &d| acc.checked_mul(d as u128))
    }

    pub fn max_dim(&self) -> usize {
        *self.dims.iter().max().expect("nonempty")
    }

    /// Recomputes mean and variance from the dimensions and compares.
    pub fn is_consistent(&self) -> bool {
        moments(&self.dims, &self.weights) == (self.mean.clone(), self.variance.clone())
    }

    pub fn score(&self, tuple: &[usize]) -> Result<BigRational> {
        if tuple.len() != self.dims.len() {
            return Err(Error::DimensionMismatch(format!(
                "tuple of length {} for {} coordinates",
                tuple.len(),
                self.dims.len()
            )));
        }
        let mut s = BigRational::zero();
        for ((&x, &d), w) in tuple.iter().zip(&self.dims).zip(&self.weights) {
            if x >= d {
                return Err(Error::OutOfRange { index: x, bound: d });
            }
            if x == d - 1 {
                s += w;
            }
        }
        Ok(s)
    }

    /// Number of maximal coordinates of the tuple in each class.
    fn profile_of(&self, tuple: &[usize]) -> Vec<usize> {
        let mut a = vec![0; self.classes.len()];
        for (i, &x) in tuple.iter().enumerate() {
            if x + 1 == self.dims[i] {
                a[self.class_of[i]] += 1;
            }
        }
        a
    }

    fn profile_radix(&self) -> Result<MixedRadix> {
        let sizes: Vec<usize> = self.classes.iter().map(|c| c.count + 1).collect();
        let radix = MixedRadix::new(&sizes)?;
        if radix.size() > PROFILE_LIMIT {
            return Err(Error::SizeCap {
                size: radix.size(),
                cap: PROFILE_LIMIT,
            });
        }
        Ok(radix)
    }

    fn profile_score(&self, a: &[usize]) -> BigRational {
        a.iter()
            .zip(&self.classes)
            .fold(BigRational::zero(), |acc, (&ai, c)| acc + &c.weight * BigInt::from(ai))
    }
}

fn moments(dims: &[usize], weights: &[BigRational]) -> (BigRational, BigRational) {
    let mut mean = BigRational::zero();
    let mut var = BigRational::zero();
    for (&d, w) in dims.iter().zip(weights) {
        let d = BigInt::from(d);
        mean += w / &d;
        var += w * w * (&d - 1) / (&d * &d);
    }
    (mean, var)
}

pub fn binomial(n: usize, k: usize) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

fn overflow() -> Error {
    Error::SizeCap {
        size: usize::MAX,
        cap: u128::MAX as usize,
    }
}

fn pow(base: usize, e: usize) -> Result<u128> {
    (base as u128).checked_pow(e as u32).ok_or_else(overflow)
}

/// Exact cardinalities and neighborhood maxima at one offset.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SplitCounts {
    pub c_size: u128,
    pub r_size: u128,
    pub m_c: u128,
    pub m_r: u128,
}

impl SplitCounts {
    pub fn rank(&self) -> u128 {
        self.c_size + self.r_size
    }
    pub fn sparsity(&self) -> u128 {
        self.m_c.max(self.m_r)
    }
}

/// High-score set `C = {s >= m + offset}` and low-score set
/// `R = {s <= m - offset}`.
#[derive(Clone, Debug)]
pub struct ThresholdSets {
    profile: ScoreProfile,
    offset: BigRational,
    hi: BigRational,
    lo: BigRational,
    radix: MixedRadix,
    in_c: Vec<bool>,
    in_r: Vec<bool>,
    counts: SplitCounts,
    explicit: Option<(Vec<usize>, Vec<usize>)>,
}

impl ThresholdSets {
    pub fn profile(&self) -> &ScoreProfile {
        &self.profile
    }
    pub fn offset(&self) -> &BigRational {
        &self.offset
    }
    pub fn counts(&self) -> SplitCounts {
        self.counts
    }
    pub fn c_size(&self) -> u128 {
        self.counts.c_size
    }
    pub fn r_size(&self) -> u128 {
        self.counts.r_size
    }

    /// Sorted member indices when `n` is small enough to list.
    pub fn c_indices(&self) -> Option<&[usize]> {
        self.explicit.as_ref().map(|(c, _)| c.as_slice())
    }
    pub fn r_indices(&self) -> Option<&[usize]> {
        self.explicit.as_ref().map(|(_, r)| r.as_slice())
    }

    pub fn contains_c(&self, tuple: &[usize]) -> bool {
        let a = self.profile.profile_of(tuple);
        self.in_c[self.radix.encode(&a).expect("valid profile")]
    }

    pub fn contains_r(&self, tuple: &[usize]) -> bool {
        let a = self.profile.profile_of(tuple);
        self.in_r[self.radix.encode(&a).expect("valid profile")]
    }

    /// Membership flags `(in C, in R)` for every index in `0..n`.
    pub fn membership(&self) -> Result<(Vec<bool>, Vec<bool>)> {
        let n = self.profile.order().ok_or_else(overflow)?;
        if n > EXPLICIT_LIMIT as u128 {
            return Err(Error::SizeCap {
                size: n as usize,
                cap: EXPLICIT_LIMIT,
            });
        }
        let radix = MixedRadix::new(&self.profile.dims)?;
        let mut c = Vec::with_capacity(n as usize);
        let mut r = Vec::with_capacity(n as usize);
        for idx in 0..n as usize {
            let a = self.profile.profile_of(&radix.decode(idx));
            let p = self.radix.encode(&a).expect("valid profile");
            c.push(self.in_c[p]);
            r.push(self.in_r[p]);
        }
        Ok((c, r))
    }

    pub fn hi(&self) -> &BigRational {
        &self.hi
    }
    pub fn lo(&self) -> &BigRational {
        &self.lo
    }
}

/// Builds the threshold sets at `offset > 0`, with exact counts.
pub fn threshold_sets(profile: &ScoreProfile, offset: &BigRational) -> Result<ThresholdSets> {
    if !offset.is_positive() {
        return Err(Error::InvalidParameter(format!("offset must be positive, got {offset}")));
    }
    let hi = profile.mean() + offset;
    let lo = profile.mean() - offset;
    let radix = profile.profile_radix()?;
    let mut in_c = Vec::with_capacity(radix.size());
    let mut in_r = Vec::with_capacity(radix.size());
    for p in 0..radix.size() {
        let s = profile.profile_score(&radix.decode(p));
        in_c.push(s >= hi);
        in_r.push(s <= lo);
    }
    let mut sets = ThresholdSets {
        profile: profile.clone(),
        offset: offset.clone(),
        hi,
        lo,
        radix,
        in_c,
        in_r,
        counts: SplitCounts {
            c_size: 0,
            r_size: 0,
            m_c: 0,
            m_r: 0,
        },
        explicit: None,
    };
    let (m_c, m_r) = neighborhood_counts(&sets)?;
    let (c_size, r_size) = match profile.order() {
        Some(n) if n <= EXPLICIT_LIMIT as u128 => {
            // Small enough to enumerate tuples directly.
            let (cf, rf) = sets.membership()?;
            let c: Vec<usize> = (0..cf.len()).filter(|&i| cf[i]).collect();
            let r: Vec<usize> = (0..rf.len()).filter(|&i| rf[i]).collect();
            let sizes = (c.len() as u128, r.len() as u128);
            sets.explicit = Some((c, r));
            sizes
        }
        _ => profile_cardinalities(&sets)?,
    };
    sets.counts = SplitCounts {
        c_size,
        r_size,
        m_c,
        m_r,
    };
    Ok(sets)
}

/// Number of tuples with profile `a`.
fn tuples_with_profile(classes: &[Class], a: &[usize]) -> Result<u128> {
    let mut acc: u128 = 1;
    for (c, &ai) in classes.iter().zip(a) {
        let ways = binomial(c.count, ai).ok_or_else(overflow)?;
        acc = acc
            .checked_mul(ways)
            .and_then(|v| v.checked_mul(pow(c.dim - 1, c.count - ai).ok()?))
            .ok_or_else(overflow)?;
    }
    Ok(acc)
}

/// `|C|` and `|R|` by summing over profiles.
pub fn profile_cardinalities(sets: &ThresholdSets) -> Result<(u128, u128)> {
    let classes = sets.profile.classes();
    let mut c = 0u128;
    let mut r = 0u128;
    for p in 0..sets.radix.size() {
        if !(sets.in_c[p] || sets.in_r[p]) {
            continue;
        }
        let cnt = tuples_with_profile(classes, &sets.radix.decode(p))?;
        if sets.in_c[p] {
            c = c.checked_add(cnt).ok_or_else(overflow)?;
        }
        if sets.in_r[p] {
            r = r.checked_add(cnt).ok_or_else(overflow)?;
        }
    }
    Ok((c, r))
}

/// Calls `f(b)` for every profile `b` with `lo <= b <= hi` componentwise.
fn for_each_between(lo: &[usize], hi: &[usize], mut f: impl FnMut(&[usize]) -> Result<()>) -> Result<()> {
    let mut b = lo.to_vec();
    loop {
        f(&b)?;
        let mut i = b.len();
        loop {
            if i == 0 {
                return Ok(());
            }
            i -= 1;
            if b[i] < hi[i] {
                b[i] += 1;
                break;
            }
            b[i] = lo[i];
        }
    }
}

/// `(M_c, M_r)`: the largest number of surviving entries in a surviving
/// column and in a surviving row of the split Kronecker V-matrix.
///
/// A column `y` meets rows `x` with `x_i = y_i` wherever `y_i` is not
/// maximal, so rows in its pattern have maximal sets inside that of `y`;
/// a row `x` meets columns whose maximal sets contain that of `x`.
pub fn neighborhood_counts(sets: &ThresholdSets) -> Result<(u128, u128)> {
    let classes = sets.profile.classes();
    let counts: Vec<usize> = classes.iter().map(|c| c.count).collect();
    let zeros = vec![0; counts.len()];
    let radix = &sets.radix;
    let mut m_c = 0u128;
    let mut m_r = 0u128;
    for p in 0..radix.size() {
        let a = radix.decode(p);
        if !sets.in_c[p] {
            let mut total = 0u128;
            for_each_between(&zeros, &a, |b| {
                if sets.in_r[radix.encode(b).expect("valid profile")] {
                    return Ok(());
                }
                let mut ways = 1u128;
                for (j, c) in classes.iter().enumerate() {
                    ways = ways
                        .checked_mul(binomial(a[j], b[j]).ok_or_else(overflow)?)
                        .and_then(|v| v.checked_mul(pow(c.dim - 1, a[j] - b[j]).ok()?))
                        .ok_or_else(overflow)?;
                }
                total = total.checked_add(ways).ok_or_else(overflow)?;
                Ok(())
            })?;
            m_c = m_c.max(total);
        }
        if !sets.in_r[p] {
            let mut total = 0u128;
            for_each_between(&a, &counts, |b| {
                if sets.in_c[radix.encode(b).expect("valid profile")] {
                    return Ok(());
                }
                let mut ways = 1u128;
                for j in 0..classes.len() {
                    ways = ways
                        .checked_mul(binomial(counts[j] - a[j], b[j] - a[j]).ok_or_else(overflow)?)
                        .ok_or_else(overflow)?;
                }
                total = total.checked_add(ways).ok_or_else(overflow)?;
                Ok(())
            })?;
            m_r = m_r.max(total);
        }
    }
    Ok((m_c, m_r))
}

/// Exact counts at one offset.
pub fn split_counts(profile: &ScoreProfile, offset: &BigRational) -> Result<SplitCounts> {
    Ok(threshold_sets(profile, offset)?.counts())
}

/// A point of the offset grid: `delta` in `[eps / (100 d_k), 1 / d_k)` and
/// the corresponding offset `delta * d_k * m`.
///
/// For `k` equal dimensions with uniform weights the offset is `delta * k`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridPoint {
    pub delta: f64,
    pub offset: BigRational,
}

pub const GRID_POINTS: usize = 64;

pub fn offset_grid(profile: &ScoreProfile, eps: f64, points: usize) -> Result<Vec<GridPoint>> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon must lie in (0, 1), got {eps}")));
    }
    if points == 0 {
        return Err(Error::InvalidParameter("empty grid".into()));
    }
    let dk = profile.max_dim() as f64;
    let lo = eps / (100.0 * dk);
    let hi = 1.0 / dk;
    // Geometric spacing over [lo, hi): the last point stays below hi.
    let ratio = (hi / lo).powf(1.0 / points as f64);
    (0..points)
        .map(|i| {
            let delta = lo * ratio.powi(i as i32);
            offset_for_delta(profile, delta).map(|offset| GridPoint { delta, offset })
        })
        .collect()
}

/// `delta * d_k * m` as an exact rational.
pub fn offset_for_delta(profile: &ScoreProfile, delta: f64) -> Result<BigRational> {
    let d = rational_from_f64(delta)?;
    Ok(d * BigInt::from(profile.max_dim()) * profile.mean())
}

/// `exp(-delta^2 n / (3 d))`, the binomial tail bound for `n` trials with
/// success probability `1/d` and deviation `delta * n`.
pub fn bernstein_tail(n: u64, d: u64, delta: f64) -> Result<f64> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("d must exceed 1, got {d}")));
    }
    if !(0.0..1.0 / d as f64).contains(&delta) {
        return Err(Error::InvalidParameter(format!(
            "delta = {delta} lies outside [0, 1/{d})"
        )));
    }
    Ok((-delta * delta * n as f64 / (3.0 * d as f64)).exp())
}

/// General Bernstein bound `exp(-(t^2/2) / (var + bound * t / 3))` for a sum
/// of independent variables deviating from their means by at most `bound`.
pub fn bernstein_general(variance: f64, bound: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    (-(t * t / 2.0) / (variance + bound * t / 3.0)).exp()
}

/// `sum_{i <= k} C(n, i)`, exact.
pub fn binom_partial_sum(n: usize, k: usize) -> Option<u128> {
    (0..=k.min(n)).try_fold(0u128, |acc, i| acc.checked_add(binomial(n, i)?))
}

/// `(e n / k)^k`, an upper bound on `sum_{i <= k} C(n, i)`; `1` for `k = 0`.
pub fn binom_sum_bound(n: usize, k: usize) -> Result<f64> {
    if k > n {
        return Err(Error::InvalidParameter(format!("k = {k} exceeds n = {n}")));
    }
    if k == 0 {
        return Ok(1.0);
    }
    Ok((std::f64::consts::E * n as f64 / k as f64).powi(k as i32))
}

/// Natural log of `(e n / k)^k`, for arguments where the value overflows.
pub fn ln_binom_sum_bound(n: f64, k: f64) -> f64 {
    if k <= 0.0 {
        0.0
    } else {
        k * (1.0 + (n / k).ln())
    }
}

pub fn mean_f64(profile: &ScoreProfile) -> f64 {
    rational_to_f64(profile.mean())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn score_examples() {
        let p = ScoreProfile::uniform(&[2, 2, 2]).unwrap();
        assert_eq!(p.score(&[1, 0, 1]).unwrap(), r(2, 1));
        assert_eq!(p.score(&[0, 0, 0]).unwrap(), r(0, 1));
        assert!(p.score(&[2, 0, 0]).is_err());
        let w = WeightFn::table([(2, r(1, 1)), (3, r(2, 1))].into_iter().collect()).unwrap();
        let p = ScoreProfile::new(&[2, 3], &w).unwrap();
        assert_eq!(p.score(&[1, 2]).unwrap(), r(3, 1));
        assert!(p.is_consistent());
        assert_eq!(p.mean(), &(r(1, 2) + r(2, 3)));
    }

    #[test]
    fn weight_validation() {
        assert!(WeightFn::table([(2, r(1, 2))].into_iter().collect()).is_err());
        assert!(WeightFn::table([(2, r(3, 1)), (3, r(2, 1))].into_iter().collect()).is_err());
        let w = WeightFn::table([(2, r(1, 1))].into_iter().collect()).unwrap();
        assert!(ScoreProfile::new(&[2, 3], &w).is_err());
    }

    #[test]
    fn threshold_examples() {
        let p = ScoreProfile::uniform(&[2; 4]).unwrap();
        let s = threshold_sets(&p, &r(1, 2)).unwrap();
        assert_eq!(s.c_size(), 5);
        assert_eq!(s.r_size(), 5);
        assert_eq!(profile_cardinalities(&s).unwrap(), (5, 5));
        let s = threshold_sets(&p, &r(5, 1)).unwrap();
        assert_eq!(s.c_size(), 0);
        assert!(threshold_sets(&p, &r(0, 1)).is_err());
    }

    #[test]
    fn neighborhood_examples() {
        let p = ScoreProfile::uniform(&[2, 2]).unwrap();
        let s = threshold_sets(&p, &r(1, 1)).unwrap();
        assert_eq!(s.c_indices().unwrap(), &[3]);
        assert_eq!(s.r_indices().unwrap(), &[0]);
        assert_eq!(neighborhood_counts(&s).unwrap(), (1, 1));
        // Empty sets: every row keeps its whole pattern, 2^(k - |S_x|).
        let p = ScoreProfile::uniform(&[2, 2, 2]).unwrap();
        let s = threshold_sets(&p, &r(10, 1)).unwrap();
        assert_eq!((s.c_size(), s.r_size()), (0, 0));
        assert_eq!(s.counts().m_r, 8);
        assert_eq!(s.counts().m_c, 8);
        // A single 2x2 V-matrix: the one low row and one high column cover
        // every entry.
        let p = ScoreProfile::uniform(&[2]).unwrap();
        let s = threshold_sets(&p, &rational_from_f64(0.4).unwrap()).unwrap();
        assert_eq!(neighborhood_counts(&s).unwrap(), (0, 0));
    }

    #[test]
    fn tail_bounds() {
        let b = bernstein_tail(30, 2, 0.2).unwrap();
        assert!((b - (-0.2f64).exp()).abs() < 1e-12);
        assert!((bernstein_tail(60, 3, 0.1).unwrap() - (-0.2f64 / 3.0).exp()).abs() < 1e-12);
        assert!((bernstein_tail(10, 2, 1e-9).unwrap() - 1.0).abs() < 1e-9);
        assert!(bernstein_tail(10, 2, 0.5).is_err());
        assert!(bernstein_tail(10, 1, 0.1).is_err());
        assert_eq!(binom_partial_sum(4, 2), Some(11));
        assert!((binom_sum_bound(4, 2).unwrap() - 29.556).abs() < 1e-3);
        assert_eq!(binom_sum_bound(5, 0).unwrap(), 1.0);
        assert!(binom_partial_sum(10, 1).unwrap() as f64 <= binom_sum_bound(10, 1).unwrap());
        assert!(binom_partial_sum(12, 12).unwrap() as f64 <= binom_sum_bound(12, 12).unwrap());
    }

    #[test]
    fn grid_is_geometric_and_bounded() {
        let p = ScoreProfile::uniform(&[3; 5]).unwrap();
        let g = offset_grid(&p, 0.5, GRID_POINTS).unwrap();
        assert_eq!(g.len(), GRID_POINTS);
        assert!((g[0].delta - 0.5 / 300.0).abs() < 1e-15);
        assert!(g.last().unwrap().delta < 1.0 / 3.0);
        assert!(g.windows(2).all(|w| w[0].offset < w[1].offset));
        // Uniform equal sizes: the offset is delta * k.
        let expect = rational_from_f64(g[10].delta).unwrap() * BigInt::from(5);
        assert_eq!(g[10].offset, expect);
    }
}
