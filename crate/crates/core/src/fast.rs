//! O(n log n) computation of the unbiased distance covariance Ωₙ.
//!
//! Ωₙ is assembled from three sums over raw distances:
//!
//! * `Σ_{i≠j} a_ij b_ij`, via four signed 2-D partial sums ([`PartialSum2d`]);
//! * `Σ_i a_i. b_i.`, via sorted prefix sums ([`row_dist_sums`]);
//! * `a.. b..`, from the same prefix sums ([`grand_dist_sum`]).
//!
//! Ties are resolved with a total order that uses the original index as the
//! tiebreaker. Tied pairs contribute `|x_i - x_j| |y_i - y_j| = 0` to the
//! product sum, so the result stays exact with repeated values.

use std::cmp::Ordering;

use crate::error::{require_more_than, DcovError, Result};
use crate::estimate::{DependenceEstimate, Estimator, Method};
use crate::oracle::standardize;
use crate::sample::{check_finite, PairedSample};
use crate::summation::{pairwise_sum, pairwise_sum_by};

fn by_value(v: &[f64]) -> impl Fn(&usize, &usize) -> Ordering + '_ {
    // inputs are validated finite, so partial_cmp never fails
    move |&a, &b| v[a].partial_cmp(&v[b]).unwrap_or(Ordering::Equal)
}

/// Stable sort of a sequence: the permutation, its inverse and the running
/// sums of the sorted values.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedView {
    /// `order[r]` is the original index of the r-th smallest value.
    pub order: Vec<usize>,
    /// `ranks[i]` is the 0-based position of `v[i]` in sorted order.
    pub ranks: Vec<usize>,
    /// `prefix_sums[r]` is the sum of the `r + 1` smallest values.
    pub prefix_sums: Vec<f64>,
}

impl SortedView {
    pub fn new(v: &[f64]) -> Self {
        let n = v.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(by_value(v));
        let mut ranks = vec![0; n];
        for (r, &i) in order.iter().enumerate() {
            ranks[i] = r;
        }
        let mut acc = 0.0;
        let prefix_sums = order
            .iter()
            .map(|&i| {
                acc += v[i];
                acc
            })
            .collect();
        Self {
            order,
            ranks,
            prefix_sums,
        }
    }
}

/// Per-observation counts and sums of strictly smaller elements, and the
/// resulting distance row sums `Σ_l |v_i - v_l|`.
#[derive(Debug, Clone, PartialEq)]
pub struct RowDistSums {
    pub alpha: Vec<usize>,
    pub beta: Vec<f64>,
    pub total: f64,
    pub row_sums: Vec<f64>,
}

/// Row sums of the distance matrix of `v` in O(n log n):
/// `a_i. = v. + (2 α_i - n) v_i - 2 β_i`, where α_i counts and β_i sums the
/// elements strictly smaller than `v_i`.
pub fn row_dist_sums(v: &[f64]) -> Result<RowDistSums> {
    if v.is_empty() {
        return Err(DcovError::Empty);
    }
    check_finite("v", v)?;
    Ok(row_dist_sums_sorted(v, &SortedView::new(v)))
}

fn row_dist_sums_sorted(v: &[f64], view: &SortedView) -> RowDistSums {
    let n = v.len();
    let mut alpha = vec![0usize; n];
    let mut beta = vec![0.0; n];
    // Walk tie runs: every member of a run shares the count and sum of the
    // elements before the run starts.
    let mut start = 0;
    while start < n {
        let value = v[view.order[start]];
        let mut end = start + 1;
        while end < n && v[view.order[end]] == value {
            end += 1;
        }
        let below = if start == 0 {
            0.0
        } else {
            view.prefix_sums[start - 1]
        };
        for &i in &view.order[start..end] {
            alpha[i] = start;
            beta[i] = below;
        }
        start = end;
    }
    let total = pairwise_sum(v);
    let nf = n as f64;
    let row_sums = (0..n)
        .map(|i| total + (2.0 * alpha[i] as f64 - nf) * v[i] - 2.0 * beta[i])
        .collect();
    RowDistSums {
        alpha,
        beta,
        total,
        row_sums,
    }
}

/// `Σ_ij |v_i - v_j| = 2 Σ α_i v_i - 2 Σ β_i`.
pub fn grand_dist_sum(alpha: &[usize], beta: &[f64], v: &[f64]) -> Result<f64> {
    if alpha.len() != v.len() || beta.len() != v.len() {
        return Err(DcovError::Contract(format!(
            "alpha/beta/v lengths differ: {}/{}/{}",
            alpha.len(),
            beta.len(),
            v.len()
        )));
    }
    let weighted = pairwise_sum_by(v.len(), &|i| alpha[i] as f64 * v[i]);
    Ok(2.0 * weighted - 2.0 * pairwise_sum(beta))
}

/// Interval sums over the dyadic blocks `I(l, k) = [k 2^l + 1, (k + 1) 2^l]`
/// (0-based `k`) of the key range `1..=2^L`.
///
/// Level `l` holds `2^(L-l)` blocks; all levels live in one contiguous
/// buffer of `2^(L+1)` slots. Inserting touches one block per level; a
/// prefix query decomposes `key - 1` into its binary digits and reads one
/// block per set bit.
#[derive(Debug, Clone)]
pub struct DyadicAccumulator {
    levels: u32,
    sums: Vec<f64>,
}

impl DyadicAccumulator {
    /// Accumulator able to hold keys `1..=n` (at least `1..=2`).
    pub fn new(n: usize) -> Self {
        let levels = n.max(2).next_power_of_two().trailing_zeros();
        Self {
            levels,
            sums: vec![0.0; 2 << levels],
        }
    }

    pub fn capacity(&self) -> usize {
        1 << self.levels
    }

    pub fn levels(&self) -> u32 {
        self.levels
    }

    /// Start of level `l`: levels are laid out finest first.
    fn offset(&self, level: u32) -> usize {
        // Σ_{m<l} 2^(L-m) = 2^(L+1) - 2^(L-l+1)
        (2 << self.levels) - (2 << (self.levels - level))
    }

    /// Sum `s(l, k)` for level `l`, 0-based block `k`.
    pub fn block(&self, level: u32, k: usize) -> f64 {
        self.sums[self.offset(level) + k]
    }

    /// Add `c` to every block containing `key` (1-based).
    pub fn insert(&mut self, key: usize, c: f64) {
        debug_assert!((1..=self.capacity()).contains(&key));
        let zero_based = key - 1;
        for level in 0..self.levels {
            let slot = self.offset(level) + (zero_based >> level);
            self.sums[slot] += c;
        }
    }

    /// Sum of inserted values whose key is strictly below `key`.
    pub fn sum_below(&self, key: usize) -> f64 {
        let remaining = key - 1;
        let mut covered = 0usize;
        let mut acc = 0.0;
        for level in (0..self.levels).rev() {
            if remaining & (1 << level) != 0 {
                acc += self.block(level, covered >> level);
                covered += 1 << level;
            }
        }
        acc
    }
}

/// `γ_i = Σ_{j<i, key_j<key_i} c_j` for distinct integer keys in
/// `1..=capacity`, via insert-then-query on a [`DyadicAccumulator`].
pub fn dyad_update(keys: &[usize], c: &[f64]) -> Result<Vec<f64>> {
    if keys.len() != c.len() {
        return Err(DcovError::Contract(format!(
            "keys and weights differ in length: {} vs {}",
            keys.len(),
            c.len()
        )));
    }
    let mut tree = DyadicAccumulator::new(keys.len());
    let mut seen = vec![false; tree.capacity() + 1];
    for &k in keys {
        if k == 0 || k > tree.capacity() {
            return Err(DcovError::Contract(format!(
                "key {k} outside 1..={}",
                tree.capacity()
            )));
        }
        if std::mem::replace(&mut seen[k], true) {
            return Err(DcovError::Contract(format!("duplicate key {k}")));
        }
    }
    drop(seen);
    Ok(dyad_update_unchecked(&mut tree, keys, c))
}

fn dyad_update_unchecked(tree: &mut DyadicAccumulator, keys: &[usize], c: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(keys.len());
    for i in 0..keys.len() {
        if i > 0 {
            tree.insert(keys[i - 1], c[i - 1]);
        }
        out.push(if keys[i] == 1 {
            0.0
        } else {
            tree.sum_below(keys[i])
        });
    }
    out
}

/// Precomputed orderings for evaluating `γ_i(c) = Σ_{j≠i} c_j S_ij` for
/// several weight sequences over the same `(x, y)`.
///
/// `S_ij = +1` when i and j are ordered the same way in x and in y, and `-1`
/// otherwise, with ties broken by original index in both coordinates.
#[derive(Debug, Clone)]
pub struct PartialSum2d {
    /// Original indices in x order.
    x_order: Vec<usize>,
    /// 1-based y rank of each element, listed in x order.
    y_keys: Vec<usize>,
}

impl PartialSum2d {
    pub fn new(x: &[f64], y: &[f64]) -> Result<Self> {
        if x.len() != y.len() {
            return Err(DcovError::LengthMismatch {
                x: x.len(),
                y: y.len(),
            });
        }
        check_finite("x", x)?;
        check_finite("y", y)?;
        Ok(Self::new_unchecked(x, y))
    }

    fn new_unchecked(x: &[f64], y: &[f64]) -> Self {
        let n = x.len();
        let mut x_order: Vec<usize> = (0..n).collect();
        x_order.sort_by(by_value(x));
        let mut y_rank = {
            let mut y_order: Vec<usize> = (0..n).collect();
            y_order.sort_by(by_value(y));
            let mut rank = vec![0usize; n];
            for (r, &i) in y_order.iter().enumerate() {
                rank[i] = r + 1;
            }
            rank
        };
        let y_keys = x_order.iter().map(|&i| y_rank[i]).collect();
        y_rank.clear();
        Self { x_order, y_keys }
    }

    pub fn len(&self) -> usize {
        self.x_order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x_order.is_empty()
    }

    /// `γ_i(c) = c. - c_i - 2 Σ_{y_j<y_i} c_j - 2 Σ_{x_j<x_i} c_j + 4 Σ_{x_j<x_i, y_j<y_i} c_j`,
    /// returned in the original index order.
    pub fn gamma(&self, c: &[f64]) -> Result<Vec<f64>> {
        if c.len() != self.len() {
            return Err(DcovError::Contract(format!(
                "weights have length {}, expected {}",
                c.len(),
                self.len()
            )));
        }
        Ok(self.gamma_unchecked(c))
    }

    fn gamma_unchecked(&self, c: &[f64]) -> Vec<f64> {
        let n = self.len();
        let sorted_c: Vec<f64> = self.x_order.iter().map(|&i| c[i]).collect();
        let c_dot = pairwise_sum(c);

        // exclusive prefix sums in y order, indexed by key
        let mut below_y = vec![0.0; n + 1];
        for (pos, &key) in self.y_keys.iter().enumerate() {
            below_y[key] = sorted_c[pos];
        }
        let mut acc = 0.0;
        for slot in below_y.iter_mut() {
            let v = *slot;
            *slot = acc;
            acc += v;
        }

        let mut tree = DyadicAccumulator::new(n);
        let both = dyad_update_unchecked(&mut tree, &self.y_keys, &sorted_c);
        drop(tree);

        let mut out = vec![0.0; n];
        let mut below_x = 0.0;
        for pos in 0..n {
            let ci = sorted_c[pos];
            let key = self.y_keys[pos];
            out[self.x_order[pos]] =
                c_dot - ci - 2.0 * below_y[key] - 2.0 * below_x + 4.0 * both[pos];
            below_x += ci;
        }
        out
    }
}

/// One-shot [`PartialSum2d::gamma`].
pub fn partial_sum_2d(x: &[f64], y: &[f64], c: &[f64]) -> Result<Vec<f64>> {
    PartialSum2d::new(x, y)?.gamma(c)
}

/// `Σ_{i≠j} |x_i - x_j| |y_i - y_j|` from four signed partial sums:
/// `Σ_i [x_i y_i γ_i(1) + γ_i(xy) - x_i γ_i(y) - y_i γ_i(x)]`.
pub fn sum_ab_products(x: &[f64], y: &[f64]) -> Result<f64> {
    let plan = PartialSum2d::new(x, y)?;
    require_more_than(plan.len(), 1)?;
    Ok(sum_ab_products_with(&plan, x, y))
}

fn sum_ab_products_with(plan: &PartialSum2d, x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let mut terms = vec![0.0; n];
    {
        let ones = vec![1.0; n];
        let g = plan.gamma_unchecked(&ones);
        for i in 0..n {
            terms[i] = x[i] * y[i] * g[i];
        }
    }
    {
        let xy: Vec<f64> = x.iter().zip(y).map(|(a, b)| a * b).collect();
        let g = plan.gamma_unchecked(&xy);
        for i in 0..n {
            terms[i] += g[i];
        }
    }
    {
        let g = plan.gamma_unchecked(y);
        for i in 0..n {
            terms[i] -= x[i] * g[i];
        }
    }
    {
        let g = plan.gamma_unchecked(x);
        for i in 0..n {
            terms[i] -= y[i] * g[i];
        }
    }
    pairwise_sum(&terms)
}

/// Row and grand distance sums of both coordinates, with the α/β
/// counts and sums they were derived from.
#[derive(Debug, Clone, PartialEq)]
pub struct RowSumData {
    pub alpha_x: Vec<usize>,
    pub alpha_y: Vec<usize>,
    pub beta_x: Vec<f64>,
    pub beta_y: Vec<f64>,
    pub x_dot: f64,
    pub y_dot: f64,
    pub a_row: Vec<f64>,
    pub b_row: Vec<f64>,
    pub a_grand: f64,
    pub b_grand: f64,
}

impl RowSumData {
    pub fn new(x: &[f64], y: &[f64]) -> Result<Self> {
        let rx = row_dist_sums(x)?;
        let ry = row_dist_sums(y)?;
        let a_grand = grand_dist_sum(&rx.alpha, &rx.beta, x)?;
        let b_grand = grand_dist_sum(&ry.alpha, &ry.beta, y)?;
        Ok(Self {
            alpha_x: rx.alpha,
            alpha_y: ry.alpha,
            beta_x: rx.beta,
            beta_y: ry.beta,
            x_dot: rx.total,
            y_dot: ry.total,
            a_row: rx.row_sums,
            b_row: ry.row_sums,
            a_grand,
            b_grand,
        })
    }
}

/// Shift by the median element. Ω and V² are translation invariant, and
/// centering keeps the `x_i y_i` products in the signed sums small.
/// Equal inputs map to exactly equal outputs, so ties survive.
fn recenter(v: &[f64]) -> Vec<f64> {
    let mut scratch = v.to_vec();
    let mid = scratch.len() / 2;
    let (_, &mut median, _) =
        scratch.select_nth_unstable_by(mid, |a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    scratch
        .iter_mut()
        .zip(v)
        .for_each(|(s, &x)| *s = x - median);
    scratch
}

/// The three sums Ωₙ and V²ₙ are built from.
struct DistanceSums {
    /// `Σ_{i≠j} a_ij b_ij`
    cross: f64,
    /// `Σ_i a_i. b_i.`
    rows: f64,
    /// `a.. b..`
    grand: f64,
}

impl DistanceSums {
    fn new(x: &[f64], y: &[f64]) -> Self {
        let n = x.len();
        let xc = recenter(x);
        let yc = recenter(y);
        let (rows, grand) = {
            let rx = row_dist_sums_sorted(&xc, &SortedView::new(&xc));
            let a_grand = 2.0 * pairwise_sum_by(n, &|i| rx.alpha[i] as f64 * xc[i])
                - 2.0 * pairwise_sum(&rx.beta);
            let a_row = rx.row_sums;
            let ry = row_dist_sums_sorted(&yc, &SortedView::new(&yc));
            let b_grand = 2.0 * pairwise_sum_by(n, &|i| ry.alpha[i] as f64 * yc[i])
                - 2.0 * pairwise_sum(&ry.beta);
            let b_row = ry.row_sums;
            (
                pairwise_sum_by(n, &|i| a_row[i] * b_row[i]),
                a_grand * b_grand,
            )
        };
        let cross = if n < 2 {
            0.0
        } else {
            sum_ab_products_with(&PartialSum2d::new_unchecked(&xc, &yc), &xc, &yc)
        };
        Self { cross, rows, grand }
    }

    fn omega(&self, n: usize) -> f64 {
        let nf = n as f64;
        self.cross / (nf * (nf - 3.0)) - 2.0 * self.rows / (nf * (nf - 2.0) * (nf - 3.0))
            + self.grand / (nf * (nf - 1.0) * (nf - 2.0) * (nf - 3.0))
    }

    fn vstat(&self, n: usize) -> f64 {
        let nf = n as f64;
        (self.cross - 2.0 * self.rows / nf + self.grand / (nf * nf)) / (nf * nf)
    }
}

/// Unbiased squared distance covariance Ωₙ in O(n log n) time and O(n) memory.
pub fn omega_fast(s: &PairedSample) -> Result<DependenceEstimate> {
    let n = s.len();
    require_more_than(n, 3)?;
    let value = DistanceSums::new(s.x(), s.y()).omega(n);
    Ok(DependenceEstimate::new(
        value,
        Estimator::UnbiasedDcov2,
        Method::Fast,
        n,
    ))
}

/// Ω on a single sequence paired with itself.
pub fn omega_fast_self(v: &[f64]) -> Result<f64> {
    require_more_than(v.len(), 3)?;
    check_finite("v", v)?;
    Ok(DistanceSums::new(v, v).omega(v.len()))
}

/// `Ω(x,y) / sqrt(Ω(x,x) Ω(y,y))`, or 0 if either self-term is nonpositive.
pub fn bias_corrected_dcor2_fast(s: &PairedSample) -> Result<DependenceEstimate> {
    let n = s.len();
    require_more_than(n, 3)?;
    let xy = DistanceSums::new(s.x(), s.y()).omega(n);
    let xx = DistanceSums::new(s.x(), s.x()).omega(n);
    let yy = DistanceSums::new(s.y(), s.y()).omega(n);
    let value = standardize(xy, xx, yy);
    Ok(DependenceEstimate::new(
        value,
        Estimator::BiasCorrectedDcor2,
        Method::Fast,
        n,
    ))
}

/// Bias-corrected dcor² when `Ω(y,y)` is already known; used by screening
/// loops that reuse one response across many predictors.
pub(crate) fn bias_corrected_dcor2_with_response(x: &[f64], y: &[f64], omega_yy: f64) -> f64 {
    let n = x.len();
    let xy = DistanceSums::new(x, y).omega(n);
    let xx = DistanceSums::new(x, x).omega(n);
    standardize(xy, xx, omega_yy)
}

/// V-statistic `V²ₙ(X, Y)` from the same three sums:
/// `(1/n²) [Σ a_ij b_ij - (2/n) Σ a_i. b_i. + a.. b.. / n²]`.
pub fn vstat_dcov2_fast(s: &PairedSample) -> Result<DependenceEstimate> {
    let n = s.len();
    let value = DistanceSums::new(s.x(), s.y()).vstat(n);
    Ok(DependenceEstimate::new(
        value,
        Estimator::VstatDcov2,
        Method::Fast,
        n,
    ))
}

/// `R²ₙ(X, Y)` via the fast sums; 0 if either distance variance is 0.
pub fn vstat_dcor2_fast(s: &PairedSample) -> Result<DependenceEstimate> {
    let n = s.len();
    let xy = DistanceSums::new(s.x(), s.y()).vstat(n);
    let xx = DistanceSums::new(s.x(), s.x()).vstat(n).max(0.0);
    let yy = DistanceSums::new(s.y(), s.y()).vstat(n).max(0.0);
    let value = standardize(xy, xx, yy);
    Ok(DependenceEstimate::new(
        value,
        Estimator::VstatDcor2,
        Method::Fast,
        n,
    ))
}
