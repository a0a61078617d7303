//! Direct O(n²) estimators built from explicit distance matrices.
//!
//! These are the reference implementations that the fast path is checked
//! against. They allocate n×n matrices, so sample sizes above
//! [`DEFAULT_MAX_N`] are refused unless the caller opts in.

use serde::{Deserialize, Serialize};

use crate::error::{require_more_than, DcovError, Result};
use crate::estimate::{DependenceEstimate, Estimator, Method};
use crate::sample::{check_finite, PairedSample};
use crate::summation::{pairwise_sum, pairwise_sum_by};

/// Largest n the direct estimators accept without an explicit override.
pub const DEFAULT_MAX_N: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixKind {
    Raw,
    DoubleCentered,
    UCentered,
}

/// Dense symmetric n×n matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    entries: Vec<f64>,
    kind: MatrixKind,
}

impl DistanceMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|i| pairwise_sum(self.row(i))).collect()
    }

    fn expect_kind(&self, kind: MatrixKind) -> Result<()> {
        if self.kind != kind {
            return Err(DcovError::Contract(format!(
                "expected a {kind:?} matrix, got {:?}",
                self.kind
            )));
        }
        Ok(())
    }
}

/// `|v_i - v_j|` for all pairs.
pub fn pairwise_distances(v: &[f64]) -> Result<DistanceMatrix> {
    if v.is_empty() {
        return Err(DcovError::Empty);
    }
    check_finite("v", v)?;
    let n = v.len();
    let mut entries = vec![0.0; n * n];
    for (i, &vi) in v.iter().enumerate() {
        for (j, &vj) in v.iter().enumerate() {
            entries[i * n + j] = (vi - vj).abs();
        }
    }
    Ok(DistanceMatrix {
        n,
        entries,
        kind: MatrixKind::Raw,
    })
}

/// Row means, column means and grand mean of a raw distance matrix
/// (row and column means coincide by symmetry).
fn centering_terms(m: &DistanceMatrix) -> (Vec<f64>, f64) {
    let row = m.row_sums();
    let grand = pairwise_sum(&row);
    (row, grand)
}

/// Double-centering with the diagonal set to zero.
///
/// Off-diagonal entries are `a_ij - a_i./n - a_.j/n + a../n²`; diagonal
/// entries are 0. Because the diagonal is overridden, row sums equal minus
/// the value the formula would have produced on the diagonal, not zero.
pub fn double_center(m: &DistanceMatrix) -> Result<DistanceMatrix> {
    let mut out = double_center_full(m)?;
    let n = out.n;
    for i in 0..n {
        out.entries[i * n + i] = 0.0;
    }
    Ok(out)
}

/// Double-centering applied to every entry, diagonal included.
///
/// This is the matrix whose row and column sums vanish, and the one the
/// V-statistic estimators are built on.
pub fn double_center_full(m: &DistanceMatrix) -> Result<DistanceMatrix> {
    m.expect_kind(MatrixKind::Raw)?;
    let n = m.n;
    let nf = n as f64;
    let (row, grand) = centering_terms(m);
    let grand_mean = grand / (nf * nf);
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            entries[i * n + j] = m.get(i, j) - row[i] / nf - row[j] / nf + grand_mean;
        }
    }
    Ok(DistanceMatrix {
        n,
        entries,
        kind: MatrixKind::DoubleCentered,
    })
}

/// U-centering: `a_ij - a_i./(n-2) - a_.j/(n-2) + a../((n-1)(n-2))` off the
/// diagonal, zero on it.
pub fn u_center(m: &DistanceMatrix) -> Result<DistanceMatrix> {
    u_center_owned(m.clone())
}

/// [`u_center`] reusing the raw matrix's storage.
fn u_center_owned(mut m: DistanceMatrix) -> Result<DistanceMatrix> {
    m.expect_kind(MatrixKind::Raw)?;
    let n = m.n;
    require_more_than(n, 2)?;
    let nf = n as f64;
    let (row, grand) = centering_terms(&m);
    let grand_term = grand / ((nf - 1.0) * (nf - 2.0));
    for i in 0..n {
        let ri = row[i] / (nf - 2.0);
        for (j, e) in m.entries[i * n..(i + 1) * n].iter_mut().enumerate() {
            *e = if i == j {
                0.0
            } else {
                *e - ri - row[j] / (nf - 2.0) + grand_term
            };
        }
    }
    m.kind = MatrixKind::UCentered;
    Ok(m)
}

/// `Σ_ij A_ij B_ij` with pairwise accumulation (rows, then row totals).
fn frobenius_inner(a: &DistanceMatrix, b: &DistanceMatrix) -> f64 {
    let n = a.n;
    pairwise_sum_by(n, &|i| {
        let (ra, rb) = (a.row(i), b.row(i));
        pairwise_sum_by(n, &|j| ra[j] * rb[j])
    })
}

/// Direct estimators with a configurable memory cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Direct {
    pub max_n: usize,
}

impl Default for Direct {
    fn default() -> Self {
        Self {
            max_n: DEFAULT_MAX_N,
        }
    }
}

impl Direct {
    /// Lift the memory cap entirely.
    pub fn unbounded() -> Self {
        Self { max_n: usize::MAX }
    }

    fn check_cap(&self, n: usize) -> Result<()> {
        if n > self.max_n {
            return Err(DcovError::TooLarge { n, cap: self.max_n });
        }
        Ok(())
    }

    fn centered_pair(&self, s: &PairedSample) -> Result<(DistanceMatrix, DistanceMatrix)> {
        self.check_cap(s.len())?;
        let a = double_center_full(&pairwise_distances(s.x())?)?;
        let b = double_center_full(&pairwise_distances(s.y())?)?;
        Ok((a, b))
    }

    /// Squared sample distance covariance, `(1/n²) Σ A_ij B_ij`.
    pub fn vstat_dcov2(&self, s: &PairedSample) -> Result<DependenceEstimate> {
        let (a, b) = self.centered_pair(s)?;
        let n = s.len() as f64;
        let value = frobenius_inner(&a, &b) / (n * n);
        Ok(DependenceEstimate::new(
            value,
            Estimator::VstatDcov2,
            Method::Direct,
            s.len(),
        ))
    }

    /// Squared sample distance correlation; 0 when either distance variance is 0.
    pub fn vstat_dcor2(&self, s: &PairedSample) -> Result<DependenceEstimate> {
        let (a, b) = self.centered_pair(s)?;
        let n2 = (s.len() * s.len()) as f64;
        let cov = frobenius_inner(&a, &b) / n2;
        let var_x = (frobenius_inner(&a, &a) / n2).max(0.0);
        let var_y = (frobenius_inner(&b, &b) / n2).max(0.0);
        let value = standardize(cov, var_x, var_y);
        Ok(DependenceEstimate::new(
            value,
            Estimator::VstatDcor2,
            Method::Direct,
            s.len(),
        ))
    }

    /// Unbiased estimator Ω: `1/(n(n-3)) Σ_{i≠j} Ã_ij B̃_ij` over U-centered matrices.
    pub fn omega(&self, s: &PairedSample) -> Result<DependenceEstimate> {
        let n = s.len();
        require_more_than(n, 3)?;
        self.check_cap(n)?;
        let a = u_center_owned(pairwise_distances(s.x())?)?;
        let b = u_center_owned(pairwise_distances(s.y())?)?;
        let nf = n as f64;
        // Diagonals of U-centered matrices are zero, so the full inner product
        // equals the off-diagonal sum.
        let value = frobenius_inner(&a, &b) / (nf * (nf - 3.0));
        Ok(DependenceEstimate::new(
            value,
            Estimator::UnbiasedDcov2,
            Method::Direct,
            n,
        ))
    }

    /// `Ω(x,y) / sqrt(Ω(x,x) Ω(y,y))`, or 0 if either self-term is nonpositive.
    pub fn bias_corrected_dcor2(&self, s: &PairedSample) -> Result<DependenceEstimate> {
        let n = s.len();
        require_more_than(n, 3)?;
        self.check_cap(n)?;
        let a = u_center_owned(pairwise_distances(s.x())?)?;
        let b = u_center_owned(pairwise_distances(s.y())?)?;
        let value = standardize(
            frobenius_inner(&a, &b),
            frobenius_inner(&a, &a),
            frobenius_inner(&b, &b),
        );
        Ok(DependenceEstimate::new(
            value,
            Estimator::BiasCorrectedDcor2,
            Method::Direct,
            n,
        ))
    }

    /// Ω from raw distance sums:`Σ_{i≠j} a_ij b_ij`, `Σ a_i. b_i.` and `a.. b..`.
    pub fn omega_from_sums(&self, s: &PairedSample) -> Result<f64> {
        let n = s.len();
        require_more_than(n, 3)?;
        self.check_cap(n)?;
        let a = pairwise_distances(s.x())?;
        let b = pairwise_distances(s.y())?;
        let sums = RawSums::new(&a, &b);
        Ok(sums.omega(n))
    }

    /// Ω recomputed on the sample with pair `k` (0-based) removed.
    pub fn omega_leave_one_out(&self, s: &PairedSample, k: usize) -> Result<DependenceEstimate> {
        let n = s.len();
        require_more_than(n, 4)?;
        let reduced = s.without(k)?;
        let est = self.omega(&reduced)?;
        Ok(DependenceEstimate::new(
            est.value,
            Estimator::UnbiasedDcov2,
            Method::Direct,
            n - 1,
        ))
    }

    /// Leave-one-out Ω from the full-sample distance sums, without rebuilding
    /// the reduced matrices: row sums lose `a_ik`, the grand sum loses `2 a_k.`,
    /// and the cross term loses row and column `k`.
    pub fn omega_leave_one_out_closed_form(&self, s: &PairedSample, k: usize) -> Result<f64> {
        let n = s.len();
        require_more_than(n, 4)?;
        if k >= n {
            return Err(DcovError::IndexOutOfRange { index: k, n });
        }
        self.check_cap(n)?;
        let a = pairwise_distances(s.x())?;
        let b = pairwise_distances(s.y())?;
        let sums = RawSums::new(&a, &b);
        let (ak, bk) = (a.row(k), b.row(k));
        let cross_k = pairwise_sum_by(n, &|j| ak[j] * bk[j]);
        let cross = sums.cross - 2.0 * cross_k;
        let rows = pairwise_sum_by(n, &|i| {
            if i == k {
                0.0
            } else {
                (sums.a_row[i] - ak[i]) * (sums.b_row[i] - bk[i])
            }
        });
        let a_grand = sums.a_grand - 2.0 * sums.a_row[k];
        let b_grand = sums.b_grand - 2.0 * sums.b_row[k];
        let nf = n as f64;
        Ok(
            cross / ((nf - 1.0) * (nf - 4.0)) - 2.0 * rows / ((nf - 1.0) * (nf - 3.0) * (nf - 4.0))
                + a_grand * b_grand / ((nf - 1.0) * (nf - 2.0) * (nf - 3.0) * (nf - 4.0)),
        )
    }
}

struct RawSums {
    cross: f64,
    a_row: Vec<f64>,
    b_row: Vec<f64>,
    a_grand: f64,
    b_grand: f64,
}

impl RawSums {
    fn new(a: &DistanceMatrix, b: &DistanceMatrix) -> Self {
        let a_row = a.row_sums();
        let b_row = b.row_sums();
        Self {
            // zero diagonals make the full sum equal the i≠j sum
            cross: frobenius_inner(a, b),
            a_grand: pairwise_sum(&a_row),
            b_grand: pairwise_sum(&b_row),
            a_row,
            b_row,
        }
    }

    fn omega(&self, n: usize) -> f64 {
        let nf = n as f64;
        let rows = pairwise_sum_by(n, &|i| self.a_row[i] * self.b_row[i]);
        self.cross / (nf * (nf - 3.0)) - 2.0 * rows / (nf * (nf - 2.0) * (nf - 3.0))
            + self.a_grand * self.b_grand / (nf * (nf - 1.0) * (nf - 2.0) * (nf - 3.0))
    }
}

/// `cov / sqrt(var_x var_y)`, or 0 when either variance is nonpositive.
pub(crate) fn standardize(cov: f64, var_x: f64, var_y: f64) -> f64 {
    if var_x > 0.0 && var_y > 0.0 {
        cov / (var_x * var_y).sqrt()
    } else {
        0.0
    }
}

pub fn vstat_dcov2_direct(s: &PairedSample) -> Result<DependenceEstimate> {
    Direct::default().vstat_dcov2(s)
}

pub fn vstat_dcor2_direct(s: &PairedSample) -> Result<DependenceEstimate> {
    Direct::default().vstat_dcor2(s)
}

pub fn omega_direct(s: &PairedSample) -> Result<DependenceEstimate> {
    Direct::default().omega(s)
}

pub fn bias_corrected_dcor2_direct(s: &PairedSample) -> Result<DependenceEstimate> {
    Direct::default().bias_corrected_dcor2(s)
}

/// See [`Direct::omega_leave_one_out`]; `k` is 0-based.
pub fn omega_leave_one_out_direct(s: &PairedSample, k: usize) -> Result<DependenceEstimate> {
    Direct::default().omega_leave_one_out(s, k)
}
