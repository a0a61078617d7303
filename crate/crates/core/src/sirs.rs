//! SIRS marginal utility
//! `(1/(n(n-1)(n-2))) Σ_j [Σ_i x_i 1(y_i < y_j)]²`.

use std::cmp::Ordering;

use crate::error::{require_more_than, Result};
use crate::estimate::{DependenceEstimate, Estimator, Method};
use crate::sample::PairedSample;
use crate::summation::{pairwise_sum, pairwise_sum_by};

/// Per-observation partial sums used by the O(n log n) evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct SirsIntermediates {
    /// `α_k = #{j : y_k < y_j}`
    pub alpha: Vec<usize>,
    /// `β_i = Σ_{k : y_k ≥ y_i} x_k α_k`
    pub beta: Vec<f64>,
    /// `γ_i = Σ_{k : y_k < y_i} x_k`
    pub gamma: Vec<f64>,
}

impl SirsIntermediates {
    /// Sort by y once and walk runs of equal y values, so strict and
    /// non-strict comparisons are both exact under ties.
    pub fn new(x: &[f64], y: &[f64]) -> Self {
        let n = y.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| y[a].partial_cmp(&y[b]).unwrap_or(Ordering::Equal));

        let mut runs = Vec::new();
        let mut start = 0;
        while start < n {
            let mut end = start + 1;
            while end < n && y[order[end]] == y[order[start]] {
                end += 1;
            }
            runs.push((start, end));
            start = end;
        }

        let mut alpha = vec![0usize; n];
        for &(start, end) in &runs {
            for &k in &order[start..end] {
                alpha[k] = n - end;
            }
        }

        // γ: x mass strictly below each run, scanning upwards.
        let mut gamma = vec![0.0; n];
        let mut below = 0.0;
        for &(start, end) in &runs {
            for &k in &order[start..end] {
                gamma[k] = below;
            }
            below += order[start..end].iter().map(|&k| x[k]).sum::<f64>();
        }

        // β: x·α mass at or above each run, scanning downwards.
        let mut beta = vec![0.0; n];
        let mut above = 0.0;
        for &(start, end) in runs.iter().rev() {
            above += order[start..end]
                .iter()
                .map(|&k| x[k] * alpha[k] as f64)
                .sum::<f64>();
            for &k in &order[start..end] {
                beta[k] = above;
            }
        }

        Self { alpha, beta, gamma }
    }
}

fn normalizer(n: usize) -> f64 {
    let nf = n as f64;
    nf * (nf - 1.0) * (nf - 2.0)
}

/// SIRS by its defining double sum, O(n²).
pub fn sirs_direct(s: &PairedSample) -> Result<DependenceEstimate> {
    let n = s.len();
    require_more_than(n, 2)?;
    let (x, y) = (s.x(), s.y());
    let squares: Vec<f64> = y
        .iter()
        .map(|&yj| {
            let inner = pairwise_sum_by(n, &|i| if y[i] < yj { x[i] } else { 0.0 });
            inner * inner
        })
        .collect();
    let value = pairwise_sum(&squares) / normalizer(n);
    Ok(DependenceEstimate::new(
        value,
        Estimator::Sirs,
        Method::Direct,
        n,
    ))
}

/// SIRS as `Σ_i x_i (β_i + γ_i α_i) / (n(n-1)(n-2))`, O(n log n).
pub fn sirs_fast(s: &PairedSample) -> Result<DependenceEstimate> {
    let n = s.len();
    require_more_than(n, 2)?;
    let (x, y) = (s.x(), s.y());
    let parts = SirsIntermediates::new(x, y);
    let total = pairwise_sum_by(n, &|i| {
        x[i] * (parts.beta[i] + parts.gamma[i] * parts.alpha[i] as f64)
    });
    Ok(DependenceEstimate::new(
        total / normalizer(n),
        Estimator::Sirs,
        Method::Fast,
        n,
    ))
}
