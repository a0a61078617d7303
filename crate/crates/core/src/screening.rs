//! Marginal-utility feature screening (SIS, SIRS, DC-SIS) and the
//! replication harness that summarizes S, P_s and P_a.

use std::cmp::Ordering;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datagen::{gen_screening_dataset, ColumnMatrix, Model, ScreeningDesign};
use crate::error::{require_more_than, DcovError, Result};
use crate::fast::{bias_corrected_dcor2_with_response, omega_fast_self};
use crate::format::sig6;
use crate::sample::PairedSample;
use crate::sirs::sirs_fast;
use crate::summation::{pairwise_sum, pairwise_sum_by};

pub const QUANTILE_LEVELS: [f64; 5] = [0.05, 0.25, 0.50, 0.75, 0.95];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScreeningMethod {
    #[serde(rename = "SIS")]
    Sis,
    #[serde(rename = "SIRS")]
    Sirs,
    #[serde(rename = "DC-SIS")]
    DcSis,
}

impl ScreeningMethod {
    pub const ALL: [ScreeningMethod; 3] = [
        ScreeningMethod::Sis,
        ScreeningMethod::Sirs,
        ScreeningMethod::DcSis,
    ];
}

impl fmt::Display for ScreeningMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScreeningMethod::Sis => "SIS",
            ScreeningMethod::Sirs => "SIRS",
            ScreeningMethod::DcSis => "DC-SIS",
        })
    }
}

impl FromStr for ScreeningMethod {
    type Err = DcovError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().replace('_', "-").as_str() {
            "SIS" => Ok(ScreeningMethod::Sis),
            "SIRS" => Ok(ScreeningMethod::Sirs),
            "DC-SIS" | "DCSIS" => Ok(ScreeningMethod::DcSis),
            _ => Err(DcovError::InvalidParameter(format!(
                "unknown screening method {s:?}"
            ))),
        }
    }
}

/// Sample Pearson correlation; 0 when either variance is 0 or n < 2.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len().min(y.len());
    if n < 2 {
        return 0.0;
    }
    let mx = pairwise_sum(&x[..n]) / n as f64;
    let my = pairwise_sum(&y[..n]) / n as f64;
    let sxy = pairwise_sum_by(n, &|i| (x[i] - mx) * (y[i] - my));
    let sxx = pairwise_sum_by(n, &|i| (x[i] - mx).powi(2));
    let syy = pairwise_sum_by(n, &|i| (y[i] - my).powi(2));
    if sxx > 0.0 && syy > 0.0 {
        (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)
    } else {
        0.0
    }
}

fn standardized(v: &[f64]) -> Vec<f64> {
    let n = v.len() as f64;
    let m = pairwise_sum(v) / n;
    let sd = (pairwise_sum_by(v.len(), &|i| (v[i] - m).powi(2)) / (n - 1.0)).sqrt();
    if sd > 0.0 {
        v.iter().map(|x| (x - m) / sd).collect()
    } else {
        vec![0.0; v.len()]
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScreeningOptions {
    /// Standardize each predictor before computing SIRS (off: x used as given).
    pub standardize_sirs: bool,
}

/// One utility per column of `x` against response `y`.
pub fn marginal_utilities(
    x: &ColumnMatrix,
    y: &[f64],
    method: ScreeningMethod,
) -> Result<Vec<f64>> {
    marginal_utilities_with(x, y, method, &ScreeningOptions::default())
}

pub fn marginal_utilities_with(
    x: &ColumnMatrix,
    y: &[f64],
    method: ScreeningMethod,
    options: &ScreeningOptions,
) -> Result<Vec<f64>> {
    if y.len() != x.n {
        return Err(DcovError::LengthMismatch { x: x.n, y: y.len() });
    }
    let n = x.n;
    // validates finiteness of the response once
    PairedSample::diagonal(y.to_vec())?;
    match method {
        ScreeningMethod::Sis => {
            require_more_than(n, 1)?;
            Ok((0..x.p).map(|k| pearson(x.column(k), y).abs()).collect())
        }
        ScreeningMethod::Sirs => {
            require_more_than(n, 2)?;
            (0..x.p)
                .map(|k| {
                    let col = if options.standardize_sirs {
                        standardized(x.column(k))
                    } else {
                        x.column(k).to_vec()
                    };
                    Ok(sirs_fast(&PairedSample::new(col, y.to_vec())?)?.value)
                })
                .collect()
        }
        ScreeningMethod::DcSis => {
            require_more_than(n, 3)?;
            let omega_yy = omega_fast_self(y)?;
            (0..x.p)
                .map(|k| {
                    let col = x.column(k);
                    crate::sample::check_finite("x", col)?;
                    Ok(bias_corrected_dcor2_with_response(col, y, omega_yy).max(0.0))
                })
                .collect()
        }
    }
}

/// 1-based rank of every predictor, descending utility, ties to the smaller index.
pub fn rank_predictors(utilities: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..utilities.len()).collect();
    order.sort_by(|&a, &b| {
        utilities[b]
            .partial_cmp(&utilities[a])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut rank = vec![0; utilities.len()];
    for (r, &k) in order.iter().enumerate() {
        rank[k] = r + 1;
    }
    rank
}

fn check_active(active: &[usize], p: usize) -> Result<()> {
    if active.is_empty() {
        return Err(DcovError::InvalidParameter("active set is empty".into()));
    }
    if let Some(&bad) = active.iter().find(|&&k| k >= p) {
        return Err(DcovError::IndexOutOfRange { index: bad, n: p });
    }
    Ok(())
}

/// Smallest model size (top-d by utility) containing every active predictor.
/// `active` holds 0-based indices.
pub fn min_model_size(utilities: &[f64], active: &[usize]) -> Result<usize> {
    check_active(active, utilities.len())?;
    let rank = rank_predictors(utilities);
    Ok(active.iter().map(|&k| rank[k]).max().unwrap_or(0))
}

/// Per-predictor and all-active selection proportions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionTable {
    /// `p_s[a][c]`: share of replications with active predictor `a` in the top `cutoffs[c]`.
    pub p_s: Vec<Vec<f64>>,
    /// `p_a[c]`: share of replications with every active predictor in the top `cutoffs[c]`.
    pub p_a: Vec<f64>,
}

/// `active_ranks[r][a]` is the rank of active predictor `a` in replication `r`.
pub fn selection_proportions(
    active_ranks: &[Vec<usize>],
    cutoffs: &[usize],
) -> Result<SelectionTable> {
    let reps = active_ranks.len();
    if reps == 0 {
        return Err(DcovError::InvalidParameter("no replications".into()));
    }
    let width = active_ranks[0].len();
    if active_ranks.iter().any(|r| r.len() != width) {
        return Err(DcovError::InvalidParameter(
            "ragged replication ranks".into(),
        ));
    }
    let share = |count: usize| count as f64 / reps as f64;
    let p_s = (0..width)
        .map(|a| {
            cutoffs
                .iter()
                .map(|&d| share(active_ranks.iter().filter(|r| r[a] <= d).count()))
                .collect()
        })
        .collect();
    let p_a = cutoffs
        .iter()
        .map(|&d| {
            share(
                active_ranks
                    .iter()
                    .filter(|r| r.iter().all(|&k| k <= d))
                    .count(),
            )
        })
        .collect();
    Ok(SelectionTable { p_s, p_a })
}

/// Linear interpolation between order statistics at 1-based position
/// `h = (m - 1) q + 1`.
pub fn quantile(values: &[f64], q: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(DcovError::Empty);
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(DcovError::InvalidParameter(format!(
            "quantile level {q} outside [0, 1]"
        )));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    Ok(sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]))
}

/// `d1 = floor(p / (10 ln n))` (at least 1), `d2 = 2 d1`, `d3 = 3 d1`.
pub fn model_size_cutoffs(p: usize, n: usize) -> [usize; 3] {
    let d1 = ((p as f64 / (10.0 * (n as f64).ln())).floor() as usize).max(1);
    [d1, 2 * d1, 3 * d1]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreeningReport {
    pub method: ScreeningMethod,
    pub model: Model,
    pub p: usize,
    pub n: usize,
    pub rho: f64,
    pub seed: u64,
    pub replications: usize,
    pub quantile_levels: Vec<f64>,
    pub s_quantiles: Vec<f64>,
    pub cutoffs: Vec<usize>,
    /// Names of the active predictors, 1-based (`X1`, `X2`, ...).
    pub active: Vec<String>,
    #[serde(flatten)]
    pub selection: SelectionTable,
    pub min_model_sizes: Vec<usize>,
}

/// Replicate the screening design; replication `r` uses RNG stream `r`, so
/// results do not depend on scheduling.
pub fn run_screening_experiment(
    design: &ScreeningDesign,
    methods: &[ScreeningMethod],
    replications: usize,
    seed: u64,
) -> Result<Vec<ScreeningReport>> {
    run_screening_experiment_with(
        design,
        methods,
        replications,
        seed,
        &ScreeningOptions::default(),
    )
}

pub fn run_screening_experiment_with(
    design: &ScreeningDesign,
    methods: &[ScreeningMethod],
    replications: usize,
    seed: u64,
    options: &ScreeningOptions,
) -> Result<Vec<ScreeningReport>> {
    design.validate()?;
    if replications == 0 {
        return Err(DcovError::InvalidParameter(
            "replications must be at least 1".into(),
        ));
    }
    if methods.is_empty() {
        return Err(DcovError::InvalidParameter(
            "no screening methods given".into(),
        ));
    }
    let active = design.model.active_set();
    check_active(&active, design.p)?;

    // per replication, per method: ranks of the active predictors
    let per_rep: Vec<Vec<Vec<usize>>> = (0..replications)
        .into_par_iter()
        .map(|r| {
            let data = gen_screening_dataset(design, seed, r as u64)?;
            methods
                .iter()
                .map(|&m| {
                    let u = marginal_utilities_with(&data.x, &data.y, m, options)?;
                    let rank = rank_predictors(&u);
                    Ok(active.iter().map(|&k| rank[k]).collect())
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let cutoffs = model_size_cutoffs(design.p, design.n);
    methods
        .iter()
        .enumerate()
        .map(|(mi, &method)| {
            let ranks: Vec<Vec<usize>> = per_rep.iter().map(|rep| rep[mi].clone()).collect();
            let sizes: Vec<usize> = ranks
                .iter()
                .map(|r| r.iter().copied().max().unwrap_or(0))
                .collect();
            let as_f64: Vec<f64> = sizes.iter().map(|&s| s as f64).collect();
            let s_quantiles = QUANTILE_LEVELS
                .iter()
                .map(|&q| quantile(&as_f64, q))
                .collect::<Result<_>>()?;
            Ok(ScreeningReport {
                method,
                model: design.model,
                p: design.p,
                n: design.n,
                rho: design.rho,
                seed,
                replications,
                quantile_levels: QUANTILE_LEVELS.to_vec(),
                s_quantiles,
                cutoffs: cutoffs.to_vec(),
                active: active.iter().map(|k| format!("X{}", k + 1)).collect(),
                selection: selection_proportions(&ranks, &cutoffs)?,
                min_model_sizes: sizes,
            })
        })
        .collect()
}

/// Aligned text tables: S quantiles, then P_s / P_a per cutoff.
pub fn render_tables(reports: &[ScreeningReport]) -> String {
    let mut out = String::new();
    if let Some(first) = reports.first() {
        let _ = writeln!(
            out,
            "model {}  p={}  n={}  rho={}  replications={}  seed={}",
            first.model, first.p, first.n, first.rho, first.replications, first.seed
        );
        out.push('\n');
    }
    let _ = writeln!(out, "Minimum model size S");
    let _ = write!(out, "{:<8}", "method");
    for q in QUANTILE_LEVELS {
        let _ = write!(out, "{:>9}", format!("{}%", (q * 100.0).round()));
    }
    out.push('\n');
    for r in reports {
        let _ = write!(out, "{:<8}", r.method.to_string());
        for v in &r.s_quantiles {
            let _ = write!(out, "{:>9}", sig6(*v));
        }
        out.push('\n');
    }
    out.push('\n');
    let _ = writeln!(
        out,
        "Selection proportions P_s (per active predictor) and P_a (all)"
    );
    let _ = write!(out, "{:<8}{:>6}", "method", "size");
    if let Some(first) = reports.first() {
        for name in &first.active {
            let _ = write!(out, "{:>7}", name);
        }
    }
    let _ = writeln!(out, "{:>7}", "All");
    for r in reports {
        for (c, d) in r.cutoffs.iter().enumerate() {
            let label = if c == 0 {
                r.method.to_string()
            } else {
                String::new()
            };
            let _ = write!(out, "{:<8}{:>6}", label, format!("d{}={}", c + 1, d));
            for row in &r.selection.p_s {
                let _ = write!(out, "{:>7.2}", row[c]);
            }
            let _ = writeln!(out, "{:>7.2}", r.selection.p_a[c]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::omega_direct;
    use crate::sirs::sirs_direct;

    #[test]
    fn pearson_examples() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        assert!((pearson(&x, &y) - 1.0).abs() < 1e-15);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson(&x, &neg) + 1.0).abs() < 1e-15);
        assert!((pearson(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]) - 0.5).abs() < 1e-15);
        assert_eq!(pearson(&[1.0; 3], &[1.0, 3.0, 2.0]), 0.0);
        assert_eq!(pearson(&[1.0], &[2.0]), 0.0);
    }

    #[test]
    fn quantile_examples() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile(&v, 0.5).unwrap(), 3.0);
        assert_eq!(quantile(&v, 0.0).unwrap(), 1.0);
        assert_eq!(quantile(&v, 1.0).unwrap(), 5.0);
        assert_eq!(quantile(&[4.0, 2.0, 1.0, 3.0], 0.25).unwrap(), 1.75);
        assert_eq!(quantile(&[7.0], 0.3).unwrap(), 7.0);
        assert_eq!(quantile(&[], 0.5), Err(DcovError::Empty));
        assert!(quantile(&v, 1.5).is_err());
    }

    #[test]
    fn min_model_size_examples() {
        assert_eq!(min_model_size(&[0.9, 0.1, 0.5, 0.7], &[0, 3]).unwrap(), 2);
        assert_eq!(
            min_model_size(&[0.9, 0.1, 0.5, 0.7], &[0, 1, 2, 3]).unwrap(),
            4
        );
        assert!(min_model_size(&[0.9, 0.1], &[]).is_err());
        assert!(min_model_size(&[0.9, 0.1], &[2]).is_err());
    }

    #[test]
    fn min_model_size_tie_rule() {
        // predictors 1 and 2 tie; the smaller index ranks first
        let u = [0.9, 0.5, 0.5, 0.1];
        assert_eq!(rank_predictors(&u), vec![1, 2, 3, 4]);
        assert_eq!(min_model_size(&u, &[1]).unwrap(), 2);
        assert_eq!(min_model_size(&u, &[2]).unwrap(), 3);
        // enumerate both orderings of the tied pair: only the index rule holds
        let swapped = [0.9, 0.5, 0.5 + 1e-12, 0.1];
        assert_eq!(min_model_size(&swapped, &[2]).unwrap(), 2);
    }

    #[test]
    fn selection_examples() {
        let t = selection_proportions(&[vec![1, 2]], &[2, 4, 6]).unwrap();
        assert_eq!(t.p_s, vec![vec![1.0; 3], vec![1.0; 3]]);
        assert_eq!(t.p_a, vec![1.0; 3]);
        let t = selection_proportions(&[vec![1], vec![9]], &[3]).unwrap();
        assert_eq!(t.p_s, vec![vec![0.5]]);
        let t = selection_proportions(&[vec![1, 5], vec![4, 2], vec![2, 2]], &[2, 4]).unwrap();
        for c in 0..2 {
            for row in &t.p_s {
                assert!(t.p_a[c] <= row[c]);
            }
        }
        assert!(selection_proportions(&[], &[1]).is_err());
    }

    #[test]
    fn cutoffs() {
        // 500 / (10 ln 200) = 9.43
        assert_eq!(model_size_cutoffs(500, 200), [9, 18, 27]);
        assert_eq!(model_size_cutoffs(22, 200), [1, 2, 3]);
    }

    fn small_matrix() -> (ColumnMatrix, Vec<f64>) {
        let design = ScreeningDesign::new(22, 30, 0.5, Model::M1a).unwrap();
        let data = gen_screening_dataset(&design, 4, 0).unwrap();
        (data.x, data.y)
    }

    #[test]
    fn perfect_and_constant_columns() {
        let (x, _) = small_matrix();
        let mut cols: Vec<Vec<f64>> = (0..x.p).map(|k| x.column(k).to_vec()).collect();
        // SIRS is not location invariant, so the constant column is zero
        cols[3] = vec![0.0; x.n];
        let y = cols[7].clone();
        let m = ColumnMatrix::from_columns(cols).unwrap();
        for method in ScreeningMethod::ALL {
            let u = marginal_utilities(&m, &y, method).unwrap();
            assert_eq!(u[3], 0.0, "{method}");
            let top = rank_predictors(&u).iter().position(|&r| r == 1).unwrap();
            assert_eq!(top, 7, "{method}");
        }
    }

    #[test]
    fn utilities_match_direct_oracles() {
        let (x, y) = small_matrix();
        let oy = omega_direct(&PairedSample::diagonal(y.clone()).unwrap())
            .unwrap()
            .value;
        let dc = marginal_utilities(&x, &y, ScreeningMethod::DcSis).unwrap();
        let sirs = marginal_utilities(&x, &y, ScreeningMethod::Sirs).unwrap();
        for k in 0..10 {
            let col = x.column(k).to_vec();
            let oxy = omega_direct(&PairedSample::new(col.clone(), y.clone()).unwrap())
                .unwrap()
                .value;
            let oxx = omega_direct(&PairedSample::diagonal(col.clone()).unwrap())
                .unwrap()
                .value;
            let want = (oxy / (oxx * oy).sqrt()).max(0.0);
            assert!((dc[k] - want).abs() < 1e-9);
            let s = sirs_direct(&PairedSample::new(col, y.clone()).unwrap())
                .unwrap()
                .value;
            assert!((sirs[k] - s).abs() <= 1e-9 * s.abs().max(1.0));
        }
    }

    #[test]
    fn experiment_is_deterministic() {
        let design = ScreeningDesign::new(40, 40, 0.5, Model::M1b).unwrap();
        let a = run_screening_experiment(&design, &ScreeningMethod::ALL, 6, 17).unwrap();
        let b = run_screening_experiment(&design, &ScreeningMethod::ALL, 6, 17).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        for r in &a {
            assert!(r.s_quantiles.windows(2).all(|w| w[0] <= w[1]));
            assert!(r.min_model_sizes.iter().all(|&s| s >= 4));
        }
        let text = render_tables(&a);
        assert!(text.contains("DC-SIS") && text.contains("X22"));
        assert!(run_screening_experiment(&design, &ScreeningMethod::ALL, 0, 1).is_err());
    }
}
