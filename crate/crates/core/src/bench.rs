//! Timing harness for the fast and direct Ω estimators.

use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::datagen::RngStream;
use crate::error::{DcovError, Result};
use crate::estimate::Method;
use crate::fast::omega_fast;
use crate::format::sig6;
use crate::oracle::{Direct, DEFAULT_MAX_N};
use crate::sample::PairedSample;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub n: usize,
    pub method: Method,
    pub reps: usize,
    pub mean_seconds: f64,
    pub stderr_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub records: Vec<BenchRecord>,
    /// Sizes skipped because the direct estimator's memory cap refused them.
    pub notices: Vec<String>,
    /// Largest `|fast - direct| / max(1, |direct|)` seen on shared samples.
    pub max_relative_gap: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BenchOptions {
    /// Fixed repetition count; `None` uses [`default_reps`].
    pub reps: Option<usize>,
    pub direct_cap: usize,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self {
            reps: None,
            direct_cap: DEFAULT_MAX_N,
        }
    }
}

pub const EQUALITY_TOLERANCE: f64 = 1e-9;

/// 100 repetitions up to n = 2^11, 10 above.
pub fn default_reps(n: usize) -> usize {
    if n <= 1 << 11 {
        100
    } else {
        10
    }
}

/// Dependent normal pairs `y = x + z`.
pub fn bench_sample(n: usize, rng: &mut RngStream) -> Result<PairedSample> {
    let x: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
    let y = x.iter().map(|v| v + rng.normal()).collect();
    PairedSample::new(x, y)
}

fn mean_and_stderr(t: &[f64]) -> (f64, f64) {
    let m = t.len() as f64;
    let mean = t.iter().sum::<f64>() / m;
    if t.len() < 2 {
        return (mean, 0.0);
    }
    let var = t.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, (var / m).sqrt())
}

fn run_method(method: Method, direct: &Direct, s: &PairedSample) -> Result<(f64, f64)> {
    let start = Instant::now();
    let value = match method {
        Method::Fast => omega_fast(s)?.value,
        Method::Direct => direct.omega(s)?.value,
    };
    Ok((value, start.elapsed().as_secs_f64()))
}

pub fn bench_run(
    sizes: &[usize],
    methods: &[Method],
    reps: usize,
    seed: u64,
) -> Result<BenchReport> {
    bench_run_with(
        sizes,
        methods,
        seed,
        &BenchOptions {
            reps: Some(reps),
            ..Default::default()
        },
    )
}

/// Time each method on fresh samples, one measurement at a time. Samples at
/// size `n` come from RNG stream `n`; generation is excluded from timings.
/// When both methods run on a sample their outputs must agree within
/// [`EQUALITY_TOLERANCE`] relative, otherwise the run fails.
pub fn bench_run_with(
    sizes: &[usize],
    methods: &[Method],
    seed: u64,
    options: &BenchOptions,
) -> Result<BenchReport> {
    if let Some(&n) = sizes.iter().find(|&&n| n < 4) {
        return Err(DcovError::SampleTooSmall {
            n,
            min_exclusive: 3,
        });
    }
    if options.reps == Some(0) {
        return Err(DcovError::InvalidParameter(
            "reps must be at least 1".into(),
        ));
    }
    let direct = Direct {
        max_n: options.direct_cap,
    };
    let mut records = Vec::new();
    let mut notices = Vec::new();
    let mut max_gap: Option<f64> = None;

    for &n in sizes {
        let reps = options.reps.unwrap_or_else(|| default_reps(n));
        let mut active: Vec<Method> = Vec::new();
        for &m in methods {
            if active.contains(&m) {
                continue;
            }
            if m == Method::Direct && n > direct.max_n {
                notices.push(format!(
                    "skipping direct at n={n}: above the memory cap of {}",
                    direct.max_n
                ));
                continue;
            }
            active.push(m);
        }
        if active.is_empty() {
            continue;
        }
        let mut rng = RngStream::new(seed, n as u64);
        // warm-up, discarded
        let warm = bench_sample(n, &mut rng)?;
        for &m in &active {
            run_method(m, &direct, &warm)?;
        }
        let mut times = vec![Vec::with_capacity(reps); active.len()];
        for _ in 0..reps {
            let s = bench_sample(n, &mut rng)?;
            let mut values = Vec::with_capacity(active.len());
            for (slot, &m) in active.iter().enumerate() {
                let (v, t) = run_method(m, &direct, &s)?;
                times[slot].push(t);
                values.push((m, v));
            }
            let fast = values.iter().find(|(m, _)| *m == Method::Fast).map(|p| p.1);
            let slow = values
                .iter()
                .find(|(m, _)| *m == Method::Direct)
                .map(|p| p.1);
            if let (Some(fast), Some(slow)) = (fast, slow) {
                let gap = (fast - slow).abs() / slow.abs().max(1.0);
                max_gap = Some(max_gap.map_or(gap, |g| g.max(gap)));
                if gap > EQUALITY_TOLERANCE {
                    return Err(DcovError::Mismatch {
                        n,
                        fast,
                        direct: slow,
                    });
                }
            }
        }
        for (slot, &m) in active.iter().enumerate() {
            let (mean, stderr) = mean_and_stderr(&times[slot]);
            records.push(BenchRecord {
                n,
                method: m,
                reps,
                mean_seconds: mean.max(f64::MIN_POSITIVE),
                stderr_seconds: stderr,
            });
        }
    }
    Ok(BenchReport {
        records,
        notices,
        max_relative_gap: max_gap,
    })
}

/// Least-squares slope of `ln(mean_seconds)` against `ln(n)`.
pub fn fit_scaling_slope(records: &[BenchRecord]) -> Result<f64> {
    if records.len() < 3 {
        return Err(DcovError::InvalidParameter(format!(
            "slope fit needs at least 3 records, got {}",
            records.len()
        )));
    }
    if records.iter().any(|r| r.method != records[0].method) {
        return Err(DcovError::InvalidParameter(
            "slope fit needs records of one method".into(),
        ));
    }
    if records.iter().any(|r| r.mean_seconds <= 0.0) {
        return Err(DcovError::InvalidParameter("times must be positive".into()));
    }
    let pts: Vec<(f64, f64)> = records
        .iter()
        .map(|r| ((r.n as f64).ln(), r.mean_seconds.ln()))
        .collect();
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(DcovError::InvalidParameter(
            "slope fit needs distinct sizes".into(),
        ));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Ok(sxy / sxx)
}

pub fn records_for(records: &[BenchRecord], method: Method) -> Vec<BenchRecord> {
    records
        .iter()
        .filter(|r| r.method == method)
        .cloned()
        .collect()
}

/// `n,method,reps,mean_s,stderr_s` with full-precision values.
pub fn to_csv(records: &[BenchRecord]) -> String {
    let mut out = String::from("n,method,reps,mean_s,stderr_s\n");
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{:e},{:e}",
            r.n, r.method, r.reps, r.mean_seconds, r.stderr_seconds
        );
    }
    out
}

/// Text table with log2(n) and log10(seconds) columns for log-log plotting.
pub fn render_table(records: &[BenchRecord]) -> String {
    let mut out = format!(
        "{:>9} {:>7} {:>6} {:>5} {:>12} {:>12} {:>9}\n",
        "n", "method", "log2n", "reps", "mean_s", "stderr_s", "log10_s"
    );
    for r in records {
        let _ = writeln!(
            out,
            "{:>9} {:>7} {:>6} {:>5} {:>12} {:>12} {:>9}",
            r.n,
            r.method.to_string(),
            sig6((r.n as f64).log2()),
            r.reps,
            sig6(r.mean_seconds),
            sig6(r.stderr_seconds),
            sig6(r.mean_seconds.log10())
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(method: Method, f: impl Fn(f64) -> f64) -> Vec<BenchRecord> {
        [16usize, 64, 256, 1024]
            .iter()
            .map(|&n| BenchRecord {
                n,
                method,
                reps: 1,
                mean_seconds: f(n as f64),
                stderr_seconds: 0.0,
            })
            .collect()
    }

    #[test]
    fn slope_of_synthetic_power_laws() {
        let s = fit_scaling_slope(&synthetic(Method::Fast, |n| n)).unwrap();
        assert!((s - 1.0).abs() < 1e-9);
        let s = fit_scaling_slope(&synthetic(Method::Direct, |n| 3e-9 * n * n)).unwrap();
        assert!((s - 2.0).abs() < 1e-9);
    }

    #[test]
    fn slope_needs_three_records_of_one_method() {
        let mut r = synthetic(Method::Fast, |n| n);
        assert!(fit_scaling_slope(&r[..2]).is_err());
        r[0].method = Method::Direct;
        assert!(fit_scaling_slope(&r).is_err());
    }

    #[test]
    fn small_run_agrees_and_skips_over_cap() {
        let opts = BenchOptions {
            reps: Some(3),
            direct_cap: 64,
        };
        let report =
            bench_run_with(&[8, 32, 128], &[Method::Fast, Method::Direct], 5, &opts).unwrap();
        assert_eq!(report.records.len(), 5);
        assert_eq!(report.notices.len(), 1);
        assert!(report.notices[0].contains("n=128"));
        assert!(report.max_relative_gap.unwrap() <= EQUALITY_TOLERANCE);
        for r in &report.records {
            assert!(r.mean_seconds > 0.0 && r.stderr_seconds >= 0.0);
        }
        let csv = to_csv(&report.records);
        assert!(csv.starts_with("n,method,reps,mean_s,stderr_s\n8,fast,3,"));
        assert!(bench_run(&[3], &[Method::Fast], 1, 0).is_err());
    }

    #[test]
    fn mean_and_stderr_values() {
        let (m, s) = mean_and_stderr(&[1.0, 2.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_and_stderr(&[4.0]), (4.0, 0.0));
    }
}
