//! Brute-force reference implementations written straight from the
//! definitions, sharing no code with the library's estimators.
#![allow(dead_code)]

use fastdcov::datagen::RngStream;

fn distances(v: &[f64]) -> Vec<Vec<f64>> {
    v.iter()
        .map(|a| v.iter().map(|b| (a - b).abs()).collect())
        .collect()
}

fn u_centered(v: &[f64]) -> Vec<Vec<f64>> {
    let n = v.len();
    let nf = n as f64;
    let d = distances(v);
    let row: Vec<f64> = d.iter().map(|r| r.iter().sum()).collect();
    let grand: f64 = row.iter().sum();
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                out[i][j] = d[i][j] - row[i] / (nf - 2.0) - row[j] / (nf - 2.0)
                    + grand / ((nf - 1.0) * (nf - 2.0));
            }
        }
    }
    out
}

/// Unbiased Ω via explicit U-centering.
pub fn naive_omega(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let a = u_centered(x);
    let b = u_centered(y);
    let mut s = 0.0;
    for i in 0..x.len() {
        for j in 0..x.len() {
            if i != j {
                s += a[i][j] * b[i][j];
            }
        }
    }
    s / (n * (n - 3.0))
}

/// Ω as the average of the order-4 kernel over all 4-subsets, O(n⁴).
pub fn kernel_omega(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let a = distances(x);
    let b = distances(y);
    let h = |i: usize, j: usize, k: usize, l: usize| {
        a[i][j] * b[i][j] + a[i][j] * b[k][l] - 2.0 * a[i][j] * b[i][k]
    };
    let mut total = 0.0;
    let mut count = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    if i == j || i == k || i == l || j == k || j == l || k == l {
                        continue;
                    }
                    total += h(i, j, k, l);
                    count += 1.0;
                }
            }
        }
    }
    total / count
}

/// V-statistic dCov² with full double-centering.
pub fn naive_vstat(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let nf = n as f64;
    let center = |d: Vec<Vec<f64>>| {
        let row: Vec<f64> = d.iter().map(|r| r.iter().sum::<f64>() / nf).collect();
        let grand = row.iter().sum::<f64>() / nf;
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| d[i][j] - row[i] - row[j] + grand)
                    .collect::<Vec<_>>()
            })
            .collect::<Vec<_>>()
    };
    let a = center(distances(x));
    let b = center(distances(y));
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += a[i][j] * b[i][j];
        }
    }
    s / (nf * nf)
}

pub fn naive_sirs(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mut s = 0.0;
    for &yj in y {
        let inner: f64 = x
            .iter()
            .zip(y)
            .filter(|(_, &yi)| yi < yj)
            .map(|(xi, _)| xi)
            .sum();
        s += inner * inner;
    }
    s / (n * (n - 1.0) * (n - 2.0))
}

pub fn rel_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

/// Sample families used across the suites: continuous, heavy ties,
/// constant and two-valued coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Continuous,
    Discrete,
    Constant,
    TwoValued,
}

pub const FAMILIES: [Family; 4] = [
    Family::Continuous,
    Family::Discrete,
    Family::Constant,
    Family::TwoValued,
];

pub fn draw(family: Family, n: usize, rng: &mut RngStream) -> Vec<f64> {
    match family {
        Family::Continuous => (0..n).map(|_| rng.normal() * 3.0 + 1.0).collect(),
        Family::Discrete => (0..n).map(|_| (rng.uniform(0.0, 6.0)).floor()).collect(),
        Family::Constant => vec![2.5; n],
        Family::TwoValued => (0..n)
            .map(|_| if rng.coin() { -1.0 } else { 4.0 })
            .collect(),
    }
}

/// Dependent pair: y shares part of x when both are non-degenerate.
pub fn draw_pair(fx: Family, fy: Family, n: usize, rng: &mut RngStream) -> (Vec<f64>, Vec<f64>) {
    let x = draw(fx, n, rng);
    let mut y = draw(fy, n, rng);
    if fy == Family::Continuous {
        for (yi, xi) in y.iter_mut().zip(&x) {
            *yi += xi * xi;
        }
    }
    (x, y)
}
