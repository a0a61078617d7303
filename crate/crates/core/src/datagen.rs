//! Seeded synthetic data: the nine showcase dependence patterns and the
//! AR(1)-correlated screening design with response models 1a–1d.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Bernoulli, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{DcovError, Result};
use crate::sample::PairedSample;

/// Pinned generator identity. Streams are reproducible within this artifact
/// for a given `(seed, stream_id)`.
pub const RNG_ALGORITHM: &str =
    "ChaCha20 (rand_chacha 0.9): seed_from_u64(seed), set_stream(stream_id)";

/// Counter-based random stream keyed by `(seed, stream_id)`.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha20Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    /// Uniform on `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.rng.random::<f64>()
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        Bernoulli::new(p)
            .map(|b| b.sample(&mut self.rng))
            .unwrap_or(false)
    }

    pub fn coin(&mut self) -> bool {
        self.rng.random::<bool>()
    }
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }
}

/// n×p predictor matrix stored by column, since screening scans columns.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnMatrix {
    pub n: usize,
    pub p: usize,
    data: Vec<f64>,
}

impl ColumnMatrix {
    pub fn from_columns(columns: Vec<Vec<f64>>) -> Result<Self> {
        let p = columns.len();
        let n = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != n) {
            return Err(DcovError::InvalidParameter("ragged columns".into()));
        }
        Ok(Self {
            n,
            p,
            data: columns.concat(),
        })
    }

    /// Column `k`, 0-based.
    pub fn column(&self, k: usize) -> &[f64] {
        &self.data[k * self.n..(k + 1) * self.n]
    }

    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.data[k * self.n + i]
    }
}

/// Upper-triangular `R` with `RᵀR = Σ`, `σ_ij = ρ^|i-j|`:
/// `r_1j = ρ^(j-1)`, `r_ij = c ρ^(j-i)` for `2 ≤ i ≤ j`, `c = sqrt(1 - ρ²)`.
pub fn ar_cholesky_factor(p: usize, rho: f64) -> Result<Matrix> {
    if p == 0 {
        return Err(DcovError::InvalidParameter("p must be at least 1".into()));
    }
    check_rho(rho)?;
    let c = (1.0 - rho * rho).sqrt();
    let mut r = Matrix::zeros(p, p);
    for i in 0..p {
        let scale = if i == 0 { 1.0 } else { c };
        let mut power = 1.0;
        for j in i..p {
            r.set(i, j, scale * power);
            power *= rho;
        }
    }
    Ok(r)
}

fn check_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho < 1.0 {
        Ok(())
    } else {
        Err(DcovError::InvalidParameter(format!(
            "rho must lie in (0, 1), got {rho}"
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Model {
    #[serde(rename = "1a")]
    M1a,
    #[serde(rename = "1b")]
    M1b,
    #[serde(rename = "1c")]
    M1c,
    #[serde(rename = "1d")]
    M1d,
}

impl Model {
    pub const ALL: [Model; 4] = [Model::M1a, Model::M1b, Model::M1c, Model::M1d];

    /// 0-based indices of X1, X2, X12, X22.
    pub fn active_set(self) -> Vec<usize> {
        vec![0, 1, 11, 21]
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::M1a => "1a",
            Model::M1b => "1b",
            Model::M1c => "1c",
            Model::M1d => "1d",
        })
    }
}

impl FromStr for Model {
    type Err = DcovError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['.', '(', ')'], "").as_str() {
            "1a" | "a" => Ok(Model::M1a),
            "1b" | "b" => Ok(Model::M1b),
            "1c" | "c" => Ok(Model::M1c),
            "1d" | "d" => Ok(Model::M1d),
            _ => Err(DcovError::InvalidParameter(format!("unknown model {s:?}"))),
        }
    }
}

pub const DEFAULT_MULTIPLIERS: [f64; 4] = [2.0, 0.5, 3.0, 2.0];

/// Smallest predictor count the response models can address (they use X22).
pub const MIN_PREDICTORS: usize = 22;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScreeningDesign {
    pub p: usize,
    pub n: usize,
    pub rho: f64,
    pub model: Model,
    pub c: [f64; 4],
}

impl ScreeningDesign {
    pub fn new(p: usize, n: usize, rho: f64, model: Model) -> Result<Self> {
        let d = Self {
            p,
            n,
            rho,
            model,
            c: DEFAULT_MULTIPLIERS,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.p < MIN_PREDICTORS {
            return Err(DcovError::InvalidParameter(format!(
                "p={} but the response models need at least {MIN_PREDICTORS} predictors",
                self.p
            )));
        }
        if self.n < 5 {
            return Err(DcovError::InvalidParameter(format!(
                "n={} is below 5",
                self.n
            )));
        }
        check_rho(self.rho)
    }
}

/// Rows `x = Rᵀz`, z standard normal. With the closed-form factor this is
/// the AR(1) recursion `x_1 = z_1`, `x_j = ρ x_(j-1) + c z_j`.
pub fn gen_predictors(design: &ScreeningDesign, rng: &mut RngStream) -> Result<ColumnMatrix> {
    design.validate()?;
    let (n, p, rho) = (design.n, design.p, design.rho);
    let c = (1.0 - rho * rho).sqrt();
    let mut data = vec![0.0; n * p];
    for i in 0..n {
        let mut prev = rng.normal();
        data[i] = prev;
        for j in 1..p {
            prev = rho * prev + c * rng.normal();
            data[j * n + i] = prev;
        }
    }
    Ok(ColumnMatrix { n, p, data })
}

/// `a = 4 ln(n) / sqrt(n)`.
pub fn coefficient_floor(n: usize) -> f64 {
    let nf = n as f64;
    4.0 * nf.ln() / nf.sqrt()
}

/// Four draws of `(-1)^U (a + |Z|)`, `U ~ Bernoulli(0.4)`, `Z ~ N(0, 1)`.
pub fn gen_coefficients(n: usize, rng: &mut RngStream) -> Result<[f64; 4]> {
    if n < 2 {
        return Err(DcovError::InvalidParameter(format!("n={n} is below 2")));
    }
    let a = coefficient_floor(n);
    let mut betas = [0.0; 4];
    for b in betas.iter_mut() {
        let negative = rng.bernoulli(0.4);
        let magnitude = a + rng.normal().abs();
        *b = if negative { -magnitude } else { magnitude };
    }
    Ok(betas)
}

/// Response with the noise vector supplied by the caller.
pub fn response_from_noise(
    design: &ScreeningDesign,
    x: &ColumnMatrix,
    betas: &[f64; 4],
    noise: &[f64],
) -> Result<Vec<f64>> {
    if x.p < MIN_PREDICTORS {
        return Err(DcovError::InvalidParameter(format!(
            "predictor matrix has {} columns, models need {MIN_PREDICTORS}",
            x.p
        )));
    }
    if noise.len() != x.n {
        return Err(DcovError::LengthMismatch {
            x: x.n,
            y: noise.len(),
        });
    }
    let [c1, c2, c3, c4] = design.c;
    let [b1, b2, b3, b4] = *betas;
    let (x1, x2, x12, x22) = (x.column(0), x.column(1), x.column(11), x.column(21));
    let ind = |v: f64| if v < 0.0 { 1.0 } else { 0.0 };
    let y = (0..x.n)
        .map(|i| {
            let e = noise[i];
            match design.model {
                Model::M1a => {
                    c1 * b1 * x1[i] + c2 * b2 * x2[i] + c3 * b3 * ind(x12[i]) + c4 * b4 * x22[i] + e
                }
                Model::M1b => {
                    c1 * b1 * x1[i] * x2[i] + c3 * b2 * ind(x12[i]) + c4 * b3 * x22[i] + e
                }
                Model::M1c => c1 * b1 * x1[i] * x2[i] + c3 * b2 * ind(x12[i]) * x22[i] + e,
                Model::M1d => {
                    c1 * b1 * x1[i]
                        + c2 * b2 * x2[i]
                        + c3 * b3 * ind(x12[i])
                        + (c4 * x22[i].abs()).exp() * e
                }
            }
        })
        .collect();
    Ok(y)
}

pub fn gen_response(
    design: &ScreeningDesign,
    x: &ColumnMatrix,
    betas: &[f64; 4],
    rng: &mut RngStream,
) -> Result<Vec<f64>> {
    let noise: Vec<f64> = (0..x.n).map(|_| rng.normal()).collect();
    response_from_noise(design, x, betas, &noise)
}

/// One replication of the screening design.
#[derive(Debug, Clone)]
pub struct ScreeningDataset {
    pub betas: [f64; 4],
    pub x: ColumnMatrix,
    pub y: Vec<f64>,
}

/// Coefficients, then predictors, then noise, all from stream `stream_id`.
pub fn gen_screening_dataset(
    design: &ScreeningDesign,
    seed: u64,
    stream_id: u64,
) -> Result<ScreeningDataset> {
    let mut rng = RngStream::new(seed, stream_id);
    let betas = gen_coefficients(design.n, &mut rng)?;
    let x = gen_predictors(design, &mut rng)?;
    let y = gen_response(design, &x, &betas, &mut rng)?;
    Ok(ScreeningDataset { betas, x, y })
}

/// Tunable constants of the nine showcase generators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShowcaseParams {
    pub rho_moderate: f64,
    pub rho_high: f64,
    pub ripple_frequency: f64,
    pub ripple_noise_sd: f64,
    pub square_half_width: f64,
    pub rotation_small: f64,
    pub rotation_large: f64,
    pub parabola_half_band: f64,
    pub bifurcation_band: f64,
    pub circle_noise_sd: f64,
    pub mixture_center: f64,
    pub mixture_sd: f64,
}

impl Default for ShowcaseParams {
    fn default() -> Self {
        Self {
            rho_moderate: 0.8,
            rho_high: 0.98,
            ripple_frequency: 4.0 * PI,
            ripple_noise_sd: 0.25,
            square_half_width: 1.0,
            rotation_small: PI / 8.0,
            rotation_large: PI / 4.0,
            parabola_half_band: 0.25,
            bifurcation_band: 0.25,
            circle_noise_sd: 0.05,
            mixture_center: 1.0,
            mixture_sd: 0.3,
        }
    }
}

pub const SHOWCASE_CASES: std::ops::RangeInclusive<u8> = 1..=9;

pub fn showcase_label(case: u8) -> &'static str {
    match case {
        1 => "bivariate normal, moderate correlation",
        2 => "bivariate normal, correlation near 1",
        3 => "thickened rippled curve",
        4 => "rotated uniform square",
        5 => "further rotated uniform square",
        6 => "thickened quadratic curve",
        7 => "bifurcated quadratic curves",
        8 => "thickened circle",
        9 => "independent mixed normal",
        _ => "unknown",
    }
}

pub fn gen_showcase(case: u8, n: usize, rng: &mut RngStream) -> Result<PairedSample> {
    gen_showcase_with(case, n, &ShowcaseParams::default(), rng)
}

/// Draw `n` points from showcase pattern `case` (1..=9).
pub fn gen_showcase_with(
    case: u8,
    n: usize,
    params: &ShowcaseParams,
    rng: &mut RngStream,
) -> Result<PairedSample> {
    if !SHOWCASE_CASES.contains(&case) {
        return Err(DcovError::InvalidParameter(format!(
            "showcase case must be 1..=9, got {case}"
        )));
    }
    if n < 2 {
        return Err(DcovError::InvalidParameter(format!("n={n} is below 2")));
    }
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let (a, b) = showcase_point(case, params, rng);
        x.push(a);
        y.push(b);
    }
    PairedSample::new(x, y)
}

fn showcase_point(case: u8, p: &ShowcaseParams, rng: &mut RngStream) -> (f64, f64) {
    let correlated = |rng: &mut RngStream, rho: f64| {
        let z1 = rng.normal();
        let z2 = rng.normal();
        (z1, rho * z1 + (1.0 - rho * rho).sqrt() * z2)
    };
    let rotated_square = |rng: &mut RngStream, theta: f64| {
        let h = p.square_half_width;
        let u = rng.uniform(-h, h);
        let v = rng.uniform(-h, h);
        let (s, c) = theta.sin_cos();
        (u * c - v * s, u * s + v * c)
    };
    match case {
        1 => correlated(rng, p.rho_moderate),
        2 => correlated(rng, p.rho_high),
        3 => {
            let x = rng.uniform(0.0, 1.0);
            (
                x,
                (p.ripple_frequency * x).cos() + p.ripple_noise_sd * rng.normal(),
            )
        }
        4 => rotated_square(rng, p.rotation_small),
        5 => rotated_square(rng, p.rotation_large),
        6 => {
            let x = rng.uniform(-1.0, 1.0);
            let w = p.parabola_half_band;
            (x, x * x + rng.uniform(-w, w))
        }
        7 => {
            let x = rng.uniform(-1.0, 1.0);
            let sign = if rng.coin() { 1.0 } else { -1.0 };
            (x, sign * (x * x + rng.uniform(0.0, p.bifurcation_band)))
        }
        8 => {
            let theta = rng.uniform(0.0, 2.0 * PI);
            let r = 1.0 + p.circle_noise_sd * rng.normal();
            (r * theta.cos(), r * theta.sin())
        }
        _ => {
            let mix = |rng: &mut RngStream| {
                let centre = if rng.coin() {
                    p.mixture_center
                } else {
                    -p.mixture_center
                };
                centre + p.mixture_sd * rng.normal()
            };
            let x = mix(rng);
            (x, mix(rng))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gram(r: &Matrix) -> Matrix {
        let p = r.cols;
        let mut g = Matrix::zeros(p, p);
        for i in 0..p {
            for j in 0..p {
                g.set(i, j, (0..p).map(|k| r.get(k, i) * r.get(k, j)).sum());
            }
        }
        g
    }

    #[test]
    fn cholesky_small() {
        let r = ar_cholesky_factor(2, 0.5).unwrap();
        assert_eq!(r.data[..3], [1.0, 0.5, 0.0]);
        assert!((r.get(1, 1) - 0.75f64.sqrt()).abs() < 1e-15);
        let g = gram(&r);
        assert!((g.get(0, 1) - 0.5).abs() < 1e-12 && (g.get(1, 1) - 1.0).abs() < 1e-12);
        assert_eq!(ar_cholesky_factor(1, 0.3).unwrap().data, vec![1.0]);
        let g = gram(&ar_cholesky_factor(5, 0.8).unwrap());
        for i in 0..5 {
            for j in 0..5 {
                let want = 0.8f64.powi((i as i32 - j as i32).abs());
                assert!((g.get(i, j) - want).abs() < 1e-10);
            }
        }
        assert!(ar_cholesky_factor(3, 1.0).is_err());
        assert!(ar_cholesky_factor(3, 0.0).is_err());
        assert!(ar_cholesky_factor(0, 0.5).is_err());
    }

    #[test]
    fn predictors_equal_dense_product() {
        let design = ScreeningDesign::new(30, 6, 0.7, Model::M1a).unwrap();
        let x = gen_predictors(&design, &mut RngStream::new(3, 9)).unwrap();
        // replay the same normals and multiply by Rᵀ explicitly
        let mut rng = RngStream::new(3, 9);
        let r = ar_cholesky_factor(30, 0.7).unwrap();
        for i in 0..6 {
            let z: Vec<f64> = (0..30).map(|_| rng.normal()).collect();
            for j in 0..30 {
                let dense: f64 = (0..=j).map(|k| r.get(k, j) * z[k]).sum();
                assert!((x.get(i, j) - dense).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<f64> = {
            let mut r = RngStream::new(11, 0);
            (0..8).map(|_| r.normal()).collect()
        };
        let b: Vec<f64> = {
            let mut r = RngStream::new(11, 0);
            (0..8).map(|_| r.normal()).collect()
        };
        let c: Vec<f64> = {
            let mut r = RngStream::new(11, 1);
            (0..8).map(|_| r.normal()).collect()
        };
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn coefficient_law() {
        assert!((coefficient_floor(200) - 1.4986).abs() < 1e-4);
        let mut rng = RngStream::new(5, 0);
        let a = coefficient_floor(200);
        let mut negative = 0;
        let draws = 25_000;
        for _ in 0..draws {
            for b in gen_coefficients(200, &mut rng).unwrap() {
                assert!(b.abs() >= a);
                negative += (b < 0.0) as usize;
            }
        }
        let frac = negative as f64 / (4 * draws) as f64;
        assert!((frac - 0.4).abs() < 0.01, "{frac}");
        assert!(gen_coefficients(1, &mut rng).is_err());
    }

    #[test]
    fn response_formulas() {
        let design = ScreeningDesign::new(25, 8, 0.5, Model::M1a).unwrap();
        let x = gen_predictors(&design, &mut RngStream::new(1, 2)).unwrap();
        let zero = vec![0.0; 8];
        let ones = [1.0; 4];
        let ind = |v: f64| if v < 0.0 { 1.0 } else { 0.0 };
        let ya = response_from_noise(&design, &x, &ones, &zero).unwrap();
        let yc = response_from_noise(
            &ScreeningDesign {
                model: Model::M1c,
                ..design
            },
            &x,
            &ones,
            &zero,
        )
        .unwrap();
        for i in 0..8 {
            let want_a = 2.0 * x.get(i, 0)
                + 0.5 * x.get(i, 1)
                + 3.0 * ind(x.get(i, 11))
                + 2.0 * x.get(i, 21);
            assert!((ya[i] - want_a).abs() < 1e-12);
            let want_c = 2.0 * x.get(i, 0) * x.get(i, 1) + 3.0 * ind(x.get(i, 11)) * x.get(i, 21);
            assert!((yc[i] - want_c).abs() < 1e-12);
        }
        let narrow = ColumnMatrix::from_columns(vec![vec![0.0; 8]; 21]).unwrap();
        assert!(response_from_noise(&design, &narrow, &ones, &zero).is_err());
    }

    #[test]
    fn model_1d_reproducible() {
        let design = ScreeningDesign::new(40, 20, 0.5, Model::M1d).unwrap();
        let a = gen_screening_dataset(&design, 8, 3).unwrap();
        let b = gen_screening_dataset(&design, 8, 3).unwrap();
        assert_eq!(a.y, b.y);
        assert_eq!(a.x, b.x);
    }

    #[test]
    fn design_validation() {
        assert!(ScreeningDesign::new(21, 100, 0.5, Model::M1a).is_err());
        assert!(ScreeningDesign::new(22, 4, 0.5, Model::M1a).is_err());
        assert!(ScreeningDesign::new(22, 5, 1.5, Model::M1a).is_err());
        assert_eq!("1.b".parse::<Model>().unwrap(), Model::M1b);
        assert_eq!("1D".parse::<Model>().unwrap(), Model::M1d);
        assert!("2a".parse::<Model>().is_err());
    }

    #[test]
    fn showcase_validation() {
        let mut rng = RngStream::new(1, 1);
        assert!(gen_showcase(0, 10, &mut rng).is_err());
        assert!(gen_showcase(10, 10, &mut rng).is_err());
        assert!(gen_showcase(3, 1, &mut rng).is_err());
        assert_eq!(gen_showcase(8, 17, &mut rng).unwrap().len(), 17);
    }
}
