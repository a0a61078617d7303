use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    /// Biased V-statistic `V²ₙ(X, Y)`.
    VstatDcov2,
    /// `R²ₙ(X, Y)`, standardized V-statistic in [0, 1].
    VstatDcor2,
    /// Unbiased U-statistic Ωₙ; can be negative.
    UnbiasedDcov2,
    /// `Ω(x,y) / sqrt(Ω(x,x) Ω(y,y))`; can be negative.
    BiasCorrectedDcor2,
    Sirs,
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Estimator::VstatDcov2 => "vstat_dcov2",
            Estimator::VstatDcor2 => "vstat_dcor2",
            Estimator::UnbiasedDcov2 => "unbiased_dcov2",
            Estimator::BiasCorrectedDcor2 => "bias_corrected_dcor2",
            Estimator::Sirs => "sirs",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Direct,
    Fast,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Direct => "direct",
            Method::Fast => "fast",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DependenceEstimate {
    pub value: f64,
    pub estimator: Estimator,
    pub method: Method,
    pub n: usize,
}

impl DependenceEstimate {
    pub fn new(value: f64, estimator: Estimator, method: Method, n: usize) -> Self {
        Self {
            value,
            estimator,
            method,
            n,
        }
    }
}
