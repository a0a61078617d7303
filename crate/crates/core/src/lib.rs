//! Fast exact distance covariance for univariate samples.
//!
//! The unbiased squared distance covariance Ωₙ and the bias-corrected
//! distance correlation are computed in O(n log n) by [`fast`] and checked
//! against the O(n²) matrix definitions in [`oracle`]. The crate also ships
//! the SIRS utility, seeded data generators, a feature-screening harness and
//! a timing harness.

pub mod bench;
pub mod cli;
pub mod datagen;
pub mod error;
pub mod estimate;
pub mod fast;
pub mod format;
pub mod oracle;
pub mod sample;
pub mod screening;
pub mod sirs;
pub mod summation;

pub use error::{DcovError, Result};
pub use estimate::{DependenceEstimate, Estimator, Method};
pub use fast::{bias_corrected_dcor2_fast, omega_fast, vstat_dcor2_fast, vstat_dcov2_fast};
pub use oracle::{
    bias_corrected_dcor2_direct, omega_direct, vstat_dcor2_direct, vstat_dcov2_direct, Direct,
};
pub use sample::PairedSample;
pub use sirs::{sirs_direct, sirs_fast};
