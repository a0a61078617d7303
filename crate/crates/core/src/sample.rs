use serde::{Deserialize, Serialize};

use crate::error::{DcovError, Result};

/// Paired univariate observations `(x_i, y_i)`.
///
/// Construction validates equal lengths, `n >= 1` and finiteness, so every
/// estimator can assume clean input.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairedSample {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl PairedSample {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(DcovError::LengthMismatch {
                x: x.len(),
                y: y.len(),
            });
        }
        if x.is_empty() {
            return Err(DcovError::Empty);
        }
        check_finite("x", &x)?;
        check_finite("y", &y)?;
        Ok(Self { x, y })
    }

    /// A sample pairing `v` with itself, used for distance variances.
    pub fn diagonal(v: Vec<f64>) -> Result<Self> {
        Self::new(v.clone(), v)
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// The sample with the pair at `index` (0-based) removed.
    pub fn without(&self, index: usize) -> Result<Self> {
        let n = self.len();
        if index >= n {
            return Err(DcovError::IndexOutOfRange { index, n });
        }
        let drop = |v: &[f64]| {
            v.iter()
                .enumerate()
                .filter(|&(i, _)| i != index)
                .map(|(_, &x)| x)
                .collect::<Vec<_>>()
        };
        Self::new(drop(&self.x), drop(&self.y))
    }

    /// Swap the roles of `x` and `y`.
    pub fn swapped(&self) -> Self {
        Self {
            x: self.y.clone(),
            y: self.x.clone(),
        }
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<f64>) {
        (self.x, self.y)
    }
}

impl<'de> Deserialize<'de> for PairedSample {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            x: Vec<f64>,
            y: Vec<f64>,
        }
        let raw = Raw::deserialize(de)?;
        PairedSample::new(raw.x, raw.y).map_err(serde::de::Error::custom)
    }
}

pub(crate) fn check_finite(series: &'static str, v: &[f64]) -> Result<()> {
    match v.iter().position(|x| !x.is_finite()) {
        Some(index) => Err(DcovError::NonFinite { series, index }),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_mismatch_and_nan() {
        assert_eq!(
            PairedSample::new(vec![1.0], vec![1.0, 2.0]),
            Err(DcovError::LengthMismatch { x: 1, y: 2 })
        );
        assert_eq!(
            PairedSample::new(vec![1.0, f64::NAN], vec![1.0, 2.0]),
            Err(DcovError::NonFinite {
                series: "x",
                index: 1
            })
        );
        assert_eq!(
            PairedSample::new(vec![1.0], vec![f64::INFINITY]),
            Err(DcovError::NonFinite {
                series: "y",
                index: 0
            })
        );
        assert_eq!(PairedSample::new(vec![], vec![]), Err(DcovError::Empty));
    }

    #[test]
    fn without_drops_one_pair() {
        let s = PairedSample::new(vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]).unwrap();
        let t = s.without(1).unwrap();
        assert_eq!(t.x(), &[1.0, 3.0]);
        assert_eq!(t.y(), &[4.0, 6.0]);
        assert!(matches!(
            s.without(3),
            Err(DcovError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn deserialize_validates() {
        let ok: PairedSample = serde_json::from_str(r#"{"x":[1,2],"y":[3,4]}"#).unwrap();
        assert_eq!(ok.len(), 2);
        assert!(serde_json::from_str::<PairedSample>(r#"{"x":[1],"y":[3,4]}"#).is_err());
    }
}
