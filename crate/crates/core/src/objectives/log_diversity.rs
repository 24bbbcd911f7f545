use serde::{Deserialize, Serialize};

use super::Objective;
use crate::error::{check_dim, Error, Result};
use crate::linalg::Matrix;

/// `f(x) = s * sum_i ln(1 + R_i x_i) + sum_{i<j} theta_ij x_i x_j`
///
/// `R` holds rescaled ratings in `[0, 1]`; `theta` is symmetric with zero
/// diagonal and entries in `[-1, 0]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LogDiversityRecord", into = "LogDiversityRecord")]
pub struct LogDiversityUtility {
    weights: Vec<f64>,
    pair_penalties: Matrix,
    scale: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LogDiversityRecord {
    weights: Vec<f64>,
    pair_penalties: Matrix,
    #[serde(default = "default_scale")]
    scale: f64,
}

fn default_scale() -> f64 {
    5.0
}

impl TryFrom<LogDiversityRecord> for LogDiversityUtility {
    type Error = Error;
    fn try_from(r: LogDiversityRecord) -> Result<Self> {
        Self::new(r.weights, r.pair_penalties, r.scale)
    }
}

impl From<LogDiversityUtility> for LogDiversityRecord {
    fn from(u: LogDiversityUtility) -> Self {
        LogDiversityRecord {
            weights: u.weights,
            pair_penalties: u.pair_penalties,
            scale: u.scale,
        }
    }
}

impl LogDiversityUtility {
    pub fn new(weights: Vec<f64>, pair_penalties: Matrix, scale: f64) -> Result<Self> {
        let n = weights.len();
        if n == 0 {
            return Err(Error::InvalidUtility("dimension must be positive".into()));
        }
        if pair_penalties.rows() != n || pair_penalties.cols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: pair_penalties.rows(),
            });
        }
        if let Some(w) = weights.iter().find(|w| !(0.0..=1.0).contains(*w)) {
            return Err(Error::InvalidUtility(format!("weight {w} outside [0, 1]")));
        }
        if !pair_penalties.is_symmetric(1e-12) {
            return Err(Error::InvalidUtility("pair penalties must be symmetric".into()));
        }
        for i in 0..n {
            if pair_penalties[(i, i)] != 0.0 {
                return Err(Error::InvalidUtility("pair penalty diagonal must be zero".into()));
            }
            for j in 0..n {
                let t = pair_penalties[(i, j)];
                if !(-1.0..=0.0).contains(&t) {
                    return Err(Error::InvalidUtility(format!(
                        "pair penalty ({i}, {j}) = {t} outside [-1, 0]"
                    )));
                }
            }
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidUtility("scale must be positive".into()));
        }
        Ok(Self {
            weights,
            pair_penalties,
            scale,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn pair_penalties(&self) -> &Matrix {
        &self.pair_penalties
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Entrywise most negative Hessian over `x >= 0`: diagonal `-s R_i^2`
    /// (attained at `x = 0`), off-diagonal `theta`.
    pub(crate) fn worst_case_hessian(&self) -> Matrix {
        let mut h = self.pair_penalties.clone();
        for (i, w) in self.weights.iter().enumerate() {
            h[(i, i)] = -self.scale * w * w;
        }
        h
    }

    fn log_args(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), x.len())?;
        self.weights
            .iter()
            .zip(x)
            .enumerate()
            .map(|(i, (w, xi))| {
                let arg = 1.0 + w * xi;
                if arg > 0.0 {
                    Ok(arg)
                } else {
                    Err(Error::OutsideFunctionDomain { index: i, value: arg })
                }
            })
            .collect()
    }
}

impl Objective for LogDiversityUtility {
    fn dim(&self) -> usize {
        self.weights.len()
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        let args = self.log_args(x)?;
        let logs: f64 = args.iter().map(|a| a.ln()).sum();
        // theta is symmetric with zero diagonal: sum_{i<j} = x^T theta x / 2.
        Ok(self.scale * logs + 0.5 * self.pair_penalties.quad_form(x))
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let args = self.log_args(x)?;
        let mut g = self.pair_penalties.mul_vec(x);
        for ((gi, w), a) in g.iter_mut().zip(&self.weights).zip(&args) {
            *gi += self.scale * w / a;
        }
        Ok(g)
    }

    fn hessian(&self, x: &[f64]) -> Result<Option<Matrix>> {
        let args = self.log_args(x)?;
        let mut h = self.pair_penalties.clone();
        for (i, (w, a)) in self.weights.iter().zip(&args).enumerate() {
            h[(i, i)] = -self.scale * w * w / (a * a);
        }
        Ok(Some(h))
    }
}
