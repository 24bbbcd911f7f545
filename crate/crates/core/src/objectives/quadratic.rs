use serde::{Deserialize, Serialize};

use super::Objective;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot, Matrix};

/// `f(x) = 1/2 x^T A x + a^T x + c` with symmetric `A`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "QuadraticRecord", into = "QuadraticRecord")]
pub struct QuadraticUtility {
    hessian: Matrix,
    linear: Vec<f64>,
    constant: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct QuadraticRecord {
    #[serde(rename = "A")]
    hessian: Matrix,
    #[serde(rename = "a")]
    linear: Vec<f64>,
    #[serde(rename = "c", default)]
    constant: f64,
}

impl TryFrom<QuadraticRecord> for QuadraticUtility {
    type Error = Error;
    fn try_from(r: QuadraticRecord) -> Result<Self> {
        Self::new(r.hessian, r.linear, r.constant)
    }
}

impl From<QuadraticUtility> for QuadraticRecord {
    fn from(q: QuadraticUtility) -> Self {
        QuadraticRecord {
            hessian: q.hessian,
            linear: q.linear,
            constant: q.constant,
        }
    }
}

impl QuadraticUtility {
    pub fn new(hessian: Matrix, linear: Vec<f64>, constant: f64) -> Result<Self> {
        if !hessian.is_square() {
            return Err(Error::InvalidUtility("Hessian must be square".into()));
        }
        check_dim(hessian.rows(), linear.len())?;
        if linear.is_empty() {
            return Err(Error::InvalidUtility("dimension must be positive".into()));
        }
        if !hessian.is_symmetric(1e-12) {
            return Err(Error::InvalidUtility("Hessian must be symmetric".into()));
        }
        let finite = hessian.as_slice().iter().chain(&linear).all(|v| v.is_finite());
        if !finite || !constant.is_finite() {
            return Err(Error::InvalidUtility("entries must be finite".into()));
        }
        Ok(Self {
            hessian,
            linear,
            constant,
        })
    }

    pub fn zero(n: usize) -> Self {
        Self {
            hessian: Matrix::zeros(n, n),
            linear: vec![0.0; n],
            constant: 0.0,
        }
    }

    /// The canonical form of `(x/2 - 1)^T M x` for a possibly non-symmetric
    /// `M`: Hessian `(M + M^T)/2`, linear term `-M^T 1`.
    pub fn from_bilinear(m: &Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::InvalidUtility("matrix must be square".into()));
        }
        let ones = vec![1.0; m.rows()];
        let linear = m.tr_mul_vec(&ones).into_iter().map(|v| -v).collect();
        Self::new(m.symmetrized(), linear, 0.0)
    }

    /// `a = -A^T 1`, which makes `grad f(1) = 0`.
    pub fn with_monotone_linear_term(hessian: Matrix) -> Result<Self> {
        let ones = vec![1.0; hessian.rows()];
        let linear = hessian.tr_mul_vec(&ones).into_iter().map(|v| -v).collect();
        Self::new(hessian, linear, 0.0)
    }

    pub fn hessian(&self) -> &Matrix {
        &self.hessian
    }

    pub fn linear(&self) -> &[f64] {
        &self.linear
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    /// Off-diagonal Hessian entries are all non-positive.
    pub fn is_submodular(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| i == j || self.hessian[(i, j)] <= 0.0))
    }

    /// `f(0) = 0`.
    pub fn is_normalized(&self) -> bool {
        self.constant == 0.0
    }

    pub fn ensure_submodular(&self) -> Result<()> {
        if self.is_submodular() {
            Ok(())
        } else {
            Err(Error::InvalidUtility(
                "submodularity requires non-positive off-diagonal Hessian entries".into(),
            ))
        }
    }

    pub fn ensure_normalized(&self) -> Result<()> {
        if self.is_normalized() {
            Ok(())
        } else {
            Err(Error::InvalidUtility(format!(
                "normalization requires c = 0, got {}",
                self.constant
            )))
        }
    }

    pub(crate) fn add_scaled(&mut self, other: &QuadraticUtility, w: f64) {
        self.hessian.add_scaled(&other.hessian, w);
        crate::linalg::axpy(&mut self.linear, w, &other.linear);
        self.constant += w * other.constant;
    }

    pub(crate) fn hessian_at(&self, x: &[f64]) -> Result<Option<Matrix>> {
        check_dim(self.dim(), x.len())?;
        Ok(Some(self.hessian.clone()))
    }
}

impl Objective for QuadraticUtility {
    fn dim(&self) -> usize {
        self.linear.len()
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        Ok(0.5 * self.hessian.quad_form(x) + dot(&self.linear, x) + self.constant)
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), x.len())?;
        let mut g = self.hessian.mul_vec(x);
        crate::linalg::axpy(&mut g, 1.0, &self.linear);
        Ok(g)
    }

    fn hessian(&self, x: &[f64]) -> Result<Option<Matrix>> {
        self.hessian_at(x)
    }
}
