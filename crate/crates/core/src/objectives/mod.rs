//! Utility families, gradient oracles and property checkers.

mod checks;
mod concave;
mod log_diversity;
mod noisy;
mod quadratic;

use serde::{Deserialize, Serialize};

use crate::domain::Norm;
use crate::error::{check_dim, Error, Result};
use crate::linalg::Matrix;

pub use checks::{
    check_dr_submodular, check_monotone, check_smoothness, check_strong_dr, CheckReport,
    Sampling, StrongDrReport, Witness, DEFAULT_CHECK_SAMPLES, DEFAULT_CHECK_TOL,
};
pub use concave::{ConcaveNegDepUtility, Interaction, ScalarConcave};
pub use log_diversity::LogDiversityUtility;
pub use noisy::{IidQuadraticFamily, NoisyGradientOracle, Retention};
pub use quadratic::QuadraticUtility;

/// A differentiable utility with an exact gradient and, where available, an
/// exact Hessian.
pub trait Objective {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> Result<f64>;

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>>;

    /// `Ok(None)` when the family has no closed-form Hessian.
    fn hessian(&self, _x: &[f64]) -> Result<Option<Matrix>> {
        Ok(None)
    }
}

/// Weighted member of a [`Utility::Combination`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub weight: f64,
    pub utility: Utility,
}

/// Any supported utility. Serialized as a record tagged by `family`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Utility {
    Quadratic(QuadraticUtility),
    LogDiversity(LogDiversityUtility),
    #[serde(rename = "concave_negdep")]
    ConcaveNegDep(ConcaveNegDepUtility),
    Combination { dim: usize, terms: Vec<Term> },
}

impl Utility {
    /// Sum of utilities: quadratics collapse into one quadratic, anything else
    /// becomes a flat weighted term list.
    pub fn sum(parts: &[Utility]) -> Result<Utility> {
        Self::weighted_sum(parts.iter().map(|u| (1.0, u)))
    }

    /// `(1/len) * sum(parts)`
    pub fn average(parts: &[Utility]) -> Result<Utility> {
        if parts.is_empty() {
            return Err(Error::InvalidParameter("cannot average zero utilities".into()));
        }
        let w = 1.0 / parts.len() as f64;
        Self::weighted_sum(parts.iter().map(|u| (w, u)))
    }

    pub fn weighted_sum<'a, I>(parts: I) -> Result<Utility>
    where
        I: IntoIterator<Item = (f64, &'a Utility)>,
    {
        let mut flat: Vec<Term> = Vec::new();
        for (w, u) in parts {
            match u {
                Utility::Combination { terms, .. } => flat.extend(terms.iter().map(|t| Term {
                    weight: w * t.weight,
                    utility: t.utility.clone(),
                })),
                other => flat.push(Term {
                    weight: w,
                    utility: other.clone(),
                }),
            }
        }
        let Some(first) = flat.first() else {
            return Err(Error::InvalidParameter("empty sum of utilities".into()));
        };
        let dim = first.utility.dim();
        for t in &flat {
            check_dim(dim, t.utility.dim())?;
        }
        if flat.iter().all(|t| matches!(t.utility, Utility::Quadratic(_))) {
            let mut acc = QuadraticUtility::zero(dim);
            for t in &flat {
                if let Utility::Quadratic(q) = &t.utility {
                    acc.add_scaled(q, t.weight);
                }
            }
            return Ok(Utility::Quadratic(acc));
        }
        if flat.len() == 1 && flat[0].weight == 1.0 {
            return Ok(flat.remove(0).utility);
        }
        Ok(Utility::Combination { dim, terms: flat })
    }

    pub fn as_quadratic(&self) -> Option<&QuadraticUtility> {
        match self {
            Utility::Quadratic(q) => Some(q),
            _ => None,
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            Utility::Quadratic(_) => "quadratic",
            Utility::LogDiversity(_) => "log_diversity",
            Utility::ConcaveNegDep(_) => "concave_negdep",
            Utility::Combination { .. } => "combination",
        }
    }

    /// Upper bound on the smoothness constant over non-negative directions
    /// on `[0, upper]`, i.e. `f(y) - f(x) >= <grad f(x), y - x> - L/2 ||y - x||^2`
    /// for `x <= y`. `None` when the family offers no closed-form bound.
    pub fn smoothness_bound(&self, norm: Norm) -> Option<f64> {
        match self {
            Utility::Quadratic(q) => Some(negative_part_bound(q.hessian(), norm)),
            Utility::LogDiversity(l) => Some(negative_part_bound(&l.worst_case_hessian(), norm)),
            Utility::ConcaveNegDep(_) => None,
            Utility::Combination { terms, .. } => terms.iter().try_fold(0.0, |acc, t| {
                if t.weight < 0.0 {
                    None
                } else {
                    t.utility.smoothness_bound(norm).map(|l| acc + t.weight * l)
                }
            }),
        }
    }
}

/// Smoothness bound from the entrywise negative part `H-` of a Hessian; for
/// `v >= 0`, `v^T H v >= v^T H- v`.
fn negative_part_bound(h: &Matrix, norm: Norm) -> f64 {
    let neg = h.zip_with(h, |a, _| a.min(0.0));
    match norm {
        Norm::L1 => neg.max_abs(),
        Norm::L2 => neg.max_abs_row_sum(),
    }
}

impl Objective for Utility {
    fn dim(&self) -> usize {
        match self {
            Utility::Quadratic(q) => q.dim(),
            Utility::LogDiversity(l) => l.dim(),
            Utility::ConcaveNegDep(c) => c.dim(),
            Utility::Combination { dim, .. } => *dim,
        }
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        match self {
            Utility::Quadratic(q) => q.value(x),
            Utility::LogDiversity(l) => l.value(x),
            Utility::ConcaveNegDep(c) => c.value(x),
            Utility::Combination { dim, terms } => {
                check_dim(*dim, x.len())?;
                terms
                    .iter()
                    .try_fold(0.0, |acc, t| Ok(acc + t.weight * t.utility.value(x)?))
            }
        }
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            Utility::Quadratic(q) => q.gradient(x),
            Utility::LogDiversity(l) => l.gradient(x),
            Utility::ConcaveNegDep(c) => c.gradient(x),
            Utility::Combination { dim, terms } => {
                check_dim(*dim, x.len())?;
                let mut g = vec![0.0; *dim];
                for t in terms {
                    crate::linalg::axpy(&mut g, t.weight, &t.utility.gradient(x)?);
                }
                Ok(g)
            }
        }
    }

    fn hessian(&self, x: &[f64]) -> Result<Option<Matrix>> {
        match self {
            Utility::Quadratic(q) => q.hessian_at(x),
            Utility::LogDiversity(l) => l.hessian(x),
            Utility::ConcaveNegDep(c) => c.hessian(x),
            Utility::Combination { dim, terms } => {
                check_dim(*dim, x.len())?;
                let mut h = Matrix::zeros(*dim, *dim);
                for t in terms {
                    match t.utility.hessian(x)? {
                        Some(ht) => h.add_scaled(&ht, t.weight),
                        None => return Ok(None),
                    }
                }
                Ok(Some(h))
            }
        }
    }
}

impl From<QuadraticUtility> for Utility {
    fn from(q: QuadraticUtility) -> Self {
        Utility::Quadratic(q)
    }
}

impl From<LogDiversityUtility> for Utility {
    fn from(l: LogDiversityUtility) -> Self {
        Utility::LogDiversity(l)
    }
}

impl From<ConcaveNegDepUtility> for Utility {
    fn from(c: ConcaveNegDepUtility) -> Self {
        Utility::ConcaveNegDep(c)
    }
}
