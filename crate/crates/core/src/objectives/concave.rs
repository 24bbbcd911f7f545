use serde::{Deserialize, Serialize};

use super::Objective;
use crate::error::{check_dim, Error, Result};
use crate::linalg::Matrix;

/// Concave scalar building block `h(x)`, normalized so `h(0) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScalarConcave {
    /// `ln(1 + w x)`
    Log { weight: f64 },
    /// `-q x^2 / 2 + p x`
    Quadratic { q: f64, p: f64 },
    /// `coef * ((x + shift)^gamma - shift^gamma)`
    Power {
        coef: f64,
        gamma: f64,
        #[serde(default)]
        shift: f64,
    },
}

impl ScalarConcave {
    fn validate(&self) -> Result<()> {
        let ok = match *self {
            ScalarConcave::Log { weight } => weight.is_finite() && weight >= 0.0,
            ScalarConcave::Quadratic { q, p } => q.is_finite() && p.is_finite() && q >= 0.0,
            ScalarConcave::Power { coef, gamma, shift } => {
                coef.is_finite()
                    && coef >= 0.0
                    && gamma > 0.0
                    && gamma <= 1.0
                    && shift.is_finite()
                    && shift >= 0.0
                    // x^gamma has an unbounded derivative at 0 unless shifted.
                    && (shift > 0.0 || gamma == 1.0)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidUtility(format!("invalid concave term {self:?}")))
        }
    }

    fn check_arg(&self, index: usize, x: f64) -> Result<()> {
        let arg = match *self {
            ScalarConcave::Log { weight } => 1.0 + weight * x,
            ScalarConcave::Power { shift, gamma, .. } if gamma < 1.0 => x + shift,
            _ => return Ok(()),
        };
        if arg > 0.0 {
            Ok(())
        } else {
            Err(Error::OutsideFunctionDomain { index, value: arg })
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        match *self {
            ScalarConcave::Log { weight } => (weight * x).ln_1p(),
            ScalarConcave::Quadratic { q, p } => -0.5 * q * x * x + p * x,
            ScalarConcave::Power { coef, gamma, shift } => {
                coef * ((x + shift).powf(gamma) - shift.powf(gamma))
            }
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match *self {
            ScalarConcave::Log { weight } => weight / (1.0 + weight * x),
            ScalarConcave::Quadratic { q, p } => p - q * x,
            ScalarConcave::Power { coef, gamma, shift } => {
                coef * gamma * (x + shift).powf(gamma - 1.0)
            }
        }
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        match *self {
            ScalarConcave::Log { weight } => {
                let d = 1.0 + weight * x;
                -weight * weight / (d * d)
            }
            ScalarConcave::Quadratic { q, .. } => -q,
            ScalarConcave::Power { coef, gamma, shift } => {
                coef * gamma * (gamma - 1.0) * (x + shift).powf(gamma - 2.0)
            }
        }
    }
}

/// `coeff * prod_{i in indices} x_i` with `coeff <= 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Interaction {
    pub indices: Vec<usize>,
    pub coeff: f64,
}

/// `f(x) = sum_i h_i(x_i) + sum_S theta_S prod_{i in S} x_i`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ConcaveRecord", into = "ConcaveRecord")]
pub struct ConcaveNegDepUtility {
    per_coordinate: Vec<ScalarConcave>,
    interaction_order: usize,
    interactions: Vec<Interaction>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConcaveRecord {
    per_coordinate: Vec<ScalarConcave>,
    interaction_order: usize,
    #[serde(default)]
    interactions: Vec<Interaction>,
}

impl TryFrom<ConcaveRecord> for ConcaveNegDepUtility {
    type Error = Error;
    fn try_from(r: ConcaveRecord) -> Result<Self> {
        Self::new(r.per_coordinate, r.interaction_order, r.interactions)
    }
}

impl From<ConcaveNegDepUtility> for ConcaveRecord {
    fn from(u: ConcaveNegDepUtility) -> Self {
        ConcaveRecord {
            per_coordinate: u.per_coordinate,
            interaction_order: u.interaction_order,
            interactions: u.interactions,
        }
    }
}

impl ConcaveNegDepUtility {
    pub fn new(
        per_coordinate: Vec<ScalarConcave>,
        interaction_order: usize,
        interactions: Vec<Interaction>,
    ) -> Result<Self> {
        let n = per_coordinate.len();
        if n == 0 {
            return Err(Error::InvalidUtility("dimension must be positive".into()));
        }
        if interaction_order < 2 {
            return Err(Error::InvalidUtility("interaction order must be at least 2".into()));
        }
        for h in &per_coordinate {
            h.validate()?;
        }
        for term in &interactions {
            if term.indices.is_empty() || term.indices.len() > interaction_order {
                return Err(Error::InvalidUtility(format!(
                    "interaction {:?} must have between 1 and {interaction_order} indices",
                    term.indices
                )));
            }
            if !(term.coeff.is_finite() && term.coeff <= 0.0) {
                return Err(Error::InvalidUtility(format!(
                    "interaction coefficient {} must be non-positive",
                    term.coeff
                )));
            }
            let mut sorted = term.indices.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != term.indices.len() {
                return Err(Error::InvalidUtility("interaction indices must be distinct".into()));
            }
            if let Some(&i) = sorted.last().filter(|&&i| i >= n) {
                return Err(Error::InvalidUtility(format!("interaction index {i} out of range")));
            }
        }
        Ok(Self {
            per_coordinate,
            interaction_order,
            interactions,
        })
    }

    pub fn per_coordinate(&self) -> &[ScalarConcave] {
        &self.per_coordinate
    }

    pub fn interaction_order(&self) -> usize {
        self.interaction_order
    }

    pub fn interactions(&self) -> &[Interaction] {
        &self.interactions
    }

    fn check_args(&self, x: &[f64]) -> Result<()> {
        check_dim(self.dim(), x.len())?;
        for (i, (h, &xi)) in self.per_coordinate.iter().zip(x).enumerate() {
            h.check_arg(i, xi)?;
        }
        Ok(())
    }
}

fn product_except(x: &[f64], indices: &[usize], skip: &[usize]) -> f64 {
    indices
        .iter()
        .filter(|i| !skip.contains(i))
        .map(|&i| x[i])
        .product()
}

impl Objective for ConcaveNegDepUtility {
    fn dim(&self) -> usize {
        self.per_coordinate.len()
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        self.check_args(x)?;
        let separable: f64 = self
            .per_coordinate
            .iter()
            .zip(x)
            .map(|(h, &xi)| h.value(xi))
            .sum();
        let coupled: f64 = self
            .interactions
            .iter()
            .map(|t| t.coeff * product_except(x, &t.indices, &[]))
            .sum();
        Ok(separable + coupled)
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_args(x)?;
        let mut g: Vec<f64> = self
            .per_coordinate
            .iter()
            .zip(x)
            .map(|(h, &xi)| h.derivative(xi))
            .collect();
        for t in &self.interactions {
            for &i in &t.indices {
                g[i] += t.coeff * product_except(x, &t.indices, &[i]);
            }
        }
        Ok(g)
    }

    fn hessian(&self, x: &[f64]) -> Result<Option<Matrix>> {
        self.check_args(x)?;
        let n = self.dim();
        let mut h = Matrix::zeros(n, n);
        for (i, (hi, &xi)) in self.per_coordinate.iter().zip(x).enumerate() {
            h[(i, i)] = hi.second_derivative(xi);
        }
        for t in &self.interactions {
            for &i in &t.indices {
                for &j in &t.indices {
                    if i != j {
                        h[(i, j)] += t.coeff * product_except(x, &t.indices, &[i, j]);
                    }
                }
            }
        }
        Ok(Some(h))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ConcaveNegDepUtility {
        ConcaveNegDepUtility::new(
            vec![
                ScalarConcave::Log { weight: 2.0 },
                ScalarConcave::Quadratic { q: 1.0, p: 3.0 },
                ScalarConcave::Power {
                    coef: 2.0,
                    gamma: 0.5,
                    shift: 0.25,
                },
            ],
            3,
            vec![
                Interaction {
                    indices: vec![0, 1],
                    coeff: -0.5,
                },
                Interaction {
                    indices: vec![0, 1, 2],
                    coeff: -0.25,
                },
            ],
        )
        .unwrap()
    }

    #[test]
    fn value_by_hand() {
        let f = sample();
        let x = [0.5, 1.0, 0.75];
        let expected = 2f64.ln() + (-0.5 + 3.0) + 2.0 * (1.0 - 0.5) - 0.5 * 0.5 - 0.25 * 0.5 * 0.75;
        assert!((f.value(&x).unwrap() - expected).abs() < 1e-12);
        assert_eq!(f.value(&[0.0; 3]).unwrap(), 0.0);
    }

    #[test]
    fn hessian_off_diagonal_non_positive() {
        let h = sample().hessian(&[0.3, 0.4, 0.5]).unwrap().unwrap();
        for i in 0..3 {
            assert!(h[(i, i)] <= 0.0);
            for j in 0..3 {
                if i != j {
                    assert!(h[(i, j)] <= 0.0);
                }
            }
        }
        assert!((h[(0, 2)] - (-0.25 * 0.4)).abs() < 1e-12);
    }

    #[test]
    fn rejects_invalid_terms() {
        let log = || vec![ScalarConcave::Log { weight: 1.0 }; 2];
        let pos = vec![Interaction {
            indices: vec![0, 1],
            coeff: 0.5,
        }];
        assert!(ConcaveNegDepUtility::new(log(), 2, pos).is_err());
        let dup = vec![Interaction {
            indices: vec![1, 1],
            coeff: -0.5,
        }];
        assert!(ConcaveNegDepUtility::new(log(), 2, dup).is_err());
        let long = vec![Interaction {
            indices: vec![0, 1, 2],
            coeff: -0.5,
        }];
        assert!(ConcaveNegDepUtility::new(vec![ScalarConcave::Log { weight: 1.0 }; 3], 2, long)
            .is_err());
        assert!(ConcaveNegDepUtility::new(log(), 1, vec![]).is_err());
        let unshifted = vec![ScalarConcave::Power {
            coef: 1.0,
            gamma: 0.5,
            shift: 0.0,
        }];
        assert!(ConcaveNegDepUtility::new(unshifted, 2, vec![]).is_err());
    }
}
