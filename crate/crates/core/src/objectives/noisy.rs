//! Random quadratic utilities drawn i.i.d. per round, and a gradient oracle
//! that lets each round's sampled function be queried at several points.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Objective, QuadraticUtility};
use crate::domain::{Norm, PolytopeDomain};
use crate::error::{check_dim, Error, Result};
use crate::linalg::Matrix;

/// Distribution of the per-round utility `f_t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum IidQuadraticFamily {
    /// `f_t(x) = 1/2 x^T (A + N_t) x + a^T x + c`, `N_t` symmetric with
    /// entries uniform on `[-nu, nu]`.
    HessianNoise { mean: QuadraticUtility, nu: f64 },
    /// `f_t(x) = (x/2 - 1)^T (A + N_t) x`, `N_t` with independent entries
    /// uniform on `[-nu, nu]`.
    BilinearNoise { a: Matrix, nu: f64 },
}

impl IidQuadraticFamily {
    pub fn validate(&self) -> Result<()> {
        let nu = self.nu();
        if !(nu.is_finite() && nu >= 0.0) {
            return Err(Error::InvalidParameter(format!("noise level must be non-negative, got {nu}")));
        }
        if let IidQuadraticFamily::BilinearNoise { a, .. } = self {
            QuadraticUtility::from_bilinear(a)?;
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            IidQuadraticFamily::HessianNoise { mean, .. } => mean.dim(),
            IidQuadraticFamily::BilinearNoise { a, .. } => a.rows(),
        }
    }

    pub fn nu(&self) -> f64 {
        match self {
            IidQuadraticFamily::HessianNoise { nu, .. } | IidQuadraticFamily::BilinearNoise { nu, .. } => *nu,
        }
    }

    /// `E[f_t]`.
    pub fn expected(&self) -> Result<QuadraticUtility> {
        match self {
            IidQuadraticFamily::HessianNoise { mean, .. } => Ok(mean.clone()),
            IidQuadraticFamily::BilinearNoise { a, .. } => QuadraticUtility::from_bilinear(a),
        }
    }

    /// Draws `f_t`; a pure function of `(seed, t)`.
    pub fn sample(&self, seed: u64, t: usize) -> Result<QuadraticUtility> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(t as u64);
        let n = self.dim();
        let nu = self.nu();
        let draw = |rng: &mut ChaCha8Rng| if nu > 0.0 { rng.gen_range(-nu..=nu) } else { 0.0 };
        match self {
            IidQuadraticFamily::HessianNoise { mean, .. } => {
                let mut h = mean.hessian().clone();
                for i in 0..n {
                    for j in i..n {
                        let e = draw(&mut rng);
                        h[(i, j)] += e;
                        if i != j {
                            h[(j, i)] += e;
                        }
                    }
                }
                QuadraticUtility::new(h, mean.linear().to_vec(), mean.constant())
            }
            IidQuadraticFamily::BilinearNoise { a, .. } => {
                let mut m = a.clone();
                for i in 0..n {
                    for j in 0..n {
                        m[(i, j)] += draw(&mut rng);
                    }
                }
                QuadraticUtility::from_bilinear(&m)
            }
        }
    }

    /// Certified `sigma` with `||grad f_t(x) - grad f(x)||_2 <= sigma` for
    /// every feasible `x` and every realization.
    pub fn sigma_bound(&self, domain: &PolytopeDomain) -> Result<f64> {
        check_dim(self.dim(), domain.dim())?;
        let n = self.dim() as f64;
        let nu = self.nu();
        match self {
            // Each coordinate of N x is at most nu ||x||_1 in magnitude.
            IidQuadraticFamily::HessianNoise { .. } => Ok(nu * n.sqrt() * max_l1(domain)?),
            // Coordinate k of the noise is sum_j N_kj x_j / 2 + sum_i (x_i/2 - 1) N_ik,
            // bounded by nu * sum_j (|x_j|/2 + |x_j/2 - 1|); that sum is convex and
            // separable, so its maximum over the bounding box sits at a corner.
            IidQuadraticFamily::BilinearNoise { .. } => {
                let per_coord = |x: f64| 0.5 * x.abs() + (0.5 * x - 1.0).abs();
                let s: f64 = domain
                    .lower()
                    .iter()
                    .zip(domain.upper())
                    .map(|(&l, &u)| per_coord(l).max(per_coord(u)))
                    .sum();
                Ok(nu * n.sqrt() * s)
            }
        }
    }
}

/// `max ||x||_1` over the domain: a linear program on the non-negative orthant,
/// the bounding-box corner bound otherwise.
fn max_l1(domain: &PolytopeDomain) -> Result<f64> {
    if domain.lower().iter().all(|&l| l >= 0.0) {
        let ones = vec![1.0; domain.dim()];
        let v = domain.linear_maximize(&ones)?;
        Ok(v.iter().sum())
    } else {
        Ok(domain.max_norm_bound(Norm::L1))
    }
}

/// How many sampled rounds the oracle keeps materialized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Retention {
    All,
    /// Keep the latest `w` rounds.
    Window(usize),
}

/// Stochastic gradient oracle over i.i.d. rounds. `f_t` is sampled on the
/// first query for round `t` and can then be evaluated at any point until it
/// falls out of the retention window.
#[derive(Debug, Clone)]
pub struct NoisyGradientOracle {
    family: IidQuadraticFamily,
    expected: QuadraticUtility,
    seed: u64,
    retention: Retention,
    cache: BTreeMap<usize, QuadraticUtility>,
    calls: usize,
}

impl NoisyGradientOracle {
    pub fn new(family: IidQuadraticFamily, seed: u64, retention: Retention) -> Result<Self> {
        family.validate()?;
        if retention == Retention::Window(0) {
            return Err(Error::InvalidParameter("retention window must be positive".into()));
        }
        let expected = family.expected()?;
        Ok(Self {
            family,
            expected,
            seed,
            retention,
            cache: BTreeMap::new(),
            calls: 0,
        })
    }

    pub fn family(&self) -> &IidQuadraticFamily {
        &self.family
    }

    pub fn expected(&self) -> &QuadraticUtility {
        &self.expected
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn sigma_bound(&self, domain: &PolytopeDomain) -> Result<f64> {
        self.family.sigma_bound(domain)
    }

    /// Stochastic gradient evaluations so far.
    pub fn calls(&self) -> usize {
        self.calls
    }

    pub fn cached_rounds(&self) -> usize {
        self.cache.len()
    }

    /// The sampled function of round `t`.
    pub fn function(&mut self, t: usize) -> Result<&QuadraticUtility> {
        if !self.cache.contains_key(&t) {
            let f = self.family.sample(self.seed, t)?;
            self.cache.insert(t, f);
            if let Retention::Window(w) = self.retention {
                while self.cache.len() > w {
                    self.cache.pop_first();
                }
            }
        }
        // A round older than the window was inserted and immediately evicted.
        match self.cache.get(&t) {
            Some(_) => Ok(&self.cache[&t]),
            None => Err(Error::InvalidParameter(format!("round {t} is outside the retention window"))),
        }
    }

    /// One stochastic gradient `grad f_t(x)`.
    pub fn gradient(&mut self, t: usize, x: &[f64]) -> Result<Vec<f64>> {
        let g = self.function(t)?.gradient(x)?;
        self.calls += 1;
        Ok(g)
    }

    /// Realized utility `f_t(x)`; not counted as a gradient call.
    pub fn value(&mut self, t: usize, x: &[f64]) -> Result<f64> {
        self.function(t)?.value(x)
    }
}
