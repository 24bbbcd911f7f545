//! Projection-free learners for i.i.d. utilities with stochastic gradients.

use serde::{Deserialize, Serialize};

use crate::domain::PolytopeDomain;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{axpy, dist2, scale};
use crate::objectives::{NoisyGradientOracle, Objective};

pub trait StochasticLearner {
    /// The point played in the upcoming round.
    fn current(&self) -> &[f64];

    /// Consumes round `t` (1-based) and moves to the next point.
    fn observe(
        &mut self,
        t: usize,
        oracle: &mut NoisyGradientOracle,
        domain: &PolytopeDomain,
    ) -> Result<()>;

    /// Gradient estimate used in the last round, if the learner keeps one.
    fn estimate(&self) -> Option<&[f64]> {
        None
    }
}

/// `ceil(sqrt(t))`, computed exactly.
pub fn alg2_inner_steps(t: usize) -> usize {
    let mut k = (t as f64).sqrt() as usize;
    while k * k < t {
        k += 1;
    }
    while k > 1 && (k - 1) * (k - 1) >= t {
        k -= 1;
    }
    k.max(1)
}

/// `sum_{t <= T} t * ceil(sqrt(t))`.
pub fn alg2_total_calls(horizon: usize) -> usize {
    (1..=horizon).map(|t| t * alg2_inner_steps(t)).sum()
}

/// After round `t`, runs `ceil(sqrt(t))` Frank-Wolfe steps from the origin on
/// the empirical average of the `t` sampled functions so far.
#[derive(Debug, Clone)]
pub struct AveragedGradientFw {
    x: Vec<f64>,
    directions: Vec<Vec<f64>>,
}

impl AveragedGradientFw {
    pub fn new(n: usize) -> Self {
        Self {
            x: vec![0.0; n],
            directions: Vec::new(),
        }
    }

    /// LMO outputs of the most recent round.
    pub fn last_directions(&self) -> &[Vec<f64>] {
        &self.directions
    }
}

impl StochasticLearner for AveragedGradientFw {
    fn current(&self) -> &[f64] {
        &self.x
    }

    fn observe(
        &mut self,
        t: usize,
        oracle: &mut NoisyGradientOracle,
        domain: &PolytopeDomain,
    ) -> Result<()> {
        if t == 0 {
            return Err(Error::InvalidParameter("rounds are 1-based".into()));
        }
        check_dim(domain.dim(), self.x.len())?;
        let k = alg2_inner_steps(t);
        let step = 1.0 / k as f64;
        let mut x = vec![0.0; self.x.len()];
        self.directions.clear();
        for _ in 0..k {
            let mut d = vec![0.0; x.len()];
            for tau in 1..=t {
                axpy(&mut d, 1.0, &oracle.gradient(tau, &x)?);
            }
            let d = scale(&d, 1.0 / t as f64);
            let v = domain.linear_maximize(&d)?.into_inner();
            axpy(&mut x, step, &v);
            self.directions.push(v);
        }
        self.x = x;
        Ok(())
    }
}

/// Weight of the fresh gradient in the recursive estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rho {
    /// `rho_t = 1/(t+1)`.
    Recursive,
    /// `rho_t = 1`: the plain one-gradient estimator.
    One,
}

/// `d_t = g_t(x_t) + (1 - rho_t)(d_{t-1} - g_t(x_{t-1}))`,
/// `x_{t+1} = x_t + LMO(d_t) / T`, `x_1 = 0`.
#[derive(Debug, Clone)]
pub struct RecursiveFw {
    horizon: usize,
    rho: Rho,
    x: Vec<f64>,
    x_prev: Vec<f64>,
    d: Option<Vec<f64>>,
}

impl RecursiveFw {
    pub fn new(n: usize, horizon: usize, rho: Rho) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::InvalidParameter("horizon must be at least 1".into()));
        }
        Ok(Self {
            horizon,
            rho,
            x: vec![0.0; n],
            x_prev: vec![0.0; n],
            d: None,
        })
    }

    pub fn algorithm3(n: usize, horizon: usize) -> Result<Self> {
        Self::new(n, horizon, Rho::Recursive)
    }

    pub fn osfw(n: usize, horizon: usize) -> Result<Self> {
        Self::new(n, horizon, Rho::One)
    }

    /// Updates the estimator with `g_t(x_t)` and, for `t >= 2`, `g_t(x_{t-1})`.
    pub(crate) fn recurse(&mut self, t: usize, fresh: Vec<f64>, stale: Option<Vec<f64>>) -> Vec<f64> {
        match (self.d.take(), stale) {
            (Some(prev), Some(stale)) => {
                let keep = 1.0 - 1.0 / (t as f64 + 1.0);
                let mut d = fresh;
                for ((di, p), s) in d.iter_mut().zip(&prev).zip(&stale) {
                    *di += keep * (p - s);
                }
                d
            }
            _ => fresh,
        }
    }
}

impl StochasticLearner for RecursiveFw {
    fn current(&self) -> &[f64] {
        &self.x
    }

    fn observe(
        &mut self,
        t: usize,
        oracle: &mut NoisyGradientOracle,
        domain: &PolytopeDomain,
    ) -> Result<()> {
        if t == 0 || t > self.horizon {
            return Err(Error::InvalidParameter(format!(
                "round {t} outside [1, {}]",
                self.horizon
            )));
        }
        check_dim(domain.dim(), self.x.len())?;
        let fresh = oracle.gradient(t, &self.x)?;
        let stale = if self.rho == Rho::Recursive && t >= 2 {
            Some(oracle.gradient(t, &self.x_prev)?)
        } else {
            None
        };
        let d = self.recurse(t, fresh, stale);
        let v = domain.linear_maximize(&d)?.into_inner();
        self.x_prev = self.x.clone();
        axpy(&mut self.x, 1.0 / self.horizon as f64, &v);
        self.d = Some(d);
        Ok(())
    }

    fn estimate(&self) -> Option<&[f64]> {
        self.d.as_deref()
    }
}

#[derive(Debug, Clone)]
pub struct StochasticRun {
    /// `x_1, ..., x_T`.
    pub points: Vec<Vec<f64>>,
    /// `f_t(x_t)`.
    pub realized: Vec<f64>,
    /// `f(x_t)`.
    pub expected: Vec<f64>,
    /// `||d_t - grad f(x_t)||_2` for learners with an estimator.
    pub estimator_errors: Option<Vec<f64>>,
    pub gradient_calls: usize,
}

pub fn run_stochastic<L: StochasticLearner>(
    learner: &mut L,
    oracle: &mut NoisyGradientOracle,
    domain: &PolytopeDomain,
    horizon: usize,
) -> Result<StochasticRun> {
    let start_calls = oracle.calls();
    let f = oracle.expected().clone();
    let mut points = Vec::with_capacity(horizon);
    let mut realized = Vec::with_capacity(horizon);
    let mut expected = Vec::with_capacity(horizon);
    let mut errors = Vec::new();
    for t in 1..=horizon {
        let x = learner.current().to_vec();
        realized.push(oracle.value(t, &x)?);
        expected.push(f.value(&x)?);
        learner.observe(t, oracle, domain)?;
        if let Some(d) = learner.estimate() {
            errors.push(dist2(d, &f.gradient(&x)?));
        }
        points.push(x);
    }
    Ok(StochasticRun {
        points,
        realized,
        expected,
        estimator_errors: (!errors.is_empty()).then_some(errors),
        gradient_calls: oracle.calls() - start_calls,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::objectives::{IidQuadraticFamily, Retention};

    fn oracle(nu: f64, retention: Retention) -> NoisyGradientOracle {
        let a = Matrix::from_rows(vec![vec![-0.5, -0.2], vec![-0.3, -0.6]]).unwrap();
        NoisyGradientOracle::new(IidQuadraticFamily::BilinearNoise { a, nu }, 11, retention).unwrap()
    }

    #[test]
    fn inner_step_counts() {
        let got: Vec<usize> = (1..=10).map(alg2_inner_steps).collect();
        assert_eq!(got, vec![1, 2, 2, 2, 3, 3, 3, 3, 3, 4]);
        assert_eq!(alg2_total_calls(4), 1 + 4 + 6 + 8);
    }

    #[test]
    fn recursion_example() {
        let mut r = RecursiveFw::algorithm3(2, 10).unwrap();
        r.d = Some(vec![1.0, 0.0]);
        let d = r.recurse(2, vec![0.0, 1.0], Some(vec![1.0, 0.0]));
        assert_eq!(d, vec![0.0, 1.0]);
    }

    #[test]
    fn call_counters() {
        let d = PolytopeDomain::unit_box(2).unwrap();
        let t = 12;
        let mut o = oracle(1.0, Retention::All);
        let run = run_stochastic(&mut AveragedGradientFw::new(2), &mut o, &d, t).unwrap();
        assert_eq!(run.gradient_calls, alg2_total_calls(t));
        let mut o = oracle(1.0, Retention::Window(2));
        let run = run_stochastic(&mut RecursiveFw::algorithm3(2, t).unwrap(), &mut o, &d, t).unwrap();
        assert_eq!(run.gradient_calls, 2 * t - 1);
        let mut o = oracle(1.0, Retention::Window(1));
        let run = run_stochastic(&mut RecursiveFw::osfw(2, t).unwrap(), &mut o, &d, t).unwrap();
        assert_eq!(run.gradient_calls, t);
    }

    #[test]
    fn first_round_of_averaged_fw_is_one_lmo_step() {
        let d = PolytopeDomain::unit_box(2).unwrap();
        let mut o = oracle(2.0, Retention::All);
        let g = o.clone().gradient(1, &[0.0, 0.0]).unwrap();
        let mut alg = AveragedGradientFw::new(2);
        alg.observe(1, &mut o, &d).unwrap();
        assert_eq!(alg.current(), &d.linear_maximize(&g).unwrap()[..]);
    }
}
