use serde::{Deserialize, Serialize};

use crate::domain::PolytopeDomain;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{axpy, scale};

/// One of the `K` inner learners driven by Meta-Frank-Wolfe. It plays a point
/// before seeing the round and is then fed the gradient of its linear payoff.
pub trait SubLearner {
    fn select(&self, domain: &PolytopeDomain) -> Result<Vec<f64>>;
    fn update(&mut self, gradient: &[f64]) -> Result<()>;
}

/// Follow-the-Leader on the payoffs `<v, g_s> - mu/2 ||v||^2`; the leader is
/// `Proj(sum_s g_s / (mu * rounds))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FtlState {
    pub grad_sum: Vec<f64>,
    pub rounds_seen: usize,
    pub mu: f64,
}

impl FtlState {
    pub fn new(n: usize, mu: f64) -> Result<Self> {
        if !(mu.is_finite() && mu > 0.0) {
            return Err(Error::InvalidParameter(format!("mu must be positive, got {mu}")));
        }
        Ok(Self {
            grad_sum: vec![0.0; n],
            rounds_seen: 0,
            mu,
        })
    }
}

impl SubLearner for FtlState {
    /// With no data the leader is undefined; the origin is played.
    fn select(&self, domain: &PolytopeDomain) -> Result<Vec<f64>> {
        check_dim(domain.dim(), self.grad_sum.len())?;
        if self.rounds_seen == 0 {
            return Ok(vec![0.0; self.grad_sum.len()]);
        }
        let target = scale(&self.grad_sum, 1.0 / (self.mu * self.rounds_seen as f64));
        Ok(domain.project(&target)?.into_inner())
    }

    fn update(&mut self, gradient: &[f64]) -> Result<()> {
        check_dim(self.grad_sum.len(), gradient.len())?;
        axpy(&mut self.grad_sum, 1.0, gradient);
        self.rounds_seen += 1;
        Ok(())
    }
}

/// Step size of [`Ftrl`] at the round following `rounds_seen` observations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepSchedule {
    Constant { eta: f64 },
    /// `eta = 1 / (mu * rounds_seen)`, which reproduces [`FtlState`].
    Harmonic { mu: f64 },
}

impl StepSchedule {
    fn eta(&self, rounds_seen: usize) -> f64 {
        match *self {
            StepSchedule::Constant { eta } => eta,
            StepSchedule::Harmonic { mu } => 1.0 / (mu * rounds_seen as f64),
        }
    }
}

/// Follow-the-Regularized-Leader for linear payoffs with regularizer
/// `||v||^2 / (2 eta)`: plays `Proj(eta * sum_s g_s)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ftrl {
    pub grad_sum: Vec<f64>,
    pub rounds_seen: usize,
    pub schedule: StepSchedule,
}

impl Ftrl {
    pub fn new(n: usize, schedule: StepSchedule) -> Result<Self> {
        let param = match schedule {
            StepSchedule::Constant { eta } => eta,
            StepSchedule::Harmonic { mu } => mu,
        };
        if !(param.is_finite() && param > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "step schedule parameter must be positive, got {param}"
            )));
        }
        Ok(Self {
            grad_sum: vec![0.0; n],
            rounds_seen: 0,
            schedule,
        })
    }

    /// `eta = R / (beta sqrt(T))`.
    pub fn tuned_eta(diameter: f64, gradient_bound: f64, horizon: usize) -> f64 {
        if gradient_bound <= 0.0 {
            return 1.0;
        }
        diameter / (gradient_bound * (horizon.max(1) as f64).sqrt())
    }
}

impl SubLearner for Ftrl {
    fn select(&self, domain: &PolytopeDomain) -> Result<Vec<f64>> {
        check_dim(domain.dim(), self.grad_sum.len())?;
        if self.rounds_seen == 0 {
            return Ok(domain.project(&vec![0.0; self.grad_sum.len()])?.into_inner());
        }
        let target = scale(&self.grad_sum, self.schedule.eta(self.rounds_seen));
        Ok(domain.project(&target)?.into_inner())
    }

    fn update(&mut self, gradient: &[f64]) -> Result<()> {
        check_dim(self.grad_sum.len(), gradient.len())?;
        axpy(&mut self.grad_sum, 1.0, gradient);
        self.rounds_seen += 1;
        Ok(())
    }
}
