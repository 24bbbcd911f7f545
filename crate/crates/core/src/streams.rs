//! Arrival models for the utility sequence, the random-order block-size
//! threshold, and Monte-Carlo validation of block averaging.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{Norm, PolytopeDomain};
use crate::error::{Error, Result};
use crate::objectives::{check_strong_dr, IidQuadraticFamily, QuadraticUtility, Sampling, Utility};

/// `(5/2) ln 3 - 2/3`, the variance-proxy constant of the permutation
/// concentration bound.
pub fn theta() -> f64 {
    2.5 * 3f64.ln() - 2.0 / 3.0
}

/// Uniformly random reordering (Fisher-Yates) driven by `seed`.
pub fn permute<T: Clone>(items: &[T], seed: u64) -> Vec<T> {
    let mut out = items.to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    out.shuffle(&mut rng);
    out
}

/// How the utility sequence reaches the learner.
#[derive(Debug, Clone, PartialEq)]
pub enum StreamModel {
    Adversarial(Vec<Utility>),
    RandomOrder { functions: Vec<Utility>, seed: u64 },
    Iid { family: IidQuadraticFamily, seed: u64, horizon: usize },
}

impl StreamModel {
    pub fn horizon(&self) -> usize {
        match self {
            StreamModel::Adversarial(fs) | StreamModel::RandomOrder { functions: fs, .. } => fs.len(),
            StreamModel::Iid { horizon, .. } => *horizon,
        }
    }

    /// The sequence in arrival order; i.i.d. streams are materialized.
    pub fn sequence(&self) -> Result<Vec<Utility>> {
        match self {
            StreamModel::Adversarial(fs) => Ok(fs.clone()),
            StreamModel::RandomOrder { functions, seed } => Ok(permute(functions, *seed)),
            StreamModel::Iid { .. } => (1..=self.horizon())
                .map(|t| iid_draw(self, t).map(Utility::from))
                .collect(),
        }
    }
}

/// `f_t` of an i.i.d. stream (rounds are 1-based).
pub fn iid_draw(stream: &StreamModel, t: usize) -> Result<QuadraticUtility> {
    match stream {
        StreamModel::Iid { family, seed, .. } => family.sample(*seed, t),
        _ => Err(Error::InvalidParameter("iid_draw needs an i.i.d. stream".into())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockSpec {
    pub w: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub mu: f64,
    pub l: f64,
}

impl BlockSpec {
    pub fn validate(&self, horizon: usize) -> Result<()> {
        if self.w == 0 || self.w > horizon {
            return Err(Error::InvalidParameter(format!(
                "block size {} must lie in [1, {horizon}]",
                self.w
            )));
        }
        check_branch(self.mu, self.l, self.epsilon, self.delta)
    }
}

fn check_branch(mu: f64, l: f64, epsilon: f64, delta: f64) -> Result<()> {
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::InvalidParameter(format!("mu must be positive, got {mu}")));
    }
    if !(l.is_finite() && l > 0.0) {
        return Err(Error::InvalidParameter(format!("L must be positive, got {l}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("delta must lie in (0, 1), got {delta}")));
    }
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon must be positive, got {epsilon}")));
    }
    if epsilon > mu / 2.0 {
        return Err(Error::InvalidParameter(format!(
            "epsilon {epsilon} exceeds mu/2 = {}",
            mu / 2.0
        )));
    }
    if epsilon > 6.0 * theta() * l {
        return Err(Error::InvalidParameter(format!(
            "epsilon {epsilon} exceeds 6 theta L = {}",
            6.0 * theta() * l
        )));
    }
    Ok(())
}

/// `ceil(128 theta L^2 / eps^2 * ln(4 n T / delta))`, valid for
/// `eps <= min(mu/2, 6 theta L)`.
pub fn compute_w0_quadratic(
    mu: f64,
    l: f64,
    epsilon: f64,
    delta: f64,
    n: usize,
    horizon: usize,
) -> Result<usize> {
    check_branch(mu, l, epsilon, delta)?;
    if n == 0 || horizon == 0 {
        return Err(Error::InvalidParameter("n and T must be positive".into()));
    }
    let log = (4.0 * n as f64 * horizon as f64 / delta).ln();
    let w0 = 128.0 * theta() * l * l / (epsilon * epsilon) * log;
    Ok((w0.ceil() as usize).max(1))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscretizedW0 {
    pub w0: usize,
    /// `mu - eps - gamma H`, the modulus the block averages retain.
    pub modulus: f64,
}

/// Threshold for non-quadratic families, using a grid of spacing `gamma`
/// over the box with side lengths `r_coords`:
/// `ceil(128 theta L^2 / eps^2 * ln(4 T sum_i R_i / (2 gamma delta)))`.
#[allow(clippy::too_many_arguments)]
pub fn compute_w0_discretized(
    mu: f64,
    l: f64,
    epsilon: f64,
    delta: f64,
    gamma: f64,
    h: f64,
    r_coords: &[f64],
    horizon: usize,
) -> Result<DiscretizedW0> {
    check_branch(mu, l, epsilon, delta)?;
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::InvalidParameter(format!("gamma must be positive, got {gamma}")));
    }
    if !(h.is_finite() && h >= 0.0) {
        return Err(Error::InvalidParameter(format!("H must be non-negative, got {h}")));
    }
    if r_coords.is_empty() || r_coords.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
        return Err(Error::InvalidParameter("side lengths must be non-negative".into()));
    }
    let modulus = mu - epsilon - gamma * h;
    if modulus <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "mu - eps - gamma H = {modulus} is not positive"
        )));
    }
    let r_sum: f64 = r_coords.iter().sum();
    let log = (4.0 * horizon as f64 * r_sum / (2.0 * gamma * delta)).ln();
    let w0 = 128.0 * theta() * l * l / (epsilon * epsilon) * log;
    Ok(DiscretizedW0 {
        w0: (w0.ceil().max(1.0)) as usize,
        modulus,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockReport {
    pub violation_rate: f64,
    pub violations: usize,
    pub trials: usize,
}

/// Samples for the sampling fallback used on non-quadratic block averages.
const FALLBACK_SAMPLES: usize = 200;

/// Fraction of random orderings in which some block average fails to be
/// `(mu/2)`-strongly DR-submodular. Quadratics are decided exactly from the
/// averaged Hessian diagonals; other families fall back to the sampling check
/// over `domain`. Trial `i` uses the permutation stream `(seed, i)`.
pub fn validate_block_strong_dr(
    fs: &[Utility],
    domain: &PolytopeDomain,
    w: usize,
    mu: f64,
    trials: usize,
    seed: u64,
) -> Result<BlockReport> {
    if fs.is_empty() || w == 0 || w > fs.len() {
        return Err(Error::InvalidParameter(format!(
            "block size {w} must lie in [1, {}]",
            fs.len()
        )));
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let quadratics: Option<Vec<&QuadraticUtility>> = fs.iter().map(Utility::as_quadratic).collect();
    let violations = match quadratics {
        Some(qs) => count_diag_violations(&qs, w, mu, trials, seed)?,
        None => count_sampled_violations(fs, domain, w, mu, trials, seed)?,
    };
    Ok(BlockReport {
        violation_rate: violations as f64 / trials as f64,
        violations,
        trials,
    })
}

fn trial_order(len: usize, seed: u64, trial: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..len).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    order.shuffle(&mut rng);
    order
}

fn count_diag_violations(
    qs: &[&QuadraticUtility],
    w: usize,
    mu: f64,
    trials: usize,
    seed: u64,
) -> Result<usize> {
    let n = qs[0].hessian().rows();
    let diags: Vec<Vec<f64>> = qs.iter().map(|q| q.hessian().diag()).collect();
    if diags.iter().any(|d| d.len() != n) {
        return Err(Error::InvalidParameter("functions differ in dimension".into()));
    }
    let global_ok = (0..n).all(|i| {
        let avg = diags.iter().map(|d| d[i]).sum::<f64>() / diags.len() as f64;
        avg <= -mu + 1e-9
    });
    if !global_ok {
        return Err(Error::InvalidParameter(format!(
            "average Hessian diagonal is not bounded by -mu = {}",
            -mu
        )));
    }
    let threshold = -mu / 2.0;
    let mut violations = 0;
    let mut sums = vec![0.0; n];
    for trial in 0..trials {
        let order = trial_order(qs.len(), seed, trial);
        let bad = order.chunks(w).any(|block| {
            sums.iter_mut().for_each(|s| *s = 0.0);
            for &j in block {
                for (s, d) in sums.iter_mut().zip(&diags[j]) {
                    *s += d;
                }
            }
            let len = block.len() as f64;
            sums.iter().any(|s| s / len > threshold)
        });
        violations += usize::from(bad);
    }
    Ok(violations)
}

fn count_sampled_violations(
    fs: &[Utility],
    domain: &PolytopeDomain,
    w: usize,
    mu: f64,
    trials: usize,
    seed: u64,
) -> Result<usize> {
    let mut violations = 0;
    for trial in 0..trials {
        let order = trial_order(fs.len(), seed, trial);
        let mut bad = false;
        for (b, block) in order.chunks(w).enumerate() {
            let members: Vec<Utility> = block.iter().map(|&j| fs[j].clone()).collect();
            let avg = Utility::average(&members)?;
            let sampling = Sampling::new(FALLBACK_SAMPLES, seed ^ ((trial as u64) << 20) ^ b as u64);
            if !check_strong_dr(&avg, domain, mu / 2.0, Norm::L2, &sampling)?.holds() {
                bad = true;
                break;
            }
        }
        violations += usize::from(bad);
    }
    Ok(violations)
}
