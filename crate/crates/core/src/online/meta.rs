use crate::domain::PolytopeDomain;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{axpy, norm2};
use crate::objectives::Objective;

use super::learners::{FtlState, Ftrl, StepSchedule, SubLearner};

/// Inner points and directions of one Meta-Frank-Wolfe round.
#[derive(Debug, Clone, PartialEq)]
pub struct PlayedRound {
    /// `x^(K+1)`, the played point.
    pub x: Vec<f64>,
    /// `x^(1), ..., x^(K)` at which the revealed function is differentiated.
    pub inner: Vec<Vec<f64>>,
    /// `v^(1), ..., v^(K)`.
    pub directions: Vec<Vec<f64>>,
}

/// `K` sub-learners; each round plays `x^(K+1)` where
/// `x^(k+1) = x^(k) + v^(k)/K`, `x^(1) = 0` and `v^(k)` comes from learner `k`.
/// After the function is revealed, learner `k` receives `grad f_t(x^(k))`.
#[derive(Debug, Clone)]
pub struct MetaFrankWolfe<S> {
    learners: Vec<S>,
    dim: usize,
    round: usize,
    pending: Option<PlayedRound>,
}

pub type Algorithm1 = MetaFrankWolfe<FtlState>;
pub type MetaFw = MetaFrankWolfe<Ftrl>;

/// `max(1, ceil(T / ln T))`.
pub fn default_k_algorithm1(horizon: usize) -> usize {
    if horizon < 3 {
        return 1;
    }
    let t = horizon as f64;
    ((t / t.ln()).ceil() as usize).max(1)
}

/// `ceil(sqrt(T))`.
pub fn default_k_meta_fw(horizon: usize) -> usize {
    ((horizon as f64).sqrt().ceil() as usize).max(1)
}

/// `max_t ||grad f_t(0)||_2`, a bound on every gradient over the domain for
/// monotone DR-submodular utilities (gradients are non-negative and antitone).
pub fn gradient_bound<F: Objective>(fs: &[F]) -> Result<f64> {
    fs.iter().try_fold(0.0f64, |acc, f| {
        Ok(acc.max(norm2(&f.gradient(&vec![0.0; f.dim()])?)))
    })
}

impl Algorithm1 {
    pub fn algorithm1(n: usize, k: usize, mu: f64) -> Result<Self> {
        let learner = FtlState::new(n, mu)?;
        Self::from_learners(n, vec![learner; k.max(1)], k)
    }
}

impl MetaFw {
    pub fn meta_fw(n: usize, k: usize, schedule: StepSchedule) -> Result<Self> {
        let learner = Ftrl::new(n, schedule)?;
        Self::from_learners(n, vec![learner; k.max(1)], k)
    }
}

impl<S: SubLearner> MetaFrankWolfe<S> {
    pub fn from_learners(n: usize, learners: Vec<S>, k: usize) -> Result<Self> {
        if k == 0 || learners.len() != k {
            return Err(Error::InvalidParameter(format!(
                "K must be at least 1 and match the {} learners",
                learners.len()
            )));
        }
        Ok(Self {
            learners,
            dim: n,
            round: 0,
            pending: None,
        })
    }

    pub fn k(&self) -> usize {
        self.learners.len()
    }

    /// Completed rounds.
    pub fn round(&self) -> usize {
        self.round
    }

    pub fn learners(&self) -> &[S] {
        &self.learners
    }

    /// Commits to this round's point. Calling twice without [`observe`]
    /// returns the same round.
    ///
    /// [`observe`]: MetaFrankWolfe::observe
    pub fn play(&mut self, domain: &PolytopeDomain) -> Result<&PlayedRound> {
        check_dim(domain.dim(), self.dim)?;
        if self.pending.is_none() {
            let k = self.k();
            let step = 1.0 / k as f64;
            let mut x = vec![0.0; self.dim];
            let mut inner = Vec::with_capacity(k);
            let mut directions = Vec::with_capacity(k);
            for learner in &self.learners {
                let v = learner.select(domain)?;
                inner.push(x.clone());
                axpy(&mut x, step, &v);
                directions.push(v);
            }
            self.pending = Some(PlayedRound {
                x,
                inner,
                directions,
            });
        }
        Ok(self.pending.as_ref().expect("set above"))
    }

    /// Feeds the revealed function to every learner, in learner order.
    pub fn observe<F: Objective + ?Sized>(&mut self, f: &F) -> Result<PlayedRound> {
        let Some(played) = self.pending.take() else {
            return Err(Error::InvalidParameter("observe called before play".into()));
        };
        check_dim(self.dim, f.dim())?;
        let grads = played
            .inner
            .iter()
            .map(|x| f.gradient(x))
            .collect::<Result<Vec<_>>>()?;
        for (learner, g) in self.learners.iter_mut().zip(&grads) {
            learner.update(g)?;
        }
        self.round += 1;
        Ok(played)
    }

    pub fn step<F: Objective + ?Sized>(
        &mut self,
        domain: &PolytopeDomain,
        f: &F,
    ) -> Result<PlayedRound> {
        self.play(domain)?;
        self.observe(f)
    }
}

/// Plays the learner against `fs` in the given order.
pub fn run_adversarial<S: SubLearner, F: Objective>(
    learner: &mut MetaFrankWolfe<S>,
    domain: &PolytopeDomain,
    fs: &[F],
) -> Result<Vec<PlayedRound>> {
    fs.iter().map(|f| learner.step(domain, f)).collect()
}
