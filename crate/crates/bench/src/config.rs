//! TOML experiment and property-check configurations.

use std::path::{Path, PathBuf};

use drsub_core::domain::PolytopeSpec;
use drsub_core::objectives::IidQuadraticFamily;
use drsub_core::offline::ComparatorSpec;
use drsub_core::online::Rho;
use drsub_core::{Norm, Objective, PolytopeDomain, Utility};
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub horizon: usize,
    pub seeds: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub domain: DomainConfig,
    pub stream: StreamConfig,
    pub algorithms: Vec<AlgorithmConfig>,
    #[serde(default)]
    pub comparator: ComparatorSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainConfig {
    /// A fixed polytope, same for every seed.
    Polytope { spec: PolytopeSpec },
    /// `{Cx <= rhs * 1, 0 <= x <= 1}` with `C` drawn uniformly from
    /// `entry_range` per seed.
    RandomPacking {
        dim: usize,
        rows: usize,
        #[serde(default = "one")]
        rhs: f64,
        #[serde(default = "unit_range")]
        entry_range: [f64; 2],
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StreamKind {
    Adversarial,
    RandomOrder,
    Iid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StreamConfig {
    pub model: StreamKind,
    /// Offset mixed into the per-run seed for orderings and noise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub generator: GeneratorConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorConfig {
    /// Exactly `horizon` utilities, used verbatim.
    Explicit { functions: Vec<Utility> },
    /// Random users rating random movies; same-genre pairs are penalized.
    SyntheticRatings {
        #[serde(default = "default_movies")]
        movies: usize,
        #[serde(default = "default_genres")]
        genres: usize,
        /// Probability that a user rated a given movie.
        #[serde(default = "default_density")]
        density: f64,
        #[serde(default = "default_scale")]
        scale: f64,
    },
    /// MovieLens-1M files; one user per round.
    Movielens {
        ratings: PathBuf,
        movies: PathBuf,
        #[serde(default = "default_movies")]
        n_movies: usize,
        #[serde(default = "default_scale")]
        scale: f64,
    },
    /// Symmetric quadratics `x^T A x / 2 - (A 1)^T x` with off-diagonals in
    /// `off_diag`; the first half of the rounds draw the diagonal from
    /// `first_diag`, the second half from `second_diag`.
    QuadraticMix {
        #[serde(default = "default_off_diag")]
        off_diag: [f64; 2],
        #[serde(default = "default_first_diag")]
        first_diag: [f64; 2],
        #[serde(default = "default_second_diag")]
        second_diag: [f64; 2],
    },
    /// A fixed i.i.d. family.
    IidFamily { family: IidQuadraticFamily },
    /// `(x/2 - 1)^T (A + N_t) x` with `A` drawn uniformly from `entry_range`
    /// per seed and noise entries uniform in `[-nu, nu]`.
    BilinearNoise {
        #[serde(default = "default_bilinear_range")]
        entry_range: [f64; 2],
        #[serde(default = "default_nu")]
        nu: f64,
    },
}

impl GeneratorConfig {
    pub fn is_iid(&self) -> bool {
        matches!(
            self,
            GeneratorConfig::IidFamily { .. } | GeneratorConfig::BilinearNoise { .. }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AlgorithmConfig {
    /// Meta-Frank-Wolfe with FTL sub-learners.
    Algorithm1 {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        id: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        k: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mu: Option<f64>,
    },
    /// Meta-Frank-Wolfe with constant-step FTRL sub-learners.
    MetaFw {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        id: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        k: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eta: Option<f64>,
    },
    /// `algorithm1` on block averages of size `w`. On an adversarial stream
    /// the sequence is shuffled first unless `permute = false`.
    BlockedAlgorithm1 {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        id: Option<String>,
        w: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        k: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mu: Option<f64>,
        #[serde(default = "yes")]
        permute: bool,
    },
    /// Frank-Wolfe on the running average of sampled functions,
    /// `ceil(sqrt(t))` steps per round.
    AveragedGradientFw {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        id: Option<String>,
    },
    RecursiveFw {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        id: Option<String>,
        #[serde(default = "default_rho")]
        rho: Rho,
    },
    /// One stochastic gradient per round (`rho = 1`).
    Osfw {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        id: Option<String>,
    },
}

impl AlgorithmConfig {
    pub fn id(&self) -> String {
        let (id, default) = match self {
            AlgorithmConfig::Algorithm1 { id, .. } => (id, "algorithm1"),
            AlgorithmConfig::MetaFw { id, .. } => (id, "meta_fw"),
            AlgorithmConfig::BlockedAlgorithm1 { id, .. } => (id, "blocked_algorithm1"),
            AlgorithmConfig::AveragedGradientFw { id } => (id, "averaged_gradient_fw"),
            AlgorithmConfig::RecursiveFw { id, .. } => (id, "recursive_fw"),
            AlgorithmConfig::Osfw { id } => (id, "osfw"),
        };
        id.clone().unwrap_or_else(|| default.to_string())
    }

    pub fn is_stochastic(&self) -> bool {
        matches!(
            self,
            AlgorithmConfig::AveragedGradientFw { .. }
                | AlgorithmConfig::RecursiveFw { .. }
                | AlgorithmConfig::Osfw { .. }
        )
    }

    /// Approximation ratio the algorithm's regret is measured against.
    pub fn alpha(&self) -> f64 {
        match self {
            AlgorithmConfig::RecursiveFw { .. } | AlgorithmConfig::Osfw { .. } => drsub_core::INV_E,
            _ => drsub_core::ONE_MINUS_INV_E,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(BenchError::Config(msg));
        if self.experiment.trim().is_empty() {
            return invalid("experiment id must be nonempty".into());
        }
        if self.horizon == 0 {
            return invalid("horizon must be at least 1".into());
        }
        if self.seeds.is_empty() {
            return invalid("seeds must be nonempty".into());
        }
        if self.algorithms.is_empty() {
            return invalid("at least one algorithm is required".into());
        }
        let mut ids: Vec<String> = self.algorithms.iter().map(AlgorithmConfig::id).collect();
        ids.sort();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return invalid(format!("duplicate algorithm id {:?}", w[0]));
        }
        if self.comparator.fw_k == 0 {
            return invalid("comparator.fw_k must be at least 1".into());
        }
        if let Some(step) = self.comparator.grid_step {
            if !(step.is_finite() && step > 0.0) {
                return invalid("comparator.grid_step must be positive".into());
            }
        }
        let dim = match &self.domain {
            DomainConfig::Polytope { spec } => {
                PolytopeDomain::try_from(spec.clone())?;
                spec.dim
            }
            DomainConfig::RandomPacking {
                dim,
                rows,
                rhs,
                entry_range,
            } => {
                if *dim == 0 || *rows == 0 {
                    return invalid("random_packing needs dim and rows of at least 1".into());
                }
                if !(rhs.is_finite() && *rhs >= 0.0) {
                    return invalid("random_packing rhs must be non-negative".into());
                }
                check_range("random_packing entry_range", *entry_range)?;
                if entry_range[0] < 0.0 {
                    return invalid("random_packing entries must be non-negative".into());
                }
                *dim
            }
        };
        let iid = self.stream.model == StreamKind::Iid;
        if iid != self.stream.generator.is_iid() {
            return invalid(format!(
                "stream model {:?} does not fit the chosen generator",
                self.stream.model
            ));
        }
        for a in &self.algorithms {
            if a.is_stochastic() != iid {
                return invalid(format!(
                    "algorithm {} cannot run on a {:?} stream",
                    a.id(),
                    self.stream.model
                ));
            }
            match a {
                AlgorithmConfig::Algorithm1 { k, mu, .. } => {
                    check_k(*k)?;
                    check_positive_opt("mu", *mu)?;
                }
                AlgorithmConfig::MetaFw { k, eta, .. } => {
                    check_k(*k)?;
                    check_positive_opt("eta", *eta)?;
                }
                AlgorithmConfig::BlockedAlgorithm1 { w, k, mu, .. } => {
                    if *w == 0 || *w > self.horizon {
                        return invalid(format!("block size {w} must lie in [1, {}]", self.horizon));
                    }
                    check_k(*k)?;
                    check_positive_opt("mu", *mu)?;
                }
                _ => {}
            }
        }
        match &self.stream.generator {
            GeneratorConfig::Explicit { functions } => {
                if functions.len() != self.horizon {
                    return invalid(format!(
                        "explicit stream has {} functions for horizon {}",
                        functions.len(),
                        self.horizon
                    ));
                }
                if let Some(f) = functions.iter().find(|f| f.dim() != dim) {
                    return invalid(format!("function of dimension {} on a {dim}-dimensional domain", f.dim()));
                }
            }
            GeneratorConfig::SyntheticRatings {
                movies,
                genres,
                density,
                scale,
            } => {
                if *movies != dim {
                    return invalid(format!("{movies} movies on a {dim}-dimensional domain"));
                }
                if *genres == 0 {
                    return invalid("genres must be at least 1".into());
                }
                if !(0.0..=1.0).contains(density) || *density == 0.0 {
                    return invalid("density must lie in (0, 1]".into());
                }
                check_positive_opt("scale", Some(*scale))?;
            }
            GeneratorConfig::Movielens { n_movies, scale, .. } => {
                if *n_movies != dim {
                    return invalid(format!("{n_movies} movies on a {dim}-dimensional domain"));
                }
                check_positive_opt("scale", Some(*scale))?;
            }
            GeneratorConfig::QuadraticMix {
                off_diag,
                first_diag,
                second_diag,
            } => {
                check_range("off_diag", *off_diag)?;
                check_range("first_diag", *first_diag)?;
                check_range("second_diag", *second_diag)?;
                if off_diag[1] > 0.0 {
                    return invalid("off_diag entries must be non-positive".into());
                }
            }
            GeneratorConfig::IidFamily { family } => {
                family.validate()?;
                if family.dim() != dim {
                    return invalid(format!(
                        "family of dimension {} on a {dim}-dimensional domain",
                        family.dim()
                    ));
                }
            }
            GeneratorConfig::BilinearNoise { entry_range, nu } => {
                check_range("entry_range", *entry_range)?;
                if !(nu.is_finite() && *nu >= 0.0) {
                    return invalid("nu must be non-negative".into());
                }
            }
        }
        Ok(())
    }
}

/// Input to `drsub check-function`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckConfig {
    pub domain: PolytopeSpec,
    pub function: Utility,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Strong DR-submodularity modulus to test, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    /// Smoothness constant to test, if any.
    #[serde(default, rename = "L", skip_serializing_if = "Option::is_none")]
    pub smoothness: Option<f64>,
    #[serde(default = "default_norm")]
    pub norm: Norm,
}

impl CheckConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
        Self::from_toml(&text)
    }
}

fn check_k(k: Option<usize>) -> Result<()> {
    if k == Some(0) {
        return Err(BenchError::Config("K must be at least 1".into()));
    }
    Ok(())
}

fn check_positive_opt(name: &str, v: Option<f64>) -> Result<()> {
    match v {
        Some(v) if !(v.is_finite() && v > 0.0) => {
            Err(BenchError::Config(format!("{name} must be positive, got {v}")))
        }
        _ => Ok(()),
    }
}

fn check_range(name: &str, [lo, hi]: [f64; 2]) -> Result<()> {
    if lo.is_finite() && hi.is_finite() && lo <= hi {
        Ok(())
    } else {
        Err(BenchError::Config(format!("{name} must be a finite [low, high] pair")))
    }
}

fn one() -> f64 {
    1.0
}
fn yes() -> bool {
    true
}
fn unit_range() -> [f64; 2] {
    [0.0, 1.0]
}
fn default_movies() -> usize {
    17
}
fn default_genres() -> usize {
    18
}
fn default_density() -> f64 {
    0.6
}
fn default_scale() -> f64 {
    5.0
}
fn default_off_diag() -> [f64; 2] {
    [-10.0, 0.0]
}
fn default_first_diag() -> [f64; 2] {
    [-10.0, 0.0]
}
fn default_second_diag() -> [f64; 2] {
    [0.0, 5.0]
}
fn default_bilinear_range() -> [f64; 2] {
    [-1.0, 0.0]
}
fn default_nu() -> f64 {
    4.0
}
fn default_rho() -> Rho {
    Rho::Recursive
}
fn default_samples() -> usize {
    drsub_core::objectives::DEFAULT_CHECK_SAMPLES
}
fn default_tol() -> f64 {
    drsub_core::objectives::DEFAULT_CHECK_TOL
}
fn default_norm() -> Norm {
    Norm::L2
}
