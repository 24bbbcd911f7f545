//! Sampling-based certificates for monotonicity, DR-submodularity, strong
//! DR-submodularity and smoothness over non-negative directions.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Objective;
use crate::domain::{Norm, PolytopeDomain};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot, sub};

pub const DEFAULT_CHECK_SAMPLES: usize = 1000;
pub const DEFAULT_CHECK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sampling {
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
}

impl Default for Sampling {
    fn default() -> Self {
        Self {
            samples: DEFAULT_CHECK_SAMPLES,
            seed: 0,
            tol: DEFAULT_CHECK_TOL,
        }
    }
}

impl Sampling {
    pub fn new(samples: usize, seed: u64) -> Self {
        Self {
            samples,
            seed,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::InvalidParameter("samples must be at least 1".into()));
        }
        if !(self.tol.is_finite() && self.tol >= 0.0) {
            return Err(Error::InvalidParameter("tolerance must be non-negative".into()));
        }
        Ok(())
    }
}

/// A violating sample. Pointwise checks report `x == y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Amount by which the inequality is violated (beyond the tolerance).
    pub gap: f64,
    /// Offending coordinate, when the check is coordinate-wise.
    pub coordinate: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub holds: bool,
    pub witness: Option<Witness>,
    /// Samples evaluated before stopping.
    pub samples: usize,
    pub hessian_checked: bool,
}

impl CheckReport {
    fn passed(samples: usize, hessian_checked: bool) -> Self {
        Self {
            holds: true,
            witness: None,
            samples,
            hessian_checked,
        }
    }

    fn failed(witness: Witness, samples: usize, hessian_checked: bool) -> Self {
        Self {
            holds: false,
            witness: Some(witness),
            samples,
            hessian_checked,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrongDrReport {
    /// Entrywise Hessian criterion; `None` when the family has no Hessian.
    pub hessian: Option<CheckReport>,
    /// Inequality along sampled non-negative and non-positive directions.
    pub definitional: CheckReport,
}

impl StrongDrReport {
    pub fn holds(&self) -> bool {
        self.definitional.holds && self.hessian.as_ref().is_none_or(|h| h.holds)
    }
}

/// Even samples move along a single coordinate (cycling through them), odd
/// samples are general ordered pairs.
fn sample_pair(domain: &PolytopeDomain, rng: &mut ChaCha8Rng, s: usize) -> (Vec<f64>, Vec<f64>) {
    if s.is_multiple_of(2) {
        domain.sample_coordinate_pair(rng, (s / 2) % domain.dim())
    } else {
        domain.sample_ordered_pair(rng)
    }
}

fn setup<F: Objective + ?Sized>(
    f: &F,
    domain: &PolytopeDomain,
    sampling: &Sampling,
) -> Result<ChaCha8Rng> {
    sampling.validate()?;
    check_dim(domain.dim(), f.dim())?;
    Ok(ChaCha8Rng::seed_from_u64(sampling.seed))
}

/// Largest entry of `v` with its index.
fn worst(v: impl Iterator<Item = f64>) -> (usize, f64) {
    v.enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, e)| if e > best.1 { (i, e) } else { best })
}

/// Entrywise Hessian test at `x`: `H_ii <= -diag_bound`, `H_ij <= 0`.
/// Returns `None` without a Hessian, `Some(None)` when it passes.
fn hessian_violation<F: Objective + ?Sized>(
    f: &F,
    x: &[f64],
    diag_bound: f64,
    tol: f64,
) -> Result<Option<Option<Witness>>> {
    let Some(h) = f.hessian(x)? else {
        return Ok(None);
    };
    let n = x.len();
    for i in 0..n {
        for j in 0..n {
            let limit = if i == j { -diag_bound } else { 0.0 };
            let excess = h[(i, j)] - limit;
            if excess > tol {
                return Ok(Some(Some(Witness {
                    x: x.to_vec(),
                    y: x.to_vec(),
                    gap: excess,
                    coordinate: Some(i),
                })));
            }
        }
    }
    Ok(Some(None))
}

/// Order reversal of the gradient on sampled pairs `x <= y`, plus entrywise
/// non-positivity of the Hessian at `x` when the family provides one.
pub fn check_dr_submodular<F: Objective + ?Sized>(
    f: &F,
    domain: &PolytopeDomain,
    sampling: &Sampling,
) -> Result<CheckReport> {
    let mut rng = setup(f, domain, sampling)?;
    let mut hessian_checked = false;
    for s in 0..sampling.samples {
        let (x, y) = sample_pair(domain, &mut rng, s);
        let gx = f.gradient(&x)?;
        let gy = f.gradient(&y)?;
        let (i, excess) = worst(gy.iter().zip(&gx).map(|(a, b)| a - b));
        if excess > sampling.tol {
            let w = Witness {
                x,
                y,
                gap: excess,
                coordinate: Some(i),
            };
            return Ok(CheckReport::failed(w, s + 1, hessian_checked));
        }
        if let Some(found) = hessian_violation(f, &x, 0.0, sampling.tol)? {
            hessian_checked = true;
            if let Some(w) = found {
                return Ok(CheckReport::failed(w, s + 1, true));
            }
        }
    }
    Ok(CheckReport::passed(sampling.samples, hessian_checked))
}

/// Both criteria for `mu`-strong DR-submodularity: the Hessian bound
/// `H_ii <= -mu`, `H_ij <= 0`, and the defining inequality
/// `f(x + v) <= f(x) + <grad f(x), v> - mu/2 ||v||^2` for `v >= 0` and `v <= 0`.
pub fn check_strong_dr<F: Objective + ?Sized>(
    f: &F,
    domain: &PolytopeDomain,
    mu: f64,
    norm: Norm,
    sampling: &Sampling,
) -> Result<StrongDrReport> {
    if !(mu.is_finite() && mu >= 0.0) {
        return Err(Error::InvalidParameter(format!("mu must be non-negative, got {mu}")));
    }
    let mut rng = setup(f, domain, sampling)?;

    let mut hessian = Some(CheckReport::passed(sampling.samples, true));
    for s in 0..sampling.samples {
        let x = domain.sample_point(&mut rng);
        match hessian_violation(f, &x, mu, sampling.tol)? {
            None => {
                hessian = None;
                break;
            }
            Some(Some(w)) => {
                hessian = Some(CheckReport::failed(w, s + 1, true));
                break;
            }
            Some(None) => {}
        }
    }

    let mut definitional = CheckReport::passed(sampling.samples, false);
    'outer: for s in 0..sampling.samples {
        let (lo, hi) = sample_pair(domain, &mut rng, s);
        let coordinate = (s % 2 == 0).then(|| (s / 2) % domain.dim());
        // v = hi - lo from lo, then v = lo - hi from hi.
        for (x, y) in [(&lo, &hi), (&hi, &lo)] {
            let v = sub(y, x);
            let n = norm.of(&v);
            let gap = f.value(y)? - f.value(x)? - dot(&f.gradient(x)?, &v) + 0.5 * mu * n * n;
            if gap > sampling.tol {
                let w = Witness {
                    x: x.clone(),
                    y: y.clone(),
                    gap,
                    coordinate,
                };
                definitional = CheckReport::failed(w, s + 1, false);
                break 'outer;
            }
        }
    }

    Ok(StrongDrReport {
        hessian,
        definitional,
    })
}

/// `f(y) - f(x) >= <grad f(x), y - x> - L/2 ||y - x||^2` on sampled `x <= y`.
pub fn check_smoothness<F: Objective + ?Sized>(
    f: &F,
    domain: &PolytopeDomain,
    l: f64,
    norm: Norm,
    sampling: &Sampling,
) -> Result<CheckReport> {
    if !(l.is_finite() && l >= 0.0) {
        return Err(Error::InvalidParameter(format!("L must be non-negative, got {l}")));
    }
    let mut rng = setup(f, domain, sampling)?;
    for s in 0..sampling.samples {
        let (x, y) = sample_pair(domain, &mut rng, s);
        let v = sub(&y, &x);
        let n = norm.of(&v);
        let gap = dot(&f.gradient(&x)?, &v) - 0.5 * l * n * n - (f.value(&y)? - f.value(&x)?);
        if gap > sampling.tol {
            let coordinate = (s % 2 == 0).then(|| (s / 2) % domain.dim());
            let w = Witness {
                x,
                y,
                gap,
                coordinate,
            };
            return Ok(CheckReport::failed(w, s + 1, false));
        }
    }
    Ok(CheckReport::passed(sampling.samples, false))
}

/// Non-negative gradient at sampled feasible points.
pub fn check_monotone<F: Objective + ?Sized>(
    f: &F,
    domain: &PolytopeDomain,
    sampling: &Sampling,
) -> Result<CheckReport> {
    let mut rng = setup(f, domain, sampling)?;
    for s in 0..sampling.samples {
        let x = domain.sample_point(&mut rng);
        let g = f.gradient(&x)?;
        let (i, excess) = worst(g.iter().map(|v| -v));
        if excess > sampling.tol {
            let w = Witness {
                y: x.clone(),
                x,
                gap: excess,
                coordinate: Some(i),
            };
            return Ok(CheckReport::failed(w, s + 1, false));
        }
    }
    Ok(CheckReport::passed(sampling.samples, false))
}
