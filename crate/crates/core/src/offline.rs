//! Offline comparators: the (1 - 1/e) Frank-Wolfe scheme started at the
//! origin, and a brute-force grid search for small dimensions.

use serde::{Deserialize, Serialize};

use crate::domain::{Point, PolytopeDomain};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{axpy, norm2};
use crate::objectives::Objective;

/// Largest dimension accepted by [`grid_maximize`].
pub const MAX_GRID_DIM: usize = 4;
const MAX_GRID_POINTS: usize = 50_000_000;

pub const DEFAULT_COMPARATOR_FW_STEPS: usize = 2000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Certificate {
    Fw,
    /// `slack` bounds how far the true maximum can sit above `value` for a
    /// monotone DR-submodular `f` on a down-closed domain.
    Grid { step: f64, slack: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OfflineResult {
    pub x: Point,
    pub value: f64,
    pub k_used: usize,
    pub certificate: Certificate,
}

/// Iterates `x^(1) = 0, ..., x^(K+1)` and the LMO outputs `v_1, ..., v_K`.
#[derive(Debug, Clone, PartialEq)]
pub struct FwPath {
    pub iterates: Vec<Vec<f64>>,
    pub directions: Vec<Vec<f64>>,
}

pub fn offline_fw_path<F: Objective + ?Sized>(
    f: &F,
    domain: &PolytopeDomain,
    k: usize,
) -> Result<FwPath> {
    if k == 0 {
        return Err(Error::InvalidParameter("K must be at least 1".into()));
    }
    check_dim(domain.dim(), f.dim())?;
    let step = 1.0 / k as f64;
    let mut x = vec![0.0; domain.dim()];
    let mut iterates = Vec::with_capacity(k + 1);
    let mut directions = Vec::with_capacity(k);
    iterates.push(x.clone());
    for _ in 0..k {
        let v = domain.linear_maximize(&f.gradient(&x)?)?.into_inner();
        axpy(&mut x, step, &v);
        iterates.push(x.clone());
        directions.push(v);
    }
    Ok(FwPath {
        iterates,
        directions,
    })
}

pub fn offline_fw<F: Objective + ?Sized>(
    f: &F,
    domain: &PolytopeDomain,
    k: usize,
) -> Result<OfflineResult> {
    let mut path = offline_fw_path(f, domain, k)?;
    let x = path.iterates.pop().expect("path holds K + 1 iterates");
    Ok(OfflineResult {
        value: f.value(&x)?,
        x: Point(x),
        k_used: k,
        certificate: Certificate::Fw,
    })
}

fn axis(lower: f64, upper: f64, step: f64) -> Vec<f64> {
    let count = ((upper - lower) / step + 1e-9).floor() as usize;
    let mut pts: Vec<f64> = (0..=count).map(|i| lower + i as f64 * step).collect();
    if let Some(&last) = pts.last() {
        if upper - last > 1e-12 {
            pts.push(upper);
        } else {
            *pts.last_mut().unwrap() = last.min(upper);
        }
    }
    pts
}

/// Evaluates `f` on the feasible points of a regular grid over the bounding
/// box, scanning in lexicographic order and keeping the first maximizer.
pub fn grid_maximize<F: Objective + ?Sized>(
    f: &F,
    domain: &PolytopeDomain,
    step: f64,
) -> Result<OfflineResult> {
    let n = domain.dim();
    check_dim(n, f.dim())?;
    if n > MAX_GRID_DIM {
        return Err(Error::GridTooLarge(n));
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::InvalidParameter(format!("grid step must be positive, got {step}")));
    }
    let axes: Vec<Vec<f64>> = domain
        .lower()
        .iter()
        .zip(domain.upper())
        .map(|(&l, &u)| axis(l, u, step))
        .collect();
    let total = axes
        .iter()
        .try_fold(1usize, |acc, a| acc.checked_mul(a.len()))
        .filter(|&t| t <= MAX_GRID_POINTS);
    if total.is_none() {
        return Err(Error::InvalidParameter(format!(
            "grid step {step} yields more than {MAX_GRID_POINTS} points"
        )));
    }

    let mut idx = vec![0usize; n];
    let mut x = vec![0.0; n];
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut max_grad = 0.0f64;
    loop {
        for i in 0..n {
            x[i] = axes[i][idx[i]];
        }
        if domain.contains_unchecked(&x, 0.0) {
            let v = f.value(&x)?;
            max_grad = max_grad.max(norm2(&f.gradient(&x)?));
            if best.as_ref().is_none_or(|(b, _)| v > *b) {
                best = Some((v, x.clone()));
            }
        }
        // Odometer increment, last coordinate fastest.
        let mut i = n;
        loop {
            if i == 0 {
                let Some((value, x)) = best else {
                    return Err(Error::EmptyGrid);
                };
                let slack = max_grad * step * (n as f64).sqrt();
                return Ok(OfflineResult {
                    x: Point(x),
                    value,
                    k_used: 0,
                    certificate: Certificate::Grid { step, slack },
                });
            }
            i -= 1;
            idx[i] += 1;
            if idx[i] < axes[i].len() {
                break;
            }
            idx[i] = 0;
        }
    }
}

/// Grid spacing used by the comparator when none is given.
pub fn default_grid_step(n: usize) -> f64 {
    match n {
        1 => 1e-3,
        2 => 5e-3,
        3 => 2e-2,
        _ => 5e-2,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComparatorSpec {
    #[serde(default = "default_fw_steps")]
    pub fw_k: usize,
    /// `None` picks [`default_grid_step`]; the grid only runs for small `n`.
    #[serde(default)]
    pub grid_step: Option<f64>,
    #[serde(default = "default_true")]
    pub use_grid: bool,
}

fn default_fw_steps() -> usize {
    DEFAULT_COMPARATOR_FW_STEPS
}

fn default_true() -> bool {
    true
}

impl Default for ComparatorSpec {
    fn default() -> Self {
        Self {
            fw_k: DEFAULT_COMPARATOR_FW_STEPS,
            grid_step: None,
            use_grid: true,
        }
    }
}

/// The better of offline FW and (when `n <= 4`) the grid oracle.
pub fn comparator<F: Objective + ?Sized>(
    f: &F,
    domain: &PolytopeDomain,
    spec: &ComparatorSpec,
) -> Result<OfflineResult> {
    let fw = offline_fw(f, domain, spec.fw_k)?;
    if !spec.use_grid || domain.dim() > MAX_GRID_DIM {
        return Ok(fw);
    }
    let step = spec.grid_step.unwrap_or_else(|| default_grid_step(domain.dim()));
    let grid = grid_maximize(f, domain, step)?;
    Ok(if grid.value > fw.value { grid } else { fw })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::objectives::QuadraticUtility;

    fn concave_1d() -> QuadraticUtility {
        QuadraticUtility::new(Matrix::from_diag(&[-1.0]), vec![1.0], 0.0).unwrap()
    }

    #[test]
    fn fw_iterates_by_hand() {
        let d = PolytopeDomain::unit_box(1).unwrap();
        let path = offline_fw_path(&concave_1d(), &d, 4).unwrap();
        let xs: Vec<f64> = path.iterates.iter().map(|x| x[0]).collect();
        assert_eq!(xs, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let r = offline_fw(&concave_1d(), &d, 4).unwrap();
        assert_eq!(r.value, 0.5);
        assert_eq!(r.k_used, 4);
    }

    #[test]
    fn single_step_is_the_lmo() {
        let d = PolytopeDomain::with_constraints(
            Matrix::from_rows(vec![vec![1.0, 1.0]]).unwrap(),
            vec![1.0],
        )
        .unwrap();
        let f = QuadraticUtility::new(Matrix::zeros(2, 2), vec![2.0, 1.0], 0.0).unwrap();
        let r = offline_fw(&f, &d, 1).unwrap();
        assert_eq!(r.x.0, vec![1.0, 0.0]);
        let r = offline_fw(&f, &d, 7).unwrap();
        assert!((r.x[0] - 1.0).abs() < 1e-12 && r.x[1].abs() < 1e-12);
    }

    #[test]
    fn grid_examples() {
        let d = PolytopeDomain::unit_box(1).unwrap();
        let r = grid_maximize(&concave_1d(), &d, 0.01).unwrap();
        assert!((r.value - 0.5).abs() < 5e-3);
        assert!(r.x[0] >= 0.99);
        let lin = QuadraticUtility::new(Matrix::zeros(2, 2), vec![1.0, 1.0], 0.0).unwrap();
        let r = grid_maximize(&lin, &PolytopeDomain::unit_box(2).unwrap(), 0.3).unwrap();
        assert_eq!(r.x.0, vec![1.0, 1.0]);
        assert!(matches!(r.certificate, Certificate::Grid { .. }));
    }

    #[test]
    fn grid_refuses_large_dimensions() {
        let f = QuadraticUtility::zero(5);
        let d = PolytopeDomain::unit_box(5).unwrap();
        assert!(matches!(grid_maximize(&f, &d, 0.5), Err(Error::GridTooLarge(5))));
        assert!(grid_maximize(&concave_1d(), &PolytopeDomain::unit_box(1).unwrap(), 0.0).is_err());
    }

    #[test]
    fn comparator_takes_the_better_result() {
        let d = PolytopeDomain::unit_box(1).unwrap();
        let spec = ComparatorSpec {
            fw_k: 2,
            ..ComparatorSpec::default()
        };
        let r = comparator(&concave_1d(), &d, &spec).unwrap();
        assert_eq!(r.value, 0.5);
    }
}
