//! The feasible set `{x : Cx <= b, lower <= x <= upper}` and its two oracles.

mod projection;
mod simplex;
mod vertices;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot, Matrix};

pub use projection::{DEFAULT_PROJECTION_MAX_ITER, DEFAULT_PROJECTION_TOL};

/// Default objective slack of the linear maximization oracle.
pub const DEFAULT_LMO_TOL: f64 = 1e-9;

/// A point of the ambient space. Feasibility is checked by the domain, never
/// by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(pub Vec<f64>);

impl Point {
    pub fn zeros(n: usize) -> Self {
        Point(vec![0.0; n])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl std::ops::Deref for Point {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl std::ops::DerefMut for Point {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    L1,
    L2,
}

impl Norm {
    pub fn of(self, v: &[f64]) -> f64 {
        match self {
            Norm::L1 => crate::linalg::norm1(v),
            Norm::L2 => crate::linalg::norm2(v),
        }
    }

    /// Norm of a gradient in the dual pairing.
    pub fn dual_of(self, v: &[f64]) -> f64 {
        match self {
            Norm::L1 => crate::linalg::norm_inf(v),
            Norm::L2 => crate::linalg::norm2(v),
        }
    }
}

/// On-disk form of a polytope: keys `dim`, `C`, `b`, `lower`, `upper`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolytopeSpec {
    pub dim: usize,
    #[serde(rename = "C", default)]
    pub c: Vec<Vec<f64>>,
    #[serde(default)]
    pub b: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<Vec<f64>>,
}

/// Compact convex polytope containing the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolytopeSpec", into = "PolytopeSpec")]
pub struct PolytopeDomain {
    dim: usize,
    ineq: Matrix,
    rhs: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    diameter_l1: f64,
    diameter_l2: f64,
    diameter_exact: bool,
}

impl PolytopeDomain {
    pub fn new(ineq: Matrix, rhs: Vec<f64>, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let dim = lower.len();
        if dim == 0 {
            return Err(Error::InvalidDomain("dimension must be positive".into()));
        }
        check_dim(dim, upper.len())?;
        if ineq.rows() > 0 {
            check_dim(dim, ineq.cols())?;
        }
        if ineq.rows() != rhs.len() {
            return Err(Error::LengthMismatch {
                left: ineq.rows(),
                right: rhs.len(),
            });
        }
        let ineq = if ineq.rows() == 0 {
            Matrix::zeros(0, dim)
        } else {
            ineq
        };
        let all_finite = ineq.as_slice().iter().chain(&rhs).chain(&lower).chain(&upper);
        if all_finite.into_iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidDomain("entries must be finite".into()));
        }
        for i in 0..dim {
            if lower[i] > upper[i] {
                return Err(Error::InvalidDomain(format!(
                    "lower[{i}] = {} exceeds upper[{i}] = {}",
                    lower[i], upper[i]
                )));
            }
            if lower[i] > 0.0 || upper[i] < 0.0 {
                return Err(Error::InvalidDomain(format!(
                    "origin violates the bounds of coordinate {i}"
                )));
            }
        }
        if let Some(r) = rhs.iter().position(|b| *b < 0.0) {
            return Err(Error::InvalidDomain(format!(
                "origin violates inequality row {r} (b = {})",
                rhs[r]
            )));
        }
        let mut domain = Self {
            dim,
            ineq,
            rhs,
            lower,
            upper,
            diameter_l1: 0.0,
            diameter_l2: 0.0,
            diameter_exact: false,
        };
        domain.cache_diameters();
        Ok(domain)
    }

    /// `[0, 1]^n`
    pub fn unit_box(n: usize) -> Result<Self> {
        Self::new(Matrix::zeros(0, n), vec![], vec![0.0; n], vec![1.0; n])
    }

    /// `{x : Cx <= b, 0 <= x <= 1}`
    pub fn with_constraints(ineq: Matrix, rhs: Vec<f64>) -> Result<Self> {
        let n = ineq.cols();
        Self::new(ineq, rhs, vec![0.0; n], vec![1.0; n])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ineq_matrix(&self) -> &Matrix {
        &self.ineq
    }

    pub fn ineq_rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn num_constraints(&self) -> usize {
        self.rhs.len()
    }

    pub fn is_box(&self) -> bool {
        self.rhs.is_empty()
    }

    /// True when every inequality coefficient is non-negative, so the set is
    /// closed under moving any coordinate down toward `lower`.
    pub fn is_down_closed(&self) -> bool {
        self.ineq.as_slice().iter().all(|c| *c >= 0.0)
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> Result<bool> {
        check_dim(self.dim, x.len())?;
        if tol < 0.0 {
            return Err(Error::InvalidParameter("tolerance must be non-negative".into()));
        }
        Ok(self.contains_unchecked(x, tol))
    }

    pub(crate) fn contains_unchecked(&self, x: &[f64], tol: f64) -> bool {
        let in_box = x
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(xi, (l, u))| *xi >= l - tol && *xi <= u + tol);
        in_box
            && self
                .ineq
                .iter_rows()
                .zip(&self.rhs)
                .all(|(row, b)| dot(row, x) <= b + tol)
    }

    /// Returns a maximizer of `<x, direction>` over the domain. Among optimal
    /// points the lexicographically smallest one is returned.
    pub fn linear_maximize(&self, direction: &[f64]) -> Result<Point> {
        self.linear_maximize_with_tol(direction, DEFAULT_LMO_TOL)
    }

    pub fn linear_maximize_with_tol(&self, direction: &[f64], tol: f64) -> Result<Point> {
        check_dim(self.dim, direction.len())?;
        if direction.iter().any(|d| !d.is_finite()) {
            return Err(Error::InvalidParameter("direction must be finite".into()));
        }
        simplex::lex_max_linear(self, direction, tol).map(Point)
    }

    /// Euclidean projection with the default tolerance and sweep budget.
    pub fn project(&self, y: &[f64]) -> Result<Point> {
        self.project_with(y, DEFAULT_PROJECTION_TOL, DEFAULT_PROJECTION_MAX_ITER)
    }

    pub fn project_with(&self, y: &[f64], tol: f64, max_iter: usize) -> Result<Point> {
        check_dim(self.dim, y.len())?;
        projection::dykstra(self, y, tol, max_iter).map(Point)
    }

    /// Diameter with respect to `norm`. Exact (vertex enumeration) for small
    /// polytopes, otherwise the box bound `||upper - lower||`.
    pub fn diameter(&self, norm: Norm) -> f64 {
        match norm {
            Norm::L1 => self.diameter_l1,
            Norm::L2 => self.diameter_l2,
        }
    }

    /// Whether [`Self::diameter`] came from vertex enumeration.
    pub fn diameter_is_exact(&self) -> bool {
        self.diameter_exact
    }

    /// Vertices of the polytope, or `None` when there are too many candidate
    /// bases to enumerate.
    pub fn vertices(&self) -> Option<Vec<Vec<f64>>> {
        vertices::enumerate(self)
    }

    fn cache_diameters(&mut self) {
        let span: Vec<f64> = self.upper.iter().zip(&self.lower).map(|(u, l)| u - l).collect();
        let box_l1 = crate::linalg::norm1(&span);
        let box_l2 = crate::linalg::norm2(&span);
        match vertices::enumerate(self).filter(|v| v.len() <= vertices::MAX_VERTICES) {
            Some(verts) => {
                let (mut d1, mut d2) = (0.0f64, 0.0f64);
                for (i, a) in verts.iter().enumerate() {
                    for b in &verts[i + 1..] {
                        let diff = crate::linalg::sub(a, b);
                        d1 = d1.max(crate::linalg::norm1(&diff));
                        d2 = d2.max(crate::linalg::norm2(&diff));
                    }
                }
                self.diameter_l1 = d1;
                self.diameter_l2 = d2;
                self.diameter_exact = true;
            }
            None => {
                self.diameter_l1 = box_l1;
                self.diameter_l2 = box_l2;
                self.diameter_exact = false;
            }
        }
    }

    /// Largest `||x||` over the domain's bounding box.
    pub fn max_norm_bound(&self, norm: Norm) -> f64 {
        let corner: Vec<f64> = self
            .lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| l.abs().max(u.abs()))
            .collect();
        norm.of(&corner)
    }

    /// Largest `t >= 0` with `x + t e_i` feasible (assuming `x` feasible).
    pub fn max_step_along(&self, x: &[f64], i: usize) -> f64 {
        let mut step = self.upper[i] - x[i];
        for (row, b) in self.ineq.iter_rows().zip(&self.rhs) {
            if row[i] > 0.0 {
                step = step.min((b - dot(row, x)) / row[i]);
            }
        }
        step.max(0.0)
    }

    /// Draws a feasible point: rejection sampling from the bounding box with a
    /// fallback that shrinks a box sample toward the origin.
    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        for attempt in 0..64 {
            for i in 0..self.dim {
                y[i] = if self.upper[i] > self.lower[i] {
                    rng.gen_range(self.lower[i]..=self.upper[i])
                } else {
                    self.lower[i]
                };
            }
            if self.contains_unchecked(&y, 0.0) {
                return y;
            }
            if attempt == 63 {
                break;
            }
        }
        // The origin is feasible, so [0, y] meets the domain in a segment [0, s*].
        let mut s = 1.0;
        for (row, b) in self.ineq.iter_rows().zip(&self.rhs) {
            let ry = dot(row, &y);
            if ry > *b {
                s = f64::min(s, b / ry);
            }
        }
        let s = s * rng.gen_range(0.0..=1.0);
        y.iter().map(|v| v * s).collect()
    }

    /// Draws a feasible ordered pair `x <= y`.
    pub fn sample_ordered_pair<R: Rng + ?Sized>(&self, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
        let y = self.sample_point(rng);
        for _ in 0..64 {
            let x: Vec<f64> = y
                .iter()
                .zip(&self.lower)
                .map(|(yi, l)| yi - rng.gen_range(0.0..=1.0) * (yi - l))
                .collect();
            if self.contains_unchecked(&x, 0.0) {
                return (x, y);
            }
        }
        (y.clone(), y)
    }

    /// Draws a feasible pair `x <= y` that differs only in coordinate `i`.
    pub fn sample_coordinate_pair<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        i: usize,
    ) -> (Vec<f64>, Vec<f64>) {
        let x = self.sample_point(rng);
        let step = self.max_step_along(&x, i) * rng.gen_range(0.05..=1.0);
        let mut y = x.clone();
        y[i] += step;
        (x, y)
    }
}

/// Largest `dim` accepted from a spec. Bounds are materialized per
/// coordinate, so a huge value would otherwise abort on allocation.
pub const MAX_SPEC_DIM: usize = 1 << 20;

impl TryFrom<PolytopeSpec> for PolytopeDomain {
    type Error = Error;
    fn try_from(spec: PolytopeSpec) -> Result<Self> {
        let n = spec.dim;
        if n > MAX_SPEC_DIM {
            return Err(Error::InvalidDomain(format!(
                "dimension {n} exceeds the limit of {MAX_SPEC_DIM}"
            )));
        }
        let ineq = if spec.c.is_empty() {
            Matrix::zeros(0, n)
        } else {
            Matrix::from_rows(spec.c)?
        };
        let lower = spec.lower.unwrap_or_else(|| vec![0.0; n]);
        let upper = spec.upper.unwrap_or_else(|| vec![1.0; n]);
        check_dim(n, lower.len())?;
        Self::new(ineq, spec.b, lower, upper)
    }
}

impl From<PolytopeDomain> for PolytopeSpec {
    fn from(d: PolytopeDomain) -> Self {
        PolytopeSpec {
            dim: d.dim,
            c: d.ineq.to_rows(),
            b: d.rhs,
            lower: Some(d.lower),
            upper: Some(d.upper),
        }
    }
}
