//! Dense two-phase tableau simplex with Bland's rule. Problems are tiny (a
//! handful of rows), so nothing here is sparse or factorized.

use super::PolytopeDomain;
use crate::error::{Error, Result};
use crate::linalg::dot;

const PIVOT_EPS: f64 = 1e-11;
const COST_EPS: f64 = 1e-11;

#[derive(Debug, Clone)]
pub(crate) struct LpSolution {
    pub x: Vec<f64>,
    #[cfg_attr(not(test), allow(dead_code))]
    pub value: f64,
    /// No non-basic column has a zero reduced cost, so the optimum is the
    /// only optimal point.
    pub unique: bool,
    /// Columns forced to zero at every optimum (non-basic with strictly
    /// negative reduced cost): `j < n` is `y_j`, `n + i` is the slack of row `i`.
    pub fixed: Vec<usize>,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    ncols: usize,
    excluded: Vec<bool>,
    pivots: usize,
    pivot_cap: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.rows[i][self.ncols]
    }

    fn pivot(&mut self, r: usize, e: usize) {
        let p = self.rows[r][e];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[e];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                row[e] = 0.0;
            }
        }
        self.basis[r] = e;
        self.pivots += 1;
    }

    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut z = cost.to_vec();
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            let cb = cost[b];
            if cb != 0.0 {
                for (zj, v) in z.iter_mut().zip(row) {
                    *zj -= cb * v;
                }
            }
        }
        z
    }

    /// Maximizes `cost . columns` from the current basic feasible solution.
    /// Returns the final reduced costs.
    fn optimize(&mut self, cost: &[f64]) -> Result<Vec<f64>> {
        loop {
            let z = self.reduced_costs(cost);
            let entering = (0..self.ncols).find(|&j| !self.excluded[j] && z[j] > COST_EPS);
            let Some(e) = entering else {
                return Ok(z);
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][e];
                if a > PIVOT_EPS {
                    let ratio = self.rhs(i) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            let tie = (ratio - lr).abs() <= 1e-12 * (1.0 + lr.abs());
                            if ratio < lr && !tie || tie && self.basis[i] < self.basis[li] {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else {
                return Err(Error::Unbounded);
            };
            if self.pivots >= self.pivot_cap {
                return Err(Error::PivotLimit(self.pivot_cap));
            }
            self.pivot(r, e);
        }
    }
}

/// Solves `max c.y s.t. A y <= b, y >= 0` (rows of `b` may be negative).
pub(crate) fn maximize(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<LpSolution> {
    maximize_with_ties(c, a, b, COST_EPS)
}

/// As [`maximize`]; reduced costs within `tie` of zero count as ties when
/// deciding uniqueness and which columns the optimum forces to zero.
fn maximize_with_ties(c: &[f64], a: &[Vec<f64>], b: &[f64], tie: f64) -> Result<LpSolution> {
    let n = c.len();
    let m = b.len();
    let n_art = b.iter().filter(|v| **v < 0.0).count();
    let ncols = n + m + n_art;
    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut next_art = n + m;
    for i in 0..m {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        let mut row = vec![0.0; ncols + 1];
        for j in 0..n {
            row[j] = sign * a[i][j];
        }
        row[n + i] = sign;
        row[ncols] = sign * b[i];
        if sign < 0.0 {
            row[next_art] = 1.0;
            basis.push(next_art);
            next_art += 1;
        } else {
            basis.push(n + i);
        }
        rows.push(row);
    }
    let mut tab = Tableau {
        rows,
        basis,
        ncols,
        excluded: vec![false; ncols],
        pivots: 0,
        pivot_cap: 200 * (m + n + 1) + 1000,
    };

    if n_art > 0 {
        let mut phase1 = vec![0.0; ncols];
        for v in phase1.iter_mut().skip(n + m) {
            *v = -1.0;
        }
        tab.optimize(&phase1)?;
        let infeas: f64 = tab
            .basis
            .iter()
            .enumerate()
            .filter(|(_, &bv)| bv >= n + m)
            .map(|(i, _)| tab.rhs(i))
            .sum();
        let scale = 1.0 + b.iter().map(|v| v.abs()).sum::<f64>();
        if infeas > 1e-9 * scale {
            return Err(Error::Infeasible);
        }
        // Drive remaining (zero-valued) artificials out of the basis.
        let mut i = 0;
        while i < tab.rows.len() {
            if tab.basis[i] >= n + m {
                match (0..n + m).find(|&j| tab.rows[i][j].abs() > PIVOT_EPS) {
                    Some(j) => tab.pivot(i, j),
                    None => {
                        tab.rows.remove(i);
                        tab.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
        for j in n + m..ncols {
            tab.excluded[j] = true;
        }
    }

    let mut cost = vec![0.0; ncols];
    cost[..n].copy_from_slice(c);
    let z = tab.optimize(&cost)?;
    let mut x = vec![0.0; n];
    for (i, &bv) in tab.basis.iter().enumerate() {
        if bv < n {
            x[bv] = tab.rhs(i).max(0.0);
        }
    }
    let is_basic = {
        let mut v = vec![false; ncols];
        for &bv in &tab.basis {
            v[bv] = true;
        }
        v
    };
    let unique = (0..ncols)
        .filter(|&j| !tab.excluded[j] && !is_basic[j])
        .all(|j| z[j] < -tie);
    let fixed = (0..n + m)
        .filter(|&j| !tab.excluded[j] && !is_basic[j] && z[j] < -tie)
        .collect();
    Ok(LpSolution {
        value: dot(c, &x),
        x,
        unique,
        fixed,
    })
}

/// Linear maximization over the domain with lexicographic-minimum
/// tie-breaking among optimal points.
pub(crate) fn lex_max_linear(domain: &PolytopeDomain, d: &[f64], tol: f64) -> Result<Vec<f64>> {
    let n = domain.dim();
    let lower = domain.lower();
    let upper = domain.upper();
    // Objective differences below `tie` are treated as exact ties.
    let tie = tol.max(COST_EPS) * d.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    if domain.is_box() {
        return Ok((0..n)
            .map(|i| if d[i] > tie { upper[i] } else { lower[i] })
            .collect());
    }

    // Shift to y = x - lower >= 0. Rows: C y <= b - C lower, y <= upper - lower.
    let mut a: Vec<Vec<f64>> = Vec::with_capacity(domain.num_constraints() + n + 1);
    let mut b: Vec<f64> = Vec::with_capacity(a.capacity());
    for (row, rhs) in domain.ineq_matrix().iter_rows().zip(domain.ineq_rhs()) {
        a.push(row.to_vec());
        b.push(rhs - dot(row, lower));
    }
    for i in 0..n {
        let mut row = vec![0.0; n];
        row[i] = 1.0;
        a.push(row);
        b.push(upper[i] - lower[i]);
    }
    let best = maximize_with_ties(d, &a, &b, tie)?;
    let to_x = |y: &[f64]| -> Vec<f64> { y.iter().zip(lower).map(|(yi, l)| yi + l).collect() };
    if best.unique {
        return Ok(to_x(&best.x));
    }

    // Restrict to the optimal face (columns the reduced costs force to zero
    // become equalities) and minimize each coordinate in turn on it.
    let mut sol = best;
    for i in 0..n {
        if sol.unique {
            break;
        }
        restrict_to_face(&mut a, &mut b, &sol.fixed, n);
        let mut c = vec![0.0; n];
        c[i] = -1.0;
        sol = maximize(&c, &a, &b)?;
    }
    Ok(to_x(&sol.x))
}

fn restrict_to_face(a: &mut Vec<Vec<f64>>, b: &mut Vec<f64>, fixed: &[usize], n: usize) {
    let m = a.len();
    for &j in fixed {
        if j < n {
            let mut row = vec![0.0; n];
            row[j] = 1.0;
            a.push(row);
            b.push(0.0);
        } else if j - n < m {
            let i = j - n;
            a.push(a[i].iter().map(|v| -v).collect());
            b.push(-b[i]);
        }
    }
}
