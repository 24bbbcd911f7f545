//! Euclidean projection by Dykstra's alternating projections over the box and
//! each inequality half-space.

use super::PolytopeDomain;
use crate::error::{Error, Result};
use crate::linalg::dot;

pub const DEFAULT_PROJECTION_TOL: f64 = 1e-9;
pub const DEFAULT_PROJECTION_MAX_ITER: usize = 10_000;

pub(crate) fn dykstra(
    domain: &PolytopeDomain,
    y: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>> {
    let lower = domain.lower();
    let upper = domain.upper();
    let clamp = |x: &mut [f64]| {
        for ((xi, l), u) in x.iter_mut().zip(lower).zip(upper) {
            *xi = xi.clamp(*l, *u);
        }
    };
    let mut x = y.to_vec();
    if domain.is_box() {
        clamp(&mut x);
        return Ok(x);
    }
    if domain.contains_unchecked(y, 0.0) {
        return Ok(x);
    }

    let rows: Vec<(&[f64], f64, f64)> = domain
        .ineq_matrix()
        .iter_rows()
        .zip(domain.ineq_rhs())
        .map(|(r, b)| (r, *b, dot(r, r)))
        .filter(|(_, _, nn)| *nn > 0.0)
        .collect();
    let n = x.len();
    // One correction vector per set; index 0 is the box.
    let mut corrections = vec![vec![0.0; n]; rows.len() + 1];
    let mut z = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        let x_start = x.clone();
        let mut change = 0.0;
        for (k, p) in corrections.iter_mut().enumerate() {
            for i in 0..n {
                z[i] = x[i] + p[i];
            }
            if k == 0 {
                x.copy_from_slice(&z);
                clamp(&mut x);
            } else {
                let (row, b, nn) = rows[k - 1];
                let excess = dot(row, &z) - b;
                x.copy_from_slice(&z);
                if excess > 0.0 {
                    let s = excess / nn;
                    for i in 0..n {
                        x[i] -= s * row[i];
                    }
                }
            }
            for i in 0..n {
                let np = z[i] - x[i];
                change += (np - p[i]) * (np - p[i]);
                p[i] = np;
            }
        }
        let moved = crate::linalg::dist2(&x, &x_start);
        residual = moved.max(change.sqrt());
        if residual <= tol {
            return Ok(x);
        }
    }
    Err(Error::ProjectionNotConverged {
        iterations: max_iter,
        residual,
        last: x,
    })
}
