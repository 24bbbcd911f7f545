//! Brute-force vertex enumeration for small polytopes: every choice of `n`
//! tight constraints is solved and kept if feasible.

use super::PolytopeDomain;
use crate::linalg::{solve, Matrix};

/// Above this many candidate bases enumeration is skipped.
const MAX_CANDIDATE_BASES: u128 = 200_000;
/// Above this many vertices the box bound is used for the diameter.
pub(crate) const MAX_VERTICES: usize = 1024;

/// `C(n, k)`, saturating just above `MAX_CANDIDATE_BASES`.
fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1u128;
    for i in 0..k {
        // Partial products C(n, i+1) are nondecreasing for i < k <= n/2.
        acc = acc * (n - i) as u128 / (i as u128 + 1);
        if acc > MAX_CANDIDATE_BASES {
            return MAX_CANDIDATE_BASES + 1;
        }
    }
    acc
}

pub(crate) fn enumerate(domain: &PolytopeDomain) -> Option<Vec<Vec<f64>>> {
    let n = domain.dim();
    let total = domain.num_constraints() + 2 * n;
    if total < n || binomial(total, n) > MAX_CANDIDATE_BASES {
        return None;
    }
    // All constraints as g.x <= h.
    let mut g: Vec<Vec<f64>> = domain.ineq_matrix().to_rows();
    let mut h: Vec<f64> = domain.ineq_rhs().to_vec();
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        g.push(e.clone());
        h.push(domain.upper()[i]);
        e[i] = -1.0;
        g.push(e);
        h.push(-domain.lower()[i]);
    }

    let mut verts: Vec<Vec<f64>> = Vec::new();
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        let rows: Vec<Vec<f64>> = idx.iter().map(|&i| g[i].clone()).collect();
        let rhs: Vec<f64> = idx.iter().map(|&i| h[i]).collect();
        if let Some(x) = Matrix::from_rows(rows).ok().and_then(|a| solve(&a, &rhs)) {
            let feasible = g
                .iter()
                .zip(&h)
                .all(|(gi, hi)| crate::linalg::dot(gi, &x) <= hi + 1e-9);
            if feasible && !verts.iter().any(|v| crate::linalg::dist2(v, &x) < 1e-9) {
                verts.push(x);
            }
        }
        // Next combination in lexicographic order.
        let mut k = n;
        loop {
            if k == 0 {
                return Some(verts);
            }
            k -= 1;
            if idx[k] < total - n + k {
                idx[k] += 1;
                for j in k + 1..n {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}
