#![allow(dead_code)]

use drsub_core::linalg::Matrix;
use drsub_core::objectives::QuadraticUtility;
use drsub_core::PolytopeDomain;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `{C x <= b, 0 <= x <= 1}` with `C` entries in `[-0.5, 1]` and `b` in `[0.2, 2]`.
pub fn random_polytope(rng: &mut ChaCha8Rng, n: usize, m: usize) -> PolytopeDomain {
    let rows: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..n).map(|_| rng.gen_range(-0.5..1.0)).collect())
        .collect();
    let b: Vec<f64> = (0..m).map(|_| rng.gen_range(0.2..2.0)).collect();
    let c = if m == 0 {
        Matrix::zeros(0, n)
    } else {
        Matrix::from_rows(rows).unwrap()
    };
    PolytopeDomain::with_constraints(c, b).unwrap()
}

pub fn budget(n: usize, cap: f64) -> PolytopeDomain {
    PolytopeDomain::with_constraints(Matrix::from_rows(vec![vec![1.0; n]]).unwrap(), vec![cap]).unwrap()
}

/// All feasible points of the `step`-grid over the unit box.
pub fn feasible_grid(domain: &PolytopeDomain, step: f64) -> Vec<Vec<f64>> {
    let n = domain.dim();
    let per = (1.0 / step).round() as usize + 1;
    let mut out = Vec::new();
    let mut idx = vec![0usize; n];
    loop {
        let x: Vec<f64> = idx.iter().map(|&i| (i as f64 * step).min(1.0)).collect();
        if domain.contains(&x, 0.0).unwrap() {
            out.push(x);
        }
        let mut k = n;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < per {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// Symmetric `A` with off-diagonal entries in `[off_lo, 0]` and diagonal in
/// `[diag_lo, diag_hi]`, with monotone linear term `a = -A^T 1`.
pub fn monotone_quadratic(
    rng: &mut ChaCha8Rng,
    n: usize,
    off_lo: f64,
    diag_lo: f64,
    diag_hi: f64,
) -> QuadraticUtility {
    let mut a = Matrix::zeros(n, n);
    for i in 0..n {
        a[(i, i)] = if diag_hi > diag_lo { rng.gen_range(diag_lo..=diag_hi) } else { diag_lo };
        for j in i + 1..n {
            let v = rng.gen_range(off_lo..=0.0);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    QuadraticUtility::with_monotone_linear_term(a).unwrap()
}
