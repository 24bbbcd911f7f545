mod common;

use common::{monotone_quadratic, rng};
use drsub_core::linalg::{norm2, sub, Matrix};
use drsub_core::objectives::{
    check_monotone, check_smoothness, check_strong_dr, ConcaveNegDepUtility, Interaction,
    LogDiversityUtility, Sampling, ScalarConcave,
};
use drsub_core::{Norm, Objective, PolytopeDomain, Utility};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn central_difference(f: &dyn Objective, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let mut up = x.to_vec();
            let mut down = x.to_vec();
            up[i] += h;
            down[i] -= h;
            (f.value(&up).unwrap() - f.value(&down).unwrap()) / (2.0 * h)
        })
        .collect()
}

fn random_log_diversity(r: &mut ChaCha8Rng, n: usize) -> LogDiversityUtility {
    let mut theta = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let v = r.gen_range(-1.0..=0.0);
            theta[(i, j)] = v;
            theta[(j, i)] = v;
        }
    }
    let w = (0..n).map(|_| r.gen_range(0.0..=1.0)).collect();
    LogDiversityUtility::new(w, theta, 5.0).unwrap()
}

fn random_concave(r: &mut ChaCha8Rng, n: usize) -> ConcaveNegDepUtility {
    let per = (0..n)
        .map(|i| match i % 3 {
            0 => ScalarConcave::Log {
                weight: r.gen_range(0.0..3.0),
            },
            1 => ScalarConcave::Quadratic {
                q: r.gen_range(0.0..2.0),
                p: r.gen_range(0.0..3.0),
            },
            _ => ScalarConcave::Power {
                coef: r.gen_range(0.1..2.0),
                gamma: r.gen_range(0.2..1.0),
                shift: r.gen_range(0.1..1.0),
            },
        })
        .collect();
    let interactions = vec![
        Interaction {
            indices: vec![0, 1],
            coeff: -r.gen_range(0.0..1.0),
        },
        Interaction {
            indices: vec![0, 1, 2],
            coeff: -r.gen_range(0.0..1.0),
        },
        Interaction {
            indices: vec![n - 1],
            coeff: -r.gen_range(0.0..1.0),
        },
    ];
    ConcaveNegDepUtility::new(per, 3, interactions).unwrap()
}

#[test]
fn gradients_match_finite_differences_for_every_family() {
    let mut r = rng(2024);
    let n = 5;
    let q = monotone_quadratic(&mut r, n, -2.0, -3.0, 1.0);
    let l = random_log_diversity(&mut r, n);
    let c = random_concave(&mut r, n);
    let combo = Utility::sum(&[q.clone().into(), l.clone().into(), c.clone().into()]).unwrap();
    let families: Vec<(&str, Box<dyn Objective>)> = vec![
        ("quadratic", Box::new(q)),
        ("log_diversity", Box::new(l)),
        ("concave_negdep", Box::new(c)),
        ("combination", Box::new(combo)),
    ];
    for (name, f) in &families {
        for _ in 0..50 {
            let x: Vec<f64> = (0..n).map(|_| r.gen_range(0.01..0.99)).collect();
            let exact = f.gradient(&x).unwrap();
            let fd = central_difference(f.as_ref(), &x, 1e-5);
            let rel = norm2(&sub(&exact, &fd)) / norm2(&exact).max(1.0);
            assert!(rel <= 1e-6, "{name}: relative error {rel} at {x:?}");
        }
    }
}

#[test]
fn hessians_match_finite_differences_of_gradients() {
    let mut r = rng(5);
    let n = 4;
    let fs: Vec<Box<dyn Objective>> = vec![
        Box::new(random_log_diversity(&mut r, n)),
        Box::new(random_concave(&mut r, n)),
    ];
    for f in &fs {
        let x: Vec<f64> = (0..n).map(|_| r.gen_range(0.1..0.9)).collect();
        let h = f.hessian(&x).unwrap().unwrap();
        for j in 0..n {
            let mut up = x.clone();
            let mut down = x.clone();
            up[j] += 1e-5;
            down[j] -= 1e-5;
            let gu = f.gradient(&up).unwrap();
            let gd = f.gradient(&down).unwrap();
            for i in 0..n {
                let fd = (gu[i] - gd[i]) / 2e-5;
                assert!((fd - h[(i, j)]).abs() <= 1e-6 * h[(i, j)].abs().max(1.0));
            }
        }
    }
}

#[test]
fn hessian_criterion_implies_definitional_strong_dr() {
    let mut r = rng(77);
    let d = PolytopeDomain::unit_box(3).unwrap();
    for instance in 0..200 {
        let mu = r.gen_range(0.1..3.0);
        let f = monotone_quadratic(&mut r, 3, -2.0, -mu - 4.0, -mu);
        let report = check_strong_dr(&f, &d, mu, Norm::L2, &Sampling::new(100, instance)).unwrap();
        let hessian = report.hessian.as_ref().expect("quadratics expose a Hessian");
        assert!(hessian.holds, "instance {instance}: Hessian criterion should hold by construction");
        assert!(
            report.definitional.holds,
            "instance {instance}: definitional check failed with {:?}",
            report.definitional.witness
        );
    }
}

#[test]
fn bounded_entries_give_l1_smoothness() {
    let mut r = rng(3);
    let d = PolytopeDomain::unit_box(4).unwrap();
    for seed in 0..20 {
        let f = monotone_quadratic(&mut r, 4, -10.0, -10.0, 0.0);
        assert!(check_smoothness(&f, &d, 10.0, Norm::L1, &Sampling::new(300, seed)).unwrap().holds);
        let bound = Utility::from(f.clone()).smoothness_bound(Norm::L1).unwrap();
        assert!(bound <= 10.0);
        assert!(check_smoothness(&f, &d, bound, Norm::L1, &Sampling::new(300, seed)).unwrap().holds);
    }
}

#[test]
fn log_diversity_with_small_penalties_is_monotone() {
    let n = 3;
    let w = vec![1.0, 0.8, 0.6];
    let mut theta = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                theta[(i, j)] = -0.5;
            }
        }
    }
    let f = LogDiversityUtility::new(w.clone(), theta.clone(), 5.0).unwrap();
    // Worst case at x = 1: 5 R_i / (1 + R_i) + sum_j theta_ij >= 0.
    for i in 0..n {
        let worst = 5.0 * w[i] / (1.0 + w[i]) + (0..n).map(|j| theta[(i, j)]).sum::<f64>();
        assert!(worst >= 0.0);
    }
    let d = PolytopeDomain::unit_box(n).unwrap();
    assert!(check_monotone(&f, &d, &Sampling::new(500, 1)).unwrap().holds);
}
