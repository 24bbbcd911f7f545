//! Per-seed materialization of domains and utility streams.

use drsub_core::linalg::Matrix;
use drsub_core::objectives::{IidQuadraticFamily, QuadraticUtility};
use drsub_core::streams::permute;
use drsub_core::{PolytopeDomain, Utility};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{DomainConfig, ExperimentConfig, GeneratorConfig, StreamKind};
use crate::error::{BenchError, Result};
use crate::movielens::{self, MovieLensExtract};

/// Independent purposes a run seed is split into.
#[derive(Debug, Clone, Copy)]
#[repr(u64)]
pub enum SeedPurpose {
    Domain = 1,
    Functions = 2,
    Order = 3,
    Noise = 4,
    Penalties = 5,
}

/// A `u64` drawn from stream `purpose` of the ChaCha8 generator keyed by `seed`.
pub fn derive_seed(seed: u64, purpose: SeedPurpose) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(purpose as u64);
    rng.next_u64()
}

#[derive(Debug, Clone)]
pub enum Workload {
    Sequence {
        /// Functions in generation order.
        functions: Vec<Utility>,
        /// Functions as they arrive under the configured stream model.
        arrival: Vec<Utility>,
        /// Seed for any additional shuffle (blocked runs on adversarial streams).
        order_seed: u64,
        /// Strong DR-submodularity modulus of the average, when known.
        modulus: Option<f64>,
    },
    Iid {
        family: IidQuadraticFamily,
        noise_seed: u64,
    },
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub seed: u64,
    pub domain: PolytopeDomain,
    pub workload: Workload,
}

pub fn build_domain(cfg: &DomainConfig, seed: u64) -> Result<PolytopeDomain> {
    match cfg {
        DomainConfig::Polytope { spec } => Ok(PolytopeDomain::try_from(spec.clone())?),
        DomainConfig::RandomPacking {
            dim,
            rows,
            rhs,
            entry_range,
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, SeedPurpose::Domain));
            let data = (0..rows * dim).map(|_| uniform(&mut rng, *entry_range)).collect();
            let c = Matrix::from_row_major(*rows, *dim, data)?;
            Ok(PolytopeDomain::new(c, vec![*rhs; *rows], vec![0.0; *dim], vec![1.0; *dim])?)
        }
    }
}

fn uniform<R: Rng>(rng: &mut R, [lo, hi]: [f64; 2]) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.gen_range(lo..hi)
    }
}

/// Quadratics with symmetric Hessians whose off-diagonals come from
/// `off_diag`; rounds before `horizon / 2` draw diagonals from `first`, the
/// rest from `second`. The linear term is `-A 1`.
pub fn quadratic_mix(
    dim: usize,
    horizon: usize,
    off_diag: [f64; 2],
    first: [f64; 2],
    second: [f64; 2],
    seed: u64,
) -> Result<Vec<Utility>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..horizon)
        .map(|t| {
            let diag = if t < horizon / 2 { first } else { second };
            let mut a = Matrix::zeros(dim, dim);
            for i in 0..dim {
                a[(i, i)] = uniform(&mut rng, diag);
                for j in (i + 1)..dim {
                    let v = uniform(&mut rng, off_diag);
                    a[(i, j)] = v;
                    a[(j, i)] = v;
                }
            }
            Ok(Utility::Quadratic(QuadraticUtility::with_monotone_linear_term(a)?))
        })
        .collect()
}

/// `min_i -(mean_t A_t)_ii` when every function is quadratic.
pub fn quadratic_average_modulus(fs: &[Utility]) -> Option<f64> {
    let first = fs.first()?.as_quadratic()?;
    let n = first.hessian().rows();
    let mut sum = vec![0.0; n];
    for f in fs {
        for (s, d) in sum.iter_mut().zip(f.as_quadratic()?.hessian().diag()) {
            *s += d;
        }
    }
    let t = fs.len() as f64;
    Some(sum.iter().map(|s| -s / t).fold(f64::INFINITY, f64::min))
}

pub fn extract_for(cfg: &ExperimentConfig, seed: u64) -> Result<Option<MovieLensExtract>> {
    match &cfg.stream.generator {
        GeneratorConfig::SyntheticRatings {
            movies,
            genres,
            density,
            ..
        } => Ok(Some(movielens::synthetic_extract(
            *movies,
            cfg.horizon,
            *genres,
            *density,
            derive_seed(seed, SeedPurpose::Functions),
        ))),
        GeneratorConfig::Movielens {
            ratings,
            movies,
            n_movies,
            ..
        } => Ok(Some(movielens::ingest_movielens(
            ratings,
            movies,
            *n_movies,
            cfg.horizon,
            derive_seed(seed, SeedPurpose::Penalties),
        )?)),
        _ => Ok(None),
    }
}

pub fn build_instance(cfg: &ExperimentConfig, seed: u64) -> Result<Instance> {
    let run_seed = seed.wrapping_add(cfg.stream.seed.unwrap_or(0).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let domain = build_domain(&cfg.domain, seed)?;
    let n = domain.dim();
    let fn_seed = derive_seed(seed, SeedPurpose::Functions);
    let (functions, modulus) = match &cfg.stream.generator {
        GeneratorConfig::Explicit { functions } => {
            let m = quadratic_average_modulus(functions);
            (functions.clone(), m)
        }
        GeneratorConfig::SyntheticRatings { scale, .. } | GeneratorConfig::Movielens { scale, .. } => {
            let extract = extract_for(cfg, seed)?.expect("rating generator");
            (extract.utilities(*scale)?, Some(extract.average_modulus(*scale)))
        }
        GeneratorConfig::QuadraticMix {
            off_diag,
            first_diag,
            second_diag,
        } => {
            let fs = quadratic_mix(n, cfg.horizon, *off_diag, *first_diag, *second_diag, fn_seed)?;
            let m = quadratic_average_modulus(&fs);
            (fs, m)
        }
        GeneratorConfig::IidFamily { family } => {
            return Ok(Instance {
                seed,
                domain,
                workload: Workload::Iid {
                    family: family.clone(),
                    noise_seed: derive_seed(run_seed, SeedPurpose::Noise),
                },
            })
        }
        GeneratorConfig::BilinearNoise { entry_range, nu } => {
            let mut rng = ChaCha8Rng::seed_from_u64(fn_seed);
            let data = (0..n * n).map(|_| uniform(&mut rng, *entry_range)).collect();
            let a = Matrix::from_row_major(n, n, data)?;
            let family = IidQuadraticFamily::BilinearNoise { a, nu: *nu };
            family.validate()?;
            return Ok(Instance {
                seed,
                domain,
                workload: Workload::Iid {
                    family,
                    noise_seed: derive_seed(run_seed, SeedPurpose::Noise),
                },
            });
        }
    };
    if functions.len() != cfg.horizon {
        return Err(BenchError::Config(format!(
            "generator produced {} functions for horizon {}",
            functions.len(),
            cfg.horizon
        )));
    }
    let order_seed = derive_seed(run_seed, SeedPurpose::Order);
    let arrival = match cfg.stream.model {
        StreamKind::RandomOrder => permute(&functions, order_seed),
        _ => functions.clone(),
    };
    Ok(Instance {
        seed,
        domain,
        workload: Workload::Sequence {
            functions,
            arrival,
            order_seed,
            modulus,
        },
    })
}
