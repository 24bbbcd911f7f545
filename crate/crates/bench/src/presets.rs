//! Experiment presets compiled into the binary.

use std::path::PathBuf;

use crate::config::{ExperimentConfig, GeneratorConfig};
use crate::error::{BenchError, Result};

pub const EXP1: &str = include_str!("../presets/exp1.toml");
pub const EXP2: &str = include_str!("../presets/exp2.toml");
pub const EXP3: &str = include_str!("../presets/exp3.toml");

pub const NAMES: [&str; 3] = ["exp1", "exp2", "exp3"];

pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let text = match name {
        "exp1" => EXP1,
        "exp2" => EXP2,
        "exp3" => EXP3,
        other => {
            return Err(BenchError::Config(format!(
                "unknown preset {other:?}; expected one of {NAMES:?}"
            )))
        }
    };
    ExperimentConfig::from_toml(text)
}

/// The exp1 preset reading MovieLens-1M files instead of synthetic ratings.
pub fn exp1_movielens(ratings: PathBuf, movies: PathBuf) -> Result<ExperimentConfig> {
    let mut cfg = preset("exp1")?;
    let scale = match cfg.stream.generator {
        GeneratorConfig::SyntheticRatings { scale, .. } => scale,
        _ => 5.0,
    };
    let n_movies = match &cfg.domain {
        crate::config::DomainConfig::Polytope { spec } => spec.dim,
        crate::config::DomainConfig::RandomPacking { dim, .. } => *dim,
    };
    cfg.stream.generator = GeneratorConfig::Movielens {
        ratings,
        movies,
        n_movies,
        scale,
    };
    cfg.validate()?;
    Ok(cfg)
}
