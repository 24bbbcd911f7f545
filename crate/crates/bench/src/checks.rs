//! `drsub check-function`: runs the property checkers on one utility.

use drsub_core::objectives::{
    check_dr_submodular, check_monotone, check_smoothness, check_strong_dr, CheckReport, Sampling,
    StrongDrReport,
};
use drsub_core::{Norm, PolytopeDomain};
use serde::{Deserialize, Serialize};

use crate::config::CheckConfig;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionReport {
    pub family: String,
    pub dim: usize,
    pub dr_submodular: CheckReport,
    pub monotone: CheckReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strong_dr: Option<StrongDrReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub smoothness: Option<CheckReport>,
    pub norm: Norm,
    /// Every requested property held on all samples.
    pub holds: bool,
}

pub fn check_function(cfg: &CheckConfig) -> Result<FunctionReport> {
    let domain = PolytopeDomain::try_from(cfg.domain.clone())?;
    let f = &cfg.function;
    let sampling = Sampling {
        samples: cfg.samples,
        seed: cfg.seed,
        tol: cfg.tol,
    };
    let dr_submodular = check_dr_submodular(f, &domain, &sampling)?;
    let monotone = check_monotone(f, &domain, &sampling)?;
    let strong_dr = cfg
        .mu
        .map(|mu| check_strong_dr(f, &domain, mu, cfg.norm, &sampling))
        .transpose()?;
    let smoothness = cfg
        .smoothness
        .map(|l| check_smoothness(f, &domain, l, cfg.norm, &sampling))
        .transpose()?;
    let holds = dr_submodular.holds
        && monotone.holds
        && strong_dr.as_ref().is_none_or(StrongDrReport::holds)
        && smoothness.as_ref().is_none_or(|s| s.holds);
    Ok(FunctionReport {
        family: f.family_name().to_string(),
        dim: domain.dim(),
        dr_submodular,
        monotone,
        strong_dr,
        smoothness,
        norm: cfg.norm,
        holds,
    })
}
