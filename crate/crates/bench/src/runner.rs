//! Runs every (seed, algorithm) pair of an experiment and writes the traces.

use std::path::{Path, PathBuf};

use drsub_core::objectives::{NoisyGradientOracle, Retention};
use drsub_core::offline::{comparator, OfflineResult};
use drsub_core::online::{
    blocked_random_order_run, default_k_algorithm1, default_k_meta_fw, gradient_bound,
    run_adversarial, run_stochastic, Algorithm1, AveragedGradientFw, Ftrl, MetaFw, RecursiveFw,
    RegretTrace, Rho, StepSchedule, StochasticRun, TraceMeta,
};
use drsub_core::streams::permute;
use drsub_core::{Norm, Objective, PolytopeDomain, Utility};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{AlgorithmConfig, ExperimentConfig, StreamKind};
use crate::error::{BenchError, Result};
use crate::instance::{build_instance, Instance, Workload};
use crate::plot::{emit_plot, PlotStyle, Series};

#[derive(Debug, Clone)]
pub struct RunResult {
    pub seed: u64,
    pub algorithm: String,
    pub trace: RegretTrace,
    /// `||d_t - grad f(x_t)||_2` per round, for estimator-based learners.
    pub estimator_errors: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub config: ExperimentConfig,
    /// Ordered by seed position, then algorithm position in the config.
    pub runs: Vec<RunResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub algorithm: String,
    pub seed: u64,
    pub final_regret: f64,
    pub cumulative_utility: f64,
    pub mean_utility: f64,
    pub gradient_calls: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmSummary {
    pub algorithm: String,
    pub alpha: f64,
    pub seeds: usize,
    pub mean_final_regret: f64,
    pub std_final_regret: f64,
    pub mean_cumulative_utility: f64,
    pub mean_utility: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub experiment: String,
    pub horizon: usize,
    pub runs: Vec<SummaryRow>,
    pub algorithms: Vec<AlgorithmSummary>,
}

/// Sidecar written next to every trace CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSidecar {
    pub experiment: String,
    pub csv: String,
    pub horizon: usize,
    pub meta: TraceMeta,
    pub final_regret: f64,
    pub cumulative_utility: f64,
    pub mean_utility: f64,
}

struct Prepared {
    instance: Instance,
    best: OfflineResult,
    /// `f(x*)` for i.i.d. streams; `None` for sequences (evaluated per round).
    expected_best: Option<f64>,
}

fn prepare(cfg: &ExperimentConfig, seed: u64) -> Result<Prepared> {
    let instance = build_instance(cfg, seed)?;
    let (best, expected_best) = match &instance.workload {
        Workload::Sequence { functions, .. } => {
            let total = Utility::sum(functions)?;
            (comparator(&total, &instance.domain, &cfg.comparator)?, None)
        }
        Workload::Iid { family, .. } => {
            let f = family.expected()?;
            let best = comparator(&f, &instance.domain, &cfg.comparator)?;
            let v = best.value;
            (best, Some(v))
        }
    };
    Ok(Prepared {
        instance,
        best,
        expected_best,
    })
}

/// Runs all seeds and algorithms on the global rayon pool.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let prepared: Vec<Prepared> = cfg
        .seeds
        .par_iter()
        .map(|s| prepare(cfg, *s))
        .collect::<Result<_>>()?;
    let jobs: Vec<(&Prepared, &AlgorithmConfig)> = prepared
        .iter()
        .flat_map(|p| cfg.algorithms.iter().map(move |a| (p, a)))
        .collect();
    let runs = jobs
        .par_iter()
        .map(|(p, a)| run_one(cfg, p, a))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentOutput {
        config: cfg.clone(),
        runs,
    })
}

fn run_one(cfg: &ExperimentConfig, p: &Prepared, alg: &AlgorithmConfig) -> Result<RunResult> {
    let domain = &p.instance.domain;
    let seed = p.instance.seed;
    let t = cfg.horizon;
    let meta = |calls: Option<usize>, total: f64| TraceMeta {
        algorithm: alg.id(),
        alpha: alg.alpha(),
        seed,
        comparator: p.best.clone(),
        comparator_total: total,
        gradient_calls: calls,
    };
    match &p.instance.workload {
        Workload::Sequence {
            arrival,
            order_seed,
            modulus,
            ..
        } => {
            let mu_for = |mu: &Option<f64>| -> Result<f64> {
                match mu.or(*modulus) {
                    Some(m) if m > 0.0 => Ok(m),
                    Some(m) => Err(BenchError::Config(format!(
                        "{}: the average utility has modulus {m}; set mu explicitly",
                        alg.id()
                    ))),
                    None => Err(BenchError::Config(format!("{}: mu is required", alg.id()))),
                }
            };
            let (order, points, k): (Vec<Utility>, Vec<Vec<f64>>, usize) = match alg {
                AlgorithmConfig::Algorithm1 { k, mu, .. } => {
                    let k = k.unwrap_or_else(|| default_k_algorithm1(t));
                    let mut learner = Algorithm1::algorithm1(domain.dim(), k, mu_for(mu)?)?;
                    let played = run_adversarial(&mut learner, domain, arrival)?;
                    (arrival.clone(), played.into_iter().map(|r| r.x).collect(), k)
                }
                AlgorithmConfig::MetaFw { k, eta, .. } => {
                    let k = k.unwrap_or_else(|| default_k_meta_fw(t));
                    let eta = match eta {
                        Some(e) => *e,
                        None => Ftrl::tuned_eta(domain.diameter(Norm::L2), gradient_bound(arrival)?, t),
                    };
                    let mut learner = MetaFw::meta_fw(domain.dim(), k, StepSchedule::Constant { eta })?;
                    let played = run_adversarial(&mut learner, domain, arrival)?;
                    (arrival.clone(), played.into_iter().map(|r| r.x).collect(), k)
                }
                AlgorithmConfig::BlockedAlgorithm1 {
                    w, k, mu, permute: shuffle, ..
                } => {
                    let k = k.unwrap_or_else(|| default_k_algorithm1(t));
                    let order = if *shuffle && cfg.stream.model == StreamKind::Adversarial {
                        permute(arrival, *order_seed)
                    } else {
                        arrival.clone()
                    };
                    let run = blocked_random_order_run(&order, domain, *w, mu_for(mu)?, k)?;
                    (order, run.points, k)
                }
                _ => unreachable!("validated: stochastic learners need i.i.d. streams"),
            };
            let utilities = values(&order, &points)?;
            let per_round = order
                .iter()
                .map(|f| f.value(&p.best.x))
                .collect::<drsub_core::Result<Vec<_>>>()?;
            let total = per_round.iter().sum();
            let trace = RegretTrace::new(meta(Some(k * t), total), points, utilities, None, &per_round)?;
            Ok(RunResult {
                seed,
                algorithm: alg.id(),
                trace,
                estimator_errors: None,
            })
        }
        Workload::Iid { family, noise_seed } => {
            let n = domain.dim();
            let run = match alg {
                AlgorithmConfig::AveragedGradientFw { .. } => stochastic(
                    &mut AveragedGradientFw::new(n),
                    family,
                    *noise_seed,
                    Retention::All,
                    domain,
                    t,
                )?,
                AlgorithmConfig::RecursiveFw { rho, .. } => stochastic(
                    &mut RecursiveFw::new(n, t, *rho)?,
                    family,
                    *noise_seed,
                    retention_for(*rho),
                    domain,
                    t,
                )?,
                AlgorithmConfig::Osfw { .. } => stochastic(
                    &mut RecursiveFw::osfw(n, t)?,
                    family,
                    *noise_seed,
                    Retention::Window(1),
                    domain,
                    t,
                )?,
                _ => unreachable!("validated: sequence learners need sequence streams"),
            };
            let best = p.expected_best.expect("i.i.d. comparator");
            let per_round = vec![best; t];
            let trace = RegretTrace::new(
                meta(Some(run.gradient_calls), best * t as f64),
                run.points,
                run.realized,
                Some(run.expected),
                &per_round,
            )?;
            Ok(RunResult {
                seed,
                algorithm: alg.id(),
                trace,
                estimator_errors: run.estimator_errors,
            })
        }
    }
}

fn retention_for(rho: Rho) -> Retention {
    match rho {
        Rho::Recursive => Retention::Window(2),
        Rho::One => Retention::Window(1),
    }
}

fn stochastic<L: drsub_core::online::StochasticLearner>(
    learner: &mut L,
    family: &drsub_core::objectives::IidQuadraticFamily,
    noise_seed: u64,
    retention: Retention,
    domain: &PolytopeDomain,
    horizon: usize,
) -> Result<StochasticRun> {
    let mut oracle = NoisyGradientOracle::new(family.clone(), noise_seed, retention)?;
    Ok(run_stochastic(learner, &mut oracle, domain, horizon)?)
}

fn values(fs: &[Utility], xs: &[Vec<f64>]) -> Result<Vec<f64>> {
    Ok(fs
        .iter()
        .zip(xs)
        .map(|(f, x)| f.value(x))
        .collect::<drsub_core::Result<Vec<_>>>()?)
}

impl ExperimentOutput {
    pub fn summary(&self) -> Summary {
        let runs: Vec<SummaryRow> = self
            .runs
            .iter()
            .map(|r| SummaryRow {
                algorithm: r.algorithm.clone(),
                seed: r.seed,
                final_regret: r.trace.final_regret(),
                cumulative_utility: r.trace.cumulative_utility(),
                mean_utility: r.trace.mean_utility(),
                gradient_calls: r.trace.meta.gradient_calls,
            })
            .collect();
        let algorithms = self
            .config
            .algorithms
            .iter()
            .map(|a| {
                let id = a.id();
                let mine: Vec<&SummaryRow> = runs.iter().filter(|r| r.algorithm == id).collect();
                let regrets: Vec<f64> = mine.iter().map(|r| r.final_regret).collect();
                let (mean, std) = mean_std(&regrets);
                AlgorithmSummary {
                    algorithm: id,
                    alpha: a.alpha(),
                    seeds: mine.len(),
                    mean_final_regret: mean,
                    std_final_regret: std,
                    mean_cumulative_utility: mean_std(
                        &mine.iter().map(|r| r.cumulative_utility).collect::<Vec<_>>(),
                    )
                    .0,
                    mean_utility: mean_std(&mine.iter().map(|r| r.mean_utility).collect::<Vec<_>>()).0,
                }
            })
            .collect();
        Summary {
            experiment: self.config.experiment.clone(),
            horizon: self.config.horizon,
            runs,
            algorithms,
        }
    }

    /// Runs of one algorithm, in seed order.
    pub fn runs_of(&self, algorithm: &str) -> Vec<&RunResult> {
        self.runs.iter().filter(|r| r.algorithm == algorithm).collect()
    }

    /// Mean regret curve per algorithm, in config order.
    pub fn mean_regret_series(&self) -> Vec<Series> {
        self.config
            .algorithms
            .iter()
            .map(|a| {
                let id = a.id();
                let runs = self.runs_of(&id);
                let t = self.config.horizon;
                let mut values = vec![0.0; t];
                for r in &runs {
                    for (v, x) in values.iter_mut().zip(r.trace.regret_series()) {
                        *v += x;
                    }
                }
                let k = runs.len().max(1) as f64;
                Series {
                    id,
                    values: values.into_iter().map(|v| v / k).collect(),
                }
            })
            .collect()
    }

    pub fn plot(&self) -> Result<String> {
        let style = PlotStyle {
            title: format!("{}: mean alpha-regret over {} seeds", self.config.experiment, self.config.seeds.len()),
            x_label: "round t".into(),
            y_label: "alpha-regret".into(),
            ..PlotStyle::default()
        };
        emit_plot(&self.mean_regret_series(), &style)
    }

    /// Writes `<alg>_seed<k>.csv` and `.json` per run, `regret.svg` and
    /// `summary.json` into `dir`. Returns the written paths.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))?;
        let mut written = Vec::new();
        let mut put = |name: String, body: String| -> Result<()> {
            let path = dir.join(name);
            std::fs::write(&path, body).map_err(|e| BenchError::io(&path, e))?;
            written.push(path);
            Ok(())
        };
        for r in &self.runs {
            let stem = format!("{}_seed{}", file_safe(&r.algorithm), r.seed);
            let csv = format!("{stem}.csv");
            put(csv.clone(), r.trace.to_csv())?;
            let sidecar = TraceSidecar {
                experiment: self.config.experiment.clone(),
                csv,
                horizon: r.trace.horizon(),
                meta: r.trace.meta.clone(),
                final_regret: r.trace.final_regret(),
                cumulative_utility: r.trace.cumulative_utility(),
                mean_utility: r.trace.mean_utility(),
            };
            put(format!("{stem}.json"), serde_json::to_string_pretty(&sidecar)? + "\n")?;
        }
        put("regret.svg".into(), self.plot()?)?;
        put("summary.json".into(), serde_json::to_string_pretty(&self.summary())? + "\n")?;
        Ok(written)
    }
}

impl Summary {
    /// Fixed-width table, one line per algorithm.
    pub fn table(&self) -> String {
        let mut out = format!(
            "{} (T = {})\n{:<24} {:>6} {:>14} {:>12} {:>16} {:>12}\n",
            self.experiment, self.horizon, "algorithm", "alpha", "final regret", "std", "cum. utility", "mean f"
        );
        for a in &self.algorithms {
            out.push_str(&format!(
                "{:<24} {:>6.4} {:>14.4} {:>12.4} {:>16.4} {:>12.4}\n",
                a.algorithm,
                a.alpha,
                a.mean_final_regret,
                a.std_final_regret,
                a.mean_cumulative_utility,
                a.mean_utility
            ));
        }
        out
    }
}

fn file_safe(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

pub fn mean_std(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (0.0, 0.0);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
