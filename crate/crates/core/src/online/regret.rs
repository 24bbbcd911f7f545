use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::offline::OfflineResult;

/// Running `sum_s (alpha * comparator_s - utility_s)`.
pub fn compute_regret(utilities: &[f64], comparator: &[f64], alpha: f64) -> Result<Vec<f64>> {
    if utilities.len() != comparator.len() {
        return Err(Error::LengthMismatch {
            left: utilities.len(),
            right: comparator.len(),
        });
    }
    let mut acc = 0.0;
    Ok(utilities
        .iter()
        .zip(comparator)
        .map(|(u, c)| {
            acc += alpha * c - u;
            acc
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub t: usize,
    pub x: Vec<f64>,
    /// `f_t(x_t)`.
    pub utility: f64,
    /// `f(x_t)` for i.i.d. streams.
    pub expected_utility: Option<f64>,
    pub cum_utility: f64,
    pub alpha_regret: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceMeta {
    pub algorithm: String,
    pub alpha: f64,
    pub seed: u64,
    pub comparator: OfflineResult,
    /// `sum_t f_t(x*)`, or `T f(x*)` for i.i.d. streams.
    pub comparator_total: f64,
    #[serde(default)]
    pub gradient_calls: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretTrace {
    pub meta: TraceMeta,
    pub records: Vec<TraceRecord>,
}

impl RegretTrace {
    /// Regret is measured on `expected` when given (stochastic regret against
    /// `E f_t`), otherwise on the realized utilities.
    pub fn new(
        meta: TraceMeta,
        points: Vec<Vec<f64>>,
        utilities: Vec<f64>,
        expected: Option<Vec<f64>>,
        comparator_per_round: &[f64],
    ) -> Result<Self> {
        let len = points.len();
        for other in [utilities.len(), comparator_per_round.len()]
            .into_iter()
            .chain(expected.as_ref().map(Vec::len))
        {
            if other != len {
                return Err(Error::LengthMismatch { left: len, right: other });
            }
        }
        let basis = expected.as_deref().unwrap_or(&utilities);
        let regret = compute_regret(basis, comparator_per_round, meta.alpha)?;
        let mut cum = 0.0;
        let records = points
            .into_iter()
            .enumerate()
            .map(|(i, x)| {
                cum += utilities[i];
                TraceRecord {
                    t: i + 1,
                    x,
                    utility: utilities[i],
                    expected_utility: expected.as_ref().map(|e| e[i]),
                    cum_utility: cum,
                    alpha_regret: regret[i],
                }
            })
            .collect();
        Ok(Self { meta, records })
    }

    pub fn horizon(&self) -> usize {
        self.records.len()
    }

    pub fn final_regret(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.alpha_regret)
    }

    pub fn cumulative_utility(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.cum_utility)
    }

    /// Mean of `f(x_t)` when available, else of `f_t(x_t)`.
    pub fn mean_utility(&self) -> f64 {
        if self.records.is_empty() {
            return 0.0;
        }
        let sum: f64 = self
            .records
            .iter()
            .map(|r| r.expected_utility.unwrap_or(r.utility))
            .sum();
        sum / self.records.len() as f64
    }

    pub fn regret_series(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.alpha_regret).collect()
    }

    /// Columns `t,x1..xn,utility,cum_utility,alpha_regret`; floats use the
    /// shortest round-tripping representation.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let n = self.records.first().map_or(0, |r| r.x.len());
        let mut header = vec!["t".to_string()];
        header.extend((1..=n).map(|i| format!("x{i}")));
        header.extend(["utility", "cum_utility", "alpha_regret"].map(String::from));
        writeln!(out, "{}", header.join(","))?;
        for r in &self.records {
            let mut line = r.t.to_string();
            for v in r.x.iter().chain([&r.utility, &r.cum_utility, &r.alpha_regret]) {
                line.push(',');
                line.push_str(&v.to_string());
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV is ASCII")
    }
}
