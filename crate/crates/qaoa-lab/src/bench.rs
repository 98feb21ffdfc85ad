//! Benchmark campaigns: N seeded restarts per optimizer on one encoded
//! instance, with normalized-cost aggregation.
//!
//! The minimal cost comes from the brute-force spectrum; each restart
//! owns a fresh objective clone so evaluation counters never interact.
//! Restart seeds derive from (master seed, optimizer label, restart
//! index), so adding or removing an optimizer leaves every other
//! optimizer's seeds unchanged. Restarts fan out over the rayon pool
//! and are merged by index, making results independent of scheduling.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::encoding::{self, EncodingError, PenaltyPolicy, ScalingPolicy};
use crate::optimizers::{Budget, OptimizerConfig, OptimizerError, OptimizerRun, SearchSpace};
use crate::problems::{Instance, ProblemError};
use crate::seeds;
use crate::simulator::{EvalMode, QaoaObjective, SimulatorError};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
    #[error(transparent)]
    Simulator(#[from] SimulatorError),
    #[error(transparent)]
    Optimizer(#[from] OptimizerError),
    #[error("normalized cost undefined: minimal cost {0} is not negative")]
    MetricUndefined(f64),
    #[error("invalid benchmark config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Normalized cost C / C_min. Defined only for negative minimal costs;
/// a nonnegative C_min signals an encoding bug upstream.
pub fn normalized_cost(c: f64, c_min: f64) -> Result<f64, BenchError> {
    if !(c_min < 0.0) {
        return Err(BenchError::MetricUndefined(c_min));
    }
    Ok(c / c_min)
}

/// One optimizer entry of a campaign.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimizerSpec {
    /// Optimizer and hyperparameters (tagged by `kind`).
    #[serde(flatten)]
    pub config: OptimizerConfig,
    pub budget: Budget,
    /// Label used in reports and seed derivation; defaults to the kind.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl OptimizerSpec {
    pub fn new(config: OptimizerConfig, budget: Budget) -> Self {
        Self {
            config,
            budget,
            label: None,
        }
    }

    pub fn label(&self) -> String {
        self.label
            .clone()
            .unwrap_or_else(|| self.config.id().to_string())
    }
}

/// Full campaign description.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    pub instance: Instance,
    #[serde(default = "default_layers")]
    pub layers: usize,
    #[serde(default)]
    pub mode: EvalMode,
    #[serde(default = "default_penalty")]
    pub penalty: PenaltyPolicy,
    #[serde(default = "default_scaling")]
    pub scaling: ScalingPolicy,
    pub optimizers: Vec<OptimizerSpec>,
    pub restarts: usize,
    #[serde(default)]
    pub master_seed: u64,
}

fn default_layers() -> usize {
    1
}

fn default_penalty() -> PenaltyPolicy {
    PenaltyPolicy::Auto
}

fn default_scaling() -> ScalingPolicy {
    ScalingPolicy::Auto
}

impl BenchmarkConfig {
    fn validate(&self) -> Result<(), BenchError> {
        if self.restarts == 0 {
            return Err(BenchError::InvalidConfig("restarts must be >= 1".into()));
        }
        if self.layers == 0 {
            return Err(BenchError::InvalidConfig("layers must be >= 1".into()));
        }
        if self.optimizers.is_empty() {
            return Err(BenchError::InvalidConfig("no optimizers listed".into()));
        }
        self.instance.validate()?;
        Ok(())
    }
}

/// One completed restart.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub optimizer: String,
    pub restart: usize,
    pub seed: u64,
    pub best_value: f64,
    pub best_point: Vec<f64>,
    pub n_evals: u64,
    /// Absent when the minimal cost was unavailable.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalized_cost: Option<f64>,
    pub trace: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// Mean and sample standard deviation per optimizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub optimizer: String,
    pub restarts: usize,
    pub evals_mean: f64,
    pub evals_std: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm_cost_mean: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm_cost_std: Option<f64>,
}

/// Raw runs plus per-optimizer aggregates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultTable {
    /// Minimal Ising cost, when enumeration was feasible.
    pub c_min: Option<f64>,
    pub s: f64,
    pub penalty_factors: Vec<f64>,
    pub runs: Vec<RunRecord>,
    pub aggregates: Vec<AggregateRow>,
}

/// Mean and sample standard deviation (N - 1); std is 0 for N = 1.
fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

fn aggregate(runs: &[RunRecord], specs: &[OptimizerSpec]) -> Vec<AggregateRow> {
    specs
        .iter()
        .map(|spec| {
            let label = spec.label();
            let mut rows: Vec<&RunRecord> = runs.iter().filter(|r| r.optimizer == label).collect();
            // Canonical restart order makes the floating-point sums,
            // and therefore the aggregates, permutation-invariant.
            rows.sort_by_key(|r| r.restart);
            let evals: Vec<f64> = rows.iter().map(|r| r.n_evals as f64).collect();
            let (evals_mean, evals_std) = mean_std(&evals);
            let norm: Vec<f64> = rows.iter().filter_map(|r| r.normalized_cost).collect();
            let (norm_cost_mean, norm_cost_std) = if norm.len() == rows.len() && !norm.is_empty() {
                let (m, s) = mean_std(&norm);
                (Some(m), Some(s))
            } else {
                (None, None)
            };
            AggregateRow {
                optimizer: label,
                restarts: rows.len(),
                evals_mean,
                evals_std,
                norm_cost_mean,
                norm_cost_std,
            }
        })
        .collect()
}

/// Execute a campaign: encode once, compute the minimal cost once, then
/// run every (optimizer, restart) cell with its derived seed.
pub fn run_benchmark(config: &BenchmarkConfig) -> Result<ResultTable, BenchError> {
    config.validate()?;
    let funcs = config.instance.build()?;
    let encoded = encoding::encode(&funcs, &config.penalty, &config.scaling)?;

    // The spectrum shares the enumeration limit with the simulator
    // table, so in practice it is available whenever simulation is; the
    // fallback still reports raw best values without normalization.
    let c_min = match encoding::brute_force(&encoded.ising) {
        Ok(spectrum) => Some(spectrum.min_energy),
        Err(EncodingError::CapacityExceeded { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    if let Some(c_min) = c_min {
        if c_min >= 0.0 {
            return Err(BenchError::MetricUndefined(c_min));
        }
    }

    let objective = QaoaObjective::new(&encoded.ising, config.layers, config.mode)?;
    let space = SearchSpace::qaoa(config.layers);

    let cells: Vec<(usize, usize)> = (0..config.optimizers.len())
        .flat_map(|o| (0..config.restarts).map(move |r| (o, r)))
        .collect();

    let runs: Result<Vec<RunRecord>, BenchError> = cells
        .par_iter()
        .map(|&(opt_idx, restart)| {
            let spec = &config.optimizers[opt_idx];
            let label = spec.label();
            let seed = seeds::derive(config.master_seed, &label, restart as u64);
            let mut objective = objective.fresh_clone();
            let mut f = |x: &[f64]| objective.evaluate_flat(x);
            let run: OptimizerRun = spec.config.run(&mut f, &space, &spec.budget, seed)?;
            let normalized = match c_min {
                Some(c_min) => Some(normalized_cost(run.best_value, c_min)?),
                None => None,
            };
            Ok(RunRecord {
                optimizer: label,
                restart,
                seed,
                best_value: run.best_value,
                best_point: run.best_point,
                n_evals: run.n_evals,
                normalized_cost: normalized,
                trace: run.trace,
                notes: run.notes,
            })
        })
        .collect();
    let runs = runs?;

    let aggregates = aggregate(&runs, &config.optimizers);
    Ok(ResultTable {
        c_min,
        s: encoded.s,
        penalty_factors: encoded.penalty_factors,
        runs,
        aggregates,
    })
}

impl ResultTable {
    /// One JSON record per run, one per line.
    pub fn write_raw_jsonl<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for run in &self.runs {
            serde_json::to_writer(&mut w, run)?;
            writeln!(w)?;
        }
        Ok(())
    }

    /// Aggregate CSV: optimizer, evaluations and normalized cost as
    /// mean/std columns.
    pub fn write_aggregate_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(
            w,
            "optimizer,restarts,evals_mean,evals_std,norm_cost_mean,norm_cost_std"
        )?;
        for row in &self.aggregates {
            let fmt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
            writeln!(
                w,
                "{},{},{},{},{},{}",
                row.optimizer,
                row.restarts,
                row.evals_mean,
                row.evals_std,
                fmt(row.norm_cost_mean),
                fmt(row.norm_cost_std)
            )?;
        }
        Ok(())
    }
}
