//! Budgeted derivative-free optimizers.
//!
//! Local methods (Nelder-Mead, Powell, SPSA, UMDA) and global methods
//! (differential evolution, basin hopping, dual annealing, Fast-Slow)
//! share one contract: an objective over a boxed [`SearchSpace`], a
//! [`Budget`] in evaluations and/or iterations, and a seed. Every run
//! returns an [`OptimizerRun`] whose trace holds one value per
//! objective call, in call order.
//!
//! Budget enforcement is structural: all objective calls go through a
//! shared evaluator that refuses calls once `max_evals` is reached, so
//! `n_evals <= max_evals` holds for every algorithm and every seed.
//! Each algorithm documents its own iteration unit.

mod basin_hopping;
mod differential_evolution;
mod dual_annealing;
mod fast_slow;
mod gp;
mod nelder_mead;
mod powell;
mod spsa;
mod umda;

pub use basin_hopping::BhConfig;
pub use differential_evolution::DeConfig;
pub use dual_annealing::DaConfig;
pub use fast_slow::{fast_slow, FsConfig};
pub use gp::{fit_surrogate, GpSurrogate};
pub use nelder_mead::NelderMeadConfig;
pub use powell::PowellConfig;
pub use spsa::SpsaConfig;
pub use umda::UmdaConfig;

use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OptimizerError {
    #[error("degenerate search space: {0}")]
    DegenerateSpace(String),
    #[error("invalid budget: {0}")]
    InvalidBudget(String),
    #[error("configuration: {0}")]
    Config(String),
    #[error("kernel matrix not positive definite even after jitter")]
    Conditioning,
}

// ---------------------------------------------------------------------------
// Search space and budget
// ---------------------------------------------------------------------------

/// Axis-aligned box of feasible parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    bounds: Vec<(f64, f64)>,
}

impl SearchSpace {
    pub fn new(bounds: Vec<(f64, f64)>) -> Result<Self, OptimizerError> {
        if bounds.is_empty() {
            return Err(OptimizerError::DegenerateSpace("no dimensions".into()));
        }
        for &(lo, hi) in &bounds {
            if !(lo < hi) {
                return Err(OptimizerError::DegenerateSpace(format!(
                    "interval [{lo}, {hi}] is empty"
                )));
            }
        }
        Ok(Self { bounds })
    }

    /// The standard QAOA box for `p` layers: each mixer angle in
    /// `[0, pi]` (the mixer period), each cost angle in `[0, 2pi]`
    /// (the range the scaling heuristic targets).
    pub fn qaoa(layers: usize) -> Self {
        let mut bounds = vec![(0.0, std::f64::consts::PI); layers];
        bounds.extend(vec![(0.0, 2.0 * std::f64::consts::PI); layers]);
        Self { bounds }
    }

    pub fn dimension(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn lower(&self, d: usize) -> f64 {
        self.bounds[d].0
    }

    pub fn upper(&self, d: usize) -> f64 {
        self.bounds[d].1
    }

    pub fn width(&self, d: usize) -> f64 {
        self.bounds[d].1 - self.bounds[d].0
    }

    pub fn mean_width(&self) -> f64 {
        self.bounds.iter().map(|&(lo, hi)| hi - lo).sum::<f64>() / self.dimension() as f64
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dimension()
            && x.iter()
                .zip(&self.bounds)
                .all(|(&v, &(lo, hi))| v >= lo && v <= hi)
    }

    pub fn clip(&self, x: &mut [f64]) {
        for (v, &(lo, hi)) in x.iter_mut().zip(&self.bounds) {
            *v = v.clamp(lo, hi);
        }
    }

    pub fn clipped(&self, x: &[f64]) -> Vec<f64> {
        let mut out = x.to_vec();
        self.clip(&mut out);
        out
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        self.bounds
            .iter()
            .map(|&(lo, hi)| rng.gen_range(lo..hi))
            .collect()
    }
}

/// Caps on objective evaluations and/or optimizer iterations.
/// At least one cap must be set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_evals: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<u64>,
}

impl Budget {
    pub fn evals(n: u64) -> Self {
        Self {
            max_evals: Some(n),
            max_iters: None,
        }
    }

    pub fn iters(n: u64) -> Self {
        Self {
            max_evals: None,
            max_iters: Some(n),
        }
    }

    pub fn evals_and_iters(evals: u64, iters: u64) -> Self {
        Self {
            max_evals: Some(evals),
            max_iters: Some(iters),
        }
    }

    pub fn validate(&self) -> Result<(), OptimizerError> {
        match (self.max_evals, self.max_iters) {
            (None, None) => Err(OptimizerError::InvalidBudget("no cap set".into())),
            (Some(0), _) | (_, Some(0)) => {
                Err(OptimizerError::InvalidBudget("caps must be positive".into()))
            }
            _ => Ok(()),
        }
    }

    /// Iteration cap with a fallback used when only evaluations are
    /// capped (the evaluator stops the run regardless).
    pub(crate) fn iter_cap(&self) -> u64 {
        self.max_iters.unwrap_or(u64::MAX)
    }
}

// ---------------------------------------------------------------------------
// Run record and evaluator
// ---------------------------------------------------------------------------

/// Outcome of one optimizer run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimizerRun {
    pub optimizer_id: String,
    pub seed: u64,
    /// Best evaluated point (flat parameter layout).
    pub best_point: Vec<f64>,
    /// Best objective value seen, i.e. the minimum of `trace`.
    pub best_value: f64,
    pub n_evals: u64,
    /// One objective value per evaluation, in call order.
    pub trace: Vec<f64>,
    /// Free-form annotations (e.g. surrogate fallback events).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl OptimizerRun {
    /// Write `eval_index,value` rows.
    pub fn write_trace_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "eval_index,value")?;
        for (i, v) in self.trace.iter().enumerate() {
            writeln!(w, "{i},{v}")?;
        }
        Ok(())
    }
}

/// Budget-enforcing wrapper around the raw objective. Records the trace
/// and the running best; once `max_evals` is reached no further call
/// reaches the objective.
pub(crate) struct Evaluator<'a> {
    f: &'a mut dyn FnMut(&[f64]) -> f64,
    max_evals: Option<u64>,
    trace: Vec<f64>,
    best_value: f64,
    best_point: Vec<f64>,
}

impl<'a> Evaluator<'a> {
    pub fn new(f: &'a mut dyn FnMut(&[f64]) -> f64, budget: &Budget) -> Self {
        Self {
            f,
            max_evals: budget.max_evals,
            trace: Vec::new(),
            best_value: f64::INFINITY,
            best_point: Vec::new(),
        }
    }

    pub fn exhausted(&self) -> bool {
        matches!(self.max_evals, Some(cap) if self.trace.len() as u64 >= cap)
    }

    pub fn remaining(&self) -> u64 {
        match self.max_evals {
            Some(cap) => cap.saturating_sub(self.trace.len() as u64),
            None => u64::MAX,
        }
    }

    pub fn n_evals(&self) -> u64 {
        self.trace.len() as u64
    }

    /// Evaluate if budget remains. `None` signals exhaustion; callers
    /// unwind and return their current best.
    pub fn try_eval(&mut self, x: &[f64]) -> Option<f64> {
        if self.exhausted() {
            return None;
        }
        let value = (self.f)(x);
        self.trace.push(value);
        if value < self.best_value {
            self.best_value = value;
            self.best_point = x.to_vec();
        }
        Some(value)
    }

    pub fn best_point(&self) -> &[f64] {
        &self.best_point
    }

    pub fn finish(self, optimizer_id: &str, seed: u64, notes: Vec<String>) -> OptimizerRun {
        OptimizerRun {
            optimizer_id: optimizer_id.to_string(),
            seed,
            best_point: self.best_point,
            best_value: self.best_value,
            n_evals: self.trace.len() as u64,
            trace: self.trace,
            notes,
        }
    }
}

// ---------------------------------------------------------------------------
// Kinds and dispatch
// ---------------------------------------------------------------------------

/// The local methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LocalKind {
    #[serde(rename = "nm")]
    NelderMead,
    Powell,
    Spsa,
    Umda,
}

/// The global methods (Fast-Slow is dispatched separately because it
/// carries a surrogate configuration).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GlobalKind {
    #[serde(rename = "de")]
    DifferentialEvolution,
    #[serde(rename = "bh")]
    BasinHopping,
    #[serde(rename = "da")]
    DualAnnealing,
}

/// Any optimizer with its hyperparameters, tagged for config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum OptimizerConfig {
    #[serde(rename = "nm")]
    NelderMead(NelderMeadConfig),
    Powell(PowellConfig),
    Spsa(SpsaConfig),
    Umda(UmdaConfig),
    #[serde(rename = "de")]
    DifferentialEvolution(DeConfig),
    #[serde(rename = "bh")]
    BasinHopping(BhConfig),
    #[serde(rename = "da")]
    DualAnnealing(DaConfig),
    #[serde(rename = "fs")]
    FastSlow(FsConfig),
}

impl OptimizerConfig {
    pub fn default_for(id: &str) -> Option<Self> {
        match id {
            "nm" => Some(Self::NelderMead(NelderMeadConfig::default())),
            "powell" => Some(Self::Powell(PowellConfig::default())),
            "spsa" => Some(Self::Spsa(SpsaConfig::default())),
            "umda" => Some(Self::Umda(UmdaConfig::default())),
            "de" => Some(Self::DifferentialEvolution(DeConfig::default())),
            "bh" => Some(Self::BasinHopping(BhConfig::default())),
            "da" => Some(Self::DualAnnealing(DaConfig::default())),
            "fs" => Some(Self::FastSlow(FsConfig::default())),
            _ => None,
        }
    }

    pub fn id(&self) -> &'static str {
        match self {
            Self::NelderMead(_) => "nm",
            Self::Powell(_) => "powell",
            Self::Spsa(_) => "spsa",
            Self::Umda(_) => "umda",
            Self::DifferentialEvolution(_) => "de",
            Self::BasinHopping(_) => "bh",
            Self::DualAnnealing(_) => "da",
            Self::FastSlow(_) => "fs",
        }
    }

    pub fn is_local(&self) -> bool {
        matches!(
            self,
            Self::NelderMead(_) | Self::Powell(_) | Self::Spsa(_) | Self::Umda(_)
        )
    }

    /// Run this optimizer on an objective.
    pub fn run(
        &self,
        f: &mut dyn FnMut(&[f64]) -> f64,
        space: &SearchSpace,
        budget: &Budget,
        seed: u64,
    ) -> Result<OptimizerRun, OptimizerError> {
        budget.validate()?;
        match self {
            Self::NelderMead(c) => nelder_mead::run(f, space, budget, seed, c, None),
            Self::Powell(c) => powell::run(f, space, budget, seed, c, None),
            Self::Spsa(c) => spsa::run(f, space, budget, seed, c, None),
            Self::Umda(c) => umda::run(f, space, budget, seed, c),
            Self::DifferentialEvolution(c) => {
                differential_evolution::run(f, space, budget, seed, c)
            }
            Self::BasinHopping(c) => basin_hopping::run(f, space, budget, seed, c),
            Self::DualAnnealing(c) => dual_annealing::run(f, space, budget, seed, c),
            Self::FastSlow(c) => fast_slow::fast_slow(f, space, budget, seed, c),
        }
    }
}

/// Run a local optimizer with default hyperparameters. The initial
/// point is drawn uniformly in the space from `seed`.
pub fn minimize_local(
    kind: LocalKind,
    f: &mut dyn FnMut(&[f64]) -> f64,
    space: &SearchSpace,
    budget: &Budget,
    seed: u64,
) -> Result<OptimizerRun, OptimizerError> {
    let config = match kind {
        LocalKind::NelderMead => OptimizerConfig::NelderMead(NelderMeadConfig::default()),
        LocalKind::Powell => OptimizerConfig::Powell(PowellConfig::default()),
        LocalKind::Spsa => OptimizerConfig::Spsa(SpsaConfig::default()),
        LocalKind::Umda => OptimizerConfig::Umda(UmdaConfig::default()),
    };
    config.run(f, space, budget, seed)
}

/// Run a local optimizer from an explicit starting point (used by the
/// globals for their descent phases).
pub(crate) fn run_local_from(
    kind: LocalKind,
    f: &mut dyn FnMut(&[f64]) -> f64,
    space: &SearchSpace,
    budget: &Budget,
    seed: u64,
    start: &[f64],
) -> Result<OptimizerRun, OptimizerError> {
    match kind {
        LocalKind::NelderMead => nelder_mead::run(
            f,
            space,
            budget,
            seed,
            &NelderMeadConfig::default(),
            Some(start),
        ),
        LocalKind::Powell => {
            powell::run(f, space, budget, seed, &PowellConfig::default(), Some(start))
        }
        LocalKind::Spsa => spsa::run(f, space, budget, seed, &SpsaConfig::default(), Some(start)),
        LocalKind::Umda => umda::run(f, space, budget, seed, &UmdaConfig::default()),
    }
}

/// Run a global optimizer with default hyperparameters.
pub fn minimize_global(
    kind: GlobalKind,
    f: &mut dyn FnMut(&[f64]) -> f64,
    space: &SearchSpace,
    budget: &Budget,
    seed: u64,
) -> Result<OptimizerRun, OptimizerError> {
    let config = match kind {
        GlobalKind::DifferentialEvolution => {
            OptimizerConfig::DifferentialEvolution(DeConfig::default())
        }
        GlobalKind::BasinHopping => OptimizerConfig::BasinHopping(BhConfig::default()),
        GlobalKind::DualAnnealing => OptimizerConfig::DualAnnealing(DaConfig::default()),
    };
    config.run(f, space, budget, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn space_validation_and_clipping() {
        assert!(SearchSpace::new(vec![]).is_err());
        assert!(SearchSpace::new(vec![(1.0, 1.0)]).is_err());
        assert!(SearchSpace::new(vec![(2.0, 1.0)]).is_err());
        let space = SearchSpace::new(vec![(-1.0, 1.0), (0.0, 4.0)]).unwrap();
        let mut x = vec![-3.0, 5.0];
        space.clip(&mut x);
        assert_eq!(x, vec![-1.0, 4.0]);
        assert!(space.contains(&x));
        assert!(!space.contains(&[0.0, 4.1]));
    }

    #[test]
    fn qaoa_space_layout() {
        let space = SearchSpace::qaoa(2);
        assert_eq!(space.dimension(), 4);
        assert_eq!(space.upper(0), std::f64::consts::PI);
        assert_eq!(space.upper(1), std::f64::consts::PI);
        assert_eq!(space.upper(2), 2.0 * std::f64::consts::PI);
        assert_eq!(space.upper(3), 2.0 * std::f64::consts::PI);
    }

    #[test]
    fn budget_validation() {
        assert!(Budget {
            max_evals: None,
            max_iters: None
        }
        .validate()
        .is_err());
        assert!(Budget::evals(0).validate().is_err());
        assert!(Budget::evals(10).validate().is_ok());
        assert!(Budget::iters(5).validate().is_ok());
    }

    #[test]
    fn evaluator_enforces_cap_and_tracks_best() {
        let mut calls = 0;
        let mut f = |x: &[f64]| {
            calls += 1;
            x[0]
        };
        let budget = Budget::evals(3);
        let mut ev = Evaluator::new(&mut f, &budget);
        assert_eq!(ev.try_eval(&[2.0]), Some(2.0));
        assert_eq!(ev.try_eval(&[-1.0]), Some(-1.0));
        assert_eq!(ev.try_eval(&[5.0]), Some(5.0));
        assert_eq!(ev.try_eval(&[0.0]), None);
        assert!(ev.exhausted());
        let run = ev.finish("test", 0, vec![]);
        assert_eq!(run.n_evals, 3);
        assert_eq!(run.trace, vec![2.0, -1.0, 5.0]);
        assert_eq!(run.best_value, -1.0);
        assert_eq!(run.best_point, vec![-1.0]);
        assert_eq!(calls, 3);
    }

    #[test]
    fn optimizer_config_ids_round_trip() {
        for id in ["nm", "powell", "spsa", "umda", "de", "bh", "da", "fs"] {
            let config = OptimizerConfig::default_for(id).unwrap();
            assert_eq!(config.id(), id);
            let json = serde_json::to_string(&config).unwrap();
            assert!(json.contains(&format!("\"kind\":\"{id}\"")));
            let back: OptimizerConfig = serde_json::from_str(&json).unwrap();
            assert_eq!(back, config);
        }
        assert!(OptimizerConfig::default_for("bogus").is_none());
    }

    #[test]
    fn trace_csv_format() {
        let run = OptimizerRun {
            optimizer_id: "nm".into(),
            seed: 1,
            best_point: vec![0.0],
            best_value: -1.0,
            n_evals: 2,
            trace: vec![3.0, -1.0],
            notes: vec![],
        };
        let mut out = Vec::new();
        run.write_trace_csv(&mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "eval_index,value\n0,3\n1,-1\n"
        );
    }
}
