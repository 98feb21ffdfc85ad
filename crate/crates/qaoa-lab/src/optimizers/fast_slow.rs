//! Fast-Slow: global surrogate sampling followed by local descent.
//!
//! Phase 1 evaluates a seeded Latin hypercube, fits a Gaussian-process
//! surrogate to the samples and minimizes its posterior mean by
//! multi-start Nelder-Mead (surrogate queries cost no objective calls).
//! Phase 2 starts the configured local optimizer at the surrogate
//! argmin with the remaining evaluation budget. If the surrogate fit
//! fails, phase 2 starts from the best sampled point instead and the
//! run is annotated.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::gp::fit_surrogate;
use super::nelder_mead::{self, NelderMeadConfig};
use super::{Budget, Evaluator, LocalKind, OptimizerError, OptimizerRun, SearchSpace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FsConfig {
    /// Space-filling samples of phase 1. `None` picks
    /// `min(500, max_evals / 2)`.
    pub n_samples: Option<usize>,
    /// Local optimizer of phase 2.
    pub local: LocalKind,
    /// Kernel length scale per dimension, as a fraction of the bound
    /// width.
    pub length_scale_frac: f64,
    /// Observation noise for the surrogate (raise for shot-based
    /// objectives).
    pub noise: f64,
    /// Starts of the multi-start surrogate minimization.
    pub surrogate_starts: usize,
    /// Iteration cap per surrogate descent.
    pub surrogate_iters: u64,
}

impl Default for FsConfig {
    fn default() -> Self {
        Self {
            n_samples: None,
            local: LocalKind::NelderMead,
            length_scale_frac: 0.2,
            noise: 1e-6,
            surrogate_starts: 16,
            surrogate_iters: 200,
        }
    }
}

/// Seeded Latin hypercube: one stratum per sample and dimension.
fn latin_hypercube<R: Rng>(space: &SearchSpace, n_samples: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let d = space.dimension();
    let strata: Vec<Vec<usize>> = (0..d)
        .map(|_| {
            let mut order: Vec<usize> = (0..n_samples).collect();
            // Fisher-Yates with the shared stream.
            for i in (1..order.len()).rev() {
                let j = rng.gen_range(0..=i);
                order.swap(i, j);
            }
            order
        })
        .collect();
    (0..n_samples)
        .map(|k| {
            (0..d)
                .map(|dim| {
                    let cell = strata[dim][k] as f64;
                    let jitter: f64 = rng.gen();
                    space.lower(dim) + (cell + jitter) * space.width(dim) / n_samples as f64
                })
                .collect()
        })
        .collect()
}

pub fn fast_slow(
    f: &mut dyn FnMut(&[f64]) -> f64,
    space: &SearchSpace,
    budget: &Budget,
    seed: u64,
    config: &FsConfig,
) -> Result<OptimizerRun, OptimizerError> {
    budget.validate()?;
    let max_evals = budget.max_evals.ok_or_else(|| {
        OptimizerError::InvalidBudget("fast-slow needs an evaluation cap".into())
    })?;
    let n_samples = config
        .n_samples
        .unwrap_or_else(|| (max_evals / 2).min(500).max(2) as usize);
    if n_samples as u64 >= max_evals {
        return Err(OptimizerError::Config(format!(
            "{n_samples} samples leave no budget for the local phase (cap {max_evals})"
        )));
    }
    let d = space.dimension();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ev = Evaluator::new(f, budget);
    let mut notes = Vec::new();

    // Phase 1: space-filling evaluation.
    let points = latin_hypercube(space, n_samples, &mut rng);
    let mut values = Vec::with_capacity(n_samples);
    for p in &points {
        match ev.try_eval(p) {
            Some(v) => values.push(v),
            None => return Ok(ev.finish("fs", seed, notes)),
        }
    }
    let best_sampled = ev.best_point().to_vec();

    // Surrogate fit with the documented hyperparameters.
    let length_scales: Vec<f64> = (0..d)
        .map(|dim| config.length_scale_frac * space.width(dim))
        .collect();
    let signal_variance = {
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / values.len() as f64;
        var.max(1e-12)
    };

    let start = match fit_surrogate(&points, &values, &length_scales, signal_variance, config.noise)
    {
        Ok(gp) => {
            // Multi-start descent on the posterior mean; no objective
            // calls are spent here.
            let mut starts = vec![best_sampled.clone()];
            for _ in 1..config.surrogate_starts.max(1) {
                starts.push(space.sample(&mut rng));
            }
            let mut best = (f64::INFINITY, best_sampled.clone());
            for (k, s) in starts.iter().enumerate() {
                let mut mean_fn = |x: &[f64]| gp.posterior_mean(x);
                let inner = nelder_mead::run(
                    &mut mean_fn,
                    space,
                    &Budget::iters(config.surrogate_iters),
                    seed.wrapping_add(k as u64),
                    &NelderMeadConfig::default(),
                    Some(s),
                )?;
                if inner.best_value < best.0 {
                    best = (inner.best_value, inner.best_point);
                }
            }
            best.1
        }
        Err(e) => {
            notes.push(format!("surrogate_fallback: {e}"));
            best_sampled
        }
    };

    // Phase 2: local descent from the most promising point, spending
    // whatever evaluation budget remains.
    let remaining = ev.remaining();
    if remaining > 0 {
        let mut forward = |x: &[f64]| -> f64 { ev.try_eval(x).unwrap_or(f64::INFINITY) };
        let local_budget = Budget {
            max_evals: Some(remaining),
            max_iters: budget.max_iters,
        };
        super::run_local_from(config.local, &mut forward, space, &local_budget, seed, &start)?;
    }

    Ok(ev.finish("fs", seed, notes))
}
