//! Basin hopping.
//!
//! Alternates Nelder-Mead descents with random coordinate perturbations
//! of 25% of each bound width. A hop is accepted purely on its function
//! value through a Metropolis rule whose temperature is the standard
//! deviation of the objective over an initial batch of probe points.
//! One iteration is one hop (perturb, descend, accept/reject).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::nelder_mead::{self, NelderMeadConfig};
use super::{Budget, Evaluator, OptimizerError, OptimizerRun, SearchSpace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BhConfig {
    /// Perturbation step as a fraction of each bound width.
    pub step_frac: f64,
    /// Points used to estimate the Metropolis temperature.
    pub probe_points: usize,
    /// Iteration cap of each inner descent.
    pub descent_iters: u64,
}

impl Default for BhConfig {
    fn default() -> Self {
        Self {
            step_frac: 0.25,
            probe_points: 20,
            descent_iters: 100,
        }
    }
}

/// Nelder-Mead descent driven through the shared evaluator so the
/// global budget applies across hops.
fn descend(
    ev: &mut Evaluator,
    space: &SearchSpace,
    start: &[f64],
    iters: u64,
    seed: u64,
) -> Option<(Vec<f64>, f64)> {
    let remaining = ev.remaining();
    if remaining == 0 {
        return None;
    }
    // The descent's own evaluation cap equals the outer remainder, so
    // every inner call is forwarded before the outer budget runs out.
    let mut forward = |x: &[f64]| -> f64 { ev.try_eval(x).unwrap_or(f64::INFINITY) };
    let inner_budget = Budget {
        max_evals: Some(remaining),
        max_iters: Some(iters),
    };
    let run = nelder_mead::run(
        &mut forward,
        space,
        &inner_budget,
        seed,
        &NelderMeadConfig::default(),
        Some(start),
    )
    .expect("validated budget");
    if run.n_evals == 0 || run.best_point.is_empty() {
        return None;
    }
    Some((run.best_point, run.best_value))
}

pub(crate) fn run(
    f: &mut dyn FnMut(&[f64]) -> f64,
    space: &SearchSpace,
    budget: &Budget,
    seed: u64,
    config: &BhConfig,
) -> Result<OptimizerRun, OptimizerError> {
    budget.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ev = Evaluator::new(f, budget);

    // Temperature probe over uniform points.
    let mut probe_values = Vec::with_capacity(config.probe_points);
    for _ in 0..config.probe_points.max(2) {
        let x = space.sample(&mut rng);
        match ev.try_eval(&x) {
            Some(v) => probe_values.push(v),
            None => return Ok(ev.finish("bh", seed, vec![])),
        }
    }
    let mean = probe_values.iter().sum::<f64>() / probe_values.len() as f64;
    let var = probe_values.iter().map(|v| (v - mean).powi(2)).sum::<f64>()
        / (probe_values.len() - 1) as f64;
    let temperature = var.sqrt().max(1e-12);

    let start = space.sample(&mut rng);
    let (mut current, mut current_value) =
        match descend(&mut ev, space, &start, config.descent_iters, seed) {
            Some(r) => r,
            None => return Ok(ev.finish("bh", seed, vec![])),
        };

    let iter_cap = budget.iter_cap();
    let mut hops = 0u64;
    while hops < iter_cap && !ev.exhausted() {
        hops += 1;
        let mut candidate = current.clone();
        for (d, v) in candidate.iter_mut().enumerate() {
            let step = config.step_frac * space.width(d);
            *v += rng.gen_range(-step..=step);
        }
        space.clip(&mut candidate);
        let hop_seed = seed.wrapping_add(hops);
        let (x_min, f_min) = match descend(&mut ev, space, &candidate, config.descent_iters, hop_seed)
        {
            Some(r) => r,
            None => break,
        };
        // Acceptance is purely on the function value.
        let accept = f_min < current_value
            || rng.gen::<f64>() < (-(f_min - current_value) / temperature).exp();
        if accept {
            current = x_min;
            current_value = f_min;
        }
    }

    Ok(ev.finish("bh", seed, vec![]))
}
