//! Differential evolution, rand/1/bin.
//!
//! Mutation combines three distinct population members, binomial
//! crossover mixes the mutant into the target, and greedy selection
//! keeps the better of target and trial. One iteration is one
//! generation. The population is `pop_mult * dimension`, capped so
//! several generations fit into the evaluation budget; a budget smaller
//! than the minimum viable population is a configuration error. After
//! the population converges (or the generation cap is hit) the best
//! member is polished by a short Nelder-Mead descent on whatever budget
//! remains.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::nelder_mead::{self, NelderMeadConfig};
use super::{Budget, Evaluator, OptimizerError, OptimizerRun, SearchSpace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DeConfig {
    /// Population size per dimension.
    pub pop_mult: usize,
    /// Differential weight F.
    pub weight: f64,
    /// Crossover probability CR.
    pub crossover: f64,
    /// Relative convergence tolerance on the population spread;
    /// 0 disables early stopping.
    pub tol: f64,
    /// Absolute convergence tolerance on the population spread.
    pub atol: f64,
    /// Polish the best member with Nelder-Mead after the loop exits.
    pub polish: bool,
    /// Iteration cap of the polish descent.
    pub polish_iters: u64,
}

impl Default for DeConfig {
    fn default() -> Self {
        Self {
            pop_mult: 15,
            weight: 0.8,
            crossover: 0.7,
            tol: 0.01,
            atol: 0.0,
            polish: true,
            polish_iters: 200,
        }
    }
}

/// Minimum members for rand/1 mutation (target plus three others).
const MIN_POP: usize = 4;

pub(crate) fn run(
    f: &mut dyn FnMut(&[f64]) -> f64,
    space: &SearchSpace,
    budget: &Budget,
    seed: u64,
    config: &DeConfig,
) -> Result<OptimizerRun, OptimizerError> {
    budget.validate()?;
    let d = space.dimension();
    let mut pop_size = config.pop_mult * d;
    if let Some(cap) = budget.max_evals {
        // Cap so the budget covers initialization plus several
        // generations.
        pop_size = pop_size.min((cap / 10).max(MIN_POP as u64) as usize);
        if (pop_size as u64) > cap {
            return Err(OptimizerError::Config(format!(
                "population {pop_size} exceeds the {cap}-evaluation budget"
            )));
        }
    }
    let pop_size = pop_size.max(MIN_POP);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ev = Evaluator::new(f, budget);

    let mut population: Vec<Vec<f64>> = Vec::with_capacity(pop_size);
    let mut values: Vec<f64> = Vec::with_capacity(pop_size);
    for _ in 0..pop_size {
        let x = space.sample(&mut rng);
        match ev.try_eval(&x) {
            Some(v) => {
                population.push(x);
                values.push(v);
            }
            None => return Ok(ev.finish("de", seed, vec![])),
        }
    }

    // With polish enabled, the generation loop leaves a slice of the
    // evaluation budget so the final descent always runs.
    let soft_cap = match (config.polish, budget.max_evals) {
        (true, Some(cap)) => cap.saturating_sub((cap / 5).min(200)).max(pop_size as u64),
        _ => u64::MAX,
    };

    let iter_cap = budget.iter_cap();
    let mut gen = 0u64;
    'outer: while gen < iter_cap && !ev.exhausted() && ev.n_evals() < soft_cap {
        gen += 1;
        for target in 0..pop_size {
            // Three distinct members, all different from the target.
            let mut picks = [0usize; 3];
            let mut filled = 0;
            while filled < 3 {
                let candidate = rng.gen_range(0..pop_size);
                if candidate != target && !picks[..filled].contains(&candidate) {
                    picks[filled] = candidate;
                    filled += 1;
                }
            }
            let [a, b, c] = picks;

            let forced = rng.gen_range(0..d);
            let mut trial = population[target].clone();
            for dim in 0..d {
                if dim == forced || rng.gen::<f64>() < config.crossover {
                    trial[dim] = population[a][dim]
                        + config.weight * (population[b][dim] - population[c][dim]);
                }
            }
            space.clip(&mut trial);

            match ev.try_eval(&trial) {
                Some(v) => {
                    if v <= values[target] {
                        population[target] = trial;
                        values[target] = v;
                    }
                }
                None => break 'outer,
            }
        }

        if config.tol > 0.0 || config.atol > 0.0 {
            let mean = values.iter().sum::<f64>() / pop_size as f64;
            let var =
                values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / pop_size as f64;
            if var.sqrt() <= config.atol + config.tol * mean.abs() {
                break;
            }
        }
    }

    if config.polish && !ev.exhausted() {
        let start = ev.best_point().to_vec();
        let remaining = ev.remaining();
        let mut forward = |x: &[f64]| -> f64 { ev.try_eval(x).unwrap_or(f64::INFINITY) };
        let polish_budget = Budget {
            max_evals: Some(remaining),
            max_iters: Some(config.polish_iters),
        };
        // Tighter tolerances than a standalone descent: the polish
        // refines an already-converged population.
        let polish_config = NelderMeadConfig {
            xatol: 1e-8,
            fatol: 1e-12,
            simplex_scale: 0.01,
            ..NelderMeadConfig::default()
        };
        let _ = nelder_mead::run(
            &mut forward,
            space,
            &polish_budget,
            seed,
            &polish_config,
            Some(&start),
        )?;
    }

    Ok(ev.finish("de", seed, vec![]))
}
