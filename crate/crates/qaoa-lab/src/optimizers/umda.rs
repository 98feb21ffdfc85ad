//! Continuous univariate marginal distribution algorithm.
//!
//! Each generation fits an independent normal distribution per
//! dimension to the elite fraction of the population and samples the
//! next generation from the product model, clipped to the bounds. One
//! iteration is one generation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{Budget, Evaluator, OptimizerError, OptimizerRun, SearchSpace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct UmdaConfig {
    /// Individuals per generation.
    pub population: usize,
    /// Fraction of the population kept for model fitting.
    pub elite_frac: f64,
    /// Lower bound on the model standard deviation, as a fraction of
    /// each bound width.
    pub min_std_frac: f64,
}

impl Default for UmdaConfig {
    fn default() -> Self {
        Self {
            population: 20,
            elite_frac: 0.5,
            min_std_frac: 1e-8,
        }
    }
}

pub(crate) fn run(
    f: &mut dyn FnMut(&[f64]) -> f64,
    space: &SearchSpace,
    budget: &Budget,
    seed: u64,
    config: &UmdaConfig,
) -> Result<OptimizerRun, OptimizerError> {
    budget.validate()?;
    if config.population < 2 {
        return Err(OptimizerError::Config(
            "UMDA population must be at least 2".into(),
        ));
    }
    let d = space.dimension();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ev = Evaluator::new(f, budget);

    let pop_size = config.population;
    let elite = ((pop_size as f64 * config.elite_frac).ceil() as usize).clamp(2, pop_size);

    // Initial generation is uniform over the box.
    let mut population: Vec<(Vec<f64>, f64)> = Vec::with_capacity(pop_size);
    for _ in 0..pop_size {
        let x = space.sample(&mut rng);
        match ev.try_eval(&x) {
            Some(v) => population.push((x, v)),
            None => return Ok(ev.finish("umda", seed, vec![])),
        }
    }

    let iter_cap = budget.iter_cap();
    let mut gen = 0u64;
    'outer: while gen < iter_cap && !ev.exhausted() {
        gen += 1;
        population.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        population.truncate(elite);

        let mut means = vec![0.0; d];
        let mut stds = vec![0.0; d];
        for dim in 0..d {
            let mean = population.iter().map(|(x, _)| x[dim]).sum::<f64>() / elite as f64;
            let var = population
                .iter()
                .map(|(x, _)| (x[dim] - mean).powi(2))
                .sum::<f64>()
                / elite as f64;
            means[dim] = mean;
            stds[dim] = var.sqrt().max(config.min_std_frac * space.width(dim));
        }

        let mut next = Vec::with_capacity(pop_size);
        for _ in 0..pop_size {
            let x: Vec<f64> = (0..d)
                .map(|dim| {
                    let normal = Normal::new(means[dim], stds[dim]).expect("positive std");
                    normal
                        .sample(&mut rng)
                        .clamp(space.lower(dim), space.upper(dim))
                })
                .collect();
            match ev.try_eval(&x) {
                Some(v) => next.push((x, v)),
                None => break 'outer,
            }
        }
        population = next;
    }

    Ok(ev.finish("umda", seed, vec![]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_converges() {
        let space = SearchSpace::new(vec![(-5.0, 5.0); 2]).unwrap();
        let mut f = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
        let run = run(
            &mut f,
            &space,
            &Budget::evals_and_iters(4000, 200),
            2,
            &UmdaConfig::default(),
        )
        .unwrap();
        assert!(run.best_value < 1e-4, "best {}", run.best_value);
    }

    #[test]
    fn rejects_tiny_population() {
        let space = SearchSpace::new(vec![(-1.0, 1.0)]).unwrap();
        let mut f = |x: &[f64]| x[0];
        let config = UmdaConfig {
            population: 1,
            ..UmdaConfig::default()
        };
        assert!(run(&mut f, &space, &Budget::evals(10), 0, &config).is_err());
    }
}
