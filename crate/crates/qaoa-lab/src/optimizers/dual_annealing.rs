//! Dual annealing (generalized simulated annealing).
//!
//! Candidate steps are drawn from the heavy-tailed Tsallis visiting
//! distribution whose width shrinks with the temperature; uphill moves
//! pass through the generalized Metropolis rule with a negative
//! acceptance parameter, whose own temperature decays faster than the
//! visiting one. Improvements periodically trigger a short Nelder-Mead
//! refinement, and the annealing schedule restarts from a fresh point
//! once the temperature decays below a fraction of its initial value.
//! One iteration is one annealing step.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::nelder_mead::{self, NelderMeadConfig};
use super::{Budget, Evaluator, OptimizerError, OptimizerRun, SearchSpace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DaConfig {
    /// Visiting distribution shape, in (1, 3).
    pub visit: f64,
    /// Acceptance shape; more negative rejects uphill moves harder.
    pub accept: f64,
    /// Initial temperature.
    pub initial_temp: f64,
    /// Restart once the temperature falls below this ratio of the
    /// initial temperature.
    pub restart_temp_ratio: f64,
    /// Run a local refinement after this many improvements.
    pub refine_interval: u64,
    /// Iteration cap of each refinement descent.
    pub refine_iters: u64,
}

impl Default for DaConfig {
    fn default() -> Self {
        Self {
            visit: 2.62,
            accept: -5.0,
            initial_temp: 5230.0,
            restart_temp_ratio: 2e-5,
            refine_interval: 4,
            refine_iters: 50,
        }
    }
}

/// Natural log of the gamma function (Lanczos approximation, g = 7).
fn ln_gamma(x: f64) -> f64 {
    const COEFFS: [f64; 8] = [
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = 0.99999999999980993;
    for (i, &c) in COEFFS.iter().enumerate() {
        acc += c / (x + (i + 1) as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Precomputed shape constants of the visiting distribution.
struct Visiting {
    qv: f64,
    factor4_p: f64,
    factor6: f64,
}

impl Visiting {
    fn new(qv: f64) -> Self {
        let factor2 = ((4.0 - qv) * (qv - 1.0).ln()).exp();
        let factor3 = ((2.0 - qv) * std::f64::consts::LN_2 / (qv - 1.0)).exp();
        let factor4_p = std::f64::consts::PI.sqrt() * factor2 / (factor3 * (3.0 - qv));
        let factor5 = 1.0 / (qv - 1.0) - 0.5;
        let d1 = 2.0 - factor5;
        let factor6 = std::f64::consts::PI * (1.0 - factor5)
            / (std::f64::consts::PI * (1.0 - factor5)).sin()
            / ln_gamma(d1).exp();
        Self {
            qv,
            factor4_p,
            factor6,
        }
    }

    /// One displacement draw at the given temperature.
    fn step<R: Rng>(&self, rng: &mut R, temperature: f64) -> f64 {
        const TAIL_LIMIT: f64 = 1e8;
        let factor1 = (temperature.ln() / (self.qv - 1.0)).exp();
        let factor4 = self.factor4_p * factor1;
        let sigmax = (-(self.qv - 1.0) * (self.factor6 / factor4).ln() / (3.0 - self.qv)).exp();
        let x: f64 = sigmax * rng.sample::<f64, _>(StandardNormal);
        let y: f64 = rng.sample(StandardNormal);
        let den = ((self.qv - 1.0) * y.abs().ln() / (3.0 - self.qv)).exp();
        let step = x / den;
        if step > TAIL_LIMIT {
            TAIL_LIMIT * rng.gen::<f64>()
        } else if step < -TAIL_LIMIT {
            -TAIL_LIMIT * rng.gen::<f64>()
        } else {
            step
        }
    }
}

/// Fold a displaced coordinate back into its interval.
fn wrap(value: f64, lower: f64, width: f64) -> f64 {
    let a = (value - lower).rem_euclid(width);
    // Keep a hair away from the lower edge so repeated wrapping cannot
    // pin a coordinate.
    if a < 1e-10 {
        lower + 1e-10
    } else {
        lower + a
    }
}

/// Short Nelder-Mead refinement through the shared evaluator.
fn refine(
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
    config: &DaConfig,
) -> Result<OptimizerRun, OptimizerError> {
    budget.validate()?;
    if !(config.visit > 1.0 && config.visit < 3.0) {
        return Err(OptimizerError::Config(format!(
            "visiting parameter must lie in (1, 3), got {}",
            config.visit
        )));
    }
    let qv = config.visit;
    let qa = config.accept;
    let visiting = Visiting::new(qv);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ev = Evaluator::new(f, budget);

    let mut current = space.sample(&mut rng);
    let mut current_value = match ev.try_eval(&current) {
        Some(v) => v,
        None => return Ok(ev.finish("da", seed, vec![])),
    };

    let t0 = config.initial_temp;
    let t1 = (2.0f64.powf(qv - 1.0)) - 1.0;
    let iter_cap = budget.iter_cap();
    let mut step = 0u64;
    let mut sched = 0u64; // schedule position, reset on restart
    let mut improvements = 0u64;

    while step < iter_cap && !ev.exhausted() {
        step += 1;
        sched += 1;
        let t2 = ((sched as f64) + 1.0).powf(qv - 1.0) - 1.0;
        let temperature = t0 * t1 / t2;

        if temperature < t0 * config.restart_temp_ratio {
            // Re-anneal from a fresh point; the best-so-far is kept by
            // the evaluator.
            sched = 1;
            current = space.sample(&mut rng);
            current_value = match ev.try_eval(&current) {
                Some(v) => v,
                None => break,
            };
            continue;
        }

        let mut candidate = current.clone();
        for (dim, v) in candidate.iter_mut().enumerate() {
            let displaced = *v + visiting.step(&mut rng, temperature);
            *v = wrap(displaced, space.lower(dim), space.width(dim));
        }
        let value = match ev.try_eval(&candidate) {
            Some(v) => v,
            None => break,
        };

        if value < current_value {
            current = candidate;
            current_value = value;
            improvements += 1;
            if improvements % config.refine_interval == 0 {
                let start = ev.best_point().to_vec();
                if let Some((x, v)) =
                    refine(&mut ev, space, &start, config.refine_iters, seed ^ step)
                {
                    if v < current_value {
                        current = x;
                        current_value = v;
                    }
                }
            }
        } else {
            // Generalized Metropolis acceptance with a faster-decaying
            // acceptance temperature.
            let t_acc = temperature / (step as f64 + 1.0);
            let pqa = 1.0 - (1.0 - qa) * (value - current_value) / t_acc;
            if pqa > 0.0 {
                let prob = (pqa.ln() / (1.0 - qa)).exp();
                if rng.gen::<f64>() <= prob {
                    current = candidate;
                    current_value = value;
                }
            }
        }
    }

    // Final polish from the best point seen.
    if !ev.exhausted() && ev.n_evals() > 0 {
        let start = ev.best_point().to_vec();
        refine(&mut ev, space, &start, config.refine_iters, seed);
    }

    Ok(ev.finish("da", seed, vec![]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_gamma_known_values() {
        // Gamma(1) = Gamma(2) = 1, Gamma(5) = 24, Gamma(1/2) = sqrt(pi).
        assert!(ln_gamma(1.0).abs() < 1e-12);
        assert!(ln_gamma(2.0).abs() < 1e-12);
        assert!((ln_gamma(5.0) - 24.0f64.ln()).abs() < 1e-12);
        assert!((ln_gamma(0.5) - 0.5 * std::f64::consts::PI.ln()).abs() < 1e-12);
    }

    #[test]
    fn wrap_stays_in_interval() {
        for k in -20..20 {
            let v = wrap(0.3 + k as f64 * 1.7, -1.0, 2.0);
            assert!((-1.0..=1.0).contains(&v), "wrapped {v}");
        }
    }

    #[test]
    fn rastrigin_two_dim() {
        let space = SearchSpace::new(vec![(-5.12, 5.12); 2]).unwrap();
        let two_pi = 2.0 * std::f64::consts::PI;
        let mut f = |x: &[f64]| {
            10.0 * x.len() as f64
                + x.iter()
                    .map(|&v| v * v - 10.0 * (two_pi * v).cos())
                    .sum::<f64>()
        };
        let run = run(
            &mut f,
            &space,
            &Budget::evals_and_iters(4000, 2000),
            3,
            &DaConfig::default(),
        )
        .unwrap();
        assert!(run.best_value < 0.1, "best {}", run.best_value);
        assert!(run.n_evals <= 4000);
    }

    #[test]
    fn rejects_bad_visit_parameter() {
        let space = SearchSpace::new(vec![(-1.0, 1.0)]).unwrap();
        let mut f = |x: &[f64]| x[0];
        let config = DaConfig {
            visit: 3.5,
            ..DaConfig::default()
        };
        assert!(run(&mut f, &space, &Budget::evals(10), 0, &config).is_err());
    }
}
