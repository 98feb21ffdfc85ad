//! Simultaneous perturbation stochastic approximation.
//!
//! Each iteration estimates the gradient from two evaluations at
//! `x +- c_k * delta` with a Rademacher `delta`, then steps against it.
//! Gain schedules follow `a_k = a / (k + 1 + A)^0.602` and
//! `c_k = c / (k + 1)^0.101`; `a` is calibrated from a short gradient
//! probe at the starting point and `A` is 10% of the iteration cap.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Budget, Evaluator, OptimizerError, OptimizerRun, SearchSpace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpsaConfig {
    /// Exponent of the step-size schedule.
    pub a_exp: f64,
    /// Exponent of the perturbation schedule.
    pub c_exp: f64,
    /// Initial perturbation as a fraction of the mean bound width.
    pub c_frac: f64,
    /// Target magnitude of the first step as a fraction of the mean
    /// bound width, used to calibrate `a`.
    pub step_frac: f64,
    /// Number of gradient probes in the calibration phase.
    pub probes: usize,
    /// Stability constant `A` as a fraction of the iteration cap.
    pub stability_frac: f64,
}

impl Default for SpsaConfig {
    fn default() -> Self {
        Self {
            a_exp: 0.602,
            c_exp: 0.101,
            c_frac: 0.01,
            step_frac: 0.05,
            probes: 5,
            stability_frac: 0.1,
        }
    }
}

pub(crate) fn run(
    f: &mut dyn FnMut(&[f64]) -> f64,
    space: &SearchSpace,
    budget: &Budget,
    seed: u64,
    config: &SpsaConfig,
    start: Option<&[f64]>,
) -> Result<OptimizerRun, OptimizerError> {
    budget.validate()?;
    let d = space.dimension();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = match start {
        Some(x) => space.clipped(x),
        None => space.sample(&mut rng),
    };

    let mut ev = Evaluator::new(f, budget);
    let width = space.mean_width();
    let c0 = config.c_frac * width;
    let iter_cap = budget.iter_cap().min(10_000_000);
    let stability = if iter_cap == u64::MAX {
        10.0
    } else {
        config.stability_frac * iter_cap as f64
    };

    let gradient_pair =
        |ev: &mut Evaluator, rng: &mut ChaCha8Rng, x: &[f64], c: f64| -> Option<Vec<f64>> {
            let delta: Vec<f64> = (0..d)
                .map(|_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 })
                .collect();
            let mut plus: Vec<f64> = x.iter().zip(&delta).map(|(xi, di)| xi + c * di).collect();
            let mut minus: Vec<f64> = x.iter().zip(&delta).map(|(xi, di)| xi - c * di).collect();
            space.clip(&mut plus);
            space.clip(&mut minus);
            let fp = ev.try_eval(&plus)?;
            let fm = ev.try_eval(&minus)?;
            Some(
                delta
                    .iter()
                    .map(|di| (fp - fm) / (2.0 * c * di))
                    .collect(),
            )
        };

    // Calibrate `a` so the first step moves about step_frac of the
    // space, using the average probe gradient magnitude.
    let mut magnitude_sum = 0.0;
    let mut probe_count = 0usize;
    for _ in 0..config.probes.max(1) {
        match gradient_pair(&mut ev, &mut rng, &x, c0) {
            Some(g) => {
                magnitude_sum += g.iter().map(|v| v.abs()).sum::<f64>() / d as f64;
                probe_count += 1;
            }
            None => return Ok(ev.finish("spsa", seed, vec![])),
        }
    }
    let mean_magnitude = (magnitude_sum / probe_count as f64).max(1e-12);
    let a = config.step_frac * width * (stability + 1.0).powf(config.a_exp) / mean_magnitude;

    let mut k = 0u64;
    while k < iter_cap && !ev.exhausted() {
        let ak = a / ((k as f64) + 1.0 + stability).powf(config.a_exp);
        let ck = c0 / ((k as f64) + 1.0).powf(config.c_exp);
        match gradient_pair(&mut ev, &mut rng, &x, ck) {
            Some(g) => {
                for (xi, gi) in x.iter_mut().zip(&g) {
                    *xi -= ak * gi;
                }
                space.clip(&mut x);
            }
            None => break,
        }
        k += 1;
    }

    Ok(ev.finish("spsa", seed, vec![]))
}
