//! Nelder-Mead downhill simplex.
//!
//! Standard reflection/expansion/contraction/shrink on a simplex of
//! `d + 1` points. One iteration is one simplex transformation. Every
//! candidate is clipped to the search space before evaluation, and the
//! run stops on budget exhaustion or when both the value spread and the
//! vertex spread fall below the tolerances.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Budget, Evaluator, OptimizerError, OptimizerRun, SearchSpace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NelderMeadConfig {
    /// Reflection coefficient.
    pub alpha: f64,
    /// Expansion coefficient.
    pub gamma: f64,
    /// Contraction coefficient.
    pub rho: f64,
    /// Shrink coefficient.
    pub sigma: f64,
    /// Initial simplex edge as a fraction of each bound width.
    pub simplex_scale: f64,
    /// Convergence tolerance on the vertex spread.
    pub xatol: f64,
    /// Convergence tolerance on the value spread.
    pub fatol: f64,
}

impl Default for NelderMeadConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            gamma: 2.0,
            rho: 0.5,
            sigma: 0.5,
            simplex_scale: 0.05,
            xatol: 1e-4,
            fatol: 1e-4,
        }
    }
}

pub(crate) fn run(
    f: &mut dyn FnMut(&[f64]) -> f64,
    space: &SearchSpace,
    budget: &Budget,
    seed: u64,
    config: &NelderMeadConfig,
    start: Option<&[f64]>,
) -> Result<OptimizerRun, OptimizerError> {
    budget.validate()?;
    let d = space.dimension();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x0 = match start {
        Some(x) => space.clipped(x),
        None => space.sample(&mut rng),
    };

    let mut ev = Evaluator::new(f, budget);

    // Initial simplex: x0 plus one offset vertex per axis. Offsets step
    // away from the nearer bound so no vertex collapses onto x0.
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(d + 1);
    let push = |ev: &mut Evaluator, simplex: &mut Vec<(Vec<f64>, f64)>, x: Vec<f64>| -> bool {
        match ev.try_eval(&x) {
            Some(v) => {
                simplex.push((x, v));
                true
            }
            None => false,
        }
    };
    if !push(&mut ev, &mut simplex, x0.clone()) {
        return Ok(ev.finish("nm", seed, vec![]));
    }
    for axis in 0..d {
        let mut x = x0.clone();
        let h = config.simplex_scale * space.width(axis);
        x[axis] = if x[axis] + h <= space.upper(axis) {
            x[axis] + h
        } else {
            x[axis] - h
        };
        if !push(&mut ev, &mut simplex, x) {
            return Ok(ev.finish("nm", seed, vec![]));
        }
    }

    let iter_cap = budget.iter_cap();
    let mut iters = 0u64;
    while iters < iter_cap && !ev.exhausted() {
        iters += 1;
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());

        let f_spread = simplex[d].1 - simplex[0].1;
        let x_spread = simplex[1..]
            .iter()
            .map(|(x, _)| {
                x.iter()
                    .zip(&simplex[0].0)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0f64, f64::max)
            })
            .fold(0.0f64, f64::max);
        if f_spread.abs() <= config.fatol && x_spread <= config.xatol {
            break;
        }

        // Centroid of all but the worst vertex.
        let mut centroid = vec![0.0; d];
        for (x, _) in simplex.iter().take(d) {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / d as f64;
            }
        }
        let worst = simplex[d].clone();

        let at = |coef: f64| -> Vec<f64> {
            let mut x: Vec<f64> = centroid
                .iter()
                .zip(&worst.0)
                .map(|(c, w)| c + coef * (c - w))
                .collect();
            space.clip(&mut x);
            x
        };

        let xr = at(config.alpha);
        let fr = match ev.try_eval(&xr) {
            Some(v) => v,
            None => break,
        };

        if fr < simplex[0].1 {
            // Try to expand further along the reflection direction.
            let xe = at(config.alpha * config.gamma);
            match ev.try_eval(&xe) {
                Some(fe) if fe < fr => simplex[d] = (xe, fe),
                Some(_) => simplex[d] = (xr, fr),
                None => {
                    simplex[d] = (xr, fr);
                    break;
                }
            }
        } else if fr < simplex[d - 1].1 {
            simplex[d] = (xr, fr);
        } else {
            // Contract outside or inside depending on the reflection.
            let (xc, reference) = if fr < worst.1 {
                (at(config.alpha * config.rho), fr)
            } else {
                (at(-config.rho), worst.1)
            };
            match ev.try_eval(&xc) {
                Some(fc) if fc < reference => simplex[d] = (xc, fc),
                Some(_) => {
                    // Shrink everything toward the best vertex.
                    let best = simplex[0].0.clone();
                    for k in 1..=d {
                        let mut x: Vec<f64> = simplex[k]
                            .0
                            .iter()
                            .zip(&best)
                            .map(|(v, b)| b + config.sigma * (v - b))
                            .collect();
                        space.clip(&mut x);
                        match ev.try_eval(&x) {
                            Some(v) => simplex[k] = (x, v),
                            None => break,
                        }
                    }
                }
                None => break,
            }
        }
    }

    Ok(ev.finish("nm", seed, vec![]))
}
