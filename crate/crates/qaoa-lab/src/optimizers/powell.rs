//! Powell's direction-set method.
//!
//! One iteration line-minimizes along each direction in turn, then
//! applies Powell's replacement rule: if the cycle's net displacement
//! direction earns it, it replaces the direction of the largest single
//! decrease. Line searches are derivative-free golden-section searches
//! over the segment of the ray inside the bounds.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Budget, Evaluator, OptimizerError, OptimizerRun, SearchSpace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PowellConfig {
    /// Relative tolerance on the value decrease per iteration.
    pub ftol: f64,
    /// Line-search interval tolerance as a fraction of its length.
    pub line_tol: f64,
    /// Evaluation cap per line search.
    pub line_evals: usize,
}

impl Default for PowellConfig {
    fn default() -> Self {
        Self {
            ftol: 1e-4,
            line_tol: 1e-4,
            line_evals: 40,
        }
    }
}

/// Interval of `t` with `x + t * dir` inside the box.
fn ray_interval(space: &SearchSpace, x: &[f64], dir: &[f64]) -> (f64, f64) {
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for d in 0..space.dimension() {
        if dir[d] == 0.0 {
            continue;
        }
        let a = (space.lower(d) - x[d]) / dir[d];
        let b = (space.upper(d) - x[d]) / dir[d];
        lo = lo.max(a.min(b));
        hi = hi.min(a.max(b));
    }
    if lo > hi || !lo.is_finite() || !hi.is_finite() {
        (0.0, 0.0)
    } else {
        (lo, hi)
    }
}

/// Golden-section minimization of `f(x + t * dir)` over the in-box
/// segment. Returns the best `(t, value)` seen, including the endpoints
/// of the initial bracket.
fn line_search(
    ev: &mut Evaluator,
    space: &SearchSpace,
    x: &[f64],
    dir: &[f64],
    config: &PowellConfig,
    f_at_zero: f64,
) -> Option<(f64, f64)> {
    let (mut a, mut b) = ray_interval(space, x, dir);
    if a == b {
        return Some((0.0, f_at_zero));
    }
    let point = |t: f64| -> Vec<f64> {
        let mut p: Vec<f64> = x.iter().zip(dir).map(|(xi, di)| xi + t * di).collect();
        space.clip(&mut p);
        p
    };
    let mut best = (0.0, f_at_zero);
    let phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let tol = config.line_tol * (b - a);
    let mut t1 = b - phi * (b - a);
    let mut t2 = a + phi * (b - a);
    let mut f1 = ev.try_eval(&point(t1))?;
    let mut f2 = ev.try_eval(&point(t2))?;
    let mut evals = 2usize;
    if f1 < best.1 {
        best = (t1, f1);
    }
    if f2 < best.1 {
        best = (t2, f2);
    }
    while (b - a) > tol && evals < config.line_evals {
        if f1 <= f2 {
            b = t2;
            t2 = t1;
            f2 = f1;
            t1 = b - phi * (b - a);
            f1 = ev.try_eval(&point(t1))?;
            evals += 1;
            if f1 < best.1 {
                best = (t1, f1);
            }
        } else {
            a = t1;
            t1 = t2;
            f1 = f2;
            t2 = a + phi * (b - a);
            f2 = ev.try_eval(&point(t2))?;
            evals += 1;
            if f2 < best.1 {
                best = (t2, f2);
            }
        }
    }
    Some(best)
}

pub(crate) fn run(
    f: &mut dyn FnMut(&[f64]) -> f64,
    space: &SearchSpace,
    budget: &Budget,
    seed: u64,
    config: &PowellConfig,
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
    let mut fx = match ev.try_eval(&x) {
        Some(v) => v,
        None => return Ok(ev.finish("powell", seed, vec![])),
    };

    // Coordinate directions scaled by the bound widths.
    let mut directions: Vec<Vec<f64>> = (0..d)
        .map(|axis| {
            let mut dir = vec![0.0; d];
            dir[axis] = space.width(axis);
            dir
        })
        .collect();

    let iter_cap = budget.iter_cap();
    let mut iters = 0u64;
    'outer: while iters < iter_cap && !ev.exhausted() {
        iters += 1;
        let x_start = x.clone();
        let f_start = fx;
        let mut biggest_drop = 0.0;
        let mut biggest_idx = 0;

        for (idx, dir) in directions.iter().enumerate() {
            let before = fx;
            match line_search(&mut ev, space, &x, dir, config, fx) {
                Some((t, value)) if value < fx => {
                    for (xi, di) in x.iter_mut().zip(dir) {
                        *xi += t * di;
                    }
                    space.clip(&mut x);
                    fx = value;
                }
                Some(_) => {}
                None => break 'outer,
            }
            if before - fx > biggest_drop {
                biggest_drop = before - fx;
                biggest_idx = idx;
            }
        }

        // Convergence on the relative decrease over the full cycle.
        if 2.0 * (f_start - fx) <= config.ftol * (f_start.abs() + fx.abs()) + 1e-20 {
            break;
        }

        // Powell's replacement rule on the cycle displacement.
        let disp: Vec<f64> = x.iter().zip(&x_start).map(|(a, b)| a - b).collect();
        if disp.iter().all(|&v| v == 0.0) {
            continue;
        }
        let mut extrapolated: Vec<f64> =
            x.iter().zip(&x_start).map(|(a, b)| 2.0 * a - b).collect();
        space.clip(&mut extrapolated);
        let f_ex = match ev.try_eval(&extrapolated) {
            Some(v) => v,
            None => break,
        };
        if f_ex < f_start {
            let term1 = 2.0 * (f_start - 2.0 * fx + f_ex);
            let term2 = (f_start - fx - biggest_drop).powi(2);
            let term3 = biggest_drop * (f_start - f_ex).powi(2);
            if term1 * term2 < term3 {
                match line_search(&mut ev, space, &x, &disp, config, fx) {
                    Some((t, value)) if value < fx => {
                        for (xi, di) in x.iter_mut().zip(&disp) {
                            *xi += t * di;
                        }
                        space.clip(&mut x);
                        fx = value;
                        directions[biggest_idx] = disp;
                    }
                    Some(_) => {}
                    None => break,
                }
            }
        }
    }

    Ok(ev.finish("powell", seed, vec![]))
}
