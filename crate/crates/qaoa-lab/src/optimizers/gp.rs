//! Exact Gaussian-process regression with a squared-exponential kernel.
//!
//! The posterior has prior mean zero, per-dimension length scales and a
//! homoscedastic noise term. Fitting is a Cholesky factorization of the
//! kernel matrix with escalating diagonal jitter; queries solve against
//! the cached factor.

use super::OptimizerError;

/// Fitted GP posterior.
#[derive(Debug, Clone)]
pub struct GpSurrogate {
    points: Vec<Vec<f64>>,
    length_scales: Vec<f64>,
    signal_variance: f64,
    noise: f64,
    /// Lower Cholesky factor of K + (noise + jitter) I, row-major.
    chol: Vec<f64>,
    /// K^{-1} y via two triangular solves.
    alpha: Vec<f64>,
}

fn kernel(a: &[f64], b: &[f64], length_scales: &[f64], signal_variance: f64) -> f64 {
    let mut sq = 0.0;
    for ((ai, bi), l) in a.iter().zip(b).zip(length_scales) {
        let z = (ai - bi) / l;
        sq += z * z;
    }
    signal_variance * (-0.5 * sq).exp()
}

/// In-place lower Cholesky of a row-major symmetric matrix.
/// Fails on a non-positive pivot.
fn cholesky(matrix: &mut [f64], m: usize) -> Result<(), OptimizerError> {
    for i in 0..m {
        for j in 0..=i {
            let mut sum = matrix[i * m + j];
            for k in 0..j {
                sum -= matrix[i * m + k] * matrix[j * m + k];
            }
            if i == j {
                if sum <= 0.0 {
                    return Err(OptimizerError::Conditioning);
                }
                matrix[i * m + j] = sum.sqrt();
            } else {
                matrix[i * m + j] = sum / matrix[j * m + j];
            }
        }
        for j in (i + 1)..m {
            matrix[i * m + j] = 0.0;
        }
    }
    Ok(())
}

fn solve_lower(chol: &[f64], m: usize, rhs: &[f64]) -> Vec<f64> {
    let mut out = rhs.to_vec();
    for i in 0..m {
        for k in 0..i {
            out[i] = out[i] - chol[i * m + k] * out[k];
        }
        out[i] /= chol[i * m + i];
    }
    out
}

fn solve_upper_from_lower(chol: &[f64], m: usize, rhs: &[f64]) -> Vec<f64> {
    let mut out = rhs.to_vec();
    for i in (0..m).rev() {
        for k in (i + 1)..m {
            out[i] = out[i] - chol[k * m + i] * out[k];
        }
        out[i] /= chol[i * m + i];
    }
    out
}

/// Fit the exact GP posterior to observations.
///
/// Jitter starts at 1e-8 on the diagonal and escalates by factors of
/// ten; if the kernel matrix is still not positive definite at 1e-2 the
/// fit reports a conditioning error.
pub fn fit_surrogate(
    points: &[Vec<f64>],
    values: &[f64],
    length_scales: &[f64],
    signal_variance: f64,
    noise: f64,
) -> Result<GpSurrogate, OptimizerError> {
    if points.is_empty() {
        return Err(OptimizerError::Config("no training points".into()));
    }
    if points.len() != values.len() {
        return Err(OptimizerError::Config(format!(
            "{} points but {} values",
            points.len(),
            values.len()
        )));
    }
    let dim = points[0].len();
    if length_scales.len() != dim || points.iter().any(|p| p.len() != dim) {
        return Err(OptimizerError::Config("dimension mismatch".into()));
    }
    if length_scales.iter().any(|&l| l <= 0.0) || signal_variance < 0.0 || noise < 0.0 {
        return Err(OptimizerError::Config(
            "kernel hyperparameters must be positive".into(),
        ));
    }

    let m = points.len();
    let base: Vec<f64> = {
        let mut k = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..=i {
                let v = kernel(&points[i], &points[j], length_scales, signal_variance);
                k[i * m + j] = v;
                k[j * m + i] = v;
            }
        }
        k
    };

    let mut jitter = 1e-8;
    let chol = loop {
        let mut k = base.clone();
        for i in 0..m {
            k[i * m + i] += noise + jitter;
        }
        match cholesky(&mut k, m) {
            Ok(()) => break k,
            Err(_) if jitter < 1e-2 => jitter *= 10.0,
            Err(e) => return Err(e),
        }
    };

    let tmp = solve_lower(&chol, m, values);
    let alpha = solve_upper_from_lower(&chol, m, &tmp);
    Ok(GpSurrogate {
        points: points.to_vec(),
        length_scales: length_scales.to_vec(),
        signal_variance,
        noise,
        chol,
        alpha,
    })
}

impl GpSurrogate {
    pub fn n_points(&self) -> usize {
        self.points.len()
    }

    pub fn noise(&self) -> f64 {
        self.noise
    }

    fn cross(&self, x: &[f64]) -> Vec<f64> {
        self.points
            .iter()
            .map(|p| kernel(p, x, &self.length_scales, self.signal_variance))
            .collect()
    }

    /// Posterior mean at a query point (prior mean is zero, so queries
    /// far from all data revert to zero).
    pub fn posterior_mean(&self, x: &[f64]) -> f64 {
        self.cross(x)
            .iter()
            .zip(&self.alpha)
            .map(|(k, a)| k * a)
            .sum()
    }

    /// Posterior variance at a query point; clamped at zero.
    pub fn posterior_variance(&self, x: &[f64]) -> f64 {
        let k_star = self.cross(x);
        let v = solve_lower(&self.chol, self.points.len(), &k_star);
        let explained: f64 = v.iter().map(|vi| vi * vi).sum();
        (self.signal_variance - explained).max(0.0)
    }
}
