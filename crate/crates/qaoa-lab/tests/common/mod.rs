//! Reference dense-matrix simulator used as an independent oracle.
//!
//! Builds the full `2^n x 2^n` mixer matrix `sum_i X_i`, exponentiates
//! it with scaling-and-squaring Taylor series, and applies the layer
//! unitaries as dense matrix-vector products. No code is shared with
//! the fast simulator beyond the Hamiltonian coefficients.

use num_complex::Complex64;
use qaoa_lab::encoding::IsingHamiltonian;
use qaoa_lab::simulator::QaoaParams;

type Matrix = Vec<Vec<Complex64>>;

fn zeros(n: usize) -> Matrix {
    vec![vec![Complex64::new(0.0, 0.0); n]; n]
}

fn identity(n: usize) -> Matrix {
    let mut m = zeros(n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Complex64::new(1.0, 0.0);
    }
    m
}

fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    let mut out = zeros(n);
    for i in 0..n {
        for k in 0..n {
            let aik = a[i][k];
            if aik == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..n {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

fn matvec(a: &Matrix, v: &[Complex64]) -> Vec<Complex64> {
    a.iter()
        .map(|row| row.iter().zip(v).map(|(m, x)| m * x).sum())
        .collect()
}

/// Matrix exponential by scaling-and-squaring with a Taylor series.
fn expm(a: &Matrix) -> Matrix {
    let n = a.len();
    let norm: f64 = a
        .iter()
        .map(|row| row.iter().map(|c| c.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scale = 2.0f64.powi(squarings as i32);
    let scaled: Matrix = a
        .iter()
        .map(|row| row.iter().map(|c| c / scale).collect())
        .collect();

    let mut result = identity(n);
    let mut term = identity(n);
    for k in 1..=24 {
        term = matmul(&term, &scaled);
        let factor = Complex64::new(1.0 / (1..=k).map(|x| x as f64).product::<f64>(), 0.0);
        for i in 0..n {
            for j in 0..n {
                result[i][j] += factor * term[i][j];
            }
        }
    }
    for _ in 0..squarings {
        result = matmul(&result, &result);
    }
    result
}

/// The dense mixer `sum_i X_i` (X_i flips bit i).
fn mixer_matrix(n_qubits: usize) -> Matrix {
    let size = 1usize << n_qubits;
    let mut m = zeros(size);
    for x in 0..size {
        for q in 0..n_qubits {
            m[x ^ (1 << q)][x] += Complex64::new(1.0, 0.0);
        }
    }
    m
}

/// Amplitudes of the literal layered circuit: alternate the diagonal
/// phase `exp(-i gamma E(x))` and the dense `exp(-i beta H_M)`.
pub fn dense_amplitudes(ham: &IsingHamiltonian, params: &QaoaParams) -> Vec<Complex64> {
    let n = ham.n;
    let size = 1usize << n;
    let energies: Vec<f64> = (0..size).map(|x| ham.energy(x)).collect();
    let h_m = mixer_matrix(n);

    let amp = Complex64::new(1.0 / (size as f64).sqrt(), 0.0);
    let mut state = vec![amp; size];
    for layer in 0..params.layers() {
        let gamma = params.gamma[layer];
        for (x, a) in state.iter_mut().enumerate() {
            let phase = -gamma * energies[x];
            *a *= Complex64::new(phase.cos(), phase.sin());
        }
        let beta = params.beta[layer];
        let exponent: Matrix = h_m
            .iter()
            .map(|row| {
                row.iter()
                    .map(|c| Complex64::new(0.0, -beta) * c)
                    .collect()
            })
            .collect();
        let u_mixer = expm(&exponent);
        state = matvec(&u_mixer, &state);
    }
    state
}

/// Expectation of the Ising energy in the dense-simulated state.
pub fn dense_expectation(ham: &IsingHamiltonian, params: &QaoaParams) -> f64 {
    let state = dense_amplitudes(ham, params);
    state
        .iter()
        .enumerate()
        .map(|(x, a)| a.norm_sqr() * ham.energy(x))
        .sum()
}

/// Deterministic random Hamiltonian for oracle sweeps.
pub fn random_hamiltonian(n: usize, seed: u64) -> IsingHamiltonian {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let h: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let mut couplings = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen_bool(0.6) {
                couplings.push((i, j, rng.gen_range(-2.0..2.0)));
            }
        }
    }
    IsingHamiltonian {
        n,
        h,
        couplings,
        dropped_offset: rng.gen_range(-1.0..1.0),
    }
}

/// Deterministic random parameters within the standard box.
pub fn random_params(layers: usize, seed: u64) -> QaoaParams {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let beta: Vec<f64> = (0..layers)
        .map(|_| rng.gen_range(0.0..std::f64::consts::PI))
        .collect();
    let gamma: Vec<f64> = (0..layers)
        .map(|_| rng.gen_range(0.0..2.0 * std::f64::consts::PI))
        .collect();
    QaoaParams::new(beta, gamma).unwrap()
}
