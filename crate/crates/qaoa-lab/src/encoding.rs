//! QUBO assembly, Ising conversion and encoding heuristics.
//!
//! [`assemble`] expands the cost/penalty functions of a problem into an
//! explicit quadratic polynomial, [`qubo_to_ising`] converts it to spin
//! variables, [`scaling_factor`] implements the mean-coefficient
//! rescaling heuristic and [`tune_penalty`] the adaptive penalty-factor
//! loop. [`brute_force`] enumerates the full spectrum and is the ground
//! truth for minimal costs throughout the crate.
//!
//! Spin convention: bit 1 maps to spin -1, i.e. `x = (1 - z) / 2`.

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::problems::ProblemFunctions;

/// Hard cap for exhaustive enumeration (table of `2^n` energies).
pub const ENUMERATION_LIMIT: usize = 24;
/// Cap for the penalty tuner, which scans all bitstrings repeatedly.
pub const TUNER_LIMIT: usize = 20;

#[derive(Debug, Error)]
pub enum EncodingError {
    #[error("cost or penalty function has degree > 2 (mismatch {mismatch:.3e} at bitstring {at})")]
    NonQuadratic { at: usize, mismatch: f64 },
    #[error("scaling factor must be positive, got {0}")]
    InvalidScaling(f64),
    #[error("expected {expected} penalty factors, got {got}")]
    PenaltyCount { expected: usize, got: usize },
    #[error("all Ising coefficients are zero; scale undefined")]
    UndefinedScale,
    #[error("problem has no valid solution")]
    Infeasible,
    #[error("internal consistency: {0}")]
    Inconsistent(String),
    #[error("{n} variables exceed the enumeration limit of {limit}")]
    CapacityExceeded { n: usize, limit: usize },
}

// ---------------------------------------------------------------------------
// QUBO
// ---------------------------------------------------------------------------

/// Explicit quadratic polynomial over binary variables.
///
/// `value(x)` reproduces `s * (H_cost(x) + sum_j P_j * H_pen_j(x))` for
/// the functions it was assembled from. Quadratic coefficients are
/// stored sparsely with `i < j`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuboProblem {
    pub n: usize,
    pub linear: Vec<f64>,
    pub quadratic: Vec<(usize, usize, f64)>,
    pub constant: f64,
    /// Scaling factor the coefficients already include.
    pub s: f64,
    /// Penalty factors the coefficients already include.
    pub penalty_factors: Vec<f64>,
}

impl QuboProblem {
    /// Evaluate the polynomial at a bitstring.
    pub fn value(&self, x: usize) -> f64 {
        let mut total = self.constant;
        for (i, &l) in self.linear.iter().enumerate() {
            if (x >> i) & 1 == 1 {
                total += l;
            }
        }
        for &(i, j, q) in &self.quadratic {
            if (x >> i) & 1 == 1 && (x >> j) & 1 == 1 {
                total += q;
            }
        }
        total
    }

    /// True if every coefficient (including the constant) is zero.
    pub fn is_constant_zero_polynomial(&self) -> bool {
        self.linear.iter().all(|&l| l == 0.0) && self.quadratic.iter().all(|&(_, _, q)| q == 0.0)
    }
}

/// Expand problem functions into an explicit [`QuboProblem`].
///
/// The expansion evaluates the combined function on the empty, one-bit
/// and two-bit basis states, which is exact for polynomials of degree
/// at most two. Degree is then verified on all three-bit states and the
/// all-ones state; any mismatch reports a non-quadratic input.
pub fn assemble(
    funcs: &ProblemFunctions,
    penalty_factors: &[f64],
    s: f64,
) -> Result<QuboProblem, EncodingError> {
    if !(s > 0.0) {
        return Err(EncodingError::InvalidScaling(s));
    }
    if penalty_factors.len() != funcs.n_penalties() {
        return Err(EncodingError::PenaltyCount {
            expected: funcs.n_penalties(),
            got: penalty_factors.len(),
        });
    }
    let n = funcs.n();
    let g = |x: usize| -> f64 {
        let mut v = funcs.cost(x);
        for (j, &p) in penalty_factors.iter().enumerate() {
            v += p * funcs.penalty(j, x);
        }
        v
    };

    let constant = g(0);
    let mut maxabs = constant.abs();
    let linear: Vec<f64> = (0..n)
        .map(|i| {
            let v = g(1 << i);
            maxabs = maxabs.max(v.abs());
            v - constant
        })
        .collect();
    let mut quadratic = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = g((1 << i) | (1 << j));
            maxabs = maxabs.max(v.abs());
            let q = v - constant - linear[i] - linear[j];
            quadratic.push((i, j, q));
        }
    }

    // Reconstruction residues on the basis points are pure rounding
    // noise; anything below this threshold is treated as a zero
    // coefficient so it cannot pollute the scaling heuristic.
    let dust = maxabs.max(1.0) * 1e-12;
    let linear: Vec<f64> = linear
        .into_iter()
        .map(|l| if l.abs() <= dust { 0.0 } else { l })
        .collect();
    let quadratic: Vec<(usize, usize, f64)> = quadratic
        .into_iter()
        .filter(|&(_, _, q)| q.abs() > dust)
        .collect();

    let qubo = QuboProblem {
        n,
        linear,
        quadratic,
        constant,
        s: 1.0,
        penalty_factors: penalty_factors.to_vec(),
    };

    // Degree check: a cubic monomial first materializes on a three-bit
    // state, so checking all of them plus the all-ones state exposes
    // higher-order terms.
    let tol = maxabs.max(1.0) * 1e-9;
    let check = |x: usize| -> Result<(), EncodingError> {
        let expected = g(x);
        let got = qubo.value(x);
        if (expected - got).abs() > tol {
            return Err(EncodingError::NonQuadratic {
                at: x,
                mismatch: (expected - got).abs(),
            });
        }
        Ok(())
    };
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                check((1 << i) | (1 << j) | (1 << k))?;
            }
        }
    }
    if n >= 1 {
        check((1usize << n) - 1)?;
    }

    // Apply the scaling factor coefficientwise so that scaling by k*s
    // is exactly k times scaling by s.
    Ok(QuboProblem {
        n: qubo.n,
        linear: qubo.linear.iter().map(|l| l * s).collect(),
        quadratic: qubo
            .quadratic
            .iter()
            .map(|&(i, j, q)| (i, j, q * s))
            .collect(),
        constant: qubo.constant * s,
        s,
        penalty_factors: qubo.penalty_factors,
    })
}

// ---------------------------------------------------------------------------
// Ising
// ---------------------------------------------------------------------------

/// Ising form of a QUBO: couplings `J_ij` (i < j), fields `h_i` and the
/// constant removed from the energies.
///
/// For every bitstring, `energy(x) + dropped_offset` equals the QUBO
/// value at `x` under the convention bit 1 <-> spin -1.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IsingHamiltonian {
    pub n: usize,
    pub h: Vec<f64>,
    pub couplings: Vec<(usize, usize, f64)>,
    pub dropped_offset: f64,
}

impl IsingHamiltonian {
    /// Energy of one bitstring (offset dropped).
    pub fn energy(&self, x: usize) -> f64 {
        let spin = |i: usize| if (x >> i) & 1 == 1 { -1.0 } else { 1.0 };
        let mut e = 0.0;
        for (i, &hi) in self.h.iter().enumerate() {
            e += hi * spin(i);
        }
        for &(i, j, jij) in &self.couplings {
            e += jij * spin(i) * spin(j);
        }
        e
    }

    /// All nonzero coefficient magnitudes (fields then couplings).
    pub fn nonzero_magnitudes(&self) -> impl Iterator<Item = f64> + '_ {
        self.h
            .iter()
            .copied()
            .chain(self.couplings.iter().map(|&(_, _, j)| j))
            .filter(|&c| c != 0.0)
            .map(f64::abs)
    }

    /// Energies of all `2^n` bitstrings, indexed by state.
    ///
    /// Enumerates in Gray-code order so each step updates the energy
    /// incrementally from a single spin flip.
    pub fn energy_table(&self) -> Result<Vec<f64>, EncodingError> {
        if self.n > ENUMERATION_LIMIT {
            return Err(EncodingError::CapacityExceeded {
                n: self.n,
                limit: ENUMERATION_LIMIT,
            });
        }
        let n = self.n;
        let size = 1usize << n;
        // Adjacency view of the couplings for O(degree) flip updates.
        let mut neighbors: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(i, j, jij) in &self.couplings {
            neighbors[i].push((j, jij));
            neighbors[j].push((i, jij));
        }
        let mut table = vec![0.0; size];
        let mut spins = vec![1.0f64; n];
        let mut energy: f64 = self.h.iter().sum::<f64>()
            + self.couplings.iter().map(|&(_, _, j)| j).sum::<f64>();
        table[0] = energy;
        let mut gray_prev = 0usize;
        for t in 1..size {
            let gray = t ^ (t >> 1);
            let flipped = (gray ^ gray_prev).trailing_zeros() as usize;
            let mut local = self.h[flipped];
            for &(j, jij) in &neighbors[flipped] {
                local += jij * spins[j];
            }
            energy -= 2.0 * spins[flipped] * local;
            spins[flipped] = -spins[flipped];
            table[gray] = energy;
            gray_prev = gray;
        }
        Ok(table)
    }
}

/// Convert a QUBO to Ising form via `x_i = (1 - z_i) / 2`.
pub fn qubo_to_ising(qubo: &QuboProblem) -> IsingHamiltonian {
    let n = qubo.n;
    let mut h = vec![0.0; n];
    let mut offset = qubo.constant;
    let mut couplings = Vec::with_capacity(qubo.quadratic.len());
    for (i, &l) in qubo.linear.iter().enumerate() {
        // l * x_i = l/2 - l/2 * z_i
        offset += l / 2.0;
        h[i] -= l / 2.0;
    }
    for &(i, j, q) in &qubo.quadratic {
        // q * x_i x_j = q/4 * (1 - z_i - z_j + z_i z_j)
        offset += q / 4.0;
        h[i] -= q / 4.0;
        h[j] -= q / 4.0;
        couplings.push((i, j, q / 4.0));
    }
    couplings.retain(|&(_, _, j)| j != 0.0);
    IsingHamiltonian {
        n,
        h,
        couplings,
        dropped_offset: offset,
    }
}

/// Rescaling heuristic: the factor that makes the mean absolute
/// magnitude of the nonzero Ising coefficients equal to one.
pub fn scaling_factor(ham: &IsingHamiltonian) -> Result<f64, EncodingError> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for m in ham.nonzero_magnitudes() {
        sum += m;
        count += 1;
    }
    if count == 0 {
        return Err(EncodingError::UndefinedScale);
    }
    Ok(count as f64 / sum)
}

// ---------------------------------------------------------------------------
// Adaptive penalty tuning
// ---------------------------------------------------------------------------

/// Result of the adaptive penalty loop: the tuned factor plus the
/// per-iteration increments for inspection.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PenaltyTuning {
    /// Tuned factor, shared across all penalty families of the problem.
    pub penalty: f64,
    /// Increment applied at each iteration.
    pub steps: Vec<f64>,
    /// Target threshold `(H_min_opt + H_mean_valid) / 2`.
    pub threshold: f64,
    /// Cheapest invalid value at the returned factor.
    pub min_wrong: f64,
}

/// Iteratively raise the penalty factor until the cheapest invalid
/// solution costs at least the midpoint of the optimal and the mean
/// valid cost.
///
/// All penalty families share the single returned factor. Each round
/// lifts the currently cheapest invalid solution exactly onto the
/// threshold; the increment over the previous factor is recorded in
/// `steps`. The update is applied in closed form (new factor =
/// (threshold - cost) / penalty of the cheapest wrong solution), which
/// is algebraically the same as accumulating increments but avoids
/// compounding rounding error.
pub fn tune_penalty(funcs: &ProblemFunctions) -> Result<PenaltyTuning, EncodingError> {
    let n = funcs.n();
    if n > TUNER_LIMIT {
        return Err(EncodingError::CapacityExceeded {
            n,
            limit: TUNER_LIMIT,
        });
    }
    let size = 1usize << n;
    let mut valid_cost = Vec::new();
    let mut wrong = Vec::new(); // (cost, total penalty) per invalid bitstring
    for x in 0..size {
        if funcs.is_valid(x) {
            valid_cost.push(funcs.cost(x));
        } else {
            wrong.push((funcs.cost(x), funcs.total_penalty(x)));
        }
    }
    if valid_cost.is_empty() {
        return Err(EncodingError::Infeasible);
    }
    // Valid solutions have zero penalty, so both statistics are
    // independent of the factor and fixed once.
    let min_opt = valid_cost.iter().copied().fold(f64::INFINITY, f64::min);
    let mean_valid = valid_cost.iter().sum::<f64>() / valid_cost.len() as f64;
    let threshold = 0.5 * (min_opt + mean_valid);

    let mut penalty = 0.0;
    let mut steps = Vec::new();
    loop {
        let mut min_wrong = f64::INFINITY;
        let mut cheapest = None;
        for &(cost, pen) in &wrong {
            let v = cost + penalty * pen;
            if v < min_wrong {
                min_wrong = v;
                cheapest = Some((cost, pen));
            }
        }
        if min_wrong >= threshold {
            return Ok(PenaltyTuning {
                penalty,
                steps,
                threshold,
                min_wrong,
            });
        }
        let (cost, pen) = cheapest.expect("nonempty wrong set");
        if pen <= 0.0 {
            return Err(EncodingError::Inconsistent(format!(
                "invalid solution with zero penalty (cost {cost})"
            )));
        }
        let mut next = (threshold - cost) / pen;
        // Rounding can leave the lifted solution an ulp below the
        // threshold, which would stall the loop; bump until it clears
        // under the same arithmetic the termination check uses.
        while cost + next * pen < threshold {
            next = f64::from_bits(next.to_bits() + 1);
        }
        steps.push(next - penalty);
        penalty = next;
    }
}

// ---------------------------------------------------------------------------
// Brute-force spectrum
// ---------------------------------------------------------------------------

/// Exhaustive Ising spectrum: all energies, the minimum and every
/// minimizing bitstring (lexicographically smallest first).
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub energies: Vec<f64>,
    pub min_energy: f64,
    pub argmin: Vec<usize>,
}

/// Enumerate all `2^n` energies (offset dropped).
pub fn brute_force(ham: &IsingHamiltonian) -> Result<Spectrum, EncodingError> {
    let energies = ham.energy_table()?;
    let min_energy = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let argmin: Vec<usize> = energies
        .iter()
        .enumerate()
        .filter(|&(_, &e)| e == min_energy)
        .map(|(x, _)| x)
        .collect();
    Ok(Spectrum {
        energies,
        min_energy,
        argmin,
    })
}

impl Spectrum {
    /// Write `bitstring,energy` rows.
    pub fn write_csv<W: Write>(&self, mut w: W, n: usize) -> std::io::Result<()> {
        writeln!(w, "bitstring,energy")?;
        for (x, e) in self.energies.iter().enumerate() {
            writeln!(w, "{:0width$b},{}", x, e, width = n)?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Encoding pipeline (policy resolution)
// ---------------------------------------------------------------------------

/// How to pick the scaling factor.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "lowercase")]
pub enum ScalingPolicy {
    /// Mean-coefficient heuristic via [`scaling_factor`].
    Auto,
    Fixed(f64),
}

/// How to pick the penalty factors.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "lowercase")]
pub enum PenaltyPolicy {
    /// Adaptive loop via [`tune_penalty`]; the tuned value is shared
    /// across all penalty families.
    Auto,
    Fixed(Vec<f64>),
}

/// Fully resolved encoding of one problem.
#[derive(Debug, Clone)]
pub struct EncodedProblem {
    pub qubo: QuboProblem,
    pub ising: IsingHamiltonian,
    pub s: f64,
    pub penalty_factors: Vec<f64>,
    /// Present when the penalty policy was `Auto`.
    pub tuning: Option<PenaltyTuning>,
}

/// Resolve penalty and scaling policies and assemble the final QUBO and
/// Ising forms.
///
/// Penalties are tuned first on the unscaled problem (the tuner's
/// inequality is invariant under positive scaling), then the scaling
/// heuristic runs on the resulting Ising coefficients.
pub fn encode(
    funcs: &ProblemFunctions,
    penalty: &PenaltyPolicy,
    scaling: &ScalingPolicy,
) -> Result<EncodedProblem, EncodingError> {
    let (penalty_factors, tuning) = match penalty {
        PenaltyPolicy::Auto => {
            let tuning = tune_penalty(funcs)?;
            (vec![tuning.penalty; funcs.n_penalties()], Some(tuning))
        }
        PenaltyPolicy::Fixed(p) => (p.clone(), None),
    };
    let s = match scaling {
        ScalingPolicy::Auto => {
            let unscaled = assemble(funcs, &penalty_factors, 1.0)?;
            scaling_factor(&qubo_to_ising(&unscaled))?
        }
        ScalingPolicy::Fixed(s) => *s,
    };
    let qubo = assemble(funcs, &penalty_factors, s)?;
    let ising = qubo_to_ising(&qubo);
    Ok(EncodedProblem {
        qubo,
        ising,
        s,
        penalty_factors,
        tuning,
    })
}
