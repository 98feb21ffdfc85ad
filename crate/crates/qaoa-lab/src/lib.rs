//! A laboratory for QAOA parameter optimization.
//!
//! The crate covers the full pipeline from combinatorial problem to
//! optimizer benchmark:
//!
//! * [`problems`] — unit commitment, traveling salesperson and factory
//!   layout instances with their cost and penalty functions,
//! * [`encoding`] — QUBO assembly, Ising conversion, the coefficient
//!   scaling heuristic, the adaptive penalty tuner and a brute-force
//!   spectrum oracle,
//! * [`simulator`] — exact and shot-based statevector evaluation of the
//!   QAOA objective C(β, γ),
//! * [`optimizers`] — budgeted derivative-free local (NM, Powell, SPSA,
//!   UMDA) and global (DE, BH, DA, Fast-Slow) optimizers,
//! * [`landscape`] — (β, γ) grid scans and random-plane projections of
//!   the cost landscape,
//! * [`bench`] — seeded multi-restart benchmark campaigns with
//!   normalized-cost aggregation.
//!
//! Everything is deterministic given explicit seeds: instance
//! generation, shot sampling, optimizer runs and benchmark campaigns
//! reproduce bit-identically.

pub mod bench;
pub mod encoding;
pub mod landscape;
pub mod optimizers;
pub mod problems;
pub mod seeds;
pub mod simulator;
