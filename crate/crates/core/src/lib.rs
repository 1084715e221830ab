//! Minimum exact cover on an exact statevector simulator.
//!
//! Given a universe and a collection of candidate subsets, the library
//! reformulates minimum exact cover as maximization of a weighted
//! objective over independent sets of the pairwise conflict graph,
//! compiles that into an alternating operator circuit whose mixer
//! never leaves the feasible subspace, and optimizes the circuit
//! angles classically against exact simulation. Brute-force oracles,
//! a reproducible instance generator, and a sweep harness with CSV and
//! SVG output sit alongside; a tail-assignment variant adds per-set
//! costs to the objective.

pub mod ansatz;
pub mod error;
pub mod hamiltonian;
pub mod instancegen;
pub mod optimize;
pub mod oracle;
pub mod problem;
pub mod statevector;

pub use error::{Error, Result};
