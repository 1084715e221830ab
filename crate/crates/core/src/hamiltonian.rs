//! Compilation of problem data into simulator ingredients.
//!
//! The objective Hamiltonian is diagonal, so it reduces to one real
//! coefficient per qubit: the phase picked up by basis index `b` is the
//! sum of coefficients over set bits of `b`, which reproduces the
//! objective value of the selection `b` exactly. The mixer is one
//! zero-controlled X rotation per vertex, controlled on the vertex's
//! conflict-graph neighbors so that transitions never leave the
//! independent-set subspace.

use crate::error::{Error, Result};
use crate::problem::{
    phase_coefficient_values, tail_phase_coefficient_values, ConflictGraph, Lambdas, MecInstance,
    TailInstance, TailLambdas,
};

/// One mixer factor: a zero-controlled X rotation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixerTerm {
    target: usize,
    zero_controls: Vec<usize>,
}

impl MixerTerm {
    pub fn new(target: usize, mut zero_controls: Vec<usize>) -> Result<Self> {
        zero_controls.sort_unstable();
        zero_controls.dedup();
        if zero_controls.contains(&target) {
            return Err(Error::IndexOutOfRange {
                what: "mixer control equal to target qubit",
                index: target,
                limit: target,
            });
        }
        Ok(MixerTerm {
            target,
            zero_controls,
        })
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn zero_controls(&self) -> &[usize] {
        &self.zero_controls
    }
}

/// Per-qubit eigenvalue contributions of the diagonal objective
/// Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseCoefficients(Vec<f64>);

impl PhaseCoefficients {
    pub fn new(coefficients: Vec<f64>) -> Self {
        PhaseCoefficients(coefficients)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

/// Phase coefficient for set i: lambda1 * |S_i| - lambda2.
pub fn phase_coefficients(instance: &MecInstance, lambdas: &Lambdas) -> PhaseCoefficients {
    PhaseCoefficients(phase_coefficient_values(instance, lambdas))
}

/// Phase coefficient for route i: lambda1 * |R_i| - lambda2 - lambda3 * c_i.
pub fn tail_phase_coefficients(tail: &TailInstance, lambdas: &TailLambdas) -> PhaseCoefficients {
    PhaseCoefficients(tail_phase_coefficient_values(tail, lambdas))
}

/// One term per vertex in ascending target order, each zero-controlled
/// on the vertex's neighbors. Fixing this order makes the (generally
/// non-commuting) mixer product well defined and reproducible.
pub fn mixer_terms(graph: &ConflictGraph) -> Vec<MixerTerm> {
    (0..graph.vertex_count())
        .map(|v| MixerTerm {
            target: v,
            zero_controls: graph.neighbors(v),
        })
        .collect()
}
