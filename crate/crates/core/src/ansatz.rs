//! The alternating operator ansatz: parameter containers, circuit
//! compilation, state evolution, and the two figures of merit
//! (objective expectation and solution overlap).
//!
//! A level-p circuit prepares, from |0...0>,
//!   prod_{k=1..p} [ U_M(beta_k) * U_P(gamma_k) ] |0...0>
//! where U_P is the diagonal objective phase and U_M the product of
//! neighbor-controlled X rotations in ascending target order. The
//! `Optimized` variant drops every U_P layer, halving the parameter
//! count; starting from |0...0> the first phase layer is a global
//! phase, and empirically the rest can be absorbed by re-optimizing
//! the betas.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::hamiltonian::{
    mixer_terms, phase_coefficients, tail_phase_coefficients, MixerTerm, PhaseCoefficients,
};
use crate::problem::{
    conflict_graph, tail_conflict_graph, Lambdas, MecInstance, TailInstance, TailLambdas,
};
use crate::statevector::{State, MAX_QUBITS};

/// Deepest supported circuit level.
pub const MAX_LEVEL: usize = 12;

/// Circuit shape: with or without the phase-separator layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    Original,
    Optimized,
}

impl Variant {
    /// Free parameters at level `p`: (gamma, beta) per layer for the
    /// original circuit, beta only for the optimized one.
    pub fn parameter_count(&self, p: usize) -> usize {
        match self {
            Variant::Original => 2 * p,
            Variant::Optimized => p,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Variant::Original => "original",
            Variant::Optimized => "optimized",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "original" => Ok(Variant::Original),
            "optimized" => Ok(Variant::Optimized),
            other => Err(Error::Format(format!(
                "unknown variant {other:?}, expected \"original\" or \"optimized\""
            ))),
        }
    }
}

/// Angles for one circuit: `gammas` is empty for the optimized variant
/// and has one entry per layer otherwise; `betas` always has one entry
/// per layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    gammas: Vec<f64>,
    betas: Vec<f64>,
}

impl Params {
    pub fn original(gammas: Vec<f64>, betas: Vec<f64>) -> Result<Self> {
        if gammas.len() != betas.len() {
            return Err(Error::ShapeMismatch {
                what: "gamma vector",
                expected: betas.len(),
                actual: gammas.len(),
            });
        }
        if betas.is_empty() {
            return Err(Error::OutOfRange {
                what: "circuit level",
                value: 0,
                min: 1,
                max: MAX_LEVEL,
            });
        }
        Ok(Params { gammas, betas })
    }

    pub fn optimized(betas: Vec<f64>) -> Result<Self> {
        if betas.is_empty() {
            return Err(Error::OutOfRange {
                what: "circuit level",
                value: 0,
                min: 1,
                max: MAX_LEVEL,
            });
        }
        Ok(Params {
            gammas: Vec::new(),
            betas,
        })
    }

    pub fn zeros(variant: Variant, p: usize) -> Result<Self> {
        match variant {
            Variant::Original => Params::original(vec![0.0; p], vec![0.0; p]),
            Variant::Optimized => Params::optimized(vec![0.0; p]),
        }
    }

    pub fn level(&self) -> usize {
        self.betas.len()
    }

    pub fn variant(&self) -> Variant {
        if self.gammas.is_empty() {
            Variant::Optimized
        } else {
            Variant::Original
        }
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    /// Reporting form: gammas folded into [0, 2pi), betas into [0, pi).
    /// The beta period is pi up to a relative phase that leaves both
    /// figures of merit unchanged; raw values should still be kept for
    /// warm starts.
    pub fn wrapped(&self) -> Params {
        Params {
            gammas: self.gammas.iter().map(|g| g.rem_euclid(TAU)).collect(),
            betas: self.betas.iter().map(|b| b.rem_euclid(PI)).collect(),
        }
    }

    /// Flat optimizer layout: all gammas, then all betas.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut flat = self.gammas.clone();
        flat.extend_from_slice(&self.betas);
        flat
    }

    pub fn from_flat(variant: Variant, p: usize, flat: &[f64]) -> Result<Self> {
        if flat.len() != variant.parameter_count(p) {
            return Err(Error::ShapeMismatch {
                what: "flat parameter vector",
                expected: variant.parameter_count(p),
                actual: flat.len(),
            });
        }
        match variant {
            Variant::Original => Params::original(flat[..p].to_vec(), flat[p..].to_vec()),
            Variant::Optimized => Params::optimized(flat.to_vec()),
        }
    }
}

/// A problem compiled to circuit form: phase coefficients, mixer terms,
/// variant, and level.
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledAnsatz {
    n: usize,
    phase: PhaseCoefficients,
    mixers: Vec<MixerTerm>,
    variant: Variant,
    p: usize,
}

impl CompiledAnsatz {
    pub fn new(
        phase: PhaseCoefficients,
        mixers: Vec<MixerTerm>,
        variant: Variant,
        p: usize,
    ) -> Result<Self> {
        let n = phase.len();
        if n < 1 || n > MAX_QUBITS {
            return Err(Error::OutOfRange {
                what: "qubit count",
                value: n,
                min: 1,
                max: MAX_QUBITS,
            });
        }
        if p < 1 || p > MAX_LEVEL {
            return Err(Error::OutOfRange {
                what: "circuit level",
                value: p,
                min: 1,
                max: MAX_LEVEL,
            });
        }
        for term in &mixers {
            if term.target() >= n {
                return Err(Error::IndexOutOfRange {
                    what: "mixer target qubit",
                    index: term.target(),
                    limit: n,
                });
            }
            if let Some(&control) = term.zero_controls().iter().find(|&&c| c >= n) {
                return Err(Error::IndexOutOfRange {
                    what: "mixer control qubit",
                    index: control,
                    limit: n,
                });
            }
        }
        Ok(CompiledAnsatz {
            n,
            phase,
            mixers,
            variant,
            p,
        })
    }

    /// Builds phase coefficients and mixer terms from an instance.
    pub fn compile(
        instance: &MecInstance,
        lambdas: &Lambdas,
        variant: Variant,
        p: usize,
    ) -> Result<Self> {
        let graph = conflict_graph(instance);
        CompiledAnsatz::new(
            phase_coefficients(instance, lambdas),
            mixer_terms(&graph),
            variant,
            p,
        )
    }

    pub fn compile_tail(
        tail: &TailInstance,
        lambdas: &TailLambdas,
        variant: Variant,
        p: usize,
    ) -> Result<Self> {
        let graph = tail_conflict_graph(tail);
        CompiledAnsatz::new(
            tail_phase_coefficients(tail, lambdas),
            mixer_terms(&graph),
            variant,
            p,
        )
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn level(&self) -> usize {
        self.p
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn phase(&self) -> &PhaseCoefficients {
        &self.phase
    }

    pub fn mixers(&self) -> &[MixerTerm] {
        &self.mixers
    }

    pub fn parameter_count(&self) -> usize {
        self.variant.parameter_count(self.p)
    }

    /// Same circuit at a different level.
    pub fn at_level(&self, p: usize) -> Result<Self> {
        CompiledAnsatz::new(self.phase.clone(), self.mixers.clone(), self.variant, p)
    }

    fn check_params(&self, params: &Params) -> Result<()> {
        if params.level() != self.p || params.variant() != self.variant {
            return Err(Error::ShapeMismatch {
                what: "parameter vector",
                expected: self.parameter_count(),
                actual: params.variant().parameter_count(params.level()),
            });
        }
        Ok(())
    }

    /// Runs the circuit on |0...0> and returns the final state.
    pub fn evolve(&self, params: &Params) -> Result<State> {
        self.check_params(params)?;
        let mut state = State::init_zero(self.n)?;
        for layer in 0..self.p {
            if self.variant == Variant::Original {
                state.apply_phase_separator(params.gammas[layer], self.phase.values())?;
            }
            for term in &self.mixers {
                state.apply_partial_mixer(
                    term.target(),
                    term.zero_controls(),
                    params.betas[layer],
                )?;
            }
        }
        Ok(state)
    }

    /// Objective expectation <psi|H_P|psi> against a precomputed
    /// objective diagonal.
    pub fn expectation(&self, params: &Params, diagonal: &[f64]) -> Result<f64> {
        self.evolve(params)?.expectation_diagonal(diagonal)
    }

    /// Probability of measuring the solution index.
    pub fn success_probability(&self, params: &Params, solution: usize) -> Result<f64> {
        self.evolve(params)?.probability_of(solution)
    }
}

/// Objective expectation recompiled from the instance; convenience
/// wrapper when no diagonal is cached.
pub fn f_p(
    ansatz: &CompiledAnsatz,
    params: &Params,
    instance: &MecInstance,
    lambdas: &Lambdas,
) -> Result<f64> {
    let diagonal = crate::problem::objective_diagonal(instance, lambdas)?;
    ansatz.expectation(params, &diagonal)
}
