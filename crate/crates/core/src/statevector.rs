//! Dense statevector simulation.
//!
//! Stores all 2^n amplitudes explicitly and provides exactly the two
//! gate families the alternating ansatz needs: a diagonal phase applied
//! from per-qubit coefficients, and a zero-controlled X rotation.
//!
//! Convention: qubit `i` is bit `i` of the basis index, so index 0 is
//! |0...0> and flipping qubit `i` toggles `1 << i` in the index.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest supported qubit count (2^24 amplitudes, 256 MiB).
pub const MAX_QUBITS: usize = 24;

#[derive(Debug, Clone, PartialEq)]
pub struct State {
    n: usize,
    amplitudes: Vec<Complex64>,
}

impl State {
    /// |0...0> on `n` qubits.
    pub fn init_zero(n: usize) -> Result<Self> {
        if n < 1 || n > MAX_QUBITS {
            return Err(Error::OutOfRange {
                what: "qubit count",
                value: n,
                min: 1,
                max: MAX_QUBITS,
            });
        }
        let mut amplitudes = vec![Complex64::ZERO; 1usize << n];
        amplitudes[0] = Complex64::ONE;
        Ok(State { n, amplitudes })
    }

    /// Wraps an explicit amplitude vector. The norm is not checked so
    /// that callers can build intermediate non-unit vectors.
    pub fn from_amplitudes(n: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if n < 1 || n > MAX_QUBITS {
            return Err(Error::OutOfRange {
                what: "qubit count",
                value: n,
                min: 1,
                max: MAX_QUBITS,
            });
        }
        if amplitudes.len() != 1usize << n {
            return Err(Error::ShapeMismatch {
                what: "amplitude vector",
                expected: 1usize << n,
                actual: amplitudes.len(),
            });
        }
        Ok(State { n, amplitudes })
    }

    /// Basis state |index> on `n` qubits.
    pub fn basis(n: usize, index: usize) -> Result<Self> {
        let mut state = State::init_zero(n)?;
        if index >= state.dim() {
            return Err(Error::IndexOutOfRange {
                what: "basis index",
                index,
                limit: state.dim(),
            });
        }
        state.amplitudes[0] = Complex64::ZERO;
        state.amplitudes[index] = Complex64::ONE;
        Ok(state)
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Applies exp(-i gamma H) for the diagonal H whose eigenvalue on
    /// basis index `b` is the sum of `coefficients[i]` over set bits of
    /// `b`. `coefficients` must have one entry per qubit.
    pub fn apply_phase_separator(&mut self, gamma: f64, coefficients: &[f64]) -> Result<()> {
        if coefficients.len() != self.n {
            return Err(Error::ShapeMismatch {
                what: "phase coefficients",
                expected: self.n,
                actual: coefficients.len(),
            });
        }
        for (index, amp) in self.amplitudes.iter_mut().enumerate() {
            let mut eigenvalue = 0.0;
            let mut bits = index;
            while bits != 0 {
                eigenvalue += coefficients[bits.trailing_zeros() as usize];
                bits &= bits - 1;
            }
            if eigenvalue != 0.0 {
                *amp *= Complex64::from_polar(1.0, -gamma * eigenvalue);
            }
        }
        Ok(())
    }

    /// X rotation by angle 2*beta on `target`, active only on basis
    /// pairs whose `zero_controls` bits are all clear. The 2x2 block is
    /// [[cos b, -i sin b], [-i sin b, cos b]].
    pub fn apply_partial_mixer(
        &mut self,
        target: usize,
        zero_controls: &[usize],
        beta: f64,
    ) -> Result<()> {
        if target >= self.n {
            return Err(Error::IndexOutOfRange {
                what: "mixer target qubit",
                index: target,
                limit: self.n,
            });
        }
        let mut control_mask = 0usize;
        for &control in zero_controls {
            if control >= self.n {
                return Err(Error::IndexOutOfRange {
                    what: "mixer control qubit",
                    index: control,
                    limit: self.n,
                });
            }
            if control == target {
                return Err(Error::IndexOutOfRange {
                    what: "mixer control equal to target qubit",
                    index: control,
                    limit: target,
                });
            }
            control_mask |= 1usize << control;
        }
        let target_bit = 1usize << target;
        let skip_mask = target_bit | control_mask;
        let cos = beta.cos();
        let neg_i_sin = Complex64::new(0.0, -beta.sin());
        for low in 0..self.amplitudes.len() {
            // Visit each active pair once via its target=0 member.
            if low & skip_mask != 0 {
                continue;
            }
            let high = low | target_bit;
            let a = self.amplitudes[low];
            let b = self.amplitudes[high];
            self.amplitudes[low] = cos * a + neg_i_sin * b;
            self.amplitudes[high] = neg_i_sin * a + cos * b;
        }
        Ok(())
    }

    /// <psi| D |psi> for a diagonal operator given as one real value
    /// per basis index.
    pub fn expectation_diagonal(&self, diagonal: &[f64]) -> Result<f64> {
        if diagonal.len() != self.amplitudes.len() {
            return Err(Error::ShapeMismatch {
                what: "diagonal operator",
                expected: self.amplitudes.len(),
                actual: diagonal.len(),
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(diagonal)
            .map(|(a, d)| a.norm_sqr() * d)
            .sum())
    }

    /// |<index|psi>|^2.
    pub fn probability_of(&self, index: usize) -> Result<f64> {
        self.amplitudes
            .get(index)
            .map(|a| a.norm_sqr())
            .ok_or(Error::IndexOutOfRange {
                what: "basis index",
                index,
                limit: self.amplitudes.len(),
            })
    }
}
