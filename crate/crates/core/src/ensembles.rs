//! Pure-state ensembles with priors, and the trine / double-trine
//! constructions.

use crate::linalg::{inner, tensor, StateVector, NORM_TOL};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnsembleError {
    #[error("priors not normalized: sum = {sum}")]
    PriorsNotNormalized { sum: f64 },
    #[error("prior {index} is negative: {value}")]
    NegativePrior { index: usize, value: f64 },
    #[error("state {index} is not normalized: norm² = {norm_sq}")]
    StateNotNormalized { index: usize, norm_sq: f64 },
    #[error("state {index} has dim {found}, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("got {states} states but {priors} priors")]
    LengthMismatch { states: usize, priors: usize },
    #[error("ensemble has no states")]
    Empty,
}

/// A finite list of pure states with prior probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    states: Vec<StateVector>,
    priors: Vec<f64>,
}

impl Ensemble {
    pub fn new(states: Vec<StateVector>, priors: Vec<f64>) -> Result<Self, EnsembleError> {
        if states.is_empty() {
            return Err(EnsembleError::Empty);
        }
        if states.len() != priors.len() {
            return Err(EnsembleError::LengthMismatch {
                states: states.len(),
                priors: priors.len(),
            });
        }
        let dim = states[0].dim();
        for (index, state) in states.iter().enumerate() {
            if state.dim() != dim {
                return Err(EnsembleError::DimensionMismatch {
                    index,
                    expected: dim,
                    found: state.dim(),
                });
            }
            if !state.is_normalized() {
                return Err(EnsembleError::StateNotNormalized {
                    index,
                    norm_sq: state.norm_sq(),
                });
            }
        }
        for (index, &p) in priors.iter().enumerate() {
            if p < 0.0 {
                return Err(EnsembleError::NegativePrior { index, value: p });
            }
        }
        let sum: f64 = priors.iter().sum();
        if (sum - 1.0).abs() > NORM_TOL {
            return Err(EnsembleError::PriorsNotNormalized { sum });
        }
        Ok(Ensemble { states, priors })
    }

    pub fn uniform(states: Vec<StateVector>) -> Result<Self, EnsembleError> {
        let n = states.len();
        if n == 0 {
            return Err(EnsembleError::Empty);
        }
        Self::new(states, vec![1.0 / n as f64; n])
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[StateVector] {
        &self.states
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }
}

/// The three trine states, phases chosen so every pairwise overlap is -1/2.
pub fn trine_states() -> [StateVector; 3] {
    let h = 3.0_f64.sqrt() / 2.0;
    [
        StateVector::from_reals(&[1.0, 0.0]),
        StateVector::from_reals(&[-0.5, -h]),
        StateVector::from_reals(&[-0.5, h]),
    ]
}

/// Trine ensemble on a single qubit, priors 1/3.
pub fn trine_ensemble() -> Ensemble {
    Ensemble::uniform(trine_states().to_vec()).expect("trine ensemble is valid")
}

/// The double-trine ensemble: |ψ_j⟩⊗|ψ_j⟩ with priors 1/3.
pub fn double_trine() -> Ensemble {
    let states = trine_states()
        .iter()
        .map(|psi| tensor(psi, psi).expect("trine states are qubits"))
        .collect();
    Ensemble::uniform(states).expect("double-trine ensemble is valid")
}

/// Gram matrix entry helper used in tests: ⟨state_i|state_j⟩.
pub fn gram_entry(e: &Ensemble, i: usize, j: usize) -> f64 {
    inner(&e.states()[i], &e.states()[j]).expect("equal dims").re
}
