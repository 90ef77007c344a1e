//! Measurement design and information analysis for the double-trine
//! discrimination problem: exact constructions of the entangled and
//! unentangled optimal measurements, mutual-information evaluation,
//! concurrence, adaptive local-protocol simulation, and derivative-free
//! search over POVM space.

pub mod adaptive;
pub mod ensembles;
pub mod linalg;
pub mod measurements;
pub mod optimizer;
pub mod serial;
pub mod statistics;

pub use ensembles::{double_trine, trine_ensemble, trine_states, Ensemble};
pub use linalg::{Complex, Operator, StateVector};
pub use measurements::{
    classify_povm, concurrence, concurrence_signed, cyclic_unitary, entangled_basis_povm,
    nine_outcome_product_povm, single_qubit_trine_povm, six_outcome_povm,
    six_outcome_unentangled_povm, Povm, PovmClass,
};
pub use statistics::{mutual_information, outcome_probabilities, shannon_entropy};
pub mod cli;
