//! JSON schemas for ensembles, POVMs, and protocol trees.
//!
//! Complex numbers serialize as {"re": .., "im": ..}; matrices as lists of
//! rows. Deserialization always goes through the domain constructors, so a
//! file that parses but violates an invariant is rejected with the
//! constructor's error.

use crate::adaptive::{AdaptiveError, LocalInstrument, ProtocolNode, Qubit};
use crate::ensembles::{Ensemble, EnsembleError};
use crate::linalg::{Complex, Operator, StateVector};
use crate::measurements::{MeasurementError, Povm};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SerialError {
    #[error("JSON parse error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("matrix is not square: {rows} rows, row {index} has {cols} entries")]
    NotSquare {
        rows: usize,
        index: usize,
        cols: usize,
    },
    #[error("declared dim {declared} does not match data dim {found}")]
    DimMismatch { declared: usize, found: usize },
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
    #[error(transparent)]
    Measurement(#[from] MeasurementError),
    #[error(transparent)]
    Adaptive(#[from] AdaptiveError),
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ComplexJson {
    pub re: f64,
    pub im: f64,
}

impl From<Complex> for ComplexJson {
    fn from(c: Complex) -> Self {
        ComplexJson { re: c.re, im: c.im }
    }
}

impl From<ComplexJson> for Complex {
    fn from(c: ComplexJson) -> Self {
        Complex::new(c.re, c.im)
    }
}

type MatrixJson = Vec<Vec<ComplexJson>>;

fn matrix_to_json(op: &Operator) -> MatrixJson {
    (0..op.dim())
        .map(|i| (0..op.dim()).map(|j| op.get(i, j).into()).collect())
        .collect()
}

fn matrix_from_json(m: &MatrixJson) -> Result<Operator, SerialError> {
    let dim = m.len();
    let mut entries = Vec::with_capacity(dim * dim);
    for (index, row) in m.iter().enumerate() {
        if row.len() != dim {
            return Err(SerialError::NotSquare {
                rows: dim,
                index,
                cols: row.len(),
            });
        }
        entries.extend(row.iter().map(|&c| Complex::from(c)));
    }
    Ok(Operator::new(dim, entries).expect("entries sized to dim²"))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct EnsembleJson {
    pub dim: usize,
    pub states: Vec<Vec<ComplexJson>>,
    pub priors: Vec<f64>,
}

pub fn ensemble_to_json(e: &Ensemble) -> String {
    let doc = EnsembleJson {
        dim: e.dim(),
        states: e
            .states()
            .iter()
            .map(|s| s.amplitudes().iter().map(|&a| a.into()).collect())
            .collect(),
        priors: e.priors().to_vec(),
    };
    serde_json::to_string_pretty(&doc).expect("plain data serializes")
}

pub fn ensemble_from_json(text: &str) -> Result<Ensemble, SerialError> {
    let doc: EnsembleJson = serde_json::from_str(text)?;
    let states: Vec<StateVector> = doc
        .states
        .iter()
        .map(|amps| StateVector::new(amps.iter().map(|&c| Complex::from(c)).collect()))
        .collect();
    for s in &states {
        if s.dim() != doc.dim {
            return Err(SerialError::DimMismatch {
                declared: doc.dim,
                found: s.dim(),
            });
        }
    }
    Ok(Ensemble::new(states, doc.priors)?)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PovmJson {
    pub dim: usize,
    pub elements: Vec<MatrixJson>,
    pub labels: Vec<String>,
}

pub fn povm_to_json(p: &Povm) -> String {
    let doc = PovmJson {
        dim: p.dim(),
        elements: p.elements().iter().map(matrix_to_json).collect(),
        labels: p.labels().to_vec(),
    };
    serde_json::to_string_pretty(&doc).expect("plain data serializes")
}

pub fn povm_from_json(text: &str) -> Result<Povm, SerialError> {
    let doc: PovmJson = serde_json::from_str(text)?;
    let mut elements = Vec::with_capacity(doc.elements.len());
    for m in &doc.elements {
        let op = matrix_from_json(m)?;
        if op.dim() != doc.dim {
            return Err(SerialError::DimMismatch {
                declared: doc.dim,
                found: op.dim(),
            });
        }
        elements.push(op);
    }
    Ok(Povm::new(elements, doc.labels)?)
}

/// Protocol tree: internal nodes carry a qubit index (0 or 1), Kraus
/// matrices, and one child per outcome; leaves carry the output label.
#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProtocolJson {
    Leaf {
        leaf: String,
    },
    Node {
        qubit: usize,
        kraus: Vec<MatrixJson>,
        children: Vec<ProtocolJson>,
    },
}

pub fn protocol_to_json(node: &ProtocolNode) -> String {
    serde_json::to_string_pretty(&protocol_to_doc(node)).expect("plain data serializes")
}

fn protocol_to_doc(node: &ProtocolNode) -> ProtocolJson {
    match node {
        ProtocolNode::Leaf(label) => ProtocolJson::Leaf { leaf: label.clone() },
        ProtocolNode::Measure {
            instrument,
            children,
        } => ProtocolJson::Node {
            qubit: match instrument.qubit() {
                Qubit::First => 0,
                Qubit::Second => 1,
            },
            kraus: instrument.kraus().iter().map(matrix_to_json).collect(),
            children: children.iter().map(protocol_to_doc).collect(),
        },
    }
}

pub fn protocol_from_json(text: &str) -> Result<ProtocolNode, SerialError> {
    let doc: ProtocolJson = serde_json::from_str(text)?;
    protocol_from_doc(&doc)
}

fn protocol_from_doc(doc: &ProtocolJson) -> Result<ProtocolNode, SerialError> {
    match doc {
        ProtocolJson::Leaf { leaf } => Ok(ProtocolNode::Leaf(leaf.clone())),
        ProtocolJson::Node {
            qubit,
            kraus,
            children,
        } => {
            let qubit = if *qubit == 0 {
                Qubit::First
            } else {
                Qubit::Second
            };
            let kraus = kraus
                .iter()
                .map(matrix_from_json)
                .collect::<Result<Vec<_>, _>>()?;
            let instrument = LocalInstrument::new(qubit, kraus)?;
            let children = children
                .iter()
                .map(protocol_from_doc)
                .collect::<Result<Vec<_>, _>>()?;
            Ok(ProtocolNode::measure(instrument, children)?)
        }
    }
}
