//! Exact evaluation of finite adaptive local-measurement protocols on
//! two-qubit product-state ensembles.
//!
//! A protocol is a finite tree: each internal node applies a Kraus
//! instrument to one qubit and branches on the outcome; leaves carry the
//! protocol's classical output label. Because the ensemble states are
//! products and all operations are local, the two qubit states are tracked
//! separately and every branch probability is computed exactly.

use crate::ensembles::Ensemble;
use crate::linalg::{hermitian_sqrt, Complex, LinalgError, Operator, StateVector};
use crate::measurements::{concurrence, MeasurementError, Povm, CONCURRENCE_TOL};
use crate::optimizer::{decode_global_seeds, nelder_mead, NelderMeadOptions, SEED_REALS_DIM2};
use crate::statistics::{mutual_information, JointDistribution, StatisticsError};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use thiserror::Error;

/// Default cap on measurement rounds along any root-to-leaf path.
pub const DEFAULT_MAX_DEPTH: usize = 6;

#[derive(Debug, Error)]
pub enum AdaptiveError {
    #[error("Kraus operators do not satisfy Σ K†K = I: defect {defect}")]
    IncompleteKraus { defect: f64 },
    #[error("Kraus operator {index} has dim {found}, expected 2")]
    BadKrausDim { index: usize, found: usize },
    #[error("instrument has no Kraus operators")]
    EmptyInstrument,
    #[error("node has {children} children but {outcomes} Kraus outcomes")]
    ChildCountMismatch { children: usize, outcomes: usize },
    #[error("protocol exceeds the depth limit of {limit} rounds")]
    TooDeep { limit: usize },
    #[error("ensemble state {index} is entangled (concurrence {concurrence}); product tracking is invalid")]
    EntangledState { index: usize, concurrence: f64 },
    #[error("ensemble must consist of two-qubit states, got dim {0}")]
    NotTwoQubit(usize),
    #[error("leaf probabilities for state {index} sum to {sum}")]
    ProbabilityLeak { index: usize, sum: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Measurement(#[from] MeasurementError),
    #[error(transparent)]
    Statistics(#[from] StatisticsError),
    #[error(transparent)]
    Optimizer(#[from] Box<crate::optimizer::OptimizerError>),
}

impl From<crate::optimizer::OptimizerError> for AdaptiveError {
    fn from(e: crate::optimizer::OptimizerError) -> Self {
        AdaptiveError::Optimizer(Box::new(e))
    }
}

/// Which qubit an instrument acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Qubit {
    First,
    Second,
}

/// A local measurement given by Kraus operators on one qubit.
#[derive(Debug, Clone)]
pub struct LocalInstrument {
    qubit: Qubit,
    kraus: Vec<Operator>,
}

impl LocalInstrument {
    pub fn new(qubit: Qubit, kraus: Vec<Operator>) -> Result<Self, AdaptiveError> {
        if kraus.is_empty() {
            return Err(AdaptiveError::EmptyInstrument);
        }
        let mut sum = Operator::zeros(2);
        for (index, k) in kraus.iter().enumerate() {
            if k.dim() != 2 {
                return Err(AdaptiveError::BadKrausDim {
                    index,
                    found: k.dim(),
                });
            }
            sum = sum.add(&k.adjoint().mul(k)?)?;
        }
        let defect = sum.sub(&Operator::identity(2))?.frobenius_norm();
        if defect > 1e-10 {
            return Err(AdaptiveError::IncompleteKraus { defect });
        }
        Ok(LocalInstrument { qubit, kraus })
    }

    /// Canonical Kraus set K_k = √Π_k for a dim-2 POVM.
    pub fn from_povm(qubit: Qubit, povm: &Povm) -> Result<Self, AdaptiveError> {
        let kraus = povm
            .elements()
            .iter()
            .map(hermitian_sqrt)
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(qubit, kraus)
    }

    pub fn qubit(&self) -> Qubit {
        self.qubit
    }

    pub fn kraus(&self) -> &[Operator] {
        &self.kraus
    }
}

/// A node of a protocol tree.
#[derive(Debug, Clone)]
pub enum ProtocolNode {
    /// Classical output label.
    Leaf(String),
    /// Apply the instrument, then continue in the child matching the outcome.
    Measure {
        instrument: LocalInstrument,
        children: Vec<ProtocolNode>,
    },
}

impl ProtocolNode {
    pub fn measure(
        instrument: LocalInstrument,
        children: Vec<ProtocolNode>,
    ) -> Result<Self, AdaptiveError> {
        if children.len() != instrument.kraus().len() {
            return Err(AdaptiveError::ChildCountMismatch {
                children: children.len(),
                outcomes: instrument.kraus().len(),
            });
        }
        Ok(ProtocolNode::Measure {
            instrument,
            children,
        })
    }

    pub fn depth(&self) -> usize {
        match self {
            ProtocolNode::Leaf(_) => 0,
            ProtocolNode::Measure { children, .. } => {
                1 + children.iter().map(|c| c.depth()).max().unwrap_or(0)
            }
        }
    }

    fn collect_labels(&self, labels: &mut Vec<String>) {
        match self {
            ProtocolNode::Leaf(label) => {
                if !labels.iter().any(|l| l == label) {
                    labels.push(label.clone());
                }
            }
            ProtocolNode::Measure { children, .. } => {
                for child in children {
                    child.collect_labels(labels);
                }
            }
        }
    }

    pub fn labels(&self) -> Vec<String> {
        let mut labels = Vec::new();
        self.collect_labels(&mut labels);
        labels
    }
}

/// Split a two-qubit product state into its single-qubit factors.
pub fn factor_product_state(v: &StateVector) -> Result<(StateVector, StateVector), AdaptiveError> {
    if v.dim() != 4 {
        return Err(AdaptiveError::NotTwoQubit(v.dim()));
    }
    let amps = v.amplitudes();
    // reshape into the 2x2 matrix m[i][j] = v[2i+j] = a_i b_j
    let m = |i: usize, j: usize| amps[2 * i + j];
    let (mut i0, mut j0, mut best) = (0usize, 0usize, 0.0f64);
    for i in 0..2 {
        for j in 0..2 {
            if m(i, j).norm() > best {
                best = m(i, j).norm();
                (i0, j0) = (i, j);
            }
        }
    }
    let a = StateVector::new(vec![m(0, j0), m(1, j0)]).normalized()?;
    let b = StateVector::new(vec![m(i0, 0), m(i0, 1)]).normalized()?;
    // fix the relative phase so a⊗b reproduces v at the anchor entry
    let anchor = a.amplitudes()[i0] * b.amplitudes()[j0];
    let phase = m(i0, j0) / anchor;
    Ok((a, b.scale(phase)))
}

fn accumulate(
    node: &ProtocolNode,
    q1: &StateVector,
    q2: &StateVector,
    prob: f64,
    out: &mut HashMap<String, f64>,
) -> Result<(), AdaptiveError> {
    match node {
        ProtocolNode::Leaf(label) => {
            *out.entry(label.clone()).or_insert(0.0) += prob;
        }
        ProtocolNode::Measure {
            instrument,
            children,
        } => {
            for (k, child) in instrument.kraus().iter().zip(children) {
                let (target, other) = match instrument.qubit() {
                    Qubit::First => (q1, q2),
                    Qubit::Second => (q2, q1),
                };
                let updated = k.apply(target)?;
                let branch = updated.norm_sq();
                if branch * prob < 1e-300 {
                    continue;
                }
                let normalized = updated.scale(Complex::new(1.0 / branch.sqrt(), 0.0));
                let (new_q1, new_q2) = match instrument.qubit() {
                    Qubit::First => (normalized, other.clone()),
                    Qubit::Second => (other.clone(), normalized),
                };
                accumulate(child, &new_q1, &new_q2, prob * branch, out)?;
            }
        }
    }
    Ok(())
}

/// Exact outcome statistics of a protocol on a product-state ensemble.
pub fn run_protocol(
    ensemble: &Ensemble,
    root: &ProtocolNode,
) -> Result<JointDistribution, AdaptiveError> {
    run_protocol_with_depth(ensemble, root, DEFAULT_MAX_DEPTH)
}

pub fn run_protocol_with_depth(
    ensemble: &Ensemble,
    root: &ProtocolNode,
    max_depth: usize,
) -> Result<JointDistribution, AdaptiveError> {
    if ensemble.dim() != 4 {
        return Err(AdaptiveError::NotTwoQubit(ensemble.dim()));
    }
    if root.depth() > max_depth {
        return Err(AdaptiveError::TooDeep { limit: max_depth });
    }
    let labels = root.labels();
    let mut rows = Vec::with_capacity(ensemble.len());
    for (index, (state, &prior)) in ensemble
        .states()
        .iter()
        .zip(ensemble.priors())
        .enumerate()
    {
        let c = concurrence(state)?;
        if c > CONCURRENCE_TOL {
            return Err(AdaptiveError::EntangledState {
                index,
                concurrence: c,
            });
        }
        let (q1, q2) = factor_product_state(state)?;
        let mut leaf_probs = HashMap::new();
        accumulate(root, &q1, &q2, 1.0, &mut leaf_probs)?;
        let sum: f64 = leaf_probs.values().sum();
        if (sum - 1.0).abs() > 1e-10 {
            return Err(AdaptiveError::ProbabilityLeak { index, sum });
        }
        rows.push(
            labels
                .iter()
                .map(|l| prior * leaf_probs.get(l).copied().unwrap_or(0.0))
                .collect(),
        );
    }
    Ok(JointDistribution::new(rows, labels)?)
}

/// Non-adaptive protocol: the single-qubit trine POVM on each qubit.
pub fn both_qubits_trine_protocol() -> ProtocolNode {
    let trine = crate::measurements::single_qubit_trine_povm();
    let first = LocalInstrument::from_povm(Qubit::First, &trine).unwrap();
    let second = LocalInstrument::from_povm(Qubit::Second, &trine).unwrap();
    let mut children = Vec::with_capacity(3);
    for k in 0..3 {
        let leaves = (0..3)
            .map(|l| ProtocolNode::Leaf(format!("{k}.{l}")))
            .collect();
        children.push(ProtocolNode::measure(second.clone(), leaves).unwrap());
    }
    ProtocolNode::measure(first, children).unwrap()
}

/// One-way adaptive protocol from decoded POVM parameters: a first-qubit
/// POVM followed by a second-qubit POVM chosen per first outcome.
fn protocol_from_params(
    raw: &[f64],
    m1: usize,
    m2: usize,
) -> Result<ProtocolNode, AdaptiveError> {
    let per_povm = m1 * SEED_REALS_DIM2;
    let first_povm = decode_global_seeds(&raw[..per_povm], m1, 2)?;
    let first = LocalInstrument::from_povm(Qubit::First, &first_povm)?;
    let mut children = Vec::with_capacity(m1);
    let second_len = m2 * SEED_REALS_DIM2;
    for k in 0..m1 {
        let start = per_povm + k * second_len;
        let second_povm = decode_global_seeds(&raw[start..start + second_len], m2, 2)?;
        let second = LocalInstrument::from_povm(Qubit::Second, &second_povm)?;
        let leaves = (0..m2)
            .map(|l| ProtocolNode::Leaf(format!("{k}.{l}")))
            .collect();
        children.push(ProtocolNode::measure(second, leaves)?);
    }
    ProtocolNode::measure(first, children)
}

/// Raw parameters whose decode reproduces the non-adaptive trine protocol.
fn trine_warm_start(m1: usize, m2: usize) -> Option<Vec<f64>> {
    if m1 != 3 || m2 != 3 {
        return None;
    }
    let trine = crate::measurements::single_qubit_trine_povm();
    let mut raw = Vec::with_capacity((m1 + m1 * m2) * SEED_REALS_DIM2);
    let push_povm = |raw: &mut Vec<f64>| {
        for element in trine.elements() {
            let root = hermitian_sqrt(element).expect("trine elements are positive");
            for entry in root.entries() {
                raw.push(entry.re);
                raw.push(entry.im);
            }
        }
    };
    push_povm(&mut raw);
    for _ in 0..m1 {
        push_povm(&mut raw);
    }
    Some(raw)
}

/// Derivative-free search over one-way adaptive protocols.
///
/// Runs Nelder-Mead restarts over the square-root POVM parameterization;
/// the first restart starts from the non-adaptive trine protocol when the
/// outcome counts allow it, the rest from seeded random points.
pub fn optimize_one_way(
    ensemble: &Ensemble,
    outcomes_first: usize,
    outcomes_second: usize,
    budget: usize,
    seed: u64,
) -> Result<(ProtocolNode, f64), AdaptiveError> {
    let dim_raw = (outcomes_first + outcomes_first * outcomes_second) * SEED_REALS_DIM2;
    let objective = |raw: &[f64]| -> f64 {
        match protocol_from_params(raw, outcomes_first, outcomes_second)
            .and_then(|p| run_protocol(ensemble, &p))
        {
            Ok(jd) => -mutual_information(&jd),
            Err(_) => f64::INFINITY,
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts: Vec<Vec<f64>> = Vec::new();
    if let Some(warm) = trine_warm_start(outcomes_first, outcomes_second) {
        starts.push(warm);
    }
    while starts.len() < 3 {
        starts.push((0..dim_raw).map(|_| rng.random_range(-1.0..1.0)).collect());
    }

    let options = NelderMeadOptions {
        max_iters: budget.max(1),
        initial_step: 0.1,
        ..NelderMeadOptions::default()
    };
    let mut best: Option<(Vec<f64>, f64)> = None;
    for start in starts {
        let (x, f) = nelder_mead(&objective, &start, &options);
        if best.as_ref().map_or(true, |(_, bf)| f < *bf) {
            best = Some((x, f));
        }
    }
    let (raw, neg_mi) = best.expect("at least one restart");
    let protocol = protocol_from_params(&raw, outcomes_first, outcomes_second)?;
    Ok((protocol, -neg_mi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{double_trine, trine_states};
    use crate::linalg::tensor;
    use crate::measurements::single_qubit_trine_povm;
    use crate::statistics::outcome_probabilities;

    #[test]
    fn factoring_recovers_product_factors() {
        let psi = trine_states();
        for a in &psi {
            for b in &psi {
                let v = tensor(a, b).unwrap();
                let (fa, fb) = factor_product_state(&v).unwrap();
                let back = tensor(&fa, &fb).unwrap();
                assert!(back.sub(&v).unwrap().norm() < 1e-13);
            }
        }
    }

    #[test]
    fn depth_one_reproduces_first_qubit_trine_conditionals() {
        let trine = single_qubit_trine_povm();
        let instrument = LocalInstrument::from_povm(Qubit::First, &trine).unwrap();
        let leaves = (0..3).map(|k| ProtocolNode::Leaf(format!("{k}"))).collect();
        let root = ProtocolNode::measure(instrument, leaves).unwrap();
        let jd = run_protocol(&double_trine(), &root).unwrap();

        let marginal = crate::ensembles::trine_ensemble();
        let expected = outcome_probabilities(&marginal, &trine).unwrap();
        for j in 0..3 {
            let got = jd.conditionals(j);
            let want = expected.conditionals(j);
            for k in 0..3 {
                assert!((got[k] - want[k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn both_trine_protocol_matches_nine_outcome_baseline() {
        let jd = run_protocol(&double_trine(), &both_qubits_trine_protocol()).unwrap();
        let mi = mutual_information(&jd);
        assert!((mi - (3.0_f64.log2() - 0.5)).abs() < 1e-12);
    }

    #[test]
    fn order_independence_for_nonadaptive_protocols() {
        // swap measurement order and transpose the outcome labels
        let trine = single_qubit_trine_povm();
        let first = LocalInstrument::from_povm(Qubit::Second, &trine).unwrap();
        let second = LocalInstrument::from_povm(Qubit::First, &trine).unwrap();
        let mut children = Vec::new();
        for l in 0..3 {
            let leaves = (0..3)
                .map(|k| ProtocolNode::Leaf(format!("{k}.{l}")))
                .collect();
            children.push(ProtocolNode::measure(second.clone(), leaves).unwrap());
        }
        let swapped = ProtocolNode::measure(first, children).unwrap();

        let forward = run_protocol(&double_trine(), &both_qubits_trine_protocol()).unwrap();
        let backward = run_protocol(&double_trine(), &swapped).unwrap();
        for j in 0..3 {
            for label in forward.labels() {
                let kf = forward.labels().iter().position(|l| l == label).unwrap();
                let kb = backward.labels().iter().position(|l| l == label).unwrap();
                assert!((forward.joint()[j][kf] - backward.joint()[j][kb]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn identity_node_gives_zero_information() {
        let instrument =
            LocalInstrument::new(Qubit::First, vec![Operator::identity(2)]).unwrap();
        let root =
            ProtocolNode::measure(instrument, vec![ProtocolNode::Leaf("x".into())]).unwrap();
        let jd = run_protocol(&double_trine(), &root).unwrap();
        assert!(mutual_information(&jd).abs() < 1e-14);

        let leaf_only = ProtocolNode::Leaf("only".into());
        let jd0 = run_protocol(&double_trine(), &leaf_only).unwrap();
        assert!(mutual_information(&jd0).abs() < 1e-14);
    }

    #[test]
    fn entangled_states_are_rejected() {
        let s = crate::measurements::singlet_state();
        let e = Ensemble::uniform(vec![s]).unwrap();
        assert!(matches!(
            run_protocol(&e, &ProtocolNode::Leaf("x".into())),
            Err(AdaptiveError::EntangledState { .. })
        ));
    }

    #[test]
    fn invalid_kraus_sets_are_rejected() {
        let half = Operator::identity(2).scale_re(0.5);
        assert!(matches!(
            LocalInstrument::new(Qubit::First, vec![half]),
            Err(AdaptiveError::IncompleteKraus { .. })
        ));
        assert!(matches!(
            LocalInstrument::new(Qubit::First, vec![]),
            Err(AdaptiveError::EmptyInstrument)
        ));
    }

    #[test]
    fn depth_limit_is_enforced() {
        let instrument =
            LocalInstrument::new(Qubit::First, vec![Operator::identity(2)]).unwrap();
        let mut node = ProtocolNode::Leaf("x".into());
        for _ in 0..8 {
            node = ProtocolNode::measure(instrument.clone(), vec![node]).unwrap();
        }
        assert!(matches!(
            run_protocol(&double_trine(), &node),
            Err(AdaptiveError::TooDeep { .. })
        ));
    }

    #[test]
    fn leaf_probabilities_sum_to_one_on_random_protocols() {
        use rand::prelude::*;
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let ensemble = double_trine();
        for _ in 0..10 {
            let depth = rng.random_range(1..=4);
            let root = random_protocol(&mut rng, depth);
            let jd = run_protocol(&ensemble, &root).unwrap();
            let priors = jd.priors();
            for (j, &p) in priors.iter().enumerate() {
                assert!((p - ensemble.priors()[j]).abs() < 1e-10);
            }
        }
    }

    fn random_instrument(rng: &mut ChaCha8Rng) -> LocalInstrument {
        // random 2-outcome instrument from a random dim-2 POVM
        let m = 2;
        let raw: Vec<f64> = (0..m * SEED_REALS_DIM2)
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        let povm = decode_global_seeds(&raw, m, 2).unwrap();
        let qubit = if rng.random_bool(0.5) {
            Qubit::First
        } else {
            Qubit::Second
        };
        LocalInstrument::from_povm(qubit, &povm).unwrap()
    }

    fn random_protocol(rng: &mut ChaCha8Rng, depth: usize) -> ProtocolNode {
        if depth == 0 {
            return ProtocolNode::Leaf(format!("L{}", rng.random_range(0..4)));
        }
        let instrument = random_instrument(rng);
        let children = (0..instrument.kraus().len())
            .map(|_| random_protocol(rng, depth - 1))
            .collect();
        ProtocolNode::measure(instrument, children).unwrap()
    }

    #[test]
    fn optimize_one_way_beats_baseline() {
        let (protocol, mi) = optimize_one_way(&double_trine(), 3, 3, 200, 42).unwrap();
        assert!(mi >= 3.0_f64.log2() - 0.5 - 1e-9, "got {mi}");
        assert!(mi < 1.36907, "got {mi}");
        assert!(protocol.depth() == 2);
        // determinism
        let (_, mi2) = optimize_one_way(&double_trine(), 3, 3, 200, 42).unwrap();
        assert_eq!(mi, mi2);
    }
}
