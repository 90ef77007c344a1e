//! Measurement constructions for the double-trine problem: the entangled
//! orthonormal-basis measurement, the single-qubit trine POVM, the
//! nine-outcome product measurement, the six-outcome unentangled POVM, and
//! the singlet-superposition machinery (concurrence, cyclic symmetry, and
//! the separability / completeness constraints).

use crate::ensembles::trine_states;
use crate::linalg::{
    hermitian_eigen, hermitian_eigenvalues, inner, projector, sigma_x, sigma_y, sigma_z, tensor,
    tensor_op, Complex, LinalgError, Operator, StateVector, POSITIVITY_TOL,
};
use thiserror::Error;

/// Frobenius tolerance on Σ elements − I.
pub const COMPLETENESS_TOL: f64 = 1e-10;
/// Concurrence at or below this is treated as zero (product state).
pub const CONCURRENCE_TOL: f64 = 1e-9;
/// Eigenvalues above this count toward an element's rank.
pub const RANK_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasurementError {
    #[error("POVM has no elements")]
    Empty,
    #[error("element {index} has dim {found}, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("element {index} is not Hermitian: deviation {deviation}")]
    NotHermitian { index: usize, deviation: f64 },
    #[error("element {index} is not positive: min eigenvalue {eigenvalue}")]
    NotPositive { index: usize, eigenvalue: f64 },
    #[error("elements do not sum to identity: Frobenius defect {defect_norm}")]
    NotComplete {
        defect_norm: f64,
        defect: Box<Operator>,
    },
    #[error("got {elements} elements but {labels} labels")]
    LabelMismatch { elements: usize, labels: usize },
    #[error("expected a two-qubit (dim 4) state, got dim {0}")]
    NotTwoQubit(usize),
    #[error("state is not normalized: norm² = {norm_sq}")]
    NotNormalized { norm_sq: f64 },
    #[error("concurrence came out complex: imaginary part {imag}")]
    ComplexConcurrence { imag: f64 },
    #[error("superposition coefficients not normalized: β² + γ² = {sum}")]
    CoefficientsNotNormalized { sum: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// A positive-operator-valued measure: positive elements summing to identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    dim: usize,
    elements: Vec<Operator>,
    labels: Vec<String>,
}

impl Povm {
    pub fn new(elements: Vec<Operator>, labels: Vec<String>) -> Result<Self, MeasurementError> {
        if elements.is_empty() {
            return Err(MeasurementError::Empty);
        }
        if elements.len() != labels.len() {
            return Err(MeasurementError::LabelMismatch {
                elements: elements.len(),
                labels: labels.len(),
            });
        }
        let dim = elements[0].dim();
        let mut sum = Operator::zeros(dim);
        for (index, element) in elements.iter().enumerate() {
            if element.dim() != dim {
                return Err(MeasurementError::DimensionMismatch {
                    index,
                    expected: dim,
                    found: element.dim(),
                });
            }
            let deviation = element.hermitian_deviation();
            if deviation > 1e-10 {
                return Err(MeasurementError::NotHermitian { index, deviation });
            }
            let min_eig = element.min_eigenvalue()?;
            if min_eig < -POSITIVITY_TOL {
                return Err(MeasurementError::NotPositive {
                    index,
                    eigenvalue: min_eig,
                });
            }
            sum = sum.add(element)?;
        }
        let defect = sum.sub(&Operator::identity(dim))?;
        let defect_norm = defect.frobenius_norm();
        if defect_norm > COMPLETENESS_TOL {
            return Err(MeasurementError::NotComplete {
                defect_norm,
                defect: Box::new(defect),
            });
        }
        Ok(Povm {
            dim,
            elements,
            labels,
        })
    }

    pub fn with_default_labels(elements: Vec<Operator>) -> Result<Self, MeasurementError> {
        let labels = (0..elements.len()).map(|k| format!("k{k}")).collect();
        Self::new(elements, labels)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Outcome count M.
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[Operator] {
        &self.elements
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }
}

/// Classification of a dim-4 POVM by the entanglement of its outcome kets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PovmClass {
    /// All elements rank 1 with product kets.
    Unentangled,
    /// All elements rank 1, at least one entangled ket.
    Entangled,
    /// Some element has rank ≥ 2; no separability decision attempted.
    Indeterminate,
}

impl std::fmt::Display for PovmClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PovmClass::Unentangled => write!(f, "unentangled"),
            PovmClass::Entangled => write!(f, "entangled"),
            PovmClass::Indeterminate => write!(f, "indeterminate"),
        }
    }
}

/// The singlet state (|01⟩ − |10⟩)/√2.
pub fn singlet_state() -> StateVector {
    let r = 1.0 / 2.0_f64.sqrt();
    StateVector::from_reals(&[0.0, r, -r, 0.0])
}

/// The orthonormal two-qubit states |A_j⟩ straddling the double-trine states.
pub fn entangled_basis_states() -> [StateVector; 3] {
    let psi = trine_states();
    let a: Vec<StateVector> = psi.iter().map(|p| tensor(p, p).unwrap()).collect();
    let s2 = 2.0_f64.sqrt();
    let scale = 1.0 / (3.0 * 3.0_f64.sqrt());
    let coeff_self = Complex::new(scale * (4.0 + s2), 0.0);
    let coeff_other = Complex::new(-scale * (2.0 - s2), 0.0);
    let build = |j: usize| {
        a[j].scale(coeff_self)
            .add(&a[(j + 1) % 3].scale(coeff_other))
            .unwrap()
            .add(&a[(j + 2) % 3].scale(coeff_other))
            .unwrap()
    };
    [build(0), build(1), build(2)]
}

/// The four-outcome orthogonal measurement {|A_0⟩, |A_1⟩, |A_2⟩, |S⟩}.
pub fn entangled_basis_povm() -> Povm {
    let mut elements = Vec::with_capacity(4);
    let mut labels = Vec::with_capacity(4);
    for (j, state) in entangled_basis_states().iter().enumerate() {
        elements.push(projector(state).unwrap());
        labels.push(format!("A{j}"));
    }
    elements.push(projector(&singlet_state()).unwrap());
    labels.push("S".to_string());
    Povm::new(elements, labels).expect("entangled basis is a valid POVM")
}

/// Qubit state orthogonal to (a, b): (-b̄, ā) up to the phase convention;
/// the trine states are real so this is just (-b, a).
fn perp(v: &StateVector) -> StateVector {
    let amps = v.amplitudes();
    StateVector::new(vec![-amps[1].conj(), amps[0].conj()])
}

/// The optimal single-qubit trine POVM Π_k = (2/3)|ψ_k^⊥⟩⟨ψ_k^⊥|.
pub fn single_qubit_trine_povm() -> Povm {
    let elements: Vec<Operator> = trine_states()
        .iter()
        .map(|psi| projector(&perp(psi)).unwrap().scale_re(2.0 / 3.0))
        .collect();
    let labels = (0..3).map(|k| format!("Pi{k}")).collect();
    Povm::new(elements, labels).expect("trine POVM is valid")
}

/// All nine products Π_j⊗Π_k: measuring the trine POVM on each qubit.
pub fn nine_outcome_product_povm() -> Povm {
    let local = single_qubit_trine_povm();
    let mut elements = Vec::with_capacity(9);
    let mut labels = Vec::with_capacity(9);
    for j in 0..3 {
        for k in 0..3 {
            elements.push(tensor_op(&local.elements()[j], &local.elements()[k]).unwrap());
            labels.push(format!("Pi{j}xPi{k}"));
        }
    }
    Povm::new(elements, labels).expect("product of POVMs is a POVM")
}

/// Rotation by θ in the x-z plane of the Bloch sphere.
pub fn rotation(theta: f64) -> Operator {
    let (s, c) = (theta / 2.0).sin_cos();
    Operator::from_rows(&[&[c, -s], &[s, c]])
}

/// The six candidate product states B_j = φ_j^+⊗φ_j^- and C_j = φ_j^-⊗φ_j^+.
pub fn six_outcome_states(theta: f64) -> (Vec<StateVector>, Vec<StateVector>) {
    let r = rotation(theta);
    let r_inv = r.adjoint();
    let mut b = Vec::with_capacity(3);
    let mut c = Vec::with_capacity(3);
    for psi in trine_states().iter() {
        let plus = r.apply(psi).unwrap();
        let minus = r_inv.apply(psi).unwrap();
        b.push(tensor(&plus, &minus).unwrap());
        c.push(tensor(&minus, &plus).unwrap());
    }
    (b, c)
}

fn six_outcome_elements(theta: f64, alpha: f64) -> (Vec<Operator>, Vec<String>) {
    let (b, c) = six_outcome_states(theta);
    let mut elements = Vec::with_capacity(6);
    let mut labels = Vec::with_capacity(6);
    for (j, state) in b.iter().enumerate() {
        elements.push(projector(state).unwrap().scale_re(alpha));
        labels.push(format!("E{j}"));
    }
    for (j, state) in c.iter().enumerate() {
        elements.push(projector(state).unwrap().scale_re(alpha));
        labels.push(format!("F{j}"));
    }
    (elements, labels)
}

/// The six-outcome candidate {E_j, F_j} with E_j = α|B_j⟩⟨B_j|,
/// F_j = α|C_j⟩⟨C_j|. A valid POVM only when α = 2/3 and cos 2θ = 0;
/// otherwise the error carries the completeness defect Σ(E_j+F_j) − I.
pub fn six_outcome_unentangled_povm(theta: f64, alpha: f64) -> Result<Povm, MeasurementError> {
    let (elements, labels) = six_outcome_elements(theta, alpha);
    Povm::new(elements, labels)
}

/// The paper's six-outcome POVM at θ = 45°, α = 2/3.
pub fn six_outcome_povm() -> Povm {
    six_outcome_unentangled_povm(std::f64::consts::FRAC_PI_4, 2.0 / 3.0)
        .expect("θ = π/4, α = 2/3 gives a valid POVM")
}

/// Sum Σ(E_j + F_j) for arbitrary (θ, α); closed form
/// α(3/2)[I + (cos 2θ / 2)(σ_x⊗σ_x + σ_z⊗σ_z)].
pub fn six_outcome_element_sum(theta: f64, alpha: f64) -> Operator {
    let (elements, _) = six_outcome_elements(theta, alpha);
    let mut sum = Operator::zeros(4);
    for e in &elements {
        sum = sum.add(e).unwrap();
    }
    sum
}

/// The closed-form prediction for `six_outcome_element_sum`.
pub fn six_outcome_sum_formula(theta: f64, alpha: f64) -> Operator {
    let xx = tensor_op(&sigma_x(), &sigma_x()).unwrap();
    let zz = tensor_op(&sigma_z(), &sigma_z()).unwrap();
    Operator::identity(4)
        .add(&xx.add(&zz).unwrap().scale_re(0.5 * (2.0 * theta).cos()))
        .unwrap()
        .scale_re(alpha * 1.5)
}

/// Signed concurrence c = ⟨v̄|σ_y⊗σ_y|v⟩.
pub fn concurrence_signed(v: &StateVector) -> Result<f64, MeasurementError> {
    if v.dim() != 4 {
        return Err(MeasurementError::NotTwoQubit(v.dim()));
    }
    if !v.is_normalized() {
        return Err(MeasurementError::NotNormalized {
            norm_sq: v.norm_sq(),
        });
    }
    let yy = tensor_op(&sigma_y(), &sigma_y())?;
    let c = inner(&v.conjugate(), &yy.apply(v)?)?;
    if c.im.abs() > 1e-10 {
        return Err(MeasurementError::ComplexConcurrence { imag: c.im });
    }
    Ok(c.re)
}

/// Concurrence C = |c|; zero iff product state.
pub fn concurrence(v: &StateVector) -> Result<f64, MeasurementError> {
    if v.dim() != 4 {
        return Err(MeasurementError::NotTwoQubit(v.dim()));
    }
    if !v.is_normalized() {
        return Err(MeasurementError::NotNormalized {
            norm_sq: v.norm_sq(),
        });
    }
    let yy = tensor_op(&sigma_y(), &sigma_y())?;
    Ok(inner(&v.conjugate(), &yy.apply(v)?)?.norm())
}

/// The six superpositions β|A_j⟩ ± γ|S⟩, ordered [minus_0..2, plus_0..2].
pub fn singlet_superposition_states(
    beta: f64,
    gamma: f64,
) -> Result<[StateVector; 6], MeasurementError> {
    let sum = beta * beta + gamma * gamma;
    if (sum - 1.0).abs() > 1e-10 {
        return Err(MeasurementError::CoefficientsNotNormalized { sum });
    }
    let a = entangled_basis_states();
    let s = singlet_state();
    let b = Complex::new(beta, 0.0);
    let g = Complex::new(gamma, 0.0);
    let minus = |j: usize| a[j].scale(b).sub(&s.scale(g)).unwrap();
    let plus = |j: usize| a[j].scale(b).add(&s.scale(g)).unwrap();
    Ok([minus(0), minus(1), minus(2), plus(0), plus(1), plus(2)])
}

/// Solve β²·c(A) + γ²·c(S) = 0 with β² + γ² = 1 and β, γ > 0, where the
/// signed concurrences of |A_0⟩ and |S⟩ are computed, not assumed.
pub fn solve_separability_constraint() -> (f64, f64) {
    let c_a = concurrence_signed(&entangled_basis_states()[0]).expect("A_0 is a real state");
    let c_s = concurrence_signed(&singlet_state()).expect("S is a real state");
    // β² (c_a - c_s) = -c_s
    let beta_sq = -c_s / (c_a - c_s);
    (beta_sq.sqrt(), (1.0 - beta_sq).sqrt())
}

/// Enforce (2/3)Σ_j[(βA_j+γS)(..)† + (βA_j−γS)(..)†] = I. Using the basis
/// completeness Σ|A_j⟩⟨A_j| + |S⟩⟨S| = I (verified numerically), the sum
/// reduces to (4/3)|β|² on the A-subspace and 4|γ|² on the singlet, so
/// |β|² = 3/4 and |γ|² = 1/4.
pub fn solve_completeness_constraint() -> (f64, f64) {
    let a = entangled_basis_states();
    let s = singlet_state();
    let mut basis_sum = projector(&s).unwrap();
    for state in &a {
        basis_sum = basis_sum.add(&projector(state).unwrap()).unwrap();
    }
    let defect = basis_sum.sub(&Operator::identity(4)).unwrap();
    debug_assert!(defect.frobenius_norm() < 1e-12);
    // With the basis resolution of identity, the constraint diagonalizes:
    // (4/3)|β|² = 1 on the triplet block and 4|γ|² = 1 on the singlet.
    (3.0 / 4.0, 1.0 / 4.0)
}

/// The order-3 single-qubit unitary cycling the trine states, and its
/// two-qubit tensor square.
pub fn cyclic_unitary() -> (Operator, Operator) {
    let h = 3.0_f64.sqrt() / 2.0;
    let u = Operator::from_rows(&[&[-0.5, h], &[-h, -0.5]]);
    let big_u = tensor_op(&u, &u).unwrap();
    (u, big_u)
}

/// Rank of a Hermitian element: eigenvalues above RANK_TOL.
fn rank(op: &Operator) -> Result<usize, MeasurementError> {
    Ok(hermitian_eigenvalues(op)?
        .iter()
        .filter(|&&e| e > RANK_TOL)
        .count())
}

/// Normalized principal eigenvector of a rank-1 positive element.
pub fn principal_ket(op: &Operator) -> Result<StateVector, MeasurementError> {
    let (eigs, vecs) = hermitian_eigen(op)?;
    let top = eigs.len() - 1;
    Ok(vecs.column(top).normalized()?)
}

/// Classify a dim-4 POVM by the entanglement of its outcome kets.
pub fn classify_povm(povm: &Povm) -> Result<PovmClass, MeasurementError> {
    let mut any_entangled = false;
    for element in povm.elements() {
        if rank(element)? >= 2 {
            return Ok(PovmClass::Indeterminate);
        }
        let ket = principal_ket(element)?;
        if concurrence(&ket)? > CONCURRENCE_TOL {
            any_entangled = true;
        }
    }
    Ok(if any_entangled {
        PovmClass::Entangled
    } else {
        PovmClass::Unentangled
    })
}
