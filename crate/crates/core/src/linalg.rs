//! Small-dimension complex linear algebra: state vectors, operators,
//! tensor products, and a cyclic-Jacobi Hermitian eigensolver.
//!
//! Everything here works in the fixed standard basis; for two qubits the
//! ordering is {|00⟩, |01⟩, |10⟩, |11⟩}, i.e. `(a ⊗ b)[2i + j] = a[i] * b[j]`.

use num_complex::Complex64;
use thiserror::Error;

pub type Complex = Complex64;

/// Normalization tolerance on norm².
pub const NORM_TOL: f64 = 1e-12;
/// Entrywise Hermiticity tolerance for predicates.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Hermiticity tolerance accepted by the eigensolver.
pub const EIGEN_HERMITIAN_TOL: f64 = 1e-10;
/// Minimum eigenvalue tolerance for positivity.
pub const POSITIVITY_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("expected a qubit-dimension (2) vector, got dim {0}")]
    NotQubit(usize),
    #[error("vector is not normalized: norm² = {norm_sq}")]
    NotNormalized { norm_sq: f64 },
    #[error("matrix is not Hermitian: max entrywise deviation {deviation}")]
    NotHermitian { deviation: f64 },
    #[error("eigensolver did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("matrix has an eigenvalue {eigenvalue} below the positivity tolerance")]
    NotPositive { eigenvalue: f64 },
}

pub type Result<T> = std::result::Result<T, LinalgError>;

/// A complex column vector; dim is 2 or 4 everywhere in this crate.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<Complex>,
}

impl StateVector {
    pub fn new(amps: Vec<Complex>) -> Self {
        StateVector { amps }
    }

    pub fn from_reals(amps: &[f64]) -> Self {
        StateVector {
            amps: amps.iter().map(|&x| Complex::new(x, 0.0)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex] {
        &self.amps
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sq() - 1.0).abs() <= NORM_TOL
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(LinalgError::NotNormalized { norm_sq: 0.0 });
        }
        Ok(self.scale(Complex::new(1.0 / n, 0.0)))
    }

    pub fn conjugate(&self) -> Self {
        StateVector {
            amps: self.amps.iter().map(|a| a.conj()).collect(),
        }
    }

    pub fn scale(&self, c: Complex) -> Self {
        StateVector {
            amps: self.amps.iter().map(|a| a * c).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        Ok(StateVector {
            amps: self
                .amps
                .iter()
                .zip(&other.amps)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex::new(-1.0, 0.0)))
    }
}

fn check_dims(left: usize, right: usize) -> Result<()> {
    if left != right {
        Err(LinalgError::DimensionMismatch { left, right })
    } else {
        Ok(())
    }
}

/// ⟨a|b⟩ with conjugation on the first argument.
pub fn inner(a: &StateVector, b: &StateVector) -> Result<Complex> {
    check_dims(a.dim(), b.dim())?;
    Ok(a.amps
        .iter()
        .zip(&b.amps)
        .map(|(x, y)| x.conj() * y)
        .sum())
}

/// Kronecker product of two single-qubit vectors in the standard ordering.
pub fn tensor(a: &StateVector, b: &StateVector) -> Result<StateVector> {
    if a.dim() != 2 {
        return Err(LinalgError::NotQubit(a.dim()));
    }
    if b.dim() != 2 {
        return Err(LinalgError::NotQubit(b.dim()));
    }
    let mut amps = Vec::with_capacity(4);
    for i in 0..2 {
        for j in 0..2 {
            amps.push(a.amps[i] * b.amps[j]);
        }
    }
    Ok(StateVector::new(amps))
}

/// A dense complex square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    dim: usize,
    entries: Vec<Complex>,
}

impl Operator {
    pub fn new(dim: usize, entries: Vec<Complex>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(LinalgError::DimensionMismatch {
                left: dim * dim,
                right: entries.len(),
            });
        }
        Ok(Operator { dim, entries })
    }

    pub fn zeros(dim: usize) -> Self {
        Operator {
            dim,
            entries: vec![Complex::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut op = Self::zeros(dim);
        for i in 0..dim {
            op.set(i, i, Complex::new(1.0, 0.0));
        }
        op
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            assert_eq!(row.len(), dim);
            entries.extend(row.iter().map(|&x| Complex::new(x, 0.0)));
        }
        Operator { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> Complex {
        self.entries[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Complex) {
        self.entries[i * self.dim + j] = value;
    }

    pub fn column(&self, j: usize) -> StateVector {
        StateVector::new((0..self.dim).map(|i| self.get(i, j)).collect())
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim, other.dim)?;
        Ok(Operator {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: Complex) -> Self {
        Operator {
            dim: self.dim,
            entries: self.entries.iter().map(|a| a * c).collect(),
        }
    }

    pub fn scale_re(&self, x: f64) -> Self {
        self.scale(Complex::new(x, 0.0))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim, other.dim)?;
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self.get(i, k);
                if aik == Complex::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    let v = out.get(i, j) + aik * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    pub fn apply(&self, v: &StateVector) -> Result<StateVector> {
        check_dims(self.dim, v.dim())?;
        let mut amps = vec![Complex::new(0.0, 0.0); self.dim];
        for i in 0..self.dim {
            for j in 0..self.dim {
                amps[i] += self.get(i, j) * v.amplitudes()[j];
            }
        }
        Ok(StateVector::new(amps))
    }

    pub fn trace(&self) -> Complex {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Max entrywise |A - A†|.
    pub fn hermitian_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                dev = dev.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian_deviation() <= HERMITIAN_TOL
    }

    pub fn is_positive(&self) -> bool {
        match hermitian_eigenvalues(self) {
            Ok(eigs) => eigs[0] >= -POSITIVITY_TOL,
            Err(_) => false,
        }
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(hermitian_eigenvalues(self)?[0])
    }

    /// ⟨v|A|v⟩, real part (the value is real for Hermitian A).
    pub fn expectation(&self, v: &StateVector) -> Result<f64> {
        Ok(inner(v, &self.apply(v)?)?.re)
    }
}

/// |a⟩⟨b|.
pub fn outer(a: &StateVector, b: &StateVector) -> Result<Operator> {
    check_dims(a.dim(), b.dim())?;
    let n = a.dim();
    let mut op = Operator::zeros(n);
    for i in 0..n {
        for j in 0..n {
            op.set(i, j, a.amplitudes()[i] * b.amplitudes()[j].conj());
        }
    }
    Ok(op)
}

/// |v⟩⟨v| for a normalized vector.
pub fn projector(v: &StateVector) -> Result<Operator> {
    if !v.is_normalized() {
        return Err(LinalgError::NotNormalized {
            norm_sq: v.norm_sq(),
        });
    }
    outer(v, v)
}

/// Kronecker product of operators in the same basis ordering as `tensor`.
pub fn tensor_op(a: &Operator, b: &Operator) -> Result<Operator> {
    if a.dim() != 2 {
        return Err(LinalgError::NotQubit(a.dim()));
    }
    if b.dim() != 2 {
        return Err(LinalgError::NotQubit(b.dim()));
    }
    let mut out = Operator::zeros(4);
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out.set(2 * i + k, 2 * j + l, a.get(i, j) * b.get(k, l));
                }
            }
        }
    }
    Ok(out)
}

fn off_diagonal_sq(a: &Operator) -> f64 {
    let n = a.dim();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a.get(i, j).norm_sqr();
            }
        }
    }
    s
}

/// Cyclic Jacobi eigendecomposition of a Hermitian matrix.
///
/// Returns eigenvalues ascending and a unitary whose columns are the
/// matching eigenvectors.
pub fn hermitian_eigen(a: &Operator) -> Result<(Vec<f64>, Operator)> {
    let dev = a.hermitian_deviation();
    if dev > EIGEN_HERMITIAN_TOL {
        return Err(LinalgError::NotHermitian { deviation: dev });
    }
    let n = a.dim();
    // Symmetrize to kill rounding-level deviation before iterating.
    let mut m = a.add(&a.adjoint())?.scale_re(0.5);
    let mut vecs = Operator::identity(n);
    let scale = m.frobenius_norm().max(1.0);
    let tol = (1e-15 * scale).powi(2);

    let max_sweeps = 100;
    let mut converged = false;
    for _ in 0..max_sweeps {
        if off_diagonal_sq(&m) <= tol {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let beta = m.get(p, q);
                if beta.norm() <= 1e-300 {
                    continue;
                }
                let alpha = m.get(p, p).re;
                let gamma = m.get(q, q).re;
                let r = beta.norm();
                let phase = beta / r; // e^{i phi}
                // Rotation angle zeroing the (p,q) entry of the phased
                // real 2x2 subproblem [[alpha, r], [r, gamma]].
                let theta = 0.5 * (2.0 * r).atan2(alpha - gamma);
                let (s, c) = theta.sin_cos();
                let mut rot = Operator::identity(n);
                rot.set(p, p, Complex::new(c, 0.0));
                rot.set(p, q, Complex::new(-s, 0.0));
                rot.set(q, p, Complex::new(s, 0.0) * phase.conj());
                rot.set(q, q, Complex::new(c, 0.0) * phase.conj());
                m = rot.adjoint().mul(&m)?.mul(&rot)?;
                vecs = vecs.mul(&rot)?;
            }
        }
    }
    if !converged && off_diagonal_sq(&m) > tol {
        return Err(LinalgError::NoConvergence { sweeps: max_sweeps });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m.get(i, i).re.total_cmp(&m.get(j, j).re));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| m.get(i, i).re).collect();
    let mut sorted_vecs = Operator::zeros(n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for row in 0..n {
            sorted_vecs.set(row, new_col, vecs.get(row, old_col));
        }
    }
    Ok((eigenvalues, sorted_vecs))
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(a: &Operator) -> Result<Vec<f64>> {
    Ok(hermitian_eigen(a)?.0)
}

fn hermitian_function(a: &Operator, f: impl Fn(f64) -> Result<f64>) -> Result<Operator> {
    let (eigs, vecs) = hermitian_eigen(a)?;
    let n = a.dim();
    let mut diag = Operator::zeros(n);
    for (i, &lambda) in eigs.iter().enumerate() {
        diag.set(i, i, Complex::new(f(lambda)?, 0.0));
    }
    vecs.mul(&diag)?.mul(&vecs.adjoint())
}

/// Positive square root of a positive semidefinite matrix; eigenvalues in
/// [-POSITIVITY_TOL, 0) clamp to zero.
pub fn hermitian_sqrt(a: &Operator) -> Result<Operator> {
    hermitian_function(a, |lambda| {
        if lambda < -POSITIVITY_TOL {
            Err(LinalgError::NotPositive { eigenvalue: lambda })
        } else {
            Ok(lambda.max(0.0).sqrt())
        }
    })
}

/// Inverse square root of a positive definite matrix.
pub fn hermitian_inv_sqrt(a: &Operator) -> Result<Operator> {
    hermitian_function(a, |lambda| {
        if lambda <= 0.0 {
            Err(LinalgError::NotPositive { eigenvalue: lambda })
        } else {
            Ok(1.0 / lambda.sqrt())
        }
    })
}

/// Pauli matrices in the standard basis.
pub fn sigma_x() -> Operator {
    Operator::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
}

pub fn sigma_y() -> Operator {
    Operator::new(
        2,
        vec![
            Complex::new(0.0, 0.0),
            Complex::new(0.0, -1.0),
            Complex::new(0.0, 1.0),
            Complex::new(0.0, 0.0),
        ],
    )
    .unwrap()
}

pub fn sigma_z() -> Operator {
    Operator::from_rows(&[&[1.0, 0.0], &[0.0, -1.0]])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ket(amps: &[f64]) -> StateVector {
        StateVector::from_reals(amps)
    }

    #[test]
    fn tensor_basis_case() {
        let zero = ket(&[1.0, 0.0]);
        let t = tensor(&zero, &zero).unwrap();
        assert_eq!(t.amplitudes(), ket(&[1.0, 0.0, 0.0, 0.0]).amplitudes());
    }

    #[test]
    fn tensor_trine_self_product() {
        let psi1 = ket(&[-0.5, -(3.0f64).sqrt() / 2.0]);
        let t = tensor(&psi1, &psi1).unwrap();
        let expected = [0.25, 3.0f64.sqrt() / 4.0, 3.0f64.sqrt() / 4.0, 0.75];
        for (a, e) in t.amplitudes().iter().zip(expected) {
            assert!((a.re - e).abs() < 1e-15 && a.im == 0.0);
        }
    }

    #[test]
    fn tensor_rejects_wrong_dims() {
        let v2 = ket(&[1.0, 0.0]);
        let v4 = ket(&[1.0, 0.0, 0.0, 0.0]);
        assert!(tensor(&v4, &v2).is_err());
        assert!(inner(&v4, &v2).is_err());
    }

    #[test]
    fn inner_conjugates_first_argument() {
        let a = StateVector::new(vec![Complex::new(0.0, 1.0), Complex::new(0.0, 0.0)]);
        let b = ket(&[1.0, 0.0]);
        let ip = inner(&a, &b).unwrap();
        assert!((ip - Complex::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn sigma_yy_on_00_gives_minus_11() {
        let yy = tensor_op(&sigma_y(), &sigma_y()).unwrap();
        let v = yy.apply(&ket(&[1.0, 0.0, 0.0, 0.0])).unwrap();
        let expected = ket(&[0.0, 0.0, 0.0, -1.0]);
        for (a, e) in v.amplitudes().iter().zip(expected.amplitudes()) {
            assert!((a - e).norm() < 1e-15);
        }
    }

    #[test]
    fn projector_of_zero_ket() {
        let p = projector(&ket(&[1.0, 0.0])).unwrap();
        assert!((p.get(0, 0).re - 1.0).abs() < 1e-15);
        assert!(p.get(1, 1).norm() < 1e-15);
        assert!((p.trace().re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn projector_rejects_unnormalized() {
        assert!(projector(&ket(&[1.0, 1.0])).is_err());
    }

    #[test]
    fn eigenvalues_of_diagonal() {
        let d = Operator::from_rows(&[&[1.0, 0.0], &[0.0, 0.0]]);
        let eigs = hermitian_eigenvalues(&d).unwrap();
        assert!((eigs[0]).abs() < 1e-12 && (eigs[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eigenvalues_of_sigma_yy() {
        let yy = tensor_op(&sigma_y(), &sigma_y()).unwrap();
        let eigs = hermitian_eigenvalues(&yy).unwrap();
        let expected = [-1.0, -1.0, 1.0, 1.0];
        for (e, x) in eigs.iter().zip(expected) {
            assert!((e - x).abs() < 1e-12);
        }
    }

    #[test]
    fn eigen_residuals_small_on_random_hermitian() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let n = if rng.random_bool(0.5) { 2 } else { 4 };
            let mut raw = Operator::zeros(n);
            for i in 0..n {
                for j in 0..n {
                    raw.set(
                        i,
                        j,
                        Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
                    );
                }
            }
            let h = raw.add(&raw.adjoint()).unwrap().scale_re(0.5);
            let (eigs, vecs) = hermitian_eigen(&h).unwrap();
            let sum: f64 = eigs.iter().sum();
            assert!((sum - h.trace().re).abs() < 1e-9);
            for (k, &lambda) in eigs.iter().enumerate() {
                let v = vecs.column(k);
                let resid = h
                    .apply(&v)
                    .unwrap()
                    .sub(&v.scale(Complex::new(lambda, 0.0)))
                    .unwrap()
                    .norm();
                assert!(resid <= 1e-9, "residual {resid}");
            }
        }
    }

    #[test]
    fn eigensolver_rejects_non_hermitian() {
        let a = Operator::from_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(matches!(
            hermitian_eigenvalues(&a),
            Err(LinalgError::NotHermitian { .. })
        ));
    }

    #[test]
    fn sqrt_squares_back() {
        let yy = tensor_op(&sigma_y(), &sigma_y()).unwrap();
        let shifted = yy.add(&Operator::identity(4).scale_re(1.5)).unwrap();
        let root = hermitian_sqrt(&shifted).unwrap();
        let back = root.mul(&root).unwrap();
        assert!(back.sub(&shifted).unwrap().frobenius_norm() < 1e-12);
    }

    #[test]
    fn inv_sqrt_inverts() {
        let a = Operator::from_rows(&[&[2.0, 0.5], &[0.5, 1.0]]);
        let inv_root = hermitian_inv_sqrt(&a).unwrap();
        let should_be_identity = inv_root.mul(&a).unwrap().mul(&inv_root).unwrap();
        assert!(
            should_be_identity
                .sub(&Operator::identity(2))
                .unwrap()
                .frobenius_norm()
                < 1e-12
        );
    }

    #[test]
    fn conjugate_is_involution() {
        let v = StateVector::new(vec![Complex::new(0.3, -0.4), Complex::new(0.1, 0.9)]);
        assert_eq!(v.conjugate().conjugate(), v);
        let i_ket = StateVector::new(vec![Complex::new(0.0, 1.0), Complex::new(0.0, 0.0)]);
        assert_eq!(i_ket.conjugate().amplitudes()[0], Complex::new(0.0, -1.0));
    }
}
