//! Derivative-free search over POVM space maximizing mutual information.
//!
//! Two parameterizations: `Global` encodes M arbitrary complex seed
//! matrices, made into a POVM by square-root normalization (feasible by
//! construction); `Product` encodes weighted tensor products of rank-1
//! single-qubit projectors, with a Frobenius penalty on the completeness
//! defect and a slack-element repair for near-feasible points.

use crate::ensembles::Ensemble;
use crate::linalg::{
    hermitian_inv_sqrt, Complex, LinalgError, Operator, StateVector, POSITIVITY_TOL,
};
use crate::linalg::tensor_op;
use crate::measurements::{classify_povm, MeasurementError, Povm, PovmClass};
use crate::statistics::{mutual_information, outcome_probabilities};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

/// Reals per seed matrix in the square-root parameterization.
pub const SEED_REALS_DIM2: usize = 8;
pub const SEED_REALS_DIM4: usize = 32;
/// Reals per outcome in the product parameterization:
/// weight + two Bloch angles per qubit.
pub const PRODUCT_REALS_PER_OUTCOME: usize = 5;
/// Regularizer keeping the seed sum invertible.
pub const SEED_EPSILON: f64 = 1e-9;
/// Product-mode feasibility threshold on the completeness defect.
pub const PRODUCT_DEFECT_TOL: f64 = 1e-6;
/// Penalty weight on the Frobenius defect for infeasible product decodes.
pub const DEFECT_PENALTY: f64 = 10.0;

#[derive(Debug, Error)]
pub enum OptimizerError {
    #[error("raw parameter vector has length {found}, expected {expected}")]
    BadRawLength { expected: usize, found: usize },
    #[error("no feasible POVM found")]
    NoFeasiblePovm,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Measurement(#[from] MeasurementError),
}

/// Search mode for `maximize_mi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Global,
    Product,
}

/// A POVM search space: mode plus outcome count.
#[derive(Debug, Clone, Copy)]
pub struct PovmParameterization {
    pub mode: Mode,
    pub outcomes: usize,
}

impl PovmParameterization {
    pub fn raw_len(&self) -> usize {
        match self.mode {
            Mode::Global => self.outcomes * SEED_REALS_DIM4,
            Mode::Product => self.outcomes * PRODUCT_REALS_PER_OUTCOME,
        }
    }
}

fn seeds_from_raw(raw: &[f64], m: usize, dim: usize) -> Result<Vec<Operator>, OptimizerError> {
    let per_seed = 2 * dim * dim;
    if raw.len() != m * per_seed {
        return Err(OptimizerError::BadRawLength {
            expected: m * per_seed,
            found: raw.len(),
        });
    }
    let mut seeds = Vec::with_capacity(m);
    for k in 0..m {
        let chunk = &raw[k * per_seed..(k + 1) * per_seed];
        let entries = chunk
            .chunks_exact(2)
            .map(|pair| Complex::new(pair[0], pair[1]))
            .collect();
        seeds.push(Operator::new(dim, entries)?);
    }
    Ok(seeds)
}

/// Square-root normalization: Π_k = S^{-1/2} M_k†M_k S^{-1/2} with
/// S = Σ M_k†M_k + εI, followed by one exact renormalization pass so the
/// completeness defect is at rounding level regardless of ε.
pub fn decode_global_seeds(raw: &[f64], m: usize, dim: usize) -> Result<Povm, OptimizerError> {
    let seeds = seeds_from_raw(raw, m, dim)?;
    let grams: Vec<Operator> = seeds
        .iter()
        .map(|s| s.adjoint().mul(s))
        .collect::<Result<_, _>>()?;

    let normalize = |parts: &[Operator], eps: f64| -> Result<Vec<Operator>, OptimizerError> {
        let mut sum = Operator::identity(dim).scale_re(eps);
        for p in parts {
            sum = sum.add(p)?;
        }
        let w = hermitian_inv_sqrt(&sum)?;
        Ok(parts
            .iter()
            .map(|p| w.mul(p).and_then(|wp| wp.mul(&w)))
            .collect::<Result<_, _>>()?)
    };

    // first pass regularized; second pass renormalizes the already
    // near-complete sum exactly, leaving only rounding-level defect
    let first_pass = normalize(&grams, SEED_EPSILON)?;
    let elements = normalize(&first_pass, 0.0)?;
    Ok(Povm::with_default_labels(elements)?)
}

/// The spec'd two-qubit global decode.
pub fn decode_global(raw: &[f64], m: usize) -> Result<Povm, OptimizerError> {
    decode_global_seeds(raw, m, 4)
}

/// Rank-1 projector onto the Bloch-angle ket (cos θ/2, e^{iφ} sin θ/2).
pub fn bloch_projector(theta: f64, phi: f64) -> Operator {
    let (s, c) = (theta / 2.0).sin_cos();
    let ket = StateVector::new(vec![Complex::new(c, 0.0), Complex::from_polar(s, phi)]);
    crate::linalg::outer(&ket, &ket).expect("equal dims")
}

/// Outcome of a product-mode decode.
#[derive(Debug)]
pub enum ProductDecode {
    Feasible(Povm),
    /// Pre-repair Frobenius defect ‖Σ elements − I‖_F.
    Infeasible { defect: f64, elements: Vec<Operator> },
}

/// Decode weighted tensor-product elements w_k P_k⊗Q_k. Feasible when the
/// pre-repair defect is at most `PRODUCT_DEFECT_TOL`; a small positive
/// remainder I − Σ is appended as a slack element to close the sum exactly.
pub fn decode_product(raw: &[f64], m: usize) -> Result<ProductDecode, OptimizerError> {
    if raw.len() != m * PRODUCT_REALS_PER_OUTCOME {
        return Err(OptimizerError::BadRawLength {
            expected: m * PRODUCT_REALS_PER_OUTCOME,
            found: raw.len(),
        });
    }
    let mut elements = Vec::with_capacity(m);
    let mut labels = Vec::with_capacity(m);
    for k in 0..m {
        let p = &raw[k * PRODUCT_REALS_PER_OUTCOME..(k + 1) * PRODUCT_REALS_PER_OUTCOME];
        let weight = p[0] * p[0];
        let first = bloch_projector(p[1], p[2]);
        let second = bloch_projector(p[3], p[4]);
        elements.push(tensor_op(&first, &second)?.scale_re(weight));
        labels.push(format!("k{k}"));
    }
    let mut sum = Operator::zeros(4);
    for e in &elements {
        sum = sum.add(e)?;
    }
    let remainder = Operator::identity(4).sub(&sum)?;
    let defect = remainder.frobenius_norm();
    if defect > PRODUCT_DEFECT_TOL {
        return Ok(ProductDecode::Infeasible { defect, elements });
    }
    if defect > crate::measurements::COMPLETENESS_TOL {
        if remainder.min_eigenvalue()? < -POSITIVITY_TOL {
            return Ok(ProductDecode::Infeasible { defect, elements });
        }
        elements.push(remainder);
        labels.push("slack".to_string());
    }
    Ok(ProductDecode::Feasible(Povm::new(elements, labels)?))
}

/// Options for the Nelder-Mead search.
#[derive(Debug, Clone)]
pub struct NelderMeadOptions {
    pub max_iters: usize,
    pub initial_step: f64,
    pub ftol: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions {
            max_iters: 2000,
            initial_step: 0.5,
            ftol: 1e-12,
        }
    }
}

/// Nelder-Mead simplex minimization with dimension-adaptive coefficients.
/// Deterministic: no randomness beyond the starting point.
pub fn nelder_mead(
    f: &(impl Fn(&[f64]) -> f64 + ?Sized),
    x0: &[f64],
    options: &NelderMeadOptions,
) -> (Vec<f64>, f64) {
    let n = x0.len();
    let nf = n as f64;
    // Gao-Han adaptive parameters
    let alpha = 1.0;
    let beta = 1.0 + 2.0 / nf;
    let gamma = 0.75 - 1.0 / (2.0 * nf);
    let delta = 1.0 - 1.0 / nf;

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += options.initial_step;
        let fx = f(&x);
        simplex.push((x, fx));
    }

    for _ in 0..options.max_iters {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[n].1 - simplex[0].1;
        if spread.abs() <= options.ftol * (1.0 + simplex[0].1.abs()) {
            break;
        }
        // centroid of all but the worst
        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / nf;
            }
        }
        let worst = simplex[n].clone();
        let combine = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&worst.0)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let reflected = combine(alpha);
        let f_reflected = f(&reflected);
        if f_reflected < simplex[0].1 {
            let expanded = combine(beta);
            let f_expanded = f(&expanded);
            simplex[n] = if f_expanded < f_reflected {
                (expanded, f_expanded)
            } else {
                (reflected, f_reflected)
            };
        } else if f_reflected < simplex[n - 1].1 {
            simplex[n] = (reflected, f_reflected);
        } else {
            let contracted = if f_reflected < worst.1 {
                combine(gamma)
            } else {
                combine(-gamma)
            };
            let f_contracted = f(&contracted);
            if f_contracted < worst.1.min(f_reflected) {
                simplex[n] = (contracted, f_contracted);
            } else {
                // shrink toward the best vertex
                let best = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    for (xi, bi) in vertex.0.iter_mut().zip(&best) {
                        *xi = bi + delta * (*xi - bi);
                    }
                    vertex.1 = f(&vertex.0);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex.swap_remove(0)
}

/// Compass (coordinate-perturbation) minimization: opportunistic polling
/// along each coordinate with step halving on failed sweeps, accelerated by
/// pattern moves along the aggregated sweep direction. Deterministic.
/// Optional `proposals` are deterministic candidate points tried after each
/// sweep and accepted only when they improve the objective.
pub fn compass_search(
    f: &(impl Fn(&[f64]) -> f64 + ?Sized),
    x0: &[f64],
    mut step: f64,
    max_evals: usize,
    proposals: Option<&dyn Fn(&[f64]) -> Vec<Vec<f64>>>,
) -> (Vec<f64>, f64) {
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    let mut evals = 1;
    let n = x.len();
    while evals < max_evals && step > 1e-10 {
        let before = x.clone();
        let mut improved = false;
        for i in 0..n {
            for sgn in [1.0, -1.0] {
                let old = x[i];
                x[i] = old + sgn * step;
                let fy = f(&x);
                evals += 1;
                if fy < fx {
                    fx = fy;
                    improved = true;
                    break;
                }
                x[i] = old;
                if evals >= max_evals {
                    return (x, fx);
                }
            }
        }
        if improved {
            loop {
                let y: Vec<f64> = x
                    .iter()
                    .zip(&before)
                    .map(|(xi, bi)| xi + (xi - bi))
                    .collect();
                let fy = f(&y);
                evals += 1;
                if fy < fx {
                    x = y;
                    fx = fy;
                } else {
                    break;
                }
                if evals >= max_evals {
                    return (x, fx);
                }
            }
        }
        if let Some(p) = proposals {
            for y in p(&x) {
                let fy = f(&y);
                evals += 1;
                if fy < fx {
                    x = y;
                    fx = fy;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (x, fx)
}

fn product_grams(raw: &[f64], m: usize) -> Vec<Operator> {
    (0..m)
        .map(|k| {
            let p = &raw[k * PRODUCT_REALS_PER_OUTCOME..(k + 1) * PRODUCT_REALS_PER_OUTCOME];
            let first = bloch_projector(p[1], p[2]);
            let second = bloch_projector(p[3], p[4]);
            tensor_op(&first, &second).expect("qubit projectors")
        })
        .collect()
}

/// Least-squares weights minimizing the completeness defect at fixed angles:
/// the defect is quadratic in the squared weights, so the optimal values
/// solve the normal equations A v = b with A_kl = Re⟨G_k, G_l⟩, b_k = tr G_k.
fn snap_weights(raw: &[f64], m: usize) -> Vec<f64> {
    let grams = product_grams(raw, m);
    let mut a = Operator::zeros(m);
    let mut b = vec![0.0; m];
    for k in 0..m {
        b[k] = grams[k].trace().re;
        for l in 0..m {
            let mut ip = 0.0;
            for (x, y) in grams[k].entries().iter().zip(grams[l].entries()) {
                ip += (x.conj() * y).re;
            }
            a.set(k, l, Complex::new(ip, 0.0));
        }
    }
    let mut out = raw.to_vec();
    let Ok((eigs, vecs)) = crate::linalg::hermitian_eigen(&a) else {
        return out;
    };
    let cutoff = 1e-12 * eigs.iter().fold(0.0f64, |acc, &e| acc.max(e.abs()));
    let mut v = vec![0.0; m];
    for (i, &lam) in eigs.iter().enumerate() {
        if lam.abs() <= cutoff {
            continue;
        }
        let mut proj = 0.0;
        for k in 0..m {
            proj += vecs.get(k, i).re * b[k];
        }
        for k in 0..m {
            v[k] += vecs.get(k, i).re * proj / lam;
        }
    }
    for k in 0..m {
        out[k * PRODUCT_REALS_PER_OUTCOME] = v[k].max(0.0).sqrt();
    }
    out
}

/// Uniform weight rescale pulling the element sum under the identity, so a
/// positive slack remainder exists when the sum slightly overshoots.
fn psd_rescale(raw: &[f64], m: usize) -> Vec<f64> {
    let grams = product_grams(raw, m);
    let mut sum = Operator::zeros(4);
    for (k, g) in grams.iter().enumerate() {
        let w = raw[k * PRODUCT_REALS_PER_OUTCOME];
        sum = sum.add(&g.scale_re(w * w)).expect("same dims");
    }
    let mut out = raw.to_vec();
    let Ok(eigs) = crate::linalg::hermitian_eigenvalues(&sum) else {
        return out;
    };
    let lam_max = eigs[eigs.len() - 1];
    if lam_max > 0.0 {
        let s = (1.0 / lam_max).sqrt();
        for k in 0..m {
            out[k * PRODUCT_REALS_PER_OUTCOME] *= s;
        }
    }
    out
}

/// Apply a single-qubit unitary to the Bloch-angle ket and re-extract angles.
fn rotate_bloch(theta: f64, phi: f64, u: &Operator) -> (f64, f64) {
    let (s, c) = (theta / 2.0).sin_cos();
    let ket = StateVector::new(vec![Complex::new(c, 0.0), Complex::from_polar(s, phi)]);
    let v = u.apply(&ket).expect("qubit ket");
    let a = v.amplitudes();
    let t = 2.0 * a[1].norm().atan2(a[0].norm());
    let p = if a[1].norm() > 1e-14 && a[0].norm() > 1e-14 {
        a[1].arg() - a[0].arg()
    } else {
        0.0
    };
    (t, p)
}

/// Candidates replacing all six outcomes by the cyclic-rotation orbit of one
/// anchor pair. The double-trine ensemble is invariant under the cyclic
/// unitary, so a covariant POVM attains its optimum; offering symmetrized
/// variants lets the search exploit that without being forced to.
fn covariant_candidates(raw: &[f64], m: usize) -> Vec<Vec<f64>> {
    if m != 6 {
        return Vec::new();
    }
    let (u, _) = crate::measurements::cyclic_unitary();
    let per = PRODUCT_REALS_PER_OUTCOME;
    let mut out = Vec::new();
    for anchor in [0usize, 2, 4] {
        let mut cand = vec![0.0; raw.len()];
        for (pair, slot) in [(anchor, 0usize), (anchor + 1, 1)] {
            let p = &raw[pair * per..(pair + 1) * per];
            let (mut t1, mut p1) = (p[1], p[2]);
            let (mut t2, mut p2) = (p[3], p[4]);
            for k in 0..3 {
                let dst = (2 * k + slot) * per;
                cand[dst] = p[0];
                cand[dst + 1] = t1;
                cand[dst + 2] = p1;
                cand[dst + 3] = t2;
                cand[dst + 4] = p2;
                (t1, p1) = rotate_bloch(t1, p1, &u);
                (t2, p2) = rotate_bloch(t2, p2, &u);
            }
        }
        out.push(cand);
    }
    out
}

fn bloch_angles_of(ket: &StateVector) -> (f64, f64) {
    let a = ket.amplitudes();
    let t = 2.0 * a[1].norm().atan2(a[0].norm());
    let p = if a[1].norm() > 1e-14 && a[0].norm() > 1e-14 {
        a[1].arg() - a[0].arg()
    } else {
        0.0
    };
    (t, p)
}

/// Structured starting point: counter-rotated trine pairs
/// (Rψ_j ⊗ R⁻¹ψ_j and the swap) with uniform weights. For generic rotation
/// angles these are far from complete; the search must still locate the
/// feasible manifold and climb it.
fn trine_pair_start(theta: f64) -> Vec<f64> {
    let r_op = crate::measurements::rotation(theta);
    let r_inv = r_op.adjoint();
    let mut raw = Vec::new();
    for psi in crate::ensembles::trine_states().iter() {
        let plus = r_op.apply(psi).expect("qubit ket");
        let minus = r_inv.apply(psi).expect("qubit ket");
        for (first, second) in [(&plus, &minus), (&minus, &plus)] {
            let (t1, p1) = bloch_angles_of(first);
            let (t2, p2) = bloch_angles_of(second);
            raw.extend([(2.0f64 / 3.0).sqrt(), t1, p1, t2, p2]);
        }
    }
    raw
}

fn global_restart(ensemble: &Ensemble, m: usize, iters: usize, seed: u64) -> (Vec<f64>, f64) {
    let n = m * SEED_REALS_DIM4;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x0: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let f = |raw: &[f64]| match decode_global(raw, m) {
        Ok(povm) => -feasible_mi(ensemble, &povm),
        Err(_) => f64::INFINITY,
    };
    let (x, fx) = compass_search(&f, &x0, 0.5, 24 * iters, None);
    (x, -fx)
}

/// One product-mode restart: coarse penalized climb, then alternating
/// defect projection / penalized climb until the feasible manifold is
/// reached, then a projected random-direction polish along it. Returns the
/// best feasible point found, scored by exact mutual information.
fn product_restart(
    ensemble: &Ensemble,
    m: usize,
    iters: usize,
    seed: u64,
    start: Option<Vec<f64>>,
) -> Option<(Vec<f64>, f64)> {
    let n = m * PRODUCT_REALS_PER_OUTCOME;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let random_start: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut x = start.unwrap_or(random_start);

    let neg_obj = |raw: &[f64]| -objective_product(ensemble, raw, m);
    let defect_of = |raw: &[f64]| match decode_product(raw, m) {
        Ok(ProductDecode::Feasible(_)) => 0.0,
        Ok(ProductDecode::Infeasible { defect, .. }) => defect,
        Err(_) => f64::INFINITY,
    };
    let proposals = |r: &[f64]| {
        let a = snap_weights(r, m);
        let b = psd_rescale(r, m);
        let c = psd_rescale(&a, m);
        let mut cands = vec![a, b, c];
        for cov in covariant_candidates(r, m) {
            cands.push(snap_weights(&cov, m));
            cands.push(cov);
        }
        cands
    };

    // phase 1: coarse climb of the penalized objective
    for step in [0.3, 0.05] {
        let (nx, _) = nelder_mead(
            &neg_obj,
            &x,
            &NelderMeadOptions {
                max_iters: 2 * iters,
                initial_step: step,
                ftol: 1e-13,
            },
        );
        x = nx;
        for y in proposals(&x) {
            if neg_obj(&y) < neg_obj(&x) {
                x = y;
            }
        }
    }

    // phase 2: alternate defect projection with short penalized climbs
    let mut best: Option<(Vec<f64>, f64)> = None;
    let cycles = (iters / 20).clamp(4, 100);
    let mut climb_step = 0.01;
    let mut stale = 0usize;
    for _ in 0..cycles {
        let (px, pd) = compass_search(&defect_of, &x, climb_step, 4 * iters, Some(&proposals));
        x = px;
        if pd == 0.0 {
            let fx = -neg_obj(&x);
            if best.as_ref().map(|(_, bf)| fx > *bf).unwrap_or(true) {
                best = Some((x.clone(), fx));
                stale = 0;
            } else {
                stale += 1;
            }
        }
        if best.is_some() && stale > 15 {
            break;
        }
        let (nx, _) = nelder_mead(
            &neg_obj,
            &x,
            &NelderMeadOptions {
                max_iters: (3 * iters / 10).max(50),
                initial_step: climb_step,
                ftol: 1e-13,
            },
        );
        x = nx;
        climb_step = (climb_step * 0.97).max(1e-5);
    }

    // phase 3: projected random-direction polish along the feasible manifold
    if let Some((bx, bf)) = &best {
        let mut px = bx.clone();
        let mut pf = *bf;
        let mut eps = 0.02;
        let mut fails = 0usize;
        for _ in 0..(iters / 5).max(10) {
            let dir: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let norm: f64 = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
            let y: Vec<f64> = px
                .iter()
                .zip(&dir)
                .map(|(xi, di)| xi + eps * di / norm)
                .collect();
            let (py, pd) = compass_search(&defect_of, &y, eps / 4.0, 3 * iters / 2, Some(&proposals));
            if pd == 0.0 {
                let fy = -neg_obj(&py);
                if fy > pf {
                    px = py;
                    pf = fy;
                    fails = 0;
                    continue;
                }
            }
            eps = (eps * 0.99).max(1e-4);
            fails += 1;
            if fails > 120 {
                break;
            }
        }
        best = Some((px, pf));
    }
    best
}

fn objective_product(ensemble: &Ensemble, raw: &[f64], m: usize) -> f64 {
    match decode_product(raw, m) {
        Ok(ProductDecode::Feasible(povm)) => feasible_mi(ensemble, &povm),
        Ok(ProductDecode::Infeasible { defect, elements }) => {
            penalized_objective(ensemble, &elements, defect)
        }
        Err(_) => f64::NEG_INFINITY,
    }
}

/// Result of a `maximize_mi` run.
#[derive(Debug)]
pub struct MaximizeResult {
    pub povm: Povm,
    pub mi_bits: f64,
    pub classification: PovmClass,
    /// Best objective after each restart; non-decreasing.
    pub trace: Vec<f64>,
    pub raw: Vec<f64>,
}

fn feasible_mi(ensemble: &Ensemble, povm: &Povm) -> f64 {
    outcome_probabilities(ensemble, povm)
        .map(|jd| mutual_information(&jd))
        .unwrap_or(f64::NEG_INFINITY)
}

/// Penalized proxy objective for infeasible product decodes: mutual
/// information of the row-normalized pseudo-distribution minus a defect
/// penalty. Coincides in spirit with the feasible objective and steers the
/// search toward completeness.
pub fn penalized_objective(ensemble: &Ensemble, elements: &[Operator], defect: f64) -> f64 {
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(ensemble.len());
    for (state, &prior) in ensemble.states().iter().zip(ensemble.priors()) {
        let mut row: Vec<f64> = elements
            .iter()
            .map(|e| e.expectation(state).unwrap_or(0.0).max(0.0))
            .collect();
        let total: f64 = row.iter().sum();
        if total > 0.0 {
            for v in &mut row {
                *v *= prior / total;
            }
        } else {
            let uniform = prior / row.len() as f64;
            row.iter_mut().for_each(|v| *v = uniform);
        }
        rows.push(row);
    }
    let labels = (0..elements.len()).map(|k| format!("k{k}")).collect();
    let mi = crate::statistics::JointDistribution::new(rows, labels)
        .map(|jd| mutual_information(&jd))
        .unwrap_or(0.0);
    mi - DEFECT_PENALTY * defect
}

fn decode_feasible(param: &PovmParameterization, raw: &[f64]) -> Option<Povm> {
    match param.mode {
        Mode::Global => decode_global(raw, param.outcomes).ok(),
        Mode::Product => match decode_product(raw, param.outcomes) {
            Ok(ProductDecode::Feasible(povm)) => Some(povm),
            _ => None,
        },
    }
}

/// Multi-restart derivative-free maximization of mutual information over the
/// chosen parameterization. Global mode runs a compass search per restart
/// (feasible by construction); product mode runs a three-phase pipeline per
/// restart (penalized climb, feasibility projection, manifold polish), with
/// even restarts seeded from structured counter-rotated trine pairs when the
/// outcome count is six. Restarts are independent; the result reduces by max
/// feasible mutual information with a lexicographic tie-break on the raw
/// vector, so the outcome is deterministic for a fixed seed.
pub fn maximize_mi(
    ensemble: &Ensemble,
    param: PovmParameterization,
    restarts: usize,
    iters: usize,
    seed: u64,
) -> Result<MaximizeResult, OptimizerError> {
    let restarts = restarts.max(1) as u64;
    let structured = (restarts as usize).div_ceil(2);
    let restart_results: Vec<Option<(Vec<f64>, f64)>> = (0..restarts)
        .into_par_iter()
        .map(|r| match param.mode {
            Mode::Global => Some(global_restart(
                ensemble,
                param.outcomes,
                iters,
                seed.wrapping_add(r),
            )),
            Mode::Product => {
                // even restarts take structured starts over a grid of
                // rotation angles when the search space allows it
                let start = if r % 2 == 0 && param.outcomes == 6 && ensemble.dim() == 4 {
                    let k = (r / 2) as f64;
                    let span = (structured.saturating_sub(1)).max(1) as f64;
                    Some(trine_pair_start((10.0 + 70.0 * k / span).to_radians()))
                } else {
                    None
                };
                product_restart(ensemble, param.outcomes, iters, seed.wrapping_add(r), start)
            }
        })
        .collect();

    let mut trace = Vec::with_capacity(restart_results.len());
    let mut best: Option<(Vec<f64>, f64)> = None;
    for result in restart_results {
        if let Some((x, mi)) = result {
            let better = match &best {
                None => true,
                Some((bx, bmi)) => mi > *bmi || (mi == *bmi && x.iter().lt(bx.iter())),
            };
            if better {
                best = Some((x, mi));
            }
        }
        trace.push(best.as_ref().map(|(_, mi)| *mi).unwrap_or(f64::NEG_INFINITY));
    }
    let (raw, mi_bits) = best.ok_or(OptimizerError::NoFeasiblePovm)?;
    let povm = decode_feasible(&param, &raw).ok_or(OptimizerError::NoFeasiblePovm)?;
    let classification = classify_povm(&povm)?;
    Ok(MaximizeResult {
        mi_bits,
        povm,
        classification,
        trace,
        raw,
    })
}
