//! Outcome probabilities and mutual information, in bits.

use crate::ensembles::Ensemble;
use crate::measurements::Povm;
use thiserror::Error;

/// Entries in [-NEG_TOL, 0) clamp to zero; anything lower is an error.
pub const NEG_TOL: f64 = 1e-12;
/// Tolerance on the total probability mass.
pub const MASS_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatisticsError {
    #[error("ensemble dim {ensemble} does not match POVM dim {povm}")]
    DimensionMismatch { ensemble: usize, povm: usize },
    #[error("probability entry ({row}, {col}) is negative beyond tolerance: {value}")]
    NegativeProbability { row: usize, col: usize, value: f64 },
    #[error("probabilities sum to {sum}, expected 1")]
    NotNormalized { sum: f64 },
    #[error("joint distribution is empty")]
    Empty,
}

/// Joint probabilities p_jk over (state j, outcome k), with outcome labels.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    p: Vec<Vec<f64>>,
    labels: Vec<String>,
}

impl JointDistribution {
    pub fn new(p: Vec<Vec<f64>>, labels: Vec<String>) -> Result<Self, StatisticsError> {
        if p.is_empty() || p[0].is_empty() {
            return Err(StatisticsError::Empty);
        }
        let mut clamped = p;
        let mut total = 0.0;
        for (row, row_vals) in clamped.iter_mut().enumerate() {
            for (col, value) in row_vals.iter_mut().enumerate() {
                if *value < -NEG_TOL {
                    return Err(StatisticsError::NegativeProbability {
                        row,
                        col,
                        value: *value,
                    });
                }
                if *value < 0.0 {
                    *value = 0.0;
                }
                total += *value;
            }
        }
        if (total - 1.0).abs() > MASS_TOL {
            return Err(StatisticsError::NotNormalized { sum: total });
        }
        Ok(JointDistribution { p: clamped, labels })
    }

    pub fn joint(&self) -> &[Vec<f64>] {
        &self.p
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn num_states(&self) -> usize {
        self.p.len()
    }

    pub fn num_outcomes(&self) -> usize {
        self.p[0].len()
    }

    /// Row sums; equal the ensemble priors.
    pub fn priors(&self) -> Vec<f64> {
        self.p.iter().map(|row| row.iter().sum()).collect()
    }

    /// Column sums p_k.
    pub fn outcome_marginals(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.num_outcomes()];
        for row in &self.p {
            for (k, &v) in row.iter().enumerate() {
                out[k] += v;
            }
        }
        out
    }

    /// p_{k|j} for row j; zero row gives zeros.
    pub fn conditionals(&self, j: usize) -> Vec<f64> {
        let prior: f64 = self.p[j].iter().sum();
        if prior <= 0.0 {
            return vec![0.0; self.num_outcomes()];
        }
        self.p[j].iter().map(|&v| v / prior).collect()
    }

    /// CSV: header of outcome labels, one row per state.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("state");
        for label in &self.labels {
            out.push(',');
            out.push_str(label);
        }
        out.push('\n');
        for (j, row) in self.p.iter().enumerate() {
            out.push_str(&format!("{j}"));
            for v in row {
                out.push_str(&format!(",{v:.17e}"));
            }
            out.push('\n');
        }
        out
    }
}

/// p_jk = prior_j · ⟨state_j| element_k |state_j⟩.
pub fn outcome_probabilities(
    ensemble: &Ensemble,
    povm: &Povm,
) -> Result<JointDistribution, StatisticsError> {
    if ensemble.dim() != povm.dim() {
        return Err(StatisticsError::DimensionMismatch {
            ensemble: ensemble.dim(),
            povm: povm.dim(),
        });
    }
    let mut p = Vec::with_capacity(ensemble.len());
    for (state, &prior) in ensemble.states().iter().zip(ensemble.priors()) {
        let row = povm
            .elements()
            .iter()
            .map(|e| prior * e.expectation(state).expect("dims checked"))
            .collect();
        p.push(row);
    }
    JointDistribution::new(p, povm.labels().to_vec())
}

/// −Σ p log₂ p with 0·log 0 = 0.
pub fn shannon_entropy(dist: &[f64]) -> Result<f64, StatisticsError> {
    let mut sum = 0.0;
    for (col, &p) in dist.iter().enumerate() {
        if p < -NEG_TOL {
            return Err(StatisticsError::NegativeProbability {
                row: 0,
                col,
                value: p,
            });
        }
        sum += p.max(0.0);
    }
    if (sum - 1.0).abs() > MASS_TOL {
        return Err(StatisticsError::NotNormalized { sum });
    }
    Ok(dist
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum())
}

fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        p * p.log2()
    } else {
        0.0
    }
}

/// I = −Σ_k p_k log₂ p_k + Σ_j prior_j Σ_k p_{k|j} log₂ p_{k|j}.
pub fn mutual_information(jd: &JointDistribution) -> f64 {
    let marginal_term: f64 = jd.outcome_marginals().iter().map(|&p| -plogp(p)).sum();
    let mut conditional_term = 0.0;
    for (j, prior) in jd.priors().iter().enumerate() {
        if *prior <= 0.0 {
            continue;
        }
        conditional_term += prior
            * jd.conditionals(j)
                .iter()
                .map(|&p| plogp(p))
                .sum::<f64>();
    }
    marginal_term + conditional_term
}

/// The H(state) + H(outcome) − H(joint) form; used as a cross-check.
pub fn mutual_information_entropy_form(jd: &JointDistribution) -> f64 {
    let h_state: f64 = jd.priors().iter().map(|&p| -plogp(p)).sum();
    let h_outcome: f64 = jd.outcome_marginals().iter().map(|&p| -plogp(p)).sum();
    let h_joint: f64 = jd.joint().iter().flatten().map(|&p| -plogp(p)).sum();
    h_state + h_outcome - h_joint
}

/// Closed form for the entangled-basis / six-outcome optimum:
/// log₂3 + p log₂p + 2q log₂q with p = 1/2+√2/3, q = 1/4−1/(3√2).
pub fn optimum_mi_closed_form() -> f64 {
    let s2 = std::f64::consts::SQRT_2;
    let p = 0.5 + s2 / 3.0;
    let q = 0.25 - 1.0 / (3.0 * s2);
    3.0_f64.log2() + plogp(p) + 2.0 * plogp(q)
}
