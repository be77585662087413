use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::qubits::QubitSubset;
use super::state::{embed_raw, inner, norm_sqr, StateVector};
use crate::error::{Error, Result};

pub const ORTHO_TOL: f64 = 1e-10;
/// Largest tolerated remainder probability for bases without a remainder outcome.
pub const LEAK_TOL: f64 = 1e-9;
const DEGENERATE_TOL: f64 = 1e-14;

/// Orthonormal vectors on a qubit subset, possibly spanning only a subspace.
///
/// When `remainder_allowed` is set the projector onto the orthogonal
/// complement is an extra outcome, listed last.
#[derive(Clone, Debug)]
pub struct MeasurementBasis {
    name: String,
    subset: QubitSubset,
    vectors: Vec<StateVector>,
    labels: Vec<String>,
    remainder_allowed: bool,
}

impl MeasurementBasis {
    pub fn new(
        name: impl Into<String>,
        subset: QubitSubset,
        vectors: Vec<StateVector>,
        labels: Vec<String>,
        remainder_allowed: bool,
    ) -> Result<Self> {
        let invalid = |reason: String| Err(Error::InvalidBasis { reason });
        if subset.is_empty() {
            return Err(Error::EmptySubset);
        }
        if vectors.is_empty() {
            return invalid("no vectors".into());
        }
        if vectors.len() != labels.len() {
            return invalid(format!("{} vectors but {} labels", vectors.len(), labels.len()));
        }
        if vectors.len() > 1 << subset.len() {
            return invalid(format!(
                "{} vectors exceed register dimension {}",
                vectors.len(),
                1 << subset.len()
            ));
        }
        for (i, v) in vectors.iter().enumerate() {
            if v.n_qubits() != subset.len() {
                return invalid(format!(
                    "vector {i} has {} qubits, subset has {}",
                    v.n_qubits(),
                    subset.len()
                ));
            }
            if (v.norm_sqr() - 1.0).abs() > ORTHO_TOL {
                return invalid(format!("vector {i} not normalized"));
            }
            for (j, w) in vectors.iter().enumerate().take(i) {
                let ov = inner(w.amplitudes(), v.amplitudes()).norm();
                if ov > ORTHO_TOL {
                    return invalid(format!("vectors {j} and {i} overlap by {ov:e}"));
                }
            }
        }
        Ok(MeasurementBasis {
            name: name.into(),
            subset,
            vectors,
            labels,
            remainder_allowed,
        })
    }

    /// The computational basis on `subset`, outcome labels as bit strings.
    pub fn computational(subset: QubitSubset) -> Self {
        let k = subset.len();
        let vectors = (0..1usize << k).map(|i| StateVector::basis(k, i)).collect();
        let labels = (0..1usize << k)
            .map(|i| if k == 0 { String::new() } else { format!("{i:0k$b}") })
            .collect();
        MeasurementBasis::new("computational", subset, vectors, labels, false)
            .expect("computational basis is orthonormal")
    }

    pub fn with_subset(&self, subset: QubitSubset) -> Result<Self> {
        MeasurementBasis::new(
            self.name.clone(),
            subset,
            self.vectors.clone(),
            self.labels.clone(),
            self.remainder_allowed,
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn subset(&self) -> &QubitSubset {
        &self.subset
    }

    pub fn vectors(&self) -> &[StateVector] {
        &self.vectors
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn remainder_allowed(&self) -> bool {
        self.remainder_allowed
    }

    pub fn is_complete(&self) -> bool {
        self.vectors.len() == 1 << self.subset.len()
    }

    /// Listed outcomes plus the remainder outcome if allowed.
    pub fn outcome_count(&self) -> usize {
        self.vectors.len() + usize::from(self.remainder_allowed)
    }

    pub fn label(&self, outcome: usize) -> &str {
        self.labels.get(outcome).map(String::as_str).unwrap_or("remainder")
    }
}

/// How the outcome of a measurement is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selector {
    /// Inverse-CDF sampling against a uniform draw in [0, 1).
    Draw(f64),
    /// A fixed outcome index, for exhaustive branch enumeration.
    Forced(usize),
}

#[derive(Clone, Debug)]
pub struct Measurement {
    pub outcome: usize,
    pub label: String,
    pub probability: f64,
    /// Probabilities of the listed outcomes, in order.
    pub probabilities: Vec<f64>,
    pub remainder_probability: f64,
    /// Complement-register state for complete bases, otherwise the
    /// renormalized projection of the full register.
    pub post_state: StateVector,
    /// Renormalized projection of the full register.
    pub collapsed: StateVector,
}

/// Outcome probabilities of `basis` on `state` and the remainder probability.
pub fn outcome_probabilities(state: &StateVector, basis: &MeasurementBasis) -> Result<(Vec<f64>, f64)> {
    let residues = residues(state, basis)?;
    let probs: Vec<f64> = residues.iter().map(|r| norm_sqr(r)).collect();
    let remainder = (state.norm_sqr() - probs.iter().sum::<f64>()).max(0.0);
    Ok((probs, remainder))
}

fn residues(state: &StateVector, basis: &MeasurementBasis) -> Result<Vec<Vec<C64>>> {
    basis.subset.check_within(state.n_qubits())?;
    basis.vectors.iter().map(|v| state.contract(&basis.subset, v)).collect()
}

/// Projective measurement of `basis` on `state`.
pub fn measure_in_basis(state: &StateVector, basis: &MeasurementBasis, selector: Selector) -> Result<Measurement> {
    let residues = residues(state, basis)?;
    let probs: Vec<f64> = residues.iter().map(|r| norm_sqr(r)).collect();
    let remainder = (1.0 - probs.iter().sum::<f64>()).max(0.0);
    if !basis.remainder_allowed && remainder > LEAK_TOL {
        return Err(Error::ProbabilityLeak { leak: remainder });
    }
    let mut all = probs.clone();
    if basis.remainder_allowed {
        all.push(remainder);
    }
    let outcome = match selector {
        Selector::Forced(k) => {
            if k >= all.len() {
                return Err(Error::OutcomeOutOfRange {
                    outcome: k,
                    count: all.len(),
                });
            }
            k
        }
        Selector::Draw(draw) => {
            if !(0.0..1.0).contains(&draw) {
                return Err(Error::BadDraw { draw });
            }
            inverse_cdf(&all, draw)
        }
    };
    let probability = all[outcome];
    if probability < DEGENERATE_TOL {
        return Err(Error::DegenerateState { outcome, probability });
    }
    let n = state.n_qubits();
    let (post_state, collapsed) = if outcome < residues.len() {
        let v = &basis.vectors[outcome];
        let rest = &residues[outcome];
        let full = embed_raw(n, &basis.subset, v.amplitudes(), rest);
        let collapsed = StateVector::normalized(full)?;
        let post = if basis.is_complete() {
            StateVector::normalized(rest.clone())?
        } else {
            collapsed.clone()
        };
        (post, collapsed)
    } else {
        let mut full = state.amplitudes().to_vec();
        for (v, rest) in basis.vectors.iter().zip(&residues) {
            let p = embed_raw(n, &basis.subset, v.amplitudes(), rest);
            for (f, q) in full.iter_mut().zip(p) {
                *f -= q;
            }
        }
        let collapsed = StateVector::normalized(full)?;
        (collapsed.clone(), collapsed)
    };
    Ok(Measurement {
        outcome,
        label: basis.label(outcome).to_string(),
        probability,
        probabilities: probs,
        remainder_probability: remainder,
        post_state,
        collapsed,
    })
}

/// First outcome whose cumulative probability exceeds `draw`; zero-probability
/// outcomes are never chosen.
fn inverse_cdf(probs: &[f64], draw: f64) -> usize {
    let mut cum = 0.0;
    let mut last_nonzero = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p <= DEGENERATE_TOL {
            continue;
        }
        last_nonzero = i;
        cum += p;
        if draw < cum {
            return i;
        }
    }
    last_nonzero
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2 as H;

    fn q(labels: &[usize]) -> QubitSubset {
        QubitSubset::new(labels.to_vec()).unwrap()
    }

    #[test]
    fn computational_measurement_of_zero() {
        let s = StateVector::from_bits("0").unwrap();
        let m = measure_in_basis(&s, &MeasurementBasis::computational(q(&[1])), Selector::Draw(0.5)).unwrap();
        assert_eq!(m.outcome, 0);
        assert_eq!(m.probability, 1.0);
        assert_eq!(m.post_state.n_qubits(), 0);
        assert_eq!(m.post_state, StateVector::empty());
    }

    #[test]
    fn inverse_cdf_follows_listed_order() {
        let s = StateVector::from_reals(&[H, H]).unwrap();
        let b = MeasurementBasis::computational(q(&[1]));
        assert_eq!(measure_in_basis(&s, &b, Selector::Draw(0.0)).unwrap().outcome, 0);
        assert_eq!(measure_in_basis(&s, &b, Selector::Draw(0.49)).unwrap().outcome, 0);
        assert_eq!(measure_in_basis(&s, &b, Selector::Draw(0.51)).unwrap().outcome, 1);
        assert!(matches!(
            measure_in_basis(&s, &b, Selector::Draw(1.0)),
            Err(Error::BadDraw { .. })
        ));
    }

    #[test]
    fn zero_probability_outcomes_are_skipped() {
        let s = StateVector::from_bits("1").unwrap();
        let b = MeasurementBasis::computational(q(&[1]));
        assert_eq!(measure_in_basis(&s, &b, Selector::Draw(0.0)).unwrap().outcome, 1);
        assert!(matches!(
            measure_in_basis(&s, &b, Selector::Forced(0)),
            Err(Error::DegenerateState { outcome: 0, .. })
        ));
    }

    #[test]
    fn leak_detected_without_remainder() {
        let s = StateVector::from_bits("01").unwrap();
        let b = MeasurementBasis::new(
            "partial",
            q(&[1, 2]),
            vec![StateVector::from_bits("00").unwrap()],
            vec!["00".into()],
            false,
        )
        .unwrap();
        assert!(matches!(
            measure_in_basis(&s, &b, Selector::Draw(0.1)),
            Err(Error::ProbabilityLeak { .. })
        ));
        let with_rest = MeasurementBasis::new(
            "partial",
            q(&[1, 2]),
            vec![StateVector::from_bits("00").unwrap()],
            vec!["00".into()],
            true,
        )
        .unwrap();
        let m = measure_in_basis(&s, &with_rest, Selector::Draw(0.1)).unwrap();
        assert_eq!(m.label, "remainder");
        assert!((m.remainder_probability - 1.0).abs() < 1e-15);
        assert_eq!(m.post_state, s);
    }

    #[test]
    fn basis_validation() {
        let zero = StateVector::from_bits("0").unwrap();
        assert!(MeasurementBasis::new(
            "dup",
            q(&[1]),
            vec![zero.clone(), zero.clone()],
            vec!["a".into(), "b".into()],
            false
        )
        .is_err());
        assert!(MeasurementBasis::new("n", q(&[1, 2]), vec![zero.clone()], vec!["a".into()], false).is_err());
        assert!(MeasurementBasis::new("l", q(&[1]), vec![zero], vec![], false).is_err());
    }

    #[test]
    fn partial_basis_post_state_keeps_full_register() {
        // measure qubit 2 of |+>|1> with a one-vector basis plus remainder
        let s = StateVector::from_reals(&[0.0, H, 0.0, H]).unwrap();
        let b = MeasurementBasis::new(
            "one",
            q(&[2]),
            vec![StateVector::from_bits("1").unwrap()],
            vec!["1".into()],
            true,
        )
        .unwrap();
        let m = measure_in_basis(&s, &b, Selector::Draw(0.3)).unwrap();
        assert_eq!(m.outcome, 0);
        assert_eq!(m.post_state.n_qubits(), 2);
        assert!(m.remainder_probability < 1e-15);
    }
}
