//! Purities, bipartition entropies, MEMS averages and the dense-coding capacity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qsim::{partial_trace, schmidt_coefficients, DensityMatrix, QubitSubset, StateVector};

pub const ENTROPY_TOL: f64 = 1e-9;
pub const MIXED_TOL: f64 = 1e-10;

pub fn reduced_purity(state: &StateVector, subset: &QubitSubset) -> Result<f64> {
    Ok(partial_trace(state, subset)?.purity())
}

/// All subsets of `1..=n` with exactly `k` labels, ascending lexicographic.
pub fn subsets_of_size(n: usize, k: usize) -> Vec<QubitSubset> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<QubitSubset>) {
        if cur.len() == k {
            out.push(QubitSubset::new(cur.clone()).expect("distinct labels"));
            return;
        }
        for q in start..=n {
            cur.push(q);
            rec(q + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(1, n, k, &mut Vec::new(), &mut out);
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitRecord {
    /// The smaller side of the cut.
    pub split: QubitSubset,
    pub entropy: f64,
    pub purity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitReport {
    pub one_vs_rest: Vec<SplitRecord>,
    pub two_vs_rest: Vec<SplitRecord>,
}

fn record(state: &StateVector, split: QubitSubset) -> Result<SplitRecord> {
    let rho = partial_trace(state, &split)?;
    Ok(SplitRecord {
        split,
        entropy: rho.entropy(),
        purity: rho.purity(),
    })
}

fn require_five(state: &StateVector) -> Result<()> {
    if state.n_qubits() != 5 {
        return Err(Error::DimensionMismatch {
            expected: 32,
            got: state.dim(),
        });
    }
    Ok(())
}

/// The five (4|1) and ten (3|2) cuts of a five-qubit state.
pub fn split_entropies(state: &StateVector) -> Result<SplitReport> {
    require_five(state)?;
    let one = subsets_of_size(5, 1)
        .into_iter()
        .map(|s| record(state, s))
        .collect::<Result<_>>()?;
    let two = subsets_of_size(5, 2)
        .into_iter()
        .map(|s| record(state, s))
        .collect::<Result<_>>()?;
    Ok(SplitReport {
        one_vs_rest: one,
        two_vs_rest: two,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MemsReport {
    pub s1: f64,
    pub s2: f64,
}

pub fn mems(state: &StateVector) -> Result<MemsReport> {
    let r = split_entropies(state)?;
    let mean = |v: &[SplitRecord]| v.iter().map(|x| x.entropy).sum::<f64>() / v.len() as f64;
    Ok(MemsReport {
        s1: mean(&r.one_vs_rest),
        s2: mean(&r.two_vs_rest),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitFormCheck {
    pub split: QubitSubset,
    pub entropy: f64,
    pub entropy_ok: bool,
    /// Largest entrywise distance of the two-qubit reduction from I/4.
    pub mixed_deviation: f64,
    pub mixed_ok: bool,
    pub schmidt: Vec<f64>,
    pub schmidt_ok: bool,
    pub pass: bool,
}

/// Checks every (3|2) cut for entropy 2, an I/4 pair reduction and a flat
/// Schmidt spectrum.
pub fn verify_split_form(state: &StateVector) -> Result<Vec<SplitFormCheck>> {
    require_five(state)?;
    let target = DensityMatrix::maximally_mixed(2);
    subsets_of_size(5, 2)
        .into_iter()
        .map(|split| {
            let rho = partial_trace(state, &split)?;
            let entropy = rho.entropy();
            let entropy_ok = (entropy - 2.0).abs() < ENTROPY_TOL;
            let mixed_deviation = rho.max_abs_diff(&target);
            let mixed_ok = mixed_deviation < MIXED_TOL;
            let mut schmidt = schmidt_coefficients(state, &split)?;
            schmidt.truncate(4);
            let schmidt_ok = schmidt.len() == 4 && schmidt.iter().all(|c| (c - 0.5).abs() < ENTROPY_TOL);
            Ok(SplitFormCheck {
                split,
                entropy,
                entropy_ok,
                mixed_deviation,
                mixed_ok,
                schmidt,
                schmidt_ok,
                pass: entropy_ok && mixed_ok && schmidt_ok,
            })
        })
        .collect()
}

/// `log2 d_A + S(ρ_B) − S(ρ_AB)` for a pure state, where B is the complement of `alice`.
pub fn dense_capacity(state: &StateVector, alice: &QubitSubset) -> Result<f64> {
    let n = state.n_qubits();
    alice.check_within(n)?;
    if alice.is_empty() {
        return Err(Error::EmptySubset);
    }
    let bob = alice.complement(n);
    if bob.is_empty() {
        return Err(Error::Message("alice must be a proper subset".into()));
    }
    let s_b = partial_trace(state, &bob)?.entropy();
    // the whole register is pure
    let s_ab = 0.0;
    Ok(alice.len() as f64 + s_b - s_ab)
}
