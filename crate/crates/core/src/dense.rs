//! Five-bit dense coding: Alice encodes with a Pauli triple on Brown qubits
//! 1–3, sends them to Bob, and Bob measures all five in the codeword basis.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::brown::{bell_state, brown_state, generalized_brown, BellKind, GeneralizedIndex};
use crate::diagnostics::dense_capacity;
use crate::error::{Error, Result};
use crate::locc::{ProtocolDescriptor, Run, Schedule, Session};
use crate::oracle::gram_deviation;
use crate::qsim::pauli::{all_products, product_matrix, product_symbol};
use crate::qsim::state::inner;
use crate::qsim::{fidelity, partial_trace, DensityMatrix, MeasurementBasis, PauliLabel, QubitSubset, StateVector};

use PauliLabel::{I, X, Y, Z};

pub const GRAM_TOL: f64 = 1e-10;
pub const DECODE_THRESHOLD: f64 = 1.0 - 1e-8;

/// Message `m` is encoded by the `m`-th triple, first label on qubit 1.
pub const TRIPLES: [[PauliLabel; 3]; 32] = [
    [I, I, I],
    [I, Z, I],
    [Z, I, I],
    [Z, Z, I],
    [X, X, I],
    [X, Y, I],
    [Y, X, I],
    [Y, Y, I],
    [I, X, I],
    [I, Y, I],
    [Z, X, I],
    [Z, Y, I],
    [X, I, I],
    [X, Z, I],
    [Y, I, I],
    [Y, Z, I],
    [I, I, X],
    [I, Z, X],
    [Z, I, X],
    [Z, Z, X],
    [X, X, X],
    [X, Y, X],
    [Y, X, X],
    [Y, Y, X],
    [I, X, X],
    [I, Y, X],
    [Z, X, X],
    [Z, Y, X],
    [X, I, X],
    [X, Z, X],
    [Y, I, X],
    [Y, Z, X],
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseCode {
    pub message: u32,
    pub triple: [PauliLabel; 3],
    pub codeword: StateVector,
}

#[derive(Clone, Debug)]
pub struct CodeTable {
    codes: Vec<DenseCode>,
    gram_deviation: f64,
}

impl CodeTable {
    pub fn codes(&self) -> &[DenseCode] {
        &self.codes
    }

    pub fn gram_deviation(&self) -> f64 {
        self.gram_deviation
    }

    pub fn codewords(&self) -> Vec<StateVector> {
        self.codes.iter().map(|c| c.codeword.clone()).collect()
    }

    /// Bob's measurement: one outcome per message, labelled by its bits.
    pub fn basis(&self) -> MeasurementBasis {
        MeasurementBasis::new(
            "codewords",
            QubitSubset::span(1, 5),
            self.codewords(),
            (0..32).map(|m| format!("{m:05b}")).collect(),
            false,
        )
        .expect("Gram check passed")
    }
}

pub fn alice_qubits() -> QubitSubset {
    QubitSubset::span(1, 3)
}

pub fn bob_qubits() -> QubitSubset {
    QubitSubset::span(4, 5)
}

/// `P1 ⊗ P2 ⊗ P3` on qubits 1–3 of `state`.
pub fn apply_triple(state: &StateVector, triple: &[PauliLabel; 3]) -> Result<StateVector> {
    state.apply_on_subset(&product_matrix(triple), &alice_qubits())
}

/// Encodes all 32 triples and checks that the codewords are orthonormal.
pub fn build_code_table() -> Result<CodeTable> {
    let brown = brown_state();
    let codes: Vec<DenseCode> = TRIPLES
        .iter()
        .enumerate()
        .map(|(m, t)| {
            Ok(DenseCode {
                message: m as u32,
                triple: *t,
                codeword: apply_triple(&brown, t)?,
            })
        })
        .collect::<Result<_>>()?;
    let words: Vec<StateVector> = codes.iter().map(|c| c.codeword.clone()).collect();
    let deviation = gram_deviation(&words);
    if deviation > GRAM_TOL {
        return Err(Error::GramFailure { deviation });
    }
    Ok(CodeTable {
        codes,
        gram_deviation: deviation,
    })
}

pub fn code_table() -> Result<&'static CodeTable> {
    static CELL: OnceLock<Result<CodeTable>> = OnceLock::new();
    CELL.get_or_init(build_code_table).as_ref().map_err(Clone::clone)
}

pub fn encode(message: u32) -> Result<StateVector> {
    if message > 31 {
        return Err(Error::MessageOutOfRange { message });
    }
    Ok(code_table()?.codes[message as usize].codeword.clone())
}

pub fn decode(state: &StateVector) -> Result<u32> {
    if state.n_qubits() != 5 {
        return Err(Error::DimensionMismatch {
            expected: 32,
            got: state.dim(),
        });
    }
    let mut best: f64 = 0.0;
    for c in code_table()?.codes() {
        let p = inner(c.codeword.amplitudes(), state.amplitudes()).norm_sqr();
        if p > DECODE_THRESHOLD {
            return Ok(c.message);
        }
        best = best.max(p);
    }
    Err(Error::Undecodable { best_overlap: best })
}

/// Largest entrywise distance of Bob's reduced state from I/4 over all messages.
pub fn bob_state_deviation() -> Result<f64> {
    let target = DensityMatrix::maximally_mixed(2);
    let mut worst: f64 = 0.0;
    for c in code_table()?.codes() {
        worst = worst.max(partial_trace(&c.codeword, &bob_qubits())?.max_abs_diff(&target));
    }
    Ok(worst)
}

/// Gram deviation of the codewords whose third operator is the identity.
pub fn four_bit_subtable_deviation() -> Result<(usize, f64)> {
    let words: Vec<StateVector> = code_table()?
        .codes()
        .iter()
        .filter(|c| c.triple[2] == I)
        .map(|c| c.codeword.clone())
        .collect();
    Ok((words.len(), gram_deviation(&words)))
}

pub fn descriptor() -> ProtocolDescriptor {
    ProtocolDescriptor {
        protocol: "dense".into(),
        cbits: 0,
        joint_events: 0,
        min_fidelity: 1.0 - 1e-10,
    }
}

/// Encodes `message`, hands Alice's qubits to Bob and lets him measure.
/// Returns the run and Bob's decoded message.
pub fn run_dense(message: u32, schedule: &Schedule) -> Result<(Run, u32)> {
    if message > 31 {
        return Err(Error::MessageOutOfRange { message });
    }
    let table = code_table()?;
    let triple = &TRIPLES[message as usize];
    let mut s = Session::new(
        "dense",
        brown_state(),
        &[("Alice", alice_qubits()), ("Bob", bob_qubits())],
    )?;
    s = s.with_dropped_messages(&schedule.dropped);
    s.party_apply(
        "Alice",
        &product_matrix(triple),
        &alice_qubits(),
        &product_symbol(triple),
    )?;
    s.transfer("Alice", "Bob", &alice_qubits())?;
    let (_, outcome) = s.party_measure("Bob", &table.basis(), schedule.selector(0)?)?;
    let received = s.state().clone();
    let f = fidelity(&received, &table.codes[message as usize].codeword)?;
    let run = Run {
        transcript: s.transcript(Some(f)),
        receiver: received,
        fidelity: f,
    };
    Ok((run, outcome as u32))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub label: String,
    pub total_qubits: usize,
    pub qubits_sent: usize,
    /// `None` when no state of this size exists.
    pub capacity: Option<f64>,
    /// Size of a greedily built orthonormal set of Pauli encodings, when
    /// the register is small enough to enumerate.
    pub orthogonal_encodings: Option<usize>,
    pub bits_per_qubit_sent: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Largest register for which Pauli encodings are enumerated.
pub const MAX_ENUMERATED_QUBITS: usize = 8;

/// Greedy count of mutually orthogonal states `P|ψ⟩` over Pauli products on `alice`.
pub fn orthogonal_encodings(state: &StateVector, alice: &QubitSubset) -> Result<usize> {
    let mut chosen: Vec<StateVector> = Vec::new();
    let limit = state.dim();
    for labels in all_products(alice.len()) {
        let w = state.apply_on_subset(&product_matrix(&labels), alice)?;
        if chosen
            .iter()
            .all(|c| inner(c.amplitudes(), w.amplitudes()).norm() < GRAM_TOL)
        {
            chosen.push(w);
            if chosen.len() == limit {
                break;
            }
        }
    }
    Ok(chosen.len())
}

fn row(label: String, state: &StateVector, alice: &QubitSubset) -> Result<ScalingRow> {
    let capacity = dense_capacity(state, alice)?;
    let orthogonal_encodings = if state.n_qubits() <= MAX_ENUMERATED_QUBITS {
        Some(orthogonal_encodings(state, alice)?)
    } else {
        None
    };
    Ok(ScalingRow {
        label,
        total_qubits: state.n_qubits(),
        qubits_sent: alice.len(),
        capacity: Some(capacity),
        orthogonal_encodings,
        bits_per_qubit_sent: Some(capacity / alice.len() as f64),
        note: None,
    })
}

/// Capacities of the generalized states with `n` extra qubits, Alice holding
/// the first `n + 3`, after a Bell-pair baseline row.
pub fn scaling_report(n_values: &[usize]) -> Result<Vec<ScalingRow>> {
    let mut rows = vec![row(
        "bell".into(),
        &bell_state(BellKind::PsiPlus),
        &QubitSubset::span(1, 1),
    )?];
    for &n in n_values {
        if n + 5 > 12 {
            return Err(Error::Message(format!("n = {n} exceeds the 12-qubit limit")));
        }
        let label = format!("generalized n={n}");
        match GeneralizedIndex::default_for(n) {
            Ok(idx) => rows.push(row(label, &generalized_brown(&idx), &QubitSubset::span(1, n + 3))?),
            Err(e) => rows.push(ScalingRow {
                label,
                total_qubits: n + 5,
                qubits_sent: n + 3,
                capacity: None,
                orthogonal_encodings: None,
                bits_per_qubit_sent: None,
                note: Some(e.to_string()),
            }),
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::locc::audit;
    use num_complex::Complex64 as C64;

    #[test]
    fn triples_are_distinct() {
        for (i, a) in TRIPLES.iter().enumerate() {
            assert!(TRIPLES[..i].iter().all(|b| b != a), "triple {i} repeats");
        }
    }

    #[test]
    fn identity_triple_is_brown() {
        assert_eq!(encode(0).unwrap(), brown_state());
        assert_eq!(decode(&brown_state()).unwrap(), 0);
    }

    #[test]
    fn second_codeword_flips_two_branches() {
        let c = encode(1).unwrap();
        let b = brown_state();
        // branches 010 and 111 change sign
        for (i, (x, y)) in c.amplitudes().iter().zip(b.amplitudes()).enumerate() {
            let prefix = i >> 2;
            let flipped = prefix == 0b010 || prefix == 0b111;
            let want = if flipped { -*y } else { *y };
            assert!((x - want).norm() < 1e-12, "amplitude {i}");
        }
    }

    #[test]
    fn codewords_orthonormal_and_round_trip() {
        assert!(code_table().unwrap().gram_deviation() < GRAM_TOL);
        for m in 0..32 {
            let c = encode(m).unwrap();
            assert!((c.norm_sqr() - 1.0).abs() < 1e-12);
            assert_eq!(decode(&c).unwrap(), m);
        }
        assert!(encode(32).is_err());
    }

    #[test]
    fn decode_ignores_global_phase() {
        let c = encode(17).unwrap().with_global_phase(std::f64::consts::PI / 7.0);
        assert_eq!(decode(&c).unwrap(), 17);
    }

    #[test]
    fn decode_rejects_superpositions() {
        let a = encode(3).unwrap();
        let b = encode(4).unwrap();
        let mix: Vec<C64> = a.amplitudes().iter().zip(b.amplitudes()).map(|(x, y)| x + y).collect();
        let s = StateVector::normalized(mix).unwrap();
        assert!(matches!(decode(&s), Err(Error::Undecodable { .. })));
    }

    #[test]
    fn bob_sees_nothing() {
        assert!(bob_state_deviation().unwrap() < 1e-12);
    }

    #[test]
    fn four_bit_subtable() {
        let (n, dev) = four_bit_subtable_deviation().unwrap();
        assert_eq!(n, 16);
        assert!(dev < GRAM_TOL);
    }

    #[test]
    fn protocol_run_decodes() {
        for m in [0, 5, 31] {
            let (run, decoded) = run_dense(m, &Schedule::draws(&[0.42])).unwrap();
            assert_eq!(decoded, m);
            assert!(audit(&run.transcript, &descriptor()).pass);
        }
    }

    #[test]
    fn scaling_rows() {
        let rows = scaling_report(&[0, 1, 2]).unwrap();
        assert!((rows[0].capacity.unwrap() - 2.0).abs() < 1e-9);
        assert_eq!(rows[0].orthogonal_encodings, Some(4));
        assert!((rows[1].capacity.unwrap() - 5.0).abs() < 1e-9);
        assert_eq!(rows[1].orthogonal_encodings, Some(32));
        assert!(rows[2].capacity.is_none());
        assert_eq!(rows[3].total_qubits, 7);
        assert_eq!(rows[3].qubits_sent, 5);
        assert!(rows[3].capacity.unwrap() > 5.0);
    }
}
