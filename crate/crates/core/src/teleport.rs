//! Teleportation of one and two qubits through the Brown state.
//!
//! The secret occupies the leading qubits of the register, followed by the
//! five Brown qubits. Alice holds the secret and all but the last one (or
//! two) Brown qubits; Bob holds the rest.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::brown::brown_state;
use crate::error::{Error, Result};
use crate::locc::{Run, Schedule, Session};
use crate::oracle::{secret_sources, table_basis};
use crate::qsim::pauli::{product_matrix, product_symbol};
use crate::qsim::{fidelity, MeasurementBasis, PauliLabel, QubitSubset, StateVector};
use crate::secret::{SecretQubit, SecretTwoQubit};
use crate::tables::transcribed;

use PauliLabel::{I, X, Y, Z};

pub const ALICE: &str = "Alice";
pub const BOB: &str = "Bob";

/// Outcome label to the Pauli product Bob applies, first label on his
/// first qubit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrectionRule {
    entries: Vec<(String, Vec<PauliLabel>)>,
}

impl CorrectionRule {
    pub fn new(entries: Vec<(String, Vec<PauliLabel>)>) -> Result<Self> {
        let width = entries.first().map(|e| e.1.len()).unwrap_or(0);
        for (i, (label, ops)) in entries.iter().enumerate() {
            if ops.len() != width || width == 0 {
                return Err(Error::Parse(format!("rule for {label} has {} operators", ops.len())));
            }
            if entries[..i].iter().any(|(l, _)| l == label) {
                return Err(Error::Parse(format!("outcome {label} listed twice")));
            }
        }
        Ok(CorrectionRule { entries })
    }

    pub fn from_table<const M: usize>(table: &[(&str, [PauliLabel; M])]) -> Self {
        CorrectionRule::new(table.iter().map(|(l, ops)| (l.to_string(), ops.to_vec())).collect())
            .expect("static rule tables are well formed")
    }

    pub fn entries(&self) -> &[(String, Vec<PauliLabel>)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, label: &str) -> Option<&[PauliLabel]> {
        self.entries.iter().find(|(l, _)| l == label).map(|(_, o)| o.as_slice())
    }

    pub fn by_index(&self, outcome: usize) -> Result<&[PauliLabel]> {
        self.entries
            .get(outcome)
            .map(|(_, o)| o.as_slice())
            .ok_or(Error::OutcomeOutOfRange {
                outcome,
                count: self.entries.len(),
            })
    }
}

pub const ONE_QUBIT_CORRECTIONS: [(&str, [PauliLabel; 1]); 4] =
    [("a1+", [I]), ("a1-", [Z]), ("a2+", [X]), ("a2-", [Y])];

pub const TWO_QUBIT_CORRECTIONS: [(&str, [PauliLabel; 2]); 16] = [
    ("t1", [I, X]),
    ("t2", [Z, X]),
    ("t3", [I, Y]),
    ("t4", [Z, Y]),
    ("t5", [X, X]),
    ("t6", [X, Y]),
    ("t7", [Y, X]),
    ("t8", [Y, Y]),
    ("t9", [I, I]),
    ("t10", [I, Z]),
    ("t11", [Z, I]),
    ("t12", [Z, Z]),
    ("t13", [X, I]),
    ("t14", [X, Z]),
    ("t15", [Y, I]),
    ("t16", [Y, Z]),
];

pub fn one_qubit_rule() -> CorrectionRule {
    CorrectionRule::from_table(&ONE_QUBIT_CORRECTIONS)
}

pub fn two_qubit_rule() -> CorrectionRule {
    CorrectionRule::from_table(&TWO_QUBIT_CORRECTIONS)
}

pub fn one_qubit_register() -> (QubitSubset, QubitSubset) {
    (QubitSubset::span(1, 5), QubitSubset::span(6, 6))
}

pub fn two_qubit_register() -> (QubitSubset, QubitSubset) {
    (QubitSubset::span(1, 5), QubitSubset::span(6, 7))
}

fn cached(
    cell: &'static OnceLock<Result<MeasurementBasis>>,
    f: fn() -> Result<MeasurementBasis>,
) -> Result<&'static MeasurementBasis> {
    cell.get_or_init(f).as_ref().map_err(Clone::clone)
}

/// Alice's four-outcome basis on the secret and Brown qubits 1–4, derived
/// from the tabulated residues; the unspanned remainder is an extra outcome.
pub fn one_qubit_basis() -> Result<&'static MeasurementBasis> {
    static CELL: OnceLock<Result<MeasurementBasis>> = OnceLock::new();
    cached(&CELL, || {
        let (_, bob) = one_qubit_register();
        let sources = secret_sources(1, &brown_state());
        table_basis("teleport-one", &transcribed().teleport_one, &sources, &bob)
    })
}

/// Alice's sixteen-outcome basis on the two secret qubits and Brown qubits 1–3.
pub fn derive_two_qubit_basis() -> Result<&'static MeasurementBasis> {
    static CELL: OnceLock<Result<MeasurementBasis>> = OnceLock::new();
    cached(&CELL, || {
        let (_, bob) = two_qubit_register();
        let sources = secret_sources(2, &brown_state());
        table_basis("teleport-two", &transcribed().teleport_two, &sources, &bob)
    })
}

fn teleport(
    protocol: &str,
    secret: StateVector,
    register: (QubitSubset, QubitSubset),
    basis: &MeasurementBasis,
    rule: &CorrectionRule,
    schedule: &Schedule,
) -> Result<Run> {
    let (alice, bob) = register;
    let state = secret.tensor(&brown_state());
    let mut s = Session::new(protocol, state, &[(ALICE, alice), (BOB, bob.clone())])?;
    s = s.with_dropped_messages(&schedule.dropped);
    let (ev, _) = s.party_measure(ALICE, basis, schedule.selector(0)?)?;
    s.send_outcome(ALICE, BOB, ev)?;
    // without the message Bob can only guess the first outcome
    let k = s.known_outcome(BOB, ev).unwrap_or(0);
    let ops = rule.by_index(k)?;
    s.party_apply(BOB, &product_matrix(ops), &bob, &product_symbol(ops))?;
    let receiver = s.party_state(BOB)?;
    let f = fidelity(&receiver, &secret)?;
    Ok(Run {
        transcript: s.transcript(Some(f)),
        receiver,
        fidelity: f,
    })
}

/// Alice measures, sends two bits, Bob corrects with one of `I, Z, X, iY`.
pub fn teleport_one_qubit(secret: &SecretQubit, schedule: &Schedule) -> Result<Run> {
    teleport(
        "teleport1",
        secret.state(),
        one_qubit_register(),
        one_qubit_basis()?,
        &one_qubit_rule(),
        schedule,
    )
}

/// Alice measures five qubits, sends four bits, Bob applies a Pauli product.
pub fn teleport_two_qubit(secret: &SecretTwoQubit, schedule: &Schedule) -> Result<Run> {
    teleport(
        "teleport2",
        secret.state(),
        two_qubit_register(),
        derive_two_qubit_basis()?,
        &two_qubit_rule(),
        schedule,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::locc::Event;
    use crate::oracle::{best_pauli, gram_deviation, residue_map};
    use crate::qsim::pauli::parse_product;
    use num_complex::Complex64 as C64;

    #[test]
    fn one_qubit_rule_matches_oracle() {
        let basis = one_qubit_basis().unwrap();
        let sources = secret_sources(1, &brown_state());
        for (k, v) in basis.vectors().iter().enumerate() {
            let r = residue_map(&sources, basis.subset(), v).unwrap();
            let fit = best_pauli(&r).unwrap();
            assert!((fit.score - 1.0).abs() < 1e-10);
            assert_eq!(fit.labels, one_qubit_rule().by_index(k).unwrap());
        }
    }

    #[test]
    fn two_qubit_rule_matches_oracle_and_table() {
        let basis = derive_two_qubit_basis().unwrap();
        assert!(gram_deviation(basis.vectors()) < 1e-10);
        let sources = secret_sources(2, &brown_state());
        let table = &transcribed().teleport_two;
        for (k, v) in basis.vectors().iter().enumerate() {
            let r = residue_map(&sources, basis.subset(), v).unwrap();
            let fit = best_pauli(&r).unwrap();
            assert!((fit.score - 1.0).abs() < 1e-10);
            let shipped = two_qubit_rule().by_index(k).unwrap().to_vec();
            assert_eq!(fit.labels, shipped);
            let printed = parse_product(table.entries[k].correction.as_deref().unwrap()).unwrap();
            assert_eq!(printed, shipped);
        }
    }

    #[test]
    fn one_qubit_every_outcome() {
        let secret = SecretQubit::from_reals(0.6, 0.8).unwrap();
        for k in 0..4 {
            let run = teleport_one_qubit(&secret, &Schedule::forced(&[k])).unwrap();
            assert!((run.fidelity - 1.0).abs() < 1e-10);
            assert_eq!(run.transcript.total_cbits, 2);
            match &run.transcript.events[0] {
                Event::Measurement {
                    probability,
                    remainder_probability,
                    ..
                } => {
                    assert!((probability - 0.25).abs() < 1e-10);
                    assert!(*remainder_probability < 1e-10);
                }
                e => panic!("unexpected first event {e:?}"),
            }
        }
        let complex = SecretQubit::new(C64::new(0.5f64.sqrt(), 0.0), C64::new(0.0, 0.5f64.sqrt())).unwrap();
        for k in 0..4 {
            assert!((teleport_one_qubit(&complex, &Schedule::forced(&[k])).unwrap().fidelity - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn basis_state_secret() {
        let secret = SecretQubit::from_reals(1.0, 0.0).unwrap();
        let run = teleport_one_qubit(&secret, &Schedule::draws(&[0.9])).unwrap();
        assert!(fidelity(&run.receiver, &StateVector::from_bits("0").unwrap()).unwrap() > 1.0 - 1e-10);
    }

    #[test]
    fn remainder_outcome_is_unreachable() {
        let secret = SecretQubit::from_reals(0.6, 0.8).unwrap();
        assert!(matches!(
            teleport_one_qubit(&secret, &Schedule::forced(&[4])),
            Err(Error::DegenerateState { .. })
        ));
    }

    #[test]
    fn two_qubit_every_outcome() {
        let n = 30f64.sqrt();
        let secret = SecretTwoQubit::from_reals(1.0 / n, 2.0 / n, 3.0 / n, 4.0 / n).unwrap();
        for k in 0..16 {
            let run = teleport_two_qubit(&secret, &Schedule::forced(&[k])).unwrap();
            assert!((run.fidelity - 1.0).abs() < 1e-10, "outcome {k}");
            assert_eq!(run.transcript.total_cbits, 4);
        }
        let zero = SecretTwoQubit::from_reals(1.0, 0.0, 0.0, 0.0).unwrap();
        let run = teleport_two_qubit(&zero, &Schedule::draws(&[0.3])).unwrap();
        assert!(fidelity(&run.receiver, &StateVector::from_bits("00").unwrap()).unwrap() > 1.0 - 1e-10);
    }

    #[test]
    fn outcome_nine_needs_no_correction() {
        assert_eq!(two_qubit_rule().get("t9").unwrap(), &[I, I]);
    }

    #[test]
    fn lost_message_breaks_teleportation() {
        let secret = SecretQubit::from_reals(0.6, 0.8).unwrap();
        let run = teleport_one_qubit(&secret, &Schedule::forced(&[2]).dropping(&[0])).unwrap();
        assert_eq!(run.transcript.total_cbits, 0);
        assert!(run.fidelity < 1.0 - 1e-3);
    }

    #[test]
    fn rule_validation() {
        assert!(CorrectionRule::new(vec![("a".into(), vec![I]), ("a".into(), vec![X])]).is_err());
        assert!(CorrectionRule::new(vec![("a".into(), vec![I]), ("b".into(), vec![X, X])]).is_err());
    }
}
