//! Three-party state sharing: Alice splits a secret so that Charlie can
//! rebuild it only with Bob's cooperation.
//!
//! Registers are the secret followed by the five Brown qubits. Proposal I and
//! II share one qubit, the two-qubit protocol shares two.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::brown::{bell_state, brown_state, BellKind};
use crate::error::{Error, Result};
use crate::locc::{Event, ProtocolDescriptor, Run, Schedule, Session};
use crate::oracle::{
    basis_to_basis, best_pauli, normalize_map, residue_map, secret_sources, table_basis, undo_residue, ORACLE_TOL,
};
use crate::qsim::pauli::{product_matrix, product_symbol};
use crate::qsim::{
    fidelity, measure_in_basis, partial_trace, CMatrix, DensityMatrix, MeasurementBasis, PauliLabel, QubitSubset,
    Selector, StateVector,
};
use crate::secret::Secret;
use crate::tables::{parse_expr, transcribed};

use PauliLabel::{I, X, Y, Z};

pub const ALICE: &str = "Alice";
pub const BOB: &str = "Bob";
pub const CHARLIE: &str = "Charlie";

/// Bell measurement in `BellKind::ALL` order.
pub fn bell_basis(subset: QubitSubset) -> MeasurementBasis {
    MeasurementBasis::new(
        "bell",
        subset,
        BellKind::ALL.iter().map(|k| bell_state(*k)).collect(),
        BellKind::ALL.iter().map(|k| k.name().to_string()).collect(),
        false,
    )
    .expect("Bell states are orthonormal")
}

/// `(|0⟩ ± |1⟩)/√2` on one qubit.
pub fn plus_minus_basis(subset: QubitSubset) -> MeasurementBasis {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    MeasurementBasis::new(
        "plus-minus",
        subset,
        vec![
            StateVector::from_reals(&[h, h]).expect("normalized"),
            StateVector::from_reals(&[h, -h]).expect("normalized"),
        ],
        vec!["+".into(), "-".into()],
        false,
    )
    .expect("orthonormal")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SharingProtocol {
    /// Alice's Bell measurement, Bob's three-qubit measurement.
    ProposalOne,
    /// As above with Bob measuring one qubit and then a Bell pair.
    ProposalOneSplit,
    /// Alice's three-qubit measurement, a joint Bob–Charlie conversion to
    /// GHZ form, Bob's Bell measurement.
    ProposalTwo,
    /// Alice's four-qubit measurement reported to Charlie, Bob's ± measurement.
    TwoQubit,
    /// Alice reports to Bob, who converts jointly with Charlie first.
    TwoQubitCooperative,
}

impl SharingProtocol {
    pub const ALL: [SharingProtocol; 5] = [
        SharingProtocol::ProposalOne,
        SharingProtocol::ProposalOneSplit,
        SharingProtocol::ProposalTwo,
        SharingProtocol::TwoQubit,
        SharingProtocol::TwoQubitCooperative,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SharingProtocol::ProposalOne => "qsts1a",
            SharingProtocol::ProposalOneSplit => "qsts1a-split",
            SharingProtocol::ProposalTwo => "qsts1b",
            SharingProtocol::TwoQubit => "qsts2",
            SharingProtocol::TwoQubitCooperative => "qsts2-coop",
        }
    }

    pub fn secret_qubits(self) -> usize {
        match self {
            SharingProtocol::TwoQubit | SharingProtocol::TwoQubitCooperative => 2,
            _ => 1,
        }
    }

    /// Number of measurements, hence of selectors a schedule needs.
    pub fn measurements(self) -> usize {
        match self {
            SharingProtocol::ProposalOneSplit => 3,
            _ => 2,
        }
    }

    pub fn descriptor(self) -> ProtocolDescriptor {
        let (cbits, joint_events) = match self {
            SharingProtocol::ProposalOne => (4, 0),
            SharingProtocol::ProposalOneSplit => (5, 0),
            SharingProtocol::ProposalTwo => (5, 1),
            SharingProtocol::TwoQubit => (5, 0),
            SharingProtocol::TwoQubitCooperative => (5, 1),
        };
        ProtocolDescriptor {
            protocol: self.name().to_string(),
            cbits,
            joint_events,
            min_fidelity: 1.0 - 1e-10,
        }
    }

    pub fn ownership(self) -> Vec<(&'static str, QubitSubset)> {
        match self.secret_qubits() {
            1 if matches!(self, SharingProtocol::ProposalTwo) => vec![
                (ALICE, QubitSubset::span(1, 3)),
                (BOB, QubitSubset::span(4, 5)),
                (CHARLIE, QubitSubset::span(6, 6)),
            ],
            1 => vec![
                (ALICE, QubitSubset::span(1, 2)),
                (BOB, QubitSubset::span(3, 5)),
                (CHARLIE, QubitSubset::span(6, 6)),
            ],
            _ => vec![
                (ALICE, QubitSubset::span(1, 4)),
                (BOB, QubitSubset::span(5, 5)),
                (CHARLIE, QubitSubset::span(6, 7)),
            ],
        }
    }

    fn party(self, name: &str) -> QubitSubset {
        self.ownership()
            .into_iter()
            .find(|(p, _)| *p == name)
            .map(|(_, q)| q)
            .expect("every protocol has all three parties")
    }

    /// Alice's first measurement.
    pub fn alice_basis(self) -> Result<MeasurementBasis> {
        match self {
            SharingProtocol::ProposalOne | SharingProtocol::ProposalOneSplit => Ok(bell_basis(self.party(ALICE))),
            SharingProtocol::ProposalTwo => p2_alice_basis().cloned(),
            SharingProtocol::TwoQubit | SharingProtocol::TwoQubitCooperative => two_qubit_basis().cloned(),
        }
    }

    pub fn run(self, secret: &Secret, schedule: &Schedule) -> Result<Run> {
        if secret.n_qubits() != self.secret_qubits() {
            return Err(Error::DimensionMismatch {
                expected: self.secret_qubits(),
                got: secret.n_qubits(),
            });
        }
        match self {
            SharingProtocol::ProposalOne => run_p1(secret, schedule),
            SharingProtocol::ProposalOneSplit => run_p1_split(secret, schedule),
            SharingProtocol::ProposalTwo => run_p2(secret, schedule),
            SharingProtocol::TwoQubit => run_two(secret, schedule, false),
            SharingProtocol::TwoQubitCooperative => run_two(secret, schedule, true),
        }
    }
}

impl std::str::FromStr for SharingProtocol {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        SharingProtocol::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown sharing protocol {s:?}")))
    }
}

type Cell<T> = OnceLock<Result<T>>;

fn cached<T>(cell: &'static Cell<T>, f: impl FnOnce() -> Result<T>) -> Result<&'static T> {
    cell.get_or_init(f).as_ref().map_err(Clone::clone)
}

fn sources(secret_qubits: usize) -> Vec<StateVector> {
    secret_sources(secret_qubits, &brown_state())
}

/// The Pauli product undoing each residue left by the joint vectors on `measured`.
pub fn pauli_corrections(
    sources: &[StateVector],
    measured: &QubitSubset,
    joint: &[StateVector],
) -> Result<Vec<Vec<PauliLabel>>> {
    joint
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let fit = best_pauli(&residue_map(sources, measured, v)?)?;
            if (fit.score - 1.0).abs() > ORACLE_TOL {
                return Err(Error::OracleFailure(format!(
                    "branch {i} is not Pauli-correctable (score {})",
                    fit.score
                )));
            }
            Ok(fit.labels)
        })
        .collect()
}

// Proposal I

/// Bob's three-qubit basis, derived on the register left after Alice finds
/// the tabulated Bell outcome, placed on Bob's qubits.
pub fn p1_bob_basis() -> Result<&'static MeasurementBasis> {
    static CELL: Cell<MeasurementBasis> = OnceLock::new();
    cached(&CELL, || {
        let t = transcribed();
        let bell = bell_state(t.sharing_after_bell.alice_outcome);
        let after: Vec<StateVector> = sources(1)
            .iter()
            .map(|s| StateVector::normalized(s.contract(&QubitSubset::span(1, 2), &bell)?))
            .collect::<Result<_>>()?;
        table_basis("sharing-bob", &t.sharing_bob_basis, &after, &QubitSubset::span(4, 4))?
            .with_subset(QubitSubset::span(3, 5))
    })
}

/// Charlie's correction for Alice's Bell outcome (row) and Bob's outcome (column).
pub const P1_CORRECTIONS: [[PauliLabel; 4]; 4] = [[X, I, Y, Z], [Y, Z, X, I], [I, X, Z, Y], [Z, Y, I, X]];

fn run_p1(secret: &Secret, schedule: &Schedule) -> Result<Run> {
    let p = SharingProtocol::ProposalOne;
    let mut s = session(p, secret, schedule)?;
    let (ea, _) = s.party_measure(ALICE, &p.alice_basis()?, schedule.selector(0)?)?;
    s.send_outcome(ALICE, CHARLIE, ea)?;
    let (eb, _) = s.party_measure(BOB, p1_bob_basis()?, schedule.selector(1)?)?;
    s.send_outcome(BOB, CHARLIE, eb)?;
    let a = s.known_outcome(CHARLIE, ea).unwrap_or(0);
    let b = s.known_outcome(CHARLIE, eb).unwrap_or(0);
    let op = P1_CORRECTIONS[a][b];
    s.party_apply(CHARLIE, &op.matrix(), &p.party(CHARLIE), op.symbol())?;
    finish(s, secret)
}

/// Charlie's Pauli for every (Alice Bell, Bob bit, Bob Bell) branch of the
/// split variant, flattened in that order.
pub fn p1_split_corrections() -> Result<&'static Vec<Vec<PauliLabel>>> {
    static CELL: Cell<Vec<Vec<PauliLabel>>> = OnceLock::new();
    cached(&CELL, || {
        let mut joint = Vec::new();
        for a in BellKind::ALL {
            for x in 0..2 {
                for c in BellKind::ALL {
                    joint.push(bell_state(a).tensor(&StateVector::basis(1, x)).tensor(&bell_state(c)));
                }
            }
        }
        pauli_corrections(&sources(1), &QubitSubset::span(1, 5), &joint)
    })
}

fn run_p1_split(secret: &Secret, schedule: &Schedule) -> Result<Run> {
    let p = SharingProtocol::ProposalOneSplit;
    let mut s = session(p, secret, schedule)?;
    let (ea, _) = s.party_measure(ALICE, &p.alice_basis()?, schedule.selector(0)?)?;
    s.send_outcome(ALICE, CHARLIE, ea)?;
    let single = MeasurementBasis::computational(QubitSubset::span(3, 3));
    let (ex, _) = s.party_measure(BOB, &single, schedule.selector(1)?)?;
    s.send_outcome(BOB, CHARLIE, ex)?;
    let (ec, _) = s.party_measure(BOB, &bell_basis(QubitSubset::span(4, 5)), schedule.selector(2)?)?;
    s.send_outcome(BOB, CHARLIE, ec)?;
    let a = s.known_outcome(CHARLIE, ea).unwrap_or(0);
    let x = s.known_outcome(CHARLIE, ex).unwrap_or(0);
    let c = s.known_outcome(CHARLIE, ec).unwrap_or(0);
    let ops = &p1_split_corrections()?[(a * 2 + x) * 4 + c];
    s.party_apply(CHARLIE, &product_matrix(ops), &p.party(CHARLIE), &product_symbol(ops))?;
    finish(s, secret)
}

// Proposal II

pub fn p2_alice_basis() -> Result<&'static MeasurementBasis> {
    static CELL: Cell<MeasurementBasis> = OnceLock::new();
    cached(&CELL, || {
        table_basis(
            "sharing-alice",
            &transcribed().sharing_alice_basis,
            &sources(1),
            &QubitSubset::span(4, 6),
        )
    })
}

/// Joint Bob–Charlie unitaries taking each residue of Alice's outcomes to
/// the GHZ form `alpha|000> + beta|111>`.
pub fn p2_conversions() -> Result<&'static Vec<CMatrix>> {
    static CELL: Cell<Vec<CMatrix>> = OnceLock::new();
    cached(&CELL, || {
        let target = normalize_map(&parse_expr(&transcribed().ghz_conversion.to)?.residue_map(1)?);
        let to = columns(&target);
        let basis = p2_alice_basis()?;
        basis
            .vectors()
            .iter()
            .map(|v| {
                let r = normalize_map(&residue_map(&sources(1), basis.subset(), v)?);
                basis_to_basis(&columns(&r), &to)
            })
            .collect()
    })
}

/// Charlie's correction after Bob's Bell outcome on the GHZ form. The
/// φ± outcomes never occur and keep the identity.
pub const P2_CHARLIE_CORRECTIONS: [PauliLabel; 4] = [I, Z, I, I];

fn run_p2(secret: &Secret, schedule: &Schedule) -> Result<Run> {
    let p = SharingProtocol::ProposalTwo;
    let mut s = session(p, secret, schedule)?;
    let (ea, _) = s.party_measure(ALICE, p2_alice_basis()?, schedule.selector(0)?)?;
    s.send_outcome(ALICE, BOB, ea)?;
    let a = s.known_outcome(BOB, ea).unwrap_or(0);
    let label = format!("to-ghz[{}]", p2_alice_basis()?.label(a));
    s.joint_apply(&[BOB, CHARLIE], &p2_conversions()?[a], &QubitSubset::span(4, 6), &label)?;
    let (eb, _) = s.party_measure(BOB, &bell_basis(p.party(BOB)), schedule.selector(1)?)?;
    s.send_outcome(BOB, CHARLIE, eb)?;
    let b = s.known_outcome(CHARLIE, eb).unwrap_or(0);
    let op = P2_CHARLIE_CORRECTIONS[b];
    s.party_apply(CHARLIE, &op.matrix(), &p.party(CHARLIE), op.symbol())?;
    finish(s, secret)
}

// Two-qubit sharing

pub fn two_qubit_basis() -> Result<&'static MeasurementBasis> {
    static CELL: Cell<MeasurementBasis> = OnceLock::new();
    cached(&CELL, || {
        table_basis(
            "sharing-two",
            &transcribed().sharing_two,
            &sources(2),
            &QubitSubset::span(5, 7),
        )
    })
}

/// Charlie's two-qubit unitary for Alice's outcome `a` and Bob's `b`, at index `2a + b`.
pub fn two_qubit_charlie_unitaries() -> Result<&'static Vec<CMatrix>> {
    static CELL: Cell<Vec<CMatrix>> = OnceLock::new();
    cached(&CELL, || {
        let basis = two_qubit_basis()?;
        let pm = plus_minus_basis(QubitSubset::span(5, 5));
        let mut out = Vec::new();
        for v in basis.vectors() {
            for w in pm.vectors() {
                let r = residue_map(&sources(2), &QubitSubset::span(1, 5), &v.tensor(w))?;
                out.push(undo_residue(&r)?);
            }
        }
        Ok(out)
    })
}

/// Joint Bob–Charlie unitaries taking each of Alice's residues to the residue
/// of her first outcome.
pub fn two_qubit_conversions() -> Result<&'static Vec<CMatrix>> {
    static CELL: Cell<Vec<CMatrix>> = OnceLock::new();
    cached(&CELL, || {
        let basis = two_qubit_basis()?;
        let maps: Vec<CMatrix> = basis
            .vectors()
            .iter()
            .map(|v| Ok(normalize_map(&residue_map(&sources(2), basis.subset(), v)?)))
            .collect::<Result<_>>()?;
        let to = columns(&maps[0]);
        maps.iter().map(|m| basis_to_basis(&columns(m), &to)).collect()
    })
}

fn run_two(secret: &Secret, schedule: &Schedule, cooperative: bool) -> Result<Run> {
    let p = if cooperative {
        SharingProtocol::TwoQubitCooperative
    } else {
        SharingProtocol::TwoQubit
    };
    let basis = two_qubit_basis()?;
    let mut s = session(p, secret, schedule)?;
    let (ea, _) = s.party_measure(ALICE, basis, schedule.selector(0)?)?;
    let a = if cooperative {
        s.send_outcome(ALICE, BOB, ea)?;
        let a = s.known_outcome(BOB, ea).unwrap_or(0);
        let label = format!("to-{}[{}]", basis.label(0), basis.label(a));
        let bc = QubitSubset::span(5, 7);
        s.joint_apply(&[BOB, CHARLIE], &two_qubit_conversions()?[a], &bc, &label)?;
        0
    } else {
        s.send_outcome(ALICE, CHARLIE, ea)?;
        s.known_outcome(CHARLIE, ea).unwrap_or(0)
    };
    let pm = plus_minus_basis(p.party(BOB));
    let (eb, _) = s.party_measure(BOB, &pm, schedule.selector(1)?)?;
    s.send_outcome(BOB, CHARLIE, eb)?;
    let b = s.known_outcome(CHARLIE, eb).unwrap_or(0);
    let label = format!("undo[{},{}]", basis.label(a), pm.label(b));
    s.party_apply(
        CHARLIE,
        &two_qubit_charlie_unitaries()?[2 * a + b],
        &p.party(CHARLIE),
        &label,
    )?;
    finish(s, secret)
}

fn columns(m: &CMatrix) -> Vec<Vec<num_complex::Complex64>> {
    (0..m.ncols()).map(|k| m.column(k).iter().copied().collect()).collect()
}

fn session(p: SharingProtocol, secret: &Secret, schedule: &Schedule) -> Result<Session> {
    let state = secret.state().tensor(&brown_state());
    Ok(Session::new(p.name(), state, &p.ownership())?.with_dropped_messages(&schedule.dropped))
}

fn finish(s: Session, secret: &Secret) -> Result<Run> {
    let receiver = s.party_state(CHARLIE)?;
    let f = fidelity(&receiver, &secret.state())?;
    Ok(Run {
        transcript: s.transcript(Some(f)),
        receiver,
        fidelity: f,
    })
}

/// Charlie's reduced state once Alice has measured, averaged over her
/// outcomes since no message has reached him yet.
pub fn charlie_before_messages(p: SharingProtocol, secret: &Secret) -> Result<DensityMatrix> {
    let state = secret.state().tensor(&brown_state());
    let basis = p.alice_basis()?;
    let charlie = p.party(CHARLIE);
    let mut parts = Vec::new();
    for k in 0..basis.vectors().len() {
        match measure_in_basis(&state, &basis, Selector::Forced(k)) {
            Ok(m) => parts.push((m.probability, partial_trace(&m.collapsed, &charlie)?)),
            Err(Error::DegenerateState { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    DensityMatrix::mixture(&parts)
}

/// Per-run summary of a sharing transcript.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SharingOutcome {
    pub alice_outcome: String,
    /// Bob's outcomes joined by `/` when he measures twice.
    pub bob_outcome: String,
    pub cbits_to_charlie: usize,
    pub charlie_state: StateVector,
    pub fidelity: f64,
}

impl SharingOutcome {
    pub fn from_run(run: &Run) -> Self {
        let labels = |who: &str| {
            run.transcript
                .events
                .iter()
                .filter_map(|e| match e {
                    Event::Measurement { party, label, .. } if party == who => Some(label.clone()),
                    _ => None,
                })
                .collect::<Vec<_>>()
                .join("/")
        };
        let cbits_to_charlie = run
            .transcript
            .cbit_totals
            .iter()
            .filter(|(k, _)| k.ends_with(&format!("->{CHARLIE}")))
            .map(|(_, v)| v)
            .sum();
        SharingOutcome {
            alice_outcome: labels(ALICE),
            bob_outcome: labels(BOB),
            cbits_to_charlie,
            charlie_state: run.receiver.clone(),
            fidelity: run.fidelity,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::locc::audit;
    use crate::oracle::map_overlap;
    use crate::secret::{SecretQubit, SecretTwoQubit};
    use crate::tables::parse_outer_products;

    fn one(a: f64, b: f64) -> Secret {
        Secret::One(SecretQubit::from_reals(a, b).unwrap())
    }

    fn two() -> Secret {
        let n = 30f64.sqrt();
        Secret::Two(SecretTwoQubit::from_reals(1.0 / n, 2.0 / n, 3.0 / n, 4.0 / n).unwrap())
    }

    /// Runs every forced branch, skipping the ones of zero probability.
    fn all_branches(p: SharingProtocol, secret: &Secret) -> Vec<Run> {
        let sizes: Vec<usize> = match p {
            SharingProtocol::ProposalOne => vec![4, 4],
            SharingProtocol::ProposalOneSplit => vec![4, 2, 4],
            SharingProtocol::ProposalTwo => vec![8, 4],
            _ => vec![16, 2],
        };
        let mut runs = Vec::new();
        let total: usize = sizes.iter().product();
        for mut code in 0..total {
            let mut outcomes = vec![0; sizes.len()];
            for (o, n) in outcomes.iter_mut().zip(&sizes).rev() {
                *o = code % n;
                code /= n;
            }
            match p.run(secret, &Schedule::forced(&outcomes)) {
                Ok(r) => runs.push(r),
                Err(Error::DegenerateState { .. }) => {}
                Err(e) => panic!("{outcomes:?}: {e}"),
            }
        }
        runs
    }

    #[test]
    fn p1_corrections_match_oracle() {
        let bob = p1_bob_basis().unwrap();
        let mut joint = Vec::new();
        for a in BellKind::ALL {
            for v in bob.vectors() {
                joint.push(bell_state(a).tensor(v));
            }
        }
        let derived = pauli_corrections(&sources(1), &QubitSubset::span(1, 5), &joint).unwrap();
        for (i, ops) in derived.iter().enumerate() {
            assert_eq!(ops, &vec![P1_CORRECTIONS[i / 4][i % 4]], "branch {i}");
        }
    }

    #[test]
    fn p2_charlie_corrections_match_oracle() {
        // GHZ form after conversion, Bob's Bell outcome on its first two qubits
        let ghz = [
            StateVector::from_bits("000").unwrap(),
            StateVector::from_bits("111").unwrap(),
        ];
        for (i, k) in BellKind::ALL.iter().enumerate().take(2) {
            let fit = pauli_corrections(&ghz, &QubitSubset::span(1, 2), &[bell_state(*k)]).unwrap();
            assert_eq!(fit[0], vec![P2_CHARLIE_CORRECTIONS[i]]);
        }
    }

    #[test]
    fn after_bell_state_matches_table() {
        let t = transcribed();
        let printed = parse_expr(&t.sharing_after_bell.state).unwrap().residue_map(1).unwrap();
        let bell = bell_state(t.sharing_after_bell.alice_outcome);
        let derived = residue_map(&sources(1), &QubitSubset::span(1, 2), &bell).unwrap();
        assert!((map_overlap(&printed, &derived) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn every_branch_reconstructs() {
        let cases = [
            (SharingProtocol::ProposalOne, one(0.6, 0.8), 16),
            (SharingProtocol::ProposalOneSplit, one(0.6, 0.8), 32),
            (SharingProtocol::ProposalTwo, one(0.6, 0.8), 16),
            (SharingProtocol::TwoQubit, two(), 32),
            (SharingProtocol::TwoQubitCooperative, two(), 32),
        ];
        for (p, secret, expected_branches) in cases {
            let runs = all_branches(p, &secret);
            assert_eq!(runs.len(), expected_branches, "{}", p.name());
            for r in &runs {
                assert!((r.fidelity - 1.0).abs() < 1e-10, "{}", p.name());
                assert!(audit(&r.transcript, &p.descriptor()).pass, "{}", p.name());
            }
        }
    }

    #[test]
    fn basis_state_secrets() {
        let r = SharingProtocol::ProposalOne
            .run(&one(1.0, 0.0), &Schedule::draws(&[0.3, 0.8]))
            .unwrap();
        assert!(fidelity(&r.receiver, &StateVector::from_bits("0").unwrap()).unwrap() > 1.0 - 1e-10);
        let r = SharingProtocol::ProposalTwo
            .run(&one(0.0, 1.0), &Schedule::draws(&[0.6, 0.1]))
            .unwrap();
        assert!(fidelity(&r.receiver, &StateVector::from_bits("1").unwrap()).unwrap() > 1.0 - 1e-10);
        let zero = Secret::Two(SecretTwoQubit::from_reals(1.0, 0.0, 0.0, 0.0).unwrap());
        let r = SharingProtocol::TwoQubit
            .run(&zero, &Schedule::draws(&[0.5, 0.5]))
            .unwrap();
        assert!(fidelity(&r.receiver, &StateVector::from_bits("00").unwrap()).unwrap() > 1.0 - 1e-10);
    }

    #[test]
    fn cbit_totals_and_summary() {
        let r = SharingProtocol::ProposalOne
            .run(&one(0.6, 0.8), &Schedule::draws(&[0.1, 0.2]))
            .unwrap();
        let o = SharingOutcome::from_run(&r);
        assert_eq!(o.cbits_to_charlie, 4);
        assert_eq!(r.transcript.total_cbits, 4);
        let r = SharingProtocol::TwoQubit
            .run(&two(), &Schedule::draws(&[0.1, 0.2]))
            .unwrap();
        assert_eq!(r.transcript.cbit_totals["Alice->Charlie"], 4);
        assert_eq!(r.transcript.cbit_totals["Bob->Charlie"], 1);
        let r = SharingProtocol::ProposalTwo
            .run(&one(0.6, 0.8), &Schedule::draws(&[0.1, 0.2]))
            .unwrap();
        assert_eq!(r.transcript.cbit_totals["Alice->Bob"], 3);
        assert_eq!(SharingOutcome::from_run(&r).cbits_to_charlie, 2);
    }

    #[test]
    fn phi_outcomes_never_occur_after_conversion() {
        for a in 0..8 {
            let r = SharingProtocol::ProposalTwo.run(&one(0.6, 0.8), &Schedule::forced(&[a, 2]));
            assert!(matches!(r, Err(Error::DegenerateState { .. })));
        }
    }

    #[test]
    fn charlie_learns_nothing_alone() {
        let reference = [one(1.0, 0.0), two()];
        for p in SharingProtocol::ALL {
            let base = if p.secret_qubits() == 1 {
                &reference[0]
            } else {
                &reference[1]
            };
            let rho0 = charlie_before_messages(p, base).unwrap();
            let other = if p.secret_qubits() == 1 {
                one(0.6, -0.8)
            } else {
                Secret::Two(SecretTwoQubit::from_reals(0.5, -0.5, 0.5, 0.5).unwrap())
            };
            let rho1 = charlie_before_messages(p, &other).unwrap();
            assert!(rho0.max_abs_diff(&rho1) < 1e-10, "{}", p.name());
        }
    }

    /// Charlie's unitaries for Alice's first outcome, in the ±αφ−+μψ−+γφ++±βψ+
    /// form: a map sending φ− to |00>, ψ− to |10>, φ+ to |01>, ψ+ to |11>, with
    /// the signs of the α and β terms flipped for the − outcome.
    #[test]
    fn first_outcome_charlie_operators() {
        let u = two_qubit_charlie_unitaries().unwrap();
        let plus = parse_outer_products("+|11><psi+| +|01><phi+| +|00><phi-| +|10><psi-|").unwrap();
        let minus = parse_outer_products("-|11><psi+| +|01><phi+| -|00><phi-| +|10><psi-|").unwrap();
        assert!((map_overlap(&u[0], &plus) - 1.0).abs() < 1e-10);
        assert!((map_overlap(&u[1], &minus) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn wrong_secret_size_rejected() {
        assert!(SharingProtocol::TwoQubit
            .run(&one(1.0, 0.0), &Schedule::forced(&[0, 0]))
            .is_err());
    }

    #[test]
    fn lost_message_breaks_sharing() {
        let r = SharingProtocol::ProposalOne
            .run(&one(0.6, 0.8), &Schedule::forced(&[1, 0]).dropping(&[0]))
            .unwrap();
        assert!(r.fidelity < 1.0 - 1e-3);
    }
}
