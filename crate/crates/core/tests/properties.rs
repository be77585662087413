use brownsim::brown::{brown_state, check_weight_conditions, weighted_brown, WeightVector};
use brownsim::dense;
use brownsim::locc::Schedule;
use brownsim::qsim::pauli::product_matrix;
use brownsim::qsim::{outcome_probabilities, partial_trace, MeasurementBasis, PauliLabel, QubitSubset, StateVector};
use brownsim::run::{execute, Protocol, Randomness, RunRequest};
use brownsim::secret::{Secret, SecretQubit, SecretTwoQubit};
use brownsim::sharing::SharingProtocol;
use brownsim::teleport::{teleport_one_qubit, teleport_two_qubit};
use num_complex::Complex64 as C64;
use proptest::prelude::*;

fn amps(n: usize) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1 << n)
        .prop_filter("nonzero", |v| v.iter().map(|(a, b)| a * a + b * b).sum::<f64>() > 1e-3)
        .prop_map(|v| v.into_iter().map(|(a, b)| C64::new(a, b)).collect())
}

fn state(n: usize) -> impl Strategy<Value = StateVector> {
    amps(n).prop_map(|a| StateVector::normalized(a).unwrap())
}

fn one_secret() -> impl Strategy<Value = SecretQubit> {
    amps(1).prop_map(|a| {
        let n = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        SecretQubit::new(a[0] / n, a[1] / n).unwrap()
    })
}

fn two_secret() -> impl Strategy<Value = SecretTwoQubit> {
    amps(2).prop_map(|a| {
        let n = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        // state order is α|00>, γ|01>, μ|10>, β|11>
        SecretTwoQubit::new(a[0] / n, a[2] / n, a[1] / n, a[3] / n).unwrap()
    })
}

fn pauli() -> impl Strategy<Value = PauliLabel> {
    prop_oneof![
        Just(PauliLabel::I),
        Just(PauliLabel::X),
        Just(PauliLabel::Y),
        Just(PauliLabel::Z)
    ]
}

fn subset(n: usize) -> impl Strategy<Value = QubitSubset> {
    prop::sample::subsequence((1..=n).collect::<Vec<_>>(), 1..n).prop_map(|l| QubitSubset::new(l).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn unitaries_preserve_norm(s in state(4), ops in prop::collection::vec(pauli(), 3), q in subset(4)) {
        let out = s.apply_on_subset(&product_matrix(&ops[..q.len()]), &q).unwrap();
        prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn outcome_probabilities_sum_to_one(s in state(4), q in subset(4)) {
        let (p, rem) = outcome_probabilities(&s, &MeasurementBasis::computational(q)).unwrap();
        prop_assert!((p.iter().sum::<f64>() + rem - 1.0).abs() < 1e-12);
        prop_assert!(rem < 1e-12);
    }

    #[test]
    fn complementary_cuts_share_entropy(s in state(4), q in subset(4)) {
        let a = partial_trace(&s, &q).unwrap();
        let b = partial_trace(&s, &q.complement(4)).unwrap();
        prop_assert!((a.entropy() - b.entropy()).abs() < 1e-9);
        prop_assert!((a.purity() - b.purity()).abs() < 1e-12);
    }

    #[test]
    fn secret_json_round_trip(a in one_secret(), b in two_secret()) {
        for s in [Secret::One(a), Secret::Two(b)] {
            let back: Secret = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
            let (x, y) = (back.state(), s.state());
            prop_assert!(x.amplitudes().iter().zip(y.amplitudes()).all(|(p, q)| (p - q).norm() < 1e-15));
        }
    }

    #[test]
    fn teleport_one_any_draw(s in one_secret(), d in 0.0f64..1.0) {
        let run = teleport_one_qubit(&s, &Schedule::draws(&[d])).unwrap();
        prop_assert!(run.fidelity > 1.0 - 1e-10);
        prop_assert_eq!(run.transcript.total_cbits, 2);
    }

    #[test]
    fn teleport_two_any_draw(s in two_secret(), d in 0.0f64..1.0) {
        let run = teleport_two_qubit(&s, &Schedule::draws(&[d])).unwrap();
        prop_assert!(run.fidelity > 1.0 - 1e-10);
        prop_assert_eq!(run.transcript.total_cbits, 4);
    }

    #[test]
    fn sharing_any_draws(a in one_secret(), b in two_secret(), d in prop::collection::vec(0.0f64..1.0, 3)) {
        for p in SharingProtocol::ALL {
            let secret = if p.secret_qubits() == 1 { Secret::One(a) } else { Secret::Two(b) };
            let run = p.run(&secret, &Schedule::draws(&d[..p.measurements()])).unwrap();
            prop_assert!(run.fidelity > 1.0 - 1e-10, "{}", p.name());
            prop_assert_eq!(run.transcript.total_cbits, p.descriptor().cbits);
        }
    }

    #[test]
    fn dense_decodes_every_message(m in 0u32..32, d in 0.0f64..1.0) {
        let (run, decoded) = dense::run_dense(m, &Schedule::draws(&[d])).unwrap();
        prop_assert_eq!(decoded, m);
        prop_assert_eq!(run.transcript.total_cbits, 0);
    }

    #[test]
    fn seeded_runs_replay(seed in any::<u64>(), k in 0usize..8) {
        let p = Protocol::ALL[k];
        let a = execute(&RunRequest::seeded(p, seed)).unwrap();
        prop_assert!(a.pass);
        let b = execute(&RunRequest {
            secret: a.secret,
            message: a.message,
            randomness: Randomness::Draws(a.draws.clone()),
            ..RunRequest::seeded(p, 0)
        }).unwrap();
        prop_assert_eq!(a.transcript, b.transcript);
    }

    #[test]
    fn weighted_states_are_normalized(w in prop::array::uniform4(-1.0f64..1.0)) {
        let n = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assume!(n > 1e-3);
        let w = WeightVector(w.map(|x| x / n));
        let s = weighted_brown(&w).unwrap();
        prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        let c = check_weight_conditions(&w);
        prop_assert!(c.residual_21.is_finite() && c.residual_22.is_finite());
        if c.satisfied {
            prop_assert!((partial_trace(&s, &QubitSubset::span(4, 5)).unwrap().entropy() - 2.0).abs() < 1e-9);
            prop_assert!((partial_trace(&s, &QubitSubset::span(5, 5)).unwrap().entropy() - 1.0).abs() < 1e-9);
        }
    }
}

#[test]
fn uniform_weights_give_brown() {
    let s = weighted_brown(&WeightVector::uniform()).unwrap();
    assert_eq!(s, brown_state());
}
