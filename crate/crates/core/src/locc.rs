//! Multi-party sessions over one shared register.
//!
//! Parties own disjoint qubit subsets. Unitaries and measurements are checked
//! against ownership unless recorded as a sanctioned joint operation, and
//! classical messages are width-checked and bit-counted. A party learns a
//! measurement outcome only from a message reporting it.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qsim::state::contract_raw;
use crate::qsim::{measure_in_basis, CMatrix, MeasurementBasis, QubitSubset, Selector, StateVector};

/// Minimum number of bits that distinguishes `count` outcomes.
pub fn bits_for(count: usize) -> usize {
    if count <= 1 {
        0
    } else {
        (usize::BITS - (count - 1).leading_zeros()) as usize
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Event {
    LocalUnitary {
        party: String,
        qubits: QubitSubset,
        label: String,
    },
    Measurement {
        party: String,
        qubits: QubitSubset,
        basis: String,
        outcome: usize,
        label: String,
        /// Listed outcomes; a remainder outcome is never reported.
        outcome_count: usize,
        probability: f64,
        remainder_probability: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        draw: Option<f64>,
    },
    Message {
        from: String,
        to: String,
        bits: String,
        width: usize,
        /// Index of the measurement event whose outcome the payload encodes.
        reports: usize,
    },
    JointUnitary {
        parties: Vec<String>,
        qubits: QubitSubset,
        label: String,
        sanctioned: bool,
    },
    /// Qubits physically handed over through a quantum channel.
    Transfer {
        from: String,
        to: String,
        qubits: QubitSubset,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub protocol: String,
    /// Ownership when the session started; transfers are replayed from here.
    pub ownership: BTreeMap<String, QubitSubset>,
    pub events: Vec<Event>,
    /// Keyed `"from->to"`.
    pub cbit_totals: BTreeMap<String, usize>,
    pub total_cbits: usize,
    pub fidelity: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct Session {
    state: StateVector,
    ownership: BTreeMap<String, QubitSubset>,
    initial_ownership: BTreeMap<String, QubitSubset>,
    events: Vec<Event>,
    /// Latest projection vector for each measured subset still in effect.
    collapsed: Vec<(QubitSubset, StateVector)>,
    /// Party → (measurement event index → outcome).
    knowledge: BTreeMap<String, BTreeMap<usize, usize>>,
    protocol: String,
    /// Ordinals of messages that are never delivered.
    dropped: BTreeSet<usize>,
    messages_sent: usize,
}

impl Session {
    pub fn new(protocol: impl Into<String>, state: StateVector, ownership: &[(&str, QubitSubset)]) -> Result<Self> {
        let n = state.n_qubits();
        let mut seen = vec![false; n];
        let mut map = BTreeMap::new();
        for (name, subset) in ownership {
            subset.check_within(n)?;
            for &q in subset.labels() {
                if seen[q - 1] {
                    return Err(Error::Ownership(format!("qubit {q} owned twice")));
                }
                seen[q - 1] = true;
            }
            if map.insert((*name).to_string(), subset.clone()).is_some() {
                return Err(Error::Ownership(format!("party {name} listed twice")));
            }
        }
        if let Some(q) = seen.iter().position(|s| !s) {
            return Err(Error::Ownership(format!("qubit {} has no owner", q + 1)));
        }
        Ok(Session {
            state,
            knowledge: map.keys().map(|k| (k.clone(), BTreeMap::new())).collect(),
            initial_ownership: map.clone(),
            ownership: map,
            events: Vec::new(),
            collapsed: Vec::new(),
            protocol: protocol.into(),
            dropped: BTreeSet::new(),
            messages_sent: 0,
        })
    }

    /// Loses the messages with the given send ordinals (0-based). Lost
    /// messages leave no event and inform nobody.
    pub fn with_dropped_messages(mut self, ordinals: &[usize]) -> Self {
        self.dropped = ordinals.iter().copied().collect();
        self
    }

    pub fn state(&self) -> &StateVector {
        &self.state
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn owned(&self, party: &str) -> Result<&QubitSubset> {
        self.ownership
            .get(party)
            .ok_or_else(|| Error::UnknownParty(party.to_string()))
    }

    fn check_local(&self, party: &str, qubits: &QubitSubset) -> Result<()> {
        if !qubits.is_subset_of(self.owned(party)?) {
            return Err(Error::LocalityViolation {
                party: party.to_string(),
                qubits: qubits.labels().to_vec(),
            });
        }
        Ok(())
    }

    fn forget_collapse(&mut self, qubits: &QubitSubset) {
        self.collapsed.retain(|(s, _)| s.is_disjoint(qubits));
    }

    pub fn party_apply(&mut self, party: &str, u: &CMatrix, qubits: &QubitSubset, label: &str) -> Result<()> {
        self.check_local(party, qubits)?;
        self.state = self.state.apply_on_subset(u, qubits)?;
        self.forget_collapse(qubits);
        self.events.push(Event::LocalUnitary {
            party: party.to_string(),
            qubits: qubits.clone(),
            label: label.to_string(),
        });
        Ok(())
    }

    /// A unitary spanning several parties, allowed only as a recorded,
    /// sanctioned joint step.
    pub fn joint_apply(&mut self, parties: &[&str], u: &CMatrix, qubits: &QubitSubset, label: &str) -> Result<()> {
        let mut union = Vec::new();
        for p in parties {
            union.extend_from_slice(self.owned(p)?.labels());
        }
        let union = QubitSubset::new(union)?;
        if !qubits.is_subset_of(&union) {
            return Err(Error::LocalityViolation {
                party: parties.join("+"),
                qubits: qubits.labels().to_vec(),
            });
        }
        self.state = self.state.apply_on_subset(u, qubits)?;
        self.forget_collapse(qubits);
        self.events.push(Event::JointUnitary {
            parties: parties.iter().map(|p| p.to_string()).collect(),
            qubits: qubits.clone(),
            label: label.to_string(),
            sanctioned: true,
        });
        Ok(())
    }

    /// Hands `qubits` from one party to another.
    pub fn transfer(&mut self, from: &str, to: &str, qubits: &QubitSubset) -> Result<()> {
        self.check_local(from, qubits)?;
        let target = self.owned(to)?.clone();
        let mut merged = target.labels().to_vec();
        merged.extend_from_slice(qubits.labels());
        let kept: Vec<usize> = self.ownership[from]
            .labels()
            .iter()
            .copied()
            .filter(|q| !qubits.contains(*q))
            .collect();
        self.ownership.insert(from.to_string(), QubitSubset::new(kept)?);
        self.ownership.insert(to.to_string(), QubitSubset::new(merged)?);
        self.events.push(Event::Transfer {
            from: from.to_string(),
            to: to.to_string(),
            qubits: qubits.clone(),
        });
        Ok(())
    }

    /// Measures `basis` on its subset; returns the index of the event.
    pub fn party_measure(
        &mut self,
        party: &str,
        basis: &MeasurementBasis,
        selector: Selector,
    ) -> Result<(usize, usize)> {
        self.check_local(party, basis.subset())?;
        let m = measure_in_basis(&self.state, basis, selector)?;
        let draw = match selector {
            Selector::Draw(d) => Some(d),
            Selector::Forced(_) => None,
        };
        self.state = m.collapsed;
        self.forget_collapse(basis.subset());
        if m.outcome < basis.vectors().len() {
            self.collapsed
                .push((basis.subset().clone(), basis.vectors()[m.outcome].clone()));
        }
        let idx = self.events.len();
        self.events.push(Event::Measurement {
            party: party.to_string(),
            qubits: basis.subset().clone(),
            basis: basis.name().to_string(),
            outcome: m.outcome,
            label: m.label,
            outcome_count: basis.vectors().len(),
            probability: m.probability,
            remainder_probability: m.remainder_probability,
            draw,
        });
        self.knowledge
            .get_mut(party)
            .expect("party checked above")
            .insert(idx, m.outcome);
        Ok((idx, m.outcome))
    }

    /// Sends the outcome of measurement event `reports` from `from` to `to`
    /// with the minimum width for its outcome count.
    pub fn send_outcome(&mut self, from: &str, to: &str, reports: usize) -> Result<()> {
        self.owned(to)?;
        let (outcome, count) = match self.events.get(reports) {
            Some(Event::Measurement {
                outcome, outcome_count, ..
            }) => (*outcome, *outcome_count),
            _ => return Err(Error::Message(format!("event {reports} is not a measurement"))),
        };
        let known = self.knowledge.get(from).and_then(|k| k.get(&reports)).copied();
        if known != Some(outcome) {
            return Err(Error::Message(format!(
                "{from} does not know the outcome of event {reports}"
            )));
        }
        if outcome >= count {
            return Err(Error::Message(format!(
                "event {reports} ended in the remainder outcome"
            )));
        }
        let width = bits_for(count);
        let bits = if width == 0 {
            String::new()
        } else {
            format!("{outcome:0width$b}")
        };
        self.send_cbits(from, to, &bits, reports)
    }

    pub fn send_cbits(&mut self, from: &str, to: &str, bits: &str, reports: usize) -> Result<()> {
        self.owned(from)?;
        self.owned(to)?;
        if !bits.chars().all(|c| c == '0' || c == '1') {
            return Err(Error::Message(format!("payload {bits:?} is not a bit string")));
        }
        let ordinal = self.messages_sent;
        self.messages_sent += 1;
        if self.dropped.contains(&ordinal) {
            return Ok(());
        }
        let value = if bits.is_empty() {
            0
        } else {
            usize::from_str_radix(bits, 2).map_err(|e| Error::Message(e.to_string()))?
        };
        self.knowledge
            .get_mut(to)
            .expect("party checked above")
            .insert(reports, value);
        self.events.push(Event::Message {
            from: from.to_string(),
            to: to.to_string(),
            bits: bits.to_string(),
            width: bits.len(),
            reports,
        });
        Ok(())
    }

    /// Outcome of measurement event `event` as known to `party`.
    pub fn known_outcome(&self, party: &str, event: usize) -> Option<usize> {
        self.knowledge.get(party).and_then(|k| k.get(&event)).copied()
    }

    /// The pure state of `party`'s qubits, available once every other qubit
    /// has been measured since it was last acted on.
    pub fn party_state(&self, party: &str) -> Result<StateVector> {
        let owned = self.owned(party)?.clone();
        let n = self.state.n_qubits();
        let mut amps = self.state.amplitudes().to_vec();
        let mut labels: Vec<usize> = (1..=n).collect();
        for (subset, v) in &self.collapsed {
            if !subset.is_disjoint(&owned) {
                continue;
            }
            let local: Vec<usize> = subset
                .labels()
                .iter()
                .map(|q| labels.iter().position(|l| l == q).map(|p| p + 1))
                .collect::<Option<_>>()
                .ok_or_else(|| Error::Message("collapse record out of sync".into()))?;
            amps = contract_raw(labels.len(), &amps, &QubitSubset::new(local)?, v.amplitudes())?;
            labels.retain(|l| !subset.contains(*l));
        }
        if labels != owned.sorted().labels() {
            return Err(Error::Message(format!(
                "qubits outside {party} are not all measured; {} remain",
                labels.len()
            )));
        }
        let s = StateVector::normalized(amps)?;
        // reorder from ascending labels to the party's listed order
        let sorted = owned.sorted();
        let perm: Vec<usize> = sorted
            .labels()
            .iter()
            .map(|q| owned.labels().iter().position(|x| x == q).expect("same set") + 1)
            .collect();
        s.permute_qubits(&perm)
    }

    pub fn transcript(&self, fidelity: Option<f64>) -> Transcript {
        let mut cbit_totals = BTreeMap::new();
        let mut total = 0;
        for e in &self.events {
            if let Event::Message { from, to, width, .. } = e {
                *cbit_totals.entry(format!("{from}->{to}")).or_insert(0) += width;
                total += width;
            }
        }
        Transcript {
            protocol: self.protocol.clone(),
            ownership: self.initial_ownership.clone(),
            events: self.events.clone(),
            cbit_totals,
            total_cbits: total,
            fidelity,
        }
    }
}

/// Measurement selectors in protocol order plus the send ordinals of any
/// messages that are lost.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub selectors: Vec<Selector>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dropped: Vec<usize>,
}

impl Schedule {
    pub fn draws(draws: &[f64]) -> Self {
        Schedule {
            selectors: draws.iter().map(|d| Selector::Draw(*d)).collect(),
            dropped: Vec::new(),
        }
    }

    pub fn forced(outcomes: &[usize]) -> Self {
        Schedule {
            selectors: outcomes.iter().map(|k| Selector::Forced(*k)).collect(),
            dropped: Vec::new(),
        }
    }

    pub fn dropping(mut self, ordinals: &[usize]) -> Self {
        self.dropped = ordinals.to_vec();
        self
    }

    /// Selector for the `i`-th measurement of a protocol.
    pub fn selector(&self, i: usize) -> Result<Selector> {
        self.selectors
            .get(i)
            .copied()
            .ok_or_else(|| Error::Message(format!("schedule has no selector for measurement {}", i + 1)))
    }
}

/// Outcome of one protocol execution.
#[derive(Clone, Debug)]
pub struct Run {
    pub transcript: Transcript,
    /// Final state of the receiving party's qubits.
    pub receiver: StateVector,
    pub fidelity: f64,
}

/// What a transcript of a given protocol must show.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolDescriptor {
    pub protocol: String,
    pub cbits: usize,
    pub joint_events: usize,
    pub min_fidelity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditCheck {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub protocol: String,
    pub checks: Vec<AuditCheck>,
    pub pass: bool,
}

pub fn audit(t: &Transcript, expected: &ProtocolDescriptor) -> AuditReport {
    let mut checks = Vec::new();
    let mut push = |name: &str, pass: bool, detail: String| {
        checks.push(AuditCheck {
            name: name.to_string(),
            pass,
            detail,
        })
    };

    let counted: usize = t
        .events
        .iter()
        .map(|e| match e {
            Event::Message { width, .. } => *width,
            _ => 0,
        })
        .sum();
    push(
        "cbits",
        counted == expected.cbits && t.total_cbits == counted,
        format!(
            "{counted} sent, {} recorded, {} expected",
            t.total_cbits, expected.cbits
        ),
    );

    let mut local_ok = true;
    let mut local_detail = String::from("all local events within ownership");
    let mut owned: BTreeMap<String, Vec<usize>> = t
        .ownership
        .iter()
        .map(|(p, q)| (p.clone(), q.labels().to_vec()))
        .collect();
    for (i, e) in t.events.iter().enumerate() {
        let owns = |p: &str, q: &QubitSubset| owned.get(p).is_some_and(|o| q.labels().iter().all(|l| o.contains(l)));
        let bad = match e {
            Event::LocalUnitary { party, qubits, .. } | Event::Measurement { party, qubits, .. } => {
                !owns(party, qubits)
            }
            Event::Transfer { from, to, qubits } => {
                let bad = !owns(from, qubits) || !owned.contains_key(to);
                if !bad {
                    owned.entry(from.clone()).or_default().retain(|l| !qubits.contains(*l));
                    owned.entry(to.clone()).or_default().extend_from_slice(qubits.labels());
                }
                bad
            }
            _ => false,
        };
        if bad {
            local_ok = false;
            local_detail = format!("event {i} acts outside its party's qubits");
            break;
        }
    }
    push("locality", local_ok, local_detail);

    let mut width_ok = true;
    let mut width_detail = String::from("every report wide enough");
    for (i, e) in t.events.iter().enumerate() {
        if let Event::Message {
            bits, width, reports, ..
        } = e
        {
            let need = match t.events.get(*reports) {
                Some(Event::Measurement { outcome_count, .. }) if *reports < i => bits_for(*outcome_count),
                _ => usize::MAX,
            };
            if bits.len() != *width || *width < need {
                width_ok = false;
                width_detail = format!("message {i} carries {width} bits, needs {need}");
                break;
            }
        }
    }
    push("message_width", width_ok, width_detail);

    let joint: Vec<bool> = t
        .events
        .iter()
        .filter_map(|e| match e {
            Event::JointUnitary { sanctioned, .. } => Some(*sanctioned),
            _ => None,
        })
        .collect();
    push(
        "joint_events",
        joint.len() == expected.joint_events && joint.iter().all(|s| *s),
        format!("{} joint events, {} expected", joint.len(), expected.joint_events),
    );

    let fid_ok = t.fidelity.is_some_and(|f| f >= expected.min_fidelity);
    push(
        "fidelity",
        fid_ok,
        match t.fidelity {
            Some(f) => format!("{f:.12} against minimum {:.12}", expected.min_fidelity),
            None => "no fidelity recorded".into(),
        },
    );

    let pass = checks.iter().all(|c| c.pass);
    AuditReport {
        protocol: t.protocol.clone(),
        checks,
        pass,
    }
}
