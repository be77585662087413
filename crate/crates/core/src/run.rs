//! Seeded or replayed execution of any protocol, with the audit attached.
//!
//! In seed mode one ChaCha8 generator drives everything: stream 0 supplies the
//! secret (or dense message) when none is given, stream 1 the measurement
//! draws. The draws are written into the report so the run can be replayed
//! in draw mode.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dense;
use crate::error::{Error, Result};
use crate::locc::{audit, AuditReport, ProtocolDescriptor, Run, Schedule, Transcript};
use crate::secret::{Secret, SecretQubit, SecretTwoQubit};
use crate::sharing::SharingProtocol;
use crate::teleport::{teleport_one_qubit, teleport_two_qubit};

pub const DEFAULT_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Protocol {
    TeleportOne,
    TeleportTwo,
    Sharing(SharingProtocol),
    Dense,
}

impl Protocol {
    pub const ALL: [Protocol; 8] = [
        Protocol::TeleportOne,
        Protocol::TeleportTwo,
        Protocol::Sharing(SharingProtocol::ProposalOne),
        Protocol::Sharing(SharingProtocol::ProposalOneSplit),
        Protocol::Sharing(SharingProtocol::ProposalTwo),
        Protocol::Sharing(SharingProtocol::TwoQubit),
        Protocol::Sharing(SharingProtocol::TwoQubitCooperative),
        Protocol::Dense,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Protocol::TeleportOne => "teleport1",
            Protocol::TeleportTwo => "teleport2",
            Protocol::Sharing(p) => p.name(),
            Protocol::Dense => "dense",
        }
    }

    /// Secret size, zero for dense coding.
    pub fn secret_qubits(self) -> usize {
        match self {
            Protocol::TeleportOne => 1,
            Protocol::TeleportTwo => 2,
            Protocol::Sharing(p) => p.secret_qubits(),
            Protocol::Dense => 0,
        }
    }

    pub fn measurements(self) -> usize {
        match self {
            Protocol::Sharing(p) => p.measurements(),
            _ => 1,
        }
    }

    pub fn descriptor(self) -> ProtocolDescriptor {
        let teleport = |cbits| ProtocolDescriptor {
            protocol: self.name().into(),
            cbits,
            joint_events: 0,
            min_fidelity: 1.0 - DEFAULT_TOLERANCE,
        };
        match self {
            Protocol::TeleportOne => teleport(2),
            Protocol::TeleportTwo => teleport(4),
            Protocol::Sharing(p) => p.descriptor(),
            Protocol::Dense => dense::descriptor(),
        }
    }

    /// Protocol whose transcripts carry this name.
    pub fn from_transcript(t: &Transcript) -> Result<Self> {
        t.protocol.parse()
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Protocol {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Protocol::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown protocol {s}")))
    }
}

/// Where measurement outcomes come from.
#[derive(Clone, Debug, PartialEq)]
pub enum Randomness {
    Seed(u64),
    Draws(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunRequest {
    pub protocol: Protocol,
    pub secret: Option<Secret>,
    pub message: Option<u32>,
    pub randomness: Randomness,
    /// Send ordinals of messages that never arrive.
    pub dropped: Vec<usize>,
    pub tolerance: f64,
}

impl RunRequest {
    pub fn seeded(protocol: Protocol, seed: u64) -> Self {
        RunRequest {
            protocol,
            secret: None,
            message: None,
            randomness: Randomness::Seed(seed),
            dropped: Vec::new(),
            tolerance: DEFAULT_TOLERANCE,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub protocol: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub draws: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub secret: Option<Secret>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decoded: Option<u32>,
    pub fidelity: f64,
    pub tolerance: f64,
    pub transcript: Transcript,
    pub audit: AuditReport,
    pub pass: bool,
}

fn random_secret<R: Rng>(n: usize, rng: &mut R) -> Secret {
    if n == 2 {
        Secret::Two(SecretTwoQubit::haar(rng))
    } else {
        Secret::One(SecretQubit::haar(rng))
    }
}

fn stream(seed: u64, k: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k);
    rng
}

pub fn execute(req: &RunRequest) -> Result<RunReport> {
    if req.tolerance.is_nan() || req.tolerance <= 0.0 {
        return Err(Error::Message(format!(
            "tolerance must be positive, got {}",
            req.tolerance
        )));
    }
    let p = req.protocol;
    let (seed, draws) = match &req.randomness {
        Randomness::Seed(s) => {
            let mut rng = stream(*s, 1);
            (Some(*s), (0..p.measurements()).map(|_| rng.random::<f64>()).collect())
        }
        Randomness::Draws(d) => {
            if d.len() != p.measurements() {
                return Err(Error::Message(format!(
                    "{} needs {} draws, got {}",
                    p.name(),
                    p.measurements(),
                    d.len()
                )));
            }
            if let Some(x) = d.iter().find(|x| !(0.0..1.0).contains(*x)) {
                return Err(Error::Message(format!("draw {x} outside [0, 1)")));
            }
            (None, d.clone())
        }
    };
    let mut secret_rng = seed.map(|s| stream(s, 0));
    let schedule = Schedule::draws(&draws).dropping(&req.dropped);

    let (secret, message, decoded, run): (Option<Secret>, Option<u32>, Option<u32>, Run) = if p == Protocol::Dense {
        if req.secret.is_some() {
            return Err(Error::Message("dense coding takes a message, not a secret".into()));
        }
        let message = match (req.message, secret_rng.as_mut()) {
            (Some(m), _) => m,
            (None, Some(rng)) => rng.random_range(0..32),
            (None, None) => return Err(Error::Message("dense coding in draw mode needs a message".into())),
        };
        let (run, decoded) = dense::run_dense(message, &schedule)?;
        (None, Some(message), Some(decoded), run)
    } else {
        if req.message.is_some() {
            return Err(Error::Message(format!("{} takes a secret, not a message", p.name())));
        }
        let secret = match (req.secret, secret_rng.as_mut()) {
            (Some(s), _) => s,
            (None, Some(rng)) => random_secret(p.secret_qubits(), rng),
            (None, None) => return Err(Error::Message(format!("{} in draw mode needs a secret", p.name()))),
        };
        let run = match (p, &secret) {
            (Protocol::TeleportOne, Secret::One(s)) => teleport_one_qubit(s, &schedule)?,
            (Protocol::TeleportTwo, Secret::Two(s)) => teleport_two_qubit(s, &schedule)?,
            (Protocol::Sharing(sp), _) => sp.run(&secret, &schedule)?,
            _ => {
                return Err(Error::DimensionMismatch {
                    expected: p.secret_qubits(),
                    got: secret.n_qubits(),
                })
            }
        };
        (Some(secret), None, None, run)
    };

    let mut descriptor = p.descriptor();
    descriptor.min_fidelity = 1.0 - req.tolerance;
    let report = audit(&run.transcript, &descriptor);
    let decoded_ok = decoded.is_none() || decoded == message;
    Ok(RunReport {
        protocol: p.name().into(),
        seed,
        draws,
        secret,
        message,
        decoded,
        fidelity: run.fidelity,
        tolerance: req.tolerance,
        pass: report.pass && decoded_ok,
        transcript: run.transcript,
        audit: report,
    })
}
