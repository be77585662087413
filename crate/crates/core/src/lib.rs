//! Exact simulation of the Brown five-qubit state and the protocols built on
//! it: teleportation of one and two qubits, three-party state sharing and
//! five-bit dense coding, with entanglement diagnostics and oracle checks of
//! the transcribed measurement tables.

pub mod brown;
pub mod dense;
pub mod diagnostics;
pub mod error;
pub mod locc;
pub mod oracle;
pub mod qsim;
pub mod reconcile;
pub mod run;
pub mod secret;
pub mod sharing;
pub mod tables;
pub mod teleport;

pub use error::{Error, Result};
