//! Dense state-vector and density-matrix engine.

pub mod density;
pub mod measure;
pub mod pauli;
pub mod qubits;
pub mod state;

pub use density::{partial_trace, schmidt_coefficients, von_neumann_entropy, DensityMatrix};
pub use measure::{measure_in_basis, outcome_probabilities, Measurement, MeasurementBasis, Selector};
pub use pauli::PauliLabel;
pub use qubits::QubitSubset;
pub use state::{fidelity, unitarity_deviation, CMatrix, StateVector};
