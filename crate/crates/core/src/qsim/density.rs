use nalgebra::SymmetricEigen;
use num_complex::Complex64 as C64;

use super::qubits::{Layout, QubitSubset};
use super::state::{qubit_count, CMatrix, StateVector};
use crate::error::{Error, Result};

const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;
/// Eigenvalues below this are treated as exact zeros in the entropy.
const EIGEN_CLAMP: f64 = 1e-12;

/// Hermitian, positive semidefinite, unit-trace operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    entries: CMatrix,
}

impl DensityMatrix {
    pub fn new(entries: CMatrix) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::InvalidDensity {
                reason: format!("{}x{} is not square", entries.nrows(), entries.ncols()),
            });
        }
        let n_qubits = qubit_count(entries.nrows())?;
        let herm = max_abs(&(&entries - entries.adjoint()));
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidDensity {
                reason: format!("not Hermitian (deviation {herm:e})"),
            });
        }
        let trace = entries.trace();
        if (trace.re - 1.0).abs() > TRACE_TOL || trace.im.abs() > TRACE_TOL {
            return Err(Error::InvalidDensity {
                reason: format!("trace {trace} differs from 1"),
            });
        }
        let rho = DensityMatrix { n_qubits, entries };
        if let Some(min) = rho.raw_eigenvalues().into_iter().reduce(f64::min) {
            if min < -PSD_TOL {
                return Err(Error::InvalidDensity {
                    reason: format!("negative eigenvalue {min:e}"),
                });
            }
        }
        Ok(rho)
    }

    pub fn from_pure(state: &StateVector) -> Self {
        let v = CMatrix::from_column_slice(state.dim(), 1, state.amplitudes());
        DensityMatrix {
            n_qubits: state.n_qubits(),
            entries: &v * v.adjoint(),
        }
    }

    /// The maximally mixed state I/2^n.
    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let d = 1usize << n_qubits;
        DensityMatrix {
            n_qubits,
            entries: CMatrix::identity(d, d) * C64::new(1.0 / d as f64, 0.0),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    /// Tr(ρ²) by direct matrix product.
    pub fn purity(&self) -> f64 {
        (&self.entries * &self.entries).trace().re
    }

    fn raw_eigenvalues(&self) -> Vec<f64> {
        SymmetricEigen::new(self.entries.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect()
    }

    /// Eigenvalues clamped to [0, 1], descending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self
            .raw_eigenvalues()
            .into_iter()
            .map(|l| if l < EIGEN_CLAMP { 0.0 } else { l.min(1.0) })
            .collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        ev
    }

    /// Von Neumann entropy in bits, with 0·log 0 = 0.
    pub fn entropy(&self) -> f64 {
        let s: f64 = self
            .eigenvalues()
            .into_iter()
            .filter(|&l| l > 0.0)
            .map(|l| -l * l.log2())
            .sum();
        s.max(0.0)
    }

    /// Reduction onto `keep` (first label most significant).
    pub fn partial_trace(&self, keep: &QubitSubset) -> Result<DensityMatrix> {
        check_keep(self.n_qubits, keep)?;
        let kl = Layout::new(self.n_qubits, keep)?;
        let rl = Layout::new(self.n_qubits, &keep.complement(self.n_qubits))?;
        let dk = 1usize << kl.width();
        let dr = 1usize << rl.width();
        let mut out = CMatrix::zeros(dk, dk);
        for a in 0..dk {
            for b in 0..dk {
                let mut acc = C64::new(0.0, 0.0);
                for c in 0..dr {
                    let i = kl.deposit(a) | rl.deposit(c);
                    let j = kl.deposit(b) | rl.deposit(c);
                    acc += self.entries[(i, j)];
                }
                out[(a, b)] = acc;
            }
        }
        Ok(DensityMatrix {
            n_qubits: keep.len(),
            entries: out,
        })
    }

    /// Largest entrywise distance to `other`.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        max_abs(&(&self.entries - &other.entries))
    }

    /// Convex combination `Σ w_i ρ_i`; weights must sum to one.
    pub fn mixture(parts: &[(f64, DensityMatrix)]) -> Result<DensityMatrix> {
        let first = parts.first().ok_or_else(|| Error::InvalidDensity {
            reason: "empty mixture".into(),
        })?;
        let mut acc = CMatrix::zeros(first.1.dim(), first.1.dim());
        for (w, rho) in parts {
            if rho.dim() != acc.nrows() {
                return Err(Error::DimensionMismatch {
                    expected: acc.nrows(),
                    got: rho.dim(),
                });
            }
            acc += &rho.entries * C64::new(*w, 0.0);
        }
        DensityMatrix::new(acc)
    }
}

pub(crate) fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn check_keep(n_qubits: usize, keep: &QubitSubset) -> Result<()> {
    if keep.is_empty() {
        return Err(Error::EmptySubset);
    }
    keep.check_within(n_qubits)
}

/// Reduced state of a pure state on `keep`, computed as M M† with M the
/// amplitude matrix reshaped across the cut.
pub fn partial_trace(state: &StateVector, keep: &QubitSubset) -> Result<DensityMatrix> {
    let n = state.n_qubits();
    check_keep(n, keep)?;
    let m = bipartite_matrix(state, keep)?;
    Ok(DensityMatrix {
        n_qubits: keep.len(),
        entries: &m * m.adjoint(),
    })
}

/// Amplitudes arranged as a (2^|keep|) × (2^|rest|) matrix.
pub(crate) fn bipartite_matrix(state: &StateVector, keep: &QubitSubset) -> Result<CMatrix> {
    let n = state.n_qubits();
    let kl = Layout::new(n, keep)?;
    let rl = Layout::new(n, &keep.complement(n))?;
    let mut m = CMatrix::zeros(1 << kl.width(), 1 << rl.width());
    for (i, a) in state.amplitudes().iter().enumerate() {
        m[(kl.extract(i), rl.extract(i))] = *a;
    }
    Ok(m)
}

/// Schmidt coefficients across `keep | rest`, descending, via singular values.
pub fn schmidt_coefficients(state: &StateVector, keep: &QubitSubset) -> Result<Vec<f64>> {
    let m = bipartite_matrix(state, keep)?;
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(sv)
}

pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    rho.entropy()
}
