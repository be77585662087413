//! Brute-force derivations that protocol tables are checked against.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qsim::pauli::{all_products, product_matrix};
use crate::qsim::state::{contract_raw, embed_raw, inner, norm_sqr};
use crate::qsim::{CMatrix, MeasurementBasis, PauliLabel, QubitSubset, StateVector};
use crate::tables::DecompositionTable;

pub const ORACLE_TOL: f64 = 1e-10;

/// Combined register `e_k ⊗ resource` for every secret basis ket `e_k`.
pub fn secret_sources(secret_qubits: usize, resource: &StateVector) -> Vec<StateVector> {
    (0..1usize << secret_qubits)
        .map(|k| StateVector::basis(secret_qubits, k).tensor(resource))
        .collect()
}

/// Alice's basis vector for each receiver residue map.
///
/// For residue map `R`, the vector is `Σ_k (I ⊗ ⟨R e_k|) Ψ(e_k)` with the
/// bra acting on `receiver`, normalized. The set must be orthonormal and
/// every residue must carry the same probability.
pub fn derive_basis(sources: &[StateVector], receiver: &QubitSubset, residues: &[CMatrix]) -> Result<Vec<StateVector>> {
    let n = sources.first().map(|s| s.n_qubits()).ok_or(Error::EmptySubset)?;
    let mut out = Vec::with_capacity(residues.len());
    for (i, r) in residues.iter().enumerate() {
        if r.ncols() != sources.len() || r.nrows() != 1 << receiver.len() {
            return Err(Error::DimensionMismatch {
                expected: sources.len(),
                got: r.ncols(),
            });
        }
        let mut acc: Option<Vec<C64>> = None;
        for (k, src) in sources.iter().enumerate() {
            let col: Vec<C64> = r.column(k).iter().copied().collect();
            let part = contract_raw(n, src.amplitudes(), receiver, &col)?;
            match acc.as_mut() {
                None => acc = Some(part),
                Some(a) => a.iter_mut().zip(part).for_each(|(x, y)| *x += y),
            }
        }
        let v = acc.unwrap_or_default();
        if norm_sqr(&v) < 1e-20 {
            return Err(Error::OracleFailure(format!("residue {} has no support", i + 1)));
        }
        out.push(StateVector::normalized(v)?);
    }
    let dev = gram_deviation(&out);
    if dev > ORACLE_TOL {
        return Err(Error::OracleFailure(format!(
            "derived vectors not orthonormal (deviation {dev:e})"
        )));
    }
    Ok(out)
}

/// Alice's basis for a transcribed table: one derived vector per entry,
/// measured on the complement of `receiver`, with a remainder outcome when
/// the vectors do not span Alice's register.
pub fn table_basis(
    name: &str,
    table: &DecompositionTable,
    sources: &[StateVector],
    receiver: &QubitSubset,
) -> Result<MeasurementBasis> {
    let n = sources.first().map(|s| s.n_qubits()).ok_or(Error::EmptySubset)?;
    let vectors = derive_basis(sources, receiver, &table.residue_maps()?)?;
    let alice = receiver.complement(n);
    let complete = vectors.len() == 1 << alice.len();
    MeasurementBasis::new(name, alice, vectors, table.labels(), !complete)
}

/// Largest entry of `|G − I|` for the Gram matrix of `vectors`.
pub fn gram_deviation(vectors: &[StateVector]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, a) in vectors.iter().enumerate() {
        for (j, b) in vectors.iter().enumerate() {
            let g = inner(a.amplitudes(), b.amplitudes());
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g - C64::new(want, 0.0)).norm());
        }
    }
    worst
}

/// Unnormalized receiver state for every secret basis ket after projecting
/// `measured` onto `v`; columns are indexed by secret basis ket.
pub fn residue_map(sources: &[StateVector], measured: &QubitSubset, v: &StateVector) -> Result<CMatrix> {
    let n = sources.first().map(|s| s.n_qubits()).ok_or(Error::EmptySubset)?;
    let d = 1usize << (n - measured.len());
    let mut m = CMatrix::zeros(d, sources.len());
    for (k, src) in sources.iter().enumerate() {
        let col = contract_raw(n, src.amplitudes(), measured, v.amplitudes())?;
        for (r, a) in col.into_iter().enumerate() {
            m[(r, k)] = a;
        }
    }
    Ok(m)
}

/// Rescales `r` so that `Tr(R†R)` equals its column count.
pub fn normalize_map(r: &CMatrix) -> CMatrix {
    let f: f64 = r.iter().map(|z| z.norm_sqr()).sum();
    let scale = (r.ncols() as f64 / f).sqrt();
    r * C64::new(scale, 0.0)
}

/// Largest entry of `|R†R − I|` after normalization.
pub fn isometry_deviation(r: &CMatrix) -> f64 {
    let n = normalize_map(r);
    let g = n.adjoint() * &n;
    let d = g.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - C64::new(want, 0.0)).norm());
        }
    }
    worst
}

/// `|Tr(A† B)| / (‖A‖ ‖B‖)`: one when the maps agree up to a global phase.
pub fn map_overlap(a: &CMatrix, b: &CMatrix) -> f64 {
    if a.shape() != b.shape() {
        return 0.0;
    }
    let ip: C64 = a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum();
    let na: f64 = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    ip.norm() / (na * nb)
}

/// `|⟨a|b⟩| / (‖a‖ ‖b‖)`.
pub fn vector_overlap(a: &[C64], b: &[C64]) -> f64 {
    let na = norm_sqr(a).sqrt();
    let nb = norm_sqr(b).sqrt();
    if a.len() != b.len() || na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    inner(a, b).norm() / (na * nb)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliFit {
    pub labels: Vec<PauliLabel>,
    /// `|Tr(C R)| / d` for the normalized residue map; one for an exact fit.
    pub score: f64,
}

/// The Pauli product `C` (first label on the most significant receiver qubit)
/// that best undoes the square residue map `r`, so that `C R ∝ I`.
pub fn best_pauli(r: &CMatrix) -> Result<PauliFit> {
    if r.nrows() != r.ncols() {
        return Err(Error::DimensionMismatch {
            expected: r.ncols(),
            got: r.nrows(),
        });
    }
    let m = r.nrows().trailing_zeros() as usize;
    let d = r.nrows() as f64;
    let rn = normalize_map(r);
    let mut best = PauliFit {
        labels: vec![PauliLabel::I; m],
        score: -1.0,
    };
    for labels in all_products(m) {
        let score = (product_matrix(&labels) * &rn).trace().norm() / d;
        if score > best.score + 1e-12 {
            best = PauliFit { labels, score };
        }
    }
    Ok(best)
}

/// Extends orthonormal `vectors` of dimension `dim` to a full basis by
/// Gram–Schmidt over the computational basis.
pub fn complete_basis(vectors: &[Vec<C64>], dim: usize) -> Result<Vec<Vec<C64>>> {
    let mut out: Vec<Vec<C64>> = Vec::with_capacity(dim);
    for v in vectors {
        if v.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: v.len(),
            });
        }
        let mut w = v.clone();
        for u in &out {
            let c = inner(u, &w);
            w.iter_mut().zip(u).for_each(|(x, y)| *x -= c * y);
        }
        let n = norm_sqr(&w).sqrt();
        if (n - 1.0).abs() > 1e-8 {
            return Err(Error::GramFailure {
                deviation: (n - 1.0).abs(),
            });
        }
        out.push(w.into_iter().map(|x| x / n).collect());
    }
    for k in 0..dim {
        if out.len() == dim {
            break;
        }
        let mut w = vec![C64::new(0.0, 0.0); dim];
        w[k] = C64::new(1.0, 0.0);
        for u in &out {
            let c = inner(u, &w);
            w.iter_mut().zip(u).for_each(|(x, y)| *x -= c * y);
        }
        let n = norm_sqr(&w).sqrt();
        if n > 1e-6 {
            out.push(w.into_iter().map(|x| x / n).collect());
        }
    }
    Ok(out)
}

/// A unitary mapping `from[i]` to `to[i]`, completed on the orthogonal
/// complements.
pub fn basis_to_basis(from: &[Vec<C64>], to: &[Vec<C64>]) -> Result<CMatrix> {
    let dim = from.first().map(Vec::len).unwrap_or(0);
    if from.len() != to.len() || to.iter().any(|t| t.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: from.len(),
            got: to.len(),
        });
    }
    let f = complete_basis(from, dim).map_err(|_| Error::NonUnitaryConversion { deviation: f64::NAN })?;
    let t = complete_basis(to, dim).map_err(|_| Error::NonUnitaryConversion { deviation: f64::NAN })?;
    let mut u = CMatrix::zeros(dim, dim);
    for (fv, tv) in f.iter().zip(&t) {
        for r in 0..dim {
            for c in 0..dim {
                u[(r, c)] += tv[r] * fv[c].conj();
            }
        }
    }
    let deviation = crate::qsim::unitarity_deviation(&u);
    if deviation > ORACLE_TOL {
        return Err(Error::NonUnitaryConversion { deviation });
    }
    Ok(u)
}

/// The unitary taking a residue map to the identity embedding of the secret:
/// column `k` of the normalized map goes to the computational ket `k`.
pub fn undo_residue(r: &CMatrix) -> Result<CMatrix> {
    let rn = normalize_map(r);
    let from: Vec<Vec<C64>> = (0..rn.ncols())
        .map(|k| rn.column(k).iter().copied().collect())
        .collect();
    let to: Vec<Vec<C64>> = (0..rn.ncols())
        .map(|k| StateVector::basis(rn.nrows().trailing_zeros() as usize, k).into_amplitudes())
        .collect();
    basis_to_basis(&from, &to)
}

/// Rebuilds every source from the derived decomposition `Σ_i c b_i ⊗ R_i e_k`
/// and returns the largest amplitude error, with `c` fixed by probability.
pub fn reconstruction_error(
    sources: &[StateVector],
    alice: &QubitSubset,
    basis: &[StateVector],
    residues: &[CMatrix],
) -> Result<f64> {
    let n = sources.first().map(|s| s.n_qubits()).ok_or(Error::EmptySubset)?;
    let mut worst: f64 = 0.0;
    for (k, src) in sources.iter().enumerate() {
        let mut acc = vec![C64::new(0.0, 0.0); src.dim()];
        for (b, r) in basis.iter().zip(residues) {
            let rn = normalize_map(r);
            let p = 1.0 / basis.len() as f64;
            let col: Vec<C64> = rn.column(k).iter().map(|z| z * p.sqrt()).collect();
            let emb = embed_raw(n, alice, b.amplitudes(), &col);
            acc.iter_mut().zip(emb).for_each(|(x, y)| *x += y);
        }
        // a global phase per table is allowed
        let phase = inner(&acc, src.amplitudes());
        let phase = if phase.norm() > 0.0 {
            phase / phase.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for (a, s) in acc.iter().zip(src.amplitudes()) {
            worst = worst.max((a * phase - s).norm());
        }
    }
    Ok(worst)
}

/// Human-readable ket sum of the nonzero amplitudes, e.g. `+0.5|01> -0.5|10>`.
pub fn render_vector(v: &[C64]) -> String {
    let n = v.len().trailing_zeros() as usize;
    let mut parts = Vec::new();
    for (i, a) in v.iter().enumerate() {
        if a.norm() < 1e-12 {
            continue;
        }
        let amp = if a.im.abs() < 1e-12 {
            format!("{:+.6}", a.re)
        } else if a.re.abs() < 1e-12 {
            format!("{:+.6}i", a.im)
        } else {
            format!("+({:.6}{:+.6}i)", a.re, a.im)
        };
        parts.push(format!("{amp}|{i:0n$b}>"));
    }
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brown::{bell_state, BellKind};

    fn pauli_map(labels: &[PauliLabel]) -> CMatrix {
        product_matrix(labels)
    }

    #[test]
    fn best_pauli_inverts_pauli_residues() {
        for labels in all_products(2) {
            // residue R = P, so C = P⁻¹ ∝ P
            let fit = best_pauli(&pauli_map(&labels)).unwrap();
            assert_eq!(fit.labels, labels);
            assert!((fit.score - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn best_pauli_flags_non_pauli() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let had = CMatrix::from_row_slice(2, 2, &[h, h, h, -h].map(|x| C64::new(x, 0.0)));
        assert!(best_pauli(&had).unwrap().score < 0.8);
    }

    #[test]
    fn ordinary_teleportation_basis_is_bell() {
        // secret on qubit 1, Bell pair psi+ on (2,3); Bob holds 3
        let sources = secret_sources(1, &bell_state(BellKind::PsiPlus));
        let identity = CMatrix::identity(2, 2);
        let basis = derive_basis(&sources, &QubitSubset::span(3, 3), std::slice::from_ref(&identity)).unwrap();
        let f = crate::qsim::fidelity(&basis[0], &bell_state(BellKind::PsiPlus)).unwrap();
        assert!((f - 1.0).abs() < 1e-12);
        let res = residue_map(&sources, &QubitSubset::span(1, 2), &basis[0]).unwrap();
        assert!(map_overlap(&res, &identity) > 1.0 - 1e-12);
        assert!(isometry_deviation(&res) < 1e-12);
    }

    #[test]
    fn derive_rejects_inconsistent_residues() {
        let sources = secret_sources(1, &bell_state(BellKind::PsiPlus));
        let i = CMatrix::identity(2, 2);
        let err = derive_basis(&sources, &QubitSubset::span(3, 3), &[i.clone(), i]).unwrap_err();
        assert!(matches!(err, Error::OracleFailure(_)));
    }

    #[test]
    fn basis_to_basis_maps_and_is_unitary() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let from = vec![vec![C64::new(h, 0.0), C64::new(h, 0.0)]];
        let to = vec![vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)]];
        let u = basis_to_basis(&from, &to).unwrap();
        let x = CMatrix::from_column_slice(2, 1, &from[0]);
        let y = &u * x;
        assert!((y[(1, 0)] - C64::new(1.0, 0.0)).norm() < 1e-12);
        let bad = vec![vec![C64::new(2.0, 0.0), C64::new(0.0, 0.0)]];
        assert!(basis_to_basis(&bad, &to).is_err());
    }

    #[test]
    fn rendering() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v = vec![
            C64::new(0.0, 0.0),
            C64::new(h, 0.0),
            C64::new(0.0, -h),
            C64::new(0.0, 0.0),
        ];
        assert_eq!(render_vector(&v), "+0.707107|01> -0.707107i|10>");
    }
}
