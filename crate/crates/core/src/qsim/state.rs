use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::qubits::{Layout, QubitSubset};
use crate::error::{Error, Result};

/// Dense complex operator.
pub type CMatrix = DMatrix<C64>;

pub const NORM_TOL: f64 = 1e-12;
pub const UNITARY_TOL: f64 = 1e-10;

/// Normalized pure state of `n_qubits` qubits, msb-first amplitude order.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// Wraps `amps`, requiring unit norm within 1e-12.
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        let n_qubits = qubit_count(amps.len())?;
        check_finite(&amps)?;
        let norm_sq = norm_sqr(&amps);
        if (norm_sq - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm_sq });
        }
        Ok(StateVector { n_qubits, amps })
    }

    /// Rescales `amps` to unit norm.
    pub fn normalized(amps: Vec<C64>) -> Result<Self> {
        let n_qubits = qubit_count(amps.len())?;
        check_finite(&amps)?;
        let norm_sq = norm_sqr(&amps);
        if norm_sq < 1e-28 {
            return Err(Error::NotNormalized { norm_sq });
        }
        let scale = 1.0 / norm_sq.sqrt();
        Ok(StateVector {
            n_qubits,
            amps: amps.into_iter().map(|a| a * scale).collect(),
        })
    }

    pub fn from_reals(amps: &[f64]) -> Result<Self> {
        Self::new(amps.iter().map(|&r| C64::new(r, 0.0)).collect())
    }

    pub fn basis(n_qubits: usize, index: usize) -> Self {
        assert!(index < 1 << n_qubits, "basis index out of range");
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n_qubits];
        amps[index] = C64::new(1.0, 0.0);
        StateVector { n_qubits, amps }
    }

    /// Computational basis ket from a bit string such as `"00101"`.
    pub fn from_bits(bits: &str) -> Result<Self> {
        if !bits.chars().all(|c| c == '0' || c == '1') {
            return Err(Error::Parse(format!("not a bit string: {bits:?}")));
        }
        let index = if bits.is_empty() {
            0
        } else {
            usize::from_str_radix(bits, 2).map_err(|e| Error::Parse(e.to_string()))?
        };
        Ok(Self::basis(bits.len(), index))
    }

    /// The zero-qubit state (a single unit amplitude).
    pub fn empty() -> Self {
        StateVector {
            n_qubits: 0,
            amps: vec![C64::new(1.0, 0.0)],
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitude(&self, index: usize) -> C64 {
        self.amps[index]
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amps)
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(inner(&self.amps, &other.amps))
    }

    pub fn tensor(&self, other: &StateVector) -> StateVector {
        StateVector {
            n_qubits: self.n_qubits + other.n_qubits,
            amps: kron(&self.amps, &other.amps),
        }
    }

    pub fn with_global_phase(&self, theta: f64) -> StateVector {
        let phase = C64::from_polar(1.0, theta);
        StateVector {
            n_qubits: self.n_qubits,
            amps: self.amps.iter().map(|a| a * phase).collect(),
        }
    }

    /// Applies `u` to the qubits of `subset`; the first label is the most
    /// significant index of `u`.
    pub fn apply_on_subset(&self, u: &CMatrix, subset: &QubitSubset) -> Result<StateVector> {
        if subset.is_empty() {
            return Err(Error::EmptySubset);
        }
        let dev = unitarity_deviation(u);
        if u.nrows() != 1 << subset.len() || u.ncols() != u.nrows() {
            return Err(Error::DimensionMismatch {
                expected: 1 << subset.len(),
                got: u.nrows(),
            });
        }
        if dev > UNITARY_TOL {
            return Err(Error::NonUnitary { deviation: dev });
        }
        let amps = apply_raw(self.n_qubits, &self.amps, u, subset)?;
        Ok(StateVector {
            n_qubits: self.n_qubits,
            amps,
        })
    }

    /// Moves the qubit at label `q` to label `perm[q - 1]`.
    pub fn permute_qubits(&self, perm: &[usize]) -> Result<StateVector> {
        let n = self.n_qubits;
        let mut seen = vec![false; n];
        if perm.len() != n {
            return Err(Error::NotBijection { n });
        }
        for &p in perm {
            if p == 0 || p > n || seen[p - 1] {
                return Err(Error::NotBijection { n });
            }
            seen[p - 1] = true;
        }
        let mut amps = vec![C64::new(0.0, 0.0); self.dim()];
        for (i, a) in self.amps.iter().enumerate() {
            let mut j = 0usize;
            for (q, &target) in perm.iter().enumerate() {
                let bit = (i >> (n - 1 - q)) & 1;
                j |= bit << (n - target);
            }
            amps[j] = *a;
        }
        Ok(StateVector { n_qubits: n, amps })
    }

    /// Unnormalized partial inner product (⟨v| on `subset`) ⊗ I applied to
    /// this state; the result lives on the complement register (ascending
    /// labels).
    pub fn contract(&self, subset: &QubitSubset, v: &StateVector) -> Result<Vec<C64>> {
        if v.n_qubits != subset.len() {
            return Err(Error::DimensionMismatch {
                expected: 1 << subset.len(),
                got: v.dim(),
            });
        }
        contract_raw(self.n_qubits, &self.amps, subset, &v.amps)
    }

    /// |v⟩⟨v| on `subset` applied to this state (unnormalized, full register).
    pub fn project(&self, subset: &QubitSubset, v: &StateVector) -> Result<Vec<C64>> {
        let rest = self.contract(subset, v)?;
        Ok(embed_raw(self.n_qubits, subset, &v.amps, &rest))
    }
}

/// |⟨a|b⟩|².
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr().min(1.0))
}

pub(crate) fn qubit_count(len: usize) -> Result<usize> {
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::BadLength { len });
    }
    Ok(len.trailing_zeros() as usize)
}

fn check_finite(amps: &[C64]) -> Result<()> {
    match amps.iter().position(|a| !a.re.is_finite() || !a.im.is_finite()) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

pub(crate) fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum()
}

pub(crate) fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn kron(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(x * y);
        }
    }
    out
}

/// max |U†U − I| entry.
pub fn unitarity_deviation(u: &CMatrix) -> f64 {
    if u.nrows() != u.ncols() {
        return f64::INFINITY;
    }
    let prod = u.adjoint() * u;
    let mut dev: f64 = 0.0;
    for i in 0..prod.nrows() {
        for j in 0..prod.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((prod[(i, j)] - C64::new(target, 0.0)).norm());
        }
    }
    dev
}

pub(crate) fn apply_raw(n_qubits: usize, amps: &[C64], u: &CMatrix, subset: &QubitSubset) -> Result<Vec<C64>> {
    let layout = Layout::new(n_qubits, subset)?;
    let k = 1usize << layout.width();
    let mut out = vec![C64::new(0.0, 0.0); amps.len()];
    let offsets: Vec<usize> = (0..k).map(|s| layout.deposit(s)).collect();
    let mut buf = vec![C64::new(0.0, 0.0); k];
    for base in (0..amps.len()).filter(|i| i & layout.mask() == 0) {
        for (s, off) in offsets.iter().enumerate() {
            buf[s] = amps[base | off];
        }
        for (r, off) in offsets.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for (c, b) in buf.iter().enumerate() {
                acc += u[(r, c)] * b;
            }
            out[base | off] = acc;
        }
    }
    Ok(out)
}

pub(crate) fn contract_raw(n_qubits: usize, amps: &[C64], subset: &QubitSubset, v: &[C64]) -> Result<Vec<C64>> {
    let layout = Layout::new(n_qubits, subset)?;
    let rest = Layout::new(n_qubits, &subset.complement(n_qubits))?;
    let mut out = vec![C64::new(0.0, 0.0); 1 << rest.width()];
    for (i, a) in amps.iter().enumerate() {
        let s = layout.extract(i);
        out[rest.extract(i)] += v[s].conj() * a;
    }
    Ok(out)
}

/// Inverse of `contract_raw` for product vectors: |v⟩ on `subset`, `rest` on
/// the complement.
pub(crate) fn embed_raw(n_qubits: usize, subset: &QubitSubset, v: &[C64], rest: &[C64]) -> Vec<C64> {
    let layout = Layout::new(n_qubits, subset).expect("subset validated by caller");
    let comp = Layout::new(n_qubits, &subset.complement(n_qubits)).expect("complement in range");
    let mut out = vec![C64::new(0.0, 0.0); 1 << n_qubits];
    for (s, vs) in v.iter().enumerate() {
        for (r, rr) in rest.iter().enumerate() {
            out[layout.deposit(s) | comp.deposit(r)] = vs * rr;
        }
    }
    out
}

#[derive(Serialize, Deserialize)]
struct StateJson {
    n: usize,
    amps: Vec<[f64; 2]>,
}

impl Serialize for StateVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        StateJson {
            n: self.n_qubits,
            amps: self.amps.iter().map(|a| [a.re, a.im]).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for StateVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = StateJson::deserialize(d)?;
        if raw.amps.len() != 1usize.checked_shl(raw.n as u32).unwrap_or(0) {
            return Err(serde::de::Error::custom(format!(
                "expected {} amplitudes for n = {}, found {}",
                1usize << raw.n.min(63),
                raw.n,
                raw.amps.len()
            )));
        }
        StateVector::new(raw.amps.iter().map(|[re, im]| C64::new(*re, *im)).collect()).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::pauli::PauliLabel;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn tensor_of_basis_states() {
        let s = StateVector::from_bits("0")
            .unwrap()
            .tensor(&StateVector::from_bits("1").unwrap());
        assert_eq!(s.n_qubits(), 2);
        assert_eq!(s.amplitude(1), c(1.0));
    }

    #[test]
    fn x_on_first_qubit() {
        let s = StateVector::from_bits("00").unwrap();
        let out = s
            .apply_on_subset(&PauliLabel::X.matrix(), &QubitSubset::new(vec![1]).unwrap())
            .unwrap();
        assert_eq!(out, StateVector::from_bits("10").unwrap());
    }

    #[test]
    fn rejects_non_unitary_and_out_of_range() {
        let s = StateVector::from_bits("00").unwrap();
        let bad = CMatrix::from_element(2, 2, c(1.0));
        assert!(matches!(
            s.apply_on_subset(&bad, &QubitSubset::new(vec![1]).unwrap()),
            Err(Error::NonUnitary { .. })
        ));
        assert!(matches!(
            s.apply_on_subset(&PauliLabel::X.matrix(), &QubitSubset::new(vec![3]).unwrap()),
            Err(Error::QubitOutOfRange { .. })
        ));
    }

    #[test]
    fn normalization_enforced() {
        assert!(matches!(
            StateVector::from_reals(&[1.0, 1.0]),
            Err(Error::NotNormalized { .. })
        ));
        assert!(matches!(
            StateVector::new(vec![c(1.0), c(0.0), c(0.0)]),
            Err(Error::BadLength { len: 3 })
        ));
        assert!(matches!(
            StateVector::new(vec![C64::new(f64::NAN, 0.0), c(0.0)]),
            Err(Error::NonFinite { index: 0 })
        ));
    }

    #[test]
    fn swap_permutation() {
        let s = StateVector::from_bits("01").unwrap();
        assert_eq!(
            s.permute_qubits(&[2, 1]).unwrap(),
            StateVector::from_bits("10").unwrap()
        );
        assert_eq!(s.permute_qubits(&[1, 2]).unwrap(), s);
        assert!(matches!(s.permute_qubits(&[1, 1]), Err(Error::NotBijection { n: 2 })));
    }

    #[test]
    fn permutation_moves_labels() {
        // qubit 1 -> position 3, 2 -> 1, 3 -> 2: |100> becomes |001>
        let s = StateVector::from_bits("100").unwrap();
        assert_eq!(
            s.permute_qubits(&[3, 1, 2]).unwrap(),
            StateVector::from_bits("001").unwrap()
        );
    }

    #[test]
    fn fidelity_basics() {
        let zero = StateVector::from_bits("0").unwrap();
        let one = StateVector::from_bits("1").unwrap();
        assert_eq!(fidelity(&zero, &zero).unwrap(), 1.0);
        assert_eq!(fidelity(&zero, &one).unwrap(), 0.0);
        assert!(matches!(
            fidelity(&zero, &StateVector::from_bits("00").unwrap()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn json_round_trip_and_validation() {
        let s = StateVector::normalized(vec![c(1.0), C64::new(0.0, 1.0)]).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        assert!(text.starts_with("{\"n\":1,\"amps\":[["));
        let back: StateVector = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<StateVector>(r#"{"n":1,"amps":[[1,0],[1,0]]}"#).is_err());
        assert!(serde_json::from_str::<StateVector>(r#"{"n":2,"amps":[[1,0],[0,0]]}"#).is_err());
    }

    #[test]
    fn contract_and_embed_invert() {
        let s = StateVector::from_bits("101").unwrap();
        let sub = QubitSubset::new(vec![2]).unwrap();
        let rest = s.contract(&sub, &StateVector::from_bits("0").unwrap()).unwrap();
        assert_eq!(rest, vec![c(0.0), c(0.0), c(0.0), c(1.0)]);
        let back = s.project(&sub, &StateVector::from_bits("0").unwrap()).unwrap();
        assert_eq!(back, s.amplitudes().to_vec());
    }
}
