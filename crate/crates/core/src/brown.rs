//! Construction of the Brown five-qubit state and its variants.
//!
//! The state is `½(|001⟩|φ−⟩ + |010⟩|ψ−⟩ + |100⟩|φ+⟩ + |111⟩|ψ+⟩)` with the
//! Bell naming used throughout this crate:
//! `ψ± = (|00⟩ ± |11⟩)/√2`, `φ± = (|01⟩ ± |10⟩)/√2`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qsim::{fidelity, CMatrix, QubitSubset, StateVector};

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BellKind {
    #[serde(rename = "psi+")]
    PsiPlus,
    #[serde(rename = "psi-")]
    PsiMinus,
    #[serde(rename = "phi+")]
    PhiPlus,
    #[serde(rename = "phi-")]
    PhiMinus,
}

impl BellKind {
    /// Measurement order used for Bell-basis measurements.
    pub const ALL: [BellKind; 4] = [
        BellKind::PsiPlus,
        BellKind::PsiMinus,
        BellKind::PhiPlus,
        BellKind::PhiMinus,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BellKind::PsiPlus => "psi+",
            BellKind::PsiMinus => "psi-",
            BellKind::PhiPlus => "phi+",
            BellKind::PhiMinus => "phi-",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "psi+" | "ψ+" => Ok(BellKind::PsiPlus),
            "psi-" | "ψ-" | "ψ−" => Ok(BellKind::PsiMinus),
            "phi+" | "φ+" => Ok(BellKind::PhiPlus),
            "phi-" | "φ-" | "φ−" => Ok(BellKind::PhiMinus),
            other => Err(Error::Parse(format!("unknown Bell state {other:?}"))),
        }
    }
}

pub fn bell_state(kind: BellKind) -> StateVector {
    let h = FRAC_1_SQRT_2;
    let amps = match kind {
        BellKind::PsiPlus => [h, 0.0, 0.0, h],
        BellKind::PsiMinus => [h, 0.0, 0.0, -h],
        BellKind::PhiPlus => [0.0, h, h, 0.0],
        BellKind::PhiMinus => [0.0, h, -h, 0.0],
    };
    StateVector::from_reals(&amps).expect("Bell states are normalized")
}

/// The four (three-qubit prefix, Bell partner) branches of the Brown state.
pub const BRANCHES: [(&str, BellKind); 4] = [
    ("001", BellKind::PhiMinus),
    ("010", BellKind::PsiMinus),
    ("100", BellKind::PhiPlus),
    ("111", BellKind::PsiPlus),
];

fn superpose(terms: &[(f64, StateVector)]) -> Vec<C64> {
    let dim = terms[0].1.dim();
    let mut out = vec![C64::new(0.0, 0.0); dim];
    for (w, s) in terms {
        for (o, a) in out.iter_mut().zip(s.amplitudes()) {
            *o += a * *w;
        }
    }
    out
}

fn branch_state(prefix: &str, bits: &str, bell: BellKind) -> StateVector {
    StateVector::from_bits(&format!("{prefix}{bits}"))
        .expect("branch labels are bit strings")
        .tensor(&bell_state(bell))
}

/// The literal Brown state.
pub fn brown_state() -> StateVector {
    weighted_brown(&WeightVector::uniform()).expect("uniform weights are normalized")
}

/// Qubit-1-first CNOT as a 4×4 matrix (control is the first label of the subset).
pub fn cnot_matrix() -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    for (r, c) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
        m[(r, c)] = C64::new(1.0, 0.0);
    }
    m
}

/// Unitary with exactly one ±1 entry in every row and column.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignedPermutationMatrix {
    /// Row `r` holds `sign` at column `cols[r]`.
    cols: Vec<usize>,
    signs: Vec<i8>,
}

impl SignedPermutationMatrix {
    /// Builds from 1-based `(row, column, sign)` entries.
    pub fn from_entries(dim: usize, entries: &[(usize, usize, i8)]) -> Result<Self> {
        let mut cols = vec![usize::MAX; dim];
        let mut signs = vec![0i8; dim];
        let mut col_used = vec![false; dim];
        for &(r, c, s) in entries {
            if r == 0 || c == 0 || r > dim || c > dim {
                return Err(Error::Parse(format!("entry ({r},{c}) outside {dim}x{dim}")));
            }
            if s != 1 && s != -1 {
                return Err(Error::Parse(format!("entry ({r},{c}) has sign {s}")));
            }
            if cols[r - 1] != usize::MAX {
                return Err(Error::Parse(format!("row {r} has two entries")));
            }
            if col_used[c - 1] {
                return Err(Error::Parse(format!("column {c} has two entries")));
            }
            cols[r - 1] = c - 1;
            signs[r - 1] = s;
            col_used[c - 1] = true;
        }
        if let Some(r) = cols.iter().position(|&c| c == usize::MAX) {
            return Err(Error::Parse(format!("row {} has no entry", r + 1)));
        }
        Ok(SignedPermutationMatrix { cols, signs })
    }

    pub fn dim(&self) -> usize {
        self.cols.len()
    }

    /// `(column, sign)` of 1-based row `row`, column 1-based.
    pub fn entry(&self, row: usize) -> (usize, i8) {
        (self.cols[row - 1] + 1, self.signs[row - 1])
    }

    pub fn to_integer_matrix(&self) -> Vec<Vec<i64>> {
        let d = self.dim();
        let mut m = vec![vec![0i64; d]; d];
        for (r, (&c, &s)) in self.cols.iter().zip(&self.signs).enumerate() {
            m[r][c] = i64::from(s);
        }
        m
    }

    /// `M · Mᵀ == I` in exact integer arithmetic.
    pub fn is_exactly_orthogonal(&self) -> bool {
        let m = self.to_integer_matrix();
        let d = self.dim();
        (0..d).all(|i| {
            (0..d).all(|j| {
                let dot: i64 = (0..d).map(|k| m[i][k] * m[j][k]).sum();
                dot == i64::from(i == j)
            })
        })
    }

    pub fn to_cmatrix(&self) -> CMatrix {
        let d = self.dim();
        let mut m = CMatrix::zeros(d, d);
        for (r, (&c, &s)) in self.cols.iter().zip(&self.signs).enumerate() {
            m[(r, c)] = C64::new(f64::from(s), 0.0);
        }
        m
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        if state.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: state.dim(),
            });
        }
        let amps = self
            .cols
            .iter()
            .zip(&self.signs)
            .map(|(&c, &s)| state.amplitude(c) * f64::from(s))
            .collect();
        StateVector::new(amps)
    }
}

/// The printed nonzero entries of U_b, 1-based `(row, column, sign)`.
///
/// Row and column 22 are absent from the published list.
pub const UB_PRINTED_ENTRIES: [(usize, usize, i8); 31] = [
    (1, 1, 1),
    (2, 2, 1),
    (5, 6, 1),
    (6, 5, 1),
    (9, 9, 1),
    (10, 10, 1),
    (13, 14, 1),
    (14, 13, 1),
    (17, 18, 1),
    (18, 17, 1),
    (19, 20, 1),
    (20, 19, 1),
    (21, 21, 1),
    (23, 23, 1),
    (24, 24, 1),
    (25, 26, 1),
    (26, 25, 1),
    (27, 28, 1),
    (28, 27, 1),
    (29, 29, 1),
    (30, 30, 1),
    (31, 31, 1),
    (32, 32, 1),
    (3, 3, -1),
    (4, 4, -1),
    (7, 8, -1),
    (8, 7, -1),
    (11, 11, -1),
    (12, 12, -1),
    (15, 16, -1),
    (16, 15, -1),
];

/// The diagonal completion of the missing row.
pub const UB_COMPLETION: (usize, usize, i8) = (22, 22, 1);

pub fn build_ub() -> SignedPermutationMatrix {
    let mut entries = UB_PRINTED_ENTRIES.to_vec();
    entries.push(UB_COMPLETION);
    SignedPermutationMatrix::from_entries(32, &entries).expect("completed U_b is a signed permutation")
}

/// `(|01⟩ + |10⟩)(|0⟩ + |1⟩)/2` after CNOT with control 3 and target 2.
pub fn w_state_via_cnot() -> StateVector {
    let plus = StateVector::from_reals(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2]).expect("normalized");
    bell_state(BellKind::PhiPlus)
        .tensor(&plus)
        .apply_on_subset(&cnot_matrix(), &QubitSubset::new(vec![3, 2]).expect("distinct"))
        .expect("CNOT is unitary")
}

#[derive(Clone, Debug)]
pub struct CircuitPreparation {
    pub w_state: StateVector,
    pub state: StateVector,
    pub fidelity: f64,
}

/// Prepares the Brown state as U_b (|W⟩ ⊗ |ψ+⟩) and checks it against the
/// literal expansion.
pub fn prepare_brown_via_circuit() -> Result<CircuitPreparation> {
    let w = w_state_via_cnot();
    let state = build_ub().apply(&w.tensor(&bell_state(BellKind::PsiPlus)))?;
    let target = brown_state();
    let fid = fidelity(&state, &target)?;
    if fid < 1.0 - 1e-12 {
        let max_diff = state
            .amplitudes()
            .iter()
            .zip(target.amplitudes())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        return Err(Error::ConstructionMismatch {
            fidelity: fid,
            max_diff,
        });
    }
    Ok(CircuitPreparation {
        w_state: w,
        state,
        fidelity: fid,
    })
}

/// Three-qubit orthonormal states Ω1..Ω4.
#[derive(Clone, Debug)]
pub struct OmegaBasis {
    states: [StateVector; 4],
}

impl OmegaBasis {
    pub fn states(&self) -> &[StateVector; 4] {
        &self.states
    }

    pub fn get(&self, i: usize) -> &StateVector {
        &self.states[i]
    }
}

pub fn omega_basis() -> OmegaBasis {
    let h = FRAC_1_SQRT_2;
    let mk = |a: &str, sa: f64, b: &str, sb: f64| {
        let ka = StateVector::from_bits(a).expect("bits");
        let kb = StateVector::from_bits(b).expect("bits");
        StateVector::new(superpose(&[(sa * h, ka), (sb * h, kb)])).expect("normalized")
    };
    OmegaBasis {
        states: [
            mk("101", 1.0, "110", -1.0),
            mk("000", 1.0, "011", -1.0),
            mk("001", 1.0, "010", 1.0),
            mk("100", 1.0, "111", 1.0),
        ],
    }
}

/// `½(Ω1|φ−⟩ + Ω2|ψ−⟩ + Ω3|φ+⟩ + Ω4|ψ+⟩)`.
pub fn omega_form_state() -> StateVector {
    let om = omega_basis();
    let terms: Vec<(f64, StateVector)> = BRANCHES
        .iter()
        .enumerate()
        .map(|(i, (_, bell))| (0.5, om.get(i).tensor(&bell_state(*bell))))
        .collect();
    StateVector::new(superpose(&terms)).expect("orthonormal branches")
}

/// Two-qubit map |00⟩→φ−, |01⟩→ψ−, |10⟩→φ+, |11⟩→ψ+ (columns are the Bell partners).
pub fn bell_dictionary() -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    for (col, (_, bell)) in BRANCHES.iter().enumerate() {
        for (row, a) in bell_state(*bell).amplitudes().iter().enumerate() {
            m[(row, col)] = *a;
        }
    }
    m
}

/// The Brown state with qubits (1,2) moved behind (3,4,5) and the Bell
/// dictionary applied to the moved pair.
pub fn relabeled_brown_for_omega_form() -> StateVector {
    brown_state()
        .permute_qubits(&[4, 5, 1, 2, 3])
        .and_then(|s| s.apply_on_subset(&bell_dictionary(), &QubitSubset::span(4, 5)))
        .expect("valid relabeling")
}

/// Four distinct n-bit labels prefixed to the Brown branches.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneralizedIndex {
    n: usize,
    eta: [usize; 4],
}

impl GeneralizedIndex {
    pub fn new(n: usize, eta: [usize; 4]) -> Result<Self> {
        if n == 0 {
            return Ok(GeneralizedIndex { n, eta: [0; 4] });
        }
        let distinct = (0..4).all(|i| (0..i).all(|j| eta[i] != eta[j]));
        if n >= usize::BITS as usize || eta.iter().any(|&e| e >= 1 << n) || !distinct {
            return Err(Error::BadGeneralizedIndex { n });
        }
        Ok(GeneralizedIndex { n, eta })
    }

    /// Parses labels such as `["00", "11", "10", "01"]`.
    pub fn from_labels(labels: &[&str]) -> Result<Self> {
        if labels.len() != 4 {
            return Err(Error::Parse(format!("expected 4 labels, got {}", labels.len())));
        }
        let n = labels[0].len();
        let mut eta = [0usize; 4];
        for (slot, l) in eta.iter_mut().zip(labels) {
            if l.len() != n || !l.chars().all(|c| c == '0' || c == '1') {
                return Err(Error::BadGeneralizedIndex { n });
            }
            *slot = if n == 0 {
                0
            } else {
                usize::from_str_radix(l, 2).map_err(|e| Error::Parse(e.to_string()))?
            };
        }
        GeneralizedIndex::new(n, eta)
    }

    /// `(00, 11, 10, 01)` left-padded with zeros to `n` bits.
    pub fn default_for(n: usize) -> Result<Self> {
        GeneralizedIndex::new(n, [0b00, 0b11, 0b10, 0b01])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn labels(&self) -> [String; 4] {
        let n = self.n;
        self.eta
            .map(|e| if n == 0 { String::new() } else { format!("{e:0n$b}") })
    }
}

/// `½ Σ |η_i⟩|t_i⟩|bell_i⟩` over n + 5 qubits.
pub fn generalized_brown(idx: &GeneralizedIndex) -> StateVector {
    let labels = idx.labels();
    let terms: Vec<(f64, StateVector)> = BRANCHES
        .iter()
        .zip(&labels)
        .map(|((bits, bell), eta)| (0.5, branch_state(eta, bits, *bell)))
        .collect();
    StateVector::new(superpose(&terms)).expect("distinct branches are orthonormal")
}

/// Branch weights A1..A4.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightVector(pub [f64; 4]);

impl WeightVector {
    pub fn uniform() -> Self {
        WeightVector([0.5; 4])
    }

    pub fn sum_sq(&self) -> f64 {
        self.0.iter().map(|a| a * a).sum()
    }
}

/// `Σ A_i |t_i⟩|bell_i⟩`.
pub fn weighted_brown(w: &WeightVector) -> Result<StateVector> {
    let sum_sq = w.sum_sq();
    if !w.0.iter().all(|a| a.is_finite()) || (sum_sq - 1.0).abs() > 1e-12 {
        return Err(Error::UnnormalizedWeights { sum_sq });
    }
    let terms: Vec<(f64, StateVector)> = BRANCHES
        .iter()
        .zip(w.0)
        .map(|((bits, bell), a)| (a, branch_state("", bits, *bell)))
        .collect();
    StateVector::new(superpose(&terms))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightCheck {
    pub satisfied: bool,
    pub residual_21: f64,
    pub residual_22: f64,
}

pub const WEIGHT_TOL: f64 = 1e-9;

/// `p log2 p` with the limit value 0 at p = 0.
fn p_log2_p(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        p * p.log2()
    }
}

/// Evaluates `−Σ A_i²(1 + log2 A_i²) = 1` and `−(A3² + A4²) log2(A3² + A4²) = ½`.
pub fn check_weight_conditions(w: &WeightVector) -> WeightCheck {
    let lhs_21: f64 =
        -w.0.iter()
            .map(|a| {
                let p = a * a;
                if p == 0.0 {
                    0.0
                } else {
                    p + p_log2_p(p)
                }
            })
            .sum::<f64>();
    let s = w.0[2] * w.0[2] + w.0[3] * w.0[3];
    let lhs_22 = -p_log2_p(s);
    let residual_21 = (lhs_21 - 1.0).abs();
    let residual_22 = (lhs_22 - 0.5).abs();
    WeightCheck {
        satisfied: residual_21 < WEIGHT_TOL && residual_22 < WEIGHT_TOL,
        residual_21,
        residual_22,
    }
}
