use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::state::CMatrix;
use crate::error::{Error, Result};

/// Single-qubit correction operators `1, σ1, iσ2, σ3`.
///
/// `Y` is the real matrix `iσ2 = [[0, 1], [-1, 0]]`, not the Hermitian Pauli-Y.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PauliLabel {
    I,
    X,
    #[serde(rename = "iY")]
    Y,
    Z,
}

impl PauliLabel {
    pub const ALL: [PauliLabel; 4] = [PauliLabel::I, PauliLabel::X, PauliLabel::Y, PauliLabel::Z];

    pub fn real_matrix(self) -> [[f64; 2]; 2] {
        match self {
            PauliLabel::I => [[1.0, 0.0], [0.0, 1.0]],
            PauliLabel::X => [[0.0, 1.0], [1.0, 0.0]],
            PauliLabel::Y => [[0.0, 1.0], [-1.0, 0.0]],
            PauliLabel::Z => [[1.0, 0.0], [0.0, -1.0]],
        }
    }

    pub fn matrix(self) -> CMatrix {
        let m = self.real_matrix();
        CMatrix::from_fn(2, 2, |r, c| C64::new(m[r][c], 0.0))
    }

    pub fn symbol(self) -> &'static str {
        match self {
            PauliLabel::I => "I",
            PauliLabel::X => "X",
            PauliLabel::Y => "iY",
            PauliLabel::Z => "Z",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "I" | "1" => Ok(PauliLabel::I),
            "X" | "sigma1" | "σ1" => Ok(PauliLabel::X),
            "iY" | "Y" | "isigma2" | "iσ2" => Ok(PauliLabel::Y),
            "Z" | "sigma3" | "σ3" => Ok(PauliLabel::Z),
            other => Err(Error::Parse(format!("unknown Pauli label {other:?}"))),
        }
    }
}

impl std::fmt::Display for PauliLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Tensor product of the labels, first label acting on the most significant qubit.
pub fn product_matrix(labels: &[PauliLabel]) -> CMatrix {
    labels
        .iter()
        .fold(CMatrix::from_element(1, 1, C64::new(1.0, 0.0)), |acc, p| {
            acc.kronecker(&p.matrix())
        })
}

/// All `4^m` label strings, lexicographic in `PauliLabel::ALL` order.
pub fn all_products(m: usize) -> Vec<Vec<PauliLabel>> {
    (0..4usize.pow(m as u32))
        .map(|mut code| {
            let mut labels = vec![PauliLabel::I; m];
            for slot in labels.iter_mut().rev() {
                *slot = PauliLabel::ALL[code % 4];
                code /= 4;
            }
            labels
        })
        .collect()
}

/// Parses a whitespace/comma/⊗-separated label string such as `"I X"`.
pub fn parse_product(s: &str) -> Result<Vec<PauliLabel>> {
    s.split(|c: char| c.is_whitespace() || c == ',' || c == '⊗')
        .filter(|t| !t.is_empty())
        .map(PauliLabel::parse)
        .collect()
}

pub fn product_symbol(labels: &[PauliLabel]) -> String {
    labels.iter().map(|p| p.symbol()).collect::<Vec<_>>().join("⊗")
}
