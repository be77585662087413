use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered list of distinct 1-based qubit labels.
///
/// Label 1 is the leftmost ket symbol and the most significant bit of an
/// amplitude index. The order of the labels fixes how the subset register is
/// indexed: the first label is the most significant bit of a sub-index.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct QubitSubset(Vec<usize>);

impl QubitSubset {
    pub fn new(labels: impl Into<Vec<usize>>) -> Result<Self> {
        let labels = labels.into();
        let mut seen = std::collections::BTreeSet::new();
        for &q in &labels {
            if q == 0 {
                return Err(Error::QubitOutOfRange {
                    label: 0,
                    n_qubits: usize::MAX,
                });
            }
            if !seen.insert(q) {
                return Err(Error::DuplicateQubit { label: q });
            }
        }
        Ok(QubitSubset(labels))
    }

    /// Contiguous labels `first..=last`.
    pub fn span(first: usize, last: usize) -> Self {
        assert!(first >= 1 && first <= last + 1, "invalid span {first}..={last}");
        QubitSubset((first..=last).collect())
    }

    pub fn labels(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, label: usize) -> bool {
        self.0.contains(&label)
    }

    pub fn is_subset_of(&self, other: &QubitSubset) -> bool {
        self.0.iter().all(|q| other.contains(*q))
    }

    pub fn is_disjoint(&self, other: &QubitSubset) -> bool {
        self.0.iter().all(|q| !other.contains(*q))
    }

    pub fn check_within(&self, n_qubits: usize) -> Result<()> {
        match self.0.iter().find(|&&q| q > n_qubits) {
            Some(&label) => Err(Error::QubitOutOfRange { label, n_qubits }),
            None => Ok(()),
        }
    }

    /// Labels of `1..=n_qubits` not in this subset, ascending.
    pub fn complement(&self, n_qubits: usize) -> QubitSubset {
        QubitSubset((1..=n_qubits).filter(|q| !self.contains(*q)).collect())
    }

    pub fn sorted(&self) -> QubitSubset {
        let mut v = self.0.clone();
        v.sort_unstable();
        QubitSubset(v)
    }
}

impl TryFrom<Vec<usize>> for QubitSubset {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        QubitSubset::new(v)
    }
}

impl From<QubitSubset> for Vec<usize> {
    fn from(s: QubitSubset) -> Self {
        s.0
    }
}

impl std::fmt::Display for QubitSubset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|q| q.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// Bit shifts of a subset inside an `n_qubits` register.
#[derive(Clone, Debug)]
pub(crate) struct Layout {
    shifts: Vec<u32>,
    mask: usize,
}

impl Layout {
    pub(crate) fn new(n_qubits: usize, subset: &QubitSubset) -> Result<Self> {
        subset.check_within(n_qubits)?;
        let shifts: Vec<u32> = subset.labels().iter().map(|&q| (n_qubits - q) as u32).collect();
        let mask = shifts.iter().fold(0usize, |m, &s| m | (1 << s));
        Ok(Layout { shifts, mask })
    }

    pub(crate) fn width(&self) -> usize {
        self.shifts.len()
    }

    pub(crate) fn mask(&self) -> usize {
        self.mask
    }

    /// Sub-index of the subset bits of `full`, first label most significant.
    pub(crate) fn extract(&self, full: usize) -> usize {
        let k = self.shifts.len();
        self.shifts
            .iter()
            .enumerate()
            .fold(0, |acc, (j, &s)| acc | (((full >> s) & 1) << (k - 1 - j)))
    }

    /// Places the bits of `sub` at the subset positions (other bits zero).
    pub(crate) fn deposit(&self, sub: usize) -> usize {
        let k = self.shifts.len();
        self.shifts
            .iter()
            .enumerate()
            .fold(0, |acc, (j, &s)| acc | (((sub >> (k - 1 - j)) & 1) << s))
    }
}
