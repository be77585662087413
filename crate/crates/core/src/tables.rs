//! Transcribed measurement tables and a small ket-expression language.
//!
//! Expressions are sums of terms. A term is an optional sign, an optional
//! amplitude symbol (`alpha`, `beta`, `gamma`, `mu`) and one or more
//! juxtaposed factors, each a ket or a parenthesized expression. Kets are
//! bit strings `|010>`, Bell labels `|phi->` and the three-qubit states
//! `|O1>`..`|O4>`. Juxtaposition is the tensor product, first factor most
//! significant. Printed prefactors are omitted; vectors are normalized where
//! they are used.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::brown::{bell_state, omega_basis, BellKind};
use crate::error::{Error, Result};
use crate::qsim::state::kron;
use crate::qsim::CMatrix;

/// Amplitude symbols of an unknown secret.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coef {
    One,
    Alpha,
    Beta,
    Gamma,
    Mu,
}

impl Coef {
    /// Index of the secret basis ket the symbol multiplies.
    ///
    /// One qubit: alpha|0> + beta|1>. Two qubits: alpha|00> + gamma|01> +
    /// mu|10> + beta|11>.
    pub fn secret_index(self, secret_qubits: usize) -> Option<usize> {
        match (secret_qubits, self) {
            (1, Coef::Alpha) => Some(0),
            (1, Coef::Beta) => Some(1),
            (2, Coef::Alpha) => Some(0),
            (2, Coef::Gamma) => Some(1),
            (2, Coef::Mu) => Some(2),
            (2, Coef::Beta) => Some(3),
            _ => None,
        }
    }
}

/// A vector-valued linear form in the amplitude symbols.
#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    n_qubits: usize,
    parts: BTreeMap<Coef, Vec<C64>>,
}

impl Expr {
    fn constant(v: Vec<C64>) -> Self {
        let n_qubits = v.len().trailing_zeros() as usize;
        Expr {
            n_qubits,
            parts: BTreeMap::from([(Coef::One, v)]),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn is_constant(&self) -> bool {
        self.parts.keys().all(|c| *c == Coef::One)
    }

    /// The vector multiplying `coef`, zero if absent.
    pub fn part(&self, coef: Coef) -> Vec<C64> {
        self.parts
            .get(&coef)
            .cloned()
            .unwrap_or_else(|| vec![C64::new(0.0, 0.0); 1 << self.n_qubits])
    }

    /// The coefficient-free vector; fails if any symbol appears.
    pub fn vector(&self) -> Result<Vec<C64>> {
        if !self.is_constant() {
            return Err(Error::Parse("expression depends on secret amplitudes".into()));
        }
        Ok(self.part(Coef::One))
    }

    /// Columns are the images of the secret basis kets.
    pub fn residue_map(&self, secret_qubits: usize) -> Result<CMatrix> {
        let d = 1usize << self.n_qubits;
        let mut m = CMatrix::zeros(d, 1 << secret_qubits);
        for (coef, v) in &self.parts {
            let col = coef.secret_index(secret_qubits).ok_or_else(|| {
                Error::Parse(format!(
                    "symbol {coef:?} is not an amplitude of a {secret_qubits}-qubit secret"
                ))
            })?;
            for (r, a) in v.iter().enumerate() {
                m[(r, col)] += *a;
            }
        }
        Ok(m)
    }

    fn add(mut self, other: Expr, sign: f64) -> Result<Expr> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::Parse(format!(
                "adding {}-qubit and {}-qubit terms",
                self.n_qubits, other.n_qubits
            )));
        }
        for (c, v) in other.parts {
            let slot = self.parts.entry(c).or_insert_with(|| vec![C64::new(0.0, 0.0); v.len()]);
            for (s, x) in slot.iter_mut().zip(v) {
                *s += x * sign;
            }
        }
        Ok(self)
    }

    fn tensor(self, other: Expr) -> Result<Expr> {
        if !self.is_constant() && !other.is_constant() {
            return Err(Error::Parse("product of two symbolic factors".into()));
        }
        let mut parts = BTreeMap::new();
        for (ca, a) in &self.parts {
            for (cb, b) in &other.parts {
                let c = if *ca == Coef::One { *cb } else { *ca };
                parts.insert(c, kron(a, b));
            }
        }
        Ok(Expr {
            n_qubits: self.n_qubits + other.n_qubits,
            parts,
        })
    }

    fn scaled(self, coef: Coef, sign: f64) -> Result<Expr> {
        if coef != Coef::One && !self.is_constant() {
            return Err(Error::Parse("symbol applied to a symbolic factor".into()));
        }
        let parts = self
            .parts
            .into_iter()
            .map(|(c, v)| {
                let c = if coef == Coef::One { c } else { coef };
                (c, v.into_iter().map(|x| x * sign).collect())
            })
            .collect();
        Ok(Expr {
            n_qubits: self.n_qubits,
            parts,
        })
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse(format!("{msg} at byte {} of {:?}", self.pos, self.src))
    }

    fn skip_ws(&mut self) {
        while self.rest().starts_with(char::is_whitespace) {
            self.pos += self.rest().chars().next().map_or(0, char::len_utf8);
        }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn eat(&mut self, s: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(s) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    fn sign(&mut self) -> Option<f64> {
        if self.eat("+") {
            Some(1.0)
        } else if self.eat("-") || self.eat("−") {
            Some(-1.0)
        } else {
            None
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let first_sign = self.sign().unwrap_or(1.0);
        let mut acc = self.term()?.scaled(Coef::One, first_sign)?;
        while let Some(s) = self.sign() {
            let t = self.term()?;
            acc = acc.add(t, s)?;
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Expr> {
        self.skip_ws();
        let mut coef = Coef::One;
        for (name, c) in [
            ("alpha", Coef::Alpha),
            ("beta", Coef::Beta),
            ("gamma", Coef::Gamma),
            ("mu", Coef::Mu),
        ] {
            if self.rest().starts_with(name) {
                self.pos += name.len();
                coef = c;
                break;
            }
        }
        let mut acc = self.factor()?;
        loop {
            self.skip_ws();
            if self.rest().starts_with('|') || self.rest().starts_with('(') {
                acc = acc.tensor(self.factor()?)?;
            } else {
                break;
            }
        }
        acc.scaled(coef, 1.0)
    }

    fn factor(&mut self) -> Result<Expr> {
        if self.eat("(") {
            let e = self.expr()?;
            if !self.eat(")") {
                return Err(self.err("expected ')'"));
            }
            return Ok(e);
        }
        if !self.eat("|") {
            return Err(self.err("expected ket or '('"));
        }
        let end = self.rest().find('>').ok_or_else(|| self.err("unterminated ket"))?;
        let name = &self.rest()[..end];
        let v = ket_vector(name).ok_or_else(|| self.err(&format!("unknown ket |{name}>")))?;
        self.pos += end + 1;
        Ok(Expr::constant(v))
    }
}

fn ket_vector(name: &str) -> Option<Vec<C64>> {
    if !name.is_empty() && name.chars().all(|c| c == '0' || c == '1') {
        let n = name.len();
        let mut v = vec![C64::new(0.0, 0.0); 1 << n];
        v[usize::from_str_radix(name, 2).ok()?] = C64::new(1.0, 0.0);
        return Some(v);
    }
    if let Ok(b) = BellKind::parse(name) {
        return Some(bell_state(b).into_amplitudes());
    }
    let idx = match name {
        "O1" => 0,
        "O2" => 1,
        "O3" => 2,
        "O4" => 3,
        _ => return None,
    };
    Some(omega_basis().get(idx).amplitudes().to_vec())
}

pub fn parse_expr(src: &str) -> Result<Expr> {
    let mut p = Parser { src, pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != src.len() {
        return Err(p.err("trailing input"));
    }
    Ok(e)
}

/// Parses `+|11><psi+| -|00><phi-| ...` into a matrix.
pub fn parse_outer_products(src: &str) -> Result<CMatrix> {
    let mut p = Parser { src, pos: 0 };
    let mut m: Option<CMatrix> = None;
    loop {
        p.skip_ws();
        if p.pos == src.len() {
            break;
        }
        let sign = p.sign().unwrap_or(1.0);
        let ket = p.factor()?.vector()?;
        if !p.eat("<") {
            return Err(p.err("expected bra"));
        }
        let end = p.rest().find('|').ok_or_else(|| p.err("unterminated bra"))?;
        let name = &p.rest()[..end];
        let bra = ket_vector(name).ok_or_else(|| p.err(&format!("unknown bra <{name}|")))?;
        p.pos += end + 1;
        let acc = m.get_or_insert_with(|| CMatrix::zeros(ket.len(), bra.len()));
        if acc.nrows() != ket.len() || acc.ncols() != bra.len() {
            return Err(p.err("outer products of different shapes"));
        }
        for (r, k) in ket.iter().enumerate() {
            for (c, b) in bra.iter().enumerate() {
                acc[(r, c)] += k * b.conj() * sign;
            }
        }
    }
    m.ok_or_else(|| Error::Parse("empty operator".into()))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TableEntry {
    pub label: String,
    pub basis: String,
    pub residue: String,
    #[serde(default)]
    pub correction: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecompositionTable {
    pub title: String,
    pub secret_qubits: usize,
    #[serde(default)]
    pub prefactor: Option<String>,
    pub entries: Vec<TableEntry>,
    #[serde(default)]
    pub correction_set: Option<String>,
}

impl DecompositionTable {
    /// Residue map of every entry, in entry order.
    pub fn residue_maps(&self) -> Result<Vec<CMatrix>> {
        self.entries
            .iter()
            .map(|e| parse_expr(&e.residue)?.residue_map(self.secret_qubits))
            .collect()
    }

    pub fn labels(&self) -> Vec<String> {
        self.entries.iter().map(|e| e.label.clone()).collect()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AfterBell {
    pub title: String,
    pub alice_outcome: BellKind,
    pub state: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Conversion {
    pub from: String,
    pub to: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OmegaTranscript {
    pub prefactor: String,
    pub states: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CharlieExample {
    pub alice_label: String,
    pub states: BTreeMap<String, String>,
    pub operators: BTreeMap<String, String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DenseEntry {
    pub triple: String,
    pub state: String,
    #[serde(default)]
    pub note: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DenseTable {
    pub title: String,
    pub prefactor: String,
    pub entries: Vec<DenseEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Transcribed {
    pub version: u32,
    pub teleport_one: DecompositionTable,
    pub sharing_after_bell: AfterBell,
    pub sharing_bob_basis: DecompositionTable,
    pub sharing_alice_basis: DecompositionTable,
    pub ghz_conversion: Conversion,
    pub teleport_two: DecompositionTable,
    pub sharing_two: DecompositionTable,
    pub omega: OmegaTranscript,
    pub charlie_example: CharlieExample,
    pub dense: DenseTable,
}

const TRANSCRIBED_JSON: &str = include_str!("../data/transcribed.json");

pub fn transcribed() -> &'static Transcribed {
    static DATA: OnceLock<Transcribed> = OnceLock::new();
    DATA.get_or_init(|| serde_json::from_str(TRANSCRIBED_JSON).expect("bundled table data parses"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(v: &[C64]) -> Vec<f64> {
        v.iter().map(|z| z.re).collect()
    }

    #[test]
    fn kets_and_sums() {
        let e = parse_expr("|01> - |10>").unwrap();
        assert_eq!(re(&e.vector().unwrap()), vec![0.0, 1.0, -1.0, 0.0]);
        let e = parse_expr("-(|0>+|1>)").unwrap();
        assert_eq!(re(&e.vector().unwrap()), vec![-1.0, -1.0]);
    }

    #[test]
    fn juxtaposition_is_tensor() {
        let e = parse_expr("|1>|psi+>").unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v = re(&e.vector().unwrap());
        assert_eq!(v.len(), 8);
        assert!((v[4] - h).abs() < 1e-15 && (v[7] - h).abs() < 1e-15);
    }

    #[test]
    fn symbols_become_columns() {
        let e = parse_expr("alpha|1>+beta|0>").unwrap();
        let m = e.residue_map(1).unwrap();
        assert_eq!(m[(1, 0)], C64::new(1.0, 0.0));
        assert_eq!(m[(0, 1)], C64::new(1.0, 0.0));
        let e = parse_expr("alpha|01>+gamma|00>-mu|11>").unwrap();
        let m = e.residue_map(2).unwrap();
        assert_eq!(m[(1, 0)], C64::new(1.0, 0.0));
        assert_eq!(m[(0, 1)], C64::new(1.0, 0.0));
        assert_eq!(m[(3, 2)], C64::new(-1.0, 0.0));
        assert!(e.residue_map(1).is_err());
    }

    #[test]
    fn distributes_symbol_over_group() {
        let e = parse_expr("alpha(|0>-|1>)-beta(|0>+|1>)").unwrap();
        assert_eq!(re(&e.part(Coef::Alpha)), vec![1.0, -1.0]);
        assert_eq!(re(&e.part(Coef::Beta)), vec![-1.0, -1.0]);
    }

    #[test]
    fn rejects_malformed() {
        assert!(parse_expr("|01> + |1>").is_err());
        assert!(parse_expr("|0x>").is_err());
        assert!(parse_expr("(|0>").is_err());
        assert!(parse_expr("alpha|0> beta").is_err());
        assert!(parse_expr("(alpha|0>)(beta|1>)").is_err());
    }

    #[test]
    fn outer_products() {
        let m = parse_outer_products("+|1><0| +|0><1|").unwrap();
        assert_eq!(m[(0, 1)], C64::new(1.0, 0.0));
        assert_eq!(m[(1, 0)], C64::new(1.0, 0.0));
        assert!(parse_outer_products("").is_err());
    }

    #[test]
    fn bundled_data_loads_and_parses() {
        let t = transcribed();
        assert_eq!(t.version, 1);
        assert_eq!(t.teleport_one.entries.len(), 4);
        assert_eq!(t.sharing_bob_basis.entries.len(), 4);
        assert_eq!(t.sharing_alice_basis.entries.len(), 8);
        assert_eq!(t.teleport_two.entries.len(), 16);
        assert_eq!(t.sharing_two.entries.len(), 16);
        assert_eq!(t.dense.entries.len(), 32);
        for table in [
            &t.teleport_one,
            &t.sharing_bob_basis,
            &t.sharing_alice_basis,
            &t.teleport_two,
            &t.sharing_two,
        ] {
            for e in &table.entries {
                parse_expr(&e.basis).unwrap().vector().unwrap();
                parse_expr(&e.residue)
                    .unwrap()
                    .residue_map(table.secret_qubits)
                    .unwrap();
            }
        }
        for e in &t.dense.entries {
            assert_eq!(parse_expr(&e.state).unwrap().n_qubits(), 5);
        }
    }
}
