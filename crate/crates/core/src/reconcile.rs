//! Entry-by-entry comparison of the transcribed tables with the derived
//! vectors, residues, corrections and codewords.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::brown::{bell_state, brown_state, omega_basis, BellKind};
use crate::dense::{code_table, TRIPLES};
use crate::error::Result;
use crate::oracle::{
    basis_to_basis, best_pauli, isometry_deviation, map_overlap, normalize_map, render_vector, residue_map,
    secret_sources, vector_overlap,
};
use crate::qsim::pauli::{parse_product, product_symbol};
use crate::qsim::state::{inner, norm_sqr};
use crate::qsim::{CMatrix, MeasurementBasis, PauliLabel, QubitSubset};
use crate::sharing::{p1_bob_basis, p2_alice_basis, plus_minus_basis, two_qubit_basis, two_qubit_charlie_unitaries};
use crate::tables::{parse_expr, parse_outer_products, transcribed, DecompositionTable};
use crate::teleport::{derive_two_qubit_basis, one_qubit_basis, one_qubit_rule};

/// Overlaps at or above this count as the same ray.
pub const MATCH_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub table: String,
    pub entry: String,
    pub field: String,
    pub matches: bool,
    /// Normalized overlap of the printed and derived objects, one for a match.
    pub overlap: f64,
    /// Largest amplitude difference after normalizing and aligning phases.
    pub amplitude_diff: f64,
    pub printed: String,
    /// The derived form, given for every mismatch.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub canonical: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ledger {
    pub verdicts: Vec<Verdict>,
    pub entries: usize,
    pub mismatches: usize,
}

impl Ledger {
    pub fn mismatched(&self) -> impl Iterator<Item = &Verdict> {
        self.verdicts.iter().filter(|v| !v.matches)
    }

    pub fn find(&self, table: &str, entry: &str, field: &str) -> Option<&Verdict> {
        self.verdicts
            .iter()
            .find(|v| v.table == table && v.entry == entry && v.field == field)
    }
}

fn aligned_diff(a: &[C64], b: &[C64]) -> f64 {
    let na = norm_sqr(a).sqrt();
    let nb = norm_sqr(b).sqrt();
    if a.len() != b.len() || na == 0.0 || nb == 0.0 {
        return f64::INFINITY;
    }
    let ip = inner(b, a);
    let phase = if ip.norm() > 0.0 {
        ip / ip.norm()
    } else {
        C64::new(1.0, 0.0)
    };
    a.iter()
        .zip(b)
        .map(|(x, y)| (x / na - phase * y / nb).norm())
        .fold(0.0, f64::max)
}

fn flat(m: &CMatrix) -> Vec<C64> {
    m.iter().copied().collect()
}

struct Builder {
    table: &'static str,
    out: Vec<Verdict>,
}

impl Builder {
    fn new(table: &'static str) -> Self {
        Builder { table, out: Vec::new() }
    }

    fn vector(&mut self, entry: &str, field: &str, printed_src: &str, printed: &[C64], derived: &[C64]) {
        let overlap = vector_overlap(printed, derived);
        self.push(
            entry,
            field,
            printed_src,
            overlap,
            aligned_diff(printed, derived),
            || render_vector(derived),
        );
    }

    fn map(
        &mut self,
        entry: &str,
        field: &str,
        printed_src: &str,
        printed: &CMatrix,
        derived: &CMatrix,
        render: impl FnOnce() -> String,
    ) {
        let overlap = map_overlap(printed, derived);
        let diff = if printed.shape() == derived.shape() {
            aligned_diff(&flat(printed), &flat(derived))
        } else {
            f64::INFINITY
        };
        self.push(entry, field, printed_src, overlap, diff, render);
    }

    fn exact(&mut self, entry: &str, field: &str, printed: &str, derived: &str) {
        let same = printed == derived;
        let v = if same { 1.0 } else { 0.0 };
        self.push(entry, field, printed, v, 1.0 - v, || derived.to_string());
    }

    fn push(
        &mut self,
        entry: &str,
        field: &str,
        printed: &str,
        overlap: f64,
        diff: f64,
        canonical: impl FnOnce() -> String,
    ) {
        let matches = overlap >= 1.0 - MATCH_TOL;
        self.out.push(Verdict {
            table: self.table.to_string(),
            entry: entry.to_string(),
            field: field.to_string(),
            matches,
            overlap,
            amplitude_diff: if matches { diff.min(1.0) } else { diff },
            printed: printed.to_string(),
            canonical: (!matches).then(canonical),
            note: None,
        });
    }

    fn note(&mut self, note: Option<&str>) {
        if let (Some(n), Some(last)) = (note, self.out.last_mut()) {
            last.note = Some(n.to_string());
        }
    }
}

/// Basis and residue verdicts for a decomposition table. The basis entries
/// are compared with `basis`; each printed residue must be an isometric
/// image of the secret.
fn decomposition(name: &'static str, table: &DecompositionTable, basis: &MeasurementBasis) -> Result<Vec<Verdict>> {
    let mut b = Builder::new(name);
    for (e, derived) in table.entries.iter().zip(basis.vectors()) {
        let printed = parse_expr(&e.basis)?.vector()?;
        b.vector(&e.label, "basis", &e.basis, &printed, derived.amplitudes());
        let r = parse_expr(&e.residue)?.residue_map(table.secret_qubits)?;
        let dev = isometry_deviation(&r);
        b.push(&e.label, "residue", &e.residue, 1.0 - dev, dev, || {
            "not an isometric image of the secret".into()
        });
    }
    Ok(b.out)
}

fn teleport_two_corrections() -> Result<Vec<Verdict>> {
    let table = &transcribed().teleport_two;
    let basis = derive_two_qubit_basis()?;
    let sources = secret_sources(2, &brown_state());
    let mut b = Builder::new("teleport_two");
    for (e, v) in table.entries.iter().zip(basis.vectors()) {
        let fit = best_pauli(&residue_map(&sources, basis.subset(), v)?)?;
        let printed = e.correction.clone().unwrap_or_default();
        let printed_labels = parse_product(&printed)?;
        let derived = fit.labels.iter().map(|p| p.symbol()).collect::<Vec<_>>().join(" ");
        let same = printed_labels == fit.labels;
        b.push(
            &e.label,
            "correction",
            &printed,
            if same { fit.score } else { 0.0 },
            0.0,
            || derived,
        );
    }
    Ok(b.out)
}

fn teleport_one_corrections() -> Result<Vec<Verdict>> {
    let table = &transcribed().teleport_one;
    let printed = table.correction_set.clone().unwrap_or_default();
    let mut want: Vec<PauliLabel> = parse_product(&printed)?;
    let mut shipped: Vec<PauliLabel> = one_qubit_rule().entries().iter().map(|(_, o)| o[0]).collect();
    want.sort();
    shipped.sort();
    let mut b = Builder::new("teleport_one");
    let same = want == shipped;
    b.push(
        "all",
        "correction_set",
        &printed,
        if same { 1.0 } else { 0.0 },
        0.0,
        || product_symbol(&shipped),
    );
    Ok(b.out)
}

fn after_bell() -> Result<Vec<Verdict>> {
    let t = &transcribed().sharing_after_bell;
    let printed = parse_expr(&t.state)?.residue_map(1)?;
    let bell = bell_state(t.alice_outcome);
    let derived = residue_map(&secret_sources(1, &brown_state()), &QubitSubset::span(1, 2), &bell)?;
    let mut b = Builder::new("sharing_after_bell");
    b.map(t.alice_outcome.name(), "state", &t.state, &printed, &derived, || {
        render_map(&derived)
    });
    Ok(b.out)
}

fn ghz_conversion() -> Result<Vec<Verdict>> {
    let t = &transcribed().ghz_conversion;
    let basis = p2_alice_basis()?;
    let derived = residue_map(&secret_sources(1, &brown_state()), basis.subset(), &basis.vectors()[0])?;
    let from = parse_expr(&t.from)?.residue_map(1)?;
    let to = parse_expr(&t.to)?.residue_map(1)?;
    let mut b = Builder::new("ghz_conversion");
    b.map(basis.label(0), "from", &t.from, &from, &derived, || {
        render_map(&derived)
    });
    let cols = |m: &CMatrix| -> Vec<Vec<C64>> {
        let m = normalize_map(m);
        (0..m.ncols()).map(|k| m.column(k).iter().copied().collect()).collect()
    };
    let ok = basis_to_basis(&cols(&derived), &cols(&to)).is_ok();
    b.push(basis.label(0), "to", &t.to, if ok { 1.0 } else { 0.0 }, 0.0, || {
        "no unitary reaches this form".into()
    });
    Ok(b.out)
}

fn omega() -> Result<Vec<Verdict>> {
    let t = &transcribed().omega;
    let om = omega_basis();
    let mut b = Builder::new("omega");
    for (i, s) in t.states.iter().enumerate() {
        let printed = parse_expr(s)?.vector()?;
        b.vector(&format!("O{}", i + 1), "state", s, &printed, om.get(i).amplitudes());
    }
    let norm = parse_expr(&t.states[0])?.vector()?;
    let needed = 1.0 / norm_sqr(&norm).sqrt();
    let printed = parse_fraction(&t.prefactor).unwrap_or(f64::NAN);
    let ratio = (printed / needed).min(needed / printed);
    b.push(
        "all",
        "prefactor",
        &t.prefactor,
        ratio,
        (printed - needed).abs(),
        || format!("{needed:.6}"),
    );
    Ok(b.out)
}

fn parse_fraction(s: &str) -> Option<f64> {
    let s = s.split_whitespace().next()?;
    match s.split_once('/') {
        Some((a, b)) => Some(a.trim().parse::<f64>().ok()? / b.trim().parse::<f64>().ok()?),
        None => s.parse().ok(),
    }
}

/// `Σ c |bits><bell|` rendering of a two-qubit operator.
pub fn render_bell_operator(u: &CMatrix) -> String {
    let mut parts = Vec::new();
    for r in 0..u.nrows() {
        for k in BellKind::ALL {
            let bell = bell_state(k);
            let c: C64 = (0..u.ncols()).map(|j| u[(r, j)] * bell.amplitude(j)).sum();
            if c.norm() > 1e-9 {
                let sign = if c.re >= 0.0 { "+" } else { "-" };
                let mag = if (c.norm() - 1.0).abs() < 1e-9 {
                    String::new()
                } else {
                    format!("{:.6}", c.norm())
                };
                parts.push(format!("{sign}{mag}|{r:02b}><{}|", k.name()));
            }
        }
    }
    parts.join(" ")
}

fn render_map(m: &CMatrix) -> String {
    let rn = normalize_map(m);
    (0..rn.ncols())
        .map(|k| {
            let col: Vec<C64> = rn.column(k).iter().copied().collect();
            format!("[{k}] {}", render_vector(&col))
        })
        .collect::<Vec<_>>()
        .join("; ")
}

fn charlie_example() -> Result<Vec<Verdict>> {
    let t = &transcribed().charlie_example;
    let basis = two_qubit_basis()?;
    let a = basis
        .labels()
        .iter()
        .position(|l| *l == t.alice_label)
        .ok_or_else(|| crate::Error::Parse(format!("no outcome {}", t.alice_label)))?;
    let pm = plus_minus_basis(QubitSubset::span(5, 5));
    let sources = secret_sources(2, &brown_state());
    let unitaries = two_qubit_charlie_unitaries()?;
    let mut b = Builder::new("charlie_example");
    for (bi, sign) in ["+", "-"].iter().enumerate() {
        let joint = basis.vectors()[a].tensor(&pm.vectors()[bi]);
        let derived = residue_map(&sources, &QubitSubset::span(1, 5), &joint)?;
        if let Some(s) = t.states.get(*sign) {
            let printed = parse_expr(s)?.residue_map(2)?;
            b.map(sign, "state", s, &printed, &derived, || render_map(&derived));
        }
        if let Some(s) = t.operators.get(*sign) {
            let printed = parse_outer_products(s)?;
            let u = &unitaries[2 * a + bi];
            b.map(sign, "operator", s, &printed, u, || render_bell_operator(u));
        }
    }
    Ok(b.out)
}

fn dense() -> Result<Vec<Verdict>> {
    let t = &transcribed().dense;
    let table = code_table()?;
    let mut b = Builder::new("dense");
    for (i, e) in t.entries.iter().enumerate() {
        let row = format!("{}", i + 1);
        let shipped = TRIPLES[i].iter().map(|p| p.symbol()).collect::<Vec<_>>().join(" ");
        b.exact(&row, "triple", &e.triple, &shipped);
        if e.triple != shipped {
            let dup = t
                .entries
                .iter()
                .enumerate()
                .find(|(j, o)| *j != i && o.triple == e.triple);
            let note = match dup {
                Some((j, _)) => format!(
                    "printed triple repeats row {}; the printed state implies {shipped}",
                    j + 1
                ),
                None => format!("the printed state implies {shipped}"),
            };
            b.note(Some(&note));
        }
        let printed = parse_expr(&e.state)?.vector()?;
        b.vector(
            &row,
            "state",
            &e.state,
            &printed,
            table.codes()[i].codeword.amplitudes(),
        );
        b.note(e.note.as_deref());
    }
    let first = parse_expr(&t.entries[0].state)?.vector()?;
    let needed = 1.0 / norm_sqr(&first).sqrt();
    let printed = parse_fraction(&t.prefactor).unwrap_or(f64::NAN);
    let ratio = (printed / needed).min(needed / printed);
    b.push(
        "all",
        "prefactor",
        &t.prefactor,
        ratio,
        (printed - needed).abs(),
        || format!("{needed:.6}"),
    );
    Ok(b.out)
}

/// Every verdict, table by table.
pub fn reconcile_all() -> Result<Ledger> {
    let t = transcribed();
    let mut verdicts = Vec::new();
    verdicts.extend(decomposition("teleport_one", &t.teleport_one, one_qubit_basis()?)?);
    verdicts.extend(teleport_one_corrections()?);
    verdicts.extend(after_bell()?);
    let bob = p1_bob_basis()?.with_subset(QubitSubset::span(1, 3))?;
    verdicts.extend(decomposition("sharing_bob_basis", &t.sharing_bob_basis, &bob)?);
    verdicts.extend(decomposition(
        "sharing_alice_basis",
        &t.sharing_alice_basis,
        p2_alice_basis()?,
    )?);
    verdicts.extend(ghz_conversion()?);
    verdicts.extend(decomposition(
        "teleport_two",
        &t.teleport_two,
        derive_two_qubit_basis()?,
    )?);
    verdicts.extend(teleport_two_corrections()?);
    verdicts.extend(decomposition("sharing_two", &t.sharing_two, two_qubit_basis()?)?);
    verdicts.extend(omega()?);
    verdicts.extend(charlie_example()?);
    verdicts.extend(dense()?);
    let mismatches = verdicts.iter().filter(|v| !v.matches).count();
    Ok(Ledger {
        entries: verdicts.len(),
        verdicts,
        mismatches,
    })
}

/// Basis verdicts of the two-qubit teleportation table alone.
pub fn two_qubit_basis_report() -> Result<Vec<Verdict>> {
    Ok(
        decomposition("teleport_two", &transcribed().teleport_two, derive_two_qubit_basis()?)?
            .into_iter()
            .filter(|v| v.field == "basis")
            .collect(),
    )
}
