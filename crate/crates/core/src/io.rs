//! Text file format for instruments, POVMs, states and recovery families.
//!
//! Documents are JSON. A complex number is a two-element array `[re, im]`
//! and a matrix is a row-major array of rows. Floats are written with 17
//! significant digits so that a write/read cycle is bit-exact, and the layout
//! is fixed so that writing the same object twice yields identical bytes.
//!
//! ```text
//! instrument: {"d_in": int, "d_out": int, "outcomes": [{"label": str, "kraus": [matrix, ...]}, ...]}
//! state:      {"labels": [{"name": str, "dim": int}, ...], "matrix": matrix}
//! povm:       {"d": int, "elements": [{"label": str, "matrix": matrix}, ...]}
//! ```
//!
//! A recovery family uses the instrument schema with `d_in = dim Q'` and
//! `d_out = dim Q`; each outcome entry holds the recovery channel for that
//! outcome.

use std::fmt::Write as _;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::objects::{Channel, Instrument, OutcomeMap, Povm};
use crate::recovery::{RecoveryFamily, RecoveryMember};
use crate::tensor::{c, ComplexMatrix, LabeledState, Subsystem};

type MatrixDoc = Vec<Vec<[f64; 2]>>;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InstrumentDoc {
    d_in: usize,
    d_out: usize,
    outcomes: Vec<OutcomeDoc>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OutcomeDoc {
    label: String,
    kraus: Vec<MatrixDoc>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StateDoc {
    labels: Vec<Subsystem>,
    matrix: MatrixDoc,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PovmDoc {
    d: usize,
    elements: Vec<PovmElementDoc>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PovmElementDoc {
    label: String,
    matrix: MatrixDoc,
}

fn syntax_error(e: serde_json::Error) -> Error {
    Error::Parse {
        location: format!("line {}, column {}", e.line(), e.column()),
        message: e.to_string(),
    }
}

fn field_error(location: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Parse {
        location: location.into(),
        message: message.into(),
    }
}

fn invariant_error(location: &str, e: Error) -> Error {
    field_error(location, format!("invariant violated: {e}"))
}

fn matrix_from_doc(doc: &MatrixDoc, rows: usize, cols: usize, location: &str) -> Result<ComplexMatrix> {
    if doc.len() != rows {
        return Err(field_error(location, format!("expected {rows} rows, found {}", doc.len())));
    }
    for (i, row) in doc.iter().enumerate() {
        if row.len() != cols {
            return Err(field_error(
                location,
                format!("row {i} has {} entries, expected {cols}", row.len()),
            ));
        }
    }
    Ok(ComplexMatrix::from_fn(rows, cols, |i, j| c(doc[i][j][0], doc[i][j][1])))
}

fn parse_instrument_doc(text: &str) -> Result<InstrumentDoc> {
    serde_json::from_str(text).map_err(syntax_error)
}

fn kraus_lists(doc: &InstrumentDoc) -> Result<Vec<(String, Vec<ComplexMatrix>)>> {
    doc.outcomes
        .iter()
        .enumerate()
        .map(|(m, o)| {
            let kraus = o
                .kraus
                .iter()
                .enumerate()
                .map(|(k, mat)| matrix_from_doc(mat, doc.d_out, doc.d_in, &format!("outcomes[{m}].kraus[{k}]")))
                .collect::<Result<Vec<_>>>()?;
            Ok((o.label.clone(), kraus))
        })
        .collect()
}

/// Parses an instrument, checking shapes but not trace preservation.
pub fn read_instrument_unvalidated(text: &str) -> Result<Instrument> {
    let doc = parse_instrument_doc(text)?;
    let outcomes = kraus_lists(&doc)?
        .into_iter()
        .map(|(l, k)| OutcomeMap::new(l, k))
        .collect();
    Instrument::new(doc.d_in, doc.d_out, outcomes).map_err(|e| invariant_error("instrument", e))
}

/// Parses an instrument and checks every instrument invariant.
pub fn read_instrument(text: &str) -> Result<Instrument> {
    let instr = read_instrument_unvalidated(text)?;
    let report = instr.validate();
    if !report.passed {
        return Err(field_error("instrument", format!("invariant violated: {}", report.failures().join("; "))));
    }
    Ok(instr)
}

pub fn read_state(text: &str) -> Result<LabeledState> {
    let doc: StateDoc = serde_json::from_str(text).map_err(syntax_error)?;
    let dim: usize = doc.labels.iter().map(|l| l.dim).product();
    let m = matrix_from_doc(&doc.matrix, dim, dim, "matrix")?;
    LabeledState::new(doc.labels, m).map_err(|e| invariant_error("state", e))
}

pub fn read_povm(text: &str) -> Result<Povm> {
    let doc: PovmDoc = serde_json::from_str(text).map_err(syntax_error)?;
    let elements = doc
        .elements
        .iter()
        .enumerate()
        .map(|(i, e)| Ok((e.label.clone(), matrix_from_doc(&e.matrix, doc.d, doc.d, &format!("elements[{i}]"))?)))
        .collect::<Result<Vec<_>>>()?;
    Povm::new(doc.d, elements).map_err(|e| invariant_error("povm", e))
}

pub fn read_recovery_family(text: &str) -> Result<RecoveryFamily> {
    let doc = parse_instrument_doc(text)?;
    let members = kraus_lists(&doc)?
        .into_iter()
        .enumerate()
        .map(|(m, (label, kraus))| {
            let channel = Channel::new(doc.d_in, doc.d_out, kraus)
                .map_err(|e| invariant_error(&format!("outcomes[{m}]"), e))?;
            Ok(RecoveryMember {
                label,
                channel,
                completed: false,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RecoveryFamily::new(members))
}

fn fmt_f64(x: f64) -> String {
    // 17 significant digits; `-0` is normalized so canonical output is stable.
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

fn fmt_str(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

fn write_matrix(out: &mut String, m: &ComplexMatrix, indent: usize) {
    let pad = " ".repeat(indent);
    out.push_str("[\n");
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols())
            .map(|j| format!("[{}, {}]", fmt_f64(m[(i, j)].re), fmt_f64(m[(i, j)].im)))
            .collect();
        let sep = if i + 1 < m.nrows() { "," } else { "" };
        let _ = writeln!(out, "{pad}  [{}]{sep}", row.join(", "));
    }
    let _ = write!(out, "{pad}]");
}

fn write_outcomes<'a>(out: &mut String, outcomes: impl ExactSizeIterator<Item = (&'a str, &'a [ComplexMatrix])>) {
    out.push_str("  \"outcomes\": [\n");
    let n = outcomes.len();
    for (m, (label, kraus)) in outcomes.enumerate() {
        out.push_str("    {\n");
        let _ = writeln!(out, "      \"label\": {},", fmt_str(label));
        out.push_str("      \"kraus\": [\n");
        for (k, e) in kraus.iter().enumerate() {
            out.push_str("        ");
            write_matrix(out, e, 8);
            out.push_str(if k + 1 < kraus.len() { ",\n" } else { "\n" });
        }
        out.push_str("      ]\n");
        out.push_str(if m + 1 < n { "    },\n" } else { "    }\n" });
    }
    out.push_str("  ]\n");
}

pub fn write_instrument(instr: &Instrument) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{{\n  \"d_in\": {},\n  \"d_out\": {},", instr.d_in(), instr.d_out());
    write_outcomes(
        &mut out,
        instr.outcomes().iter().map(|o| (o.label.as_str(), o.kraus.as_slice())),
    );
    out.push_str("}\n");
    out
}

pub fn write_recovery_family(family: &RecoveryFamily) -> String {
    let (d_in, d_out) = family
        .members()
        .first()
        .map(|m| (m.channel.d_in(), m.channel.d_out()))
        .unwrap_or((1, 1));
    let mut out = String::new();
    let _ = writeln!(out, "{{\n  \"d_in\": {d_in},\n  \"d_out\": {d_out},");
    write_outcomes(
        &mut out,
        family.members().iter().map(|m| (m.label.as_str(), m.channel.kraus())),
    );
    out.push_str("}\n");
    out
}

pub fn write_state(state: &LabeledState) -> String {
    let mut out = String::from("{\n  \"labels\": [");
    let labels: Vec<String> = state
        .labels()
        .iter()
        .map(|l| format!("{{\"name\": {}, \"dim\": {}}}", fmt_str(&l.name), l.dim))
        .collect();
    out.push_str(&labels.join(", "));
    out.push_str("],\n  \"matrix\": ");
    write_matrix(&mut out, state.matrix(), 2);
    out.push_str("\n}\n");
    out
}

pub fn write_povm(povm: &Povm) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{{\n  \"d\": {},\n  \"elements\": [", povm.dim());
    let n = povm.len();
    for (i, (label, m)) in povm.elements().iter().enumerate() {
        let _ = write!(out, "    {{\n      \"label\": {},\n      \"matrix\": ", fmt_str(label));
        write_matrix(&mut out, m, 6);
        out.push_str(if i + 1 < n { "\n    },\n" } else { "\n    }\n" });
    }
    out.push_str("  ]\n}\n");
    out
}

/// Objects with a file representation.
pub trait Document: Sized {
    fn to_document(&self) -> String;
    fn from_document(text: &str) -> Result<Self>;
}

impl Document for Instrument {
    fn to_document(&self) -> String {
        write_instrument(self)
    }
    fn from_document(text: &str) -> Result<Self> {
        read_instrument(text)
    }
}

impl Document for LabeledState {
    fn to_document(&self) -> String {
        write_state(self)
    }
    fn from_document(text: &str) -> Result<Self> {
        read_state(text)
    }
}

impl Document for Povm {
    fn to_document(&self) -> String {
        write_povm(self)
    }
    fn from_document(text: &str) -> Result<Self> {
        read_povm(text)
    }
}

impl Document for RecoveryFamily {
    fn to_document(&self) -> String {
        write_recovery_family(self)
    }
    fn from_document(text: &str) -> Result<Self> {
        read_recovery_family(text)
    }
}

pub fn serialize<T: Document>(obj: &T) -> Vec<u8> {
    obj.to_document().into_bytes()
}

pub fn deserialize<T: Document>(bytes: &[u8]) -> Result<T> {
    let text = std::str::from_utf8(bytes).map_err(|e| field_error("document", format!("not UTF-8: {e}")))?;
    T::from_document(text)
}
