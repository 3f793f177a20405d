//! Text formats: two-column CSV traces, the mode, stage and summary tables and chain JSON.
//!
//! Numbers are written with Rust's shortest round-trip formatting, so every
//! emitted CSV reads back bit-for-bit.

mod tables;

use thiserror::Error;

use crate::budget::{BudgetError, EfficiencyChain};
use crate::dynamics::{DecayTrace, DynamicsError, Irf};
use crate::spectra::{EnergyGrid, Normalization, Spectrum, SpectrumError};

pub use tables::{
    parse_mode_table, parse_stage_table, parse_summary_table, PerPath, ModeTableRow, StageTable, StageRow, SummaryTable, EXTRACTION,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormatError {
    #[error("input is empty")]
    Empty,
    #[error("expected header '{expected}', found '{found}'")]
    Header { expected: String, found: String },
    #[error("line {line}: {message}")]
    Row { line: usize, message: String },
    #[error("no data rows")]
    NoRows,
    #[error("json: {0}")]
    Json(String),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Budget(#[from] BudgetError),
}

pub const SPECTRUM_HEADER: [&str; 2] = ["energy_ueV", "value"];
pub const DECAY_HEADER: [&str; 2] = ["time_ps", "counts"];
pub const G2_HEADER: [&str; 2] = ["tau_ps", "g2"];
pub const SATURATION_HEADER: [&str; 2] = ["power_uW", "counts_per_s"];

pub(crate) fn reader(text: &str) -> Result<csv::Reader<&[u8]>, FormatError> {
    if text.trim().is_empty() {
        return Err(FormatError::Empty);
    }
    Ok(csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes()))
}

pub(crate) fn row_error(e: csv::Error) -> FormatError {
    let line = e.position().map_or(0, |p| p.line() as usize);
    FormatError::Row { line, message: e.to_string() }
}

pub(crate) fn parse_f64(field: &str, line: usize, column: &str) -> Result<f64, FormatError> {
    field.parse::<f64>().map_err(|_| FormatError::Row {
        line,
        message: format!("column {column}: '{field}' is not a number"),
    })
}

/// Reads numeric columns under exactly the given header.
pub fn read_columns(text: &str, header: &[&str]) -> Result<Vec<Vec<f64>>, FormatError> {
    let mut rdr = reader(text)?;
    let found = rdr.headers().map_err(row_error)?.clone();
    if found.len() != header.len() || found.iter().zip(header).any(|(a, b)| a != *b) {
        return Err(FormatError::Header {
            expected: header.join(","),
            found: found.iter().collect::<Vec<_>>().join(","),
        });
    }
    let mut cols = vec![Vec::new(); header.len()];
    for rec in rdr.records() {
        let rec = rec.map_err(row_error)?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        for (j, field) in rec.iter().enumerate() {
            cols[j].push(parse_f64(field, line, header[j])?);
        }
    }
    if cols[0].is_empty() {
        return Err(FormatError::NoRows);
    }
    Ok(cols)
}

/// CSV text with one header line and one row per index.
pub fn format_columns(header: &[&str], cols: &[&[f64]]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    let n = cols.first().map_or(0, |c| c.len());
    for i in 0..n {
        let row: Vec<String> = cols.iter().map(|c| format!("{:?}", c[i])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn two(text: &str, header: [&str; 2]) -> Result<(Vec<f64>, Vec<f64>), FormatError> {
    let mut c = read_columns(text, &header)?;
    let y = c.pop().unwrap_or_default();
    let x = c.pop().unwrap_or_default();
    Ok((x, y))
}

/// `energy_ueV,value` on a uniform ascending grid.
pub fn read_spectrum(text: &str, norm: Normalization) -> Result<Spectrum, FormatError> {
    let (e, v) = two(text, SPECTRUM_HEADER)?;
    let grid = EnergyGrid::from_energies(&e)?;
    Ok(Spectrum::new(grid, v, norm)?)
}

pub fn format_spectrum(s: &Spectrum) -> String {
    format_columns(&SPECTRUM_HEADER, &[&s.energies(), s.values()])
}

/// `time_ps,counts` on a uniform grid.
pub fn read_decay(text: &str, irf: Irf) -> Result<DecayTrace, FormatError> {
    let (t, c) = two(text, DECAY_HEADER)?;
    Ok(DecayTrace::from_samples(&t, c, irf)?)
}

pub fn format_decay(t: &DecayTrace) -> String {
    format_columns(&DECAY_HEADER, &[&t.times(), t.counts()])
}

/// `tau_ps,g2`.
pub fn read_g2(text: &str) -> Result<(Vec<f64>, Vec<f64>), FormatError> {
    two(text, G2_HEADER)
}

pub fn format_g2(tau_ps: &[f64], g2: &[f64]) -> String {
    format_columns(&G2_HEADER, &[tau_ps, g2])
}

/// `power_uW,counts_per_s`.
pub fn read_saturation(text: &str) -> Result<(Vec<f64>, Vec<f64>), FormatError> {
    two(text, SATURATION_HEADER)
}

pub fn format_saturation(powers_uw: &[f64], counts: &[f64]) -> String {
    format_columns(&SATURATION_HEADER, &[powers_uw, counts])
}

/// `{"path": "...", "stages": [{"name": "...", "eff": ...}]}`.
pub fn parse_chain_json(text: &str) -> Result<EfficiencyChain, FormatError> {
    if text.trim().is_empty() {
        return Err(FormatError::Empty);
    }
    let c: EfficiencyChain = serde_json::from_str(text).map_err(|e| FormatError::Json(e.to_string()))?;
    c.validate()?;
    Ok(c)
}
