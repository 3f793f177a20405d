//! Parsers for the cavity table (mode volume, Q, exit probabilities) and the
//! two optical-efficiency tables. Percent columns stay in percent.

use serde::{Deserialize, Serialize};

use super::{parse_f64, reader, row_error, FormatError};
use crate::budget::{EfficiencyChain, OpticalPath, Stage};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeTableRow {
    pub p: u32,
    pub v_eff_lambda3: f64,
    pub q_th: f64,
    pub q_exp: f64,
    pub p_subs_pct: f64,
    pub p_fiber_pct: f64,
}

const MODE_COLS: [&str; 6] = ["p", "v_eff_lambda3", "q_th", "q_exp", "p_subs_pct", "p_fiber_pct"];
const STAGE_COLS: [&str; 4] = ["stage", "free_space_pct", "cavity_planar_pct", "cavity_fiber_pct"];
const SUMMARY_COLS: [&str; 5] = ["row", "free_space_pct", "cavity_planar_pct", "cavity_fiber_pct", "source"];

/// Stage name of the extraction into the first lens.
pub const EXTRACTION: &str = "extraction_first_lens";

fn check_header(rdr: &mut csv::Reader<&[u8]>, expected: &[&str]) -> Result<(), FormatError> {
    let found = rdr.headers().map_err(row_error)?;
    if found.len() != expected.len() || found.iter().zip(expected).any(|(a, b)| a != *b) {
        return Err(FormatError::Header {
            expected: expected.join(","),
            found: found.iter().collect::<Vec<_>>().join(","),
        });
    }
    Ok(())
}

fn line_of(rec: &csv::StringRecord) -> usize {
    rec.position().map_or(0, |p| p.line() as usize)
}

fn opt_pct(field: &str, line: usize, column: &str) -> Result<Option<f64>, FormatError> {
    let f = field.trim();
    if f.is_empty() || f == "--" {
        return Ok(None);
    }
    let v = parse_f64(f, line, column)?;
    if !(v > 0.0 && v <= 100.0) {
        return Err(FormatError::Row {
            line,
            message: format!("column {column}: {v} outside (0, 100]"),
        });
    }
    Ok(Some(v))
}

pub fn parse_mode_table(text: &str) -> Result<Vec<ModeTableRow>, FormatError> {
    let mut rdr = reader(text)?;
    check_header(&mut rdr, &MODE_COLS)?;
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(row_error)?;
        let line = line_of(&rec);
        let p = rec[0].parse::<u32>().map_err(|_| FormatError::Row {
            line,
            message: format!("column p: '{}' is not a mode order", &rec[0]),
        })?;
        let mut v = [0.0; 5];
        for j in 0..5 {
            v[j] = parse_f64(&rec[j + 1], line, MODE_COLS[j + 1])?;
            if !(v[j] > 0.0 && v[j].is_finite()) {
                return Err(FormatError::Row {
                    line,
                    message: format!("column {}: {} must be > 0", MODE_COLS[j + 1], v[j]),
                });
            }
        }
        rows.push(ModeTableRow {
            p,
            v_eff_lambda3: v[0],
            q_th: v[1],
            q_exp: v[2],
            p_subs_pct: v[3],
            p_fiber_pct: v[4],
        });
    }
    if rows.is_empty() {
        return Err(FormatError::NoRows);
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageRow {
    pub stage: String,
    pub free_space_pct: Option<f64>,
    pub cavity_planar_pct: Option<f64>,
    pub cavity_fiber_pct: Option<f64>,
}

impl StageRow {
    pub fn pct(&self, path: OpticalPath) -> Option<f64> {
        match path {
            OpticalPath::FreeSpace => self.free_space_pct,
            OpticalPath::CavityPlanar => self.cavity_planar_pct,
            OpticalPath::CavityFiber => self.cavity_fiber_pct,
        }
    }
}

/// Per-stage transmissions of the three paths.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageTable {
    pub rows: Vec<StageRow>,
}

impl StageTable {
    /// Extraction into the first lens as a fraction.
    pub fn extraction(&self, path: OpticalPath) -> Option<f64> {
        self.rows.iter().find(|r| r.stage == EXTRACTION).and_then(|r| r.pct(path)).map(|v| v / 100.0)
    }

    /// Path-and-detector stages (everything but the extraction).
    pub fn path_chain(&self, path: OpticalPath) -> Result<EfficiencyChain, FormatError> {
        let stages = self
            .rows
            .iter()
            .filter(|r| r.stage != EXTRACTION)
            .filter_map(|r| r.pct(path).map(|v| Stage::new(r.stage.clone(), v / 100.0)))
            .collect();
        Ok(EfficiencyChain::new(path, stages)?)
    }

    /// Extraction followed by the path-and-detector stages.
    pub fn full_chain(&self, path: OpticalPath) -> Result<EfficiencyChain, FormatError> {
        let mut c = self.path_chain(path)?;
        if let Some(x) = self.extraction(path) {
            c.stages.insert(0, Stage::new(EXTRACTION, x));
        }
        Ok(c)
    }
}

pub fn parse_stage_table(text: &str) -> Result<StageTable, FormatError> {
    let mut rdr = reader(text)?;
    check_header(&mut rdr, &STAGE_COLS)?;
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(row_error)?;
        let line = line_of(&rec);
        if rec[0].is_empty() {
            return Err(FormatError::Row {
                line,
                message: "empty stage name".into(),
            });
        }
        rows.push(StageRow {
            stage: rec[0].to_string(),
            free_space_pct: opt_pct(&rec[1], line, STAGE_COLS[1])?,
            cavity_planar_pct: opt_pct(&rec[2], line, STAGE_COLS[2])?,
            cavity_fiber_pct: opt_pct(&rec[3], line, STAGE_COLS[3])?,
        });
    }
    if rows.is_empty() {
        return Err(FormatError::NoRows);
    }
    Ok(StageTable { rows })
}

/// Fractions per path, in the order free-space, cavity-planar, cavity-fiber.
pub type PerPath = [f64; 3];

fn index(path: OpticalPath) -> usize {
    match path {
        OpticalPath::FreeSpace => 0,
        OpticalPath::CavityPlanar => 1,
        OpticalPath::CavityFiber => 2,
    }
}

/// Summary table: extraction, lumped path-and-detector transmission and the
/// quoted overall efficiency, as fractions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryTable {
    pub extraction: PerPath,
    pub path_and_detector: PerPath,
    pub overall: PerPath,
}

impl SummaryTable {
    pub fn extraction(&self, path: OpticalPath) -> f64 {
        self.extraction[index(path)]
    }

    pub fn overall(&self, path: OpticalPath) -> f64 {
        self.overall[index(path)]
    }

    /// One-stage path-and-detector chain.
    pub fn path_chain(&self, path: OpticalPath) -> Result<EfficiencyChain, FormatError> {
        Ok(EfficiencyChain::new(
            path,
            vec![Stage::new("path_and_detector", self.path_and_detector[index(path)])],
        )?)
    }

    /// Extraction then path-and-detector.
    pub fn full_chain(&self, path: OpticalPath) -> Result<EfficiencyChain, FormatError> {
        Ok(self.path_chain(path)?.then(Stage::new(EXTRACTION, self.extraction(path))))
    }
}

pub fn parse_summary_table(text: &str) -> Result<SummaryTable, FormatError> {
    let mut rdr = reader(text)?;
    check_header(&mut rdr, &SUMMARY_COLS)?;
    let mut found: [Option<PerPath>; 3] = [None; 3];
    let names = [EXTRACTION, "path_and_detector", "overall"];
    for rec in rdr.records() {
        let rec = rec.map_err(row_error)?;
        let line = line_of(&rec);
        let Some(k) = names.iter().position(|n| *n == &rec[0]) else {
            return Err(FormatError::Row {
                line,
                message: format!("unexpected row '{}'", &rec[0]),
            });
        };
        let mut v = [0.0; 3];
        for j in 0..3 {
            v[j] = opt_pct(&rec[j + 1], line, SUMMARY_COLS[j + 1])?.ok_or_else(|| FormatError::Row {
                line,
                message: format!("column {} is required", SUMMARY_COLS[j + 1]),
            })? / 100.0;
        }
        found[k] = Some(v);
    }
    if found.iter().all(Option::is_none) {
        return Err(FormatError::NoRows);
    }
    let get = |k: usize| {
        found[k].ok_or_else(|| FormatError::Row {
            line: 0,
            message: format!("missing row '{}'", names[k]),
        })
    };
    Ok(SummaryTable {
        extraction: get(0)?,
        path_and_detector: get(1)?,
        overall: get(2)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn s2_blank_cells_are_absent_stages() {
        let t = parse_stage_table("stage,free_space_pct,cavity_planar_pct,cavity_fiber_pct\nextraction_first_lens,19,5.6,6\nbs,50,,\nccd,,20,40\n").unwrap();
        assert_eq!(t.extraction(OpticalPath::FreeSpace), Some(0.19));
        let c = t.path_chain(OpticalPath::FreeSpace).unwrap();
        assert_eq!(c.stages.len(), 1);
        assert_eq!(t.full_chain(OpticalPath::CavityFiber).unwrap().stages.len(), 2);
    }

    #[test]
    fn s3_requires_all_rows() {
        let head = "row,free_space_pct,cavity_planar_pct,cavity_fiber_pct,source\n";
        assert!(parse_summary_table(&format!("{head}overall,1,1,1,\n")).is_err());
        assert_eq!(parse_summary_table(head).unwrap_err(), FormatError::NoRows);
        assert!(matches!(parse_summary_table(&format!("{head}x,1,1,1,\n")), Err(FormatError::Row { .. })));
    }

    #[test]
    fn s1_rejects_bad_order() {
        let head = "p,v_eff_lambda3,q_th,q_exp,p_subs_pct,p_fiber_pct\n";
        assert!(parse_mode_table(&format!("{head}6.5,1,1,1,1,1\n")).is_err());
        assert!(parse_mode_table(&format!("{head}6,1,1,-1,1,1\n")).is_err());
        assert_eq!(parse_mode_table(&format!("{head}6,1,1,1,1,1\n")).unwrap()[0].p, 6);
    }
}
