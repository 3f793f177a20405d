//! Reference data set: the three tables shipped under `fixtures/` plus the
//! scalar measurements the budget and brightness workflows are anchored to.
//!
//! The tables are compiled in; [`FixtureSet::load_dir`] reads replacements
//! from disk with the same file names.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::io::{parse_mode_table, parse_stage_table, parse_summary_table, FormatError, ModeTableRow, StageTable, SummaryTable};

pub const MODE_TABLE: &str = include_str!("../fixtures/mode_table.csv");
pub const STAGE_TABLE: &str = include_str!("../fixtures/stage_table.csv");
pub const SUMMARY_TABLE: &str = include_str!("../fixtures/summary_table.csv");

pub const FILE_NAMES: [&str; 3] = ["mode_table.csv", "stage_table.csv", "summary_table.csv"];

/// Measured scalars quoted alongside the tables.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Measurements {
    /// CCD rate at saturation on the planar port, counts/s.
    pub ccd_rate_at_saturation: f64,
    /// Photons entering the fiber per CCD count.
    pub fiber_photons_per_ccd_count: f64,
    /// Detected fiber/planar rate ratio and its error.
    pub port_ratio: f64,
    pub port_ratio_err: f64,
    /// CCD rate at low power, counts/s, and that power in µW.
    pub ccd_rate_low_power: f64,
    pub low_power_uw: f64,
    /// Highest excitation power, µW.
    pub max_power_uw: f64,
    /// Fiber/planar exit ratio inferred from the rates.
    pub exit_ratio: f64,
    /// Quoted cryostat-optics efficiency after calibration.
    pub cryostat_quoted: f64,
    /// Cavity over free-space raw count ratio.
    pub flux_ratio: f64,
    /// Long lifetime ratio, free space over cavity.
    pub decay_ratio: f64,
    /// Free-space long lifetime, ps.
    pub tau_fs_ps: f64,
    /// Laser repetition rate, Hz.
    pub f_rep_hz: f64,
}

impl Default for Measurements {
    fn default() -> Self {
        Self {
            ccd_rate_at_saturation: 4.7e5,
            fiber_photons_per_ccd_count: 44.0,
            port_ratio: 6.7,
            port_ratio_err: 0.3,
            ccd_rate_low_power: 2.7e4,
            low_power_uw: 100.0,
            max_power_uw: 4700.0,
            exit_ratio: 2.3,
            cryostat_quoted: 0.33,
            flux_ratio: 19.0,
            decay_ratio: 1.19,
            tau_fs_ps: 256.0,
            f_rep_hz: 38.26e6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixtureSet {
    pub modes: Vec<ModeTableRow>,
    pub stages: StageTable,
    pub summary: SummaryTable,
    pub measurements: Measurements,
}

impl FixtureSet {
    /// Compiled-in tables.
    pub fn bundled() -> Self {
        Self::parse(MODE_TABLE, STAGE_TABLE, SUMMARY_TABLE).expect("shipped fixtures parse")
    }

    pub fn parse(modes: &str, stages: &str, summary: &str) -> Result<Self, FormatError> {
        Ok(Self {
            modes: parse_mode_table(modes)?,
            stages: parse_stage_table(stages)?,
            summary: parse_summary_table(summary)?,
            measurements: Measurements::default(),
        })
    }

    /// Reads the three tables from `dir`.
    pub fn load_dir(dir: &Path) -> Result<Self, LoadError> {
        let read = |name: &str| {
            let p = dir.join(name);
            std::fs::read_to_string(&p).map_err(|e| LoadError::Io(format!("{}: {e}", p.display())))
        };
        let t: Vec<String> = FILE_NAMES.iter().map(|n| read(n)).collect::<Result<_, _>>()?;
        Ok(Self::parse(&t[0], &t[1], &t[2])?)
    }

    pub fn mode_row(&self, p: u32) -> Option<&ModeTableRow> {
        self.modes.iter().find(|r| r.p == p)
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum LoadError {
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Format(#[from] FormatError),
}
