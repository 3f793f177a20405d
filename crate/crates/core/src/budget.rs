//! Photon budget: efficiency chains of the three optical paths, count to
//! flux conversion, port ratios and calibration of one unknown stage.
//!
//! A chain is an ordered list of multiplicative stages. Whether it includes
//! the extraction into the first lens is up to the caller; the port-ratio
//! functions take extraction (or cavity exit) probabilities separately so
//! the same path chains serve every comparison.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BudgetError {
    #[error("chain '{0}' has no stages")]
    EmptyChain(String),
    #[error("stage '{name}' efficiency {eff} outside (0, 1]")]
    BadEfficiency { name: String, eff: f64 },
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("unknown stage '{0}' appears in both chains")]
    UnknownInBoth(String),
    #[error("unknown stage '{0}' appears in neither chain")]
    UnknownMissing(String),
    #[error("unknown stage '{0}' appears more than once in a chain")]
    UnknownRepeated(String),
    #[error("unknown optical path '{0}'")]
    BadPath(String),
}

fn check(name: &'static str, value: f64, ok: bool, reason: &'static str) -> Result<(), BudgetError> {
    if ok && !value.is_nan() {
        Ok(())
    } else {
        Err(BudgetError::InvalidParameter { name, value, reason })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OpticalPath {
    #[serde(rename = "free-space")]
    FreeSpace,
    #[serde(rename = "cavity-planar")]
    CavityPlanar,
    #[serde(rename = "cavity-fiber")]
    CavityFiber,
}

impl OpticalPath {
    pub const ALL: [OpticalPath; 3] = [OpticalPath::FreeSpace, OpticalPath::CavityPlanar, OpticalPath::CavityFiber];

    pub fn as_str(self) -> &'static str {
        match self {
            OpticalPath::FreeSpace => "free-space",
            OpticalPath::CavityPlanar => "cavity-planar",
            OpticalPath::CavityFiber => "cavity-fiber",
        }
    }
}

impl fmt::Display for OpticalPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for OpticalPath {
    type Err = BudgetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        OpticalPath::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| BudgetError::BadPath(s.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub name: String,
    pub eff: f64,
}

impl Stage {
    pub fn new(name: impl Into<String>, eff: f64) -> Self {
        Self { name: name.into(), eff }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyChain {
    pub path: OpticalPath,
    pub stages: Vec<Stage>,
}

impl EfficiencyChain {
    pub fn new(path: OpticalPath, stages: Vec<Stage>) -> Result<Self, BudgetError> {
        let c = Self { path, stages };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), BudgetError> {
        if self.stages.is_empty() {
            return Err(BudgetError::EmptyChain(self.path.to_string()));
        }
        for s in &self.stages {
            if !(s.eff > 0.0 && s.eff <= 1.0) {
                return Err(BudgetError::BadEfficiency {
                    name: s.name.clone(),
                    eff: s.eff,
                });
            }
        }
        Ok(())
    }

    /// Product over the stages not named `name`; 1 when nothing is left.
    fn product_without(&self, name: &str) -> f64 {
        self.stages.iter().filter(|s| s.name != name).map(|s| s.eff).product()
    }

    /// Chain with one more stage appended.
    pub fn then(mut self, stage: Stage) -> Self {
        self.stages.push(stage);
        self
    }

    /// Chain without the stages named `name`.
    pub fn without(&self, name: &str) -> Self {
        Self {
            path: self.path,
            stages: self.stages.iter().filter(|s| s.name != name).cloned().collect(),
        }
    }
}

/// Product of the stage efficiencies.
pub fn chain_efficiency(chain: &EfficiencyChain) -> Result<f64, BudgetError> {
    chain.validate()?;
    Ok(chain.stages.iter().map(|s| s.eff).product())
}

/// Photons entering `chain` per detector count: `1/∏ η`.
pub fn photons_per_count(chain: &EfficiencyChain) -> Result<f64, BudgetError> {
    Ok(1.0 / chain_efficiency(chain)?)
}

/// Detected-rate ratio of two ports fed with exit probabilities `exit_a`, `exit_b`.
pub fn detected_port_ratio(
    chain_a: &EfficiencyChain,
    chain_b: &EfficiencyChain,
    exit_a: f64,
    exit_b: f64,
) -> Result<f64, BudgetError> {
    check("exit_a", exit_a, exit_a > 0.0 && exit_a <= 1.0, "must lie in (0, 1]")?;
    check("exit_b", exit_b, exit_b > 0.0 && exit_b <= 1.0, "must lie in (0, 1]")?;
    Ok(exit_a * chain_efficiency(chain_a)? / (exit_b * chain_efficiency(chain_b)?))
}

/// Overall free-space collection over overall cavity collection, each being
/// extraction in the first lens times the path-and-detector product.
pub fn collection_ratio_fs_over_cav(
    fs_path: &EfficiencyChain,
    cav_path: &EfficiencyChain,
    fs_extraction: f64,
    cav_extraction: f64,
) -> Result<f64, BudgetError> {
    detected_port_ratio(fs_path, cav_path, fs_extraction, cav_extraction)
}

/// Photon flux entering a fiber from a CCD count rate.
pub fn fiber_flux_from_ccd(ccd_counts_per_s: f64, photons_per_ccd_count_into_fiber: f64) -> Result<f64, BudgetError> {
    check("ccd_counts_per_s", ccd_counts_per_s, ccd_counts_per_s > 0.0 && ccd_counts_per_s.is_finite(), "must be > 0")?;
    check(
        "photons_per_ccd_count_into_fiber",
        photons_per_ccd_count_into_fiber,
        photons_per_ccd_count_into_fiber > 0.0 && photons_per_ccd_count_into_fiber.is_finite(),
        "must be > 0",
    )?;
    Ok(ccd_counts_per_s * photons_per_ccd_count_into_fiber)
}

/// Photons into the fiber port per CCD count on the planar port, assuming
/// the two ports share the emission in the ratio of their extraction values.
pub fn fiber_photons_per_ccd_count(
    planar_path: &EfficiencyChain,
    planar_extraction: f64,
    fiber_extraction: f64,
) -> Result<f64, BudgetError> {
    check("planar_extraction", planar_extraction, planar_extraction > 0.0 && planar_extraction <= 1.0, "must lie in (0, 1]")?;
    check("fiber_extraction", fiber_extraction, fiber_extraction > 0.0 && fiber_extraction <= 1.0, "must lie in (0, 1]")?;
    Ok(photons_per_count(planar_path)? * fiber_extraction / planar_extraction)
}

/// Inputs of the fiber-flux estimate from a low-power CCD reading.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaturationRoute {
    pub ccd_counts_per_s: f64,
    /// Detected fiber/planar rate ratio.
    pub port_ratio: f64,
    pub measured_power_uw: f64,
    pub target_power_uw: f64,
    /// Saturation power of the cw curve `P/(P + P_sat)`.
    pub p_sat_uw: f64,
    /// Path-and-detector efficiency of the fiber port.
    pub fiber_path_efficiency: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaturationRouteResult {
    pub detector_counts_per_s: f64,
    pub photons_per_s: f64,
}

/// CCD rate × port ratio, scaled along the cw saturation curve to the target
/// power, then divided by the fiber path efficiency.
pub fn fiber_flux_via_saturation(r: &SaturationRoute) -> Result<SaturationRouteResult, BudgetError> {
    let pos = |v: f64| v > 0.0 && v.is_finite();
    check("ccd_counts_per_s", r.ccd_counts_per_s, pos(r.ccd_counts_per_s), "must be > 0")?;
    check("port_ratio", r.port_ratio, pos(r.port_ratio), "must be > 0")?;
    check("measured_power_uw", r.measured_power_uw, pos(r.measured_power_uw), "must be > 0")?;
    check("target_power_uw", r.target_power_uw, pos(r.target_power_uw), "must be > 0")?;
    check("p_sat_uw", r.p_sat_uw, pos(r.p_sat_uw), "must be > 0")?;
    check(
        "fiber_path_efficiency",
        r.fiber_path_efficiency,
        r.fiber_path_efficiency > 0.0 && r.fiber_path_efficiency <= 1.0,
        "must lie in (0, 1]",
    )?;
    let sat = |p: f64| p / (p + r.p_sat_uw);
    let counts = r.ccd_counts_per_s * r.port_ratio * sat(r.target_power_uw) / sat(r.measured_power_uw);
    Ok(SaturationRouteResult {
        detector_counts_per_s: counts,
        photons_per_s: counts / r.fiber_path_efficiency,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub stage: String,
    pub path: OpticalPath,
    pub efficiency: f64,
    /// `false` when the solution lies outside (0, 1].
    pub physical: bool,
}

/// Solves the efficiency of the stage named `unknown` (present in exactly one
/// chain; its stored value is ignored) so that
/// `detected_port_ratio(a, b, exit_a, exit_b) = measured_ratio`.
pub fn calibrate_unknown_stage(
    chain_a: &EfficiencyChain,
    chain_b: &EfficiencyChain,
    exit_a: f64,
    exit_b: f64,
    measured_ratio: f64,
    unknown: &str,
) -> Result<Calibration, BudgetError> {
    check("measured_ratio", measured_ratio, measured_ratio > 0.0 && measured_ratio.is_finite(), "must be > 0")?;
    check("exit_a", exit_a, exit_a > 0.0 && exit_a <= 1.0, "must lie in (0, 1]")?;
    check("exit_b", exit_b, exit_b > 0.0 && exit_b <= 1.0, "must lie in (0, 1]")?;
    chain_a.validate()?;
    chain_b.validate()?;
    let count = |c: &EfficiencyChain| c.stages.iter().filter(|s| s.name == unknown).count();
    let (na, nb) = (count(chain_a), count(chain_b));
    if na > 0 && nb > 0 {
        return Err(BudgetError::UnknownInBoth(unknown.to_string()));
    }
    if na + nb == 0 {
        return Err(BudgetError::UnknownMissing(unknown.to_string()));
    }
    if na > 1 || nb > 1 {
        return Err(BudgetError::UnknownRepeated(unknown.to_string()));
    }
    let a = exit_a * chain_a.product_without(unknown);
    let b = exit_b * chain_b.product_without(unknown);
    let (efficiency, path) = if na == 1 {
        (measured_ratio * b / a, chain_a.path)
    } else {
        (a / (measured_ratio * b), chain_b.path)
    };
    Ok(Calibration {
        stage: unknown.to_string(),
        path,
        efficiency,
        physical: efficiency > 0.0 && efficiency <= 1.0,
    })
}

/// Where a reported number came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Fixture,
    User,
    Computed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tracked {
    pub value: f64,
    pub provenance: Provenance,
    pub note: String,
}

impl Tracked {
    pub fn fixture(value: f64, note: impl Into<String>) -> Self {
        Self { value, provenance: Provenance::Fixture, note: note.into() }
    }

    pub fn user(value: f64, note: impl Into<String>) -> Self {
        Self { value, provenance: Provenance::User, note: note.into() }
    }

    pub fn computed(value: f64, note: impl Into<String>) -> Self {
        Self { value, provenance: Provenance::Computed, note: note.into() }
    }
}
