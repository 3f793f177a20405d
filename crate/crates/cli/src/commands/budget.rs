//! Photon budget: chain efficiencies, photons per count, port ratios, fiber
//! flux and the calibration of an unknown stage.

use pl_core::budget::{
    calibrate_unknown_stage, chain_efficiency, collection_ratio_fs_over_cav, fiber_flux_from_ccd,
    fiber_flux_via_saturation, fiber_photons_per_ccd_count, photons_per_count, Calibration, EfficiencyChain,
    OpticalPath, SaturationRoute, SaturationRouteResult, Tracked,
};
use pl_core::io::parse_chain_json;
use serde::{Deserialize, Serialize};

use super::{read_input, Ctx};
use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathSummary {
    pub path: OpticalPath,
    /// Per-stage chain after the first lens.
    pub stages: EfficiencyChain,
    pub path_efficiency: f64,
    pub extraction: f64,
    /// Extraction times the per-stage chain.
    pub overall_from_stages: f64,
    /// Tabulated summary values.
    pub summary_extraction: f64,
    pub summary_path_and_detector: f64,
    pub summary_overall: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainSummary {
    pub file: String,
    pub chain: EfficiencyChain,
    pub efficiency: f64,
    pub photons_per_count: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationCase {
    pub exit_basis: String,
    pub calibration: Calibration,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BudgetReport {
    pub paths: Vec<PathSummary>,
    /// Photons leaving the planar port per CCD count.
    pub planar_photons_per_ccd_count: f64,
    /// Same referred to the fiber port through the extraction ratio.
    pub fiber_photons_per_ccd_count: f64,
    pub fiber_photons_per_ccd_count_quoted: Tracked,
    pub ccd_rate_at_saturation: Tracked,
    /// CCD rate times the quoted photons per count.
    pub fiber_flux_per_s: f64,
    /// CCD rate times the derived photons per count.
    pub fiber_flux_derived_per_s: f64,
    pub saturation_route: SaturationRoute,
    pub saturation_route_result: SaturationRouteResult,
    /// Fiber over planar detected rate from the summary overall values.
    pub port_ratio_from_summary: f64,
    pub port_ratio_measured: Tracked,
    pub port_ratio_err: f64,
    pub port_ratio_consistent: bool,
    pub collection_ratio_fs_over_planar: f64,
    pub calibrations: Vec<CalibrationCase>,
    pub cryostat_quoted: Tracked,
    pub extra_chains: Vec<ChainSummary>,
}

pub fn run(ctx: &mut Ctx) -> CliResult<()> {
    let f = ctx
        .fixture
        .clone()
        .ok_or_else(|| CliError::config("budget needs the efficiency tables: pass --fixture paper"))?;
    let opts = ctx.cfg.analysis.budget.clone();
    let (m, user) = match opts.measurements {
        Some(m) => (m, true),
        None => (f.measurements, false),
    };
    let tracked = |v: f64, note: &str| if user { Tracked::user(v, note) } else { Tracked::fixture(v, note) };

    let mut paths = Vec::new();
    for path in OpticalPath::ALL {
        let chain = f.stages.path_chain(path)?;
        let eff = chain_efficiency(&chain)?;
        let x = f.stages.extraction(path).ok_or_else(|| CliError::config(format!("no extraction for {path}")))?;
        paths.push(PathSummary {
            path,
            stages: chain,
            path_efficiency: eff,
            extraction: x,
            overall_from_stages: x * eff,
            summary_extraction: f.summary.extraction(path),
            summary_path_and_detector: chain_efficiency(&f.summary.path_chain(path)?)?,
            summary_overall: f.summary.overall(path),
        });
    }
    let get = |p: OpticalPath| paths.iter().find(|s| s.path == p).expect("all paths present");
    let (planar, fiber) = (get(OpticalPath::CavityPlanar), get(OpticalPath::CavityFiber));

    let planar_ppc = photons_per_count(&planar.stages)?;
    let fiber_ppc = fiber_photons_per_ccd_count(&planar.stages, planar.extraction, fiber.extraction)?;
    let route = SaturationRoute {
        ccd_counts_per_s: m.ccd_rate_low_power,
        port_ratio: m.port_ratio,
        measured_power_uw: m.low_power_uw,
        target_power_uw: m.max_power_uw,
        p_sat_uw: opts.p_sat_uw,
        fiber_path_efficiency: fiber.path_efficiency,
    };
    let route_result = fiber_flux_via_saturation(&route)?;
    let port_ratio = f.summary.overall(OpticalPath::CavityFiber) / f.summary.overall(OpticalPath::CavityPlanar);
    let collection = collection_ratio_fs_over_cav(
        &f.summary.path_chain(OpticalPath::FreeSpace)?,
        &f.summary.path_chain(OpticalPath::CavityPlanar)?,
        f.summary.extraction(OpticalPath::FreeSpace),
        f.summary.extraction(OpticalPath::CavityPlanar),
    )?;

    let calibrate = |exit_fiber: f64, exit_planar: f64| {
        calibrate_unknown_stage(&fiber.stages, &planar.stages, exit_fiber, exit_planar, m.port_ratio, &opts.unknown_stage)
    };
    let mut calibrations = vec![CalibrationCase {
        exit_basis: "extraction into the first lens".into(),
        calibration: calibrate(fiber.extraction, planar.extraction)?,
    }];
    if m.exit_ratio >= 1.0 {
        calibrations.push(CalibrationCase {
            exit_basis: format!("fiber/planar exit ratio {}", m.exit_ratio),
            calibration: calibrate(1.0, 1.0 / m.exit_ratio)?,
        });
    }
    for c in &calibrations {
        if c.calibration.path != opts.unknown_path {
            return Err(CliError::config(format!(
                "stage '{}' found on {}, expected {}",
                opts.unknown_stage, c.calibration.path, opts.unknown_path
            )));
        }
    }

    let mut extra_chains = Vec::new();
    for path in ctx.cfg.io.chains.clone() {
        let chain = parse_chain_json(&read_input(&path)?).map_err(|e| CliError::from(e).in_file(&path))?;
        extra_chains.push(ChainSummary {
            file: path.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned()),
            efficiency: chain_efficiency(&chain)?,
            photons_per_count: photons_per_count(&chain)?,
            chain,
        });
    }

    let report = BudgetReport {
        planar_photons_per_ccd_count: planar_ppc,
        fiber_photons_per_ccd_count: fiber_ppc,
        fiber_photons_per_ccd_count_quoted: tracked(m.fiber_photons_per_ccd_count, "photons into the fiber per CCD count"),
        ccd_rate_at_saturation: tracked(m.ccd_rate_at_saturation, "planar-port CCD counts/s at saturation"),
        fiber_flux_per_s: fiber_flux_from_ccd(m.ccd_rate_at_saturation, m.fiber_photons_per_ccd_count)?,
        fiber_flux_derived_per_s: fiber_flux_from_ccd(m.ccd_rate_at_saturation, fiber_ppc)?,
        saturation_route: route,
        saturation_route_result: route_result,
        port_ratio_from_summary: port_ratio,
        port_ratio_measured: tracked(m.port_ratio, "detected fiber/planar rate ratio"),
        port_ratio_err: m.port_ratio_err,
        port_ratio_consistent: (port_ratio - m.port_ratio).abs() <= m.port_ratio_err,
        collection_ratio_fs_over_planar: collection,
        calibrations,
        cryostat_quoted: tracked(m.cryostat_quoted, "quoted cryostat-optics efficiency"),
        extra_chains,
        paths,
    };
    ctx.write_json("budget_report.json", &report)
}
