//! Run configuration: a single JSON document. Every section and field is
//! optional; unset emitter fields take the built-in defaults.

use std::path::{Path, PathBuf};

use pl_core::budget::OpticalPath;
use pl_core::cavity::{q_from_losses, CavityGeometry, LossBudget};
use pl_core::dynamics::{DecayWeights, G2Mode, Irf, LevelScheme, SaturationMode};
use pl_core::fixtures::{FixtureSet, Measurements};
use pl_core::spectra::{EmitterModel, EnergyGrid, SidebandShape};
use pl_core::units::{energy_from_wavelength, rate_from_lifetime};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub emitter: EmitterConfig,
    pub cavity: CavityConfig,
    pub analysis: Analysis,
    pub io: IoConfig,
    pub seed: u64,
}

/// Overrides on top of [`EmitterModel::device_default`].
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmitterConfig {
    pub wavelength_nm: Option<f64>,
    pub zpl_energy_uev: Option<f64>,
    pub zpl_fwhm_uev: Option<f64>,
    pub debye_waller: Option<f64>,
    pub sideband: Option<SidebandShape>,
    pub temperature_k: Option<f64>,
    pub lifetime_ps: Option<f64>,
    pub gamma_fs_uev: Option<f64>,
    pub eta_qy: Option<f64>,
}

impl EmitterConfig {
    pub fn resolve(&self) -> CliResult<EmitterModel> {
        if self.wavelength_nm.is_some() && self.zpl_energy_uev.is_some() {
            return Err(CliError::config("emitter: give wavelength_nm or zpl_energy_uev, not both"));
        }
        if self.lifetime_ps.is_some() && self.gamma_fs_uev.is_some() {
            return Err(CliError::config("emitter: give lifetime_ps or gamma_fs_uev, not both"));
        }
        let mut m = EmitterModel::device_default();
        if let Some(l) = self.wavelength_nm {
            m.zpl_energy_uev = energy_from_wavelength(l);
        }
        if let Some(e) = self.zpl_energy_uev {
            m.zpl_energy_uev = e;
        }
        if let Some(t) = self.lifetime_ps {
            m.gamma_fs_uev = rate_from_lifetime(t);
        }
        m.gamma_fs_uev = self.gamma_fs_uev.unwrap_or(m.gamma_fs_uev);
        m.zpl_fwhm_uev = self.zpl_fwhm_uev.unwrap_or(m.zpl_fwhm_uev);
        m.debye_waller = self.debye_waller.unwrap_or(m.debye_waller);
        m.sideband = self.sideband.unwrap_or(m.sideband);
        m.temperature_k = self.temperature_k.unwrap_or(m.temperature_k);
        m.eta_qy = self.eta_qy.unwrap_or(m.eta_qy);
        m.validate()?;
        if !(m.gamma_fs_uev > 0.0 && m.gamma_fs_uev.is_finite()) {
            return Err(CliError::config(format!("emitter: gamma_fs_uev = {} must be > 0", m.gamma_fs_uev)));
        }
        if !(0.0..=1.0).contains(&m.eta_qy) {
            return Err(CliError::config(format!("emitter: eta_qy = {} must lie in [0, 1]", m.eta_qy)));
        }
        Ok(m)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CavityConfig {
    pub wavelength_nm: f64,
    pub refractive_index: f64,
    pub radius_of_curvature_um: f64,
    pub mode_orders: Vec<u32>,
    /// Same Q for every mode order.
    pub q: Option<f64>,
    /// Q per mode order from a loss budget.
    pub loss_budget: Option<LossBudget>,
}

impl Default for CavityConfig {
    fn default() -> Self {
        let g = CavityGeometry::device_default(6);
        Self {
            wavelength_nm: g.wavelength_nm,
            refractive_index: g.refractive_index,
            radius_of_curvature_um: g.radius_of_curvature_um,
            mode_orders: vec![6, 7, 8, 9],
            q: None,
            loss_budget: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QSource {
    LossBudget,
    Config,
    Fixture,
}

impl CavityConfig {
    pub fn geometry(&self, p: u32) -> CavityGeometry {
        CavityGeometry {
            wavelength_nm: self.wavelength_nm,
            refractive_index: self.refractive_index,
            radius_of_curvature_um: self.radius_of_curvature_um,
            mode_order: p,
        }
    }

    /// Loss budget, then `q`, then the measured fixture value.
    pub fn q_for(&self, p: u32, fixture: Option<&FixtureSet>) -> CliResult<(f64, QSource)> {
        if let Some(b) = &self.loss_budget {
            return Ok((q_from_losses(b, p)?.q, QSource::LossBudget));
        }
        if let Some(q) = self.q {
            if !(q > 0.0 && q.is_finite()) {
                return Err(CliError::config(format!("cavity.q = {q} must be > 0")));
            }
            return Ok((q, QSource::Config));
        }
        match fixture.and_then(|f| f.mode_row(p)) {
            Some(r) => Ok((r.q_exp, QSource::Fixture)),
            None if fixture.is_some() => Err(CliError::config(format!("fixture has no row for mode order {p}"))),
            None => Err(CliError::config("cavity Q unknown: set cavity.q or cavity.loss_budget, or pass --fixture paper")),
        }
    }

    pub fn first_order(&self) -> CliResult<u32> {
        self.mode_orders.first().copied().ok_or_else(|| CliError::config("cavity.mode_orders is empty"))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IoConfig {
    /// Measured data for the command (envelope, decay, saturation or g2 CSV).
    pub input: Option<PathBuf>,
    /// Free-space reference decay for `lifetime`.
    pub reference: Option<PathBuf>,
    /// Extra efficiency chains (JSON) for `budget`.
    pub chains: Vec<PathBuf>,
    pub output_dir: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Analysis {
    /// When set, must name the command being run.
    pub workflow: Option<String>,
    pub spectrum: SpectrumOpts,
    pub purcell: PurcellOpts,
    pub brightness: BrightnessOpts,
    pub lifetime: LifetimeOpts,
    pub saturation: SaturationOpts,
    pub g2: G2Opts,
    pub budget: BudgetOpts,
}

/// Energy grid relative to the ZPL.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridOpts {
    pub center_offset_uev: f64,
    pub half_span_uev: f64,
    pub step_uev: f64,
}

impl Default for GridOpts {
    fn default() -> Self {
        Self { center_offset_uev: -2000.0, half_span_uev: 12_000.0, step_uev: 5.0 }
    }
}

impl GridOpts {
    pub fn grid(&self, zpl: f64) -> CliResult<EnergyGrid> {
        Ok(EnergyGrid::centered(zpl + self.center_offset_uev, self.half_span_uev, self.step_uev)?)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumOpts {
    pub grid: GridOpts,
    /// Cavity mode setting κ; the first of `cavity.mode_orders` if unset.
    pub mode_order: Option<u32>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PurcellOpts {
    /// Measured cavity/free-space flux ratio; fixture value if unset.
    pub flux_ratio: Option<f64>,
    /// Measured long-lifetime ratio; fixture value if unset.
    pub decay_ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BrightnessOpts {
    /// Synthesize envelopes instead of reading `io.input`.
    pub synthetic: bool,
    /// Coupling at the smallest mode volume; scales as `V^{-1/2}`.
    pub g_max_uev: f64,
    /// Gaussian noise as a fraction of the envelope peak.
    pub noise: f64,
    /// Mode order of a measured envelope.
    pub mode_order: Option<u32>,
    pub grid: GridOpts,
}

impl Default for BrightnessOpts {
    fn default() -> Self {
        Self { synthetic: true, g_max_uev: 25.0, noise: 0.0, mode_order: None, grid: GridOpts::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LifetimeOpts {
    /// Synthesize traces instead of reading `io.input` and `io.reference`.
    pub synthetic: bool,
    pub decay_ratio: f64,
    pub weights: DecayWeights,
    pub irf: Irf,
    pub start_ps: f64,
    pub step_ps: f64,
    pub bins: usize,
    pub peak_counts: f64,
    pub poisson_noise: bool,
    /// Independent noisy realizations.
    pub trials: usize,
}

impl Default for LifetimeOpts {
    fn default() -> Self {
        Self {
            synthetic: true,
            decay_ratio: Measurements::default().decay_ratio,
            weights: DecayWeights::device_default(),
            irf: Irf::default(),
            start_ps: -200.0,
            step_ps: 4.0,
            bins: 600,
            peak_counts: 1e5,
            poisson_noise: true,
            trials: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SaturationOpts {
    pub synthetic: bool,
    pub mode: SaturationMode,
    pub i_sat: f64,
    pub p_sat_uw: f64,
    pub powers_uw: Vec<f64>,
    /// Gaussian noise as a fraction of each rate.
    pub noise: f64,
    /// Collection efficiency for the quantum-yield estimate.
    pub eta_coll: Option<f64>,
    pub f_rep_hz: Option<f64>,
}

impl Default for SaturationOpts {
    fn default() -> Self {
        let m = Measurements::default();
        Self {
            synthetic: true,
            mode: SaturationMode::Cw,
            i_sat: 7.2e5,
            p_sat_uw: 2500.0,
            powers_uw: (0..15).map(|k| 10.0 * 1.55f64.powi(k)).filter(|&p| p <= m.max_power_uw).collect(),
            noise: 0.01,
            eta_coll: None,
            f_rep_hz: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct G2Opts {
    /// Explicit rates; built from the bunching parameters below if unset.
    pub scheme: Option<LevelScheme>,
    /// Emitter decay rate is `decay_ratio·γ_fs`.
    pub decay_ratio: f64,
    pub pump_fraction: f64,
    pub bunching_time_ps: f64,
    pub bunching_amplitude: f64,
    pub background: f64,
    pub mode: G2Mode,
    pub half_span_ps: f64,
    pub step_ps: f64,
    pub irf: Irf,
    /// Bunching fit ignores `|τ|` below this.
    pub fit_tau_min_ps: f64,
}

impl Default for G2Opts {
    fn default() -> Self {
        Self {
            scheme: None,
            decay_ratio: Measurements::default().decay_ratio,
            pump_fraction: 0.1,
            bunching_time_ps: 10_000.0,
            bunching_amplitude: 0.1503,
            background: 0.2,
            mode: G2Mode::Cw,
            half_span_ps: 60_000.0,
            step_ps: 100.0,
            irf: Irf::default(),
            fit_tau_min_ps: 2000.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BudgetOpts {
    /// Overrides the fixture measurements.
    pub measurements: Option<Measurements>,
    /// Saturation power of the cw curve used to scale the low-power reading.
    pub p_sat_uw: f64,
    /// Stage solved from the measured port ratio.
    pub unknown_stage: String,
    pub unknown_path: OpticalPath,
}

impl Default for BudgetOpts {
    fn default() -> Self {
        Self {
            measurements: None,
            p_sat_uw: 2500.0,
            unknown_stage: "cryostat_optics".into(),
            unknown_path: OpticalPath::CavityPlanar,
        }
    }
}

impl RunConfig {
    /// Parses `text`; relative paths are resolved against `base`.
    pub fn parse(text: &str, base: &Path) -> CliResult<Self> {
        if text.trim().is_empty() {
            return Err(CliError::io("config file is empty"));
        }
        let mut c: RunConfig = serde_json::from_str(text)?;
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        c.io.input.as_mut().map(fix);
        c.io.reference.as_mut().map(fix);
        c.io.chains.iter_mut().for_each(fix);
        c.io.output_dir.as_mut().map(fix);
        Ok(c)
    }

    /// Every referenced input file exists.
    pub fn check_files(&self) -> CliResult<()> {
        let inputs = self.io.input.iter().chain(&self.io.reference).chain(&self.io.chains);
        for p in inputs {
            if !p.is_file() {
                return Err(CliError::io(format!("{}: no such file", p.display())));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_is_all_defaults() {
        let c = RunConfig::parse("{}", Path::new(".")).unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.emitter.resolve().unwrap(), EmitterModel::device_default());
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(RunConfig::parse(r#"{"emiter": {}}"#, Path::new(".")).is_err());
        assert!(RunConfig::parse(r#"{"emitter": {"dw": 1}}"#, Path::new(".")).is_err());
    }

    #[test]
    fn relative_paths_resolved() {
        let c = RunConfig::parse(r#"{"io": {"input": "a.csv", "chains": ["/x.json"]}}"#, Path::new("/cfg")).unwrap();
        assert_eq!(c.io.input.unwrap(), Path::new("/cfg/a.csv"));
        assert_eq!(c.io.chains[0], Path::new("/x.json"));
    }

    #[test]
    fn q_priority() {
        let f = FixtureSet::bundled();
        let mut c = CavityConfig::default();
        assert_eq!(c.q_for(6, Some(&f)).unwrap(), (11200.0, QSource::Fixture));
        assert!(c.q_for(6, None).is_err());
        c.q = Some(5000.0);
        assert_eq!(c.q_for(6, Some(&f)).unwrap(), (5000.0, QSource::Config));
        c.loss_budget = Some(LossBudget::standard(100.0, 100.0, 0.0, 0.0, 0.0));
        assert_eq!(c.q_for(6, None).unwrap().1, QSource::LossBudget);
    }

    #[test]
    fn emitter_overrides() {
        let e = EmitterConfig { debye_waller: Some(1.0), lifetime_ps: Some(100.0), ..Default::default() };
        let m = e.resolve().unwrap();
        assert_eq!(m.debye_waller, 1.0);
        assert!((m.gamma_fs_uev - rate_from_lifetime(100.0)).abs() < 1e-12);
        assert!(EmitterConfig { debye_waller: Some(1.5), ..Default::default() }.resolve().is_err());
    }
}
