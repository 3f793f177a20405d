//! Parametric free-space spectrum: Lorentzian ZPL plus one-phonon acoustic wings.

use serde::{Deserialize, Serialize};

use super::{check_param, lorentzian, EnergyGrid, Normalization, Spectrum, SpectrumError};
use crate::units::{bose_occupation, energy_from_wavelength, rate_from_lifetime};

/// Ohmic-with-cutoff spectral density `J(ω) = (ω/ω_c)^s · exp(−ω/ω_c)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SidebandShape {
    pub exponent: f64,
    pub cutoff_uev: f64,
}

impl Default for SidebandShape {
    fn default() -> Self {
        Self {
            exponent: 1.0,
            cutoff_uev: 1000.0,
        }
    }
}

impl SidebandShape {
    pub fn spectral_density(&self, omega: f64) -> f64 {
        let x = omega / self.cutoff_uev;
        x.powf(self.exponent) * (-x).exp()
    }
}

/// Free-space parameters of one emitter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmitterModel {
    pub zpl_energy_uev: f64,
    pub zpl_fwhm_uev: f64,
    pub debye_waller: f64,
    #[serde(default)]
    pub sideband: SidebandShape,
    pub temperature_k: f64,
    /// Total free-space decay rate `ħ/τ_fs`.
    pub gamma_fs_uev: f64,
    pub eta_qy: f64,
}

impl EmitterModel {
    /// λ = 1275 nm, γ* = 200 µeV, DW = 0.65, τ = 256 ps, η = 1 %, T = 4 K.
    pub fn device_default() -> Self {
        Self {
            zpl_energy_uev: energy_from_wavelength(1275.0),
            zpl_fwhm_uev: 200.0,
            debye_waller: 0.65,
            sideband: SidebandShape::default(),
            temperature_k: 4.0,
            gamma_fs_uev: rate_from_lifetime(256.0),
            eta_qy: 0.01,
        }
    }

    pub fn validate(&self) -> Result<(), SpectrumError> {
        check_param("zpl_energy_uev", self.zpl_energy_uev, true, "must be finite")?;
        check_param("zpl_fwhm_uev", self.zpl_fwhm_uev, self.zpl_fwhm_uev > 0.0, "must be > 0")?;
        check_param(
            "debye_waller",
            self.debye_waller,
            self.debye_waller > 0.0 && self.debye_waller <= 1.0,
            "must lie in (0, 1]",
        )?;
        check_param(
            "sideband.exponent",
            self.sideband.exponent,
            self.sideband.exponent >= 1.0,
            "must be >= 1 (integrable wing at zero detuning)",
        )?;
        check_param(
            "sideband.cutoff_uev",
            self.sideband.cutoff_uev,
            self.sideband.cutoff_uev > 0.0,
            "must be > 0",
        )?;
        check_param("temperature_k", self.temperature_k, self.temperature_k >= 0.0, "must be >= 0")?;
        check_param("gamma_fs_uev", self.gamma_fs_uev, self.gamma_fs_uev > 0.0, "must be > 0")?;
        check_param(
            "eta_qy",
            self.eta_qy,
            (0.0..=1.0).contains(&self.eta_qy),
            "must lie in [0, 1]",
        )?;
        Ok(())
    }

    /// Unnormalized red and blue wing densities at detuning `delta = ω − E₀`.
    pub(crate) fn wing_density(&self, delta: f64) -> (f64, f64) {
        // keep Δ = 0 finite; for s = 1 this reproduces the k_BT/ω_c limit
        let w = delta.abs().max(1e-9 * self.sideband.cutoff_uev);
        let j = self.sideband.spectral_density(w);
        let n = bose_occupation(w, self.temperature_k);
        if delta < 0.0 {
            (j * (n + 1.0), 0.0)
        } else if delta > 0.0 {
            (0.0, j * n)
        } else {
            (0.5 * j * (n + 1.0), 0.5 * j * n)
        }
    }
}

/// Area-2π spectrum split into its parts, all on the same grid.
#[derive(Clone, Debug, PartialEq)]
pub struct FsComponents {
    pub grid: EnergyGrid,
    pub zpl: Vec<f64>,
    pub red_wing: Vec<f64>,
    pub blue_wing: Vec<f64>,
}

impl FsComponents {
    pub fn total(&self) -> Vec<f64> {
        self.zpl
            .iter()
            .zip(&self.red_wing)
            .zip(&self.blue_wing)
            .map(|((z, r), b)| z + r + b)
            .collect()
    }
}

fn check_grid(model: &EmitterModel, grid: &EnergyGrid) -> Result<(), SpectrumError> {
    let g = model.zpl_fwhm_uev;
    let limit = g / 10.0;
    if grid.step() > limit * (1.0 + 1e-12) {
        return Err(SpectrumError::GridTooCoarse {
            step: grid.step(),
            limit,
            reason: "spacing must be <= zpl_fwhm/10".into(),
        });
    }
    let e0 = model.zpl_energy_uev;
    let tol = 1e-9 * grid.span();
    if grid.start() > e0 - 10.0 * g + tol || grid.end() < e0 + 10.0 * g - tol {
        return Err(SpectrumError::GridTooNarrow {
            reason: format!(
                "grid [{}, {}] µeV must cover E0 ± 10·zpl_fwhm = [{}, {}] µeV",
                grid.start(),
                grid.end(),
                e0 - 10.0 * g,
                e0 + 10.0 * g
            ),
        });
    }
    Ok(())
}

fn scale_to(values: &mut [f64], weights: &[f64], target: f64) -> f64 {
    let area: f64 = values.iter().zip(weights).map(|(v, w)| v * w).sum();
    if area > 0.0 {
        let k = target / area;
        values.iter_mut().for_each(|v| *v *= k);
    }
    area
}

/// ZPL and wings separately, each normalized on the grid so that the ZPL
/// carries `2π·DW` and the wings together carry `2π·(1 − DW)`.
pub fn fs_components(model: &EmitterModel, grid: &EnergyGrid) -> Result<FsComponents, SpectrumError> {
    model.validate()?;
    check_grid(model, grid)?;
    let tau = std::f64::consts::TAU;
    let dw = model.debye_waller;
    let w = grid.trapezoid_weights();
    let e0 = model.zpl_energy_uev;

    let mut zpl: Vec<f64> = (0..grid.len())
        .map(|i| lorentzian(grid.energy(i) - e0, model.zpl_fwhm_uev))
        .collect();
    scale_to(&mut zpl, &w, tau * dw);

    let (mut red, mut blue): (Vec<f64>, Vec<f64>) = (0..grid.len())
        .map(|i| model.wing_density(grid.energy(i) - e0))
        .unzip();
    if dw < 1.0 {
        let red_area: f64 = red.iter().zip(&w).map(|(v, w)| v * w).sum();
        let blue_area: f64 = blue.iter().zip(&w).map(|(v, w)| v * w).sum();
        let total = red_area + blue_area;
        if !(total > 0.0) {
            return Err(SpectrumError::GridTooNarrow {
                reason: "grid holds no phonon-wing weight (extend the red side)".into(),
            });
        }
        let k = tau * (1.0 - dw) / total;
        red.iter_mut().chain(blue.iter_mut()).for_each(|v| *v *= k);
    } else {
        red.iter_mut().chain(blue.iter_mut()).for_each(|v| *v = 0.0);
    }
    Ok(FsComponents {
        grid: *grid,
        zpl,
        red_wing: red,
        blue_wing: blue,
    })
}

/// Free-space emission spectrum normalized to area 2π.
pub fn build_fs_spectrum(model: &EmitterModel, grid: &EnergyGrid) -> Result<Spectrum, SpectrumError> {
    let c = fs_components(model, grid)?;
    Spectrum::new(c.grid, c.total(), Normalization::Area2Pi)
}

/// Fraction of the total integral inside `peak ± zpl_window`, the peak being
/// the spectrum maximum.
pub fn debye_waller(s: &Spectrum, zpl_window: f64) -> Result<f64, SpectrumError> {
    let (_, center, _) = s.peak();
    debye_waller_about(s, center, zpl_window)
}

/// Fraction of the total integral inside `center ± zpl_window`.
pub fn debye_waller_about(s: &Spectrum, center: f64, zpl_window: f64) -> Result<f64, SpectrumError> {
    check_param("zpl_window", zpl_window, zpl_window > 0.0, "must be > 0")?;
    let (lo, hi) = (center - zpl_window, center + zpl_window);
    let g = s.grid();
    if lo < g.start() || hi > g.end() {
        return Err(SpectrumError::WindowExceedsGrid {
            lo,
            hi,
            grid_lo: g.start(),
            grid_hi: g.end(),
        });
    }
    if let Some(fwhm) = s.fwhm() {
        if zpl_window < 3.0 * fwhm * (1.0 - 1e-9) {
            return Err(SpectrumError::WindowTooNarrow {
                window: zpl_window,
                min: 3.0 * fwhm,
            });
        }
    }
    let total = s.integral();
    if !(total > 0.0) {
        return Err(SpectrumError::ZeroArea);
    }
    Ok((s.integral_between(lo, hi) / total).clamp(0.0, 1.0))
}
