//! Brightness profile, output spectra and the modulation envelope.

use serde::{Deserialize, Serialize};

use super::{check, steady_state, CouplingParams, CqedError};
use crate::spectra::{convolve_lorentzian, lorentzian, EnergyGrid, Normalization, Spectrum};

/// β at one cavity tuning from the convolved spectra sampled there.
pub fn beta_at(coupling: &CouplingParams, s_emi_tilde: f64, s_abs_tilde: f64) -> f64 {
    let g2 = coupling.g_uev * coupling.g_uev;
    let x = g2 * s_emi_tilde / coupling.gamma_uev;
    x / (1.0 + x + g2 * s_abs_tilde / coupling.kappa_uev)
}

fn require_area_2pi(s: &Spectrum) -> Result<(), CqedError> {
    if s.normalization() == Normalization::Area2Pi {
        Ok(())
    } else {
        Err(CqedError::NotArea2Pi(s.normalization().to_string()))
    }
}

/// β(ω_cav) over the grid of `s_emi_tilde`.
pub fn brightness_profile(
    coupling: &CouplingParams,
    s_emi_tilde: &Spectrum,
    s_abs_tilde: Option<&Spectrum>,
) -> Result<Spectrum, CqedError> {
    coupling.validate()?;
    require_area_2pi(s_emi_tilde)?;
    if let Some(a) = s_abs_tilde {
        require_area_2pi(a)?;
        if !a.grid().is_compatible(s_emi_tilde.grid()) {
            return Err(CqedError::GridMismatch);
        }
    }
    let values = s_emi_tilde
        .values()
        .iter()
        .enumerate()
        .map(|(i, &se)| beta_at(coupling, se, s_abs_tilde.map_or(0.0, |a| a.values()[i])))
        .collect();
    Ok(Spectrum::new(*s_emi_tilde.grid(), values, Normalization::Raw)?)
}

/// Output spectrum at fixed cavity tuning, `p·β(ω_cav)·𝓛_κ(ω − ω_cav)`.
///
/// Its integral over `ω` is the photon flux `κ⟨a†a⟩ = p·β(ω_cav)` (up to
/// the part of the Lorentzian outside `grid`).
pub fn emitted_spectrum(
    omega_cav: f64,
    coupling: &CouplingParams,
    s_emi_tilde: &Spectrum,
    pump_rate: f64,
    grid: &EnergyGrid,
) -> Result<Spectrum, CqedError> {
    require_area_2pi(s_emi_tilde)?;
    check("omega_cav", omega_cav, omega_cav.is_finite(), "must be finite")?;
    let ss = steady_state(pump_rate, coupling, s_emi_tilde.value_at(omega_cav), 0.0)?;
    let flux = coupling.kappa_uev * ss.photon_number;
    let values = (0..grid.len())
        .map(|i| flux * lorentzian(grid.energy(i) - omega_cav, coupling.kappa_uev))
        .collect();
    Ok(Spectrum::new(*grid, values, Normalization::Raw)?)
}

/// `E_mod = 𝓛_κ ∗ β`.
pub fn modulation_envelope(beta: &Spectrum, kappa: f64) -> Result<Spectrum, CqedError> {
    let e = convolve_lorentzian(beta, kappa)?;
    Ok(e.normalized(Normalization::Raw)?)
}

/// Hill form `c·aS/(1 + aS)` of a doubly convolved spectrum.
pub fn hill_envelope(s_double_tilde: &Spectrum, a: f64, c: f64) -> Result<Spectrum, CqedError> {
    check("a", a, a >= 0.0 && a.is_finite(), "must be finite and >= 0")?;
    check("c", c, c > 0.0 && c.is_finite(), "must be finite and > 0")?;
    let values = s_double_tilde
        .values()
        .iter()
        .map(|&s| c * a * s / (1.0 + a * s))
        .collect();
    Ok(Spectrum::new(*s_double_tilde.grid(), values, Normalization::Raw)?)
}

/// Pointwise inverse of [`hill_envelope`]: `S = E/(a·(c − E))`.
pub fn invert_envelope(e_mod: &Spectrum, a: f64, c: f64) -> Result<Spectrum, CqedError> {
    check("a", a, a > 0.0 && a.is_finite(), "must be finite and > 0")?;
    check("c", c, c > 0.0 && c.is_finite(), "must be finite and > 0")?;
    let grid = e_mod.grid();
    let mut values = Vec::with_capacity(e_mod.len());
    for (i, &e) in e_mod.values().iter().enumerate() {
        let den = a * (c - e);
        if !(den > 0.0) {
            return Err(CqedError::InversionDenominator {
                energy_uev: grid.energy(i),
                denominator: den,
            });
        }
        values.push(e / den);
    }
    Ok(Spectrum::new(*grid, values, Normalization::Raw)?)
}

/// Forward pipeline `𝓛 ∗ β[S ∗ 𝓛]` from a free-space spectrum of area 2π,
/// without reabsorption.
pub fn synthetic_envelope(s_fs: &Spectrum, coupling: &CouplingParams) -> Result<Spectrum, CqedError> {
    let s_tilde = convolve_lorentzian(s_fs, coupling.kappa_uev)?;
    let beta = brightness_profile(coupling, &s_tilde, None)?;
    modulation_envelope(&beta, coupling.kappa_uev)
}

/// Comparison of the exact envelope `𝓛 ∗ β` against its Hill-form
/// approximation built from the doubly convolved spectra.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproximationCheck {
    /// Standard deviation of the difference, both profiles scaled to unit area (µeV⁻¹).
    pub std_area_normalized: f64,
    /// Same with both profiles scaled to unit peak (dimensionless).
    pub std_peak_normalized: f64,
    /// max(Hill) / max(𝓛 ∗ β).
    pub vertical_stretch: f64,
}

pub fn approximation_check(
    s_fs: &Spectrum,
    s_abs: Option<&Spectrum>,
    coupling: &CouplingParams,
) -> Result<ApproximationCheck, CqedError> {
    require_area_2pi(s_fs)?;
    let kappa = coupling.kappa_uev;
    let se1 = convolve_lorentzian(s_fs, kappa)?;
    let sa1 = s_abs.map(|s| convolve_lorentzian(s, kappa)).transpose()?;
    let beta = brightness_profile(coupling, &se1, sa1.as_ref())?;
    let exact = modulation_envelope(&beta, kappa)?;
    let se2 = convolve_lorentzian(&se1, kappa)?;
    let sa2 = sa1.as_ref().map(|s| convolve_lorentzian(s, kappa)).transpose()?;
    let hill = brightness_profile(coupling, &se2, sa2.as_ref())?;

    let std_of = |x: &Spectrum, y: &Spectrum| {
        let d: Vec<f64> = x.values().iter().zip(y.values()).map(|(a, b)| a - b).collect();
        let m = d.iter().sum::<f64>() / d.len() as f64;
        (d.iter().map(|v| (v - m).powi(2)).sum::<f64>() / d.len() as f64).sqrt()
    };
    let area = std_of(
        &exact.normalized(Normalization::AreaOne)?,
        &hill.normalized(Normalization::AreaOne)?,
    );
    let peak = std_of(&exact.peak_normalized()?, &hill.peak_normalized()?);
    Ok(ApproximationCheck {
        std_area_normalized: area,
        std_peak_normalized: peak,
        vertical_stretch: hill.peak().2 / exact.peak().2,
    })
}
