//! Absorption spectrum by detailed-balance mirroring of the emission wings.

use super::{lorentzian, EmitterModel, Normalization, Spectrum, SpectrumError};

/// Mirrors the phonon wings of `s_emi` about `E₀`: absorbing at `E₀ + ω`
/// creates a phonon, weight `n_B+1`, as does emitting at `E₀ − ω`. At any
/// fixed detuning the absorption/emission wing ratio is therefore
/// `n_B/(n_B+1)` on the red side and `(n_B+1)/n_B` on the blue side. The ZPL part
/// (Lorentzian of FWHM `γ*` carrying `2π·DW`) is kept as is; the wings are
/// renormalized so the result has area 2π.
pub fn absorption_spectrum(s_emi: &Spectrum, model: &EmitterModel) -> Result<Spectrum, SpectrumError> {
    model.validate()?;
    if s_emi.normalization() != Normalization::Area2Pi {
        return Err(SpectrumError::AreaMismatch {
            normalization: Normalization::Area2Pi,
            integral: s_emi.integral(),
        });
    }
    let grid = *s_emi.grid();
    let w = grid.trapezoid_weights();
    let e0 = model.zpl_energy_uev;
    let tau = std::f64::consts::TAU;

    let mut zpl: Vec<f64> = (0..grid.len())
        .map(|i| lorentzian(grid.energy(i) - e0, model.zpl_fwhm_uev))
        .collect();
    let zarea: f64 = zpl.iter().zip(&w).map(|(v, w)| v * w).sum();
    let k = tau * model.debye_waller / zarea;
    zpl.iter_mut().for_each(|v| *v *= k);

    let wing: Vec<f64> = s_emi
        .values()
        .iter()
        .zip(&zpl)
        .map(|(s, z)| (s - z).max(0.0))
        .collect();
    let wing_at = |energy: f64| -> f64 {
        let f = (energy - grid.start()) / grid.step();
        let r = f.round();
        if (f - r).abs() < 1e-6 && r >= 0.0 && r <= (grid.len() - 1) as f64 {
            wing[r as usize]
        } else if f < 0.0 || f > (grid.len() - 1) as f64 {
            0.0
        } else {
            let i = (f.floor() as usize).min(grid.len() - 2);
            let t = f - i as f64;
            wing[i] * (1.0 - t) + wing[i + 1] * t
        }
    };

    let mut abs_wing: Vec<f64> = (0..grid.len())
        .map(|i| wing_at(2.0 * e0 - grid.energy(i)))
        .collect();
    let target = tau * (1.0 - model.debye_waller);
    let warea: f64 = abs_wing.iter().zip(&w).map(|(v, w)| v * w).sum();
    if warea > 0.0 {
        let k = target / warea;
        abs_wing.iter_mut().for_each(|v| *v *= k);
    }
    let values: Vec<f64> = zpl.iter().zip(&abs_wing).map(|(z, a)| z + a).collect();
    let area: f64 = values.iter().zip(&w).map(|(v, w)| v * w).sum();
    let values = values.into_iter().map(|v| v * tau / area).collect();
    Ok(Spectrum::from_parts(grid, values, Normalization::Area2Pi))
}
