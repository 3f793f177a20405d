//! Extraction of `a = g²/γ` from a measured modulation envelope.

use serde::{Deserialize, Serialize};

use super::{check, CqedError};
use crate::fit::{minimize_scalar, BrentOptions};
use crate::spectra::{convolve_lorentzian, Normalization, Spectrum};

/// Result of [`fit_g_from_envelope`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GFit {
    #[serde(rename = "g_ueV")]
    pub g_uev: f64,
    pub a: f64,
    /// Scale of the envelope in the units of the measured data.
    pub c: f64,
    /// RMS of the normalized-profile residual.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Optimum on the edge of the search range.
    pub at_bound: bool,
    /// Envelope has no positive signal; `g` is reported as 0.
    pub below_noise_floor: bool,
}

/// Ratio of the search bounds to `1/S̃̃_max`.
const A_RANGE: f64 = 1e6;

/// Fits the normalized profile
///
/// ```text
/// E(ω)/max E = (1 + a·S_max)/(a·S_max) · a·S(ω)/(1 + a·S(ω))
/// ```
///
/// with `S = s_fs ∗ 𝓛 ∗ 𝓛` (area 2π) by bounded search over `ln a`.
pub fn fit_g_from_envelope(
    e_mod_measured: &Spectrum,
    s_fs: &Spectrum,
    kappa: f64,
    gamma: f64,
) -> Result<GFit, CqedError> {
    check("kappa", kappa, kappa > 0.0 && kappa.is_finite(), "must be > 0")?;
    check("gamma", gamma, gamma > 0.0 && gamma.is_finite(), "must be > 0")?;
    if !e_mod_measured.grid().is_compatible(s_fs.grid()) {
        return Err(CqedError::GridMismatch);
    }
    let (_, _, e_max) = e_mod_measured.peak();
    if !(e_max > 0.0) {
        return Ok(GFit {
            g_uev: 0.0,
            a: 0.0,
            c: 0.0,
            residual: 0.0,
            iterations: 0,
            converged: true,
            at_bound: false,
            below_noise_floor: true,
        });
    }
    let s_fs = s_fs.normalized(Normalization::Area2Pi)?;
    let stt = convolve_lorentzian(&convolve_lorentzian(&s_fs, kappa)?, kappa)?;
    let s = stt.values();
    let s_max = stt.peak().2;
    let e: Vec<f64> = e_mod_measured.values().iter().map(|v| v / e_max).collect();

    let model = |a: f64, si: f64| {
        let am = a * s_max;
        (1.0 + am) / am * (a * si) / (1.0 + a * si)
    };
    let sse = |ln_a: f64| {
        let a = ln_a.exp();
        e.iter().zip(s).map(|(ei, &si)| (ei - model(a, si)).powi(2)).sum::<f64>()
    };
    let lo = (1.0 / (A_RANGE * s_max)).ln();
    let hi = (A_RANGE / s_max).ln();
    let rep = minimize_scalar(sse, lo, hi, &BrentOptions::default())?;
    let a = rep.x.exp();

    if rep.at_bound && (rep.x - lo).abs() < (rep.x - hi).abs() {
        // small-a expansion: model ≈ S/S_max·(1 + a·(S_max − S))
        let slope: f64 = -2.0
            * e.iter()
                .zip(s)
                .map(|(ei, &si)| {
                    let lin = si / s_max;
                    (ei - lin) * lin * (s_max - si)
                })
                .sum::<f64>();
        let scale: f64 = e.iter().zip(s).map(|(_, &si)| (si / s_max) * (s_max - si)).sum::<f64>();
        if slope > 1e-9 * scale.max(f64::MIN_POSITIVE) {
            return Err(CqedError::NegativeCoupling);
        }
    }

    let am = a * s_max;
    Ok(GFit {
        g_uev: (a * gamma).sqrt(),
        a,
        c: e_max * (1.0 + am) / am,
        residual: (rep.fx / e.len() as f64).sqrt(),
        iterations: rep.iterations,
        converged: rep.converged,
        at_bound: rep.at_bound,
        below_noise_floor: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cqed::{hill_envelope, synthetic_envelope, CouplingParams};
    use crate::spectra::{build_fs_spectrum, EmitterModel, EnergyGrid};
    use crate::units::rate_from_lifetime;

    fn setup() -> (Spectrum, Spectrum, f64, f64) {
        let m = EmitterModel {
            zpl_energy_uev: 0.0,
            ..EmitterModel::device_default()
        };
        let g = EnergyGrid::centered(-2000.0, 12_000.0, 5.0).unwrap();
        let s = build_fs_spectrum(&m, &g).unwrap();
        let kappa = 86.82;
        let stt = convolve_lorentzian(&convolve_lorentzian(&s, kappa).unwrap(), kappa).unwrap();
        (s, stt, kappa, rate_from_lifetime(256.0))
    }

    #[test]
    fn recovers_g_from_hill_forward() {
        let (s, stt, kappa, gamma) = setup();
        for g in [5.0, 25.0] {
            let a = g * g / gamma;
            let e = hill_envelope(&stt, a, 3.0).unwrap();
            let fit = fit_g_from_envelope(&e, &s, kappa, gamma).unwrap();
            assert!(fit.converged);
            assert!((fit.g_uev / g - 1.0).abs() < 1e-3, "{} vs {g}", fit.g_uev);
            assert!((fit.c / 3.0 - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn exact_forward_is_close() {
        let (s, _, kappa, gamma) = setup();
        let c = CouplingParams::new(25.0, gamma, kappa).unwrap();
        let e = synthetic_envelope(&s, &c).unwrap();
        let fit = fit_g_from_envelope(&e, &s, kappa, gamma).unwrap();
        assert!((fit.g_uev / 25.0 - 1.0).abs() < 0.05, "{}", fit.g_uev);
    }

    #[test]
    fn empty_envelope_is_below_noise_floor() {
        let (s, _, kappa, gamma) = setup();
        let e = Spectrum::new(*s.grid(), vec![0.0; s.len()], Normalization::Raw).unwrap();
        let fit = fit_g_from_envelope(&e, &s, kappa, gamma).unwrap();
        assert!(fit.below_noise_floor);
        assert_eq!(fit.g_uev, 0.0);
    }

    #[test]
    fn narrower_than_bare_profile_is_rejected() {
        let (s, stt, kappa, gamma) = setup();
        // S² profile is narrower than S: only a < 0 could fit it
        let v: Vec<f64> = stt.values().iter().map(|x| x * x).collect();
        let e = Spectrum::new(*s.grid(), v, Normalization::Raw).unwrap();
        assert_eq!(
            fit_g_from_envelope(&e, &s, kappa, gamma).unwrap_err(),
            CqedError::NegativeCoupling
        );
    }
}
