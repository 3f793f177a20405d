//! Weak-coupling cavity QED of a phonon-dressed emitter.
//!
//! The emitter transfers population into the cavity at rate `g²·S̃_emi(ω_cav)`
//! and reabsorbs at `g²·S̃_abs(ω_cav)`, where `S̃ = S ∗ 𝓛_κ` is the free-space
//! spectrum (area 2π) seen through the cavity Lorentzian. The photon yield per
//! excitation is
//!
//! ```text
//! β(ω_cav) = (g²S̃_emi/γ) / (1 + g²S̃_emi/γ + g²S̃_abs/κ)
//! ```
//!
//! and the time-averaged output under cavity-length modulation is `𝓛 ∗ β`.

mod fit;
mod profile;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fit::FitError;
use crate::spectra::SpectrumError;

pub use fit::{fit_g_from_envelope, GFit};
pub use profile::{
    approximation_check, beta_at, brightness_profile, emitted_spectrum, hill_envelope,
    invert_envelope, modulation_envelope, synthetic_envelope, ApproximationCheck,
};

/// Population above which the weak-pump steady state is flagged.
pub const WEAK_PUMP_THRESHOLD: f64 = 0.1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CqedError {
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("decay ratio {0} is below 1")]
    DecayRatioBelowOne(f64),
    #[error("spectra are sampled on different grids")]
    GridMismatch,
    #[error("spectrum must carry area-2pi normalization, found {0}")]
    NotArea2Pi(String),
    #[error("inversion denominator a·(c − E) = {denominator} is not positive at {energy_uev} µeV")]
    InversionDenominator { energy_uev: f64, denominator: f64 },
    #[error("best fit requires a negative coupling parameter a (data narrower than the bare profile)")]
    NegativeCoupling,
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    Fit(#[from] FitError),
}

pub(crate) fn check(name: &'static str, value: f64, ok: bool, reason: &'static str) -> Result<(), CqedError> {
    if ok && !value.is_nan() {
        Ok(())
    } else {
        Err(CqedError::InvalidParameter { name, value, reason })
    }
}

/// Emitter–cavity coupling in energy units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingParams {
    pub g_uev: f64,
    pub gamma_uev: f64,
    pub kappa_uev: f64,
}

impl CouplingParams {
    pub fn new(g_uev: f64, gamma_uev: f64, kappa_uev: f64) -> Result<Self, CqedError> {
        let c = Self {
            g_uev,
            gamma_uev,
            kappa_uev,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn from_a(a: f64, gamma_uev: f64, kappa_uev: f64) -> Result<Self, CqedError> {
        check("a", a, a >= 0.0 && a.is_finite(), "must be finite and >= 0")?;
        Self::new((a * gamma_uev).sqrt(), gamma_uev, kappa_uev)
    }

    pub fn validate(&self) -> Result<(), CqedError> {
        check("g_uev", self.g_uev, self.g_uev >= 0.0 && self.g_uev.is_finite(), "must be finite and >= 0")?;
        check("gamma_uev", self.gamma_uev, self.gamma_uev > 0.0 && self.gamma_uev.is_finite(), "must be > 0")?;
        check("kappa_uev", self.kappa_uev, self.kappa_uev > 0.0 && self.kappa_uev.is_finite(), "must be > 0")?;
        Ok(())
    }

    /// `a = g²/γ`.
    pub fn a(&self) -> f64 {
        self.g_uev * self.g_uev / self.gamma_uev
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PurcellResult {
    pub f_p: f64,
    pub flux_ratio_linear: f64,
    pub flux_ratio_sat: f64,
    pub decay_ratio: f64,
}

/// `F_P = (3/4π²)·Q_eff/V`, with `V` given in `λ³` and converted to `(λ/n)³`.
pub fn purcell_factor(wavelength_nm: f64, n: f64, v_eff_lambda3: f64, q_eff: f64) -> Result<f64, CqedError> {
    check("wavelength_nm", wavelength_nm, wavelength_nm > 0.0 && wavelength_nm.is_finite(), "must be > 0")?;
    check("n", n, n > 0.0 && n.is_finite(), "must be > 0")?;
    check("v_eff", v_eff_lambda3, v_eff_lambda3 > 0.0 && v_eff_lambda3.is_finite(), "must be > 0")?;
    check("q_eff", q_eff, q_eff > 0.0 && q_eff.is_finite(), "must be > 0")?;
    let v = v_eff_lambda3 * n.powi(3);
    Ok(3.0 / (4.0 * std::f64::consts::PI.powi(2)) * q_eff / v)
}

fn check_dw(dw: f64) -> Result<(), CqedError> {
    check("dw", dw, dw > 0.0 && dw <= 1.0, "must lie in (0, 1]")
}

/// Flux and decay ratios between cavity and free space.
pub fn brightening_ratios(dw: f64, f_p: f64, eta_qy: f64) -> Result<PurcellResult, CqedError> {
    check_dw(dw)?;
    check("f_p", f_p, f_p >= 0.0 && f_p.is_finite(), "must be finite and >= 0")?;
    check("eta_qy", eta_qy, (0.0..=1.0).contains(&eta_qy), "must lie in [0, 1]")?;
    let x = dw * f_p;
    let decay = 1.0 + eta_qy * x;
    Ok(PurcellResult {
        f_p,
        flux_ratio_linear: x / decay,
        flux_ratio_sat: x,
        decay_ratio: decay,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FpQy {
    pub f_p: f64,
    pub eta_qy: f64,
}

/// Inverts the saturated flux ratio and the decay ratio.
pub fn solve_fp_and_qy(flux_ratio_sat: f64, decay_ratio: f64, dw: f64) -> Result<FpQy, CqedError> {
    check_dw(dw)?;
    check("flux_ratio_sat", flux_ratio_sat, flux_ratio_sat > 0.0 && flux_ratio_sat.is_finite(), "must be > 0")?;
    if !(decay_ratio >= 1.0 && decay_ratio.is_finite()) {
        return Err(CqedError::DecayRatioBelowOne(decay_ratio));
    }
    let f_p = flux_ratio_sat / dw;
    Ok(FpQy {
        f_p,
        eta_qy: (decay_ratio - 1.0) / (dw * f_p),
    })
}

/// `g = ½·√(γ*·Δγ/DW)`.
pub fn g_from_lifetime(gamma_star: f64, delta_gamma: f64, dw: f64) -> Result<f64, CqedError> {
    check("gamma_star", gamma_star, gamma_star > 0.0 && gamma_star.is_finite(), "must be > 0")?;
    check("delta_gamma", delta_gamma, delta_gamma > 0.0 && delta_gamma.is_finite(), "must be > 0")?;
    check_dw(dw)?;
    Ok(0.5 * (gamma_star * delta_gamma / dw).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SteadyState {
    pub exciton_population: f64,
    pub photon_number: f64,
    /// Both populations stay below [`WEAK_PUMP_THRESHOLD`].
    pub weak_pump: bool,
}

/// Solves
///
/// ```text
/// 0 = p − (γ + g²S_e)·n_x + g²S_a·n_a
/// 0 = g²S_e·n_x − (κ + g²S_a)·n_a
/// ```
pub fn steady_state(
    pump_rate: f64,
    coupling: &CouplingParams,
    s_emi_tilde_at: f64,
    s_abs_tilde_at: f64,
) -> Result<SteadyState, CqedError> {
    coupling.validate()?;
    check("pump_rate", pump_rate, pump_rate >= 0.0 && pump_rate.is_finite(), "must be finite and >= 0")?;
    check("s_emi_tilde_at", s_emi_tilde_at, s_emi_tilde_at >= 0.0 && s_emi_tilde_at.is_finite(), "must be >= 0")?;
    check("s_abs_tilde_at", s_abs_tilde_at, s_abs_tilde_at >= 0.0 && s_abs_tilde_at.is_finite(), "must be >= 0")?;
    let g2 = coupling.g_uev * coupling.g_uev;
    let ge = g2 * s_emi_tilde_at;
    let ga = g2 * s_abs_tilde_at;
    let (m11, m12) = (coupling.gamma_uev + ge, -ga);
    let (m21, m22) = (-ge, coupling.kappa_uev + ga);
    let det = m11 * m22 - m12 * m21;
    let n_x = pump_rate * m22 / det;
    let n_a = -pump_rate * m21 / det;
    Ok(SteadyState {
        exciton_population: n_x,
        photon_number: n_a,
        weak_pump: n_x <= WEAK_PUMP_THRESHOLD && n_a <= WEAK_PUMP_THRESHOLD,
    })
}
