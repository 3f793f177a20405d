//! Shared physical constants and unit conversions.
//!
//! Energies and rates are in µeV, times in ps, wavelengths in nm. A decay rate
//! `γ` in µeV corresponds to a lifetime `τ = ħ/γ`.

/// Reduced Planck constant in µeV·ps.
pub const HBAR_UEV_PS: f64 = 658.211_956_9;

/// Planck constant times speed of light in µeV·nm.
pub const HC_UEV_NM: f64 = 1_239_841_980.0;

/// Boltzmann constant in µeV/K.
pub const KB_UEV_PER_K: f64 = 86.173_332_621;

/// Photon energy (µeV) of a vacuum wavelength (nm).
pub fn energy_from_wavelength(wavelength_nm: f64) -> f64 {
    HC_UEV_NM / wavelength_nm
}

/// Vacuum wavelength (nm) of a photon energy (µeV).
pub fn wavelength_from_energy(energy_uev: f64) -> f64 {
    HC_UEV_NM / energy_uev
}

/// Rate in µeV for a lifetime in ps.
pub fn rate_from_lifetime(lifetime_ps: f64) -> f64 {
    HBAR_UEV_PS / lifetime_ps
}

/// Lifetime in ps for a rate in µeV.
pub fn lifetime_from_rate(rate_uev: f64) -> f64 {
    HBAR_UEV_PS / rate_uev
}

/// Bose-Einstein occupation of a mode of energy `energy_uev` at `temperature_k`.
///
/// Returns 0 at zero temperature and `+inf` for a zero-energy mode at finite
/// temperature.
pub fn bose_occupation(energy_uev: f64, temperature_k: f64) -> f64 {
    if temperature_k <= 0.0 {
        return 0.0;
    }
    let x = energy_uev / (KB_UEV_PER_K * temperature_k);
    if x <= 0.0 {
        return f64::INFINITY;
    }
    1.0 / x.exp_m1()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn telecom_wavelength_energy() {
        let e = energy_from_wavelength(1275.0);
        assert!((e - 972_425.1).abs() < 0.1, "{e}");
        assert!((wavelength_from_energy(e) - 1275.0).abs() < 1e-9);
    }

    #[test]
    fn lifetime_rate_round_trip() {
        let g = rate_from_lifetime(256.0);
        assert!((g - 2.5711).abs() < 1e-4);
        assert!((lifetime_from_rate(g) - 256.0).abs() < 1e-12);
    }

    #[test]
    fn bose_room_temperature_one_mev() {
        let n = bose_occupation(1000.0, 300.0);
        assert!((n - 25.35).abs() < 0.02, "{n}");
        assert!((n / (n + 1.0) - 0.962).abs() < 5e-4);
        assert_eq!(bose_occupation(1000.0, 0.0), 0.0);
    }
}
