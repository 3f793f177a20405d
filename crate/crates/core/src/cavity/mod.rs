//! Plano-concave Fabry–Pérot micro-cavity.
//!
//! Losses are given in ppm per round trip, except channels flagged
//! `per_pass`, which are crossed twice per round trip (the intracavity
//! polymer layer). Finesse is `2π/L_rt` and `Q = F·p` for longitudinal
//! order `p`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::units::energy_from_wavelength;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CavityError {
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("unstable cavity: length {length_um} µm must be below the radius of curvature {radius_um} µm")]
    Unstable { length_um: f64, radius_um: f64 },
    #[error("total round-trip loss must be > 0")]
    ZeroLoss,
    #[error("loss channel '{name}' is negative or not finite: {ppm} ppm")]
    BadChannel { name: String, ppm: f64 },
    #[error("measured Q {q_measured} must be below theoretical Q {q_theory} to deduce an internal loss")]
    NoExcessLoss { q_measured: f64, q_theory: f64 },
}

fn positive(name: &'static str, value: f64) -> Result<(), CavityError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(CavityError::InvalidParameter {
            name,
            value,
            reason: "must be finite and > 0",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CavityGeometry {
    pub wavelength_nm: f64,
    #[serde(default = "unit_index")]
    pub refractive_index: f64,
    pub radius_of_curvature_um: f64,
    /// Cavity length in units of λ/2.
    pub mode_order: u32,
}

fn unit_index() -> f64 {
    1.0
}

impl CavityGeometry {
    /// λ = 1275 nm, n = 1, R = 10 µm.
    pub fn device_default(mode_order: u32) -> Self {
        Self {
            wavelength_nm: 1275.0,
            refractive_index: 1.0,
            radius_of_curvature_um: 10.0,
            mode_order,
        }
    }

    pub fn length_um(&self) -> f64 {
        self.mode_order as f64 * self.wavelength_nm / 2.0 * 1e-3
    }

    pub fn validate(&self) -> Result<(), CavityError> {
        positive("wavelength_nm", self.wavelength_nm)?;
        positive("refractive_index", self.refractive_index)?;
        positive("radius_of_curvature_um", self.radius_of_curvature_um)?;
        if self.mode_order == 0 {
            return Err(CavityError::InvalidParameter {
                name: "mode_order",
                value: 0.0,
                reason: "must be >= 1",
            });
        }
        if self.length_um() >= self.radius_of_curvature_um {
            return Err(CavityError::Unstable {
                length_um: self.length_um(),
                radius_um: self.radius_of_curvature_um,
            });
        }
        Ok(())
    }
}

/// Gaussian-beam mode volume `(π/4)·w₀²·L`, in units of `(λ/n)³`.
pub fn mode_volume_gaussian(geom: &CavityGeometry) -> Result<f64, CavityError> {
    geom.validate()?;
    let lambda = geom.wavelength_nm;
    let n = geom.refractive_index;
    let l = geom.length_um() * 1e3;
    let r = geom.radius_of_curvature_um * 1e3;
    let w0_sq = lambda / (std::f64::consts::PI * n) * (l * (r - l)).sqrt();
    let v = std::f64::consts::FRAC_PI_4 * w0_sq * l;
    Ok(v / (lambda / n).powi(3))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FreeSpectralRange {
    pub delta_lambda_nm: f64,
    pub delta_energy_uev: f64,
}

/// `Δλ = λ²/(2nL)`, `ΔE = hc/(2nL)`.
pub fn fsr(geom: &CavityGeometry) -> Result<FreeSpectralRange, CavityError> {
    geom.validate()?;
    let two_nl = 2.0 * geom.refractive_index * geom.length_um() * 1e3;
    Ok(FreeSpectralRange {
        delta_lambda_nm: geom.wavelength_nm.powi(2) / two_nl,
        delta_energy_uev: energy_from_wavelength(two_nl),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossChannel {
    pub name: String,
    pub ppm: f64,
    /// Photons lost here reach a collection port.
    #[serde(default)]
    pub useful: bool,
    /// Counted twice per round trip.
    #[serde(default)]
    pub per_pass: bool,
}

impl LossChannel {
    pub fn round_trip_ppm(&self) -> f64 {
        if self.per_pass {
            2.0 * self.ppm
        } else {
            self.ppm
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossBudget {
    pub channels: Vec<LossChannel>,
}

impl LossBudget {
    /// Flat and fiber mirror transmissions are the useful ports.
    pub fn standard(
        t_flat: f64,
        t_fiber: f64,
        internal_per_pass: f64,
        spillout: f64,
        cladding: f64,
    ) -> Self {
        let ch = |name: &str, ppm, useful, per_pass| LossChannel {
            name: name.to_string(),
            ppm,
            useful,
            per_pass,
        };
        Self {
            channels: vec![
                ch("t_flat", t_flat, true, false),
                ch("t_fiber", t_fiber, true, false),
                ch("internal", internal_per_pass, false, true),
                ch("spillout", spillout, false, false),
                ch("cladding", cladding, false, false),
            ],
        }
    }

    pub fn validate(&self) -> Result<(), CavityError> {
        for c in &self.channels {
            if !(c.ppm.is_finite() && c.ppm >= 0.0) {
                return Err(CavityError::BadChannel {
                    name: c.name.clone(),
                    ppm: c.ppm,
                });
            }
        }
        if !(self.round_trip_ppm() > 0.0) {
            return Err(CavityError::ZeroLoss);
        }
        Ok(())
    }

    pub fn round_trip_ppm(&self) -> f64 {
        self.channels.iter().map(LossChannel::round_trip_ppm).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FinesseQ {
    pub finesse: f64,
    pub q: f64,
}

/// `F = 2π/L_rt`, `Q = F·p`.
pub fn q_from_losses(budget: &LossBudget, p: u32) -> Result<FinesseQ, CavityError> {
    budget.validate()?;
    if p == 0 {
        return Err(CavityError::InvalidParameter {
            name: "p",
            value: 0.0,
            reason: "must be >= 1",
        });
    }
    let finesse = std::f64::consts::TAU / (budget.round_trip_ppm() * 1e-6);
    Ok(FinesseQ {
        finesse,
        q: finesse * p as f64,
    })
}

/// Per-pass internal loss in ppm, half of the round-trip excess
/// `2πp(1/Q_meas − 1/Q_th)`.
pub fn internal_loss_from_q(q_measured: f64, q_theory: f64, p: u32) -> Result<f64, CavityError> {
    positive("q_measured", q_measured)?;
    positive("q_theory", q_theory)?;
    if q_measured >= q_theory {
        return Err(CavityError::NoExcessLoss {
            q_measured,
            q_theory,
        });
    }
    let excess = std::f64::consts::TAU * p as f64 * (1.0 / q_measured - 1.0 / q_theory);
    Ok(0.5 * excess * 1e6)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExitProbability {
    pub name: String,
    pub probability: f64,
    pub useful: bool,
}

/// Partition `P_i = L_i/L_rt` over every channel.
pub fn exit_probabilities(budget: &LossBudget) -> Result<Vec<ExitProbability>, CavityError> {
    budget.validate()?;
    let total = budget.round_trip_ppm();
    Ok(budget
        .channels
        .iter()
        .map(|c| ExitProbability {
            name: c.name.clone(),
            probability: c.round_trip_ppm() / total,
            useful: c.useful,
        })
        .collect())
}

/// Harmonic combination `(1/Q_cav + 1/Q_em)⁻¹`.
pub fn q_eff(q_cav: f64, q_em: f64) -> Result<f64, CavityError> {
    positive("q_cav", q_cav)?;
    if !(q_em > 0.0) {
        return Err(CavityError::InvalidParameter {
            name: "q_em",
            value: q_em,
            reason: "must be > 0",
        });
    }
    Ok(1.0 / (1.0 / q_cav + 1.0 / q_em))
}

/// `κ = E/Q`.
pub fn kappa_from_q(energy_uev: f64, q: f64) -> Result<f64, CavityError> {
    positive("energy_uev", energy_uev)?;
    positive("q", q)?;
    Ok(energy_uev / q)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CavityMode {
    pub order: u32,
    pub resonance_energy_uev: f64,
    pub kappa_uev: f64,
    pub q_factor: f64,
    pub finesse: f64,
    pub v_eff_lambda3: f64,
    pub exit_probabilities: Vec<ExitProbability>,
}

impl CavityMode {
    /// Mode with Gaussian volume and Q from the loss budget.
    pub fn from_budget(geom: &CavityGeometry, budget: &LossBudget) -> Result<Self, CavityError> {
        let fq = q_from_losses(budget, geom.mode_order)?;
        let energy = energy_from_wavelength(geom.wavelength_nm);
        Ok(Self {
            order: geom.mode_order,
            resonance_energy_uev: energy,
            kappa_uev: kappa_from_q(energy, fq.q)?,
            q_factor: fq.q,
            finesse: fq.finesse,
            v_eff_lambda3: mode_volume_gaussian(geom)?,
            exit_probabilities: exit_probabilities(budget)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::HC_UEV_NM;

    #[test]
    fn gaussian_volume_p6() {
        // hand evaluation: L = 3825 nm, w0² = (1275/π)·√(3825·6175)
        let l = 3825.0f64;
        let w0_sq = 1275.0 / std::f64::consts::PI * (l * (10_000.0 - l)).sqrt();
        let oracle = std::f64::consts::FRAC_PI_4 * w0_sq * l / 1275.0f64.powi(3);
        let v = mode_volume_gaussian(&CavityGeometry::device_default(6)).unwrap();
        assert!((v - oracle).abs() < 1e-12);
        assert!((v - 2.86).abs() < 0.01);
    }

    #[test]
    fn unstable_geometry_rejected() {
        let g = CavityGeometry::device_default(16); // L = 10.2 µm
        assert!(matches!(mode_volume_gaussian(&g), Err(CavityError::Unstable { .. })));
    }

    #[test]
    fn fsr_values() {
        let f6 = fsr(&CavityGeometry::device_default(6)).unwrap();
        assert!((f6.delta_lambda_nm - 212.5).abs() < 1e-9);
        assert!((f6.delta_energy_uev - HC_UEV_NM / 7650.0).abs() < 1e-9);
        let f12 = fsr(&CavityGeometry {
            radius_of_curvature_um: 100.0,
            ..CavityGeometry::device_default(12)
        })
        .unwrap();
        assert!((f12.delta_lambda_nm - f6.delta_lambda_nm / 2.0).abs() < 1e-9);
    }

    #[test]
    fn finesse_and_q() {
        let b = LossBudget {
            channels: vec![LossChannel {
                name: "x".into(),
                ppm: std::f64::consts::TAU * 1e3,
                useful: true,
                per_pass: false,
            }],
        };
        let fq = q_from_losses(&b, 3).unwrap();
        assert!((fq.finesse - 1000.0).abs() < 1e-9);
        assert!((fq.q - 3000.0).abs() < 1e-9);

        let b = LossBudget::standard(500.0, 300.0, 1283.0, 0.0, 0.0);
        assert!((b.round_trip_ppm() - 3366.0).abs() < 1e-9);
        let q = q_from_losses(&b, 6).unwrap().q;
        assert!((q - std::f64::consts::TAU * 6.0 / 3366e-6).abs() < 1e-6);
        assert!((q - 1.12e4).abs() < 10.0);
        let empty = LossBudget::standard(0.0, 0.0, 0.0, 0.0, 0.0);
        assert_eq!(q_from_losses(&empty, 6), Err(CavityError::ZeroLoss));
    }

    #[test]
    fn internal_loss_table_row() {
        let v = internal_loss_from_q(11_200.0, 56_900.0, 6).unwrap();
        let oracle = std::f64::consts::PI * 6.0 * (1.0 / 11_200.0 - 1.0 / 56_900.0) * 1e6;
        assert!((v - oracle).abs() < 1e-9);
        assert!((v - 1352.0).abs() < 1.0);
        let half = internal_loss_from_q(5000.0, 10_000.0, 4).unwrap();
        assert!((half - std::f64::consts::PI * 4.0 / 10_000.0 * 1e6).abs() < 1e-6);
        assert!(internal_loss_from_q(2.0, 1.0, 6).is_err());
    }

    #[test]
    fn exit_partition() {
        let b = LossBudget::standard(500.0, 300.0, 1352.0, 0.0, 0.0);
        let p = exit_probabilities(&b).unwrap();
        assert!((p[0].probability - 500.0 / 3504.0).abs() < 1e-15);
        assert!((p[0].probability - 0.1427).abs() < 1e-4);
        assert!((p[1].probability - 0.0856).abs() < 1e-4);
        let sum: f64 = p.iter().map(|e| e.probability).sum();
        assert!((sum - 1.0).abs() < 1e-15);
    }

    #[test]
    fn q_eff_and_kappa() {
        assert!((q_eff(1000.0, 1000.0).unwrap() - 500.0).abs() < 1e-12);
        assert_eq!(q_eff(1000.0, f64::INFINITY).unwrap(), 1000.0);
        let e0 = energy_from_wavelength(1275.0);
        let qe = q_eff(11_200.0, e0 / 200.0).unwrap();
        assert!((qe - 3390.0).abs() < 1.0);
        assert!((kappa_from_q(1e4, 1e4).unwrap() - 1.0).abs() < 1e-15);
        assert!((kappa_from_q(e0, 11_200.0).unwrap() - 86.8).abs() < 0.05);
    }

    #[test]
    fn mode_from_budget_is_consistent() {
        let g = CavityGeometry::device_default(6);
        let b = LossBudget::standard(500.0, 300.0, 1283.0, 0.0, 0.0);
        let m = CavityMode::from_budget(&g, &b).unwrap();
        assert!((m.kappa_uev - m.resonance_energy_uev / m.q_factor).abs() < 1e-9 * m.kappa_uev);
        assert!((m.q_factor - m.finesse * 6.0).abs() < 1e-9 * m.q_factor);
        let useful: f64 = m.exit_probabilities.iter().filter(|e| e.useful).map(|e| e.probability).sum();
        assert!(useful <= 1.0);
    }
}
