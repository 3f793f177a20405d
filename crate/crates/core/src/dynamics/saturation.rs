//! Emission rate versus excitation power.

use serde::{Deserialize, Serialize};

use super::{check, DynamicsError};
use crate::fit::{levenberg_marquardt, LmOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SaturationMode {
    /// `I = I_sat·P/(P + P_sat)`
    Cw,
    /// `I = I_sat·(1 − exp(−P/P_sat))`
    Pulsed,
}

fn rate(p: f64, i_sat: f64, p_sat: f64, mode: SaturationMode) -> f64 {
    match mode {
        SaturationMode::Cw => i_sat * p / (p + p_sat),
        SaturationMode::Pulsed => -i_sat * (-p / p_sat).exp_m1(),
    }
}

pub fn saturation_curve(
    powers: &[f64],
    i_sat: f64,
    p_sat: f64,
    mode: SaturationMode,
) -> Result<Vec<f64>, DynamicsError> {
    check("i_sat", i_sat, i_sat > 0.0 && i_sat.is_finite(), "must be > 0")?;
    check("p_sat", p_sat, p_sat > 0.0 && p_sat.is_finite(), "must be > 0")?;
    for &p in powers {
        check("power", p, p > 0.0 && p.is_finite(), "must be > 0")?;
    }
    Ok(powers.iter().map(|&p| rate(p, i_sat, p_sat, mode)).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaturationFit {
    pub i_sat: f64,
    pub p_sat: f64,
    pub sigma_i_sat: f64,
    pub sigma_p_sat: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Least squares on relative residuals `(model − I)/I`.
pub fn fit_saturation(powers: &[f64], counts: &[f64], mode: SaturationMode) -> Result<SaturationFit, DynamicsError> {
    if powers.len() != counts.len() {
        return Err(DynamicsError::Mismatch(format!(
            "{} powers for {} count rates",
            powers.len(),
            counts.len()
        )));
    }
    if powers.len() < 3 {
        return Err(DynamicsError::TooFewBins {
            needed: 3,
            got: powers.len(),
        });
    }
    for (&p, &c) in powers.iter().zip(counts) {
        check("power", p, p > 0.0 && p.is_finite(), "must be > 0")?;
        check("counts", c, c > 0.0 && c.is_finite(), "must be > 0")?;
    }
    let i0 = counts.iter().copied().fold(0.0, f64::max);
    let p0 = {
        // power at which the count rate first exceeds half the maximum
        let mut order: Vec<usize> = (0..powers.len()).collect();
        order.sort_by(|&a, &b| powers[a].total_cmp(&powers[b]));
        order
            .iter()
            .find(|&&i| counts[i] >= 0.5 * i0)
            .map_or(powers[order[order.len() / 2]], |&i| powers[i])
    };
    let f = |q: &[f64]| {
        let (i_sat, p_sat) = (q[0].exp(), q[1].exp());
        powers
            .iter()
            .zip(counts)
            .map(|(&p, &c)| (rate(p, i_sat, p_sat, mode) - c) / c)
            .collect::<Vec<_>>()
    };
    let rep = levenberg_marquardt(f, &[(1.5 * i0).ln(), p0.ln()], &LmOptions::default())?;
    let (i_sat, p_sat) = (rep.params[0].exp(), rep.params[1].exp());
    Ok(SaturationFit {
        i_sat,
        p_sat,
        sigma_i_sat: i_sat * rep.sigma[0],
        sigma_p_sat: p_sat * rep.sigma[1],
        iterations: rep.iterations,
        converged: rep.converged,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QyEstimate {
    pub eta_qy: f64,
    /// Quantum yield above 1.
    pub unphysical: bool,
}

/// `η_QY = I_sat/(η_coll·f_rep)`.
pub fn qy_from_saturation(i_sat: f64, eta_coll: f64, f_rep_hz: f64) -> Result<QyEstimate, DynamicsError> {
    check("i_sat", i_sat, i_sat > 0.0 && i_sat.is_finite(), "must be > 0")?;
    check("eta_coll", eta_coll, eta_coll > 0.0 && eta_coll.is_finite(), "must be > 0")?;
    check("f_rep_hz", f_rep_hz, f_rep_hz > 0.0 && f_rep_hz.is_finite(), "must be > 0")?;
    let eta_qy = i_sat / (eta_coll * f_rep_hz);
    Ok(QyEstimate {
        eta_qy,
        unphysical: eta_qy > 1.0,
    })
}
