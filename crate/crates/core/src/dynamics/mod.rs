//! Time-resolved photoluminescence: IRF-convolved decays and their fits,
//! saturation curves, and intensity correlations of a three-level emitter.
//!
//! Times are in ps. Rates follow the crate convention (µeV, i.e. `ħ/τ`); the
//! conversion happens at the boundary through [`crate::units`].

mod decay;
mod g2;
mod saturation;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fit::FitError;

pub use decay::{
    add_poisson_noise, fit_biexponential, fit_biexponential_with, simulate_decay, BiexpFit, BiexpModel,
    DecayTrace, DecayWeights, MIN_BINS,
};
pub use g2::{
    fit_bunching, g2_correlation, BunchingFit, CwTerms, G2Mode, G2Trace, LevelScheme,
};
pub use saturation::{
    fit_saturation, qy_from_saturation, saturation_curve, QyEstimate, SaturationFit, SaturationMode,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("time grid too short: spans {span_ps} ps, needs {needed_ps} ps (5 × the long lifetime)")]
    GridTooShort { span_ps: f64, needed_ps: f64 },
    #[error("trace needs at least {needed} bins, got {got}")]
    TooFewBins { needed: usize, got: usize },
    #[error("trace has no positive counts")]
    NoSignal,
    #[error("count at bin {index} is negative or not finite: {value}")]
    BadCount { index: usize, value: f64 },
    #[error("tau grid must be symmetric about 0 (index {0})")]
    AsymmetricGrid(usize),
    #[error("{0}")]
    Mismatch(String),
    #[error(transparent)]
    Fit(#[from] FitError),
}

pub(crate) fn check(name: &'static str, value: f64, ok: bool, reason: &'static str) -> Result<(), DynamicsError> {
    if ok && !value.is_nan() {
        Ok(())
    } else {
        Err(DynamicsError::InvalidParameter { name, value, reason })
    }
}

/// Uniform time axis in ps.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeAxis {
    pub start_ps: f64,
    pub step_ps: f64,
    pub len: usize,
}

impl TimeAxis {
    pub fn new(start_ps: f64, step_ps: f64, len: usize) -> Result<Self, DynamicsError> {
        check("start_ps", start_ps, start_ps.is_finite(), "must be finite")?;
        check("step_ps", step_ps, step_ps > 0.0 && step_ps.is_finite(), "must be > 0")?;
        if len < 2 {
            return Err(DynamicsError::TooFewBins { needed: 2, got: len });
        }
        Ok(Self { start_ps, step_ps, len })
    }

    /// Recovers the axis from sampled times, checking uniformity.
    pub fn from_times(times: &[f64]) -> Result<Self, DynamicsError> {
        let n = times.len();
        if n < 2 {
            return Err(DynamicsError::TooFewBins { needed: 2, got: n });
        }
        let step = (times[n - 1] - times[0]) / (n - 1) as f64;
        let scale = times[0].abs().max(times[n - 1].abs()).max(times[n - 1] - times[0]);
        for (i, &t) in times.iter().enumerate() {
            if !t.is_finite() || (t - (times[0] + i as f64 * step)).abs() > 1e-9 * scale {
                return Err(DynamicsError::Mismatch(format!("time bins are not uniform at index {i}")));
            }
        }
        Self::new(times[0], step, n)
    }

    pub fn time(&self, i: usize) -> f64 {
        self.start_ps + i as f64 * self.step_ps
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len).map(|i| self.time(i)).collect()
    }

    pub fn end_ps(&self) -> f64 {
        self.time(self.len - 1)
    }
}

/// Instrument response of the timing chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Irf {
    /// Centered Gaussian; zero width is an ideal detector.
    Gaussian { fwhm_ps: f64 },
    /// Sampled response: `values[j]` at time `start_ps + j·step_ps`. Normalized to unit sum on use.
    Tabulated {
        start_ps: f64,
        step_ps: f64,
        values: Vec<f64>,
    },
}

impl Default for Irf {
    /// 32 ps detector jitter.
    fn default() -> Self {
        Irf::Gaussian { fwhm_ps: 32.0 }
    }
}

/// FWHM to standard deviation of a Gaussian.
pub const FWHM_TO_SIGMA: f64 = 0.424_660_900_144_009_5;

impl Irf {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        match self {
            Irf::Gaussian { fwhm_ps } => check("fwhm_ps", *fwhm_ps, *fwhm_ps >= 0.0 && fwhm_ps.is_finite(), "must be >= 0"),
            Irf::Tabulated { start_ps, step_ps, values } => {
                check("irf.start_ps", *start_ps, start_ps.is_finite(), "must be finite")?;
                check("irf.step_ps", *step_ps, *step_ps > 0.0 && step_ps.is_finite(), "must be > 0")?;
                if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
                    return Err(DynamicsError::BadCount { index, value });
                }
                if !(values.iter().sum::<f64>() > 0.0) {
                    return Err(DynamicsError::NoSignal);
                }
                Ok(())
            }
        }
    }

    /// Quadrature nodes `(offset, weight)` with unit total weight.
    pub(crate) fn nodes(&self) -> Vec<(f64, f64)> {
        match self {
            Irf::Gaussian { fwhm_ps } if *fwhm_ps == 0.0 => vec![(0.0, 1.0)],
            Irf::Gaussian { fwhm_ps } => {
                let sigma = fwhm_ps * FWHM_TO_SIGMA;
                let m = 240;
                let raw: Vec<(f64, f64)> = (0..=m)
                    .map(|k| {
                        let x = -6.0 + 12.0 * k as f64 / m as f64;
                        (x * sigma, (-0.5 * x * x).exp())
                    })
                    .collect();
                let total: f64 = raw.iter().map(|p| p.1).sum();
                raw.into_iter().map(|(x, w)| (x, w / total)).collect()
            }
            Irf::Tabulated { start_ps, step_ps, values } => {
                let total: f64 = values.iter().sum();
                values
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| **v > 0.0)
                    .map(|(j, v)| (start_ps + j as f64 * step_ps, v / total))
                    .collect()
            }
        }
    }
}

/// Scaled complementary error function `exp(x²)·erfc(x)` for `x ≥ 0`.
pub fn erfcx(x: f64) -> f64 {
    if x < 25.0 {
        (x * x).exp() * libm::erfc(x)
    } else {
        let inv = 1.0 / (x * x);
        (1.0 - 0.5 * inv + 0.75 * inv * inv - 1.875 * inv * inv * inv)
            / (x * std::f64::consts::PI.sqrt())
    }
}

/// One-sided exponential `Θ(t)·exp(−t/τ)` convolved with a unit-area
/// Gaussian of standard deviation `sigma`.
pub fn exp_gauss(t: f64, tau: f64, sigma: f64) -> f64 {
    if sigma == 0.0 {
        return if t > 0.0 {
            (-t / tau).exp()
        } else if t == 0.0 {
            0.5
        } else {
            0.0
        };
    }
    let u = (sigma / tau - t / sigma) / std::f64::consts::SQRT_2;
    if u >= 0.0 {
        0.5 * (-0.5 * (t / sigma).powi(2)).exp() * erfcx(u)
    } else {
        0.5 * (0.5 * (sigma / tau).powi(2) - t / tau).exp() * libm::erfc(u)
    }
}
