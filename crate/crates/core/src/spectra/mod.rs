//! Emitter spectra on uniform energy grids.
//!
//! A [`Spectrum`] is a nonnegative spectral density sampled on an
//! [`EnergyGrid`], tagged with the normalization convention it follows. The
//! cQED rate equations consume spectra normalized to `∫ dω S(ω) = 2π`
//! ([`Normalization::Area2Pi`]), so a Lorentzian of FWHM `Γ` peaks at `4/Γ`.
//!
//! Detuning convention used throughout: `Δ = ω − E₀`, the red (Stokes,
//! phonon-emission) wing lies at `Δ < 0`.

mod absorption;
mod convolve;
mod emitter;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use absorption::absorption_spectrum;
pub use convolve::{convolve_lorentzian, lorentzian, s_tilde_max};
pub use emitter::{
    build_fs_spectrum, debye_waller, debye_waller_about, fs_components, EmitterModel,
    FsComponents, SidebandShape,
};

/// Relative tolerance on grid uniformity.
pub const GRID_UNIFORMITY_TOL: f64 = 1e-9;

/// Relative tolerance on the declared area of a normalized spectrum.
pub const AREA_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectrumError {
    #[error("energy grid needs at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error("energy grid step must be finite and > 0, got {0}")]
    BadStep(f64),
    #[error("energy grid is not uniform at index {index}: {energy} deviates from {expected}")]
    NonUniformGrid {
        index: usize,
        energy: f64,
        expected: f64,
    },
    #[error("energies must be finite and ascending (index {0})")]
    NotAscending(usize),
    #[error("{values} values for a grid of {grid} points")]
    LengthMismatch { grid: usize, values: usize },
    #[error("spectral value at index {index} is negative or not finite: {value}")]
    BadValue { index: usize, value: f64 },
    #[error("declared {normalization} normalization but integral is {integral}")]
    AreaMismatch {
        normalization: Normalization,
        integral: f64,
    },
    #[error("spectrum has zero integral and cannot be normalized")]
    ZeroArea,
    #[error("grid too coarse: step {step} µeV exceeds {limit} µeV ({reason})")]
    GridTooCoarse { step: f64, limit: f64, reason: String },
    #[error("grid too narrow: {reason}")]
    GridTooNarrow { reason: String },
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("ZPL window [{lo}, {hi}] µeV exceeds grid [{grid_lo}, {grid_hi}] µeV")]
    WindowExceedsGrid {
        lo: f64,
        hi: f64,
        grid_lo: f64,
        grid_hi: f64,
    },
    #[error("ZPL window half-width {window} µeV is below 3×FWHM = {min} µeV")]
    WindowTooNarrow { window: f64, min: f64 },
    #[error("spectra are sampled on different grids")]
    GridMismatch,
}

pub(crate) fn check_param(
    name: &'static str,
    value: f64,
    ok: bool,
    reason: &'static str,
) -> Result<(), SpectrumError> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(SpectrumError::InvalidParameter {
            name,
            value,
            reason,
        })
    }
}

/// Normalization convention carried by a [`Spectrum`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Normalization {
    /// Trapezoid integral equals 1.
    #[serde(rename = "area-one")]
    AreaOne,
    /// Trapezoid integral equals 2π.
    #[serde(rename = "area-2pi")]
    Area2Pi,
    /// No normalization implied (counts, dimensionless profiles).
    #[serde(rename = "raw-counts")]
    Raw,
}

impl Normalization {
    /// Target area, if the convention fixes one.
    pub fn target_area(self) -> Option<f64> {
        match self {
            Normalization::AreaOne => Some(1.0),
            Normalization::Area2Pi => Some(std::f64::consts::TAU),
            Normalization::Raw => None,
        }
    }
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Normalization::AreaOne => "area-one",
            Normalization::Area2Pi => "area-2pi",
            Normalization::Raw => "raw-counts",
        })
    }
}

impl FromStr for Normalization {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "area-one" => Ok(Normalization::AreaOne),
            "area-2pi" => Ok(Normalization::Area2Pi),
            "raw-counts" | "raw" => Ok(Normalization::Raw),
            other => Err(format!(
                "unknown normalization '{other}' (expected area-one, area-2pi or raw-counts)"
            )),
        }
    }
}

/// Uniformly spaced energy axis in µeV.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyGrid {
    start: f64,
    step: f64,
    len: usize,
}

impl EnergyGrid {
    pub fn new(start: f64, step: f64, len: usize) -> Result<Self, SpectrumError> {
        if len < 2 {
            return Err(SpectrumError::TooFewPoints(len));
        }
        if !(step.is_finite() && step > 0.0) {
            return Err(SpectrumError::BadStep(step));
        }
        if !start.is_finite() {
            return Err(SpectrumError::NotAscending(0));
        }
        Ok(Self { start, step, len })
    }

    /// Grid of spacing `step` covering `[center − half_span, center + half_span]`
    /// with a point on `center`.
    pub fn centered(center: f64, half_span: f64, step: f64) -> Result<Self, SpectrumError> {
        if !(step.is_finite() && step > 0.0) {
            return Err(SpectrumError::BadStep(step));
        }
        let half = (half_span / step).round();
        if !(half.is_finite() && half >= 1.0) {
            return Err(SpectrumError::TooFewPoints(1));
        }
        let half = half as usize;
        Self::new(center - half as f64 * step, step, 2 * half + 1)
    }

    /// Recovers the grid from sampled energies, checking uniformity.
    pub fn from_energies(energies: &[f64]) -> Result<Self, SpectrumError> {
        let n = energies.len();
        if n < 2 {
            return Err(SpectrumError::TooFewPoints(n));
        }
        for (i, w) in energies.windows(2).enumerate() {
            if !(w[0].is_finite() && w[1].is_finite() && w[1] > w[0]) {
                return Err(SpectrumError::NotAscending(i + 1));
            }
        }
        let first = energies[0];
        let last = energies[n - 1];
        let step = (last - first) / (n - 1) as f64;
        let scale = first.abs().max(last.abs()).max(last - first);
        for (i, &e) in energies.iter().enumerate() {
            let expected = first + i as f64 * step;
            if (e - expected).abs() > GRID_UNIFORMITY_TOL * scale {
                return Err(SpectrumError::NonUniformGrid {
                    index: i,
                    energy: e,
                    expected,
                });
            }
        }
        Self::new(first, step, n)
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn end(&self) -> f64 {
        self.energy(self.len - 1)
    }

    pub fn span(&self) -> f64 {
        self.step * (self.len - 1) as f64
    }

    pub fn energy(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn energies(&self) -> Vec<f64> {
        (0..self.len).map(|i| self.energy(i)).collect()
    }

    /// Trapezoid weights for this grid.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let mut w = vec![self.step; self.len];
        w[0] = 0.5 * self.step;
        w[self.len - 1] = 0.5 * self.step;
        w
    }

    /// Same number of points, spacing and origin (up to grid tolerance).
    pub fn is_compatible(&self, other: &EnergyGrid) -> bool {
        let scale = self.start.abs().max(self.end().abs()).max(self.span());
        self.len == other.len
            && (self.step - other.step).abs() <= GRID_UNIFORMITY_TOL * self.step.max(other.step)
            && (self.start - other.start).abs() <= GRID_UNIFORMITY_TOL * scale
    }
}

/// Spectral density on a uniform grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    grid: EnergyGrid,
    values: Vec<f64>,
    normalization: Normalization,
}

impl Spectrum {
    pub fn new(
        grid: EnergyGrid,
        values: Vec<f64>,
        normalization: Normalization,
    ) -> Result<Self, SpectrumError> {
        if values.len() != grid.len() {
            return Err(SpectrumError::LengthMismatch {
                grid: grid.len(),
                values: values.len(),
            });
        }
        if let Some((index, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(SpectrumError::BadValue { index, value });
        }
        let s = Self {
            grid,
            values,
            normalization,
        };
        if let Some(target) = normalization.target_area() {
            let integral = s.integral();
            if (integral - target).abs() > AREA_TOL * target {
                return Err(SpectrumError::AreaMismatch {
                    normalization,
                    integral,
                });
            }
        }
        Ok(s)
    }

    /// Builds from `(energy, value)` samples, e.g. a loaded CSV.
    pub fn from_samples(
        energies: &[f64],
        values: Vec<f64>,
        normalization: Normalization,
    ) -> Result<Self, SpectrumError> {
        let grid = EnergyGrid::from_energies(energies)?;
        Self::new(grid, values, normalization)
    }

    /// Internal constructor for values produced by area-preserving operations.
    pub(crate) fn from_parts(
        grid: EnergyGrid,
        values: Vec<f64>,
        normalization: Normalization,
    ) -> Self {
        debug_assert_eq!(grid.len(), values.len());
        Self {
            grid,
            values,
            normalization,
        }
    }

    pub fn grid(&self) -> &EnergyGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn energies(&self) -> Vec<f64> {
        self.grid.energies()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Trapezoid integral over the whole grid.
    pub fn integral(&self) -> f64 {
        let w = self.grid.trapezoid_weights();
        self.values.iter().zip(&w).map(|(v, w)| v * w).sum()
    }

    /// Exact integral of the piecewise-linear interpolant over `[lo, hi]`,
    /// clipped to the grid.
    pub fn integral_between(&self, lo: f64, hi: f64) -> f64 {
        let (lo, hi) = (lo.max(self.grid.start()), hi.min(self.grid.end()));
        if hi <= lo {
            return 0.0;
        }
        let h = self.grid.step();
        let mut total = 0.0;
        for i in 0..self.len() - 1 {
            let x0 = self.grid.energy(i);
            let x1 = x0 + h;
            let a = x0.max(lo);
            let b = x1.min(hi);
            if b <= a {
                continue;
            }
            let (y0, y1) = (self.values[i], self.values[i + 1]);
            let at = |x: f64| y0 + (y1 - y0) * (x - x0) / h;
            total += 0.5 * (at(a) + at(b)) * (b - a);
        }
        total
    }

    /// Linear interpolation; zero outside the grid.
    pub fn value_at(&self, energy: f64) -> f64 {
        let f = (energy - self.grid.start()) / self.grid.step();
        if !(f >= 0.0) || f > (self.len() - 1) as f64 {
            return 0.0;
        }
        let i = (f.floor() as usize).min(self.len() - 2);
        let t = f - i as f64;
        self.values[i] * (1.0 - t) + self.values[i + 1] * t
    }

    /// Index, energy and value of the maximum sample.
    pub fn peak(&self) -> (usize, f64, f64) {
        let (i, v) = self
            .values
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
        (i, self.grid.energy(i), v)
    }

    /// Full width at half maximum of the main peak, with linear interpolation
    /// of the crossings. `None` if a crossing falls outside the grid.
    pub fn fwhm(&self) -> Option<f64> {
        let (ip, _, vmax) = self.peak();
        if !(vmax > 0.0) {
            return None;
        }
        let half = 0.5 * vmax;
        let y = &self.values;
        let left = (0..ip).rev().find(|&i| y[i] < half).map(|i| {
            let t = (half - y[i]) / (y[i + 1] - y[i]);
            self.grid.energy(i) + t * self.grid.step()
        })?;
        let right = (ip + 1..y.len()).find(|&i| y[i] < half).map(|i| {
            let t = (y[i - 1] - half) / (y[i - 1] - y[i]);
            self.grid.energy(i - 1) + t * self.grid.step()
        })?;
        Some(right - left)
    }

    /// Copy rescaled to the requested convention (`Raw` only retags).
    pub fn normalized(&self, normalization: Normalization) -> Result<Spectrum, SpectrumError> {
        let values = match normalization.target_area() {
            Some(target) => {
                let area = self.integral();
                if !(area > 0.0) {
                    return Err(SpectrumError::ZeroArea);
                }
                let k = target / area;
                self.values.iter().map(|v| v * k).collect()
            }
            None => self.values.clone(),
        };
        Ok(Spectrum::from_parts(self.grid, values, normalization))
    }

    /// Values divided by their maximum (a raw profile peaking at 1).
    pub fn peak_normalized(&self) -> Result<Spectrum, SpectrumError> {
        let (_, _, m) = self.peak();
        if !(m > 0.0) {
            return Err(SpectrumError::ZeroArea);
        }
        Ok(Spectrum::from_parts(
            self.grid,
            self.values.iter().map(|v| v / m).collect(),
            Normalization::Raw,
        ))
    }

    /// Pointwise product with a constant, tagged raw.
    pub fn scaled(&self, k: f64) -> Spectrum {
        Spectrum::from_parts(
            self.grid,
            self.values.iter().map(|v| v * k).collect(),
            Normalization::Raw,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_from_energies_accepts_uniform_absolute_axis() {
        let g = EnergyGrid::centered(972_425.1, 5000.0, 5.0).unwrap();
        let back = EnergyGrid::from_energies(&g.energies()).unwrap();
        assert!(back.is_compatible(&g));
        assert_eq!(back.len(), 2001);
    }

    #[test]
    fn grid_rejects_nonuniform_and_descending() {
        assert!(matches!(
            EnergyGrid::from_energies(&[0.0, 1.0, 2.5]),
            Err(SpectrumError::NonUniformGrid { .. })
        ));
        assert!(matches!(
            EnergyGrid::from_energies(&[0.0, -1.0]),
            Err(SpectrumError::NotAscending(1))
        ));
        assert!(matches!(
            EnergyGrid::from_energies(&[1.0]),
            Err(SpectrumError::TooFewPoints(1))
        ));
    }

    #[test]
    fn negative_values_and_bad_area_rejected() {
        let g = EnergyGrid::new(0.0, 1.0, 3).unwrap();
        assert!(matches!(
            Spectrum::new(g, vec![0.0, -1.0, 0.0], Normalization::Raw),
            Err(SpectrumError::BadValue { index: 1, .. })
        ));
        assert!(matches!(
            Spectrum::new(g, vec![1.0, 1.0, 1.0], Normalization::Area2Pi),
            Err(SpectrumError::AreaMismatch { .. })
        ));
        assert!(Spectrum::new(g, vec![0.5, 0.5, 0.5], Normalization::AreaOne).is_ok());
    }

    #[test]
    fn integral_between_matches_full_integral_and_partial_cells() {
        let g = EnergyGrid::new(0.0, 1.0, 11).unwrap();
        let s = Spectrum::new(g, (0..11).map(|i| i as f64).collect(), Normalization::Raw).unwrap();
        assert!((s.integral() - 50.0).abs() < 1e-12);
        assert!((s.integral_between(-5.0, 20.0) - 50.0).abs() < 1e-12);
        // ∫_{2.5}^{3.5} x dx = 3
        assert!((s.integral_between(2.5, 3.5) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn fwhm_of_sampled_lorentzian() {
        let g = EnergyGrid::centered(0.0, 4000.0, 1.0).unwrap();
        let v: Vec<f64> = g.energies().iter().map(|&x| lorentzian(x, 100.0)).collect();
        let s = Spectrum::new(g, v, Normalization::Raw).unwrap();
        assert!((s.fwhm().unwrap() - 100.0).abs() < 0.05);
    }

    #[test]
    fn normalization_tags_parse() {
        for n in [Normalization::AreaOne, Normalization::Area2Pi, Normalization::Raw] {
            assert_eq!(n.to_string().parse::<Normalization>().unwrap(), n);
        }
        assert!("bogus".parse::<Normalization>().is_err());
    }
}
