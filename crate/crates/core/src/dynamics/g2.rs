//! Second-order correlation of a three-level emitter (ground, bright, dark).
//!
//! Rate equations for the bright and dark populations with `p_G = 1 − p_E − p_D`:
//!
//! ```text
//! d/dt [p_E]   [−(r + γ + k_s)   −r  ] [p_E]   [r]
//!      [p_D] = [      k_s       −k_d ] [p_D] + [0]
//! ```
//!
//! After a detection the emitter is in G, so `g²(τ) = p_E(|τ|)/p_E(∞)` with
//! `p_E(0) = p_D(0) = 0`. Uncorrelated background of fraction `b` gives
//! `g²_meas = 1 + (1 − b)²·(g² − 1)`.

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use super::{check, DynamicsError, Irf};
use crate::fit::{levenberg_marquardt, LmOptions};
use crate::units::{rate_from_lifetime, HBAR_UEV_PS};

/// Rates in µeV.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelScheme {
    pub pump_uev: f64,
    pub gamma_uev: f64,
    pub k_shelve_uev: f64,
    pub k_deshelve_uev: f64,
    /// Uncorrelated background fraction of the detected light.
    #[serde(default)]
    pub background: f64,
}

/// Decomposition `g² = 1 + amp_fast·e^{−λ_fast|τ|} + amp_slow·e^{−λ_slow|τ|}`
/// (emitter only). Real parts are reported when the rates are complex.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CwTerms {
    pub lambda_fast_uev: f64,
    pub lambda_slow_uev: f64,
    pub amp_fast: f64,
    pub amp_slow: f64,
    pub oscillating: bool,
    pub p_excited: f64,
}

impl CwTerms {
    /// `ħ/λ_slow`.
    pub fn bunching_time_ps(&self) -> f64 {
        HBAR_UEV_PS / self.lambda_slow_uev
    }

    /// `ħ/λ_fast`.
    pub fn antibunching_time_ps(&self) -> f64 {
        HBAR_UEV_PS / self.lambda_fast_uev
    }
}

impl LevelScheme {
    /// Scheme whose bunching shoulder has amplitude ≈ `amplitude` and decays
    /// in ≈ `bunching_time_ps`, in the limit of fast antibunching.
    pub fn from_bunching(
        gamma_uev: f64,
        pump_uev: f64,
        bunching_time_ps: f64,
        amplitude: f64,
        background: f64,
    ) -> Result<Self, DynamicsError> {
        check("bunching_time_ps", bunching_time_ps, bunching_time_ps > 0.0, "must be > 0")?;
        check("amplitude", amplitude, amplitude >= 0.0 && amplitude.is_finite(), "must be >= 0")?;
        check("pump_uev", pump_uev, pump_uev > 0.0, "must be > 0")?;
        check("gamma_uev", gamma_uev, gamma_uev > 0.0, "must be > 0")?;
        let q = pump_uev / (pump_uev + gamma_uev);
        let k_d = rate_from_lifetime(bunching_time_ps) / (1.0 + amplitude);
        let s = Self {
            pump_uev,
            gamma_uev,
            k_shelve_uev: amplitude * k_d / q,
            k_deshelve_uev: k_d,
            background,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        check("pump_uev", self.pump_uev, self.pump_uev > 0.0 && self.pump_uev.is_finite(), "must be > 0")?;
        check("gamma_uev", self.gamma_uev, self.gamma_uev > 0.0 && self.gamma_uev.is_finite(), "must be > 0")?;
        check("k_shelve_uev", self.k_shelve_uev, self.k_shelve_uev >= 0.0 && self.k_shelve_uev.is_finite(), "must be >= 0")?;
        check(
            "k_deshelve_uev",
            self.k_deshelve_uev,
            self.k_deshelve_uev >= 0.0 && self.k_deshelve_uev.is_finite(),
            "must be >= 0",
        )?;
        if self.k_shelve_uev > 0.0 && self.k_deshelve_uev == 0.0 {
            return Err(DynamicsError::InvalidParameter {
                name: "k_deshelve_uev",
                value: 0.0,
                reason: "must be > 0 when shelving is enabled",
            });
        }
        check(
            "background",
            self.background,
            (0.0..1.0).contains(&self.background),
            "must lie in [0, 1)",
        )?;
        Ok(())
    }

    /// Steady-state bright-state population.
    pub fn p_excited(&self) -> f64 {
        let (r, g, ks, kd) = self.rates();
        let shelf = if ks > 0.0 { r * ks / kd } else { 0.0 };
        r / (r + g + ks + shelf)
    }

    fn rates(&self) -> (f64, f64, f64, f64) {
        (self.pump_uev, self.gamma_uev, self.k_shelve_uev, self.k_deshelve_uev)
    }

    /// Eigenvalues `μ₁, μ₂` (µeV, `Re μ₁ ≤ Re μ₂`) and coefficients of `p_E(τ) − p`.
    fn modes(&self) -> ([Complex<f64>; 2], [Complex<f64>; 2], f64) {
        let (r, g, ks, kd) = self.rates();
        let tr = -(r + g + ks + kd);
        let det = (r + g + ks) * kd + r * ks;
        let disc = Complex::new(tr * tr - 4.0 * det, 0.0).sqrt();
        let mu1 = (Complex::new(tr, 0.0) - disc) * 0.5;
        let mu2 = (Complex::new(tr, 0.0) + disc) * 0.5;
        let p = self.p_excited();
        let c1 = (Complex::new(r, 0.0) + mu2 * p) / (mu1 - mu2);
        let c2 = Complex::new(-p, 0.0) - c1;
        ([mu1, mu2], [c1, c2], p)
    }

    pub fn cw_terms(&self) -> CwTerms {
        let (mu, c, p) = self.modes();
        CwTerms {
            lambda_fast_uev: -mu[0].re,
            lambda_slow_uev: -mu[1].re,
            amp_fast: c[0].re / p,
            amp_slow: c[1].re / p,
            oscillating: mu[0].im != 0.0,
            p_excited: p,
        }
    }

    /// Emitter-only `g²(τ)`.
    pub fn emitter_g2(&self, tau_ps: f64) -> f64 {
        let (mu, c, p) = self.modes();
        let t = tau_ps.abs() / HBAR_UEV_PS;
        let gap = (mu[0] - mu[1]).norm();
        if gap <= 1e-12 * mu[0].norm() {
            // repeated eigenvalue: p_E − p = (−p + (r + μp)·t)·e^{μt}
            let m = mu[0].re;
            return 1.0 + (-p + (self.pump_uev + m * p) * t) * (m * t).exp() / p;
        }
        let v = c[0] * (mu[0] * t).exp() + c[1] * (mu[1] * t).exp();
        1.0 + v.re / p
    }

    /// `g²` including background, without instrument response.
    pub fn measured_g2(&self, tau_ps: f64) -> f64 {
        let rho = 1.0 - self.background;
        1.0 + rho * rho * (self.emitter_g2(tau_ps) - 1.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum G2Mode {
    Cw,
    /// Pulsed excitation with per-pulse excitation probability.
    Pulsed {
        f_rep_hz: f64,
        excitation_probability: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct G2Trace {
    pub tau_ps: Vec<f64>,
    /// With background and instrument response.
    pub g2: Vec<f64>,
    /// Value at τ = 0 seen through the instrument response.
    pub g2_zero_raw: f64,
    /// Value at τ = 0 with background only.
    pub g2_zero_deconvolved: f64,
    /// Zero-delay peak area over mean side-peak area (pulsed mode).
    pub pulsed_g2_zero: Option<f64>,
}

fn check_symmetric(tau: &[f64]) -> Result<(), DynamicsError> {
    if tau.len() < 3 {
        return Err(DynamicsError::TooFewBins { needed: 3, got: tau.len() });
    }
    let scale = tau.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    for (i, w) in tau.windows(2).enumerate() {
        if !(w[1] > w[0]) {
            return Err(DynamicsError::AsymmetricGrid(i + 1));
        }
    }
    let n = tau.len();
    for i in 0..n / 2 + 1 {
        if (tau[i] + tau[n - 1 - i]).abs() > 1e-9 * scale {
            return Err(DynamicsError::AsymmetricGrid(i));
        }
    }
    Ok(())
}

/// Per-pulse heights `h_k` (k ≥ 0) of the measured pulsed correlation.
fn pulsed_heights(s: &LevelScheme, period_ps: f64, q: f64, kmax: usize) -> Vec<f64> {
    let (_, g, ks, kd) = s.rates();
    let e = g / (g + ks);
    let sh = ks / (g + ks);
    let u = -(-kd * period_ps / HBAR_UEV_PS).exp_m1();
    let gd = q * sh * (1.0 - u);
    let m = [[1.0 - gd, gd], [u, 1.0 - u]];
    let pi_g = if gd + u > 0.0 { u / (gd + u) } else { 1.0 };
    let _ = e;
    let rho = 1.0 - s.background;
    let mut h = vec![1.0 - rho * rho];
    // row vector of the state distribution, starting in G after an emission
    let mut v = [1.0, 0.0];
    for _ in 1..=kmax {
        let ek = v[0] / pi_g;
        h.push(1.0 + rho * rho * (ek - 1.0));
        v = [v[0] * m[0][0] + v[1] * m[1][0], v[0] * m[0][1] + v[1] * m[1][1]];
    }
    h
}

/// `g²(τ)` on a grid symmetric about zero.
pub fn g2_correlation(
    scheme: &LevelScheme,
    mode: G2Mode,
    tau_ps: &[f64],
    irf: &Irf,
) -> Result<G2Trace, DynamicsError> {
    scheme.validate()?;
    irf.validate()?;
    check_symmetric(tau_ps)?;
    let nodes = irf.nodes();
    let smooth = |f: &dyn Fn(f64) -> f64, t: f64| nodes.iter().map(|&(s, w)| w * f(t - s)).sum::<f64>();
    match mode {
        G2Mode::Cw => {
            let f = |t: f64| scheme.measured_g2(t);
            Ok(G2Trace {
                tau_ps: tau_ps.to_vec(),
                g2: tau_ps.iter().map(|&t| smooth(&f, t)).collect(),
                g2_zero_raw: smooth(&f, 0.0),
                g2_zero_deconvolved: scheme.measured_g2(0.0),
                pulsed_g2_zero: None,
            })
        }
        G2Mode::Pulsed {
            f_rep_hz,
            excitation_probability: q,
        } => {
            check("f_rep_hz", f_rep_hz, f_rep_hz > 0.0 && f_rep_hz.is_finite(), "must be > 0")?;
            check("excitation_probability", q, q > 0.0 && q <= 1.0, "must lie in (0, 1]")?;
            let period = 1e12 / f_rep_hz;
            let t_max = tau_ps[tau_ps.len() - 1];
            let kmax = (t_max / period).ceil() as usize + 2;
            let h = pulsed_heights(scheme, period, q, kmax);
            let rate = (scheme.gamma_uev + scheme.k_shelve_uev) / HBAR_UEV_PS;
            let f = |t: f64| {
                let k0 = (t / period).round() as i64;
                (k0 - 2..=k0 + 2)
                    .map(|k| {
                        let hk = h.get(k.unsigned_abs() as usize).copied().unwrap_or(1.0);
                        hk * 0.5 * rate * period * (-rate * (t - k as f64 * period).abs()).exp()
                    })
                    .sum::<f64>()
            };
            let g2: Vec<f64> = tau_ps.iter().map(|&t| smooth(&f, t)).collect();
            let area = |center: f64| -> f64 {
                let (lo, hi) = (center - 0.5 * period, center + 0.5 * period);
                tau_ps
                    .windows(2)
                    .zip(g2.windows(2))
                    .filter(|(t, _)| t[0] >= lo && t[1] <= hi)
                    .map(|(t, y)| 0.5 * (y[0] + y[1]) * (t[1] - t[0]))
                    .sum()
            };
            let n_side = ((t_max - 0.5 * period) / period).floor() as i64;
            let pulsed = if n_side >= 1 {
                let sides: Vec<f64> = (1..=n_side).flat_map(|k| [area(k as f64 * period), area(-k as f64 * period)]).collect();
                let mean = sides.iter().sum::<f64>() / sides.len() as f64;
                Some(area(0.0) / mean)
            } else {
                None
            };
            Ok(G2Trace {
                tau_ps: tau_ps.to_vec(),
                g2,
                g2_zero_raw: smooth(&f, 0.0) / (0.5 * rate * period),
                g2_zero_deconvolved: h[0],
                pulsed_g2_zero: pulsed,
            })
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BunchingFit {
    pub amplitude: f64,
    pub time_ps: f64,
    pub sigma_time_ps: f64,
    pub converged: bool,
}

/// Fits `1 + A·exp(−|τ|/t_b)` to the points with `|τ| ≥ tau_min_ps`.
pub fn fit_bunching(tau_ps: &[f64], g2: &[f64], tau_min_ps: f64) -> Result<BunchingFit, DynamicsError> {
    if tau_ps.len() != g2.len() {
        return Err(DynamicsError::Mismatch(format!("{} delays for {} values", tau_ps.len(), g2.len())));
    }
    let pts: Vec<(f64, f64)> = tau_ps
        .iter()
        .zip(g2)
        .filter(|(t, y)| t.abs() >= tau_min_ps && y.is_finite())
        .map(|(t, y)| (t.abs(), *y))
        .collect();
    if pts.len() < 5 {
        return Err(DynamicsError::TooFewBins { needed: 5, got: pts.len() });
    }
    let (t0, y0) = pts.iter().copied().fold((f64::INFINITY, 1.0), |acc, p| if p.0 < acc.0 { p } else { acc });
    let a0 = (y0 - 1.0).max(1e-3);
    let t_far = pts.iter().fold(0.0f64, |m, p| m.max(p.0));
    let tb0 = pts
        .iter()
        .filter(|p| p.0 > t0 && p.1 - 1.0 < a0 / std::f64::consts::E)
        .map(|p| p.0 - t0)
        .fold(f64::INFINITY, f64::min);
    let tb0 = if tb0.is_finite() { tb0.max(1.0) } else { 0.3 * t_far };
    let f = |p: &[f64]| {
        let tb = p[1].exp();
        pts.iter().map(|&(t, y)| 1.0 + p[0] * (-t / tb).exp() - y).collect::<Vec<_>>()
    };
    let rep = levenberg_marquardt(f, &[a0, tb0.ln()], &LmOptions::default())?;
    let tb = rep.params[1].exp();
    Ok(BunchingFit {
        amplitude: rep.params[0],
        time_ps: tb,
        sigma_time_ps: tb * rep.sigma[1],
        converged: rep.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tau_grid(half: f64, step: f64) -> Vec<f64> {
        let n = (half / step).round() as i64;
        (-n..=n).map(|k| k as f64 * step).collect()
    }

    #[test]
    fn two_level_limits() {
        let s = LevelScheme {
            pump_uev: 0.3,
            gamma_uev: 3.0,
            k_shelve_uev: 0.0,
            k_deshelve_uev: 0.0,
            background: 0.0,
        };
        assert!(s.emitter_g2(0.0).abs() < 1e-14);
        assert!((s.emitter_g2(1e6) - 1.0).abs() < 1e-12);
        // no bunching: monotone approach to 1 from below
        let mut prev = 0.0;
        for k in 1..200 {
            let v = s.emitter_g2(k as f64 * 20.0);
            assert!(v <= 1.0 + 1e-12 && v >= prev - 1e-12);
            prev = v;
        }
        // closed form 1 − exp(−(r+γ)τ/ħ)
        let t = 150.0;
        let exact = 1.0 - (-(3.3) * t / HBAR_UEV_PS).exp();
        assert!((s.emitter_g2(t) - exact).abs() < 1e-12);
    }

    #[test]
    fn background_floor() {
        let s = LevelScheme {
            pump_uev: 0.3,
            gamma_uev: 3.0,
            k_shelve_uev: 0.01,
            k_deshelve_uev: 0.05,
            background: 0.2,
        };
        assert!((s.measured_g2(0.0) - 0.2 * 1.8).abs() < 1e-12);
    }

    #[test]
    fn terms_reconstruct_g2() {
        let s = LevelScheme::from_bunching(3.0, 0.3, 10_000.0, 0.15, 0.0).unwrap();
        let c = s.cw_terms();
        assert!(!c.oscillating);
        assert!((c.amp_fast + c.amp_slow + 1.0).abs() < 1e-12);
        for t in [0.0, 50.0, 500.0, 5000.0, 50_000.0] {
            let x = t / HBAR_UEV_PS;
            let v = 1.0 + c.amp_fast * (-c.lambda_fast_uev * x).exp() + c.amp_slow * (-c.lambda_slow_uev * x).exp();
            assert!((v - s.emitter_g2(t)).abs() < 1e-12);
        }
        assert!((c.bunching_time_ps() / 10_000.0 - 1.0).abs() < 0.05);
        assert!((c.amp_slow / 0.15 - 1.0).abs() < 0.05);
    }

    #[test]
    fn bunching_fit_recovers_slow_term() {
        let s = LevelScheme::from_bunching(3.0, 0.3, 10_000.0, 0.15, 0.0).unwrap();
        let tau = tau_grid(60_000.0, 100.0);
        let tr = g2_correlation(&s, G2Mode::Cw, &tau, &Irf::default()).unwrap();
        let fit = fit_bunching(&tau, &tr.g2, 2_000.0).unwrap();
        let c = s.cw_terms();
        assert!((fit.time_ps / c.bunching_time_ps() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn asymmetric_grid_rejected() {
        let s = LevelScheme::from_bunching(3.0, 0.3, 10_000.0, 0.15, 0.0).unwrap();
        assert!(matches!(
            g2_correlation(&s, G2Mode::Cw, &[-1.0, 0.0, 2.0], &Irf::default()),
            Err(DynamicsError::AsymmetricGrid(_))
        ));
    }

    #[test]
    fn pulsed_two_level_has_flat_side_peaks() {
        let s = LevelScheme {
            pump_uev: 0.3,
            gamma_uev: 3.0,
            k_shelve_uev: 0.0,
            k_deshelve_uev: 0.0,
            background: 0.1,
        };
        let f_rep = 38.26e6;
        let tau = tau_grid(3.0 * 1e12 / f_rep, 5.0);
        let tr = g2_correlation(
            &s,
            G2Mode::Pulsed {
                f_rep_hz: f_rep,
                excitation_probability: 0.5,
            },
            &tau,
            &Irf::default(),
        )
        .unwrap();
        let g0 = tr.pulsed_g2_zero.unwrap();
        assert!((g0 - (1.0 - 0.81)).abs() < 1e-3, "{g0}");
    }
}
