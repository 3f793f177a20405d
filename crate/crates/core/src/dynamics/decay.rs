//! Biexponential decays seen through the instrument response.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::{check, exp_gauss, DynamicsError, Irf, TimeAxis, FWHM_TO_SIGMA};
use crate::fit::{levenberg_marquardt, LmOptions};
use crate::units::lifetime_from_rate;

/// `a1·exp(−t/τ1) + a2·exp(−t/τ2)` for `t ≥ 0`, amplitudes in counts per bin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiexpModel {
    pub tau1_ps: f64,
    pub tau2_ps: f64,
    pub a1: f64,
    pub a2: f64,
}

impl BiexpModel {
    pub fn long_weight(&self) -> f64 {
        let (s, l) = (self.a1 * self.tau1_ps, self.a2 * self.tau2_ps);
        if s + l > 0.0 {
            l / (s + l)
        } else {
            0.0
        }
    }

    /// Expected counts on `axis` after convolution with `irf`.
    pub fn counts(&self, axis: &TimeAxis, irf: &Irf) -> Vec<f64> {
        let comps = [(self.a1, self.tau1_ps), (self.a2, self.tau2_ps)];
        match irf {
            Irf::Gaussian { fwhm_ps } => {
                let sigma = fwhm_ps * FWHM_TO_SIGMA;
                (0..axis.len)
                    .map(|i| {
                        let t = axis.time(i);
                        comps.iter().map(|&(a, tau)| a * exp_gauss(t, tau, sigma)).sum()
                    })
                    .collect()
            }
            Irf::Tabulated { .. } => {
                let nodes = irf.nodes();
                (0..axis.len)
                    .map(|i| {
                        let t = axis.time(i);
                        nodes
                            .iter()
                            .map(|&(s, w)| {
                                let dt = t - s;
                                // half weight on the step edge, as for the ideal detector
                                let edge = if dt > 0.0 { 1.0 } else if dt == 0.0 { 0.5 } else { 0.0 };
                                edge * w * comps.iter().map(|&(a, tau)| a * (-dt.max(0.0) / tau).exp()).sum::<f64>()
                            })
                            .sum()
                    })
                    .collect()
            }
        }
    }
}

/// Time-binned photon counts with the instrument response they were taken with.
#[derive(Clone, Debug, PartialEq)]
pub struct DecayTrace {
    axis: TimeAxis,
    counts: Vec<f64>,
    irf: Irf,
}

impl DecayTrace {
    pub fn new(axis: TimeAxis, counts: Vec<f64>, irf: Irf) -> Result<Self, DynamicsError> {
        if counts.len() != axis.len {
            return Err(DynamicsError::Mismatch(format!(
                "{} counts for {} time bins",
                counts.len(),
                axis.len
            )));
        }
        if let Some((index, &value)) = counts.iter().enumerate().find(|(_, c)| !(c.is_finite() && **c >= 0.0)) {
            return Err(DynamicsError::BadCount { index, value });
        }
        irf.validate()?;
        Ok(Self { axis, counts, irf })
    }

    pub fn from_samples(times: &[f64], counts: Vec<f64>, irf: Irf) -> Result<Self, DynamicsError> {
        Self::new(TimeAxis::from_times(times)?, counts, irf)
    }

    pub fn axis(&self) -> &TimeAxis {
        &self.axis
    }

    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    pub fn irf(&self) -> &Irf {
        &self.irf
    }

    pub fn times(&self) -> Vec<f64> {
        self.axis.times()
    }

    pub fn peak(&self) -> f64 {
        self.counts.iter().copied().fold(0.0, f64::max)
    }

    pub fn total(&self) -> f64 {
        self.counts.iter().sum()
    }

    /// Same shape rescaled to the given peak count.
    pub fn scaled_to_peak(&self, peak: f64) -> Result<Self, DynamicsError> {
        let m = self.peak();
        if !(m > 0.0) {
            return Err(DynamicsError::NoSignal);
        }
        Ok(Self {
            axis: self.axis,
            counts: self.counts.iter().map(|c| c * peak / m).collect(),
            irf: self.irf.clone(),
        })
    }
}

/// Draws Poisson counts around the expected values of `trace`.
pub fn add_poisson_noise<R: Rng + ?Sized>(trace: &DecayTrace, rng: &mut R) -> DecayTrace {
    let counts = trace
        .counts
        .iter()
        .map(|&mu| match Poisson::new(mu) {
            Ok(d) => d.sample(rng),
            Err(_) => 0.0,
        })
        .collect();
    DecayTrace {
        axis: trace.axis,
        counts,
        irf: trace.irf.clone(),
    }
}

/// Short component and amplitudes; the long lifetime follows from the decay rate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayWeights {
    pub tau_short_ps: f64,
    pub a_short: f64,
    pub a_long: f64,
}

impl DecayWeights {
    /// τ1 = 23 ps, A1 = 2, A2 = 1.
    pub fn device_default() -> Self {
        Self {
            tau_short_ps: 23.0,
            a_short: 2.0,
            a_long: 1.0,
        }
    }
}

/// Expected counts for a long lifetime `ħ/γ_fs` shortened by `decay_ratio`.
pub fn simulate_decay(
    gamma_fs_uev: f64,
    decay_ratio: f64,
    weights: &DecayWeights,
    irf: &Irf,
    axis: &TimeAxis,
) -> Result<DecayTrace, DynamicsError> {
    check("gamma_fs_uev", gamma_fs_uev, gamma_fs_uev > 0.0 && gamma_fs_uev.is_finite(), "must be > 0")?;
    check("decay_ratio", decay_ratio, decay_ratio > 0.0 && decay_ratio.is_finite(), "must be > 0")?;
    check("tau_short_ps", weights.tau_short_ps, weights.tau_short_ps > 0.0, "must be > 0")?;
    check("a_short", weights.a_short, weights.a_short >= 0.0, "must be >= 0")?;
    check("a_long", weights.a_long, weights.a_long >= 0.0, "must be >= 0")?;
    irf.validate()?;
    let tau2 = lifetime_from_rate(gamma_fs_uev) / decay_ratio;
    let span = axis.end_ps() - axis.start_ps.max(0.0);
    if span < 5.0 * tau2 {
        return Err(DynamicsError::GridTooShort {
            span_ps: span,
            needed_ps: 5.0 * tau2,
        });
    }
    let model = BiexpModel {
        tau1_ps: weights.tau_short_ps,
        tau2_ps: tau2,
        a1: weights.a_short,
        a2: weights.a_long,
    };
    DecayTrace::new(*axis, model.counts(axis, irf), irf.clone())
}

/// Fitted decay. When the two lifetimes merge or the short weight vanishes
/// the fit collapses to one exponential: `tau1 = tau2`, `a1 = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiexpFit {
    pub tau1_ps: f64,
    pub tau2_ps: f64,
    pub a1: f64,
    pub a2: f64,
    pub long_weight: f64,
    pub sigma_tau1_ps: f64,
    pub sigma_tau2_ps: f64,
    pub sigma_a1: f64,
    pub sigma_a2: f64,
    pub reduced_chi2: f64,
    pub iterations: usize,
    pub converged: bool,
    pub collapsed: bool,
}

/// Minimum number of bins accepted by [`fit_biexponential`].
pub const MIN_BINS: usize = 50;

fn weighted(counts: &[f64]) -> Vec<f64> {
    counts.iter().map(|c| 1.0 / c.max(1.0).sqrt()).collect()
}

/// Log-linear regression of the tail for a starting long lifetime and amplitude.
fn tail_guess(trace: &DecayTrace) -> (f64, f64) {
    let c = trace.counts();
    let ip = c.iter().enumerate().fold(0, |b, (i, &v)| if v > c[b] { i } else { b });
    let t_peak = trace.axis.time(ip);
    let t_end = trace.axis.end_ps();
    let floor = (c[ip] * 1e-3).max(5.0);
    let t_from = t_peak + 0.3 * (t_end - t_peak);
    let pts: Vec<(f64, f64, f64)> = (ip..c.len())
        .filter(|&i| trace.axis.time(i) >= t_from && c[i] >= floor)
        .map(|i| (trace.axis.time(i), c[i].ln(), c[i]))
        .collect();
    let fallback = ((t_end - t_peak) / 5.0, c[ip] / 2.0);
    if pts.len() < 5 {
        return fallback;
    }
    let sw: f64 = pts.iter().map(|p| p.2).sum();
    let mt = pts.iter().map(|p| p.2 * p.0).sum::<f64>() / sw;
    let my = pts.iter().map(|p| p.2 * p.1).sum::<f64>() / sw;
    let stt: f64 = pts.iter().map(|p| p.2 * (p.0 - mt).powi(2)).sum();
    let sty: f64 = pts.iter().map(|p| p.2 * (p.0 - mt) * (p.1 - my)).sum();
    let slope = sty / stt;
    if !(slope < 0.0) {
        return fallback;
    }
    let tau = -1.0 / slope;
    let amp = (my - slope * mt).exp();
    (tau, amp.min(c[ip] * 10.0))
}

/// Poisson-weighted least-squares fit of the IRF-convolved biexponential.
pub fn fit_biexponential(trace: &DecayTrace) -> Result<BiexpFit, DynamicsError> {
    fit_biexponential_with(trace, &LmOptions::default())
}

pub fn fit_biexponential_with(trace: &DecayTrace, opts: &LmOptions) -> Result<BiexpFit, DynamicsError> {
    if trace.axis.len < MIN_BINS {
        return Err(DynamicsError::TooFewBins {
            needed: MIN_BINS,
            got: trace.axis.len,
        });
    }
    let cmax = trace.peak();
    if !(cmax > 0.0) {
        return Err(DynamicsError::NoSignal);
    }
    let w = weighted(trace.counts());
    let axis = trace.axis;
    let irf = trace.irf.clone();
    let counts = trace.counts.clone();
    let resid = |m: BiexpModel| -> Vec<f64> {
        m.counts(&axis, &irf)
            .iter()
            .zip(&counts)
            .zip(&w)
            .map(|((m, c), w)| (m - c) * w)
            .collect()
    };
    let bi = |p: &[f64]| {
        resid(BiexpModel {
            tau1_ps: p[0].exp(),
            tau2_ps: p[1].exp(),
            a1: p[2].exp(),
            a2: p[3].exp(),
        })
    };

    let (tau2_0, a2_0) = tail_guess(trace);
    let mut best = None;
    for ratio in [3.0, 10.0, 30.0] {
        let tau1_0 = tau2_0 / ratio;
        let a1_0 = (cmax - a2_0).max(0.1 * cmax);
        let p0 = [tau1_0.ln(), tau2_0.ln(), a1_0.ln(), a2_0.max(1e-3 * cmax).ln()];
        let rep = levenberg_marquardt(bi, &p0, opts)?;
        if best.as_ref().map_or(true, |b: &crate::fit::LmReport| rep.chi2 < b.chi2) {
            best = Some(rep);
        }
    }
    let rep = best.expect("at least one start");
    let mut m = BiexpModel {
        tau1_ps: rep.params[0].exp(),
        tau2_ps: rep.params[1].exp(),
        a1: rep.params[2].exp(),
        a2: rep.params[3].exp(),
    };
    let mut sig = [
        m.tau1_ps * rep.sigma[0],
        m.tau2_ps * rep.sigma[1],
        m.a1 * rep.sigma[2],
        m.a2 * rep.sigma[3],
    ];
    if m.tau1_ps > m.tau2_ps {
        m = BiexpModel {
            tau1_ps: m.tau2_ps,
            tau2_ps: m.tau1_ps,
            a1: m.a2,
            a2: m.a1,
        };
        sig = [sig[1], sig[0], sig[3], sig[2]];
    }
    let short_weight = 1.0 - m.long_weight();
    if (m.tau2_ps - m.tau1_ps).abs() / m.tau2_ps >= 0.05 && short_weight >= 1e-3 {
        return Ok(BiexpFit {
            tau1_ps: m.tau1_ps,
            tau2_ps: m.tau2_ps,
            a1: m.a1,
            a2: m.a2,
            long_weight: m.long_weight(),
            sigma_tau1_ps: sig[0],
            sigma_tau2_ps: sig[1],
            sigma_a1: sig[2],
            sigma_a2: sig[3],
            reduced_chi2: rep.reduced_chi2,
            iterations: rep.iterations,
            converged: rep.converged,
            collapsed: false,
        });
    }

    let mono = |p: &[f64]| {
        resid(BiexpModel {
            tau1_ps: p[0].exp(),
            tau2_ps: p[0].exp(),
            a1: 0.0,
            a2: p[1].exp(),
        })
    };
    let rep = levenberg_marquardt(mono, &[m.tau2_ps.ln(), (m.a1 + m.a2).ln()], opts)?;
    let tau = rep.params[0].exp();
    let a = rep.params[1].exp();
    Ok(BiexpFit {
        tau1_ps: tau,
        tau2_ps: tau,
        a1: 0.0,
        a2: a,
        long_weight: 1.0,
        sigma_tau1_ps: tau * rep.sigma[0],
        sigma_tau2_ps: tau * rep.sigma[0],
        sigma_a1: 0.0,
        sigma_a2: a * rep.sigma[1],
        reduced_chi2: rep.reduced_chi2,
        iterations: rep.iterations,
        converged: rep.converged,
        collapsed: true,
    })
}
