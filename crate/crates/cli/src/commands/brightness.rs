//! Brightness profile, modulation envelope, inversion and coupling fit per
//! mode order.

use pl_core::cavity::{kappa_from_q, mode_volume_gaussian};
use pl_core::cqed::{
    brightness_profile, fit_g_from_envelope, invert_envelope, modulation_envelope, CouplingParams, GFit,
};
use pl_core::io::{format_spectrum, read_spectrum};
use pl_core::spectra::{build_fs_spectrum, convolve_lorentzian, Normalization, Spectrum};
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{line_fit, read_input, Ctx, LineFit};
use crate::error::{CliError, CliResult};
use crate::svg::{plot, Series};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BrightnessMode {
    pub p: u32,
    pub v_eff_lambda3: f64,
    pub q: f64,
    pub kappa_uev: f64,
    /// Coupling used for synthesis.
    pub g_true_uev: Option<f64>,
    pub fit: GFit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BrightnessReport {
    pub synthetic: bool,
    pub gamma_uev: f64,
    pub noise: f64,
    pub modes: Vec<BrightnessMode>,
    /// `g²` against `1/V`.
    pub g2_vs_inverse_volume: Option<LineFit>,
}

struct ModeOutput {
    mode: BrightnessMode,
    beta: Option<Spectrum>,
    envelope: Spectrum,
    recovered: Option<Spectrum>,
}

pub fn run(ctx: &mut Ctx) -> CliResult<()> {
    let m = ctx.emitter.clone();
    let opts = ctx.cfg.analysis.brightness.clone();
    let cav = ctx.cfg.cavity.clone();
    let gamma = m.gamma_fs_uev;

    let outputs: Vec<ModeOutput> = if opts.synthetic {
        if !(opts.noise >= 0.0 && opts.noise.is_finite()) {
            return Err(CliError::config(format!("brightness.noise = {} must be >= 0", opts.noise)));
        }
        let grid = opts.grid.grid(m.zpl_energy_uev)?;
        let s_fs = build_fs_spectrum(&m, &grid)?;
        let volumes = cav
            .mode_orders
            .iter()
            .map(|&p| mode_volume_gaussian(&cav.geometry(p)))
            .collect::<Result<Vec<_>, _>>()?;
        let v_min = volumes.iter().copied().fold(f64::INFINITY, f64::min);
        let qs = cav
            .mode_orders
            .iter()
            .map(|&p| cav.q_for(p, ctx.fixture.as_ref()).map(|x| x.0))
            .collect::<CliResult<Vec<_>>>()?;
        let rngs: Vec<_> = cav.mode_orders.iter().map(|&p| ctx.rng(p as u64)).collect();
        let jobs: Vec<_> = cav.mode_orders.iter().zip(volumes).zip(qs).zip(rngs).collect();
        ctx.pool.install(|| {
            jobs.into_par_iter()
                .map(|(((&p, v), q), mut rng)| -> CliResult<ModeOutput> {
                    let kappa = kappa_from_q(m.zpl_energy_uev, q)?;
                    let g = opts.g_max_uev * (v_min / v).sqrt();
                    let c = CouplingParams::new(g, gamma, kappa)?;
                    let beta = brightness_profile(&c, &convolve_lorentzian(&s_fs, kappa)?, None)?;
                    let mut env = modulation_envelope(&beta, kappa)?;
                    if opts.noise > 0.0 {
                        let sigma = opts.noise * env.peak().2;
                        if sigma > 0.0 {
                            let d = Normal::new(0.0, sigma).map_err(|e| CliError::config(e.to_string()))?;
                            let vals = env.values().iter().map(|x| (x + d.sample(&mut rng)).max(0.0)).collect();
                            env = Spectrum::new(*env.grid(), vals, Normalization::Raw)?;
                        }
                    }
                    fit_mode(p, v, q, kappa, Some(g), Some(beta), env, &s_fs, gamma)
                })
                .collect::<CliResult<Vec<_>>>()
        })?
    } else {
        let path = ctx
            .cfg
            .io
            .input
            .clone()
            .ok_or_else(|| CliError::config("brightness: io.input is required unless synthetic"))?;
        let env = read_spectrum(&read_input(&path)?, Normalization::Raw).map_err(|e| CliError::from(e).in_file(&path))?;
        let p = match opts.mode_order {
            Some(p) => p,
            None => cav.first_order()?,
        };
        let v = mode_volume_gaussian(&cav.geometry(p))?;
        let q = cav.q_for(p, ctx.fixture.as_ref())?.0;
        let kappa = kappa_from_q(m.zpl_energy_uev, q)?;
        let s_fs = build_fs_spectrum(&m, env.grid())?;
        vec![fit_mode(p, v, q, kappa, None, None, env, &s_fs, gamma)?]
    };

    for o in &outputs {
        let p = o.mode.p;
        if let Some(b) = &o.beta {
            ctx.write(&format!("brightness_beta_p{p}.csv"), &format_spectrum(b))?;
        }
        ctx.write(&format!("brightness_emod_p{p}.csv"), &format_spectrum(&o.envelope))?;
        if let Some(r) = &o.recovered {
            ctx.write(&format!("brightness_recovered_p{p}.csv"), &format_spectrum(r))?;
        }
    }
    let modes: Vec<BrightnessMode> = outputs.into_iter().map(|o| o.mode).collect();
    let inv_v: Vec<f64> = modes.iter().map(|x| 1.0 / x.v_eff_lambda3).collect();
    let g2: Vec<f64> = modes.iter().map(|x| x.fit.g_uev * x.fit.g_uev).collect();
    let lf = line_fit(&inv_v, &g2);
    let mut series = vec![Series::points("fitted g^2", &inv_v, &g2)];
    let line: Vec<f64>;
    if let Some(f) = lf {
        line = inv_v.iter().map(|x| f.slope * x + f.intercept).collect();
        series.push(Series::line("linear fit", &inv_v, &line));
    }
    ctx.write("brightness_g2.svg", &plot("Coupling versus mode volume", "1/V (lambda^-3)", "g^2 (ueV^2)", &series))?;

    let report = BrightnessReport { synthetic: opts.synthetic, gamma_uev: gamma, noise: opts.noise, modes, g2_vs_inverse_volume: lf };
    ctx.write_json("brightness_report.json", &report)?;
    if let Some(bad) = report.modes.iter().find(|x| !x.fit.converged) {
        return Err(CliError::fit(format!("coupling fit for p = {} did not converge", bad.p)));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn fit_mode(
    p: u32,
    v: f64,
    q: f64,
    kappa: f64,
    g_true: Option<f64>,
    beta: Option<Spectrum>,
    envelope: Spectrum,
    s_fs: &Spectrum,
    gamma: f64,
) -> CliResult<ModeOutput> {
    let fit = fit_g_from_envelope(&envelope, s_fs, kappa, gamma)?;
    let recovered = if fit.below_noise_floor { None } else { Some(invert_envelope(&envelope, fit.a, fit.c)?) };
    Ok(ModeOutput {
        mode: BrightnessMode { p, v_eff_lambda3: v, q, kappa_uev: kappa, g_true_uev: g_true, fit },
        beta,
        envelope,
        recovered,
    })
}
