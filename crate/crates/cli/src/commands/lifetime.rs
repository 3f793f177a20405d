//! Biexponential fits of free-space and cavity decays and their long-lifetime ratio.

use pl_core::dynamics::{
    add_poisson_noise, fit_biexponential, simulate_decay, BiexpFit, BiexpModel, DecayTrace, TimeAxis,
};
use pl_core::io::{format_decay, read_decay};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{read_input, Ctx};
use crate::error::{CliError, CliResult};
use crate::svg::{plot, Series};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LifetimeTrial {
    pub free_space: Option<BiexpFit>,
    pub cavity: BiexpFit,
    /// `τ2(free space)/τ2(cavity)`.
    pub tau2_ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LifetimeReport {
    pub synthetic: bool,
    pub true_decay_ratio: Option<f64>,
    pub trials: Vec<LifetimeTrial>,
    pub tau2_ratio_mean: Option<f64>,
    pub tau2_ratio_std: Option<f64>,
}

fn model_curve(fit: &BiexpFit, trace: &DecayTrace) -> Vec<f64> {
    BiexpModel { tau1_ps: fit.tau1_ps, tau2_ps: fit.tau2_ps, a1: fit.a1, a2: fit.a2 }.counts(trace.axis(), trace.irf())
}

pub fn run(ctx: &mut Ctx) -> CliResult<()> {
    let opts = ctx.cfg.analysis.lifetime.clone();
    let gamma = ctx.emitter.gamma_fs_uev;

    // (free space, cavity) traces of the first trial and every trial's fits
    let (traces, trials): ((Option<DecayTrace>, DecayTrace), Vec<LifetimeTrial>) = if opts.synthetic {
        if opts.trials == 0 {
            return Err(CliError::config("lifetime.trials must be >= 1"));
        }
        let axis = TimeAxis::new(opts.start_ps, opts.step_ps, opts.bins)?;
        let clean = |ratio: f64| -> CliResult<DecayTrace> {
            Ok(simulate_decay(gamma, ratio, &opts.weights, &opts.irf, &axis)?.scaled_to_peak(opts.peak_counts)?)
        };
        let (fs_clean, cav_clean) = (clean(1.0)?, clean(opts.decay_ratio)?);
        let realize = |t: u64| -> (DecayTrace, DecayTrace) {
            if opts.poisson_noise {
                (add_poisson_noise(&fs_clean, &mut ctx.rng(2 * t)), add_poisson_noise(&cav_clean, &mut ctx.rng(2 * t + 1)))
            } else {
                (fs_clean.clone(), cav_clean.clone())
            }
        };
        let n = opts.trials as u64;
        let trials = ctx.pool.install(|| {
            (0..n)
                .into_par_iter()
                .map(|t| {
                    let (f, c) = realize(t);
                    fit_pair(Some(&f), &c)
                })
                .collect::<CliResult<Vec<_>>>()
        })?;
        let (f0, c0) = realize(0);
        ((Some(f0), c0), trials)
    } else {
        let input = ctx.cfg.io.input.clone().ok_or_else(|| CliError::config("lifetime: io.input is required unless synthetic"))?;
        let read = |path: &std::path::Path| -> CliResult<DecayTrace> {
            read_decay(&read_input(path)?, opts.irf.clone()).map_err(|e| CliError::from(e).in_file(path))
        };
        let cav = read(&input)?;
        let fs = ctx.cfg.io.reference.clone().map(|p| read(&p)).transpose()?;
        let trial = fit_pair(fs.as_ref(), &cav)?;
        ((fs, cav), vec![trial])
    };

    let (fs, cav) = traces;
    let first = &trials[0];
    let t = cav.times();
    let cav_fit = model_curve(&first.cavity, &cav);
    ctx.write("lifetime_cavity.csv", &format_decay(&cav))?;
    ctx.write("lifetime_cavity_fit.csv", &pl_core::io::format_columns(&pl_core::io::DECAY_HEADER, &[&t, &cav_fit]))?;
    let log = |v: &[f64]| v.iter().map(|&c| if c > 0.0 { c.log10() } else { f64::NAN }).collect::<Vec<_>>();
    let (cav_log, cav_fit_log) = (log(cav.counts()), log(&cav_fit));
    let mut fs_logs = None;
    if let (Some(fs), Some(fit)) = (&fs, &first.free_space) {
        let fs_fit = model_curve(fit, fs);
        ctx.write("lifetime_free_space.csv", &format_decay(fs))?;
        ctx.write(
            "lifetime_free_space_fit.csv",
            &pl_core::io::format_columns(&pl_core::io::DECAY_HEADER, &[&fs.times(), &fs_fit]),
        )?;
        fs_logs = Some((fs.times(), log(fs.counts()), log(&fs_fit)));
    }
    let mut series = vec![Series::points("cavity", &t, &cav_log), Series::line("cavity fit", &t, &cav_fit_log)];
    if let Some((ft, fl, ffl)) = &fs_logs {
        series.push(Series::points("free space", ft, fl));
        series.push(Series::line("free-space fit", ft, ffl));
    }
    ctx.write("lifetime.svg", &plot("Time-resolved photoluminescence", "t (ps)", "log10 counts", &series))?;

    let ratios: Vec<f64> = trials.iter().filter_map(|x| x.tau2_ratio).collect();
    let (mean, std) = if ratios.is_empty() {
        (None, None)
    } else {
        let n = ratios.len() as f64;
        let mean = ratios.iter().sum::<f64>() / n;
        let var = if ratios.len() > 1 { ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
        (Some(mean), Some(var.sqrt()))
    };
    let report = LifetimeReport {
        synthetic: opts.synthetic,
        true_decay_ratio: opts.synthetic.then_some(opts.decay_ratio),
        trials,
        tau2_ratio_mean: mean,
        tau2_ratio_std: std,
    };
    ctx.write_json("lifetime_report.json", &report)?;
    let unconverged = report
        .trials
        .iter()
        .position(|x| !x.cavity.converged || x.free_space.as_ref().is_some_and(|f| !f.converged));
    if let Some(i) = unconverged {
        return Err(CliError::fit(format!("biexponential fit of trial {i} did not converge")));
    }
    Ok(())
}

fn fit_pair(fs: Option<&DecayTrace>, cav: &DecayTrace) -> CliResult<LifetimeTrial> {
    let cavity = fit_biexponential(cav)?;
    let free_space = fs.map(fit_biexponential).transpose()?;
    let tau2_ratio = free_space.as_ref().map(|f| f.tau2_ps / cavity.tau2_ps);
    Ok(LifetimeTrial { free_space, cavity, tau2_ratio })
}
