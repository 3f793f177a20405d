//! Three-level intensity correlation and bunching fit.

use pl_core::dynamics::{fit_bunching, g2_correlation, BunchingFit, CwTerms, G2Mode, LevelScheme};
use pl_core::io::{format_g2, read_g2};
use serde::{Deserialize, Serialize};

use super::{read_input, Ctx};
use crate::error::{CliError, CliResult};
use crate::svg::{plot, Series};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct G2Report {
    pub scheme: LevelScheme,
    pub mode: G2Mode,
    pub cw_terms: CwTerms,
    pub g2_zero_raw: f64,
    pub g2_zero_deconvolved: f64,
    pub pulsed_g2_zero: Option<f64>,
    /// Fit of the model trace (cw) or of `io.input` when given.
    pub bunching_fit: Option<BunchingFit>,
}

pub fn run(ctx: &mut Ctx) -> CliResult<()> {
    let opts = ctx.cfg.analysis.g2.clone();
    let scheme = match opts.scheme {
        Some(s) => {
            s.validate()?;
            s
        }
        None => {
            let gamma = ctx.emitter.gamma_fs_uev * opts.decay_ratio;
            LevelScheme::from_bunching(
                gamma,
                opts.pump_fraction * gamma,
                opts.bunching_time_ps,
                opts.bunching_amplitude,
                opts.background,
            )?
        }
    };
    if !(opts.step_ps > 0.0 && opts.half_span_ps >= opts.step_ps) {
        return Err(CliError::config("g2: need step_ps > 0 and half_span_ps >= step_ps"));
    }
    let n = (opts.half_span_ps / opts.step_ps).round() as i64;
    let tau: Vec<f64> = (-n..=n).map(|k| k as f64 * opts.step_ps).collect();
    let trace = g2_correlation(&scheme, opts.mode, &tau, &opts.irf)?;

    let measured = match &ctx.cfg.io.input {
        Some(path) => Some(read_g2(&read_input(path)?).map_err(|e| CliError::from(e).in_file(path))?),
        None => None,
    };
    let bunching_fit = match (&measured, opts.mode) {
        (Some((t, g)), _) => Some(fit_bunching(t, g, opts.fit_tau_min_ps)?),
        (None, G2Mode::Cw) => Some(fit_bunching(&tau, &trace.g2, opts.fit_tau_min_ps)?),
        (None, G2Mode::Pulsed { .. }) => None,
    };

    ctx.write("g2.csv", &format_g2(&tau, &trace.g2))?;
    let mut series = vec![Series::line("model", &tau, &trace.g2)];
    if let Some((t, g)) = &measured {
        series.insert(0, Series::points("data", t, g));
    }
    ctx.write("g2.svg", &plot("Intensity correlation", "tau (ps)", "g2", &series))?;
    let report = G2Report {
        scheme,
        mode: opts.mode,
        cw_terms: scheme.cw_terms(),
        g2_zero_raw: trace.g2_zero_raw,
        g2_zero_deconvolved: trace.g2_zero_deconvolved,
        pulsed_g2_zero: trace.pulsed_g2_zero,
        bunching_fit,
    };
    ctx.write_json("g2_report.json", &report)?;
    if report.bunching_fit.as_ref().is_some_and(|f| !f.converged) {
        return Err(CliError::fit("bunching fit did not converge"));
    }
    Ok(())
}
