//! Saturation curve fit and quantum-yield estimate.

use pl_core::dynamics::{fit_saturation, qy_from_saturation, saturation_curve, QyEstimate, SaturationFit, SaturationMode};
use pl_core::io::{format_saturation, read_saturation};
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{read_input, Ctx};
use crate::error::{CliError, CliResult};
use crate::svg::{plot, Series};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaturationReport {
    pub synthetic: bool,
    pub mode: SaturationMode,
    pub points: usize,
    pub fit: SaturationFit,
    pub eta_coll: Option<f64>,
    pub f_rep_hz: Option<f64>,
    pub quantum_yield: Option<QyEstimate>,
}

pub fn run(ctx: &mut Ctx) -> CliResult<()> {
    let opts = ctx.cfg.analysis.saturation.clone();
    let (powers, counts) = if opts.synthetic {
        let clean = saturation_curve(&opts.powers_uw, opts.i_sat, opts.p_sat_uw, opts.mode)?;
        if !(opts.noise >= 0.0 && opts.noise.is_finite()) {
            return Err(CliError::config(format!("saturation.noise = {} must be >= 0", opts.noise)));
        }
        let mut rng = ctx.rng(0);
        let unit = Normal::new(0.0, 1.0).expect("unit normal");
        let noisy = clean
            .iter()
            .map(|&c| (c * (1.0 + opts.noise * unit.sample(&mut rng))).max(f64::MIN_POSITIVE))
            .collect();
        (opts.powers_uw.clone(), noisy)
    } else {
        let path = ctx.cfg.io.input.clone().ok_or_else(|| CliError::config("saturation: io.input is required unless synthetic"))?;
        read_saturation(&read_input(&path)?).map_err(|e| CliError::from(e).in_file(&path))?
    };

    let fit = fit_saturation(&powers, &counts, opts.mode)?;
    let f_rep = opts.f_rep_hz.or(opts.eta_coll.map(|_| ctx.measurements().f_rep_hz));
    let qy = match (opts.eta_coll, f_rep) {
        (Some(e), Some(f)) => Some(qy_from_saturation(fit.i_sat, e, f)?),
        _ => None,
    };

    let (lo, hi) = powers.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &p| (a.min(p), b.max(p)));
    let dense: Vec<f64> = (0..200).map(|k| lo * (hi / lo).powf(k as f64 / 199.0)).collect();
    let model = saturation_curve(&dense, fit.i_sat, fit.p_sat, opts.mode)?;
    ctx.write("saturation_data.csv", &format_saturation(&powers, &counts))?;
    ctx.write("saturation_fit.csv", &format_saturation(&dense, &model))?;
    ctx.write(
        "saturation.svg",
        &plot(
            "Saturation",
            "P (uW)",
            "counts/s",
            &[Series::points("data", &powers, &counts), Series::line("fit", &dense, &model)],
        ),
    )?;
    let report = SaturationReport {
        synthetic: opts.synthetic,
        mode: opts.mode,
        points: powers.len(),
        fit,
        eta_coll: opts.eta_coll,
        f_rep_hz: f_rep,
        quantum_yield: qy,
    };
    ctx.write_json("saturation_report.json", &report)?;
    if !report.fit.converged {
        return Err(CliError::fit("saturation fit did not converge"));
    }
    Ok(())
}
