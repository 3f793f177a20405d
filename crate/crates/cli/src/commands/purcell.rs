//! Mode volumes, Purcell factors and the brightening ratios per mode order.

use pl_core::cavity::{kappa_from_q, mode_volume_gaussian, q_eff};
use pl_core::cqed::{brightening_ratios, g_from_lifetime, purcell_factor, solve_fp_and_qy};
use pl_core::units::lifetime_from_rate;
use serde::{Deserialize, Serialize};

use super::Ctx;
use crate::config::QSource;
use crate::error::CliResult;
use crate::svg::{plot, Series};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PurcellMode {
    pub p: u32,
    pub v_eff_lambda3: f64,
    /// Fixture value, when loaded.
    pub v_eff_table_lambda3: Option<f64>,
    pub q: f64,
    pub q_source: QSource,
    pub q_em: f64,
    pub q_eff: f64,
    pub kappa_uev: f64,
    pub f_p: f64,
    pub flux_ratio_linear: f64,
    pub flux_ratio_sat: f64,
    pub decay_ratio: f64,
}

/// Purcell factor and quantum yield solved from measured ratios.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Solved {
    pub flux_ratio: f64,
    pub decay_ratio: f64,
    pub f_p: f64,
    pub eta_qy: f64,
    /// Coupling implied by the lifetime shortening alone.
    pub g_from_lifetime_uev: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PurcellReport {
    pub wavelength_nm: f64,
    pub debye_waller: f64,
    pub eta_qy: f64,
    pub zpl_fwhm_uev: f64,
    pub lifetime_fs_ps: f64,
    pub modes: Vec<PurcellMode>,
    pub solved: Option<Solved>,
}

pub fn run(ctx: &mut Ctx) -> CliResult<()> {
    let m = ctx.emitter.clone();
    let cav = ctx.cfg.cavity.clone();
    let q_em = m.zpl_energy_uev / m.zpl_fwhm_uev;
    let mut modes = Vec::new();
    for &p in &cav.mode_orders {
        let geom = cav.geometry(p);
        let v = mode_volume_gaussian(&geom)?;
        let (q, q_source) = cav.q_for(p, ctx.fixture.as_ref())?;
        let qe = q_eff(q, q_em)?;
        let f_p = purcell_factor(geom.wavelength_nm, geom.refractive_index, v, qe)?;
        let r = brightening_ratios(m.debye_waller, f_p, m.eta_qy)?;
        modes.push(PurcellMode {
            p,
            v_eff_lambda3: v,
            v_eff_table_lambda3: ctx.fixture.as_ref().and_then(|f| f.mode_row(p)).map(|r| r.v_eff_lambda3),
            q,
            q_source,
            q_em,
            q_eff: qe,
            kappa_uev: kappa_from_q(m.zpl_energy_uev, q)?,
            f_p,
            flux_ratio_linear: r.flux_ratio_linear,
            flux_ratio_sat: r.flux_ratio_sat,
            decay_ratio: r.decay_ratio,
        });
    }

    let opts = &ctx.cfg.analysis.purcell;
    let meas = ctx.fixture.as_ref().map(|f| f.measurements);
    let flux = opts.flux_ratio.or(meas.map(|x| x.flux_ratio));
    let decay = opts.decay_ratio.or(meas.map(|x| x.decay_ratio));
    let solved = match (flux, decay) {
        (Some(flux_ratio), Some(decay_ratio)) => {
            let s = solve_fp_and_qy(flux_ratio, decay_ratio, m.debye_waller)?;
            let delta = m.gamma_fs_uev * (decay_ratio - 1.0);
            Some(Solved {
                flux_ratio,
                decay_ratio,
                f_p: s.f_p,
                eta_qy: s.eta_qy,
                g_from_lifetime_uev: g_from_lifetime(m.zpl_fwhm_uev, delta, m.debye_waller).ok(),
            })
        }
        _ => None,
    };

    let report = PurcellReport {
        wavelength_nm: cav.wavelength_nm,
        debye_waller: m.debye_waller,
        eta_qy: m.eta_qy,
        zpl_fwhm_uev: m.zpl_fwhm_uev,
        lifetime_fs_ps: lifetime_from_rate(m.gamma_fs_uev),
        modes,
        solved,
    };
    let ps: Vec<f64> = report.modes.iter().map(|x| x.p as f64).collect();
    let fp: Vec<f64> = report.modes.iter().map(|x| x.f_p).collect();
    let svg = plot("Purcell factor", "mode order p", "F_P", &[Series::points("F_P", &ps, &fp)]);
    ctx.write("purcell.svg", &svg)?;
    ctx.write_json("purcell_report.json", &report)
}
