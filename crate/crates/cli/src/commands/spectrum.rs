//! Free-space, emission and absorption spectra.

use pl_core::cavity::kappa_from_q;
use pl_core::io::{format_columns, format_spectrum};
use pl_core::spectra::{
    absorption_spectrum, build_fs_spectrum, convolve_lorentzian, debye_waller_about, fs_components, EnergyGrid,
};
use serde::{Deserialize, Serialize};

use super::Ctx;
use crate::config::QSource;
use crate::error::CliResult;
use crate::svg::{plot, Series};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub mode_order: u32,
    pub q: f64,
    pub q_source: QSource,
    pub kappa_uev: f64,
    pub zpl_energy_uev: f64,
    pub grid_start_uev: f64,
    pub grid_step_uev: f64,
    pub grid_len: usize,
    /// Integral of the free-space spectrum over 2π.
    pub fs_area_over_2pi: f64,
    pub debye_waller_input: f64,
    /// Fraction within 5 ZPL widths of the ZPL, when the window fits the grid.
    pub debye_waller_measured: Option<f64>,
    pub emi_tilde_peak: f64,
    pub abs_tilde_peak: f64,
}

pub fn run(ctx: &mut Ctx) -> CliResult<()> {
    let m = ctx.emitter.clone();
    let opts = ctx.cfg.analysis.spectrum.clone();
    let p = match opts.mode_order {
        Some(p) => p,
        None => ctx.cfg.cavity.first_order()?,
    };
    let (q, q_source) = ctx.cfg.cavity.q_for(p, ctx.fixture.as_ref())?;
    let kappa = kappa_from_q(m.zpl_energy_uev, q)?;
    let grid: EnergyGrid = opts.grid.grid(m.zpl_energy_uev)?;

    let comps = fs_components(&m, &grid)?;
    let s_fs = build_fs_spectrum(&m, &grid)?;
    let s_abs = absorption_spectrum(&s_fs, &m)?;
    let emi = convolve_lorentzian(&s_fs, kappa)?;
    let abs = convolve_lorentzian(&s_abs, kappa)?;

    let energies = grid.energies();
    let sideband: Vec<f64> = comps.red_wing.iter().zip(&comps.blue_wing).map(|(r, b)| r + b).collect();
    ctx.write("spectrum_fs.csv", &format_spectrum(&s_fs))?;
    ctx.write("spectrum_emi_tilde.csv", &format_spectrum(&emi))?;
    ctx.write("spectrum_abs_tilde.csv", &format_spectrum(&abs))?;
    ctx.write(
        "spectrum_components.csv",
        &format_columns(&["energy_ueV", "zpl", "sideband"], &[&energies, &comps.zpl, &sideband]),
    )?;

    let detuning: Vec<f64> = energies.iter().map(|e| e - m.zpl_energy_uev).collect();
    let svg = plot(
        "Free-space emitter spectrum",
        "E - E0 (ueV)",
        "S (1/ueV)",
        &[
            Series::line("zpl", &detuning, &comps.zpl),
            Series::line("sideband", &detuning, &sideband),
            Series::line("S_emi (cavity)", &detuning, emi.values()),
            Series::line("S_abs (cavity)", &detuning, abs.values()),
        ],
    );
    ctx.write("spectrum.svg", &svg)?;

    let report = SpectrumReport {
        mode_order: p,
        q,
        q_source,
        kappa_uev: kappa,
        zpl_energy_uev: m.zpl_energy_uev,
        grid_start_uev: grid.start(),
        grid_step_uev: grid.step(),
        grid_len: grid.len(),
        fs_area_over_2pi: s_fs.integral() / std::f64::consts::TAU,
        debye_waller_input: m.debye_waller,
        debye_waller_measured: debye_waller_about(&s_fs, m.zpl_energy_uev, 5.0 * m.zpl_fwhm_uev).ok(),
        emi_tilde_peak: emi.peak().2,
        abs_tilde_peak: abs.peak().2,
    };
    ctx.write_json("spectrum_report.json", &report)
}
