//! Acceptance criteria, one test each. Every test prints a single
//! `PASS`/`FAIL` line before asserting.

use pl_core::budget::*;
use pl_core::cavity::*;
use pl_core::cqed::*;
use pl_core::dynamics::*;
use pl_core::fixtures::FixtureSet;
use pl_core::spectra::*;
use pl_core::units::{energy_from_wavelength, rate_from_lifetime};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn report(id: u32, name: &str, checks: &[(bool, String)]) {
    let ok = checks.iter().all(|c| c.0);
    let detail: Vec<&str> = checks.iter().map(|c| c.1.as_str()).collect();
    println!("{} criterion {id:>2} {name}: {}", if ok { "PASS" } else { "FAIL" }, detail.join("; "));
    for (pass, what) in checks {
        assert!(pass, "criterion {id}: {what}");
    }
}

fn within(x: f64, lo: f64, hi: f64) -> bool {
    x >= lo && x <= hi
}

#[test]
fn c01_purcell_qy_closure() {
    let s = solve_fp_and_qy(19.0, 1.19, 0.65).unwrap();
    let r = brightening_ratios(0.65, s.f_p, s.eta_qy).unwrap();
    let back = solve_fp_and_qy(r.flux_ratio_sat, r.decay_ratio, 0.65).unwrap();
    report(
        1,
        "Purcell/QY closure",
        &[
            (within(s.f_p, 28.9, 29.5), format!("F_P = {:.3}", s.f_p)),
            (within(s.eta_qy, 0.0095, 0.0105), format!("eta_QY = {:.4}%", 100.0 * s.eta_qy)),
            ((r.flux_ratio_sat - 19.0).abs() < 1e-12 * 19.0, format!("flux ratio back {:.15}", r.flux_ratio_sat)),
            ((r.decay_ratio - 1.19).abs() < 1e-12, format!("decay ratio back {:.15}", r.decay_ratio)),
            ((back.f_p - s.f_p).abs() < 1e-12 * s.f_p && (back.eta_qy - s.eta_qy).abs() < 1e-12 * s.eta_qy, "round trip".into()),
        ],
    );
}

#[test]
fn c02_kappa_over_gamma() {
    let kappa = kappa_from_q(energy_from_wavelength(1275.0), 1.12e4).unwrap();
    let gamma = rate_from_lifetime(256.0);
    let ratio = kappa / gamma;
    report(
        2,
        "kappa/gamma consistency",
        &[(within(ratio, 29.0, 38.0), format!("kappa = {kappa:.2} ueV, gamma = {gamma:.4} ueV, kappa/gamma = {ratio:.2}"))],
    );
}

#[test]
fn c03_internal_loss() {
    let f = FixtureSet::bundled();
    let r = f.mode_row(6).unwrap();
    let l = internal_loss_from_q(r.q_exp, r.q_th, 6).unwrap();
    report(3, "internal-loss deduction", &[(within(l, 1250.0, 1450.0), format!("{l:.1} ppm per pass"))]);
}

#[test]
fn c04_mode_volume() {
    let f = FixtureSet::bundled();
    let mut checks = Vec::new();
    let mut prev = 0.0;
    for p in 6..=9 {
        let v = mode_volume_gaussian(&CavityGeometry::device_default(p)).unwrap();
        let table = f.mode_row(p).unwrap().v_eff_lambda3;
        let rel = (v - table).abs() / table;
        checks.push((rel <= 0.25, format!("p={p}: {v:.3} vs {table} ({:.1}%)", 100.0 * rel)));
        checks.push((v > prev, format!("p={p} increasing")));
        prev = v;
    }
    report(4, "Gaussian mode volume", &checks);
}

#[test]
fn c05_budget_arithmetic() {
    let f = FixtureSet::bundled();
    let pct = |c: &EfficiencyChain| 100.0 * chain_efficiency(c).unwrap();
    let fs = pct(&f.summary.full_chain(OpticalPath::FreeSpace).unwrap());
    let planar = pct(&f.summary.full_chain(OpticalPath::CavityPlanar).unwrap());
    let fiber = pct(&f.summary.full_chain(OpticalPath::CavityFiber).unwrap());
    let ratio = f.summary.overall(OpticalPath::CavityFiber) / f.summary.overall(OpticalPath::CavityPlanar);
    let ppc = photons_per_count(&f.stages.path_chain(OpticalPath::CavityPlanar).unwrap()).unwrap();
    let m = f.measurements;
    let flux = fiber_flux_from_ccd(m.ccd_rate_at_saturation, m.fiber_photons_per_ccd_count).unwrap();
    report(
        5,
        "budget arithmetic",
        &[
            ((fs - 0.66).abs() <= 0.01, format!("free-space {fs:.4}% vs 0.66%")),
            ((planar - 0.135).abs() <= 0.001, format!("planar {planar:.4}% vs 0.135%")),
            ((fiber - 0.90).abs() <= 0.01, format!("fiber {fiber:.4}% vs 0.90%")),
            (
                (ratio - m.port_ratio).abs() <= m.port_ratio_err,
                format!("port ratio {ratio:.3} vs {}±{}", m.port_ratio, m.port_ratio_err),
            ),
            (ppc.round() == 41.0, format!("photons/count {ppc:.2} vs 41")),
            ((flux / 2.1e7 - 1.0).abs() <= 0.02, format!("fiber flux {flux:.3e} vs 2.1e7")),
        ],
    );
}

fn device_like() -> (Spectrum, f64, f64) {
    let m = EmitterModel {
        zpl_energy_uev: 0.0,
        ..EmitterModel::device_default()
    };
    let g = EnergyGrid::centered(-2000.0, 12_000.0, 5.0).unwrap();
    let kappa = kappa_from_q(energy_from_wavelength(1275.0), 1.12e4).unwrap();
    (build_fs_spectrum(&m, &g).unwrap(), kappa, m.gamma_fs_uev)
}

#[test]
fn c06_envelope_inversion() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let n = rng.random_range(10..200);
        let g = EnergyGrid::new(0.0, 1.0, n).unwrap();
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1e-2)).collect();
        let s = Spectrum::new(g, v, Normalization::Raw).unwrap();
        let a = rng.random_range(1.0..1e4);
        let c = rng.random_range(0.1..10.0);
        let back = invert_envelope(&hill_envelope(&s, a, c).unwrap(), a, c).unwrap();
        for (x, y) in s.values().iter().zip(back.values()) {
            worst = worst.max((x - y).abs() / x.abs().max(1e-300));
        }
    }
    let (s, kappa, gamma) = device_like();
    let ch = approximation_check(&s, None, &CouplingParams::new(25.0, gamma, kappa).unwrap()).unwrap();
    report(
        6,
        "envelope inversion",
        &[
            (worst <= 1e-12, format!("max relative inversion error {worst:.2e}")),
            (
                ch.std_area_normalized < 5e-5,
                format!(
                    "approximation std {:.2e} (unit area), {:.2e} (unit peak), stretch {:.3}",
                    ch.std_area_normalized, ch.std_peak_normalized, ch.vertical_stretch
                ),
            ),
        ],
    );
}

#[test]
fn c07_g_extraction() {
    let (s, kappa, gamma) = device_like();
    let stt = convolve_lorentzian(&convolve_lorentzian(&s, kappa).unwrap(), kappa).unwrap();
    let mut checks = Vec::new();
    for g in [5.0, 10.0, 25.0] {
        let e = hill_envelope(&stt, g * g / gamma, 1.0).unwrap();
        let fit = fit_g_from_envelope(&e, &s, kappa, gamma).unwrap();
        let rel = (fit.g_uev / g - 1.0).abs();
        checks.push((rel <= 1e-3, format!("noiseless g={g}: {:.5} ({:.1e})", fit.g_uev, rel)));
    }

    let g_true = 25.0;
    let clean = hill_envelope(&stt, g_true * g_true / gamma, 1.0).unwrap();
    let peak = clean.peak().2;
    let noise = Normal::new(0.0, 0.01 * peak).unwrap();
    let mut errs: Vec<f64> = (0..100u64)
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let v = clean.values().iter().map(|x| (x + noise.sample(&mut rng)).max(0.0)).collect();
            let e = Spectrum::new(*clean.grid(), v, Normalization::Raw).unwrap();
            (fit_g_from_envelope(&e, &s, kappa, gamma).unwrap().g_uev / g_true - 1.0).abs()
        })
        .collect();
    errs.sort_by(f64::total_cmp);
    let p95 = errs[94];
    checks.push((p95 <= 0.05, format!("1% noise: 95th percentile error {:.2}%", 100.0 * p95)));

    // mode sweep: g² ∝ 1/V with the exact forward model
    let v6 = mode_volume_gaussian(&CavityGeometry::device_default(6)).unwrap();
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for p in 6..=9 {
        let v = mode_volume_gaussian(&CavityGeometry::device_default(p)).unwrap();
        let g = g_true * (v6 / v).sqrt();
        let e = synthetic_envelope(&s, &CouplingParams::new(g, gamma, kappa).unwrap()).unwrap();
        let fit = fit_g_from_envelope(&e, &s, kappa, gamma).unwrap();
        xs.push(1.0 / v);
        ys.push(fit.g_uev * fit.g_uev);
        if p == 6 {
            checks.push(((fit.g_uev / g_true - 1.0).abs() <= 0.05, format!("p=6 exact forward g = {:.3}", fit.g_uev)));
        }
    }
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let r2 = sxy * sxy / (sxx * syy);
    checks.push((r2 > 0.99, format!("g² vs 1/V R² = {r2:.5}")));
    report(7, "g extraction", &checks);
}

#[test]
fn c08_lifetime_estimator() {
    let g = g_from_lifetime(200.0, 0.4885, 0.65).unwrap();
    let ratio = 25.0 / g;
    report(
        8,
        "lifetime estimator discrepancy",
        &[
            ((g - 6.1).abs() <= 0.1, format!("g = {g:.3} ueV")),
            (within(ratio, 3.0, 5.0), format!("25/g = {ratio:.2}")),
        ],
    );
}

#[test]
fn c09_biexponential_recovery() {
    let axis = TimeAxis::new(-200.0, 4.0, 600).unwrap();
    let w = DecayWeights::device_default();
    let clean = simulate_decay(rate_from_lifetime(256.0), 1.0, &w, &Irf::default(), &axis)
        .unwrap()
        .scaled_to_peak(1e5)
        .unwrap();
    let (mut bad, mut worst1, mut worst2, mut min_lw) = (0, 0.0f64, 0.0f64, 1.0f64);
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = fit_biexponential(&add_poisson_noise(&clean, &mut rng)).unwrap();
        let (d1, d2) = ((f.tau1_ps - 23.0).abs(), (f.tau2_ps - 256.0).abs());
        worst1 = worst1.max(d1);
        worst2 = worst2.max(d2);
        min_lw = min_lw.min(f.long_weight);
        if d1 > 5.0 || d2 > 4.0 || f.collapsed {
            bad += 1;
        }
    }
    report(
        9,
        "biexponential fit recovery",
        &[
            (bad == 0, format!("{bad}/100 outside ±5/±4 ps (worst |Δτ1| {worst1:.2}, |Δτ2| {worst2:.2})")),
            (min_lw > 0.8, format!("min long weight {min_lw:.3}")),
        ],
    );
}

#[test]
fn c10_g2_model() {
    let gamma = rate_from_lifetime(256.0 / 1.19);
    let tau: Vec<f64> = (-600..=600).map(|k| k as f64 * 100.0).collect();
    let bare = LevelScheme::from_bunching(gamma, 0.1 * gamma, 10_000.0, 0.1503, 0.0).unwrap();
    let ideal = g2_correlation(&bare, G2Mode::Cw, &tau, &Irf::default()).unwrap();
    let s = LevelScheme { background: 0.2, ..bare };
    let tr = g2_correlation(&s, G2Mode::Cw, &tau, &Irf::default()).unwrap();
    let fit = fit_bunching(&tau, &tr.g2, 2000.0).unwrap();
    report(
        10,
        "three-level g2",
        &[
            (ideal.g2_zero_deconvolved.abs() < 1e-12, format!("no background g2(0) = {:.1e}", ideal.g2_zero_deconvolved)),
            ((tr.g2_zero_raw - 0.40).abs() <= 0.005, format!("raw g2(0) = {:.4}", tr.g2_zero_raw)),
            ((tr.g2_zero_deconvolved - 0.36).abs() <= 0.005, format!("deconvolved g2(0) = {:.4}", tr.g2_zero_deconvolved)),
            (
                (fit.time_ps / 10_000.0 - 1.0).abs() <= 0.1,
                format!("bunching decay {:.0} ps (closed form {:.0} ps)", fit.time_ps, s.cw_terms().bunching_time_ps()),
            ),
        ],
    );
}

#[test]
fn c11_steady_state_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let c = CouplingParams::new(
            rng.random_range(0.01..100.0),
            rng.random_range(0.01..100.0),
            rng.random_range(0.1..1000.0),
        )
        .unwrap();
        let (se, sa) = (rng.random_range(0.0..0.1), rng.random_range(0.0..0.1));
        let pump = rng.random_range(1e-6..1e-3) * c.gamma_uev;
        let ss = steady_state(pump, &c, se, sa).unwrap();
        let expected = pump / c.kappa_uev * beta_at(&c, se, sa);
        if expected > 0.0 {
            worst = worst.max((ss.photon_number / expected - 1.0).abs());
        }
    }
    report(11, "steady-state identity", &[(worst <= 1e-10, format!("max relative deviation {worst:.2e}"))]);
}
