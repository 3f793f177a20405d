use pl_core::budget::*;
use pl_core::cavity::*;
use pl_core::cqed::*;
use pl_core::dynamics::*;
use pl_core::spectra::*;
use pl_core::units::bose_occupation;
use proptest::prelude::*;

fn lorentz_spectrum(fwhm: f64, step: f64, half: f64) -> Spectrum {
    let g = EnergyGrid::centered(0.0, half, step).unwrap();
    let v = g.energies().iter().map(|&x| lorentzian(x, fwhm)).collect();
    Spectrum::new(g, v, Normalization::Raw).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn convolution_preserves_area(
        kappa in 5.0f64..500.0,
        values in prop::collection::vec(0.0f64..10.0, 20..400),
    ) {
        let g = EnergyGrid::new(-3.0, 1.0, values.len()).unwrap();
        let s = Spectrum::new(g, values, Normalization::Raw).unwrap();
        prop_assume!(s.integral() > 0.0);
        let out = convolve_lorentzian(&s, kappa).unwrap();
        prop_assert!((out.integral() / s.integral() - 1.0).abs() < 1e-4);
        prop_assert_eq!(out.normalization(), s.normalization());
    }

    #[test]
    fn lorentzian_widths_add(ratio in 0.1f64..10.0) {
        let gamma = 100.0;
        let kappa = ratio * gamma;
        let step = kappa.min(gamma) / 10.0;
        let s = lorentz_spectrum(gamma, step, 60.0 * (gamma + kappa));
        let out = convolve_lorentzian(&s, kappa).unwrap();
        let w = out.fwhm().unwrap();
        prop_assert!((w / (gamma + kappa) - 1.0).abs() < 5e-3, "{} vs {}", w, gamma + kappa);
    }

    #[test]
    fn fs_spectrum_positive_with_area_2pi(
        fwhm in 20.0f64..400.0,
        dw in 0.05f64..1.0,
        t in 0.0f64..300.0,
        s in 1.0f64..3.0,
        wc in 300.0f64..3000.0,
    ) {
        let m = EmitterModel {
            zpl_energy_uev: 0.0,
            zpl_fwhm_uev: fwhm,
            debye_waller: dw,
            sideband: SidebandShape { exponent: s, cutoff_uev: wc },
            temperature_k: t,
            ..EmitterModel::device_default()
        };
        let g = EnergyGrid::centered(0.0, 20_000.0, fwhm / 10.0).unwrap();
        let sp = build_fs_spectrum(&m, &g).unwrap();
        prop_assert!(sp.values().iter().all(|&v| v >= 0.0 && v.is_finite()));
        prop_assert!((sp.integral() - std::f64::consts::TAU).abs() < 1e-9);
    }

    #[test]
    fn debye_waller_round_trip(
        fwhm in 0.2f64..0.4,
        dw in 0.5f64..0.95,
        s in 2.5f64..4.0,
        wc in 1000.0f64..2000.0,
    ) {
        // narrow ZPL, sideband weight far from the line
        let m = EmitterModel {
            zpl_energy_uev: 0.0,
            zpl_fwhm_uev: fwhm,
            debye_waller: dw,
            sideband: SidebandShape { exponent: s, cutoff_uev: wc },
            temperature_k: 0.0,
            ..EmitterModel::device_default()
        };
        let g = EnergyGrid::centered(0.0, 6000.0, fwhm / 10.5).unwrap();
        let sp = build_fs_spectrum(&m, &g).unwrap();
        let measured = debye_waller(&sp, 400.0 * fwhm).unwrap();
        prop_assert!((measured - dw).abs() < 1e-3, "{} vs {}", measured, dw);
    }

    #[test]
    fn detailed_balance(t in 5.0f64..300.0, s in 1.0f64..3.0, wc in 300.0f64..2000.0) {
        let m = EmitterModel {
            zpl_energy_uev: 0.0,
            temperature_k: t,
            sideband: SidebandShape { exponent: s, cutoff_uev: wc },
            ..EmitterModel::device_default()
        };
        let g = EnergyGrid::centered(0.0, 8000.0, 20.0).unwrap();
        let c = fs_components(&m, &g).unwrap();
        let emi = build_fs_spectrum(&m, &g).unwrap();
        let abs = absorption_spectrum(&emi, &m).unwrap();
        let peak = emi.peak().2;
        let n = g.len();
        for i in 0..n {
            let d = g.energy(i);
            if d.abs() < 1e-9 {
                continue;
            }
            let e_wing = c.red_wing[i] + c.blue_wing[i];
            let a_wing = abs.values()[i] - c.zpl[i];
            if e_wing < 1e-12 * peak || a_wing < 1e-12 * peak {
                continue;
            }
            let nb = bose_occupation(d.abs(), t);
            let expected = if d < 0.0 { (nb + 1.0) / nb } else { nb / (nb + 1.0) };
            prop_assert!((e_wing / a_wing / expected - 1.0).abs() < 1e-6, "d={}: {} vs {}", d, e_wing / a_wing, expected);
        }
    }

    #[test]
    fn exit_probabilities_sum_to_one(l in prop::collection::vec(0.0f64..5000.0, 5)) {
        let b = LossBudget::standard(l[0], l[1], l[2], l[3], l[4] + 1.0);
        let sum: f64 = exit_probabilities(&b).unwrap().iter().map(|e| e.probability).sum();
        prop_assert!((sum - 1.0).abs() < 1e-14);
    }

    #[test]
    fn q_from_round_trip_loss(q in 1e3f64..1e7, p in 1u32..20) {
        let l_rt_ppm = std::f64::consts::TAU * p as f64 / q * 1e6;
        let b = LossBudget::standard(l_rt_ppm, 0.0, 0.0, 0.0, 0.0);
        let back = q_from_losses(&b, p).unwrap().q;
        prop_assert!((back / q - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mode_volume_increases_while_short(r in 5.0f64..50.0, lambda in 600.0f64..1600.0) {
        let mut prev = 0.0;
        let mut p = 1;
        // strictly increasing while L < 3R/4
        while (p as f64) * lambda / 2.0 * 1e-3 < 0.75 * r {
            let g = CavityGeometry { wavelength_nm: lambda, refractive_index: 1.0, radius_of_curvature_um: r, mode_order: p };
            let v = mode_volume_gaussian(&g).unwrap();
            prop_assert!(v > prev);
            prev = v;
            p += 1;
        }
    }

    #[test]
    fn q_eff_symmetric_and_bounded(a in 1.0f64..1e7, b in 1.0f64..1e7) {
        let x = q_eff(a, b).unwrap();
        prop_assert_eq!(x, q_eff(b, a).unwrap());
        prop_assert!(x <= a.min(b));
    }

    #[test]
    fn beta_bounded_and_monotone(
        g in 0.0f64..100.0,
        dg in 0.01f64..10.0,
        gamma in 0.1f64..10.0,
        kappa in 1.0f64..500.0,
        se in 0.0f64..0.1,
        sa in 0.0f64..0.1,
    ) {
        let c1 = CouplingParams::new(g, gamma, kappa).unwrap();
        let c2 = CouplingParams::new(g + dg, gamma, kappa).unwrap();
        let (b1, b2) = (beta_at(&c1, se, sa), beta_at(&c2, se, sa));
        prop_assert!((0.0..1.0).contains(&b1));
        prop_assert!(b2 >= b1);
    }

    #[test]
    fn brightening_and_solver_are_inverse(dw in 0.05f64..1.0, fp in 0.1f64..1000.0, eta in 0.0001f64..1.0) {
        let r = brightening_ratios(dw, fp, eta).unwrap();
        let s = solve_fp_and_qy(r.flux_ratio_sat, r.decay_ratio, dw).unwrap();
        prop_assert!((s.f_p / fp - 1.0).abs() < 1e-12);
        prop_assert!((s.eta_qy / eta - 1.0).abs() < 1e-10);
    }

    #[test]
    fn purcell_homogeneous(q in 100.0f64..1e6, v in 0.5f64..50.0) {
        let a = purcell_factor(1275.0, 1.0, v, q).unwrap();
        let b = purcell_factor(1275.0, 1.0, 2.0 * v, 2.0 * q).unwrap();
        prop_assert!((a / b - 1.0).abs() < 1e-15);
    }

    #[test]
    fn g2_limits(
        gamma in 0.5f64..10.0,
        r_frac in 0.01f64..2.0,
        ks in 0.0f64..1.0,
        kd in 0.001f64..1.0,
        b in 0.0f64..0.9,
    ) {
        let s = LevelScheme { pump_uev: r_frac * gamma, gamma_uev: gamma, k_shelve_uev: ks, k_deshelve_uev: kd, background: b };
        prop_assert!((s.measured_g2(0.0) - b * (2.0 - b)).abs() < 1e-12);
        let slow = s.cw_terms().lambda_slow_uev;
        let far = 60.0 * pl_core::units::HBAR_UEV_PS / slow;
        prop_assert!((s.measured_g2(far) - 1.0).abs() < 1e-9);
        prop_assert!((s.measured_g2(-far) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn saturation_increasing_and_bounded(i_sat in 1.0f64..1e7, p_sat in 1.0f64..1e4, pulsed in any::<bool>()) {
        let mode = if pulsed { SaturationMode::Pulsed } else { SaturationMode::Cw };
        let powers: Vec<f64> = (0..145).map(|k| p_sat * 1e-3 * 1.07f64.powi(k)).collect();
        let c = saturation_curve(&powers, i_sat, p_sat, mode).unwrap();
        prop_assert!(c.windows(2).all(|w| w[1] > w[0]));
        prop_assert!(c.iter().all(|&v| v < i_sat));
    }

    #[test]
    fn irf_convolution_preserves_counts(tau1 in 5.0f64..100.0, ratio in 3.0f64..30.0, fwhm in 10.0f64..80.0) {
        let tau2 = tau1 * ratio;
        let m = BiexpModel { tau1_ps: tau1, tau2_ps: tau2, a1: 2.0, a2: 1.0 };
        let step = tau1 / 20.0;
        let len = ((25.0 * tau2 + 20.0 * fwhm) / step) as usize;
        let axis = TimeAxis::new(-10.0 * fwhm, step, len).unwrap();
        let total: f64 = m.counts(&axis, &Irf::Gaussian { fwhm_ps: fwhm }).iter().sum::<f64>() * step;
        let exact = 2.0 * tau1 + tau2;
        prop_assert!((total / exact - 1.0).abs() < 1e-4, "{} vs {}", total, exact);
    }

    #[test]
    fn chain_order_and_concatenation(effs in prop::collection::vec(0.01f64..1.0, 1..8), more in prop::collection::vec(0.01f64..1.0, 1..8)) {
        let mk = |v: &[f64]| EfficiencyChain::new(
            OpticalPath::FreeSpace,
            v.iter().enumerate().map(|(i, &e)| Stage::new(format!("s{i}"), e)).collect(),
        ).unwrap();
        let a = mk(&effs);
        let mut rev = effs.clone();
        rev.reverse();
        let ea = chain_efficiency(&a).unwrap();
        prop_assert!((chain_efficiency(&mk(&rev)).unwrap() / ea - 1.0).abs() < 1e-14);
        let b = mk(&more);
        let mut joined = effs.clone();
        joined.extend(&more);
        let ej = chain_efficiency(&mk(&joined)).unwrap();
        prop_assert!((ej / (ea * chain_efficiency(&b).unwrap()) - 1.0).abs() < 1e-14);
        prop_assert!((photons_per_count(&a).unwrap() * ea - 1.0).abs() < 1e-15);
    }

    #[test]
    fn port_ratio_and_calibration_round_trip(
        a in prop::collection::vec(0.01f64..1.0, 1..5),
        b in prop::collection::vec(0.01f64..1.0, 1..5),
        unknown in 0.01f64..1.0,
        xa in 0.001f64..1.0,
        xb in 0.001f64..1.0,
    ) {
        let mk = |v: &[f64], path| EfficiencyChain::new(
            path,
            v.iter().enumerate().map(|(i, &e)| Stage::new(format!("s{i}"), e)).collect(),
        ).unwrap();
        let ca = mk(&a, OpticalPath::CavityFiber);
        let cb = mk(&b, OpticalPath::CavityPlanar).then(Stage::new("unknown", unknown));
        let r = detected_port_ratio(&ca, &cb, xa, xb).unwrap();
        let r_inv = detected_port_ratio(&cb, &ca, xb, xa).unwrap();
        prop_assert!((r * r_inv - 1.0).abs() < 1e-14);
        let cal = calibrate_unknown_stage(&ca, &cb, xa, xb, r, "unknown").unwrap();
        prop_assert!((cal.efficiency - unknown).abs() < 1e-10);
    }
}
