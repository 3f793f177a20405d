//! Lorentzian convolution on a uniform grid.
//!
//! The sampled spectrum is extended by even reflection about both grid ends
//! and convolved with the periodized Lorentzian in closed form. The reflected
//! kernel integrates to one on the grid, so area is kept to `~exp(−πκ/h)`
//! regardless of how much of the tail reaches the edges.

use super::{check_param, Spectrum, SpectrumError};

/// Unit-area Lorentzian of full width `fwhm`.
pub fn lorentzian(x: f64, fwhm: f64) -> f64 {
    let hw = 0.5 * fwhm;
    hw / (std::f64::consts::PI * (x * x + hw * hw))
}

/// Peak of the κ-convolved ZPL, `4·DW/(γ* + κ)`.
pub fn s_tilde_max(dw: f64, gamma_star: f64, kappa: f64) -> Result<f64, SpectrumError> {
    check_param("dw", dw, dw > 0.0 && dw <= 1.0, "must lie in (0, 1]")?;
    check_param("gamma_star", gamma_star, gamma_star > 0.0, "must be > 0")?;
    check_param("kappa", kappa, kappa >= 0.0, "must be >= 0")?;
    Ok(4.0 * dw / (gamma_star + kappa))
}

/// Periodized Lorentzian of period `P` sampled at `x_k = k·h`, `k = 0..=M`,
/// `M = P/h`: `(1/P)·sinh b / (cosh b − cos(2πx/P))`, `b = πκ/P`.
fn periodic_kernel(kappa: f64, h: f64, m: usize) -> Vec<f64> {
    let p = m as f64 * h;
    let b = std::f64::consts::PI * kappa / p;
    let q = (-b).exp();
    let num = 1.0 - q * q;
    (0..=m)
        .map(|k| {
            let c = (std::f64::consts::TAU * k as f64 / m as f64).cos();
            num / (p * (1.0 + q * q - 2.0 * q * c))
        })
        .collect()
}

/// `s ∗ 𝓛_κ` with `𝓛_κ` of unit area and FWHM `kappa`.
pub fn convolve_lorentzian(s: &Spectrum, kappa: f64) -> Result<Spectrum, SpectrumError> {
    check_param("kappa", kappa, kappa > 0.0, "must be > 0")?;
    let grid = *s.grid();
    let h = grid.step();
    let limit = kappa / 5.0;
    if h > limit * (1.0 + 1e-12) {
        return Err(SpectrumError::GridTooCoarse {
            step: h,
            limit,
            reason: "spacing must be <= kappa/5".into(),
        });
    }
    let n = grid.len();
    let m = 2 * (n - 1);
    let t = periodic_kernel(kappa, h, m);
    let w = grid.trapezoid_weights();
    let src: Vec<f64> = s.values().iter().zip(&w).map(|(v, w)| v * w).collect();
    let out: Vec<f64> = (0..n)
        .map(|i| {
            src.iter()
                .enumerate()
                .map(|(j, &sj)| sj * (t[i.abs_diff(j)] + t[i + j]))
                .sum::<f64>()
        })
        .collect();
    Ok(Spectrum::from_parts(grid, out, s.normalization()))
}

#[cfg(test)]
mod tests {
    use super::super::{EnergyGrid, Normalization};
    use super::*;

    fn sampled(grid: EnergyGrid, f: impl Fn(f64) -> f64) -> Spectrum {
        let v = grid.energies().into_iter().map(f).collect();
        Spectrum::new(grid, v, Normalization::Raw).unwrap()
    }

    #[test]
    fn lorentzian_widths_add() {
        let g = EnergyGrid::centered(0.0, 20_000.0, 2.0).unwrap();
        let s = sampled(g, |x| lorentzian(x, 40.0));
        let out = convolve_lorentzian(&s, 60.0).unwrap();
        // mirror images sit ≥ 39000 µeV away; compare within 5 widths
        for (i, &x) in g.energies().iter().enumerate().step_by(25) {
            if x.abs() > 500.0 {
                continue;
            }
            let exact = lorentzian(x, 100.0);
            let rel = (out.values()[i] - exact).abs() / exact;
            assert!(rel < 1e-3, "x={x} rel={rel}");
        }
        assert!((out.fwhm().unwrap() - 100.0).abs() < 0.5);
    }

    #[test]
    fn constant_input_stays_constant() {
        let g = EnergyGrid::new(-100.0, 1.0, 201).unwrap();
        let s = sampled(g, |_| 0.3);
        let out = convolve_lorentzian(&s, 10.0).unwrap();
        for v in out.values() {
            assert!((v - 0.3).abs() < 1e-12);
        }
    }

    #[test]
    fn spike_maps_to_kernel() {
        let g = EnergyGrid::centered(0.0, 2000.0, 0.5).unwrap();
        let mid = g.len() / 2;
        let mut v = vec![0.0; g.len()];
        v[mid] = 1.0 / g.step();
        let s = Spectrum::new(g, v, Normalization::Raw).unwrap();
        let out = convolve_lorentzian(&s, 20.0).unwrap();
        for (i, &x) in g.energies().iter().enumerate().step_by(37) {
            if x.abs() < 100.0 {
                let exact = lorentzian(x, 20.0);
                assert!((out.values()[i] - exact).abs() < 2e-3 * exact, "x={x}");
            }
        }
    }

    #[test]
    fn area_kept_even_with_mass_at_edge() {
        let g = EnergyGrid::new(0.0, 1.0, 400).unwrap();
        let s = sampled(g, |x| (-(x - 10.0).powi(2) / 20.0).exp());
        let out = convolve_lorentzian(&s, 30.0).unwrap();
        let rel = (out.integral() - s.integral()).abs() / s.integral();
        assert!(rel < 1e-9, "{rel}");
    }

    #[test]
    fn coarse_grid_rejected() {
        let g = EnergyGrid::new(0.0, 5.0, 100).unwrap();
        let s = sampled(g, |_| 1.0);
        assert!(matches!(
            convolve_lorentzian(&s, 20.0),
            Err(SpectrumError::GridTooCoarse { .. })
        ));
        assert!(convolve_lorentzian(&s, 25.0).is_ok());
    }

    #[test]
    fn s_tilde_max_values() {
        assert_eq!(s_tilde_max(1.0, 4.0, 0.0).unwrap(), 1.0);
        assert!((s_tilde_max(0.65, 200.0, 87.0).unwrap() - 9.0592e-3).abs() < 1e-6);
        assert!(s_tilde_max(1.2, 200.0, 87.0).is_err());
    }
}
