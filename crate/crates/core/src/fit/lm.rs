//! Levenberg–Marquardt with Marquardt diagonal scaling and forward-difference
//! Jacobians.

use nalgebra::{DMatrix, DVector};

use super::FitError;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LmOptions {
    pub max_iterations: usize,
    pub rel_tol: f64,
    pub initial_lambda: f64,
    /// Relative finite-difference step.
    pub fd_step: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            rel_tol: 1e-8,
            initial_lambda: 1e-3,
            fd_step: 1e-7,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LmReport {
    pub params: Vec<f64>,
    /// One-sigma estimates from `(JᵀJ)⁻¹` scaled by the reduced χ².
    pub sigma: Vec<f64>,
    pub chi2: f64,
    pub reduced_chi2: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn step_size(p: f64, rel: f64) -> f64 {
    rel * p.abs().max(1.0)
}

fn chi2(r: &[f64]) -> f64 {
    r.iter().map(|x| x * x).sum()
}

/// Forward-difference Jacobian, `m × n`.
pub fn jacobian_forward<F>(f: &F, p: &[f64], r0: &[f64], rel: f64) -> DMatrix<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let mut jac = DMatrix::zeros(r0.len(), p.len());
    let mut q = p.to_vec();
    for k in 0..p.len() {
        let h = step_size(p[k], rel);
        q[k] = p[k] + h;
        let r = f(&q);
        for i in 0..r0.len() {
            jac[(i, k)] = (r[i] - r0[i]) / h;
        }
        q[k] = p[k];
    }
    jac
}

/// Central-difference Jacobian, `m × n`.
pub fn jacobian_central<F>(f: &F, p: &[f64], rel: f64) -> DMatrix<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let m = f(p).len();
    let mut jac = DMatrix::zeros(m, p.len());
    let mut q = p.to_vec();
    for k in 0..p.len() {
        let h = step_size(p[k], rel);
        q[k] = p[k] + h;
        let rp = f(&q);
        q[k] = p[k] - h;
        let rm = f(&q);
        for i in 0..m {
            jac[(i, k)] = (rp[i] - rm[i]) / (2.0 * h);
        }
        q[k] = p[k];
    }
    jac
}

/// Minimizes `Σ rᵢ(p)²` from `p0`. Not converging within the iteration cap
/// is reported through `converged = false` with the best iterate.
pub fn levenberg_marquardt<F>(f: F, p0: &[f64], opts: &LmOptions) -> Result<LmReport, FitError>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let n = p0.len();
    let mut p = p0.to_vec();
    let mut r = f(&p);
    if r.len() < n {
        return Err(FitError::TooFewResiduals {
            needed: n,
            got: r.len(),
        });
    }
    if r.iter().any(|x| !x.is_finite()) {
        return Err(FitError::NonFiniteStart);
    }
    let mut c = chi2(&r);
    let mut lambda = opts.initial_lambda;
    let mut converged = false;
    let mut iterations = 0;
    let mut jac = jacobian_forward(&f, &p, &r, opts.fd_step);

    while iterations < opts.max_iterations {
        iterations += 1;
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let grad = &jt * DVector::from_column_slice(&r);
        let mut improved = false;
        while lambda < 1e16 {
            let mut a = jtj.clone();
            for k in 0..n {
                a[(k, k)] += lambda * jtj[(k, k)].max(1e-300);
            }
            let delta = match a.cholesky() {
                Some(ch) => ch.solve(&(-&grad)),
                None => {
                    lambda *= 10.0;
                    continue;
                }
            };
            let trial: Vec<f64> = p.iter().zip(delta.iter()).map(|(a, b)| a + b).collect();
            let rt = f(&trial);
            let ct = chi2(&rt);
            if ct.is_finite() && ct <= c {
                let small_step = delta
                    .iter()
                    .zip(&p)
                    .all(|(d, p)| d.abs() <= opts.rel_tol * p.abs().max(1e-12));
                let small_gain = c - ct <= opts.rel_tol * c;
                p = trial;
                r = rt;
                c = ct;
                lambda = (lambda / 10.0).max(1e-12);
                improved = true;
                if small_step || small_gain || c == 0.0 {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            // no downhill step at any damping: stationary to working precision
            converged = true;
        }
        if converged {
            break;
        }
        jac = jacobian_forward(&f, &p, &r, opts.fd_step);
    }

    let jac = jacobian_forward(&f, &p, &r, opts.fd_step);
    let dof = (r.len() - n).max(1) as f64;
    let reduced = c / dof;
    let sigma = match (jac.transpose() * &jac).try_inverse() {
        Some(cov) => (0..n).map(|k| (cov[(k, k)] * reduced).max(0.0).sqrt()).collect(),
        None => vec![f64::NAN; n],
    };
    Ok(LmReport {
        params: p,
        sigma,
        chi2: c,
        reduced_chi2: reduced,
        iterations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock_minimum() {
        let f = |p: &[f64]| vec![10.0 * (p[1] - p[0] * p[0]), 1.0 - p[0]];
        let rep = levenberg_marquardt(f, &[-1.2, 1.0], &LmOptions::default()).unwrap();
        assert!(rep.converged);
        assert!((rep.params[0] - 1.0).abs() < 1e-6);
        assert!((rep.params[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn exponential_fit_recovers_parameters() {
        let t: Vec<f64> = (0..50).map(|i| i as f64 * 0.2).collect();
        let y: Vec<f64> = t.iter().map(|t| 3.0 * (-t / 2.5).exp() + 0.5).collect();
        let f = |p: &[f64]| {
            t.iter()
                .zip(&y)
                .map(|(t, y)| p[0] * (-t / p[1]).exp() + p[2] - y)
                .collect::<Vec<_>>()
        };
        let rep = levenberg_marquardt(f, &[1.0, 1.0, 0.0], &LmOptions::default()).unwrap();
        assert!(rep.converged);
        for (got, want) in rep.params.iter().zip([3.0, 2.5, 0.5]) {
            assert!((got - want).abs() < 1e-6, "{got} vs {want}");
        }
    }

    #[test]
    fn forward_jacobian_agrees_with_central() {
        let f = |p: &[f64]| vec![p[0].sin() * p[1], (p[0] * p[1]).exp(), p[1].powi(3)];
        let p = [0.3, 0.7];
        let r0 = f(&p);
        let jf = jacobian_forward(&f, &p, &r0, 1e-7);
        let jc = jacobian_central(&f, &p, 1e-4);
        for (a, b) in jf.iter().zip(jc.iter()) {
            assert!((a - b).abs() < 1e-4 * b.abs().max(1.0));
        }
    }

    #[test]
    fn underdetermined_rejected() {
        let f = |p: &[f64]| vec![p[0] + p[1]];
        assert!(matches!(
            levenberg_marquardt(f, &[0.0, 0.0], &LmOptions::default()),
            Err(FitError::TooFewResiduals { .. })
        ));
    }
}
