//! Bounded one-dimensional minimization: coarse scan, then Brent's
//! parabolic/golden-section search inside the best bracket.

use super::FitError;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BrentOptions {
    pub rel_tol: f64,
    pub max_iterations: usize,
    /// Uniform scan points used to locate the basin; 0 skips the scan.
    pub scan_points: usize,
}

impl Default for BrentOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-6,
            max_iterations: 200,
            scan_points: 41,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BrentReport {
    pub x: f64,
    pub fx: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Minimum sits on a bound of the search interval.
    pub at_bound: bool,
}

const GOLDEN: f64 = 0.381_966_011_250_105_1;

fn finite_or_inf(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Minimizes `f` on `[lo, hi]`.
pub fn minimize_scalar<F>(f: F, lo: f64, hi: f64, opts: &BrentOptions) -> Result<BrentReport, FitError>
where
    F: Fn(f64) -> f64,
{
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(FitError::BadBracket { lo, hi });
    }
    let f = |x: f64| finite_or_inf(f(x));
    let (mut a, mut b) = (lo, hi);
    if opts.scan_points >= 3 {
        let m = opts.scan_points;
        let xs: Vec<f64> = (0..m).map(|i| lo + (hi - lo) * i as f64 / (m - 1) as f64).collect();
        let fs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        let (ib, fb) = fs
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
        if !fb.is_finite() {
            return Err(FitError::NonFiniteObjective);
        }
        a = xs[ib.saturating_sub(1)];
        b = xs[(ib + 1).min(m - 1)];
    }

    let mut x = a + GOLDEN * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = f(x);
    let (mut fw, mut fv) = (fx, fx);
    let (mut d, mut e) = (0.0f64, 0.0f64);
    let mut converged = false;
    let mut iterations = 0;
    let scale = (hi - lo).abs();
    while iterations < opts.max_iterations {
        iterations += 1;
        let xm = 0.5 * (a + b);
        let tol1 = opts.rel_tol * x.abs().max(1e-3 * scale) + 1e-15;
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            converged = true;
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let e_prev = e;
            e = d;
            if p.abs() < (0.5 * q * e_prev).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if xm >= x { tol1 } else { -tol1 };
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= xm { a - x } else { b - x };
            d = GOLDEN * e;
        }
        let u = if d.abs() >= tol1 {
            x + d
        } else {
            x + if d > 0.0 { tol1 } else { -tol1 }
        };
        let fu = f(u);
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    // the interior search never evaluates the bounds themselves
    for bound in [lo, hi] {
        let fb = f(bound);
        if fb < fx {
            x = bound;
            fx = fb;
        }
    }
    if !fx.is_finite() {
        return Err(FitError::NonFiniteObjective);
    }
    let at_bound = (x - lo).abs() <= 1e-9 * scale || (hi - x).abs() <= 1e-9 * scale;
    Ok(BrentReport {
        x,
        fx,
        iterations,
        converged,
        at_bound,
    })
}
