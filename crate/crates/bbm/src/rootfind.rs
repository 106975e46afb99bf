//! Bracketed hybrid root finding: Newton steps accelerated inside a
//! maintained bisection bracket, falling back to bisection whenever the
//! Newton iterate would leave the bracket or the derivative degenerates.
//!
//! Guaranteed to converge for continuous monotone residuals; Newton alone
//! would be unsafe near u = 0 where the curve derivatives vanish.

use crate::error::{Error, Result};
use crate::params::RootFindSettings;

/// Solve f(u) = target for u in [lo, hi], given f(lo) <= target <= f(hi).
///
/// `df` returns the derivative of f. The residual is driven below
/// `settings.residual_tol(target)`.
pub fn solve_bracketed<F, D>(
    f: F,
    df: D,
    target: f64,
    mut lo: f64,
    mut hi: f64,
    settings: &RootFindSettings,
) -> Result<f64>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    settings.validate()?;
    let tol = settings.residual_tol(target);

    let flo = f(lo) - target;
    if flo.abs() <= tol {
        return Ok(lo);
    }
    let fhi = f(hi) - target;
    if fhi.abs() <= tol {
        return Ok(hi);
    }
    if flo > 0.0 || fhi < 0.0 {
        return Err(Error::numerics(format!(
            "solve_bracketed: target {target} not bracketed by [{lo}, {hi}] (f-t: {flo}, {fhi})"
        )));
    }

    let mut u = 0.5 * (lo + hi);
    for _ in 0..settings.max_iterations {
        let r = f(u) - target;
        if r.abs() <= tol {
            return Ok(u);
        }
        if r < 0.0 {
            lo = u;
        } else {
            hi = u;
        }

        let d = df(u);
        let newton = u - r / d;
        u = if d > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= f64::EPSILON * u.abs().max(1.0) {
            // bracket exhausted at machine resolution; accept the midpoint
            return Ok(0.5 * (lo + hi));
        }
    }
    Err(Error::numerics(format!(
        "solve_bracketed: no convergence to {target} after {} iterations (bracket [{lo}, {hi}])",
        settings.max_iterations
    )))
}

/// Adaptive Simpson quadrature on [a, b] with absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_recurse(f, a, b, fa, fb, fm, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
    fm: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_recurse(f, a, m, fa, fm, flm, left, 0.5 * tol, depth - 1)
            + simpson_recurse(f, m, b, fm, fb, frm, right, 0.5 * tol, depth - 1)
    }
}
