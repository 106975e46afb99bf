//! Backward integration of the barrier ODE K'(s) = -eps - omega^2 / K^2.
//!
//! Integrated in the substitution variable y = K, where
//! d sigma / dK = K^2 / (eps K^2 + omega^2) is smooth all the way down to
//! the singular boundary condition K(t) = 0 (started at K = delta0 and
//! Richardson-extrapolated in delta0).

use crate::constants::OMEGA;
use crate::curves;
use crate::error::{Error, Result};
use crate::params::{ModelParams, RootFindSettings};
use serde::Serialize;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct OdeCheckResult {
    pub epsilon: f64,
    pub t: f64,
    /// K(0) from the adaptive integrator, delta0-extrapolated.
    pub k0: f64,
    pub l_star: f64,
    pub rel_error: f64,
    /// K(0) at the coarse start delta0 = 1e-3, before extrapolation.
    pub k0_coarse: f64,
}

/// Cash-Karp 4(5) step for dy/dx = f(x, y) ... here the roles are
/// x = K (geometry) and y = sigma (time), f = K^2/(eps K^2 + omega^2).
fn ck_step(f: impl Fn(f64) -> f64, x: f64, y: f64, h: f64) -> (f64, f64) {
    let k1 = f(x);
    let k2 = f(x + 0.2 * h);
    let k3 = f(x + 0.3 * h);
    let k4 = f(x + 0.6 * h);
    let k5 = f(x + h);
    let k6 = f(x + 0.875 * h);
    let y5 = y + h
        * (37.0 / 378.0 * k1 + 250.0 / 621.0 * k3 + 125.0 / 594.0 * k4 + 512.0 / 1771.0 * k6);
    let y4 = y + h
        * (2825.0 / 27648.0 * k1
            + 18575.0 / 48384.0 * k3
            + 13525.0 / 55296.0 * k4
            + 277.0 / 14336.0 * k5
            + 0.25 * k6);
    (y5, (y5 - y4).abs())
}

/// Integrate sigma(K) from (delta0, 0) until sigma = t; returns K there.
fn integrate_to_time(epsilon: f64, t: f64, delta0: f64, tol: f64) -> Result<f64> {
    let w2 = OMEGA * OMEGA;
    let f = |k: f64| k * k / (epsilon * k * k + w2);
    let mut k = delta0;
    let mut sigma = 0.0;
    let mut h = (delta0).max(1e-3);
    let mut steps = 0u64;
    while sigma < t {
        // cap the step so sigma lands near t: d sigma/dK <= 1/eps
        let remaining = t - sigma;
        let dk_cap = remaining / f(k).max(1e-300);
        let h_try = h.min(dk_cap);
        let (y_next, err) = ck_step(f, k, sigma, h_try);
        let scale = tol * (sigma.abs() + 1.0);
        if err > scale && h_try < dk_cap {
            h = 0.5 * h_try;
        } else {
            k += h_try;
            sigma = y_next;
            if err < 0.1 * scale {
                h = (h_try * 2.0).min(0.5 * k.max(1e-3));
            } else {
                h = h_try;
            }
            if (t - sigma).abs() <= tol * (t.abs() + 1.0) {
                break;
            }
        }
        steps += 1;
        if steps > 2_000_000 {
            return Err(Error::numerics(format!(
                "ode_heuristic_check: failed to reach t = {t} (sigma = {sigma}, K = {k})"
            )));
        }
    }
    Ok(k)
}

/// Integrate the simplified barrier ODE backward from K(t) = 0 and compare
/// K(0) against the closed-form L*_eps(t).
pub fn ode_heuristic_check(
    params: &ModelParams,
    t: f64,
    integrator_tol: f64,
) -> Result<OdeCheckResult> {
    params.require_subcritical()?;
    if !(t >= 0.0) {
        return Err(Error::invalid("ode_heuristic_check: t must be >= 0"));
    }
    let rf = RootFindSettings::default();
    let l_star = curves::l_star(t, params, &rf)?;
    if t == 0.0 {
        return Ok(OdeCheckResult {
            epsilon: params.epsilon,
            t,
            k0: 0.0,
            l_star,
            rel_error: 0.0,
            k0_coarse: 0.0,
        });
    }
    let eps = params.epsilon;
    let coarse = integrate_to_time(eps, t, 1e-3, integrator_tol)?;
    let fine = integrate_to_time(eps, t, 1e-4, integrator_tol)?;
    // delta0 enters through F(eps^{1/2} delta0) ~ delta0^3: extrapolate the
    // cubic start error away
    let k0 = fine + (fine - coarse) / (1e3 - 1.0);
    let rel_error = (k0 - l_star).abs() / l_star.abs().max(1e-30);
    Ok(OdeCheckResult { epsilon: eps, t, k0, l_star, rel_error, k0_coarse: coarse })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::C_CRIT;

    #[test]
    fn ode_matches_closed_form() {
        let p = ModelParams::new(0.1, 100.0).unwrap();
        let r = ode_heuristic_check(&p, 100.0, 1e-10).unwrap();
        assert!(r.rel_error <= 1e-3, "rel error {} (k0 {}, l* {})", r.rel_error, r.k0, r.l_star);
    }

    #[test]
    fn ode_near_critical_matches_cube_root() {
        let p = ModelParams::new(1e-8, 1000.0).unwrap();
        let r = ode_heuristic_check(&p, 1000.0, 1e-10).unwrap();
        let k0_crit = C_CRIT * 1000f64.powf(1.0 / 3.0);
        assert!((r.k0 - k0_crit).abs() / k0_crit <= 1e-3, "k0 {} vs {}", r.k0, k0_crit);
    }

    #[test]
    fn ode_error_shrinks_with_tolerance() {
        let p = ModelParams::new(0.3, 50.0).unwrap();
        let mut last = f64::INFINITY;
        for tol in [1e-4, 1e-7, 1e-10] {
            let r = ode_heuristic_check(&p, 50.0, tol).unwrap();
            assert!(
                r.rel_error <= last * 1.5 + 1e-12,
                "error did not shrink: {} after {last} at tol {tol}",
                r.rel_error
            );
            last = r.rel_error;
        }
        assert!(last < 1e-6);
    }

    #[test]
    fn ode_at_time_zero() {
        let p = ModelParams::new(0.2, 0.0).unwrap();
        let r = ode_heuristic_check(&p, 0.0, 1e-8).unwrap();
        assert_eq!(r.k0, 0.0);
    }
}
