//! The scalar function family behind the barrier curves: F, F_eps, G and
//! their inverses, the curves L*, L-bar, L, the time-reversed barriers
//! K_eps and H_eps, their derivatives, and the closed-form tau integrals.

use crate::constants::{FEPS_COEFF, LOG_COEFF, OMEGA, SQRT_2};
use crate::error::{Error, Result};
use crate::params::{ModelParams, RootFindSettings};

/// F(u) = u - omega * arctan(u / omega). Strictly increasing on [0, inf).
pub fn f_eval(u: f64) -> Result<f64> {
    if !(u >= 0.0) {
        return Err(Error::invalid(format!("f_eval: u = {u} must be >= 0")));
    }
    Ok(u - OMEGA * (u / OMEGA).atan())
}

/// F'(u) = u^2 / (u^2 + omega^2).
pub fn f_deriv(u: f64) -> f64 {
    u * u / (u * u + OMEGA * OMEGA)
}

/// Inverse of F by bracketed Newton/bisection.
///
/// The bracket [v, v + omega*pi/2 + 1] is valid because
/// u - omega*pi/2 < F(u) < u for all u > 0.
pub fn f_inv(v: f64, settings: &RootFindSettings) -> Result<f64> {
    if !(v >= 0.0) {
        return Err(Error::invalid(format!("f_inv: v = {v} must be >= 0")));
    }
    if v == 0.0 {
        return Ok(0.0);
    }
    let hi = v + OMEGA * std::f64::consts::FRAC_PI_2 + 1.0;
    crate::rootfind::solve_bracketed(|u| f_eval(u).unwrap(), f_deriv, v, v, hi, settings)
}

/// Stationary point of F_eps: u = (3 / (2 sqrt 2)) eps^{1/2}.
pub fn feps_stationary_point(epsilon: f64) -> f64 {
    LOG_COEFF * epsilon.sqrt()
}

/// F_eps(u) = F(u) - (3/(4 sqrt 2)) eps^{1/2} log(u^2/omega^2 + 1).
pub fn feps_eval(u: f64, params: &ModelParams) -> Result<f64> {
    params.require_subcritical()?;
    if !(u >= 0.0) {
        return Err(Error::invalid(format!("feps_eval: u = {u} must be >= 0")));
    }
    let base = u - OMEGA * (u / OMEGA).atan();
    Ok(base - FEPS_COEFF * params.epsilon.sqrt() * (u * u / (OMEGA * OMEGA)).ln_1p())
}

/// F_eps'(u) = (u^2 - (3/(2 sqrt 2)) eps^{1/2} u) / (omega^2 + u^2).
pub fn feps_deriv(u: f64, epsilon: f64) -> f64 {
    (u * u - LOG_COEFF * epsilon.sqrt() * u) / (OMEGA * OMEGA + u * u)
}

/// Inverse of F_eps on the branch right of the stationary point.
///
/// For v = 0 this is the positive root of F_eps, which is the limit
/// defining F_eps^{-1}(0); it is >= (9/(4 sqrt 2)) eps^{1/2}.
pub fn feps_inv(v: f64, params: &ModelParams, settings: &RootFindSettings) -> Result<f64> {
    params.require_subcritical()?;
    if !(v >= 0.0) {
        return Err(Error::invalid(format!("feps_inv: v = {v} must be >= 0")));
    }
    let eps = params.epsilon;
    let lo = feps_stationary_point(eps);
    // F_eps(lo) < 0 <= v, so the root lies right of lo. Grow the upper end
    // geometrically until it clears the target.
    let mut hi = (2.0 * lo).max(v + OMEGA * std::f64::consts::FRAC_PI_2 + 1.0);
    let mut grow = 0;
    while feps_eval(hi, params)? < v {
        hi *= 2.0;
        grow += 1;
        if grow > 200 {
            return Err(Error::numerics("feps_inv: bracket growth failed"));
        }
    }
    crate::rootfind::solve_bracketed(
        |u| feps_eval(u, params).unwrap(),
        |u| feps_deriv(u, eps),
        v,
        lo,
        hi,
        settings,
    )
}

/// G(u) = omega * artanh(u / omega) - u, defined for 0 <= u < omega.
pub fn g_eval(u: f64) -> Result<f64> {
    if !(u >= 0.0) {
        return Err(Error::invalid(format!("g_eval: u = {u} must be >= 0")));
    }
    if u >= OMEGA {
        return Err(Error::invalid(format!(
            "g_eval: u = {u} is outside [0, omega = {OMEGA}); artanh singularity"
        )));
    }
    Ok(OMEGA * (u / OMEGA).atanh() - u)
}

/// G expressed through the gap d = 1 - u/omega, stable as u -> omega.
///
/// G = omega * (0.5 * ln((2 - d)/d) - (1 - d)).
pub fn g_eval_gap(d: f64) -> Result<f64> {
    if !(d > 0.0 && d <= 1.0) {
        return Err(Error::invalid(format!("g_eval_gap: d = {d} must be in (0, 1]")));
    }
    Ok(OMEGA * (0.5 * ((2.0 - d) / d).ln() - (1.0 - d)))
}

/// Relative gap 1 - G^{-1}(v)/omega, solved in log-gap space.
///
/// This form stays accurate for large v where G^{-1}(v) is within one ulp
/// of omega.
pub fn g_inv_gap(v: f64, settings: &RootFindSettings) -> Result<f64> {
    if !(v >= 0.0) {
        return Err(Error::invalid(format!("g_inv_gap: v = {v} must be >= 0")));
    }
    if v == 0.0 {
        return Ok(1.0);
    }
    settings.validate()?;
    // bisection on x = ln d over [ln(min positive), 0]; G is decreasing in d
    let mut lo_x: f64 = -745.0;
    let mut hi_x: f64 = 0.0;
    let tol = settings.residual_tol(v);
    for _ in 0..settings.max_iterations {
        let mid = 0.5 * (lo_x + hi_x);
        let g = g_eval_gap(mid.exp())?;
        if (g - v).abs() <= tol {
            return Ok(mid.exp());
        }
        if g > v {
            lo_x = mid;
        } else {
            hi_x = mid;
        }
        if hi_x - lo_x < 1e-15 {
            return Ok((0.5 * (lo_x + hi_x)).exp());
        }
    }
    // log-space bisection halves a 745-wide interval; by 200 iterations the
    // residual is limited only by f64 evaluation noise, which residual_tol
    // already dominates for v >= 1e-6
    Ok((0.5 * (lo_x + hi_x)).exp())
}

/// G^{-1}(v) in [0, omega); clamps to the largest f64 below omega when the
/// true gap is unrepresentable.
pub fn g_inv(v: f64, settings: &RootFindSettings) -> Result<f64> {
    let d = g_inv_gap(v, settings)?;
    let u = OMEGA * (1.0 - d);
    if u >= OMEGA {
        Ok(f64::from_bits(OMEGA.to_bits() - 1))
    } else {
        Ok(u)
    }
}

/// L*_eps(t) = eps^{-1/2} F^{-1}(eps^{3/2} t).
pub fn l_star(t: f64, params: &ModelParams, settings: &RootFindSettings) -> Result<f64> {
    params.require_subcritical()?;
    if !(t >= 0.0) {
        return Err(Error::invalid(format!("l_star: t = {t} must be >= 0")));
    }
    let eps = params.epsilon;
    Ok(f_inv(eps.powf(1.5) * t, settings)? / eps.sqrt())
}

/// L-bar_eps(t) = L*_eps(t) + (3/(2 sqrt 2)) log+(eps^{3/2} t).
pub fn l_bar(t: f64, params: &ModelParams, settings: &RootFindSettings) -> Result<f64> {
    let v = params.epsilon.powf(1.5) * t;
    Ok(l_star(t, params, settings)? + LOG_COEFF * v.ln().max(0.0))
}

/// L_eps(t) = eps^{-1/2} F_eps^{-1}(eps^{3/2} t).
pub fn l_exact(t: f64, params: &ModelParams, settings: &RootFindSettings) -> Result<f64> {
    params.require_subcritical()?;
    if !(t >= 0.0) {
        return Err(Error::invalid(format!("l_exact: t = {t} must be >= 0")));
    }
    let eps = params.epsilon;
    Ok(feps_inv(eps.powf(1.5) * t, params, settings)? / eps.sqrt())
}

/// K_eps(s) = L*_eps(t - s), the time-reversed upper barrier.
/// K_eps(t) = 0 is allowed as the limit value.
pub fn k_curve(s: f64, params: &ModelParams, settings: &RootFindSettings) -> Result<f64> {
    if !(s >= 0.0 && s <= params.horizon_t) {
        return Err(Error::invalid(format!(
            "k_curve: s = {s} outside [0, t = {}]",
            params.horizon_t
        )));
    }
    l_star(params.horizon_t - s, params, settings)
}

/// H_eps(s) = L_eps(t - s). Requires s < t so that the argument stays in
/// the domain where the right branch is defined... except that L_eps(0) is
/// itself defined via the limiting root, so s = t is accepted.
pub fn h_curve(s: f64, params: &ModelParams, settings: &RootFindSettings) -> Result<f64> {
    if !(s >= 0.0 && s <= params.horizon_t) {
        return Err(Error::invalid(format!(
            "h_curve: s = {s} outside [0, t = {}]",
            params.horizon_t
        )));
    }
    l_exact(params.horizon_t - s, params, settings)
}

/// The four analytic derivatives at time t > 0:
/// (L*', L*'', L', L'').
#[derive(Debug, Clone, Copy)]
pub struct CurveDerivatives {
    pub l_star_d1: f64,
    pub l_star_d2: f64,
    pub l_exact_d1: f64,
    pub l_exact_d2: f64,
}

pub fn curve_derivatives(
    t: f64,
    params: &ModelParams,
    settings: &RootFindSettings,
) -> Result<CurveDerivatives> {
    params.require_subcritical()?;
    if !(t > 0.0) {
        return Err(Error::invalid(format!(
            "curve_derivatives: t = {t} must be > 0 (formulas singular at 0)"
        )));
    }
    let eps = params.epsilon;
    let v = eps.powf(1.5) * t;
    let w2 = OMEGA * OMEGA;

    let fi = f_inv(v, settings)?;
    let l_star_d1 = eps * (1.0 + w2 / (fi * fi));
    let l_star_d2 = -2.0 * w2 * eps.powf(2.5) * (fi * fi + w2) / fi.powi(5);

    let fe = feps_inv(v, params, settings)?;
    let se = eps.sqrt();
    let denom = 2.0 * SQRT_2 * fe * fe - 3.0 * se * fe;
    let l_exact_d1 = 2.0 * SQRT_2 * eps * (w2 + fe * fe) / denom;
    let l_exact_d2 = 8.0 * eps.powf(2.5)
        * (w2 + fe * fe)
        * (-3.0 * se * fe * fe - 4.0 * SQRT_2 * w2 * fe + 3.0 * w2 * se)
        / denom.powi(3);

    Ok(CurveDerivatives { l_star_d1, l_star_d2, l_exact_d1, l_exact_d2 })
}

/// tau^{K_eps}(r, s) = (K(r) - K(s) - eps (s - r)) / omega^2.
pub fn tau_k(r: f64, s: f64, params: &ModelParams, settings: &RootFindSettings) -> Result<f64> {
    if !(r >= 0.0 && r < s && s <= params.horizon_t) {
        return Err(Error::invalid(format!(
            "tau_k: need 0 <= r < s <= t, got r = {r}, s = {s}, t = {}",
            params.horizon_t
        )));
    }
    let kr = k_curve(r, params, settings)?;
    let ks = k_curve(s, params, settings)?;
    Ok((kr - ks - params.epsilon * (s - r)) / (OMEGA * OMEGA))
}

/// tau^{H_eps}(r, s) = (H(r) - H(s) - eps (s - r)) / omega^2
///                     - (3/pi^2) log(H(r)/H(s)).
pub fn tau_h(r: f64, s: f64, params: &ModelParams, settings: &RootFindSettings) -> Result<f64> {
    if !(r >= 0.0 && r < s && s <= params.horizon_t) {
        return Err(Error::invalid(format!(
            "tau_h: need 0 <= r < s <= t, got r = {r}, s = {s}, t = {}",
            params.horizon_t
        )));
    }
    let hr = h_curve(r, params, settings)?;
    let hs = h_curve(s, params, settings)?;
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    Ok((hr - hs - params.epsilon * (s - r)) / (OMEGA * OMEGA) - 3.0 / pi2 * (hr / hs).ln())
}

/// Smallest u such that F_eps(u) > u/2 for all u >= u* on a scan grid,
/// for the given epsilon. F_eps(u) - u/2 is eventually increasing, so a
/// forward scan with a tail check is adequate.
pub fn u_star(epsilon: f64, settings: &RootFindSettings) -> Result<f64> {
    let params = ModelParams::new(epsilon, 0.0)?;
    params.require_subcritical()?;
    let gap = |u: f64| feps_eval(u, &params).unwrap() - 0.5 * u;
    // gap'(u) = F_eps'(u) - 1/2 has its last sign change below this bound:
    // F_eps' > 1/2 once u^2 - a u > (omega^2 + u^2)/2, i.e. beyond
    // u = a + sqrt(a^2 + ... ); scan far past it.
    let mut u = 0.5;
    let step = 1.0078125; // 1 + 1/128, fine multiplicative grid
    let mut last_bad = 0.0;
    while u < 1e4 {
        if gap(u) <= 0.0 {
            last_bad = u;
        }
        u *= step;
    }
    if last_bad == 0.0 {
        return Ok(0.5);
    }
    // refine the crossing just above last_bad
    let root = crate::rootfind::solve_bracketed(
        gap,
        |u| feps_deriv(u, epsilon) - 0.5,
        0.0,
        last_bad,
        last_bad * step * 2.0,
        settings,
    )?;
    Ok(root * (1.0 + 1e-9))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::C_CRIT;

    fn settings() -> RootFindSettings {
        RootFindSettings::default()
    }

    fn mp(eps: f64, t: f64) -> ModelParams {
        ModelParams::new(eps, t).unwrap()
    }

    // -- independent oracles ------------------------------------------------

    /// Pure bisection inverse of F, independent of the production solver.
    fn bisect_f_inv(v: f64) -> f64 {
        let (mut lo, mut hi) = (0.0f64, v + 4.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f_eval(mid).unwrap() < v {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn f_eval_pinned_values() {
        assert_eq!(f_eval(0.0).unwrap(), 0.0);
        // F(omega) = omega (1 - pi/4); frozen from 40-digit evaluation
        let v = f_eval(OMEGA).unwrap();
        assert!((v - 0.40087669603992609).abs() < 1e-12, "F(omega) = {v}");
        // large-u expansion F(u) = u - omega pi/2 + omega^2/u + O(u^-3)
        let u = 100.0;
        let expansion = u - OMEGA * std::f64::consts::FRAC_PI_2 + OMEGA * OMEGA / u;
        assert!((f_eval(u).unwrap() - expansion).abs() < 1e-3);
    }

    #[test]
    fn f_eval_rejects_negative() {
        assert!(f_eval(-0.1).is_err());
    }

    #[test]
    fn f_inv_pinned_values() {
        let s = settings();
        assert_eq!(f_inv(0.0, &s).unwrap(), 0.0);
        // frozen from the bisection oracle (also mpmath: 1.0768580727590055)
        let r = f_inv(0.1, &s).unwrap();
        let oracle = bisect_f_inv(0.1);
        assert!((r - oracle).abs() < 1e-10);
        assert!((r - 1.0768580727590055).abs() < 1e-9, "f_inv(0.1) = {r}");
        // cross-check against the small-u expansion c u^{1/3} + 3u/5
        let asym = C_CRIT * 0.1f64.powf(1.0 / 3.0) + 0.06;
        assert!((r - asym).abs() < 3e-3);
        // F^{-1}(10) = 10 + omega pi/2 + O(1/u)
        let r10 = f_inv(10.0, &s).unwrap();
        assert!((r10 - (10.0 + OMEGA * std::f64::consts::FRAC_PI_2)).abs() < 0.3);
        assert!((r10 - bisect_f_inv(10.0)).abs() < 1e-9);
    }

    #[test]
    fn f_inv_upper_bound_property() {
        // u < F^{-1}(u) for u > 0
        let s = settings();
        for &v in &[1e-6, 1e-3, 0.1, 1.0, 10.0, 1e4, 1e8] {
            assert!(f_inv(v, &s).unwrap() > v);
        }
    }

    #[test]
    fn feps_eval_pinned() {
        let p = mp(0.25, 0.0);
        assert_eq!(feps_eval(0.0, &p).unwrap(), 0.0);
        // F_eps(3a/2) <= 0 at the computed stationary multiple
        let a = feps_stationary_point(0.25);
        assert!(feps_eval(1.5 * a, &p).unwrap() <= 0.0);
        // F_eps < F < u for u > 0
        for &u in &[0.01, 0.5, 2.0, 50.0] {
            let fe = feps_eval(u, &p).unwrap();
            let f = f_eval(u).unwrap();
            assert!(fe < f && f < u);
        }
    }

    #[test]
    fn feps_inv_roundtrip_and_ordering() {
        let s = settings();
        let p = mp(0.04, 0.0);
        // feps_inv(0) >= 9/(4 sqrt 2) * eps^{1/2}
        let r0 = feps_inv(0.0, &p, &s).unwrap();
        assert!(r0 >= 9.0 / (4.0 * SQRT_2) * 0.2 - 1e-12, "feps_inv(0) = {r0}");
        // round trip on a log grid
        let mut v = 1e-4;
        while v <= 1e3 {
            let u = feps_inv(v, &p, &s).unwrap();
            assert!((feps_eval(u, &p).unwrap() - v).abs() <= 1e-10 * v.max(1.0));
            assert!(u > f_inv(v, &s).unwrap());
            v *= 10.0;
        }
    }

    #[test]
    fn l_star_l_bar_pinned() {
        let s = settings();
        // (eps = 0.01, t = 100): eps^{3/2} t = 0.1, log+ = 0, l_bar = l_star
        let p = mp(0.01, 100.0);
        let ls = l_star(100.0, &p, &s).unwrap();
        let lb = l_bar(100.0, &p, &s).unwrap();
        assert_eq!(ls, lb);
        assert!((ls - bisect_f_inv(0.1) / 0.1).abs() < 1e-8, "l_star = {ls}");
        // (eps = 0.01, t = 10000): l_bar = 10 F^{-1}(10) + (3/(2 sqrt 2)) ln 10
        let p = mp(0.01, 1e4);
        let lb = l_bar(1e4, &p, &s).unwrap();
        let want = 10.0 * bisect_f_inv(10.0) + LOG_COEFF * 10f64.ln();
        assert!((lb - want).abs() < 1e-7, "l_bar = {lb}, want {want}");
        // t = 0
        assert_eq!(l_star(0.0, &mp(0.37, 1.0), &s).unwrap(), 0.0);
    }

    #[test]
    fn ordering_and_leps0() {
        let s = settings();
        for &eps in &[0.01, 0.1, 0.4] {
            let p = mp(eps, 50.0);
            for &t in &[0.0, 1.0, 10.0, 50.0] {
                let le = l_exact(t, &p, &s).unwrap();
                let ls = l_star(t, &p, &s).unwrap();
                assert!(le > ls, "L_eps > L*_eps failed at eps={eps}, t={t}");
                if t > 0.0 {
                    assert!(ls > eps * t);
                }
            }
            assert!(l_exact(0.0, &p, &s).unwrap() >= 9.0 / (4.0 * SQRT_2) - 1e-12);
        }
    }

    #[test]
    fn k_and_h_curves() {
        let s = settings();
        let p = mp(1e-6, 1000.0);
        // near-critical limit: K_eps(s) ~ c (t-s)^{1/3}
        for &sv in &[0.0, 500.0, 900.0] {
            let k = k_curve(sv, &p, &s).unwrap();
            let k0 = C_CRIT * (1000.0 - sv).powf(1.0 / 3.0);
            assert!((k - k0).abs() < 1e-2, "K({sv}) = {k}, c(t-s)^(1/3) = {k0}");
        }
        let p = mp(0.2, 20.0);
        assert_eq!(k_curve(0.0, &p, &s).unwrap(), l_star(20.0, &p, &s).unwrap());
        // decreasing, H > K pointwise, gap bounded on t <= 2 eps^{-3/2}
        let mut prev = f64::INFINITY;
        for i in 0..=20 {
            let sv = i as f64;
            let k = k_curve(sv, &p, &s).unwrap();
            let h = h_curve(sv, &p, &s).unwrap();
            assert!(k < prev);
            assert!(h > k);
            assert!(h - k < 4.0, "H - K = {} at s = {sv}", h - k);
            prev = k;
        }
        // s = t: K hits zero, H stays at L_eps(0) > 0
        assert_eq!(k_curve(20.0, &p, &s).unwrap(), 0.0);
        assert!(h_curve(20.0, &p, &s).unwrap() > 0.0);
        assert!(k_curve(20.1, &p, &s).is_err());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let s = settings();
        let p = mp(0.1, 0.0);
        for &t in &[1.0, 10.0, 100.0] {
            let d = curve_derivatives(t, &p, &s).unwrap();
            let h = 1e-5 * t;
            let fd1 = (l_star(t + h, &p, &s).unwrap() - l_star(t - h, &p, &s).unwrap()) / (2.0 * h);
            let fd2 = (l_star(t + h, &p, &s).unwrap() - 2.0 * l_star(t, &p, &s).unwrap()
                + l_star(t - h, &p, &s).unwrap())
                / (h * h);
            assert!((d.l_star_d1 - fd1).abs() / d.l_star_d1.abs() < 1e-6);
            assert!((d.l_star_d2 - fd2).abs() / d.l_star_d2.abs() < 1e-4);
            let fe1 =
                (l_exact(t + h, &p, &s).unwrap() - l_exact(t - h, &p, &s).unwrap()) / (2.0 * h);
            let fe2 = (l_exact(t + h, &p, &s).unwrap() - 2.0 * l_exact(t, &p, &s).unwrap()
                + l_exact(t - h, &p, &s).unwrap())
                / (h * h);
            assert!((d.l_exact_d1 - fe1).abs() / d.l_exact_d1.abs() < 1e-6);
            assert!((d.l_exact_d2 - fe2).abs() / d.l_exact_d2.abs() < 1e-4);
            // increasing concave, slope above eps
            assert!(d.l_star_d1 > p.epsilon);
            assert!(d.l_star_d2 < 0.0);
        }
        assert!(curve_derivatives(0.0, &p, &s).is_err());
    }

    #[test]
    fn l_star_slope_limits_to_eps() {
        let s = settings();
        let p = mp(0.2, 0.0);
        let d = curve_derivatives(1e6, &p, &s).unwrap();
        assert!((d.l_star_d1 - 0.2).abs() < 1e-6);
    }

    #[test]
    fn mean_value_sandwich() {
        let s = settings();
        let p = mp(0.15, 0.0);
        let pairs = [(0.5, 2.0), (1.0, 30.0), (7.0, 7.5), (20.0, 90.0)];
        for (a, b) in pairs {
            let d_b = curve_derivatives(b, &p, &s).unwrap().l_star_d1;
            let d_a = curve_derivatives(a, &p, &s).unwrap().l_star_d1;
            let gap = l_star(b, &p, &s).unwrap() - l_star(a, &p, &s).unwrap();
            assert!(0.0 < d_b * (b - a) && d_b * (b - a) <= gap + 1e-12);
            assert!(gap <= d_a * (b - a) + 1e-12);
        }
    }

    #[test]
    fn tau_closed_forms_vs_quadrature() {
        let s = settings();
        let p = mp(0.1, 50.0);
        let (r, sv) = (5.0, 20.0);
        let quad_k = crate::rootfind::adaptive_simpson(
            &|u| {
                let k = k_curve(u, &p, &s).unwrap();
                1.0 / (k * k)
            },
            r,
            sv,
            1e-11,
        );
        let tk = tau_k(r, sv, &p, &s).unwrap();
        assert!((tk - quad_k).abs() < 1e-8, "tau_k = {tk}, quadrature = {quad_k}");
        let quad_h = crate::rootfind::adaptive_simpson(
            &|u| {
                let h = h_curve(u, &p, &s).unwrap();
                1.0 / (h * h)
            },
            r,
            sv,
            1e-11,
        );
        let th = tau_h(r, sv, &p, &s).unwrap();
        assert!((th - quad_h).abs() < 1e-8, "tau_h = {th}, quadrature = {quad_h}");
    }

    #[test]
    fn tau_additivity_and_bounds() {
        let s = settings();
        let p = mp(0.3, 40.0);
        let a = tau_k(2.0, 11.0, &p, &s).unwrap();
        let b = tau_k(11.0, 31.0, &p, &s).unwrap();
        let c = tau_k(2.0, 31.0, &p, &s).unwrap();
        assert!((a + b - c).abs() < 1e-12);
        assert!(a >= 0.0 && b >= 0.0);
        // limit r -> s
        assert!(tau_k(5.0, 5.0 + 1e-9, &p, &s).unwrap() < 1e-8);
        // tau_k(0, t) <= (pi / (2 omega)) eps^{-1/2}
        let full = tau_k(0.0, 40.0, &p, &s).unwrap();
        let bound = std::f64::consts::FRAC_PI_2 / OMEGA / 0.3f64.sqrt();
        assert!(full <= bound);
        assert!(tau_k(5.0, 5.0, &p, &s).is_err());
    }

    #[test]
    fn g_branch() {
        let s = settings();
        assert_eq!(g_eval(0.0).unwrap(), 0.0);
        assert!(g_eval(OMEGA).is_err());
        assert_eq!(g_inv(0.0, &s).unwrap(), 0.0);
        // bisection oracle for G^{-1}(100): artanh blows up at omega
        let u = g_inv(100.0, &s).unwrap();
        assert!(u < OMEGA && OMEGA - u < 1e-3, "g_inv(100) = {u}");
        // round trip at moderate v
        for &v in &[1e-4, 0.1, 1.0, 5.0] {
            let u = g_inv(v, &s).unwrap();
            assert!((g_eval(u).unwrap() - v).abs() < 1e-9 * v.max(1.0));
        }
        // omega |eps|^{-1/2} = pi / sqrt(delta) with delta = 2 sqrt(2)|eps|
        let abs_eps: f64 = 0.01;
        let delta = 2.0 * SQRT_2 * abs_eps;
        let lhs = OMEGA / abs_eps.sqrt();
        let rhs = std::f64::consts::PI / delta.sqrt();
        assert!((lhs - rhs).abs() < 1e-12 * lhs);
    }

    #[test]
    fn u_star_threshold() {
        let s = settings();
        // u* increases with eps; for each eps the gap is positive beyond it
        let u1 = u_star(0.25, &s).unwrap();
        let u9 = u_star(0.9999, &s).unwrap();
        assert!(u1 < u9);
        let p = mp(0.25, 0.0);
        let mut u = u1 * 1.0000001;
        while u < 1e4 {
            assert!(feps_eval(u, &p).unwrap() > 0.5 * u, "gap violated at u = {u}");
            u *= 1.37;
        }
        // linear-regime sandwich: eps t <= L_eps(t) <= 2 eps t for
        // t >= u* eps^{-3/2}
        for &eps in &[0.1, 0.3] {
            let us = u_star(eps, &s).unwrap();
            let p = mp(eps, 0.0);
            for mult in [1.0, 2.0, 8.0] {
                let t = us * mult / eps.powf(1.5);
                let le = l_exact(t, &p, &s).unwrap();
                assert!(eps * t <= le && le <= 2.0 * eps * t, "sandwich failed: {le}");
            }
        }
    }
}
