//! Densities of (branching) Brownian motion killed in a strip: the spectral
//! sine-series kernel and its small-time image representation, the tail
//! bound J_t controlling single-mode truncation, the exact constant-strip
//! branching density, boundary hitting rates, the Green-function bound, and
//! a Monte Carlo check of the moving-barrier change of measure.


use crate::curves;
use crate::error::{Error, Result};
use crate::params::{ModelParams, RootFindSettings};
use crate::rng::Stream;
use crate::rootfind::adaptive_simpson;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Evaluation controls for the spectral series.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SeriesSettings {
    /// Stop when the next term is below term_tol times the partial sum.
    pub term_tol: f64,
    pub max_terms: u32,
    /// Dimensionless time below which the image method is used.
    pub small_time_crossover: f64,
}

impl Default for SeriesSettings {
    fn default() -> Self {
        SeriesSettings { term_tol: 1e-14, max_terms: 400, small_time_crossover: 0.2 }
    }
}

impl SeriesSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.term_tol > 0.0) {
            return Err(Error::invalid("SeriesSettings: term_tol must be positive"));
        }
        if self.max_terms < 2 {
            return Err(Error::invalid("SeriesSettings: max_terms must be >= 2"));
        }
        if !(self.small_time_crossover > 0.0 && self.small_time_crossover <= 1.0) {
            return Err(Error::invalid("SeriesSettings: crossover must be in (0, 1]"));
        }
        Ok(())
    }
}

/// Transition kernel of Brownian motion on (0, 1) killed at both ends,
/// omega_s(x, y) = 2 sum_n exp(-pi^2 n^2 s / 2) sin(n pi x) sin(n pi y),
/// evaluated by whichever representation converges fast at this s.
pub fn omega_series(s: f64, x: f64, y: f64, settings: &SeriesSettings) -> Result<f64> {
    settings.validate()?;
    if !(s > 0.0) {
        return Err(Error::invalid(format!("omega_series: s = {s} must be > 0")));
    }
    if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) {
        return Err(Error::invalid(format!("omega_series: (x, y) = ({x}, {y}) outside [0,1]^2")));
    }
    if s < settings.small_time_crossover {
        Ok(omega_images(s, x, y))
    } else {
        omega_spectral(s, x, y, settings)
    }
}

/// Spectral form; adequate for s above the crossover.
///
/// Terms are cut once the envelope 2 exp(-pi^2 n^2 s/2) falls below
/// term_tol relative to the leading envelope; sine nodes therefore cannot
/// trigger a premature stop.
pub fn omega_spectral(s: f64, x: f64, y: f64, settings: &SeriesSettings) -> Result<f64> {
    let mut sum = 0.0;
    for n in 1..=settings.max_terms {
        let nf = n as f64;
        let envelope = (-PI * PI * (nf * nf - 1.0) * s / 2.0).exp();
        if n >= 2 && envelope < settings.term_tol {
            return Ok(sum);
        }
        sum += 2.0 * (-PI * PI * nf * nf * s / 2.0).exp() * (nf * PI * x).sin() * (nf * PI * y).sin();
    }
    Err(Error::numerics(format!(
        "omega_spectral: series did not settle at s = {s} within {} terms; \
         evaluate below the crossover with the image method",
        settings.max_terms
    )))
}

/// Gaussian image form; adequate for s below and around the crossover.
pub fn omega_images(s: f64, x: f64, y: f64) -> f64 {
    let phi = |z: f64| (-z * z / (2.0 * s)).exp() / (2.0 * PI * s).sqrt();
    let mut sum = 0.0;
    for k in -5i32..=5 {
        let shift = 2.0 * k as f64;
        sum += phi(y - x + shift) - phi(y + x + shift);
    }
    sum
}

/// d/dy omega_s(x, y), same representation switch as `omega_series`.
fn omega_dy(s: f64, x: f64, y: f64, settings: &SeriesSettings) -> Result<f64> {
    if s < settings.small_time_crossover {
        let dphi = |z: f64| -(z / s) * (-z * z / (2.0 * s)).exp() / (2.0 * PI * s).sqrt();
        let mut sum = 0.0;
        for k in -5i32..=5 {
            let shift = 2.0 * k as f64;
            sum += dphi(y - x + shift) - dphi(y + x + shift);
        }
        Ok(sum)
    } else {
        let mut sum = 0.0;
        for n in 1..=settings.max_terms {
            let nf = n as f64;
            let envelope = nf * (-PI * PI * (nf * nf - 1.0) * s / 2.0).exp();
            if n >= 2 && envelope < settings.term_tol {
                return Ok(sum);
            }
            sum += 2.0
                * nf
                * PI
                * (-PI * PI * nf * nf * s / 2.0).exp()
                * (nf * PI * x).sin()
                * (nf * PI * y).cos();
        }
        Err(Error::numerics("omega_dy: series did not settle"))
    }
}

/// J_t = sum_{n >= 2} n^2 exp(-pi^2 (n^2 - 1) t / 2), the truncation bound
/// for replacing omega by its first mode.
pub fn j_bound(t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::invalid(format!("j_bound: t = {t} must be > 0")));
    }
    let mut sum = 0.0;
    for n in 2..100_000u64 {
        let nf = n as f64;
        let term = nf * nf * (-PI * PI * (nf * nf - 1.0) * t / 2.0).exp();
        sum += term;
        if term < 1e-18 * sum.max(1e-300) {
            return Ok(sum);
        }
    }
    Err(Error::numerics(format!("j_bound: no convergence at t = {t}")))
}

/// Smallest t on a 0.005-grid with J_t < 1/2; reused by experiments when a
/// single-mode window has to be chosen.
pub fn j_half_threshold() -> f64 {
    let mut t = 0.005;
    while j_bound(t).map(|j| j >= 0.5).unwrap_or(true) {
        t += 0.005;
    }
    t
}

/// A constant-strip density query: start (r, x), end (s, y), strip width
/// and drift of the branching particles.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StripQuery {
    pub r: f64,
    pub s: f64,
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub rho: f64,
}

impl StripQuery {
    pub fn validate(&self) -> Result<()> {
        if !(self.width > 0.0) {
            return Err(Error::invalid("StripQuery: width must be > 0"));
        }
        if !(self.r >= 0.0 && self.r < self.s) {
            return Err(Error::invalid(format!(
                "StripQuery: need 0 <= r < s, got r = {}, s = {}",
                self.r, self.s
            )));
        }
        if !(self.x > 0.0 && self.x < self.width) || !(self.y > 0.0 && self.y < self.width) {
            return Err(Error::invalid(format!(
                "StripQuery: positions x = {}, y = {} must lie inside (0, {})",
                self.x, self.y, self.width
            )));
        }
        if !self.rho.is_finite() {
            return Err(Error::invalid("StripQuery: rho must be finite"));
        }
        Ok(())
    }
}

/// Killed-BM transition density on the strip (0, K):
/// v_t(x, y) = (1/K) omega_{t/K^2}(x/K, y/K). No drift, no branching.
pub fn killed_strip_kernel(
    elapsed: f64,
    x: f64,
    y: f64,
    width: f64,
    settings: &SeriesSettings,
) -> Result<f64> {
    if !(elapsed > 0.0) {
        return Err(Error::invalid("killed_strip_kernel: elapsed must be > 0"));
    }
    Ok(omega_series(elapsed / (width * width), x / width, y / width, settings)? / width)
}

/// Exact density of branching Brownian motion with drift -rho killed at 0
/// and K: q*_{s-r}(x, y) = e^{(1 - rho^2/2)(s-r) + rho (x - y)} v_{s-r}(x, y).
pub fn strip_density_exact(q: &StripQuery, settings: &SeriesSettings) -> Result<f64> {
    q.validate()?;
    let dt = q.s - q.r;
    let v = killed_strip_kernel(dt, q.x, q.y, q.width, settings)?;
    Ok(((1.0 - q.rho * q.rho / 2.0) * dt + q.rho * (q.x - q.y)).exp() * v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundarySide {
    Lower,
    Upper,
}

/// Density in time of the first passage of a single Brownian particle with
/// drift -rho, killed at 0 and K, to the given boundary:
/// -1/2 d/dy p at y = K (upper) or +1/2 d/dy p at y = 0 (lower), carrying
/// the Girsanov factor for the drift.
pub fn first_passage_rate(
    elapsed: f64,
    x: f64,
    width: f64,
    rho: f64,
    side: BoundarySide,
    settings: &SeriesSettings,
) -> Result<f64> {
    if !(elapsed > 0.0) {
        return Err(Error::invalid("first_passage_rate: elapsed must be > 0"));
    }
    if !(x > 0.0 && x < width) {
        return Err(Error::invalid("first_passage_rate: x must lie inside (0, width)"));
    }
    let u = elapsed / (width * width);
    let xs = x / width;
    // d/dy p = (1/K^2) d/dy~ omega
    let (driftless, hit_pos) = match side {
        BoundarySide::Upper => {
            (-0.5 * omega_dy(u, xs, 1.0, settings)? / (width * width), width)
        }
        BoundarySide::Lower => (0.5 * omega_dy(u, xs, 0.0, settings)? / (width * width), 0.0),
    };
    let girsanov = (-rho * rho * elapsed / 2.0 + rho * (x - hit_pos)).exp();
    Ok((girsanov * driftless).max(0.0))
}

/// Expected rate at which particles of the branching system hit the given
/// boundary: e^{elapsed} times the single-particle rate (many-to-one).
pub fn hitting_rate(
    elapsed: f64,
    x: f64,
    width: f64,
    rho: f64,
    side: BoundarySide,
    settings: &SeriesSettings,
) -> Result<f64> {
    Ok(elapsed.exp() * first_passage_rate(elapsed, x, width, rho, side, settings)?)
}

/// Outcome of the Green-function bound comparison.
#[derive(Debug, Clone, Copy)]
pub enum GreenBound {
    /// lhs = time integral of q*_s(x, y); rhs = 2 e^{rho(x-y)} x (K - y) / K.
    Computed { lhs: f64, rhs: f64 },
    /// The slowest mode does not decay; the time integral diverges.
    Divergent { exponent: f64 },
}

pub fn green_bound_check(
    x: f64,
    y: f64,
    width: f64,
    rho: f64,
    settings: &SeriesSettings,
) -> Result<GreenBound> {
    let q = StripQuery { r: 0.0, s: 1.0, x, y, width, rho };
    q.validate()?;
    let exponent = 1.0 - rho * rho / 2.0 - PI * PI / (2.0 * width * width);
    if exponent >= 0.0 {
        return Ok(GreenBound::Divergent { exponent });
    }
    let integrand = |s: f64| {
        if s <= 0.0 {
            return 0.0;
        }
        let q = StripQuery { r: 0.0, s, x, y, width, rho };
        strip_density_exact(&q, settings).unwrap_or(0.0)
    };
    // peak scan, then cut the tail where the integrand drops below 1e-16
    // of its peak
    let mut peak: f64 = 0.0;
    let mut s = 1e-4;
    while s < 10.0 * width * width {
        peak = peak.max(integrand(s));
        s *= 1.3;
    }
    let mut cutoff = 10.0 * width * width;
    while integrand(cutoff) > 1e-16 * peak {
        cutoff *= 2.0;
        if cutoff > 1e9 {
            break;
        }
    }
    // integrate in w = sqrt(s) so the possible 1/sqrt(s) start (x = y) is
    // regular
    let lhs = adaptive_simpson(&|w: f64| 2.0 * w * integrand(w * w), 0.0, cutoff.sqrt(), 1e-10);
    let rhs = 2.0 * (rho * (x - y)).exp() * x * (width - y) / width;
    Ok(GreenBound::Computed { lhs, rhs })
}

/// Which killing curve the change-of-measure check runs against.
#[derive(Debug, Clone, Copy)]
pub enum CurveKind {
    /// K_eps(.), the time-reversed L*.
    KEps,
    /// H_eps(.), the time-reversed L.
    HEps,
    /// A constant level; phi reduces to 1.
    Constant(f64),
}

/// Result of the Lemma-style change-of-measure Monte Carlo comparison.
#[derive(Debug, Clone, Copy)]
pub struct ComCheck {
    pub lhs: f64,
    pub lhs_se: f64,
    pub rhs: f64,
    pub survivors: usize,
    pub n_paths: usize,
}

/// Monte Carlo check that E[phi^f_{r,s} g(B_s)] over driftless Brownian
/// paths killed at 0 and f(.) equals
/// (1/f(s)) Integral g(y) omega_{tau^f(r,s)}(x/f(r), y/f(s)) dy.
#[allow(clippy::too_many_arguments)]
pub fn change_of_measure_check<G: Fn(f64) -> f64>(
    curve: CurveKind,
    r: f64,
    s: f64,
    x: f64,
    g: G,
    params: &ModelParams,
    n_paths: usize,
    dt: f64,
    seed: u64,
    settings: &SeriesSettings,
    rf: &RootFindSettings,
) -> Result<ComCheck> {
    if !(r >= 0.0 && r < s) {
        return Err(Error::invalid("change_of_measure_check: need 0 <= r < s"));
    }
    if !matches!(curve, CurveKind::Constant(_)) && !(s < params.horizon_t) {
        return Err(Error::invalid(
            "change_of_measure_check: s must be < horizon for curve barriers",
        ));
    }
    if !(dt > 0.0) || n_paths == 0 {
        return Err(Error::invalid("change_of_measure_check: dt > 0 and n_paths > 0 required"));
    }
    let f = |u: f64| -> Result<f64> {
        match curve {
            CurveKind::KEps => curves::k_curve(u, params, rf),
            CurveKind::HEps => curves::h_curve(u, params, rf),
            CurveKind::Constant(k) => Ok(k),
        }
    };
    let fd = |u: f64| -> Result<(f64, f64)> {
        match curve {
            CurveKind::KEps => {
                let d = curves::curve_derivatives(params.horizon_t - u, params, rf)?;
                Ok((-d.l_star_d1, d.l_star_d2))
            }
            CurveKind::HEps => {
                let d = curves::curve_derivatives(params.horizon_t - u, params, rf)?;
                Ok((-d.l_exact_d1, d.l_exact_d2))
            }
            CurveKind::Constant(_) => Ok((0.0, 0.0)),
        }
    };
    if !(x > 0.0 && x < f(r)?) {
        return Err(Error::invalid("change_of_measure_check: x must lie inside (0, f(r))"));
    }

    let tau = match curve {
        CurveKind::KEps => curves::tau_k(r, s, params, rf)?,
        CurveKind::HEps => curves::tau_h(r, s, params, rf)?,
        CurveKind::Constant(k) => (s - r) / (k * k),
    };
    let fr = f(r)?;
    let fs = f(s)?;

    // rhs by quadrature
    let rhs = adaptive_simpson(
        &|y: f64| {
            if y <= 0.0 || y >= fs {
                return 0.0;
            }
            g(y) * omega_series(tau, x / fr, y / fs, settings).unwrap_or(0.0)
        },
        0.0,
        fs,
        1e-10,
    ) / fs;

    // lhs by killed-path simulation; the curve and its derivatives are
    // precomputed on the step grid so the path loop is pure arithmetic
    let n_steps = ((s - r) / dt).ceil() as usize;
    let times: Vec<f64> =
        (0..=n_steps).map(|k| r + (s - r) * k as f64 / n_steps as f64).collect();
    let mut f_grid = Vec::with_capacity(n_steps + 1);
    let mut fd1_grid = Vec::with_capacity(n_steps + 1);
    let mut fd2_grid = Vec::with_capacity(n_steps + 1);
    for &u in &times {
        f_grid.push(f(u)?);
        let (d1, d2) = fd(u)?;
        fd1_grid.push(d1);
        fd2_grid.push(d2);
    }

    let mut sum = 0.0;
    let mut sum2 = 0.0;
    let mut survivors = 0usize;
    for path in 0..n_paths {
        let mut cur = Stream::root(seed, path as u64).cursor();
        let mut pos = x;
        let mut log_phi = -fd1_grid[0] * x * x / (2.0 * fr);
        let mut prev_integrand = fd2_grid[0] * x * x / (2.0 * fr);
        let mut alive = true;
        for k in 0..n_steps {
            let h = times[k + 1] - times[k];
            let z = cur.next_normal();
            let next = pos + h.sqrt() * z;
            // lower barrier: exact bridge minimum test
            let u_min = cur.next_unit();
            let min_val =
                0.5 * (pos + next - ((pos - next).powi(2) - 2.0 * h * u_min.ln()).sqrt());
            if min_val <= 0.0 || next <= 0.0 {
                alive = false;
                break;
            }
            // upper barrier: bridge-to-chord crossing
            let d0 = f_grid[k] - pos;
            let d1 = f_grid[k + 1] - next;
            if d1 <= 0.0 {
                alive = false;
                break;
            }
            let u_up = cur.next_unit();
            if u_up < (-2.0 * d0 * d1 / h).exp() {
                alive = false;
                break;
            }
            // accumulate the f'' B^2 / (2 f) path integral by trapezoid
            let integrand_next = fd2_grid[k + 1] * next * next / (2.0 * f_grid[k + 1]);
            log_phi -= 0.5 * h * (prev_integrand + integrand_next);
            prev_integrand = integrand_next;
            pos = next;
        }
        if alive {
            survivors += 1;
            let phi = (fr / fs).sqrt() * (log_phi + fd1_grid[n_steps] * pos * pos / (2.0 * fs)).exp();
            let val = phi * g(pos);
            sum += val;
            sum2 += val * val;
        }
    }
    if survivors < 30 {
        return Err(Error::underpowered(format!(
            "change_of_measure_check: only {survivors} of {n_paths} paths survived"
        )));
    }
    let n = n_paths as f64;
    let mean = sum / n;
    let var = (sum2 / n - mean * mean).max(0.0);
    Ok(ComCheck { lhs: mean, lhs_se: (var / n).sqrt(), rhs, survivors, n_paths })
}

/// Envelope shape of the moving-barrier density (spectral form): the
/// displayed formula without its unknown multiplicative constant. For
/// qualitative ratio tests only.
pub fn envelope_density(
    curve: CurveKind,
    r: f64,
    s: f64,
    x: f64,
    y: f64,
    params: &ModelParams,
    settings: &SeriesSettings,
    rf: &RootFindSettings,
) -> Result<f64> {
    let (fr, fs, tau) = match curve {
        CurveKind::KEps => (
            curves::k_curve(r, params, rf)?,
            curves::k_curve(s, params, rf)?,
            curves::tau_k(r, s, params, rf)?,
        ),
        CurveKind::HEps => (
            curves::h_curve(r, params, rf)?,
            curves::h_curve(s, params, rf)?,
            curves::tau_h(r, s, params, rf)?,
        ),
        CurveKind::Constant(_) => {
            return Err(Error::invalid("envelope_density: constant strips have an exact density"))
        }
    };
    let pre = (params.rho * (x - y) - crate::constants::SQRT_2 * params.epsilon * (s - r)).exp();
    Ok(pre * omega_series(tau, x / fr, y / fs, settings)? / (fr * fs).sqrt())
}

/// Envelope shape of the single-mode moving-barrier density.
pub fn envelope_density_single_mode(
    curve: CurveKind,
    r: f64,
    s: f64,
    x: f64,
    y: f64,
    params: &ModelParams,
    rf: &RootFindSettings,
) -> Result<f64> {
    let sqrt2 = crate::constants::SQRT_2;
    match curve {
        CurveKind::KEps => {
            let fr = curves::k_curve(r, params, rf)?;
            let fs = curves::k_curve(s, params, rf)?;
            Ok((params.rho * (x - y) - sqrt2 * (fr - fs)).exp()
                * (PI * x / fr).sin()
                * (PI * y / fs).sin()
                / (fr * fs).sqrt())
        }
        CurveKind::HEps => {
            let fr = curves::h_curve(r, params, rf)?;
            let fs = curves::h_curve(s, params, rf)?;
            Ok((params.rho * (x - y) - sqrt2 * (fr - fs)).exp()
                * (PI * x / fr).sin()
                * (PI * y / fs).sin()
                * fr
                / (fs * fs))
        }
        CurveKind::Constant(_) => {
            Err(Error::invalid("envelope_density_single_mode: use strip_density_exact"))
        }
    }
}
