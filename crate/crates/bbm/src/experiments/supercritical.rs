//! The supercritical branch (epsilon < 0): convergence of the G-inverse
//! barrier level to omega |eps|^{-1/2} and its consistency with the
//! pi/sqrt(delta) starting level.

use crate::constants::{OMEGA, SQRT_2};
use crate::curves;
use crate::error::{Error, Result};
use crate::params::RootFindSettings;
use serde::Serialize;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SupercriticalRow {
    pub abs_epsilon: f64,
    /// Relative gap 1 - G^{-1}(v)/omega at v = |eps|^{3/2} t = 50.
    pub gap_at_50: f64,
    /// | omega |eps|^{-1/2} - pi / sqrt(2 sqrt(2) |eps|) |.
    pub identity_residual: f64,
    /// |G^{-1}(v)/F^{-1}(v) - 1| at v = 1e-4 (both branches share the
    /// leading c v^{1/3} shape).
    pub small_t_rel_diff: f64,
}

pub fn supercritical_limit_check(abs_eps_grid: &[f64]) -> Result<Vec<SupercriticalRow>> {
    let rf = RootFindSettings::default();
    let mut rows = Vec::with_capacity(abs_eps_grid.len());
    for &ae in abs_eps_grid {
        if !(ae > 0.0 && ae < 1.0) {
            return Err(Error::invalid(format!(
                "supercritical_limit_check: |eps| = {ae} outside (0, 1)"
            )));
        }
        let gap_at_50 = curves::g_inv_gap(50.0, &rf)?;
        let lhs = OMEGA / ae.sqrt();
        let rhs = std::f64::consts::PI / (2.0 * SQRT_2 * ae).sqrt();
        let identity_residual = (lhs - rhs).abs() / lhs;
        let v = 1e-4;
        let g = curves::g_inv(v, &rf)?;
        let f = curves::f_inv(v, &rf)?;
        let small_t_rel_diff = (g / f - 1.0).abs();
        rows.push(SupercriticalRow { abs_epsilon: ae, gap_at_50, identity_residual, small_t_rel_diff });
    }
    Ok(rows)
}
