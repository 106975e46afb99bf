//! The phase-transition sweep: per (epsilon, t) cell, the distribution of
//! the consistent maximal displacement estimated through the survival
//! duality, and its gap to the L-bar prediction.

use crate::curves;
use crate::error::{Error, Result};
use crate::params::{ModelParams, RootFindSettings};
use crate::sim::{BarrierSpec, Engine, SimConfig};
use crate::stats::quantile_sorted;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeRule {
    /// Times are multiples of eps^{-3/2} (the phase-transition scale).
    MultiplesOfTransitionScale(Vec<f64>),
    /// Times are multiples of eps^{-1}.
    MultiplesOfInverseEps(Vec<f64>),
    /// Absolute times.
    Absolute(Vec<f64>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub epsilon_grid: Vec<f64>,
    pub time_rule: TimeRule,
    pub replicates: usize,
    pub base_seed: u64,
    pub dt: f64,
    /// Every cell must satisfy eps^2 t <= c1_bound.
    #[serde(default = "default_c1")]
    pub c1_bound: f64,
    /// Resolution of the survival x-grid.
    #[serde(default = "default_x_step")]
    pub x_step: f64,
    /// Half-width of the survival x-grid around l_bar.
    #[serde(default = "default_x_halfwidth")]
    pub x_halfwidth: f64,
}

fn default_c1() -> f64 {
    2.0
}
fn default_x_step() -> f64 {
    0.25
}
fn default_x_halfwidth() -> f64 {
    10.0
}

impl SweepSpec {
    pub fn cells(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for &eps in &self.epsilon_grid {
            let times: Vec<f64> = match &self.time_rule {
                TimeRule::MultiplesOfTransitionScale(ms) => {
                    ms.iter().map(|m| m * eps.powf(-1.5)).collect()
                }
                TimeRule::MultiplesOfInverseEps(ms) => ms.iter().map(|m| m / eps).collect(),
                TimeRule::Absolute(ts) => ts.clone(),
            };
            for t in times {
                out.push((eps, t));
            }
        }
        out
    }

    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.epsilon_grid.is_empty() {
            v.push("SweepSpec.epsilon_grid: empty".into());
        }
        for &eps in &self.epsilon_grid {
            if !(eps > 0.0 && eps < 1.0) {
                v.push(format!("SweepSpec.epsilon_grid: {eps} outside (0, 1)"));
            }
        }
        if self.replicates == 0 {
            v.push("SweepSpec.replicates: must be >= 1".into());
        }
        if !(self.dt > 0.0) {
            v.push("SweepSpec.dt: must be > 0".into());
        }
        for (eps, t) in self.cells() {
            if eps * eps * t > self.c1_bound + 1e-12 {
                v.push(format!(
                    "SweepSpec: cell (eps = {eps}, t = {t}) violates eps^2 t <= {}",
                    self.c1_bound
                ));
            }
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::invalid(v.join("; ")))
        }
    }
}

/// One sweep cell: quantiles of the displacement sample and the gap to
/// L-bar.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PhaseCell {
    pub epsilon: f64,
    pub t: f64,
    pub l_bar: f64,
    pub median: f64,
    pub median_gap: f64,
    pub q25: f64,
    pub q75: f64,
    pub iqr: f64,
    pub n: usize,
    /// Replicates whose threshold lay outside the x-grid (censored).
    pub censored: usize,
}

/// Per-replicate survival thresholds on an ascending x-grid under common
/// noise: the smallest grid x from which the replicate survives. The
/// pathwise monotone coupling makes the threshold well defined; it equals
/// the replicate's consistent maximal displacement rounded up to the grid.
///
/// Returns (thresholds, censored_count). A replicate surviving nowhere on
/// the grid reports +inf; one surviving everywhere reports the grid floor.
pub fn survival_thresholds(
    params: &ModelParams,
    x_grid: &[f64],
    n: usize,
    seed: u64,
    dt: f64,
) -> Result<(Vec<f64>, usize)> {
    if x_grid.len() < 2 {
        return Err(Error::invalid("survival_thresholds: need at least 2 grid points"));
    }
    let engines: Vec<Engine> = x_grid
        .iter()
        .map(|&x| {
            Engine::new(&SimConfig {
                params: *params,
                x0: x,
                barrier: BarrierSpec::OriginOnly,
                dt,
                pop_cap: crate::sim::default_pop_cap(),
                seed,
                record_hits_window: None,
                branching: true,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let thresholds: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|rep| {
            let survives = |idx: usize| !engines[idx].run(rep as u64).extinct;
            // bisection over the grid using the monotone coupling
            if survives(0) {
                return x_grid[0];
            }
            if !survives(x_grid.len() - 1) {
                return f64::INFINITY;
            }
            let (mut lo, mut hi) = (0usize, x_grid.len() - 1);
            while hi - lo > 1 {
                let mid = (lo + hi) / 2;
                if survives(mid) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            x_grid[hi]
        })
        .collect();
    let censored = thresholds.iter().filter(|v| !v.is_finite()).count()
        + thresholds.iter().filter(|&&v| v == x_grid[0]).count();
    Ok((thresholds, censored))
}

/// Run the sweep: one PhaseCell per grid cell, deterministic in
/// (spec, base_seed).
pub fn phase_sweep(spec: &SweepSpec) -> Result<Vec<PhaseCell>> {
    spec.validate()?;
    let rf = RootFindSettings::default();
    let mut out = Vec::new();
    for (cell_idx, (eps, t)) in spec.cells().into_iter().enumerate() {
        let params = ModelParams::new(eps, t)?;
        let l_bar = curves::l_bar(t, &params, &rf)?;
        let lo = (l_bar - spec.x_halfwidth).max(spec.x_step.min(0.05));
        let hi = l_bar + spec.x_halfwidth;
        let n_pts = ((hi - lo) / spec.x_step).ceil() as usize + 1;
        let x_grid: Vec<f64> = (0..n_pts).map(|i| lo + i as f64 * spec.x_step).collect();
        let seed = crate::rng::Stream::root(spec.base_seed, cell_idx as u64).bits(0);
        let (mut thresholds, censored) =
            survival_thresholds(&params, &x_grid, spec.replicates, seed, spec.dt)?;
        if censored * 10 > spec.replicates {
            return Err(Error::underpowered(format!(
                "phase_sweep: cell (eps = {eps}, t = {t}) has {censored} of {} thresholds \
                 outside the x-grid; widen x_halfwidth",
                spec.replicates
            )));
        }
        thresholds.sort_by(|a, b| a.total_cmp(b));
        let median = quantile_sorted(&thresholds, 0.5);
        let q25 = quantile_sorted(&thresholds, 0.25);
        let q75 = quantile_sorted(&thresholds, 0.75);
        out.push(PhaseCell {
            epsilon: eps,
            t,
            l_bar,
            median,
            median_gap: median - l_bar,
            q25,
            q75,
            iqr: q75 - q25,
            n: spec.replicates,
            censored,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_validation_catches_bound() {
        let spec = SweepSpec {
            epsilon_grid: vec![0.5],
            time_rule: TimeRule::Absolute(vec![100.0]),
            replicates: 10,
            base_seed: 1,
            dt: 0.1,
            c1_bound: 2.0,
            x_step: 0.25,
            x_halfwidth: 10.0,
        };
        // eps^2 t = 25 > 2
        let v = spec.violations();
        assert!(v.iter().any(|m| m.contains("eps^2 t")));
    }

    #[test]
    fn time_rules_expand() {
        let spec = SweepSpec {
            epsilon_grid: vec![0.25],
            time_rule: TimeRule::MultiplesOfTransitionScale(vec![1.0, 2.0]),
            replicates: 1,
            base_seed: 0,
            dt: 1.0,
            c1_bound: 2.0,
            x_step: 0.25,
            x_halfwidth: 10.0,
        };
        let cells = spec.cells();
        assert_eq!(cells.len(), 2);
        assert!((cells[0].1 - 8.0).abs() < 1e-12); // 0.25^{-3/2} = 8
        assert!((cells[1].1 - 16.0).abs() < 1e-12);
    }

    #[test]
    fn sweep_small_cell_runs_and_gap_is_moderate() {
        let spec = SweepSpec {
            epsilon_grid: vec![0.3],
            time_rule: TimeRule::Absolute(vec![3.0]),
            replicates: 400,
            base_seed: 7,
            dt: 3.0,
            c1_bound: 2.0,
            x_step: 0.25,
            x_halfwidth: 10.0,
        };
        let cells = phase_sweep(&spec).unwrap();
        assert_eq!(cells.len(), 1);
        let c = &cells[0];
        assert!(c.median_gap.abs() < 5.0, "median gap {}", c.median_gap);
        assert!(c.iqr >= 0.0 && c.iqr < 10.0);
    }

    #[test]
    fn thresholds_match_direct_cmd_samples() {
        // duality: survival-scan thresholds and direct displacement samples
        // estimate the same median
        let params = ModelParams::new(0.3, 6.0).unwrap();
        let rf = RootFindSettings::default();
        let l_bar = curves::l_bar(6.0, &params, &rf).unwrap();
        let x_grid: Vec<f64> =
            (0..161).map(|i| (l_bar - 8.0).max(0.05) + i as f64 * 0.1).collect();
        let (mut th, _) = survival_thresholds(&params, &x_grid, 2000, 5, 6.0).unwrap();
        th.sort_by(|a, b| a.total_cmp(b));
        let med_scan = quantile_sorted(&th, 0.5);
        let cmd = crate::sim::estimate_cmd(&params, 2000, 6, 6.0, 2_000_000).unwrap();
        let med_direct = cmd.quantiles[2].value;
        // grid rounding pushes the scan median up by at most one step
        assert!(
            (med_scan - med_direct).abs() < 0.35,
            "scan {med_scan} vs direct {med_direct}"
        );
    }
}
