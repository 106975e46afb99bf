//! Model parameters shared by every module.

use crate::constants::SQRT_2;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// The (epsilon, t) pair indexing an experiment.
///
/// `rho = sqrt(2) + epsilon` always; epsilon may be negative (supercritical
/// drift) but the barrier-curve operations other than the G branch require
/// `epsilon` in (0, 1) and check it themselves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub epsilon: f64,
    pub rho: f64,
    pub horizon_t: f64,
}

impl ModelParams {
    pub fn new(epsilon: f64, horizon_t: f64) -> Result<Self> {
        if !epsilon.is_finite() {
            return Err(Error::invalid(format!("ModelParams: epsilon = {epsilon} not finite")));
        }
        if !(horizon_t >= 0.0) {
            return Err(Error::invalid(format!(
                "ModelParams: horizon_t = {horizon_t} must be nonnegative"
            )));
        }
        Ok(ModelParams { epsilon, rho: SQRT_2 + epsilon, horizon_t })
    }

    /// Construct from a drift value instead of an offset.
    pub fn from_rho(rho: f64, horizon_t: f64) -> Result<Self> {
        Self::new(rho - SQRT_2, horizon_t)
    }

    /// Validate the invariants; returns every violation found.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !self.epsilon.is_finite() {
            v.push("ModelParams.epsilon: not finite".into());
        }
        if (self.rho - self.epsilon - SQRT_2).abs() > 1e-12 {
            v.push(format!(
                "ModelParams: rho - epsilon = {} differs from sqrt(2)",
                self.rho - self.epsilon
            ));
        }
        if !(self.horizon_t >= 0.0) {
            v.push(format!("ModelParams.horizon_t: {} is negative", self.horizon_t));
        }
        v
    }

    /// Check the subcritical-branch requirement epsilon in (0, 1).
    pub fn require_subcritical(&self) -> Result<()> {
        if self.epsilon <= 0.0 || self.epsilon >= 1.0 {
            return Err(Error::invalid(format!(
                "epsilon = {} outside (0, 1); only the G branch accepts epsilon < 0",
                self.epsilon
            )));
        }
        Ok(())
    }
}

/// Tolerances for the bracketed inverse solvers.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RootFindSettings {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_iterations: u32,
}

impl Default for RootFindSettings {
    fn default() -> Self {
        RootFindSettings { abs_tol: 1e-12, rel_tol: 1e-12, max_iterations: 200 }
    }
}

impl RootFindSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) {
            return Err(Error::invalid("RootFindSettings: tolerances must be positive"));
        }
        if self.max_iterations < 1 {
            return Err(Error::invalid("RootFindSettings: max_iterations must be >= 1"));
        }
        Ok(())
    }

    /// Residual tolerance for solving f(u) = v.
    pub fn residual_tol(&self, v: f64) -> f64 {
        self.abs_tol + self.rel_tol * v.abs().max(1.0)
    }
}
