//! Reproducible Monte Carlo engine for dyadic branching Brownian motion
//! with drift -rho, absorption at the origin and optional upper barriers.

mod engine;
mod estimators;

pub use engine::{collect_branch_waits, simulate, Engine};
pub use estimators::{
    count_hits, estimate_cmd, estimate_survival, CmdSample, HitMoments, QuantileEstimate,
};

use crate::error::{Error, Result};
use crate::params::ModelParams;
use serde::{Deserialize, Serialize};

/// Absorbing geometry of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BarrierSpec {
    OriginOnly,
    /// Origin plus the K_eps(.) curve (time-reversed L*).
    OriginPlusK,
    /// Origin plus the H_eps(.) curve (time-reversed L).
    OriginPlusH,
    /// Origin plus a constant level K.
    ConstantStrip(f64),
    NoAbsorption,
}

impl BarrierSpec {
    pub fn has_origin(&self) -> bool {
        !matches!(self, BarrierSpec::NoAbsorption)
    }

    pub fn has_upper(&self) -> bool {
        matches!(
            self,
            BarrierSpec::OriginPlusK | BarrierSpec::OriginPlusH | BarrierSpec::ConstantStrip(_)
        )
    }
}

fn default_true() -> bool {
    true
}

pub(crate) fn default_pop_cap() -> usize {
    2_000_000
}

/// Full configuration of one simulation.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub params: ModelParams,
    pub x0: f64,
    pub barrier: BarrierSpec,
    /// Segment cap. Branching times are exact regardless; dt controls the
    /// linearization of moving barriers and the time resolution of hit and
    /// extinction records. Flat-barrier absorption and the running-sup
    /// statistic use exact bridge sampling, so their laws do not depend
    /// on dt.
    pub dt: f64,
    #[serde(default = "default_pop_cap")]
    pub pop_cap: usize,
    pub seed: u64,
    #[serde(default)]
    pub record_hits_window: Option<(f64, f64)>,
    /// Disable to propagate a single non-branching particle (validation
    /// runs of the absorption machinery).
    #[serde(default = "default_true")]
    pub branching: bool,
}

impl SimConfig {
    /// Returns every violated invariant.
    pub fn violations(&self) -> Vec<String> {
        let mut v = self.params.violations();
        if !(self.dt > 0.0) {
            v.push(format!("SimConfig.dt: {} must be > 0", self.dt));
        }
        if self.pop_cap < 1 {
            v.push("SimConfig.pop_cap: must be >= 1".into());
        }
        if self.barrier.has_origin() && !(self.x0 > 0.0) {
            v.push(format!(
                "SimConfig.x0: {} must be > 0 when origin absorption is active",
                self.x0
            ));
        }
        if let BarrierSpec::ConstantStrip(k) = self.barrier {
            if !(k > 0.0) {
                v.push(format!("BarrierSpec::ConstantStrip: width {k} must be > 0"));
            } else if self.x0 >= k {
                v.push(format!("SimConfig.x0: {} must be below the strip width {k}", self.x0));
            }
        }
        if matches!(self.barrier, BarrierSpec::OriginPlusK | BarrierSpec::OriginPlusH)
            && !(self.params.horizon_t > 0.0)
        {
            v.push("BarrierSpec: curve barriers require horizon_t > 0".into());
        }
        if let Some((r, s)) = self.record_hits_window {
            if !(0.0 <= r && r < s) {
                v.push(format!("SimConfig.record_hits_window: ({r}, {s}) is not ordered"));
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

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryTag {
    Origin,
    Upper,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct HitRecord {
    pub time: f64,
    pub boundary: BoundaryTag,
}

/// Result of one replicate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimOutcome {
    pub extinct: bool,
    /// Extinction time, or the horizon if the population survives.
    pub zeta: f64,
    /// min over particles alive at the horizon of the lineage running
    /// sup of (x0 - X(s)). Present in NoAbsorption and OriginOnly modes
    /// when at least one particle is alive.
    pub cmd_value: Option<f64>,
    /// Boundary hits inside `record_hits_window`, in deterministic order.
    pub hit_records: Vec<HitRecord>,
    pub final_population: usize,
    /// The particle budget was exhausted; statistics from this replicate
    /// are unusable for unbiased estimates.
    pub capped: bool,
    /// dt exceeds the curvature scale of the moving barrier; chord
    /// linearization may be poor.
    pub dt_warning: bool,
}

/// Monte Carlo estimate with its standard error and seed provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimateWithCI {
    pub point: f64,
    pub std_error: f64,
    pub n_replicates: usize,
    pub seed_manifest: SeedManifest,
}

/// Base seed plus the replicate indexing rule, enough to reproduce every
/// stream of the run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeedManifest {
    pub base_seed: u64,
    pub rule: String,
}

impl SeedManifest {
    pub fn new(base_seed: u64) -> Self {
        SeedManifest {
            base_seed,
            rule: "stream(replicate i) = Stream::root(base_seed, i); particle children split as \
                   stream.child(0|1); draw j of a particle is stream.bits(j)"
                .into(),
        }
    }
}
