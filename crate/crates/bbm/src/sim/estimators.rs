//! Replicate-level estimators built on the engine: survival probability,
//! consistent-maximal-displacement samples, and boundary hit counts.

use super::engine::Engine;
use super::{BarrierSpec, BoundaryTag, EstimateWithCI, SeedManifest, SimConfig};
use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::rng::Stream;
use crate::stats::quantile_sorted;
use rayon::prelude::*;

fn refuse_if_capped(capped: usize, n: usize, what: &str) -> Result<()> {
    if capped * 100 > n {
        return Err(Error::underpowered(format!(
            "{what}: {capped} of {n} replicates hit the population cap"
        )));
    }
    Ok(())
}

/// Binomial estimate of P_x(zeta > t) for the process absorbed at the
/// origin. Deterministic in (params, n, seed, dt); monotone nondecreasing
/// in x under a common seed.
pub fn estimate_survival(
    x: f64,
    params: &ModelParams,
    n: usize,
    seed: u64,
    dt: f64,
) -> Result<EstimateWithCI> {
    if n == 0 {
        return Err(Error::invalid("estimate_survival: n must be >= 1"));
    }
    let config = SimConfig {
        params: *params,
        x0: x,
        barrier: BarrierSpec::OriginOnly,
        dt,
        pop_cap: super::default_pop_cap(),
        seed,
        record_hits_window: None,
        branching: true,
    };
    let engine = Engine::new(&config)?;
    let outcomes: Vec<(bool, bool)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let o = engine.run(i as u64);
            (o.capped, !o.extinct)
        })
        .collect();
    let capped = outcomes.iter().filter(|(c, _)| *c).count();
    refuse_if_capped(capped, n, "estimate_survival")?;
    let valid = n - capped;
    let survivors = outcomes.iter().filter(|(c, s)| !*c && *s).count();
    let p = survivors as f64 / valid as f64;
    Ok(EstimateWithCI {
        point: p,
        std_error: (p * (1.0 - p) / valid as f64).sqrt(),
        n_replicates: valid,
        seed_manifest: SeedManifest::new(seed),
    })
}

/// A quantile of the sampled statistic with a bootstrap confidence interval.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct QuantileEstimate {
    pub q: f64,
    pub value: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

/// Empirical sample of the consistent maximal displacement.
#[derive(Debug, Clone)]
pub struct CmdSample {
    /// One value per replicate, in replicate order.
    pub values: Vec<f64>,
    pub quantiles: Vec<QuantileEstimate>,
    pub n_replicates: usize,
    pub seed_manifest: SeedManifest,
}

/// Sample the consistent maximal displacement at the horizon: free BBM
/// from the origin, each lineage tracking the running sup of its deviation
/// below the drift line.
///
/// Branch clocks, increments and per-segment minima are sampled exactly,
/// so the law of the sample does not depend on dt; the feasible horizon is
/// bounded by pop_cap ~ e^t.
pub fn estimate_cmd(
    params: &ModelParams,
    n: usize,
    seed: u64,
    dt: f64,
    pop_cap: usize,
) -> Result<CmdSample> {
    if n == 0 {
        return Err(Error::invalid("estimate_cmd: n must be >= 1"));
    }
    let config = SimConfig {
        params: *params,
        x0: 0.0,
        barrier: BarrierSpec::NoAbsorption,
        dt,
        pop_cap,
        seed,
        record_hits_window: None,
        branching: true,
    };
    let engine = Engine::new(&config)?;
    let raw: Vec<Option<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let o = engine.run(i as u64);
            if o.capped {
                None
            } else {
                o.cmd_value
            }
        })
        .collect();
    let capped = raw.iter().filter(|v| v.is_none()).count();
    refuse_if_capped(capped, n, "estimate_cmd")?;
    let values: Vec<f64> = raw.into_iter().flatten().collect();

    let mut sorted = values.clone();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let m = sorted.len();
    let boot_stream = Stream::root(seed ^ 0x0b00_75f0_0d5e_ed00, 0);
    let levels = [0.10, 0.25, 0.50, 0.75, 0.90];
    let b_count = 200;
    let mut quantiles = Vec::with_capacity(levels.len());
    for (li, &q) in levels.iter().enumerate() {
        let mut boots = Vec::with_capacity(b_count);
        for b in 0..b_count {
            let s = boot_stream.child((li * b_count + b) as u64);
            let mut resample: Vec<f64> =
                (0..m).map(|j| sorted[(s.bits(j as u64) % m as u64) as usize]).collect();
            resample.sort_by(|a, b| a.total_cmp(b));
            boots.push(quantile_sorted(&resample, q));
        }
        boots.sort_by(|a, b| a.total_cmp(b));
        quantiles.push(QuantileEstimate {
            q,
            value: quantile_sorted(&sorted, q),
            ci_lo: quantile_sorted(&boots, 0.025),
            ci_hi: quantile_sorted(&boots, 0.975),
        });
    }
    Ok(CmdSample { values, quantiles, n_replicates: m, seed_manifest: SeedManifest::new(seed) })
}

/// First and second moments of the number of upper-boundary hits in the
/// recording window.
#[derive(Debug, Clone)]
pub struct HitMoments {
    pub mean: EstimateWithCI,
    pub mean_sq: EstimateWithCI,
    /// P(R > 0), the fraction of replicates with at least one hit.
    pub p_positive: EstimateWithCI,
    /// Upper-hit count per replicate, in replicate order.
    pub counts: Vec<u32>,
    /// All recorded upper-hit times, concatenated in replicate order.
    pub hit_times: Vec<f64>,
}

/// Estimate E[R^f_t(r, s)] and E[R^2] for the process with an upper
/// barrier; the window (r, s) must be set in the configuration.
pub fn count_hits(config: &SimConfig, n: usize) -> Result<HitMoments> {
    if n == 0 {
        return Err(Error::invalid("count_hits: n must be >= 1"));
    }
    if !config.barrier.has_upper() {
        return Err(Error::invalid("count_hits: configuration has no upper barrier"));
    }
    if config.record_hits_window.is_none() {
        return Err(Error::invalid("count_hits: record_hits_window must be set"));
    }
    let engine = Engine::new(config)?;
    let per_rep: Vec<Option<(u32, Vec<f64>)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let o = engine.run(i as u64);
            if o.capped {
                None
            } else {
                let times: Vec<f64> = o
                    .hit_records
                    .iter()
                    .filter(|h| h.boundary == BoundaryTag::Upper)
                    .map(|h| h.time)
                    .collect();
                Some((times.len() as u32, times))
            }
        })
        .collect();
    let capped = per_rep.iter().filter(|v| v.is_none()).count();
    refuse_if_capped(capped, n, "count_hits")?;

    let mut counts = Vec::with_capacity(n - capped);
    let mut hit_times = Vec::new();
    for item in per_rep.into_iter().flatten() {
        counts.push(item.0);
        hit_times.extend(item.1);
    }
    let m = counts.len() as f64;
    let mean = counts.iter().map(|&c| c as f64).sum::<f64>() / m;
    let mean_sq = counts.iter().map(|&c| (c as f64) * (c as f64)).sum::<f64>() / m;
    let var = (mean_sq - mean * mean).max(0.0);
    let fourth = counts.iter().map(|&c| (c as f64).powi(4)).sum::<f64>() / m;
    let var_sq = (fourth - mean_sq * mean_sq).max(0.0);
    let p_pos = counts.iter().filter(|&&c| c > 0).count() as f64 / m;
    let manifest = SeedManifest::new(config.seed);
    Ok(HitMoments {
        mean: EstimateWithCI {
            point: mean,
            std_error: (var / m).sqrt(),
            n_replicates: counts.len(),
            seed_manifest: manifest.clone(),
        },
        mean_sq: EstimateWithCI {
            point: mean_sq,
            std_error: (var_sq / m).sqrt(),
            n_replicates: counts.len(),
            seed_manifest: manifest.clone(),
        },
        p_positive: EstimateWithCI {
            point: p_pos,
            std_error: (p_pos * (1.0 - p_pos) / m).sqrt(),
            n_replicates: counts.len(),
            seed_manifest: manifest,
        },
        counts,
        hit_times,
    })
}
