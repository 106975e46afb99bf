//! The replicate engine: exact exponential branch clocks layered over
//! Gaussian segment increments, with exact bridge-minimum sampling at the
//! origin and bridge-to-chord crossing tests at the upper barrier.
//!
//! All randomness is keyed by (seed, replicate, particle stream, counter),
//! so a replicate is a pure function of its configuration and index, the
//! underlying tree is shared across common-seed couplings, and absorption
//! only prunes it.

use super::{BarrierSpec, BoundaryTag, HitRecord, SimConfig, SimOutcome};
use crate::curves;
use crate::error::Result;
use crate::params::RootFindSettings;
use crate::rng::Stream;

pub struct Engine {
    config: SimConfig,
    /// Time grid 0 = g_0 < ... < g_n = horizon capping segment lengths.
    grid: Vec<f64>,
    /// Upper barrier values on the grid, for modes that have one.
    barrier: Option<Vec<f64>>,
    dt_warning: bool,
}

struct Particle {
    stream: Stream,
    ctr: u64,
    pos: f64,
    time: f64,
    next_branch: f64,
    /// Running max of (x0 - X(s)) along the lineage, bridge-exact.
    sup_dev: f64,
    /// Index of the next grid boundary ahead of `time`.
    next_grid: usize,
}

enum Fate {
    Alive,
    Died(f64),
    Branched,
}

impl Engine {
    pub fn new(config: &SimConfig) -> Result<Engine> {
        config.validate()?;
        let t = config.params.horizon_t;
        let n_steps = if t == 0.0 { 1 } else { (t / config.dt).ceil() as usize };
        let grid: Vec<f64> =
            (0..=n_steps).map(|k| t * k as f64 / n_steps as f64).collect();

        let rf = RootFindSettings::default();
        let barrier = match config.barrier {
            BarrierSpec::OriginPlusK => Some(
                grid.iter()
                    .map(|&s| curves::k_curve(s, &config.params, &rf))
                    .collect::<Result<Vec<_>>>()?,
            ),
            BarrierSpec::OriginPlusH => Some(
                grid.iter()
                    .map(|&s| curves::h_curve(s, &config.params, &rf))
                    .collect::<Result<Vec<_>>>()?,
            ),
            BarrierSpec::ConstantStrip(k) => Some(vec![k; n_steps + 1]),
            _ => None,
        };

        // chord sag of the moving barrier across each cell; the final cell
        // is excluded because the K tip has unbounded slope by construction
        let mut dt_warning = false;
        if matches!(config.barrier, BarrierSpec::OriginPlusK | BarrierSpec::OriginPlusH) {
            let vals = barrier.as_ref().unwrap();
            let curve = |s: f64| match config.barrier {
                BarrierSpec::OriginPlusK => curves::k_curve(s, &config.params, &rf),
                _ => curves::h_curve(s, &config.params, &rf),
            };
            for k in 0..n_steps.saturating_sub(1) {
                let mid = 0.5 * (grid[k] + grid[k + 1]);
                let sag = (curve(mid)? - 0.5 * (vals[k] + vals[k + 1])).abs();
                if sag > 0.01 {
                    dt_warning = true;
                    break;
                }
            }
        }

        if let Some(vals) = &barrier {
            if config.x0 >= vals[0] {
                return Err(crate::error::Error::invalid(format!(
                    "SimConfig.x0 = {} is not below the upper barrier f(0) = {}",
                    config.x0, vals[0]
                )));
            }
        }

        Ok(Engine { config: *config, grid, barrier, dt_warning })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    fn barrier_at(&self, cell: usize, time: f64) -> f64 {
        let vals = self.barrier.as_ref().unwrap();
        let (t0, t1) = (self.grid[cell], self.grid[cell + 1]);
        let w = if t1 > t0 { (time - t0) / (t1 - t0) } else { 0.0 };
        vals[cell] * (1.0 - w) + vals[cell + 1] * w
    }

    /// Run one replicate. Deterministic in (config, replicate).
    pub fn run(&self, replicate: u64) -> SimOutcome {
        let cfg = &self.config;
        let horizon = cfg.params.horizon_t;
        let root_stream = Stream::root(cfg.seed, replicate);
        let mut root = Particle {
            stream: root_stream,
            ctr: 0,
            pos: cfg.x0,
            time: 0.0,
            next_branch: f64::INFINITY,
            sup_dev: 0.0,
            next_grid: 1,
        };
        root.next_branch = if cfg.branching { draw_exp(&mut root) } else { f64::INFINITY };

        let mut stack = vec![root];
        let mut created = 1usize;
        let mut alive = 0usize;
        let mut min_cmd = f64::INFINITY;
        let mut last_death: f64 = 0.0;
        let mut any_death = false;
        let mut hits = Vec::new();
        let mut capped = false;

        while let Some(mut p) = stack.pop() {
            match self.propagate(&mut p, &mut hits) {
                Fate::Alive => {
                    alive += 1;
                    min_cmd = min_cmd.min(p.sup_dev);
                }
                Fate::Died(t) => {
                    any_death = true;
                    last_death = last_death.max(t);
                }
                Fate::Branched => {
                    if created + 2 > cfg.pop_cap {
                        capped = true;
                        break;
                    }
                    created += 2;
                    let mut first = Particle {
                        stream: p.stream.child(0),
                        ctr: 0,
                        pos: p.pos,
                        time: p.time,
                        next_branch: 0.0,
                        sup_dev: p.sup_dev,
                        next_grid: p.next_grid,
                    };
                    first.next_branch = p.time + draw_exp(&mut first);
                    let mut second = Particle {
                        stream: p.stream.child(1),
                        ctr: 0,
                        pos: p.pos,
                        time: p.time,
                        next_branch: 0.0,
                        sup_dev: p.sup_dev,
                        next_grid: p.next_grid,
                    };
                    second.next_branch = p.time + draw_exp(&mut second);
                    stack.push(second);
                    stack.push(first);
                }
            }
        }

        let extinct = !capped && alive == 0;
        let track_cmd = matches!(cfg.barrier, BarrierSpec::NoAbsorption | BarrierSpec::OriginOnly);
        hits.sort_by(|a, b| a.time.total_cmp(&b.time));
        SimOutcome {
            extinct,
            zeta: if extinct {
                if any_death {
                    last_death
                } else {
                    0.0
                }
            } else {
                horizon
            },
            cmd_value: if track_cmd && alive > 0 && !capped { Some(min_cmd) } else { None },
            hit_records: hits,
            final_population: alive,
            capped,
            dt_warning: self.dt_warning,
        }
    }

    /// Advance one particle to its branch time, death, or the horizon.
    fn propagate(&self, p: &mut Particle, hits: &mut Vec<HitRecord>) -> Fate {
        let cfg = &self.config;
        let horizon = cfg.params.horizon_t;
        let rho = cfg.params.rho;
        let origin = cfg.barrier.has_origin();
        let upper = cfg.barrier.has_upper();
        let n = self.grid.len() - 1;

        if horizon == 0.0 {
            return if origin && p.pos <= 0.0 { Fate::Died(0.0) } else { Fate::Alive };
        }
        // an absorbing start dies immediately
        if origin && p.pos <= 0.0 {
            return Fate::Died(p.time);
        }

        while p.time < horizon {
            let gb = self.grid[p.next_grid.min(n)];
            let (seg_end, ends_with) = if p.next_branch <= gb.min(horizon) {
                (p.next_branch, 1u8)
            } else if gb < horizon {
                (gb, 2u8)
            } else {
                (horizon, 0u8)
            };
            let h = seg_end - p.time;

            let z = draw_normal(p);
            let next = p.pos + h.sqrt() * z - rho * h;
            let u_min = draw_unit(p);
            // exact minimum of the Brownian bridge over the segment
            let m = 0.5 * (p.pos + next - ((p.pos - next).powi(2) - 2.0 * h * u_min.ln()).sqrt());

            if origin && m <= 0.0 {
                let t_hit = if next <= 0.0 {
                    // endpoint crossed: linear interpolation
                    p.time + h * (p.pos / (p.pos - next)).clamp(0.0, 1.0)
                } else {
                    p.time + 0.5 * h
                };
                self.record(hits, t_hit, BoundaryTag::Origin);
                return Fate::Died(t_hit);
            }
            p.sup_dev = p.sup_dev.max(cfg.x0 - m);

            if upper {
                let cell = (p.next_grid - 1).min(n - 1);
                let b0 = self.barrier_at(cell, p.time);
                let b1 = self.barrier_at(cell, seg_end);
                let d0 = b0 - p.pos;
                let d1 = b1 - next;
                if d1 <= 0.0 {
                    // chord crossing time of two linear motions
                    let denom = (next - p.pos) - (b1 - b0);
                    let theta = if denom.abs() > 1e-300 { (d0 / denom).clamp(0.0, 1.0) } else { 1.0 };
                    let t_hit = p.time + theta * h;
                    self.record(hits, t_hit, BoundaryTag::Upper);
                    return Fate::Died(t_hit);
                }
                let u_up = draw_unit(p);
                if u_up < (-2.0 * d0 * d1 / h).exp() {
                    let t_hit = p.time + 0.5 * h;
                    self.record(hits, t_hit, BoundaryTag::Upper);
                    return Fate::Died(t_hit);
                }
            }

            p.pos = next;
            p.time = seg_end;
            match ends_with {
                1 => return Fate::Branched,
                2 => p.next_grid += 1,
                _ => {}
            }
        }
        Fate::Alive
    }

    fn record(&self, hits: &mut Vec<HitRecord>, time: f64, boundary: BoundaryTag) {
        if let Some((r, s)) = self.config.record_hits_window {
            if time >= r && time <= s {
                hits.push(HitRecord { time, boundary });
            }
        }
    }
}

#[inline]
fn draw_unit(p: &mut Particle) -> f64 {
    let u = p.stream.unit(p.ctr);
    p.ctr += 1;
    u
}

#[inline]
fn draw_normal(p: &mut Particle) -> f64 {
    let u1 = draw_unit(p);
    let u2 = draw_unit(p);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

#[inline]
fn draw_exp(p: &mut Particle) -> f64 {
    -draw_unit(p).ln()
}

/// One-shot simulation of replicate 0 of the configuration.
pub fn simulate(config: &SimConfig) -> Result<SimOutcome> {
    Ok(Engine::new(config)?.run(0))
}

/// Drawn exponential branch waits (uncensored) from the branching skeleton
/// of `n` replicates; for distributional tests of the clocks.
pub fn collect_branch_waits(horizon: f64, n: usize, seed: u64, max_waits: usize) -> Vec<f64> {
    let mut waits = Vec::with_capacity(max_waits);
    'reps: for rep in 0..n {
        let mut stack = vec![(Stream::root(seed, rep as u64), 0.0f64)];
        while let Some((stream, birth)) = stack.pop() {
            let wait = -stream.unit(0).ln();
            waits.push(wait);
            if waits.len() >= max_waits {
                break 'reps;
            }
            if birth + wait < horizon {
                stack.push((stream.child(1), birth + wait));
                stack.push((stream.child(0), birth + wait));
            }
        }
    }
    waits
}
