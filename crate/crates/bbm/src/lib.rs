//! Numerics and simulation for branching Brownian motion with absorption:
//! the barrier-curve function family, killed-diffusion strip densities, a
//! reproducible Monte Carlo engine for the absorbed particle system, and
//! scripted experiments around the consistent-maximal-displacement phase
//! transition.
//!
//! The library is the primary interface; see `examples/` for one runnable
//! program per capability and the thin `bbm` binary for the subcommand CLI.

pub mod constants;
pub mod density;
pub mod curves;
pub mod error;
pub mod params;
pub mod rng;
pub mod sim;
pub mod stats;
pub mod rootfind;

pub use error::{Error, Result};
pub use params::{ModelParams, RootFindSettings};
pub mod cli;
