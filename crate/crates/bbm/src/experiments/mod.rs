//! Scripted desk-scale studies: the backward barrier ODE, the phase-
//! transition sweep, the survival-threshold window, the F-KPP front
//! tracker, and the supercritical limit table.

mod fkpp;
mod ode;
mod supercritical;
mod sweep;
mod threshold;

pub use fkpp::{fkpp_front, FrontPoint, FrontTrackerConfig};
pub use ode::{ode_heuristic_check, OdeCheckResult};
pub use supercritical::{supercritical_limit_check, SupercriticalRow};
pub use sweep::{phase_sweep, survival_thresholds, PhaseCell, SweepSpec, TimeRule};
pub use threshold::{survival_threshold_study, ThresholdRow, ThresholdStudy};
