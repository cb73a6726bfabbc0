//! Base maps, multipliers, fiber maps and hyperbolic drivers.

mod driver;
mod fiber;
mod hypothesis;
mod interval_map;
mod multiplier;
mod orbits;
mod system;

pub use driver::{DriverState, HyperbolicDriver, StateMultiplier};
pub use fiber::{FiberKind, FiberMap};
pub use hypothesis::{acim_mean_log_g, validate_hypotheses, HypothesisReport, HypothesisStatus};
pub use interval_map::{reduce_unit, Branch, BranchFn, MapStep, MarkovIntervalMap, SmoothBranch};
pub use multiplier::{ClosedFormFn, Holder, Multiplier, MultiplierKind};
pub use orbits::{find_periodic_orbits, PeriodicOrbit, MAX_SEARCH_PERIOD};
pub use system::{orbit_exponents, DrivenSystem};

use crate::error::Result;

/// Evaluates the map at `x`: reduced image, `|S'(x)|` and branch index.
pub fn apply_map(map: &MarkovIntervalMap, x: f64) -> MapStep {
    map.apply(x)
}

/// Baker transformation with split `s`.
pub fn baker_driver(s: f64) -> Result<HyperbolicDriver> {
    HyperbolicDriver::baker(s)
}
