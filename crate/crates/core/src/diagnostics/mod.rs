//! Runtime checks of the distortion estimates and the two-sided comparison bound.

mod conjugacy;
mod distortion;
mod schedule;
mod sweep;

pub use conjugacy::{check_conjugacy_bound, ConjugacyReport};
pub use distortion::{
    check_branch_distortion, check_graph_lower_bound, DistortionReport, LowerBoundReport, MARGIN_SLACK,
};
pub use schedule::AlphaSchedule;
pub use sweep::{distortion_sweep, SweepSummary};
