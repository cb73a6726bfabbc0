//! Maximal invariant graphs of concave skew products over expanding Markov maps,
//! their pressure zeros, and the tail and stability-index scaling laws.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod fit;
pub mod graph;
pub mod maps;
pub mod presets;
pub mod pressure;
pub mod scaling;

pub use error::{Error, Result};
pub use graph::{GraphSample, ReducedMultiplier};
pub use maps::{
    DrivenSystem, FiberKind, FiberMap, HyperbolicDriver, HypothesisReport, HypothesisStatus, MarkovIntervalMap,
    Multiplier, PeriodicOrbit, StateMultiplier,
};
pub use pressure::{MatrixMode, PressureCurve, TransferMatrix};
pub use scaling::{IndexReport, TailReport, XiReport};

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
