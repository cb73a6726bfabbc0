//! Pullback approximants of the maximal invariant graph.

mod cohomology;
mod grid;
mod pullback;

pub use cohomology::{reduce_multiplier, twosided_pullback, twosided_pullback_log, ReducedMultiplier};
pub use grid::GridKind;
pub use pullback::{
    compute_graph, compute_graph_on, compute_graph_with, fold, pullback_log, pullback_value, GraphOptions, GraphSample,
};
