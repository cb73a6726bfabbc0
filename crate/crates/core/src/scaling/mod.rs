//! Tail, global and local scaling laws measured on sampled graphs.

mod index;
mod tail;
mod window;
mod xi;

pub use index::{
    converged_exponents, local_sigma_empirical, predict_sigma, IndexOptions, IndexReport, Regime, Rung, SigmaPrediction,
};
pub use tail::{tail_exponent, TailReport};
pub use window::{default_window, log_grid, MIN_GRAPH_POINTS, POINTS_PER_DECADE};
pub use xi::{global_xi, periodic_trapezoid, xi_at, XiReport};
