//! Weighted transfer operators, their Perron roots, and the pressure zero.

mod cramer;
mod spectral;
mod sstar;
mod transfer;

pub use cramer::{cramer_tail, CramerReport};
pub use spectral::{spectral_radius, PerronRoot, DEFAULT_MAX_ITER};
pub use sstar::{convexity_violations, find_sstar, pressure, psi_prime_at_zero, PressureCurve, PressureOptions, S_CAP};
pub use transfer::{build_transfer_matrix, ulam_cells, MatrixMode, TransferMatrix};
