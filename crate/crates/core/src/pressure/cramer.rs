use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fit::least_squares;
use crate::graph::GridKind;
use crate::maps::DrivenSystem;

/// Empirical tail `m{theta : g_n(theta) <= kappa e^{n delta} for some n <= n_max}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CramerReport {
    pub s: f64,
    pub delta: f64,
    pub kappas: Vec<f64>,
    pub masses: Vec<f64>,
    /// Log-log slope of mass against `kappa` over the positive-mass points.
    pub slope: f64,
    pub r2: f64,
    pub grid_size: usize,
    pub n_max: usize,
}

pub fn cramer_tail(
    sys: &DrivenSystem,
    s: f64,
    delta: f64,
    kappas: &[f64],
    grid_size: usize,
    n_max: usize,
) -> Result<CramerReport> {
    let mut minima: Vec<f64> = GridKind::Jittered
        .points(grid_size)
        .par_iter()
        .map(|&t| {
            let mut y = t;
            let mut log_gn = 0.0;
            let mut lowest = f64::INFINITY;
            for n in 1..=n_max {
                y = sys.base().image(y);
                log_gn += sys.mult().log_eval(y);
                lowest = lowest.min(log_gn - n as f64 * delta);
            }
            lowest
        })
        .collect();
    minima.sort_by(f64::total_cmp);
    let masses: Vec<f64> = kappas
        .iter()
        .map(|k| minima.partition_point(|&m| m <= k.ln()) as f64 / grid_size as f64)
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = kappas
        .iter()
        .zip(&masses)
        .filter(|(_, &m)| m > 0.0)
        .map(|(k, m)| (k.ln(), m.ln()))
        .unzip();
    if xs.len() < 3 {
        return Err(Error::InsufficientMass { points: xs.len() });
    }
    let fit = least_squares(&xs, &ys).ok_or(Error::InsufficientMass { points: xs.len() })?;
    Ok(CramerReport {
        s,
        delta,
        kappas: kappas.to_vec(),
        masses,
        slope: fit.slope,
        r2: fit.r2,
        grid_size,
        n_max,
    })
}
