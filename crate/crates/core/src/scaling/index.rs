use std::io::Write;
use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::least_squares;
use crate::graph::{pullback_value, GridKind};
use crate::maps::{orbit_exponents, DrivenSystem};
use crate::scaling::tail::write_columns;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Plus,
    Minus,
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SigmaPrediction {
    pub sigma_plus: f64,
    pub sigma_minus: f64,
    pub regime: Regime,
}

fn degenerate(gamma: f64, lambda: f64) -> bool {
    (gamma + lambda).abs() <= 1e-6 * (gamma.abs() + lambda.abs())
}

/// Local indices from the exponents: `sigma_+ = (G + L)/L s*` when `G + L > 0`,
/// `sigma_- = -(G + L)/L` when `G + L < 0`.
pub fn predict_sigma(gamma: f64, lambda: f64, s_star: f64) -> Result<SigmaPrediction> {
    if !(lambda > 0.0 && s_star > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need Lambda > 0 and s* > 0 (got {lambda}, {s_star})"
        )));
    }
    if degenerate(gamma, lambda) {
        return Err(Error::DegenerateExponent {
            gamma,
            lambda,
            sum: gamma + lambda,
        });
    }
    let ratio = (gamma + lambda) / lambda;
    Ok(if ratio > 0.0 {
        SigmaPrediction {
            sigma_plus: ratio * s_star,
            sigma_minus: 0.0,
            regime: Regime::Plus,
        }
    } else {
        SigmaPrediction {
            sigma_plus: 0.0,
            sigma_minus: -ratio,
            regime: Regime::Minus,
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexOptions {
    /// Points per ladder rung.
    pub local_grid: usize,
    /// Pullback depth beyond the rung index `k`.
    pub extra_depth: usize,
    /// Birkhoff depth; convergence is judged against half of it.
    pub birkhoff_depth: usize,
    pub birkhoff_tol: f64,
}

impl Default for IndexOptions {
    fn default() -> Self {
        Self {
            local_grid: 200_000,
            extra_depth: 200,
            birkhoff_depth: 1000,
            birkhoff_tol: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rung {
    pub k: usize,
    pub eps: f64,
    /// Length of the neighbourhood after clipping to `[0, 1)`.
    pub width: f64,
    pub sigma: f64,
    pub one_minus_sigma: f64,
    /// `m{phi <= eps}` relative to the neighbourhood.
    pub mass_below: f64,
    pub used: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexReport {
    pub theta: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub s_star: f64,
    pub regime: Regime,
    pub predicted_plus: f64,
    pub predicted_minus: f64,
    /// Regressed exponent for the active regime.
    pub empirical: f64,
    pub r2: f64,
    /// `empirical - predicted`.
    pub residual: f64,
    pub relative_error: f64,
    pub rungs: Vec<Rung>,
    /// Rungs where `1 - Sigma` exceeded the relative mass below `eps`.
    pub bound_violations: usize,
}

impl IndexReport {
    pub fn predicted(&self) -> f64 {
        match self.regime {
            Regime::Plus => self.predicted_plus,
            _ => self.predicted_minus,
        }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let eps: Vec<f64> = self.rungs.iter().map(|r| r.eps).collect();
        let sigma: Vec<f64> = self.rungs.iter().map(|r| r.sigma).collect();
        let gap: Vec<f64> = self.rungs.iter().map(|r| r.one_minus_sigma).collect();
        write_columns(w, &["eps", "sigma", "one_minus_sigma"], &[&eps, &sigma, &gap])
    }
}

/// Birkhoff exponents at depth `n`, rejected if they moved by more than `tol`
/// (relative to `|G| + |L|`) since depth `n / 2`.
pub fn converged_exponents(sys: &DrivenSystem, theta: f64, n: usize, tol: f64) -> Result<(f64, f64)> {
    let (g, l) = orbit_exponents(sys, theta, n);
    let (g2, l2) = orbit_exponents(sys, theta, (n / 2).max(1));
    let change = (g - g2).abs().max((l - l2).abs()) / (g.abs() + l.abs());
    if change > tol {
        return Err(Error::NotConverged { theta, change });
    }
    Ok((g, l))
}

/// Regresses the local index at `theta` over the ladder
/// `eps_k = |(S^k)'(theta)|^{-1} / 2`, `k` in `k_range`.
///
/// Each rung integrates over `[theta - eps, theta + eps]` clipped to `[0, 1)` with
/// fresh pullbacks of depth `k + extra_depth`.
pub fn local_sigma_empirical(
    sys: &DrivenSystem,
    theta: f64,
    k_range: RangeInclusive<usize>,
    s_star: f64,
    opts: &IndexOptions,
) -> Result<IndexReport> {
    if !sys.base().is_full_branch() {
        return Err(Error::InvalidParameter(
            "the eps ladder needs a full-branch base map".into(),
        ));
    }
    if k_range.is_empty() || opts.local_grid < 2 {
        return Err(Error::InvalidParameter("empty ladder or local grid".into()));
    }
    let (gamma, lambda) = converged_exponents(sys, theta, opts.birkhoff_depth, opts.birkhoff_tol)?;
    let pred = predict_sigma(gamma, lambda, s_star)?;

    let mut rungs: Vec<Rung> = k_range
        .map(|k| {
            let eps = 0.5 * (-sys.base().log_deriv_n(theta, k)).exp();
            let lo = (theta - eps).max(0.0);
            let hi = (theta + eps).min(1.0);
            let depth = k + opts.extra_depth;
            let m = opts.local_grid;
            let gaps: Vec<f64> = (0..m)
                .into_par_iter()
                .map(|i| {
                    let t = lo + (hi - lo) * GridKind::Jittered.point(i, m);
                    eps - pullback_value(sys, t, depth)
                })
                .collect();
            // summed in index order so results do not depend on scheduling
            let gap: f64 = gaps.iter().map(|g| g.max(0.0)).sum();
            let below = gaps.iter().filter(|&&g| g >= 0.0).count() as f64;
            let one_minus_sigma = gap / m as f64 / eps;
            Rung {
                k,
                eps,
                width: hi - lo,
                sigma: 1.0 - one_minus_sigma,
                one_minus_sigma,
                mass_below: below / m as f64,
                used: false,
            }
        })
        .collect();

    let bound_violations = rungs
        .iter()
        .filter(|r| r.one_minus_sigma > r.mass_below * (1.0 + 1e-12))
        .count();
    for r in rungs.iter_mut() {
        r.used = match pred.regime {
            Regime::Plus => r.one_minus_sigma > 10.0 * f64::EPSILON / r.eps,
            _ => r.sigma > 0.0,
        };
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = rungs
        .iter()
        .filter(|r| r.used)
        .map(|r| {
            let y = match pred.regime {
                Regime::Plus => r.one_minus_sigma,
                _ => r.sigma,
            };
            (r.eps.ln(), y.ln())
        })
        .unzip();
    let fit = least_squares(&xs, &ys).ok_or(Error::InsufficientMass { points: xs.len() })?;
    let predicted = match pred.regime {
        Regime::Plus => pred.sigma_plus,
        _ => pred.sigma_minus,
    };
    Ok(IndexReport {
        theta,
        gamma,
        lambda,
        s_star,
        regime: pred.regime,
        predicted_plus: pred.sigma_plus,
        predicted_minus: pred.sigma_minus,
        empirical: fit.slope,
        r2: fit.r2,
        residual: fit.slope - predicted,
        relative_error: (fit.slope - predicted).abs() / predicted,
        rungs,
        bound_violations,
    })
}
