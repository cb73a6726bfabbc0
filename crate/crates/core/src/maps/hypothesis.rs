use serde::Serialize;

use crate::error::Result;
use crate::maps::{find_periodic_orbits, DrivenSystem, PeriodicOrbit};
use crate::pressure::{build_transfer_matrix, spectral_radius, MatrixMode, DEFAULT_MAX_ITER};

/// Outcome of the sign test `min over orbits < 0 < acim mean` for `log g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum HypothesisStatus {
    Satisfied,
    Violated,
    /// No negative orbit found; the search does not cover every invariant measure.
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport {
    /// Estimate of the integral of `log g` against the acim.
    pub acim_log_g_mean: f64,
    /// Smallest orbit average of `log g` among the periodic orbits found.
    pub worst_orbit_mean: f64,
    pub witness: Option<PeriodicOrbit>,
    pub status: HypothesisStatus,
    pub max_period: usize,
    pub orbits_searched: usize,
    pub acim_resolution: usize,
}

impl HypothesisReport {
    /// Scale window `(lo, hi)`: the multiplier `r g` passes the sign test
    /// exactly for `lo < r < hi`.
    pub fn scale_window(&self) -> (f64, f64) {
        ((-self.acim_log_g_mean).exp(), (-self.worst_orbit_mean).exp())
    }
}

/// Estimates the acim mean of `log g` from the Ulam stationary density and
/// searches periodic orbits for a negative average.
pub fn validate_hypotheses(sys: &DrivenSystem, max_period: usize, acim_resolution: usize) -> Result<HypothesisReport> {
    let acim_log_g_mean = acim_mean_log_g(sys, acim_resolution)?;
    let orbits = find_periodic_orbits(sys.base(), sys.mult(), max_period)?;
    let witness = orbits.first().cloned();
    let worst_orbit_mean = witness.as_ref().map_or(f64::INFINITY, |o| o.mean_log_g);

    let (inf_g, sup_g) = sys.mult().bounds();
    let status = if acim_log_g_mean <= 0.0 || inf_g >= 1.0 || sup_g <= 1.0 {
        HypothesisStatus::Violated
    } else if worst_orbit_mean < 0.0 {
        HypothesisStatus::Satisfied
    } else {
        HypothesisStatus::Undetermined
    };
    Ok(HypothesisReport {
        acim_log_g_mean,
        worst_orbit_mean,
        witness,
        status,
        max_period,
        orbits_searched: orbits.len(),
        acim_resolution,
    })
}

/// `integral of log g d(mu_ac)` with the Ulam stationary density at `resolution` cells.
pub fn acim_mean_log_g(sys: &DrivenSystem, resolution: usize) -> Result<f64> {
    let m = build_transfer_matrix(sys, 0.0, resolution, MatrixMode::Ulam)?;
    let eig = spectral_radius(&m, 1e-13, DEFAULT_MAX_ITER)?;
    let masses = m.cell_masses(&eig.vector);
    Ok(m.cell_midpoints()
        .iter()
        .zip(&masses)
        .map(|(&c, &w)| w * sys.mult().log_eval(c))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{FiberMap, MarkovIntervalMap, Multiplier};
    use crate::presets;

    #[test]
    fn pc42_is_satisfied() {
        let r = validate_hypotheses(&presets::pc42(), 4, 256).unwrap();
        assert!((r.acim_log_g_mean - 0.5 * 2f64.ln()).abs() < 1e-10);
        assert!((r.worst_orbit_mean + 0.25 * 2f64.ln()).abs() < 1e-12);
        assert_eq!(r.status, HypothesisStatus::Satisfied);
        let w = r.witness.unwrap();
        let mut pts = w.points.clone();
        pts.sort_by(f64::total_cmp);
        for (p, q) in pts.iter().zip([7.0, 11.0, 13.0, 14.0]) {
            assert!((p - q / 15.0).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_multiplier_is_violated() {
        let base = MarkovIntervalMap::doubling();
        let g = Multiplier::constant(2.0).unwrap();
        let sys = DrivenSystem::new(base, g, FiberMap::arctan(8.0).unwrap()).unwrap();
        let r = validate_hypotheses(&sys, 4, 64).unwrap();
        assert!((r.worst_orbit_mean - 2f64.ln()).abs() < 1e-14);
        assert_eq!(r.status, HypothesisStatus::Violated);
    }

    #[test]
    fn scale_shift_is_affine() {
        let base = presets::baker_system(0.45, 1.0).unwrap();
        let means: Vec<f64> = [1.0, 2.0, 3.5]
            .iter()
            .map(|&r| {
                let sys = base.with_multiplier(base.mult().scaled(r).unwrap()).unwrap();
                acim_mean_log_g(&sys, 1024).unwrap() - f64::ln(r)
            })
            .collect();
        assert!((means[0] - means[1]).abs() < 1e-12);
        assert!((means[0] - means[2]).abs() < 1e-12);
    }
}
