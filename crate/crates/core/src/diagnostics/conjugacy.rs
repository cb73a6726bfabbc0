use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::graph::{pullback_log, twosided_pullback_log, ReducedMultiplier};
use crate::maps::{DrivenSystem, DriverState, FiberMap, HyperbolicDriver, StateMultiplier};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConjugacyReport {
    pub samples: usize,
    pub depth: usize,
    pub floor: f64,
    /// `log(a / h(a)) + 2 |b|_inf`.
    pub bound: f64,
    /// Allowance for the truncated series.
    pub slack: f64,
    pub max_gap: f64,
    pub worst_sample: (f64, f64),
    /// Samples where both values sit above `floor`.
    pub compared: usize,
    pub violations: usize,
    /// One value below `floor` while the other is above `e^bound floor`.
    pub positivity_mismatches: usize,
    pub pass: bool,
}

/// Compares `log phi_hat_n(p)` with `log phi_n(project p)` on seeded uniform samples.
#[allow(clippy::too_many_arguments)]
pub fn check_conjugacy_bound(
    driver: &HyperbolicDriver,
    ghat: &StateMultiplier,
    fiber: &FiberMap,
    reduced: &ReducedMultiplier,
    samples: usize,
    n: usize,
    seed: u64,
    floor: f64,
) -> Result<ConjugacyReport> {
    let factor = DrivenSystem::new(driver.factor_map().clone(), reduced.g().clone(), fiber.clone())?;
    let a = fiber.a();
    let bound = (a / fiber.h(a)).ln() + 2.0 * reduced.b_hat_sup();
    let slack = (n + 2) as f64 * reduced.truncation_bound() + 1e-12;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<DriverState> = (0..samples)
        .map(|_| DriverState::new(rng.random::<f64>(), rng.random::<f64>()))
        .collect();
    let pairs: Vec<(f64, f64)> = points
        .par_iter()
        .map(|&p| {
            (
                twosided_pullback_log(driver, ghat, fiber, p, n),
                pullback_log(&factor, driver.project(p), n),
            )
        })
        .collect();

    let lf = floor.ln();
    let mut max_gap = 0.0f64;
    let mut worst = (0.0, 0.0);
    let (mut compared, mut violations, mut mismatches) = (0, 0, 0);
    for (p, &(lhat, l)) in points.iter().zip(&pairs) {
        if (lhat < lf && l >= lf + bound) || (l < lf && lhat >= lf + bound) {
            mismatches += 1;
        }
        if lhat < lf || l < lf {
            continue;
        }
        compared += 1;
        let gap = (lhat - l).abs();
        if gap > bound + slack {
            violations += 1;
        }
        if gap > max_gap {
            max_gap = gap;
            worst = (p.u, p.theta);
        }
    }
    Ok(ConjugacyReport {
        samples,
        depth: n,
        floor,
        bound,
        slack,
        max_gap,
        worst_sample: worst,
        compared,
        violations,
        positivity_mismatches: mismatches,
        pass: violations == 0 && mismatches == 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::reduce_multiplier;
    use crate::maps::Multiplier;

    #[test]
    fn factor_multiplier_has_zero_gap() {
        let d = HyperbolicDriver::baker(0.45).unwrap();
        let gh = StateMultiplier::from_factor(Multiplier::cosine(2.2, 0.01).unwrap());
        let fiber = FiberMap::arctan(15.0).unwrap();
        let red = reduce_multiplier(&d, &gh, 10).unwrap();
        let r = check_conjugacy_bound(&d, &gh, &fiber, &red, 200, 30, 7, 1e-14).unwrap();
        assert!(r.max_gap < 1e-12, "{}", r.max_gap);
        assert!(r.bound > 0.0);
        assert!(r.pass);
    }

    #[test]
    fn baker_example_within_bound() {
        let d = HyperbolicDriver::baker(0.45).unwrap();
        let gh = StateMultiplier::cosine_exp(2.2, 0.01, 0.1);
        let fiber = FiberMap::arctan(15.0).unwrap();
        let red = reduce_multiplier(&d, &gh, 40).unwrap();
        let r = check_conjugacy_bound(&d, &gh, &fiber, &red, 300, 40, 11, 1e-14).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(r.compared > 0);
        assert!(r.max_gap > 0.0);
    }
}
