//! Test systems with closed-form oracles.

use crate::error::Result;
use crate::maps::{DrivenSystem, FiberMap, MarkovIntervalMap, Multiplier};

/// `log2 of the golden ratio`, the pressure zero of [`pc42`].
pub fn pc42_sstar() -> f64 {
    ((1.0 + 5f64.sqrt()) / 2.0).log2()
}

/// Doubling map, `g = 4` on `[0, 1/2)` and `1/2` on `[1/2, 1)`, `h = arctan`, `a = 8`.
pub fn pc42() -> DrivenSystem {
    let base = MarkovIntervalMap::doubling();
    let g = Multiplier::on_cells(&base, vec![4.0, 0.5]).expect("valid cells");
    DrivenSystem::new(base, g, FiberMap::arctan(8.0).expect("valid fiber")).expect("valid system")
}

/// Tripling map, `g = 9, 1/9, 3` on thirds, `h = arctan`, `a = 15`.
pub fn t3() -> DrivenSystem {
    let base = MarkovIntervalMap::tripling();
    let g = Multiplier::on_cells(&base, vec![9.0, 1.0 / 9.0, 3.0]).expect("valid cells");
    DrivenSystem::new(base, g, FiberMap::arctan(15.0).expect("valid fiber")).expect("valid system")
}

/// Pressure zero of [`t3`]: root of `t^2 + t + t^-2 = 3` with `t = 3^-s`, by bisection.
pub fn t3_sstar() -> f64 {
    let psi = |s: f64| {
        let t = 3f64.powf(-s);
        t * t + t + 1.0 / (t * t) - 3.0
    };
    let (mut lo, mut hi) = (0.05, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if psi(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Baker factor with split `s`, `g = r (1.01 + cos 2 pi x)`, `h = arctan`, `a = 15`.
pub fn baker_system(s: f64, r: f64) -> Result<DrivenSystem> {
    DrivenSystem::new(
        MarkovIntervalMap::baker_factor(s)?,
        Multiplier::cosine(r, 0.01)?,
        FiberMap::arctan(15.0)?,
    )
}

/// Nonlinear doubling `2x + kappa/(2 pi) sin 2 pi x` with `g = 2.2 (1.01 + cos 2 pi x)`.
pub fn perturbed(kappa: f64) -> Result<DrivenSystem> {
    DrivenSystem::new(
        MarkovIntervalMap::perturbed_doubling(kappa)?,
        Multiplier::cosine(2.2, 0.01)?,
        FiberMap::arctan(15.0)?,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracles() {
        assert!((pc42_sstar() - 0.694242).abs() < 1e-6);
        let t = 2f64.powf(-pc42_sstar());
        assert!((t * t * t - 2.0 * t + 1.0).abs() < 1e-12);
        assert!((t3_sstar() - 0.2011).abs() < 1e-3);
    }
}
