use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::maps::{Holder, MarkovIntervalMap};

/// Point `(u, theta)` of the baker square; `u` is contracted by the inverse map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriverState {
    pub u: f64,
    pub theta: f64,
}

impl DriverState {
    pub fn new(u: f64, theta: f64) -> Self {
        Self { u, theta }
    }
}

/// Invertible hyperbolic driver whose inverse has an expanding interval factor.
///
/// Only the baker transformation is provided: the projection drops `u`, the
/// section embeds `theta` at `u = 0`.
#[derive(Debug, Clone)]
pub struct HyperbolicDriver {
    split: f64,
    factor: MarkovIntervalMap,
}

impl HyperbolicDriver {
    pub fn baker(split: f64) -> Result<Self> {
        if !(split > 0.0 && split < 1.0) {
            return Err(Error::InvalidParameter(format!("split {split} not in (0, 1)")));
        }
        Ok(Self {
            split,
            factor: MarkovIntervalMap::baker_factor(split)?,
        })
    }

    pub fn split(&self) -> f64 {
        self.split
    }

    /// Expanding factor `S` with `S o project = project o inverse`.
    pub fn factor_map(&self) -> &MarkovIntervalMap {
        &self.factor
    }

    /// Contraction rate of the inverse map along stable fibers.
    pub fn contraction(&self) -> f64 {
        self.split.max(1.0 - self.split)
    }

    /// `C` in `d(inv^n x, inv^n y) <= C r^n` for `y` on the stable fiber of `x`.
    pub fn stable_constant(&self) -> f64 {
        1.0
    }

    pub fn forward(&self, p: DriverState) -> DriverState {
        let s = self.split;
        if p.u < s {
            DriverState::new(p.u / s, s * p.theta)
        } else {
            DriverState::new((p.u - s) / (1.0 - s), s + (1.0 - s) * p.theta)
        }
    }

    /// The `theta` coordinate goes through the factor map itself, so projected
    /// backward orbits coincide bit for bit with forward orbits of `S`.
    pub fn inverse(&self, p: DriverState) -> DriverState {
        let s = self.split;
        let theta = self.factor.image(p.theta);
        if p.theta < s {
            DriverState::new(s * p.u, theta)
        } else {
            DriverState::new(s + (1.0 - s) * p.u, theta)
        }
    }

    #[inline]
    pub fn project(&self, p: DriverState) -> f64 {
        p.theta
    }

    #[inline]
    pub fn section(&self, theta: f64) -> DriverState {
        DriverState::new(0.0, theta)
    }

    /// Max-coordinate distance.
    pub fn distance(&self, p: DriverState, q: DriverState) -> f64 {
        (p.u - q.u).abs().max((p.theta - q.theta).abs())
    }

    /// Backward orbit `p, inv p, ..., inv^n p`.
    pub fn backward_orbit(&self, p: DriverState, n: usize) -> Vec<DriverState> {
        let mut out = Vec::with_capacity(n + 1);
        let mut q = p;
        out.push(q);
        for _ in 0..n {
            q = self.inverse(q);
            out.push(q);
        }
        out
    }
}

/// Positive multiplier on driver states.
///
/// The Hoelder data refer to `log g` along stable fibers (points sharing `theta`),
/// which is the only direction the coboundary series probes.
#[derive(Clone)]
pub struct StateMultiplier {
    label: String,
    f: Arc<dyn Fn(DriverState) -> f64 + Send + Sync>,
    holder: Option<Holder>,
}

impl fmt::Debug for StateMultiplier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StateMultiplier")
            .field("label", &self.label)
            .field("holder", &self.holder)
            .finish()
    }
}

impl StateMultiplier {
    pub fn new(
        label: impl Into<String>,
        f: Arc<dyn Fn(DriverState) -> f64 + Send + Sync>,
        holder: Option<Holder>,
    ) -> Self {
        Self {
            label: label.into(),
            f,
            holder,
        }
    }

    /// `r (1 + eps + cos 2 pi theta) exp(beta u)`.
    pub fn cosine_exp(r: f64, eps: f64, beta: f64) -> Self {
        let tau = 2.0 * std::f64::consts::PI;
        Self::new(
            format!("cosine-exp(r={r}, eps={eps}, beta={beta})"),
            Arc::new(move |p: DriverState| r * (1.0 + eps + (tau * p.theta).cos()) * (beta * p.u).exp()),
            Some(Holder {
                exponent: 1.0,
                constant: beta.abs(),
            }),
        )
    }

    /// Multiplier that ignores `u`.
    pub fn from_factor(mult: crate::maps::Multiplier) -> Self {
        Self::new(
            format!("factor({})", mult.label()),
            Arc::new(move |p: DriverState| mult.eval(p.theta)),
            Some(Holder {
                exponent: 1.0,
                constant: 0.0,
            }),
        )
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn holder(&self) -> Option<Holder> {
        self.holder
    }

    #[inline]
    pub fn eval(&self, p: DriverState) -> f64 {
        (self.f)(p)
    }

    #[inline]
    pub fn log_eval(&self, p: DriverState) -> f64 {
        self.eval(p).ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_undoes_forward() {
        let d = HyperbolicDriver::baker(0.45).unwrap();
        for i in 0..50 {
            for j in 0..50 {
                let p = DriverState::new(i as f64 / 50.0, j as f64 / 50.0 + 0.001);
                let q = d.inverse(d.forward(p));
                assert!(d.distance(p, q) < 1e-14);
            }
        }
    }

    #[test]
    fn factor_identity_at_sample_point() {
        let d = HyperbolicDriver::baker(0.45).unwrap();
        let p = DriverState::new(0.7, 0.3);
        let img = d.project(d.inverse(p));
        assert!((img - 0.3 / 0.45).abs() < 1e-15);
        assert!((d.factor_map().image(0.3) - img).abs() < 1e-15);
    }

    #[test]
    fn baker_factor_maps_period_three_orbit() {
        let d = HyperbolicDriver::baker(0.45).unwrap();
        let y = d.factor_map().image(0.10255);
        assert!((y - 0.10255 / 0.45).abs() < 1e-15);
        assert!((y - 0.227_888_9).abs() < 1e-6);
    }

    #[test]
    fn stable_fibers_contract() {
        let d = HyperbolicDriver::baker(0.45).unwrap();
        let r = d.contraction();
        assert_eq!(r, 0.55);
        let p = DriverState::new(0.93, 0.61);
        let q = d.section(d.project(p));
        let (mut a, mut b) = (p, q);
        for n in 1..=30 {
            a = d.inverse(a);
            b = d.inverse(b);
            assert!(d.distance(a, b) <= d.stable_constant() * r.powi(n) + 1e-15);
        }
    }

    #[test]
    fn rejects_bad_split() {
        assert!(HyperbolicDriver::baker(0.0).is_err());
        assert!(HyperbolicDriver::baker(1.2).is_err());
    }
}
