use serde::{Deserialize, Serialize};

use crate::maps::FiberMap;

/// Weights `alpha_i = exp(-i delta)` and the constants built from them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaSchedule {
    pub delta: f64,
}

impl Default for AlphaSchedule {
    fn default() -> Self {
        Self { delta: 0.1 }
    }
}

impl AlphaSchedule {
    pub fn new(delta: f64) -> Self {
        assert!(delta > 0.0, "delta must be positive");
        Self { delta }
    }

    #[inline]
    pub fn alpha(&self, i: usize) -> f64 {
        (-(i as f64) * self.delta).exp()
    }

    /// `A_n = alpha_1 + ... + alpha_n`.
    pub fn a_n(&self, n: usize) -> f64 {
        let q = (-self.delta).exp();
        // geometric sum; exact form keeps A_n < A_inf in floats
        q * (-(-(n as f64) * self.delta).exp_m1()) / (-(-self.delta).exp_m1())
    }

    /// `A_inf = 1/(e^delta - 1)`.
    pub fn a_inf(&self) -> f64 {
        1.0 / self.delta.exp_m1()
    }

    /// `log C_n = a_h A_n - log c_h`.
    pub fn log_c_n(&self, fiber: &FiberMap, n: usize) -> f64 {
        fiber.a_h() * self.a_n(n) - fiber.c_h().ln()
    }

    pub fn log_c_inf(&self, fiber: &FiberMap) -> f64 {
        fiber.a_h() * self.a_inf() - fiber.c_h().ln()
    }

    pub fn c_n(&self, fiber: &FiberMap, n: usize) -> f64 {
        self.log_c_n(fiber, n).exp()
    }

    pub fn c_inf(&self, fiber: &FiberMap) -> f64 {
        self.log_c_inf(fiber).exp()
    }
}
