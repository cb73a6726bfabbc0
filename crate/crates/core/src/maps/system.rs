use crate::error::{Error, Result};
use crate::maps::{FiberMap, HypothesisReport, MarkovIntervalMap, Multiplier};

/// Skew product `(x, v) -> (S x, g(S x) h(v))` read along pullbacks.
#[derive(Debug, Clone)]
pub struct DrivenSystem {
    base: MarkovIntervalMap,
    mult: Multiplier,
    fiber: FiberMap,
    validation: Option<HypothesisReport>,
}

impl DrivenSystem {
    /// Rejects systems whose fiber maps do not send `[0, a]` into itself.
    pub fn new(base: MarkovIntervalMap, mult: Multiplier, fiber: FiberMap) -> Result<Self> {
        let sup_g = mult.bounds().1;
        let a = fiber.a();
        let top = sup_g * fiber.h(a);
        if top > a * (1.0 + 1e-12) {
            return Err(Error::InvalidSystem(format!(
                "sup g * h(a) = {top} exceeds the ceiling a = {a}"
            )));
        }
        Ok(Self {
            base,
            mult,
            fiber,
            validation: None,
        })
    }

    pub fn base(&self) -> &MarkovIntervalMap {
        &self.base
    }

    pub fn mult(&self) -> &Multiplier {
        &self.mult
    }

    pub fn fiber(&self) -> &FiberMap {
        &self.fiber
    }

    pub fn a(&self) -> f64 {
        self.fiber.a()
    }

    pub fn validation(&self) -> Option<&HypothesisReport> {
        self.validation.as_ref()
    }

    pub fn with_validation(mut self, report: HypothesisReport) -> Self {
        self.validation = Some(report);
        self
    }

    /// Same base and fiber with the multiplier replaced.
    pub fn with_multiplier(&self, mult: Multiplier) -> Result<Self> {
        Self::new(self.base.clone(), mult, self.fiber.clone())
    }

    #[inline]
    pub fn g(&self, x: f64) -> f64 {
        self.mult.eval(x)
    }
}

/// Finite-`n` Birkhoff averages `(Gamma_n, Lambda_n)` of `log g o S^i`
/// (`i = 1..n`) and `log |S'| o S^i` (`i = 0..n-1`).
pub fn orbit_exponents(sys: &DrivenSystem, x: f64, n: usize) -> (f64, f64) {
    assert!(n >= 1, "orbit_exponents needs n >= 1");
    let mut y = x;
    let mut log_g = 0.0;
    let mut log_d = 0.0;
    for _ in 0..n {
        let step = sys.base().apply(y);
        log_d += step.deriv_abs.ln();
        y = step.image;
        log_g += sys.mult().log_eval(y);
    }
    (log_g / n as f64, log_d / n as f64)
}
