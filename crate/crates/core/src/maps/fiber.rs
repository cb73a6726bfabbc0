use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const A_H_GRID: usize = 10_000;
const CHECK_SAMPLES: usize = 4096;

/// Shape of the concave fiber map `h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FiberKind {
    /// `h(x) = arctan x`
    Arctan,
    /// `h(x) = x / (1 + x)`
    Rational,
    /// Piecewise-linear interpolation of `(xs, ys)` starting at the origin.
    Table { xs: Vec<f64>, ys: Vec<f64> },
}

/// Fiber map `h: [0, a] -> [0, a]` together with its distortion constants.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberMap {
    kind: FiberKind,
    a: f64,
    a_h: f64,
    c_h: f64,
}

impl FiberMap {
    pub fn new(kind: FiberKind, a: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidFiber(format!("ceiling a = {a} must be positive")));
        }
        if let FiberKind::Table { xs, ys } = &kind {
            validate_table(xs, ys, a)?;
        }
        let mut fiber = Self {
            kind,
            a,
            a_h: 0.0,
            c_h: 0.0,
        };
        fiber.check_shape()?;
        fiber.c_h = a.min(fiber.deriv(a));
        fiber.a_h = fiber.fit_a_h();
        Ok(fiber)
    }

    pub fn arctan(a: f64) -> Result<Self> {
        Self::new(FiberKind::Arctan, a)
    }

    pub fn rational(a: f64) -> Result<Self> {
        Self::new(FiberKind::Rational, a)
    }

    pub fn kind(&self) -> &FiberKind {
        &self.kind
    }

    /// Fiber ceiling `a`.
    pub fn a(&self) -> f64 {
        self.a
    }

    /// Smallest constant with `h'(x) >= exp(-a_h x)` on `[0, a]`.
    pub fn a_h(&self) -> f64 {
        self.a_h
    }

    /// `min{a, h'(a)}`.
    pub fn c_h(&self) -> f64 {
        self.c_h
    }

    #[inline]
    pub fn h(&self, x: f64) -> f64 {
        match &self.kind {
            FiberKind::Arctan => x.atan(),
            FiberKind::Rational => x / (1.0 + x),
            FiberKind::Table { xs, ys } => {
                let i = segment(xs, x);
                ys[i] + (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]) * (x - xs[i])
            }
        }
    }

    /// `h'(x)`; right derivative for tables.
    #[inline]
    pub fn deriv(&self, x: f64) -> f64 {
        match &self.kind {
            FiberKind::Arctan => 1.0 / (1.0 + x * x),
            FiberKind::Rational => 1.0 / ((1.0 + x) * (1.0 + x)),
            FiberKind::Table { xs, ys } => {
                let i = segment(xs, x);
                (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i])
            }
        }
    }

    /// `log(h(x)/x)`, extended by 0 at the origin.
    pub fn log_ratio(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match &self.kind {
            // keep relative accuracy for tiny x
            FiberKind::Rational => -x.ln_1p(),
            _ => (self.h(x) / x).ln(),
        }
    }

    fn check_shape(&self) -> Result<()> {
        let a = self.a;
        if self.h(0.0) != 0.0 {
            return Err(Error::InvalidFiber("h(0) != 0".into()));
        }
        if (self.deriv(0.0) - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidFiber(format!("h'(0) = {} != 1", self.deriv(0.0))));
        }
        let mut prev = self.deriv(0.0);
        for i in 1..=CHECK_SAMPLES {
            let x = a * i as f64 / CHECK_SAMPLES as f64;
            let d = self.deriv(x);
            if !(d > 0.0) {
                return Err(Error::InvalidFiber(format!("h not increasing at {x}")));
            }
            if d > prev + 1e-12 {
                return Err(Error::InvalidFiber(format!("h not concave at {x}")));
            }
            prev = d;
        }
        if self.h(a) > a {
            return Err(Error::InvalidFiber(format!("h(a) = {} exceeds a = {a}", self.h(a))));
        }
        Ok(())
    }

    /// Maximizes `-log h'(x) / x` over a grid on `(0, a]`, then one Newton polish.
    fn fit_a_h(&self) -> f64 {
        let a = self.a;
        let f = |x: f64| -self.deriv(x).ln() / x;
        let mut best_x = a * 1e-9;
        let mut best = f(best_x);
        for i in 1..=A_H_GRID {
            let x = a * i as f64 / A_H_GRID as f64;
            let v = f(x);
            if v > best {
                best = v;
                best_x = x;
            }
        }
        // Newton on f'(x) = 0 with central differences
        let step = a * 1e-5;
        if best_x - step > 0.0 && best_x + step <= a {
            let (fm, f0, fp) = (f(best_x - step), f(best_x), f(best_x + step));
            let d1 = (fp - fm) / (2.0 * step);
            let d2 = (fp - 2.0 * f0 + fm) / (step * step);
            if d2 < 0.0 {
                let x = best_x - d1 / d2;
                if x > 0.0 && x <= a {
                    best = best.max(f(x));
                }
            }
        }
        // an ulp-level margin keeps h'(x) >= exp(-a_h x) exact in floating point
        best.max(0.0) * (1.0 + 1e-12)
    }
}

fn segment(xs: &[f64], x: f64) -> usize {
    let n = xs.len();
    xs[1..n - 1].partition_point(|&t| t <= x)
}

fn validate_table(xs: &[f64], ys: &[f64], a: f64) -> Result<()> {
    if xs.len() < 2 || xs.len() != ys.len() {
        return Err(Error::InvalidFiber("table needs >= 2 matching (x, y) pairs".into()));
    }
    if xs[0] != 0.0 || ys[0] != 0.0 {
        return Err(Error::InvalidFiber("table must start at (0, 0)".into()));
    }
    if xs.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidFiber("table abscissae must increase".into()));
    }
    if *xs.last().unwrap() < a {
        return Err(Error::InvalidFiber(format!("table ends before a = {a}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arctan_constants() {
        let f = FiberMap::arctan(15.0).unwrap();
        assert!((f.c_h() - 1.0 / 226.0).abs() < 1e-15);
        // interior maximum of log(1 + x^2)/x: 2x^2/(1+x^2) = log(1+x^2)
        let mut lo: f64 = 1.0;
        let mut hi: f64 = 3.0;
        for _ in 0..100 {
            let m = 0.5 * (lo + hi);
            let g = 2.0 * m * m / (1.0 + m * m) - (1.0 + m * m).ln();
            if g > 0.0 {
                lo = m;
            } else {
                hi = m;
            }
        }
        let expect = (1.0 + lo * lo).ln() / lo;
        assert!((f.a_h() - expect).abs() < 1e-9, "{} vs {}", f.a_h(), expect);
    }

    #[test]
    fn rational_a_h_is_limit_at_origin() {
        let f = FiberMap::rational(4.0).unwrap();
        assert!((f.a_h() - 2.0).abs() < 1e-6);
        for i in 0..=1000 {
            let x = 4.0 * i as f64 / 1000.0;
            assert!(f.deriv(x) >= (-f.a_h() * x).exp() - 1e-15);
        }
    }

    #[test]
    fn small_ceiling_puts_a_h_at_the_end() {
        let f = FiberMap::arctan(1.0).unwrap();
        assert!((f.a_h() - 2f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn table_fiber() {
        let f = FiberMap::new(
            FiberKind::Table {
                xs: vec![0.0, 1.0, 3.0, 10.0],
                ys: vec![0.0, 1.0, 2.0, 3.0],
            },
            10.0,
        )
        .unwrap();
        assert_eq!(f.h(2.0), 1.5);
        assert_eq!(f.deriv(0.5), 1.0);
        assert_eq!(f.c_h(), 1.0 / 7.0);
        assert!(f.h(10.0) <= 10.0);
        // convexity is rejected
        let bad = FiberMap::new(
            FiberKind::Table {
                xs: vec![0.0, 1.0, 2.0],
                ys: vec![0.0, 1.0, 3.0],
            },
            2.0,
        );
        assert!(matches!(bad, Err(Error::InvalidFiber(_))));
    }

    #[test]
    fn h_below_identity_and_a_h_bound() {
        for f in [FiberMap::arctan(8.0).unwrap(), FiberMap::rational(3.0).unwrap()] {
            for i in 0..=10_000 {
                let x = f.a() * i as f64 / 10_000.0;
                assert!(f.h(x) <= x);
                assert!(f.deriv(x) >= (-f.a_h() * x).exp());
            }
        }
    }

    #[test]
    fn log_ratio_matches_definition() {
        let f = FiberMap::arctan(15.0).unwrap();
        assert_eq!(f.log_ratio(0.0), 0.0);
        assert!((f.log_ratio(2.0) - (2f64.atan() / 2.0).ln()).abs() < 1e-15);
        assert!(f.log_ratio(15.0) < f.log_ratio(1.0));
    }
}
