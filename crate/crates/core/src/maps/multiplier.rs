use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::maps::MarkovIntervalMap;

pub type ClosedFormFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

const BOUND_SAMPLES: usize = 1 << 16;

/// Hoelder data `|f(x) - f(y)| <= constant * |x - y|^exponent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Holder {
    pub exponent: f64,
    pub constant: f64,
}

#[derive(Clone)]
pub enum MultiplierKind {
    /// One value per cell of `breaks`.
    PiecewiseConstant {
        breaks: Vec<f64>,
        values: Vec<f64>,
    },
    ClosedForm(ClosedFormFn),
}

/// Positive multiplier `g` on `[0, 1)` driving the fiber maps.
#[derive(Clone)]
pub struct Multiplier {
    label: String,
    kind: MultiplierKind,
    /// Hoelder data of `log g` on branch domains.
    holder: Option<Holder>,
    bounds: (f64, f64),
}

impl fmt::Debug for Multiplier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Multiplier")
            .field("label", &self.label)
            .field("bounds", &self.bounds)
            .field("holder", &self.holder)
            .finish()
    }
}

impl Multiplier {
    /// Piecewise-constant multiplier on the Markov cells of `map`.
    pub fn on_cells(map: &MarkovIntervalMap, values: Vec<f64>) -> Result<Self> {
        Self::piecewise_constant(map.breaks().to_vec(), values)
    }

    pub fn piecewise_constant(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breaks.len() != values.len() + 1 || values.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "{} cell values for {} breakpoints",
                values.len(),
                breaks.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidParameter(format!("multiplier value {v} is not positive")));
        }
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(0.0, f64::max);
        let label = format!(
            "cells({})",
            values.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(", ")
        );
        Ok(Self {
            label,
            kind: MultiplierKind::PiecewiseConstant { breaks, values },
            holder: Some(Holder {
                exponent: 1.0,
                constant: 0.0,
            }),
            bounds: (lo, hi),
        })
    }

    /// Closed-form multiplier. Bounds are estimated on a dense sample unless given.
    pub fn closed_form(
        label: impl Into<String>,
        f: ClosedFormFn,
        holder: Option<Holder>,
        bounds: Option<(f64, f64)>,
    ) -> Result<Self> {
        let bounds = match bounds {
            Some(b) => b,
            None => {
                let mut lo = f64::INFINITY;
                let mut hi = 0.0f64;
                for i in 0..BOUND_SAMPLES {
                    let v = f((i as f64 + 0.5) / BOUND_SAMPLES as f64);
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
                let v0 = f(0.0);
                (lo.min(v0), hi.max(v0))
            }
        };
        if !(bounds.0 > 0.0) || !bounds.1.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "multiplier range {bounds:?} is not inside (0, inf)"
            )));
        }
        Ok(Self {
            label: label.into(),
            kind: MultiplierKind::ClosedForm(f),
            holder,
            bounds,
        })
    }

    /// `g(x) = r (1 + eps + cos 2 pi x)`.
    pub fn cosine(r: f64, eps: f64) -> Result<Self> {
        if !(r > 0.0 && eps > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "cosine multiplier needs r > 0 and eps > 0 (got r = {r}, eps = {eps})"
            )));
        }
        let c = 1.0 + eps;
        let tau = 2.0 * std::f64::consts::PI;
        // sup |d/dx log(c + cos tau x)| = tau / sqrt(c^2 - 1)
        let holder = Holder {
            exponent: 1.0,
            constant: tau / (c * c - 1.0).sqrt(),
        };
        Self::closed_form(
            format!("cosine(r={r}, eps={eps})"),
            Arc::new(move |x: f64| r * (c + (tau * x).cos())),
            Some(holder),
            Some((r * eps, r * (2.0 + eps))),
        )
    }

    pub fn constant(value: f64) -> Result<Self> {
        Self::piecewise_constant(vec![0.0, 1.0], vec![value])
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn kind(&self) -> &MultiplierKind {
        &self.kind
    }

    pub fn holder(&self) -> Option<Holder> {
        self.holder
    }

    /// `(inf g, sup g)`; exact for piecewise-constant and closed forms with
    /// supplied bounds, sampled otherwise.
    pub fn bounds(&self) -> (f64, f64) {
        self.bounds
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match &self.kind {
            MultiplierKind::PiecewiseConstant { breaks, values } => {
                let k = values.len();
                values[breaks[1..k].partition_point(|&b| b <= x)]
            }
            MultiplierKind::ClosedForm(f) => f(x),
        }
    }

    #[inline]
    pub fn log_eval(&self, x: f64) -> f64 {
        self.eval(x).ln()
    }

    /// Cell values when `g` is constant on the cells of `map`.
    pub fn cell_values_for(&self, map: &MarkovIntervalMap) -> Option<Vec<f64>> {
        match &self.kind {
            MultiplierKind::PiecewiseConstant { breaks, values } => {
                if breaks.len() == 1 + values.len() && values.len() == 1 {
                    return Some(vec![values[0]; map.num_cells()]);
                }
                // every map cell must sit inside one multiplier cell
                let mut out = Vec::with_capacity(map.num_cells());
                for b in map.branches() {
                    let i = breaks[1..values.len()].partition_point(|&t| t <= b.lo);
                    if breaks[i + 1] < b.hi - 1e-15 {
                        return None;
                    }
                    out.push(values[i]);
                }
                Some(out)
            }
            MultiplierKind::ClosedForm(_) => None,
        }
    }

    /// `c * g`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::InvalidParameter(format!("scale {c} must be positive")));
        }
        let label = format!("{c}*{}", self.label);
        let bounds = (self.bounds.0 * c, self.bounds.1 * c);
        let kind = match &self.kind {
            MultiplierKind::PiecewiseConstant { breaks, values } => MultiplierKind::PiecewiseConstant {
                breaks: breaks.clone(),
                values: values.iter().map(|v| v * c).collect(),
            },
            MultiplierKind::ClosedForm(f) => {
                let f = f.clone();
                MultiplierKind::ClosedForm(Arc::new(move |x| c * f(x)))
            }
        };
        Ok(Self {
            label,
            kind,
            holder: self.holder,
            bounds,
        })
    }
}
