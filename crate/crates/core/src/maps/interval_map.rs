use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Value and derivative of a branch at a point, before reduction mod 1.
pub type SmoothBranch = Arc<dyn Fn(f64) -> (f64, f64) + Send + Sync>;

const BOUNDARY_TOL: f64 = 1e-9;
const DERIV_SAMPLES: usize = 1024;

/// Forward formula of one monotone branch.
#[derive(Clone)]
pub enum BranchFn {
    /// `x -> slope * x + intercept`
    Affine {
        slope: f64,
        intercept: f64,
    },
    Smooth(SmoothBranch),
}

impl BranchFn {
    #[inline]
    fn eval(&self, x: f64) -> (f64, f64) {
        match self {
            BranchFn::Affine { slope, intercept } => (slope * x + intercept, *slope),
            BranchFn::Smooth(f) => f(x),
        }
    }
}

impl fmt::Debug for BranchFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BranchFn::Affine { slope, intercept } => f
                .debug_struct("Affine")
                .field("slope", slope)
                .field("intercept", intercept)
                .finish(),
            BranchFn::Smooth(_) => f.write_str("Smooth(..)"),
        }
    }
}

/// One branch: a half-open domain cell mapped monotonically onto a union of cells.
#[derive(Debug, Clone)]
pub struct Branch {
    pub lo: f64,
    pub hi: f64,
    /// Image cells `first..end` of the Markov partition.
    pub image: (usize, usize),
    /// Unreduced image endpoints `(S(lo), S(hi))` in domain order.
    pub image_lo: f64,
    pub image_hi: f64,
    pub increasing: bool,
    pub map: BranchFn,
}

impl Branch {
    #[inline]
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// Unreduced value and derivative.
    #[inline]
    pub fn eval(&self, x: f64) -> (f64, f64) {
        self.map.eval(x)
    }

    /// Lower and upper end of the (unreduced) image interval.
    pub fn image_interval(&self) -> (f64, f64) {
        if self.increasing {
            (self.image_lo, self.image_hi)
        } else {
            (self.image_hi, self.image_lo)
        }
    }

    /// Point of the closed domain that the branch sends to `y`.
    ///
    /// Affine branches invert exactly; smooth ones by bisection down to 1e-13.
    pub fn preimage(&self, y: f64) -> f64 {
        match &self.map {
            BranchFn::Affine { slope, intercept } => ((y - intercept) / slope).clamp(self.lo, self.hi),
            BranchFn::Smooth(f) => {
                let (mut a, mut b) = (self.lo, self.hi);
                for _ in 0..200 {
                    if b - a <= 1e-13 {
                        break;
                    }
                    let mid = 0.5 * (a + b);
                    let v = f(mid).0;
                    if (v < y) == self.increasing {
                        a = mid;
                    } else {
                        b = mid;
                    }
                }
                0.5 * (a + b)
            }
        }
    }
}

/// Result of one application of the map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapStep {
    pub image: f64,
    pub deriv_abs: f64,
    pub branch: usize,
}

/// Piecewise expanding Markov map of `[0, 1)` with finitely many monotone branches.
///
/// Branch domains are the cells of the Markov partition and are half-open:
/// a breakpoint belongs to the branch on its right.
#[derive(Debug, Clone)]
pub struct MarkovIntervalMap {
    name: String,
    breaks: Vec<f64>,
    branches: Vec<Branch>,
    expansion_floor: f64,
    transitions: Vec<Vec<usize>>,
}

impl MarkovIntervalMap {
    /// Builds a map from partition breakpoints `0 = b_0 < ... < b_k = 1` and one
    /// forward formula per cell, checking the Markov, expansion and mixing
    /// properties.
    pub fn new(name: impl Into<String>, breaks: Vec<f64>, maps: Vec<BranchFn>) -> Result<Self> {
        let k = maps.len();
        if k == 0 || breaks.len() != k + 1 {
            return Err(Error::InvalidMap(format!(
                "{} breakpoints for {} branches",
                breaks.len(),
                k
            )));
        }
        if breaks[0] != 0.0 || breaks[k] != 1.0 {
            return Err(Error::InvalidMap("partition must span [0, 1)".into()));
        }
        if breaks.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidMap("breakpoints must be strictly increasing".into()));
        }

        let snap = |v: f64| -> Option<usize> { breaks.iter().position(|&b| (b - v).abs() <= BOUNDARY_TOL) };

        let mut branches = Vec::with_capacity(k);
        let mut floor = f64::INFINITY;
        for (i, map) in maps.into_iter().enumerate() {
            let (lo, hi) = (breaks[i], breaks[i + 1]);
            let (y0, _) = map.eval(lo);
            let (y1, _) = map.eval(hi);
            let increasing = y1 > y0;
            let (a, b) = if increasing { (y0, y1) } else { (y1, y0) };
            let first = snap(a)
                .ok_or_else(|| Error::InvalidMap(format!("branch {i}: image endpoint {a} is not a breakpoint")))?;
            let end = snap(b)
                .ok_or_else(|| Error::InvalidMap(format!("branch {i}: image endpoint {b} is not a breakpoint")))?;
            if end <= first {
                return Err(Error::InvalidMap(format!("branch {i}: empty image")));
            }
            // derivative floor on a dense sample
            for j in 0..=DERIV_SAMPLES {
                let x = lo + (hi - lo) * j as f64 / DERIV_SAMPLES as f64;
                let (v, d) = map.eval(x);
                if increasing != (d > 0.0) || !v.is_finite() {
                    return Err(Error::InvalidMap(format!("branch {i} is not monotone at {x}")));
                }
                floor = floor.min(d.abs());
            }
            branches.push(Branch {
                lo,
                hi,
                image: (first, end),
                image_lo: y0,
                image_hi: y1,
                increasing,
                map,
            });
        }
        if floor <= 1.0 {
            return Err(Error::InvalidMap(format!("expansion floor {floor} is not > 1")));
        }
        let transitions: Vec<Vec<usize>> = branches.iter().map(|b| (b.image.0..b.image.1).collect()).collect();
        if !is_primitive(&transitions) {
            return Err(Error::InvalidMap("transition matrix is not primitive".into()));
        }
        Ok(Self {
            name: name.into(),
            breaks,
            branches,
            expansion_floor: floor,
            transitions,
        })
    }

    /// `x -> m x mod 1`, with `m` full affine branches.
    pub fn multiply(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidParameter(format!("multiplier {m} must be >= 2")));
        }
        let breaks: Vec<f64> = (0..=m).map(|i| i as f64 / m as f64).collect();
        let maps = (0..m)
            .map(|i| BranchFn::Affine {
                slope: m as f64,
                intercept: -(i as f64),
            })
            .collect();
        Self::new(format!("times-{m}"), breaks, maps)
    }

    pub fn doubling() -> Self {
        Self::multiply(2).expect("doubling map is valid")
    }

    pub fn tripling() -> Self {
        Self::multiply(3).expect("tripling map is valid")
    }

    /// Full-branch piecewise-linear map: each cell of `breaks` is stretched
    /// affinely onto `[0, 1)`.
    pub fn full_branch_linear(breaks: Vec<f64>) -> Result<Self> {
        let maps = breaks
            .windows(2)
            .map(|w| {
                let slope = 1.0 / (w[1] - w[0]);
                BranchFn::Affine {
                    slope,
                    intercept: -w[0] * slope,
                }
            })
            .collect();
        Self::new("full-branch-linear", breaks, maps)
    }

    /// Expanding factor of the baker transformation with split `s`.
    pub fn baker_factor(s: f64) -> Result<Self> {
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::InvalidParameter(format!("split {s} not in (0, 1)")));
        }
        let mut m = Self::full_branch_linear(vec![0.0, s, 1.0])?;
        m.name = format!("baker-factor(s={s})");
        Ok(m)
    }

    /// `x -> 2x + kappa/(2 pi) sin(2 pi x) mod 1`, a nonlinear full-branch circle map.
    pub fn perturbed_doubling(kappa: f64) -> Result<Self> {
        if !(kappa.abs() < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "|kappa| = {} must be < 1",
                kappa.abs()
            )));
        }
        let tau = 2.0 * std::f64::consts::PI;
        let branch = |shift: f64| -> BranchFn {
            BranchFn::Smooth(Arc::new(move |x: f64| {
                (
                    2.0 * x + kappa / tau * (tau * x).sin() - shift,
                    2.0 + kappa * (tau * x).cos(),
                )
            }))
        };
        let mut m = Self::new(
            "perturbed-doubling",
            vec![0.0, 0.5, 1.0],
            vec![branch(0.0), branch(1.0)],
        )?;
        m.name = format!("perturbed-doubling(kappa={kappa})");
        Ok(m)
    }

    /// Two-cell golden-mean map: `[0, c)` onto `[0, 1)`, `[c, 1)` onto `[0, c)`,
    /// with `c = (sqrt 5 - 1)/2` and uniform slope `1/c`.
    pub fn golden_mean() -> Self {
        let c = (5f64.sqrt() - 1.0) / 2.0;
        let slope = 1.0 / c;
        Self::new(
            "golden-mean",
            vec![0.0, c, 1.0],
            vec![
                BranchFn::Affine { slope, intercept: 0.0 },
                BranchFn::Affine {
                    slope,
                    intercept: -c * slope,
                },
            ],
        )
        .expect("golden-mean map is valid")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn num_cells(&self) -> usize {
        self.branches.len()
    }

    pub fn expansion_floor(&self) -> f64 {
        self.expansion_floor
    }

    /// Allowed successors of each cell.
    pub fn transitions(&self) -> &[Vec<usize>] {
        &self.transitions
    }

    pub fn is_piecewise_linear(&self) -> bool {
        self.branches.iter().all(|b| matches!(b.map, BranchFn::Affine { .. }))
    }

    pub fn is_full_branch(&self) -> bool {
        let k = self.num_cells();
        self.branches.iter().all(|b| b.image == (0, k))
    }

    /// Index of the cell containing `x` (half-open convention).
    #[inline]
    pub fn branch_index(&self, x: f64) -> usize {
        let k = self.branches.len();
        self.breaks[1..k].partition_point(|&b| b <= x)
    }

    #[inline]
    pub fn apply(&self, x: f64) -> MapStep {
        let i = self.branch_index(x);
        let (v, d) = self.branches[i].eval(x);
        MapStep {
            image: reduce_unit(v),
            deriv_abs: d.abs(),
            branch: i,
        }
    }

    #[inline]
    pub fn image(&self, x: f64) -> f64 {
        let i = self.branch_index(x);
        reduce_unit(self.branches[i].eval(x).0)
    }

    /// Forward orbit `x, S x, ..., S^n x` written into `buf`.
    pub fn orbit_into(&self, x: f64, n: usize, buf: &mut Vec<f64>) {
        buf.clear();
        buf.reserve(n + 1);
        let mut y = x;
        buf.push(y);
        for _ in 0..n {
            y = self.image(y);
            buf.push(y);
        }
    }

    pub fn orbit(&self, x: f64, n: usize) -> Vec<f64> {
        let mut buf = Vec::new();
        self.orbit_into(x, n, &mut buf);
        buf
    }

    /// `log |(S^n)'(x)|` by the chain rule along the orbit.
    pub fn log_deriv_n(&self, x: f64, n: usize) -> f64 {
        let mut y = x;
        let mut acc = 0.0;
        for _ in 0..n {
            let step = self.apply(y);
            acc += step.deriv_abs.ln();
            y = step.image;
        }
        acc
    }
}

/// Reduces `v` into `[0, 1)`.
#[inline]
pub fn reduce_unit(v: f64) -> f64 {
    let r = v - v.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Primitivity of a 0/1 matrix given by successor lists (Wielandt bound on the power).
fn is_primitive(succ: &[Vec<usize>]) -> bool {
    let k = succ.len();
    let mut reach: Vec<Vec<bool>> = (0..k)
        .map(|i| {
            let mut row = vec![false; k];
            for &j in &succ[i] {
                row[j] = true;
            }
            row
        })
        .collect();
    let bound = (k - 1) * (k - 1) + 1;
    for _ in 1..bound.max(1) {
        if reach.iter().all(|r| r.iter().all(|&b| b)) {
            return true;
        }
        reach = reach
            .iter()
            .map(|row| {
                let mut next = vec![false; k];
                for (j, &on) in row.iter().enumerate() {
                    if on {
                        for &l in &succ[j] {
                            next[l] = true;
                        }
                    }
                }
                next
            })
            .collect();
    }
    reach.iter().all(|r| r.iter().all(|&b| b))
}
