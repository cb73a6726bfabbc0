use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::GridKind;
use crate::maps::DrivenSystem;

/// `phi_n(theta) = f_{n,theta}(a)`: fold `y <- g(S^k theta) h(y)` for `k = n, ..., 1` from `y = a`.
pub fn pullback_value(sys: &DrivenSystem, theta: f64, n: usize) -> f64 {
    let mut orbit = Vec::with_capacity(n + 1);
    sys.base().orbit_into(theta, n, &mut orbit);
    fold(sys, &orbit, n)
}

/// Fold over a stored forward orbit `orbit[0..=n]`.
#[inline]
pub fn fold(sys: &DrivenSystem, orbit: &[f64], n: usize) -> f64 {
    let fiber = sys.fiber();
    let mut y = sys.a();
    for k in (1..=n).rev() {
        y = sys.g(orbit[k]) * fiber.h(y);
    }
    y
}

/// `log phi_n(theta)`, folded as `log y <- log g + log y + log(h(y)/y)` so that
/// values far below the float range stay finite.
pub fn pullback_log(sys: &DrivenSystem, theta: f64, n: usize) -> f64 {
    let orbit = sys.base().orbit(theta, n);
    let fiber = sys.fiber();
    let mut ly = sys.a().ln();
    for k in (1..=n).rev() {
        ly += sys.mult().log_eval(orbit[k]) + fiber.log_ratio(ly.exp());
    }
    ly
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphOptions {
    pub grid_size: usize,
    pub n_max: usize,
    /// Relative change between checkpoints that counts as converged.
    pub tol: f64,
    pub zero_floor: f64,
    pub checkpoint: usize,
    pub grid: GridKind,
}

impl Default for GraphOptions {
    fn default() -> Self {
        Self {
            grid_size: 100_000,
            n_max: 60,
            tol: 1e-10,
            zero_floor: 1e-14,
            checkpoint: 5,
            grid: GridKind::Jittered,
        }
    }
}

/// Pullback values on a grid of `[0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSample {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub depths: Vec<u32>,
    pub converged: Vec<bool>,
    /// Largest depth used at any point.
    pub depth: usize,
    pub n_max: usize,
    pub zero_floor: f64,
    pub tol: f64,
    pub a: f64,
    /// Checkpoints where the pullback increased (always 0 for a correct fold).
    pub monotonicity_violations: usize,
    /// Values at the last checkpoint not beyond `n_max / 2`, for judging how far
    /// the tail has settled.
    pub shallow_values: Option<Vec<f64>>,
    pub shallow_depth: usize,
}

#[derive(Debug, Clone, Copy)]
struct PointResult {
    value: f64,
    shallow: f64,
    depth: u32,
    converged: bool,
    violations: u32,
}

fn evaluate_point(sys: &DrivenSystem, theta: f64, opts: &GraphOptions, orbit: &mut Vec<f64>) -> PointResult {
    sys.base().orbit_into(theta, opts.n_max, orbit);
    let step = opts.checkpoint.max(1);
    let half = shallow_depth(opts);
    let mut shallow = f64::NAN;
    let mut prev = sys.a();
    let mut violations = 0;
    let mut d = 0;
    while d < opts.n_max {
        d = (d + step).min(opts.n_max);
        let v = fold(sys, orbit, d);
        if v > prev * (1.0 + 1e-12) {
            violations += 1;
        }
        if d <= half {
            shallow = if v < opts.zero_floor { 0.0 } else { v };
        }
        if v < opts.zero_floor {
            return PointResult {
                value: 0.0,
                shallow: if d <= half { 0.0 } else { shallow },
                depth: d as u32,
                converged: true,
                violations,
            };
        }
        if (prev - v).abs() <= opts.tol * v {
            return PointResult {
                value: v,
                shallow: if d <= half { v } else { shallow },
                depth: d as u32,
                converged: true,
                violations,
            };
        }
        prev = v;
    }
    PointResult {
        value: prev,
        shallow,
        depth: opts.n_max as u32,
        converged: false,
        violations,
    }
}

/// Last checkpoint depth not beyond `n_max / 2` (0 when there is none).
fn shallow_depth(opts: &GraphOptions) -> usize {
    let step = opts.checkpoint.max(1);
    (opts.n_max / 2) / step * step
}

fn check_options(sys: &DrivenSystem, opts: &GraphOptions, points: usize) -> Result<()> {
    if points < 1 || opts.n_max < 1 {
        return Err(Error::InvalidParameter(
            "graph needs at least one point and depth >= 1".into(),
        ));
    }
    if !(opts.zero_floor > 0.0 && opts.zero_floor < sys.a()) {
        return Err(Error::InvalidParameter(format!(
            "zero_floor {} must lie in (0, a)",
            opts.zero_floor
        )));
    }
    Ok(())
}

/// Graph on explicit points.
pub fn compute_graph_on(sys: &DrivenSystem, points: Vec<f64>, opts: &GraphOptions) -> Result<GraphSample> {
    check_options(sys, opts, points.len())?;
    let results: Vec<PointResult> = points
        .par_iter()
        .map_init(
            || Vec::with_capacity(opts.n_max + 1),
            |orbit, &theta| evaluate_point(sys, theta, opts, orbit),
        )
        .collect();
    let monotonicity_violations = results.iter().map(|r| r.violations as usize).sum();
    assert_eq!(monotonicity_violations, 0, "pullback increased with depth");
    Ok(GraphSample {
        depth: results.iter().map(|r| r.depth as usize).max().unwrap_or(0),
        values: results.iter().map(|r| r.value).collect(),
        depths: results.iter().map(|r| r.depth).collect(),
        converged: results.iter().map(|r| r.converged).collect(),
        grid: points,
        n_max: opts.n_max,
        zero_floor: opts.zero_floor,
        tol: opts.tol,
        a: sys.a(),
        monotonicity_violations,
        shallow_values: (shallow_depth(opts) > 0).then(|| results.iter().map(|r| r.shallow).collect()),
        shallow_depth: shallow_depth(opts),
    })
}

pub fn compute_graph_with(sys: &DrivenSystem, opts: &GraphOptions) -> Result<GraphSample> {
    if opts.grid_size < 2 {
        return Err(Error::InvalidParameter("grid_size must be >= 2".into()));
    }
    compute_graph_on(sys, opts.grid.points(opts.grid_size), opts)
}

/// Graph on the default jittered grid with checkpoints every 5 depths.
pub fn compute_graph(
    sys: &DrivenSystem,
    grid_size: usize,
    n_max: usize,
    tol: f64,
    zero_floor: f64,
) -> Result<GraphSample> {
    compute_graph_with(
        sys,
        &GraphOptions {
            grid_size,
            n_max,
            tol,
            zero_floor,
            ..GraphOptions::default()
        },
    )
}

impl GraphSample {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn fraction_zero(&self) -> f64 {
        self.values.iter().filter(|&&v| v == 0.0).count() as f64 / self.len() as f64
    }

    pub fn fraction_converged(&self) -> f64 {
        self.converged.iter().filter(|&&c| c).count() as f64 / self.len() as f64
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let io = |e: csv::Error| Error::InvalidParameter(format!("csv: {e}"));
        wr.write_record(["theta", "phi", "depth", "converged"]).map_err(io)?;
        for i in 0..self.len() {
            wr.write_record([
                self.grid[i].to_string(),
                self.values[i].to_string(),
                self.depths[i].to_string(),
                (self.converged[i] as u8).to_string(),
            ])
            .map_err(io)?;
        }
        wr.flush().map_err(|e| Error::InvalidParameter(format!("csv: {e}")))?;
        Ok(())
    }

    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "grid_size": self.len(),
            "depth": self.depth,
            "n_max": self.n_max,
            "zero_floor": self.zero_floor,
            "fraction_zero": self.fraction_zero(),
            "fraction_converged": self.fraction_converged(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn hand_folds() {
        let sys = presets::pc42();
        assert_eq!(pullback_value(&sys, 0.3, 0), 8.0);
        assert!((pullback_value(&sys, 0.3, 1) - 0.5 * 8f64.atan()).abs() < 1e-15);
        let two = 0.5 * (4.0 * 8f64.atan()).atan();
        assert!((pullback_value(&sys, 0.3, 2) - two).abs() < 1e-15);
        assert!((two - 0.699825).abs() < 1e-6);
    }

    #[test]
    fn log_fold_tracks_direct_fold() {
        let sys = presets::t3();
        for i in 0..100 {
            let t = (i as f64 + 0.41) / 100.0;
            let direct = pullback_value(&sys, t, 25);
            if direct > 1e-250 {
                assert!((pullback_log(&sys, t, 25) - direct.ln()).abs() < 1e-10);
            }
        }
        assert!(pullback_log(&sys, 0.5, 400) < -800.0);
    }

    #[test]
    fn invariance_identity() {
        let sys = presets::baker_system(0.45, 2.2).unwrap();
        for i in 0..200 {
            let t = (i as f64 + 0.37) / 200.0;
            let st = sys.base().image(t);
            for n in [1, 7, 30] {
                let lhs = pullback_value(&sys, t, n + 1);
                let rhs = sys.g(st) * sys.fiber().h(pullback_value(&sys, st, n));
                assert!((lhs - rhs).abs() <= 1e-12 * lhs.max(1e-300));
            }
        }
    }

    #[test]
    fn t3_fixed_points() {
        let sys = presets::t3();
        let opts = GraphOptions {
            n_max: 80,
            ..Default::default()
        };
        let g = compute_graph_on(&sys, vec![0.0, 0.5], &opts).unwrap();
        assert_eq!(g.values[1], 0.0);
        assert!(g.converged[1]);
        let mut x: f64 = 15.0;
        for _ in 0..500 {
            x = 9.0 * x.atan();
        }
        assert!((g.values[0] - x).abs() < 1e-8);
        assert!((x - 13.47).abs() < 0.01);
    }

    #[test]
    fn shallower_runs_are_higher() {
        let sys = presets::t3();
        let deep = compute_graph(&sys, 5000, 60, 1e-10, 1e-14).unwrap();
        let shallow = compute_graph(&sys, 5000, 30, 1e-10, 1e-14).unwrap();
        for (d, s) in deep.values.iter().zip(&shallow.values) {
            assert!(s >= d);
        }
    }

    #[test]
    fn upper_bound() {
        let sys = presets::pc42();
        let g = compute_graph(&sys, 4000, 40, 1e-10, 1e-14).unwrap();
        for i in 0..g.len() {
            let n = g.depths[i] as usize;
            let log_gn: f64 = sys.base().orbit(g.grid[i], n)[1..]
                .iter()
                .map(|&x| sys.mult().log_eval(x))
                .sum();
            assert!(g.values[i] <= sys.a().min(sys.a() * log_gn.exp()) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn shallow_values_match_half_depth() {
        let sys = presets::t3();
        let g = compute_graph(&sys, 2000, 40, 1e-10, 1e-14).unwrap();
        assert_eq!(g.shallow_depth, 20);
        let half = compute_graph(&sys, 2000, 20, 1e-10, 1e-14).unwrap();
        for (a, b) in g.shallow_values.as_ref().unwrap().iter().zip(&half.values) {
            assert!(a >= b);
            assert!((a - b).abs() <= 1e-9 * a.max(1e-300) || *b == 0.0);
        }
    }

    #[test]
    fn rejects_bad_floor() {
        assert!(compute_graph(&presets::pc42(), 10, 5, 1e-10, 9.0).is_err());
        assert!(compute_graph(&presets::pc42(), 1, 5, 1e-10, 1e-14).is_err());
    }

    #[test]
    fn csv_columns() {
        let g = compute_graph(&presets::pc42(), 16, 10, 1e-10, 1e-14).unwrap();
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("theta,phi,depth,converged\n"));
        assert_eq!(text.lines().count(), 17);
    }
}
