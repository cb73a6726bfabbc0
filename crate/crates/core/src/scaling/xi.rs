use std::io::Write;

use serde::Serialize;

use crate::error::Result;
use crate::graph::GraphSample;
use crate::scaling::tail::{window_fit, write_columns};
use crate::scaling::window::{check_graph, check_window, default_window, log_grid, POINTS_PER_DECADE};

/// `Xi_eps = (1/eps) integral of min(phi, eps)` and its complement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct XiReport {
    pub eps: Vec<f64>,
    pub xi: Vec<f64>,
    pub one_minus_xi: Vec<f64>,
    pub window: (f64, f64),
    pub slope_log_xi: f64,
    pub r2_log_xi: f64,
    pub slope_log_one_minus_xi: f64,
    pub r2_log_one_minus_xi: f64,
    pub stderr_log_one_minus_xi: f64,
}

/// Periodic trapezoid rule for `f` sampled at increasing points of `[0, 1)`.
pub fn periodic_trapezoid(grid: &[f64], f: impl Fn(usize) -> f64) -> f64 {
    let n = grid.len();
    let mut sum = 0.0;
    for i in 0..n {
        let j = (i + 1) % n;
        let dt = if j == 0 {
            grid[0] + 1.0 - grid[i]
        } else {
            grid[j] - grid[i]
        };
        sum += 0.5 * (f(i) + f(j)) * dt;
    }
    sum
}

/// `(Xi_eps, 1 - Xi_eps)`; the complement integrates `(eps - phi)^+` directly.
pub fn xi_at(graph: &GraphSample, eps: f64) -> (f64, f64) {
    let v = &graph.values;
    let xi = periodic_trapezoid(&graph.grid, |i| v[i].min(eps)) / eps;
    let gap = periodic_trapezoid(&graph.grid, |i| (eps - v[i]).max(0.0)) / eps;
    (xi, gap)
}

/// Slopes of `log Xi` and `log(1 - Xi)` against `log eps` over `window`
/// (default: the tail window).
pub fn global_xi(graph: &GraphSample, eps: Option<Vec<f64>>, window: Option<(f64, f64)>) -> Result<XiReport> {
    check_graph(graph)?;
    let window = match window {
        Some(w) => w,
        None => default_window(graph)?,
    };
    check_window(graph, window)?;
    let eps = eps.unwrap_or_else(|| log_grid(10.0 * graph.zero_floor, graph.a, POINTS_PER_DECADE));
    let (xi, one_minus_xi): (Vec<f64>, Vec<f64>) = eps.iter().map(|&e| xi_at(graph, e)).unzip();
    let fx = window_fit(&eps, &xi, window)?;
    let fg = window_fit(&eps, &one_minus_xi, window)?;
    Ok(XiReport {
        eps,
        xi,
        one_minus_xi,
        window,
        slope_log_xi: fx.slope,
        r2_log_xi: fx.r2,
        slope_log_one_minus_xi: fg.slope,
        r2_log_one_minus_xi: fg.r2,
        stderr_log_one_minus_xi: fg.slope_stderr,
    })
}

impl XiReport {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_columns(
            w,
            &["eps", "xi", "one_minus_xi"],
            &[&self.eps, &self.xi, &self.one_minus_xi],
        )
    }
}
