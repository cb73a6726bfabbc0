use crate::error::{Error, Result};
use crate::graph::GraphSample;

/// Graphs smaller than this give unusable tail statistics.
pub const MIN_GRAPH_POINTS: usize = 10_000;

pub const POINTS_PER_DECADE: usize = 10;

/// Log-spaced grid from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let (a, b) = (lo.log10(), hi.log10());
    let steps = ((b - a) * per_decade as f64).round().max(1.0) as usize;
    (0..=steps)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / steps as f64))
        .collect()
}

/// Values sorted ascending, for CDF lookups.
pub(crate) fn sorted_values(graph: &GraphSample) -> Vec<f64> {
    let mut v = graph.values.clone();
    v.sort_by(f64::total_cmp);
    v
}

/// `m{phi < eps}` on the sample.
pub(crate) fn mass_below(sorted: &[f64], eps: f64) -> f64 {
    sorted.partition_point(|&v| v < eps) as f64 / sorted.len() as f64
}

pub(crate) fn check_graph(graph: &GraphSample) -> Result<()> {
    if graph.len() < MIN_GRAPH_POINTS {
        return Err(Error::InvalidParameter(format!(
            "graph has {} points, need at least {MIN_GRAPH_POINTS}",
            graph.len()
        )));
    }
    Ok(())
}

pub(crate) fn check_window(graph: &GraphSample, (lo, hi): (f64, f64)) -> Result<()> {
    if !(lo > 10.0 * graph.zero_floor && hi <= graph.a && lo < hi) {
        return Err(Error::InvalidParameter(format!(
            "window [{lo:e}, {hi:e}] must lie inside ({:e}, {}]",
            10.0 * graph.zero_floor,
            graph.a
        )));
    }
    Ok(())
}

/// Shallow/deep mass ratio above which the tail counts as settled.
pub const SETTLED_RATIO: f64 = 0.7;

/// Default fitting window: two decades starting where the tail has settled.
///
/// Deep pullbacks keep shrinking where the graph is small, so the mass below a
/// small `eps` grows with depth. The window starts at the first grid point
/// (with positive mass) from which the half-depth mass stays within
/// [`SETTLED_RATIO`] of the full-depth mass, and ends two decades later or at
/// the point where half the mass lies below, whichever comes first. Graphs
/// without half-depth values fall back to the two middle decades of the
/// informative range.
pub fn default_window(graph: &GraphSample) -> Result<(f64, f64)> {
    let sorted = sorted_values(graph);
    let grid = log_grid(10.0 * graph.zero_floor, graph.a, POINTS_PER_DECADE);
    let first = grid
        .iter()
        .position(|&e| mass_below(&sorted, e) > 0.0)
        .ok_or(Error::InsufficientMass { points: 0 })?;
    let hi = grid
        .iter()
        .copied()
        .find(|&e| mass_below(&sorted, e) >= 0.5)
        .unwrap_or(graph.a)
        .min(graph.a);
    let grid: Vec<f64> = grid[first..].iter().copied().filter(|&e| e <= hi).collect();
    let lo = grid[0];

    if let Some(shallow) = &graph.shallow_values {
        let mut shallow = shallow.clone();
        shallow.sort_by(f64::total_cmp);
        let settled = |e: f64| mass_below(&shallow, e) >= SETTLED_RATIO * mass_below(&sorted, e);
        let start = grid.iter().rposition(|&e| !settled(e)).map_or(0, |i| i + 1);
        if let Some(&start) = grid.get(start) {
            let end = (100.0 * start).min(hi);
            if end > start {
                return Ok(((end / 100.0).max(lo), end));
            }
        }
    }

    let (a, b) = (lo.log10(), hi.log10());
    if b - a <= 2.0 {
        return Ok((lo, hi));
    }
    let mid = 0.5 * (a + b);
    Ok((10f64.powf(mid - 1.0), 10f64.powf(mid + 1.0)))
}
