use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fit::{least_squares, LinearFit};
use crate::graph::GraphSample;
use crate::scaling::window::{
    check_graph, check_window, default_window, log_grid, mass_below, sorted_values, POINTS_PER_DECADE,
};

/// Power-law fit of `m{phi < eps}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailReport {
    pub eps: Vec<f64>,
    pub masses: Vec<f64>,
    pub window: (f64, f64),
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub slope_stderr: f64,
    pub fit_points: usize,
    pub predicted: Option<f64>,
}

/// Tail exponent over `window` (default: [`default_window`]).
pub fn tail_exponent(graph: &GraphSample, window: Option<(f64, f64)>) -> Result<TailReport> {
    check_graph(graph)?;
    let window = match window {
        Some(w) => w,
        None => default_window(graph)?,
    };
    check_window(graph, window)?;
    let sorted = sorted_values(graph);
    let eps = log_grid(10.0 * graph.zero_floor, graph.a, POINTS_PER_DECADE);
    let masses: Vec<f64> = eps.iter().map(|&e| mass_below(&sorted, e)).collect();
    let fit = window_fit(&eps, &masses, window)?;
    Ok(TailReport {
        eps,
        masses,
        window,
        slope: fit.slope,
        intercept: fit.intercept,
        r2: fit.r2,
        slope_stderr: fit.slope_stderr,
        fit_points: fit.points,
        predicted: None,
    })
}

/// Log-log fit of the positive entries of `ys` whose `eps` lies in the window.
pub(crate) fn window_fit(eps: &[f64], ys: &[f64], (lo, hi): (f64, f64)) -> Result<LinearFit> {
    let slack = 1.0 + 1e-9;
    let (xs, ls): (Vec<f64>, Vec<f64>) = eps
        .iter()
        .zip(ys)
        .filter(|(&e, &y)| e * slack >= lo && e <= hi * slack && y > 0.0)
        .map(|(e, y)| (e.ln(), y.ln()))
        .unzip();
    if xs.len() < 3 {
        return Err(Error::InsufficientMass { points: xs.len() });
    }
    least_squares(&xs, &ls).ok_or(Error::InsufficientMass { points: xs.len() })
}

impl TailReport {
    pub fn with_prediction(mut self, s_star: f64) -> Self {
        self.predicted = Some(s_star);
        self
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_columns(w, &["eps", "mass"], &[&self.eps, &self.masses])
    }
}

pub(crate) fn write_columns<W: Write>(w: W, header: &[&str], cols: &[&[f64]]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    let io = |e: csv::Error| Error::InvalidParameter(format!("csv: {e}"));
    wr.write_record(header).map_err(io)?;
    for i in 0..cols[0].len() {
        wr.write_record(cols.iter().map(|c| c[i].to_string())).map_err(io)?;
    }
    wr.flush().map_err(|e| Error::InvalidParameter(format!("csv: {e}")))?;
    Ok(())
}
