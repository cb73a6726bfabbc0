use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::DrivenSystem;

/// Discretization scheme for the weighted transfer operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatrixMode {
    /// Equal cells refined at branch endpoints; entries are mass flows.
    Ulam,
    /// Markov cells of a piecewise-linear map with cell-constant `g`; entries
    /// act on cell-constant densities.
    ExactMarkov,
}

impl MatrixMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            MatrixMode::Ulam => "ulam",
            MatrixMode::ExactMarkov => "exact-markov",
        }
    }
}

/// Nonnegative matrix approximating `L_s f = sum over preimages of f g^{-s} / |S'|`.
///
/// Stored by source column: `columns[j]` lists `(i, entry[j -> i])`.
#[derive(Debug, Clone)]
pub struct TransferMatrix {
    s: f64,
    mode: MatrixMode,
    cells: Vec<f64>,
    columns: Vec<Vec<(u32, f64)>>,
}

impl TransferMatrix {
    /// Builds a matrix from explicit columns over the given cell boundaries.
    pub fn from_columns(s: f64, mode: MatrixMode, cells: Vec<f64>, columns: Vec<Vec<(u32, f64)>>) -> Result<Self> {
        if cells.len() != columns.len() + 1 {
            return Err(Error::InvalidParameter("cell/column count mismatch".into()));
        }
        if columns
            .iter()
            .flatten()
            .any(|&(i, v)| (i as usize) >= columns.len() || !(v >= 0.0))
        {
            return Err(Error::InvalidParameter(
                "entries must be nonnegative and in range".into(),
            ));
        }
        Ok(Self {
            s,
            mode,
            cells,
            columns,
        })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn mode(&self) -> MatrixMode {
        self.mode
    }

    /// Number of cells.
    pub fn size(&self) -> usize {
        self.columns.len()
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    pub fn columns(&self) -> &[Vec<(u32, f64)>] {
        &self.columns
    }

    pub fn cell_midpoints(&self) -> Vec<f64> {
        self.cells.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    pub fn cell_widths(&self) -> Vec<f64> {
        self.cells.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Entry `[j -> i]`.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.columns[j]
            .iter()
            .filter(|&&(r, _)| r as usize == i)
            .map(|&(_, v)| v)
            .sum()
    }

    /// Row-major dense copy, `dense[i][j] = entry[j -> i]`.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.size();
        let mut d = vec![vec![0.0; n]; n];
        for (j, col) in self.columns.iter().enumerate() {
            for &(i, v) in col {
                d[i as usize][j] += v;
            }
        }
        d
    }

    /// `out = M v`.
    pub fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (col, &vj) in self.columns.iter().zip(v) {
            if vj == 0.0 {
                continue;
            }
            for &(i, m) in col {
                out[i as usize] += m * vj;
            }
        }
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.size()];
        self.apply_into(v, &mut out);
        out
    }

    /// Cell masses (summing to one) of the nonnegative eigenvector `v`.
    pub fn cell_masses(&self, v: &[f64]) -> Vec<f64> {
        let raw: Vec<f64> = match self.mode {
            MatrixMode::Ulam => v.to_vec(),
            MatrixMode::ExactMarkov => v.iter().zip(self.cell_widths()).map(|(f, w)| f * w).collect(),
        };
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|x| x / total).collect()
    }

    /// `log of the integral of L_s^n 1` for `n = 0..=n_max`.
    pub fn log_iterate_integrals(&self, n_max: usize) -> Vec<f64> {
        let widths = self.cell_widths();
        // Ulam vectors carry masses, exact-markov vectors carry densities
        let (mut v, weights): (Vec<f64>, Vec<f64>) = match self.mode {
            MatrixMode::Ulam => (widths.clone(), vec![1.0; widths.len()]),
            MatrixMode::ExactMarkov => (vec![1.0; widths.len()], widths),
        };
        let mut out = Vec::with_capacity(n_max + 1);
        let mut log_scale = 0.0;
        let mut next = vec![0.0; v.len()];
        for n in 0..=n_max {
            let integral: f64 = v.iter().zip(&weights).map(|(a, b)| a * b).sum();
            out.push(log_scale + integral.ln());
            if n == n_max {
                break;
            }
            self.apply_into(&v, &mut next);
            let norm: f64 = next.iter().sum();
            log_scale += norm.ln();
            for (a, b) in v.iter_mut().zip(&next) {
                *a = b / norm;
            }
        }
        out
    }
}

/// Assembles the transfer matrix of `L_s` at resolution `n`.
pub fn build_transfer_matrix(sys: &DrivenSystem, s: f64, n: usize, mode: MatrixMode) -> Result<TransferMatrix> {
    let map = sys.base();
    if n < map.num_cells() {
        return Err(Error::InvalidParameter(format!(
            "resolution {n} below the {} Markov cells",
            map.num_cells()
        )));
    }
    match mode {
        MatrixMode::ExactMarkov => build_exact(sys, s),
        MatrixMode::Ulam => build_ulam(sys, s, n),
    }
}

fn build_exact(sys: &DrivenSystem, s: f64) -> Result<TransferMatrix> {
    let map = sys.base();
    if !map.is_piecewise_linear() {
        return Err(Error::ModeUnsupported(format!(
            "{} is not piecewise linear",
            map.name()
        )));
    }
    let values = sys
        .mult()
        .cell_values_for(map)
        .ok_or_else(|| Error::ModeUnsupported(format!("{} is not constant on Markov cells", sys.mult().label())))?;
    let columns = map
        .branches()
        .iter()
        .zip(&values)
        .map(|(b, &g)| {
            let slope = b.eval(b.lo).1.abs();
            let w = (-s * g.ln()).exp() / slope;
            (b.image.0..b.image.1).map(|i| (i as u32, w)).collect()
        })
        .collect();
    TransferMatrix::from_columns(s, MatrixMode::ExactMarkov, map.breaks().to_vec(), columns)
}

/// Uniform grid of `n` cells refined by the branch endpoints.
pub fn ulam_cells(breaks: &[f64], n: usize) -> Vec<f64> {
    let mut cells: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
    cells.extend_from_slice(breaks);
    cells.sort_by(f64::total_cmp);
    cells.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    *cells.first_mut().unwrap() = 0.0;
    *cells.last_mut().unwrap() = 1.0;
    cells
}

fn build_ulam(sys: &DrivenSystem, s: f64, n: usize) -> Result<TransferMatrix> {
    let map = sys.base();
    let cells = ulam_cells(map.breaks(), n);
    let ncell = cells.len() - 1;
    let weights: Vec<f64> = cells
        .windows(2)
        .map(|w| (-s * sys.mult().log_eval(0.5 * (w[0] + w[1]))).exp())
        .collect();
    let mut columns: Vec<Vec<(u32, f64)>> = vec![Vec::new(); ncell];
    let locate = |x: f64| -> usize { cells[1..ncell].partition_point(|&b| b <= x) };

    for b in map.branches() {
        // source cells lying in this branch domain
        let js = cells.partition_point(|&c| c < b.lo - 1e-15);
        let je = cells.partition_point(|&c| c < b.hi - 1e-15);
        let (ylo, yhi) = b.image_interval();
        let mut pts: Vec<f64> = cells[js..=je].to_vec();
        for &y in cells.iter().filter(|&&y| y > ylo && y < yhi) {
            pts.push(b.preimage(y));
        }
        pts.sort_by(f64::total_cmp);
        let mut j = js;
        for w in pts.windows(2) {
            let (x0, x1) = (w[0], w[1]);
            if x1 - x0 <= 0.0 {
                continue;
            }
            let xm = 0.5 * (x0 + x1);
            while j + 1 < je && cells[j + 1] <= xm {
                j += 1;
            }
            let i = locate(b.eval(xm).0.clamp(0.0, 1.0 - f64::EPSILON)) as u32;
            let v = weights[j] * (x1 - x0) / (cells[j + 1] - cells[j]);
            match columns[j].last_mut() {
                Some((last, acc)) if *last == i => *acc += v,
                _ => columns[j].push((i, v)),
            }
        }
    }
    TransferMatrix::from_columns(s, MatrixMode::Ulam, cells, columns)
}
