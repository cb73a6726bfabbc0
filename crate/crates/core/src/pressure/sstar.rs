use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::maps::DrivenSystem;
use crate::pressure::{build_transfer_matrix, spectral_radius, MatrixMode, DEFAULT_MAX_ITER};

/// Upper end of the bracket search; `g^{-s}` stops being representable soon after.
pub const S_CAP: f64 = 64.0;

const MAX_ROOT_ITER: usize = 200;
const CURVE_POINTS: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PressureOptions {
    pub resolution: usize,
    pub mode: MatrixMode,
    /// Root tolerance on `|psi|`.
    pub tol: f64,
    /// Relative tolerance of each Perron-root estimate.
    pub power_tol: f64,
    pub max_iter: usize,
}

impl Default for PressureOptions {
    fn default() -> Self {
        Self {
            resolution: 4096,
            mode: MatrixMode::Ulam,
            tol: 1e-9,
            power_tol: 1e-13,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

impl PressureOptions {
    /// Exact-markov when the system allows it, Ulam otherwise.
    pub fn best_for(sys: &DrivenSystem, resolution: usize) -> Self {
        let exact = sys.base().is_piecewise_linear() && sys.mult().cell_values_for(sys.base()).is_some();
        Self {
            resolution,
            mode: if exact {
                MatrixMode::ExactMarkov
            } else {
                MatrixMode::Ulam
            },
            ..Self::default()
        }
    }
}

/// `psi(s) = log rho(L_s)`.
pub fn pressure(sys: &DrivenSystem, s: f64, opts: &PressureOptions) -> Result<f64> {
    let m = build_transfer_matrix(sys, s, opts.resolution, opts.mode)?;
    Ok(spectral_radius(&m, opts.power_tol, opts.max_iter)?.value.ln())
}

/// `psi'(0) = -(integral of log g against the s = 0 stationary density)`.
pub fn psi_prime_at_zero(sys: &DrivenSystem, opts: &PressureOptions) -> Result<f64> {
    let m = build_transfer_matrix(sys, 0.0, opts.resolution, opts.mode)?;
    let eig = spectral_radius(&m, opts.power_tol, opts.max_iter)?;
    let masses = m.cell_masses(&eig.vector);
    Ok(-m
        .cell_midpoints()
        .iter()
        .zip(&masses)
        .map(|(&c, &w)| w * sys.mult().log_eval(c))
        .sum::<f64>())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PressureCurve {
    /// `(s, psi(s))`, sorted by `s`.
    pub samples: Vec<(f64, f64)>,
    pub s_star: f64,
    pub psi_at_sstar: f64,
    pub psi_prime_at_zero: f64,
    /// Central difference of `psi` at `s_star`.
    pub psi_prime_at_sstar: f64,
    pub resolution: usize,
    pub mode: MatrixMode,
    /// Sign-change bracket handed to the root finder.
    pub bracket: (f64, f64),
    pub iterations: usize,
}

impl PressureCurve {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let io = |e: csv::Error| Error::InvalidParameter(format!("csv: {e}"));
        wr.write_record(["s", "psi"]).map_err(io)?;
        for &(s, p) in &self.samples {
            wr.write_record([format!("{s:.12e}"), format!("{p:.12e}")])
                .map_err(io)?;
        }
        wr.flush().map_err(|e| Error::InvalidParameter(format!("csv: {e}")))?;
        Ok(())
    }

    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "s_star": self.s_star,
            "psi_prime_0": self.psi_prime_at_zero,
            "psi_prime_at_sstar": self.psi_prime_at_sstar,
            "N": self.resolution,
            "mode": self.mode.as_str(),
            "bracket": [self.bracket.0, self.bracket.1],
            "iterations": self.iterations,
        })
    }

    /// Number of consecutive sample triples where `psi` lies above its chord by more than `tol`.
    pub fn convexity_violations(&self, tol: f64) -> usize {
        convexity_violations(&self.samples, tol)
    }
}

pub fn convexity_violations(samples: &[(f64, f64)], tol: f64) -> usize {
    samples
        .windows(3)
        .filter(|w| {
            let (s0, p0) = w[0];
            let (s1, p1) = w[1];
            let (s2, p2) = w[2];
            let chord = p0 + (s1 - s0) / (s2 - s0) * (p2 - p0);
            p1 > chord + tol
        })
        .count()
}

/// Positive zero `s*` of the pressure.
///
/// Shrinks `s_lo` from 0.05 until `psi(s_lo) < 0`, doubles `s_hi` until
/// `psi(s_hi) > 0` (capped at [`S_CAP`]), then runs Illinois regula falsi with a
/// bisection fallback.
pub fn find_sstar(sys: &DrivenSystem, opts: &PressureOptions) -> Result<PressureCurve> {
    let mut samples = Vec::new();
    let mut eval = |s: f64| -> Result<f64> {
        let p = pressure(sys, s, opts)?;
        samples.push((s, p));
        Ok(p)
    };

    let mut lo = 0.05;
    let mut f_lo = eval(lo)?;
    while f_lo >= 0.0 {
        if lo < 1e-6 {
            return Err(Error::NoPositiveZero {
                cap: lo,
                psi_at_cap: f_lo,
            });
        }
        lo *= 0.5;
        f_lo = eval(lo)?;
    }
    let mut hi = 2.0 * lo;
    let mut f_hi = eval(hi)?;
    while f_hi <= 0.0 {
        if hi >= S_CAP {
            return Err(Error::NoPositiveZero {
                cap: S_CAP,
                psi_at_cap: f_hi,
            });
        }
        lo = hi;
        f_lo = f_hi;
        hi = (2.0 * hi).min(S_CAP);
        f_hi = eval(hi)?;
    }
    let bracket = (lo, hi);

    let (mut a, mut fa, mut b, mut fb) = (lo, f_lo, hi, f_hi);
    let mut side = 0i8;
    let mut root = None;
    let mut iterations = 0;
    for it in 1..=MAX_ROOT_ITER {
        iterations = it;
        let mut c = (a * fb - b * fa) / (fb - fa);
        if !(c > a && c < b) {
            c = 0.5 * (a + b);
        }
        let fc = eval(c)?;
        if fc.abs() < opts.tol || b - a < 1e-15 * b {
            root = Some(c);
            break;
        }
        if fc < 0.0 {
            a = c;
            fa = fc;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = c;
            fb = fc;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
    }
    let s_star = root.ok_or(Error::NoConvergence {
        what: "pressure root".into(),
        iterations,
    })?;

    let h = 1e-4 * s_star.max(1e-3);
    let grid: Vec<f64> = (1..=CURVE_POINTS)
        .map(|i| 2.0 * s_star * i as f64 / CURVE_POINTS as f64)
        .chain([0.0, s_star - h, s_star + h])
        .collect();
    let extra: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|&s| pressure(sys, s, opts).map(|p| (s, p)))
        .collect::<Result<_>>()?;
    let psi_prime_at_sstar = (extra[CURVE_POINTS + 2].1 - extra[CURVE_POINTS + 1].1) / (2.0 * h);
    samples.extend(extra);
    samples.sort_by(|x, y| x.0.total_cmp(&y.0));
    samples.dedup_by(|x, y| x.0 == y.0);
    let psi_at_sstar = samples.iter().find(|p| p.0 == s_star).map_or(0.0, |p| p.1);

    Ok(PressureCurve {
        samples,
        s_star,
        psi_at_sstar,
        psi_prime_at_zero: psi_prime_at_zero(sys, opts)?,
        psi_prime_at_sstar,
        resolution: opts.resolution,
        mode: opts.mode,
        bracket,
        iterations,
    })
}
