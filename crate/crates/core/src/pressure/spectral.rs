use crate::error::{Error, Result};
use crate::pressure::TransferMatrix;

pub const DEFAULT_MAX_ITER: usize = 100_000;

/// Perron root and its eigenvector (1-norm one).
#[derive(Debug, Clone, PartialEq)]
pub struct PerronRoot {
    pub value: f64,
    pub vector: Vec<f64>,
    pub iterations: usize,
}

/// Power iteration from the uniform vector with 1-norm normalization.
///
/// Stops once successive root estimates differ by less than `tol` (relative)
/// and the eigenvector has settled to the same order. `tol` is raised to the
/// summation noise `n * EPSILON` of an `n`-cell matrix.
pub fn spectral_radius(m: &TransferMatrix, tol: f64, max_iter: usize) -> Result<PerronRoot> {
    let n = m.size();
    if n == 0 {
        return Err(Error::InvalidParameter("empty matrix".into()));
    }
    let tol = tol.max(n as f64 * f64::EPSILON);
    let mut v = vec![1.0 / n as f64; n];
    let mut w = vec![0.0; n];
    let mut prev = f64::NAN;
    let vec_tol = (100.0 * tol).max(1e-12);
    for it in 1..=max_iter {
        m.apply_into(&v, &mut w);
        let lambda: f64 = w.iter().sum();
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::NoConvergence {
                what: format!("power iteration (norm {lambda})"),
                iterations: it,
            });
        }
        let mut change = 0.0;
        for (a, b) in v.iter_mut().zip(&w) {
            let next = b / lambda;
            change += (next - *a).abs();
            *a = next;
        }
        if (lambda - prev).abs() <= tol * lambda && change <= vec_tol {
            return Ok(PerronRoot {
                value: lambda,
                vector: v,
                iterations: it,
            });
        }
        prev = lambda;
    }
    Err(Error::NoConvergence {
        what: "power iteration".into(),
        iterations: max_iter,
    })
}
