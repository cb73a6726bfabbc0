use serde::Serialize;

use crate::error::{Error, Result};
use crate::maps::{MarkovIntervalMap, Multiplier};

/// Enumeration is exhaustive up to this period.
pub const MAX_SEARCH_PERIOD: usize = 12;

const BOUNDARY_SLACK: f64 = 1e-12;

/// Periodic orbit together with its symbolic code.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodicOrbit {
    pub points: Vec<f64>,
    pub word: Vec<usize>,
    pub period: usize,
    /// Average of `log g` over the orbit points.
    pub mean_log_g: f64,
}

impl PeriodicOrbit {
    /// `exp(mean_log_g)`.
    pub fn geometric_mean(&self) -> f64 {
        self.mean_log_g.exp()
    }
}

/// All periodic orbits of period `<= max_period`, sorted by mean `log g`.
///
/// Admissible cycles of the transition graph are enumerated as Lyndon words
/// (one representative per rotation class, primitive only); each cycle's point
/// is located by bisection on its cylinder. Orbits sitting on the excluded
/// right end of a cell are boundary artifacts of the half-open convention and
/// are dropped.
pub fn find_periodic_orbits(
    map: &MarkovIntervalMap,
    mult: &Multiplier,
    max_period: usize,
) -> Result<Vec<PeriodicOrbit>> {
    if max_period == 0 || max_period > MAX_SEARCH_PERIOD {
        return Err(Error::InvalidParameter(format!(
            "max_period {max_period} must be in 1..={MAX_SEARCH_PERIOD}"
        )));
    }
    let mut out = Vec::new();
    let mut word = Vec::with_capacity(max_period);
    for p in 1..=max_period {
        for start in 0..map.num_cells() {
            word.clear();
            word.push(start);
            extend_words(map, p, &mut word, &mut |w| {
                if let Some(orbit) = solve_cycle(map, mult, w)? {
                    out.push(orbit);
                }
                Ok(())
            })?;
        }
    }
    out.sort_by(|a, b| a.mean_log_g.total_cmp(&b.mean_log_g));
    Ok(out)
}

fn extend_words(
    map: &MarkovIntervalMap,
    p: usize,
    word: &mut Vec<usize>,
    emit: &mut dyn FnMut(&[usize]) -> Result<()>,
) -> Result<()> {
    let first = word[0];
    let last = *word.last().unwrap();
    if word.len() == p {
        if map.transitions()[last].contains(&first) && is_lyndon(word) {
            emit(word)?;
        }
        return Ok(());
    }
    for &next in &map.transitions()[last] {
        // a Lyndon word never uses a symbol below its first one
        if next < first {
            continue;
        }
        word.push(next);
        extend_words(map, p, word, emit)?;
        word.pop();
    }
    Ok(())
}

/// Strictly smaller than every nontrivial rotation.
fn is_lyndon(w: &[usize]) -> bool {
    let p = w.len();
    (1..p).all(|r| {
        for i in 0..p {
            let a = w[i];
            let b = w[(i + r) % p];
            if a != b {
                return a < b;
            }
        }
        false
    })
}

fn solve_cycle(map: &MarkovIntervalMap, mult: &Multiplier, word: &[usize]) -> Result<Option<PeriodicOrbit>> {
    let branches = map.branches();
    let breaks = map.breaks();
    let p = word.len();

    // cylinder of the closed word, pulled back from cell word[0]
    let (mut lo, mut hi) = (breaks[word[0]], breaks[word[0] + 1]);
    for &c in word.iter().rev() {
        let b = &branches[c];
        let (u, v) = (b.preimage(lo), b.preimage(hi));
        lo = u.min(v);
        hi = u.max(v);
    }

    let excess = |x: f64| -> f64 {
        let mut y = x;
        for &c in word {
            y = branches[c].eval(y).0;
        }
        y - x
    };
    let (mut a, mut b) = (lo, hi);
    let (mut fa, fb) = (excess(a), excess(b));
    // a root on the cylinder edge may miss the sign change by rounding
    let root = if fa.abs() <= BOUNDARY_SLACK {
        a
    } else if fb.abs() <= BOUNDARY_SLACK {
        b
    } else {
        if fa.signum() == fb.signum() {
            return Err(Error::NoConvergence {
                what: format!("periodic point of cycle {word:?} (no sign change on cylinder)"),
                iterations: 0,
            });
        }
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            let fm = excess(mid);
            if fm == 0.0 {
                a = mid;
                b = mid;
                break;
            }
            if fm.signum() == fa.signum() {
                a = mid;
                fa = fm;
            } else {
                b = mid;
            }
        }
        0.5 * (a + b)
    };

    // remaining orbit points through contracting inverse branches
    let mut points = vec![0.0; p];
    points[0] = root;
    let mut y = root;
    for i in (1..p).rev() {
        y = branches[word[i]].preimage(y);
        points[i] = y;
    }
    for (i, &x) in points.iter().enumerate() {
        let (cl, cr) = (breaks[word[i]], breaks[word[i] + 1]);
        if x < cl - BOUNDARY_SLACK || x >= cr - BOUNDARY_SLACK {
            return Ok(None);
        }
    }
    let points: Vec<f64> = points.into_iter().map(|x| x.max(0.0)).collect();
    let mean_log_g = points.iter().map(|&x| mult.log_eval(x)).sum::<f64>() / p as f64;
    Ok(Some(PeriodicOrbit {
        points,
        word: word.to_vec(),
        period: p,
        mean_log_g,
    }))
}
