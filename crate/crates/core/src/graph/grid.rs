use serde::{Deserialize, Serialize};

const GOLDEN_FRAC: f64 = 0.618_033_988_749_894_9;

/// Placement of sample points inside the `n` equal cells of `[0, 1)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridKind {
    /// One point per cell at a golden-ratio offset.
    ///
    /// Midpoints are dyadic rationals, which the doubling map sends to `0` in
    /// finitely many float steps; the irrational offsets avoid that bias.
    #[default]
    Jittered,
    Midpoint,
}

impl GridKind {
    pub fn points(self, n: usize) -> Vec<f64> {
        (0..n).map(|i| self.point(i, n)).collect()
    }

    #[inline]
    pub fn point(self, i: usize, n: usize) -> f64 {
        let offset = match self {
            GridKind::Midpoint => 0.5,
            GridKind::Jittered => (i as f64 * GOLDEN_FRAC + 0.5).fract(),
        };
        (i as f64 + offset) / n as f64
    }
}
