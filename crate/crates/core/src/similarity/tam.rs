use serde::{Deserialize, Serialize};

use super::dtw::is_valid_path;
use super::SimilarityError;

/// Time-alignment measurement of a warping path.
///
/// Horizontal steps advance only the first series, vertical steps only the
/// second. `tam` is 0 for a fully in-phase alignment and 3 for a fully
/// out-of-phase one; `similarity` maps it affinely onto `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TamScore {
    pub rho_advance: f64,
    pub rho_delay: f64,
    pub rho_phase: f64,
    pub tam: f64,
    pub similarity: f64,
}

impl TamScore {
    fn from_fractions(rho_advance: f64, rho_delay: f64, rho_phase: f64) -> Self {
        let tam = rho_advance + rho_delay + (1.0 - rho_phase);
        Self {
            rho_advance,
            rho_delay,
            rho_phase,
            tam,
            similarity: 1.0 - tam / 3.0,
        }
    }
}

/// Step counts of a path: `(horizontal, vertical, diagonal)`.
pub fn step_counts(path: &[(usize, usize)]) -> (usize, usize, usize) {
    path.windows(2).fold((0, 0, 0), |(h, v, d), w| {
        match (w[1].0 - w[0].0, w[1].1 - w[0].1) {
            (1, 0) => (h + 1, v, d),
            (0, 1) => (h, v + 1, d),
            _ => (h, v, d + 1),
        }
    })
}

/// Scores a 1-based warping path between series of lengths `n` and `m`.
///
/// `rho_advance = h/(n−1)`, `rho_delay = v/(m−1)`, `rho_phase = d/min(n−1, m−1)`.
/// A zero denominator removes that term from the sum: advance and delay
/// become 0, and phase becomes 1 so that `1 − rho_phase` vanishes.
pub fn tam(path: &[(usize, usize)], n: usize, m: usize) -> Result<TamScore, SimilarityError> {
    if n == 0 || m == 0 || !is_valid_path(path, n, m) {
        return Err(SimilarityError::InvalidPath { n, m });
    }
    let (h, v, d) = step_counts(path);
    let ratio = |count: usize, denom: usize, degenerate: f64| {
        if denom == 0 {
            degenerate
        } else {
            count as f64 / denom as f64
        }
    };
    Ok(TamScore::from_fractions(
        ratio(h, n - 1, 0.0),
        ratio(v, m - 1, 0.0),
        ratio(d, (n - 1).min(m - 1), 1.0),
    ))
}
