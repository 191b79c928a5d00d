use serde::{Deserialize, Serialize};

use super::SimilarityError;

/// Result of aligning two sequences.
///
/// `path` holds 1-based index pairs `(i, j)` from `(1, 1)` to `(|x|, |y|)`.
/// Each step advances `i`, `j`, or both by one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentResult {
    pub distance: f64,
    pub path: Vec<(usize, usize)>,
}

#[inline]
pub(crate) fn cost(a: f64, b: f64) -> f64 {
    (a - b).abs()
}

// Backtracking moves, stored per cell.
pub(crate) const DIAG: u8 = 0;
pub(crate) const UP: u8 = 1; // predecessor (i - 1, j)
pub(crate) const LEFT: u8 = 2; // predecessor (i, j - 1)

/// Picks the cheapest predecessor. Ties prefer the diagonal, then `UP`.
#[inline]
pub(crate) fn best_move(diag: f64, up: f64, left: f64) -> (f64, u8) {
    let mut best = (diag, DIAG);
    if up < best.0 {
        best = (up, UP);
    }
    if left < best.0 {
        best = (left, LEFT);
    }
    best
}

/// Full quadratic DTW under absolute-difference cost.
///
/// Keeps two rows of cumulative cost plus one byte of backtracking per cell,
/// so memory is `|x|·|y|` bytes.
pub fn dtw_exact(x: &[f64], y: &[f64]) -> Result<AlignmentResult, SimilarityError> {
    if x.is_empty() || y.is_empty() {
        return Err(SimilarityError::EmptyInput);
    }
    let (n, m) = (x.len(), y.len());
    let mut moves = vec![DIAG; n * m];
    let mut prev = vec![f64::INFINITY; m];
    let mut cur = vec![f64::INFINITY; m];

    for i in 0..n {
        for j in 0..m {
            let c = cost(x[i], y[j]);
            if i == 0 && j == 0 {
                cur[0] = c;
                continue;
            }
            let diag = if i > 0 && j > 0 {
                prev[j - 1]
            } else {
                f64::INFINITY
            };
            let up = if i > 0 { prev[j] } else { f64::INFINITY };
            let left = if j > 0 { cur[j - 1] } else { f64::INFINITY };
            let (best, mv) = best_move(diag, up, left);
            cur[j] = c + best;
            moves[i * m + j] = mv;
        }
        std::mem::swap(&mut prev, &mut cur);
    }

    let distance = prev[m - 1];
    let path = backtrack(n, m, |i, j| moves[i * m + j]);
    Ok(AlignmentResult { distance, path })
}

/// Walks moves back from `(n-1, m-1)` and returns the 1-based forward path.
pub(crate) fn backtrack(
    n: usize,
    m: usize,
    move_at: impl Fn(usize, usize) -> u8,
) -> Vec<(usize, usize)> {
    let (mut i, mut j) = (n - 1, m - 1);
    let mut path = Vec::with_capacity(n + m);
    path.push((i + 1, j + 1));
    while i > 0 || j > 0 {
        match (i, j) {
            (0, _) => j -= 1,
            (_, 0) => i -= 1,
            _ => match move_at(i, j) {
                DIAG => {
                    i -= 1;
                    j -= 1;
                }
                UP => i -= 1,
                _ => j -= 1,
            },
        }
        path.push((i + 1, j + 1));
    }
    path.reverse();
    path
}

/// Sum of per-cell costs along a 1-based path.
pub fn path_cost(x: &[f64], y: &[f64], path: &[(usize, usize)]) -> f64 {
    path.iter().map(|&(i, j)| cost(x[i - 1], y[j - 1])).sum()
}

/// Checks the warping-path shape: starts at `(1,1)`, ends at `(n,m)`, unit steps.
pub fn is_valid_path(path: &[(usize, usize)], n: usize, m: usize) -> bool {
    path.first() == Some(&(1, 1))
        && path.last() == Some(&(n, m))
        && path.windows(2).all(|w| {
            let (di, dj) = (w[1].0.wrapping_sub(w[0].0), w[1].1.wrapping_sub(w[0].1));
            matches!((di, dj), (1, 0) | (0, 1) | (1, 1))
        })
}
