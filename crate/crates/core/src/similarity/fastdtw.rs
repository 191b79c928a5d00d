//! Multi-resolution DTW approximation.
//!
//! Each level halves both series by averaging adjacent pairs, aligns the
//! coarse pair recursively, projects the coarse path back onto the finer grid,
//! widens it by `radius` cells, and runs DTW restricted to that window. Work
//! and memory are linear in the series length for a fixed radius.

use super::dtw::{backtrack, best_move, cost, dtw_exact, AlignmentResult, DIAG};
use super::SimilarityError;

/// Halves a series by averaging adjacent pairs; an odd trailing element is kept as is.
pub fn coarsen(series: &[f64]) -> Vec<f64> {
    series
        .chunks(2)
        .map(|c| c.iter().sum::<f64>() / c.len() as f64)
        .collect()
}

/// Per-row inclusive column bounds of the cells DTW may visit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Window {
    cols: usize,
    rows: Vec<(usize, usize)>,
}

impl Window {
    pub fn full(rows: usize, cols: usize) -> Self {
        Self {
            cols,
            rows: vec![(0, cols - 1); rows],
        }
    }

    /// Projects a coarse 1-based path onto an `rows × cols` grid and widens it by `radius`.
    pub fn from_coarse_path(
        path: &[(usize, usize)],
        rows: usize,
        cols: usize,
        radius: usize,
    ) -> Self {
        let mut bounds = vec![(usize::MAX, 0usize); rows];
        for &(ci, cj) in path {
            let (ci, cj) = (ci - 1, cj - 1);
            let col_lo = 2 * cj;
            let col_hi = (2 * cj + 1).min(cols - 1);
            for b in &mut bounds[2 * ci..=(2 * ci + 1).min(rows - 1)] {
                b.0 = b.0.min(col_lo);
                b.1 = b.1.max(col_hi);
            }
        }
        // Bounds are monotone in the row index, so the extremes over
        // rows [i - r, i + r] sit at the ends of that range.
        let widened = (0..rows)
            .map(|i| {
                let lo = bounds[i.saturating_sub(radius)].0.saturating_sub(radius);
                let hi = (bounds[(i + radius).min(rows - 1)].1 + radius).min(cols - 1);
                (lo, hi)
            })
            .collect();
        Self {
            cols,
            rows: widened,
        }
    }

    pub fn cell_count(&self) -> usize {
        self.rows.iter().map(|(lo, hi)| hi - lo + 1).sum()
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.rows.get(i).is_some_and(|&(lo, hi)| lo <= j && j <= hi)
    }
}

/// DTW restricted to `window`. Cells outside the window are unreachable.
#[allow(clippy::needless_range_loop)]
pub fn constrained_dtw(x: &[f64], y: &[f64], window: &Window) -> AlignmentResult {
    let n = x.len();
    debug_assert_eq!(window.rows.len(), n);
    debug_assert_eq!(window.cols, y.len());

    let mut offsets = Vec::with_capacity(n + 1);
    let mut total = 0;
    for &(lo, hi) in &window.rows {
        offsets.push(total);
        total += hi - lo + 1;
    }
    offsets.push(total);

    let mut acc = vec![f64::INFINITY; total];
    let mut moves = vec![DIAG; total];
    let at = |acc: &[f64], i: usize, j: usize| -> f64 {
        let (lo, hi) = window.rows[i];
        if j < lo || j > hi {
            f64::INFINITY
        } else {
            acc[offsets[i] + j - lo]
        }
    };

    for i in 0..n {
        let (lo, hi) = window.rows[i];
        for j in lo..=hi {
            let c = cost(x[i], y[j]);
            let idx = offsets[i] + j - lo;
            if i == 0 && j == 0 {
                acc[idx] = c;
                continue;
            }
            let diag = if i > 0 && j > 0 {
                at(&acc, i - 1, j - 1)
            } else {
                f64::INFINITY
            };
            let up = if i > 0 {
                at(&acc, i - 1, j)
            } else {
                f64::INFINITY
            };
            let left = if j > lo { acc[idx - 1] } else { f64::INFINITY };
            let (best, mv) = best_move(diag, up, left);
            acc[idx] = c + best;
            moves[idx] = mv;
        }
    }

    let m = y.len();
    let distance = at(&acc, n - 1, m - 1);
    let path = backtrack(n, m, |i, j| moves[offsets[i] + j - window.rows[i].0]);
    AlignmentResult { distance, path }
}

/// Approximate DTW with search `radius`. Falls back to exact DTW once either
/// series has at most `radius + 2` elements, so a radius of at least
/// `max(|x|, |y|)` reproduces the exact result.
pub fn fastdtw(x: &[f64], y: &[f64], radius: usize) -> Result<AlignmentResult, SimilarityError> {
    if x.is_empty() || y.is_empty() {
        return Err(SimilarityError::EmptyInput);
    }
    let min_size = radius.saturating_add(2);
    if x.len() <= min_size || y.len() <= min_size {
        return dtw_exact(x, y);
    }
    let coarse = fastdtw(&coarsen(x), &coarsen(y), radius)?;
    let window = Window::from_coarse_path(&coarse.path, x.len(), y.len(), radius);
    Ok(constrained_dtw(x, y, &window))
}
