//! Wall-clock scaling of exact DTW against FastDTW on random binary series.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::similarity::{dtw_exact, fastdtw};

#[derive(Debug, Clone, Serialize)]
pub struct ScalingRow {
    pub length: usize,
    /// Mean seconds per alignment.
    pub exact_secs: f64,
    pub fast_secs: f64,
    pub exact_distance: f64,
    pub fast_distance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingReport {
    pub radius: usize,
    pub trials: usize,
    pub rows: Vec<ScalingRow>,
}

impl ScalingReport {
    /// Time ratios between consecutive lengths: `(exact, fast)`.
    pub fn ratios(&self) -> Vec<(f64, f64)> {
        self.rows
            .windows(2)
            .map(|w| {
                (
                    w[1].exact_secs / w[0].exact_secs,
                    w[1].fast_secs / w[0].fast_secs,
                )
            })
            .collect()
    }

    pub fn to_table(&self) -> String {
        let mut out = format!(
            "{:>8} {:>12} {:>12} {:>8} {:>8} {:>10} {:>10}\n",
            "length", "exact_ms", "fast_ms", "exact_x", "fast_x", "exact_d", "fast_d"
        );
        let ratios = self.ratios();
        for (k, r) in self.rows.iter().enumerate() {
            let (ex, fx) = match k.checked_sub(1).map(|i| ratios[i]) {
                Some((e, f)) => (format!("{e:.2}"), format!("{f:.2}")),
                None => ("-".into(), "-".into()),
            };
            out.push_str(&format!(
                "{:>8} {:>12.3} {:>12.3} {:>8} {:>8} {:>10} {:>10}\n",
                r.length,
                r.exact_secs * 1e3,
                r.fast_secs * 1e3,
                ex,
                fx,
                r.exact_distance,
                r.fast_distance
            ));
        }
        out
    }
}

pub fn random_binary(len: usize, density: f64, rng: &mut impl Rng) -> Vec<f64> {
    (0..len)
        .map(|_| if rng.random_bool(density) { 1.0 } else { 0.0 })
        .collect()
}

/// Timed passes per algorithm and length; the fastest pass is reported.
pub const BATCHES: usize = 5;

/// Times both algorithms on `trials` random pairs per length. Inputs are
/// generated before timing starts. Each row reports the mean per pair of the
/// fastest of [`BATCHES`] passes over all pairs. Exact and approximate passes
/// alternate, so a burst of interference cannot cover every pass of one
/// algorithm; no pair is ever dropped.
pub fn measure(lengths: &[usize], trials: usize, radius: usize, seed: u64) -> ScalingReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let trials = trials.max(1);
    let rows = lengths
        .iter()
        .map(|&len| {
            let pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..trials)
                .map(|_| {
                    (
                        random_binary(len, 0.3, &mut rng),
                        random_binary(len, 0.3, &mut rng),
                    )
                })
                .collect();
            let (mut exact_secs, mut fast_secs) = (f64::INFINITY, f64::INFINITY);
            let (mut exact_distance, mut fast_distance) = (0.0, 0.0);
            for _ in 0..BATCHES {
                let (secs, d) =
                    timed_pass(&pairs, |x, y| dtw_exact(x, y).expect("non-empty").distance);
                exact_secs = exact_secs.min(secs);
                exact_distance = d;
                let (secs, d) = timed_pass(&pairs, |x, y| {
                    fastdtw(x, y, radius).expect("non-empty").distance
                });
                fast_secs = fast_secs.min(secs);
                fast_distance = d;
            }
            ScalingRow {
                length: len,
                exact_secs,
                fast_secs,
                exact_distance,
                fast_distance,
            }
        })
        .collect();
    ScalingReport {
        radius,
        trials,
        rows,
    }
}

/// `(mean seconds per pair, mean distance)` of one pass over `pairs`.
fn timed_pass(pairs: &[(Vec<f64>, Vec<f64>)], align: impl Fn(&[f64], &[f64]) -> f64) -> (f64, f64) {
    let start = Instant::now();
    let distance: f64 = pairs.iter().map(|(x, y)| align(x, y)).sum();
    let n = pairs.len() as f64;
    (start.elapsed().as_secs_f64() / n, distance / n)
}
