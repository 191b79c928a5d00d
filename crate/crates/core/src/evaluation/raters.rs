use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::TextId;
use crate::similarity::SimilarityMatrix;

use super::{EvaluationError, Provenance, RaterResponse, ResponseStore, Trial};

/// Orders a trial's candidates, most similar first.
pub trait Rater {
    fn rank(&mut self, trial: &Trial, matrix: &SimilarityMatrix) -> Vec<TextId>;
}

fn score(matrix: &SimilarityMatrix, trial: &Trial, c: &TextId) -> f64 {
    matrix
        .score(trial.target.as_str(), c.as_str())
        .unwrap_or(0.0)
}

fn sort_by_scores(mut scored: Vec<(TextId, f64)>) -> Vec<TextId> {
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    scored.into_iter().map(|(t, _)| t).collect()
}

/// Ranks exactly by matrix score, ties by ascending id.
#[derive(Debug, Default, Clone, Copy)]
pub struct ScoreFaithfulRater;

impl Rater for ScoreFaithfulRater {
    fn rank(&mut self, trial: &Trial, matrix: &SimilarityMatrix) -> Vec<TextId> {
        sort_by_scores(
            trial
                .candidates
                .iter()
                .map(|c| (c.clone(), score(matrix, trial, c)))
                .collect(),
        )
    }
}

/// Ranks by matrix score plus uniform noise in `[-amplitude, amplitude]`.
#[derive(Debug, Clone)]
pub struct NoisyScoreRater {
    amplitude: f64,
    rng: ChaCha8Rng,
}

impl NoisyScoreRater {
    pub fn new(amplitude: f64, seed: u64) -> Self {
        Self {
            amplitude: amplitude.abs(),
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl Rater for NoisyScoreRater {
    fn rank(&mut self, trial: &Trial, matrix: &SimilarityMatrix) -> Vec<TextId> {
        let a = self.amplitude;
        let scored = trial
            .candidates
            .iter()
            .map(|c| {
                let noise = if a > 0.0 {
                    self.rng.random_range(-a..=a)
                } else {
                    0.0
                };
                (c.clone(), score(matrix, trial, c) + noise)
            })
            .collect();
        sort_by_scores(scored)
    }
}

/// Ignores the matrix and returns a uniformly random permutation.
#[derive(Debug, Clone)]
pub struct UniformRandomRater {
    rng: ChaCha8Rng,
}

impl UniformRandomRater {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl Rater for UniformRandomRater {
    fn rank(&mut self, trial: &Trial, _matrix: &SimilarityMatrix) -> Vec<TextId> {
        let mut order = trial.candidates.clone();
        order.shuffle(&mut self.rng);
        order
    }
}

/// Runs `rater` over every trial and records its rankings.
pub fn simulate(
    rater: &mut dyn Rater,
    rater_id: &str,
    trials: &[Trial],
    matrix: &SimilarityMatrix,
) -> Result<Vec<RaterResponse>, EvaluationError> {
    let mut store = ResponseStore::new();
    for t in trials {
        store.record_at(t, rater.rank(t, matrix), rater_id, 0)?;
    }
    Ok(store.responses())
}

/// Whether the random candidate scores strictly below every other candidate.
pub fn random_candidate_strictly_lowest(trial: &Trial, matrix: &SimilarityMatrix) -> bool {
    let Some(k) = trial
        .provenance
        .iter()
        .position(|p| *p == Provenance::Random)
    else {
        return false;
    };
    let random = score(matrix, trial, &trial.candidates[k]);
    trial
        .candidates
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != k)
        .all(|(_, c)| score(matrix, trial, c) > random)
}
