use std::collections::BTreeMap;
use std::fmt::Write;
use std::time::{SystemTime, UNIX_EPOCH};

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::{TagId, TextId};
use crate::similarity::{csv_field, rank_similar, SimilarityMatrix};

use super::EvaluationError;

pub const CANDIDATES: usize = 5;
/// Target plus ranks 1–10 plus at least one text for the random draw.
pub const MIN_TEXTS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Top3,
    Mid,
    Random,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Top3 => "top3",
            Self::Mid => "mid",
            Self::Random => "random",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trial {
    pub id: String,
    pub target: TextId,
    pub tag: TagId,
    /// Presentation order.
    pub candidates: Vec<TextId>,
    /// `provenance[k]` labels `candidates[k]`.
    pub provenance: Vec<Provenance>,
    pub seed: u64,
}

impl Trial {
    pub fn provenance_of(&self, text: &TextId) -> Option<Provenance> {
        self.candidates
            .iter()
            .position(|c| c == text)
            .map(|k| self.provenance[k])
    }

    fn is_permutation(&self, ranking: &[TextId]) -> bool {
        ranking.len() == self.candidates.len() && {
            let mut a: Vec<_> = ranking.iter().collect();
            let mut b: Vec<_> = self.candidates.iter().collect();
            a.sort();
            b.sort();
            a.dedup();
            a == b
        }
    }
}

fn build_one(
    matrix: &SimilarityMatrix,
    target: &str,
    id: String,
    seed: u64,
) -> Result<Trial, EvaluationError> {
    let ranked = rank_similar(matrix, target)
        .map_err(|_| EvaluationError::UnknownTarget(target.to_owned()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picks: Vec<(TextId, Provenance)> = ranked[..3]
        .iter()
        .map(|(t, _)| (t.clone(), Provenance::Top3))
        .collect();
    let mid = rng.random_range(3..10);
    picks.push((ranked[mid].0.clone(), Provenance::Mid));
    let random = rng.random_range(10..ranked.len());
    picks.push((ranked[random].0.clone(), Provenance::Random));
    picks.shuffle(&mut rng);
    let (candidates, provenance) = picks.into_iter().unzip();
    Ok(Trial {
        id,
        target: TextId::new(target),
        tag: matrix.tag.clone(),
        candidates,
        provenance,
        seed,
    })
}

/// One trial per entry of `targets` (repeats allowed), reproducible from `seed`.
///
/// Each trial draws its own seed from a stream seeded with `seed`, so a
/// single trial can be regenerated from `Trial::seed` alone.
pub fn build_trials(
    matrix: &SimilarityMatrix,
    targets: &[TextId],
    seed: u64,
) -> Result<Vec<Trial>, EvaluationError> {
    if matrix.len() < MIN_TEXTS {
        return Err(EvaluationError::CorpusTooSmall {
            texts: matrix.len(),
        });
    }
    let mut seeds = ChaCha8Rng::seed_from_u64(seed);
    targets
        .iter()
        .enumerate()
        .map(|(k, target)| {
            build_one(
                matrix,
                target.as_str(),
                format!("t{k:04}"),
                seeds.next_u64(),
            )
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RaterResponse {
    pub trial: String,
    pub rater: String,
    /// Most similar first.
    pub ranking: Vec<TextId>,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

/// Latest response per `(trial, rater)`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponseStore {
    responses: BTreeMap<String, BTreeMap<String, RaterResponse>>,
}

impl ResponseStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Validates and stores a ranking, replacing any earlier one by the same rater.
    pub fn record(
        &mut self,
        trial: &Trial,
        ranking: Vec<TextId>,
        rater: &str,
    ) -> Result<RaterResponse, EvaluationError> {
        let timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        self.record_at(trial, ranking, rater, timestamp)
    }

    pub fn record_at(
        &mut self,
        trial: &Trial,
        ranking: Vec<TextId>,
        rater: &str,
        timestamp: u64,
    ) -> Result<RaterResponse, EvaluationError> {
        if !trial.is_permutation(&ranking) {
            return Err(EvaluationError::InvalidRanking);
        }
        let response = RaterResponse {
            trial: trial.id.clone(),
            rater: rater.to_owned(),
            ranking,
            timestamp,
        };
        self.responses
            .entry(trial.id.clone())
            .or_default()
            .insert(rater.to_owned(), response.clone());
        Ok(response)
    }

    pub fn len(&self) -> usize {
        self.responses.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Responses ordered by trial id, then rater.
    pub fn responses(&self) -> Vec<RaterResponse> {
        self.responses
            .values()
            .flat_map(|by_rater| by_rater.values().cloned())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub trial: String,
    pub target: TextId,
    pub rater: String,
    pub last_ranked_provenance: Provenance,
    pub hit: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub trial_count: usize,
    pub hits: usize,
    /// `None` when there are no responses.
    pub least_similar_hit_rate: Option<f64>,
    pub outcomes: Vec<TrialOutcome>,
}

/// Fraction of responses that rank the randomly drawn candidate last.
pub fn score_responses(
    responses: &[RaterResponse],
    trials: &[Trial],
) -> Result<EvaluationReport, EvaluationError> {
    let by_id: BTreeMap<&str, &Trial> = trials.iter().map(|t| (t.id.as_str(), t)).collect();
    let mut outcomes = Vec::with_capacity(responses.len());
    for r in responses {
        let trial = by_id
            .get(r.trial.as_str())
            .ok_or_else(|| EvaluationError::OrphanResponse(r.trial.clone()))?;
        let last = r
            .ranking
            .last()
            .and_then(|t| trial.provenance_of(t))
            .ok_or(EvaluationError::InvalidRanking)?;
        outcomes.push(TrialOutcome {
            trial: r.trial.clone(),
            target: trial.target.clone(),
            rater: r.rater.clone(),
            last_ranked_provenance: last,
            hit: last == Provenance::Random,
        });
    }
    let hits = outcomes.iter().filter(|o| o.hit).count();
    let n = outcomes.len();
    Ok(EvaluationReport {
        trial_count: n,
        hits,
        least_similar_hit_rate: (n > 0).then(|| hits as f64 / n as f64),
        outcomes,
    })
}

/// `trial,target,last_ranked_provenance,hit` rows.
pub fn report_csv(report: &EvaluationReport) -> String {
    let mut out = String::from("trial,target,last_ranked_provenance,hit\n");
    for o in &report.outcomes {
        writeln!(
            out,
            "{},{},{},{}",
            csv_field(&o.trial),
            csv_field(o.target.as_str()),
            o.last_ranked_provenance.as_str(),
            u8::from(o.hit)
        )
        .unwrap();
    }
    out
}
