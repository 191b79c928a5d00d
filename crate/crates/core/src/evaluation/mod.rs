//! Ranking trials that compare the similarity scores against a human rater.
//!
//! A trial shows a target text and five candidates: the three best-scoring
//! texts, one from ranks 4–10, and one drawn from below rank 10, in shuffled
//! order. The rater orders the candidates by perceived similarity; a trial is
//! a hit when the randomly drawn candidate ends up last.

mod raters;
mod trials;

use thiserror::Error;

pub use raters::{
    random_candidate_strictly_lowest, simulate, NoisyScoreRater, Rater, ScoreFaithfulRater,
    UniformRandomRater,
};
pub use trials::{
    build_trials, report_csv, score_responses, EvaluationReport, Provenance, RaterResponse,
    ResponseStore, Trial, TrialOutcome, CANDIDATES, MIN_TEXTS,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvaluationError {
    #[error("corpus has {texts} texts; trials need at least {MIN_TEXTS}")]
    CorpusTooSmall { texts: usize },
    #[error("unknown target text: {0}")]
    UnknownTarget(String),
    #[error("ranking is not a permutation of the trial's {CANDIDATES} candidates")]
    InvalidRanking,
    #[error("response references unknown trial: {0}")]
    OrphanResponse(String),
}
