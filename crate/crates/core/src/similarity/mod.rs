//! Tag-vector similarity.
//!
//! Each text is reduced, per tag, to a [`BinaryTagVector`]. Pairs of vectors
//! are aligned with [`fastdtw`], the warping path is scored with [`tam`], the
//! score is mapped to `[0, 1]` and multiplied by the sparseness [`weight`].
//! [`similarity_matrix`] repeats this over every pair of texts in a project.

mod dtw;
mod export;
mod fastdtw;
mod matrix;
mod tam;
mod vector;

use thiserror::Error;

pub use dtw::{dtw_exact, is_valid_path, path_cost, AlignmentResult};
pub(crate) use export::csv_field;
pub use export::{heatmap_svg, matrix_csv};
pub use fastdtw::{coarsen, constrained_dtw, fastdtw, Window};
pub use matrix::{
    mean_matrix, pair_similarity, rank_similar, similarity_matrix, MatrixOptions, PairOptions,
    SimilarityCell, SimilarityMatrix, DEFAULT_RADIUS,
};
pub use tam::{step_counts, tam, TamScore};
pub use vector::{vectorize, weight, BinaryTagVector};

#[derive(Debug, Error)]
pub enum SimilarityError {
    #[error("alignment input is empty")]
    EmptyInput,
    #[error("not a warping path from (1,1) to ({n},{m})")]
    InvalidPath { n: usize, m: usize },
    #[error("unknown text: {0}")]
    UnknownText(String),
    #[error("unknown tag: {0}")]
    UnknownTag(String),
    #[error("matrices cover different texts")]
    MismatchedMatrices,
    #[error("cannot build worker pool: {0}")]
    WorkerPool(String),
}
