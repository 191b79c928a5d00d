//! Annotated-corpus analytics.
//!
//! - [`model`]: standoff annotation model and its canonical JSON format
//! - [`import`]: adapters that pull projects from a remote annotation store
//! - [`analytics`]: Gantt, stacked-area, sunburst, and gallery chart data
//! - [`similarity`]: per-tag binary vectors, DTW/FastDTW alignment, TAM scores,
//!   sparseness weighting, and pairwise similarity matrices
//! - [`evaluation`]: ranking trials built from a similarity matrix and their scoring
//! - [`fixtures`]: small synthetic corpora used by tests, benches, and demos

pub mod analytics;
pub mod evaluation;
pub mod fixtures;
pub mod import;
pub mod model;
pub mod scaling;
pub mod similarity;

pub use model::{Annotation, Project, Span, Tag, TagId, Tagset, Text, TextId};
pub use similarity::{SimilarityCell, SimilarityMatrix};
