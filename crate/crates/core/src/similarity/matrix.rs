use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::{Project, ProjectId, TagId, TextId};

use super::fastdtw::fastdtw;
use super::tam::tam;
use super::vector::{vectorize, weight, BinaryTagVector};
use super::SimilarityError;

pub const DEFAULT_RADIUS: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairOptions {
    pub radius: usize,
    /// Skip the alignment when the weight is zero.
    pub skip_zero_weight: bool,
}

impl Default for PairOptions {
    fn default() -> Self {
        Self {
            radius: DEFAULT_RADIUS,
            skip_zero_weight: true,
        }
    }
}

/// One heatmap cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityCell {
    pub text_a: TextId,
    pub text_b: TextId,
    pub tag: TagId,
    pub base_similarity: f64,
    pub weight: f64,
    pub score: f64,
}

/// Similarity of two vectors of the same tag.
///
/// When the weight is zero and `skip_zero_weight` is set, no alignment runs and
/// `base_similarity` is reported as 0; the score is 0 either way.
pub fn pair_similarity(
    v1: &BinaryTagVector,
    v2: &BinaryTagVector,
    opts: PairOptions,
) -> Result<SimilarityCell, SimilarityError> {
    let w = weight(v1, v2);
    let base = if w == 0.0 && opts.skip_zero_weight {
        0.0
    } else {
        let (x, y) = (v1.to_series(), v2.to_series());
        let alignment = fastdtw(&x, &y, opts.radius)?;
        tam(&alignment.path, x.len(), y.len())?.similarity
    };
    Ok(SimilarityCell {
        text_a: v1.text.clone(),
        text_b: v2.text.clone(),
        tag: v1.tag.clone(),
        base_similarity: base,
        weight: w,
        score: base * w,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MatrixOptions {
    pub pair: PairOptions,
    /// Count annotations of descendant tags too.
    pub rollup: bool,
    /// Worker threads; `None` uses the global pool, `Some(1)` runs sequentially.
    pub workers: Option<usize>,
}

/// Symmetric `n × n` matrix over a project's texts, in project order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityMatrix {
    pub project: ProjectId,
    pub tag: TagId,
    pub radius: usize,
    pub texts: Vec<TextId>,
    /// Row-major; `cells[i * n + j]` pairs `texts[i]` with `texts[j]`.
    pub cells: Vec<SimilarityCell>,
}

impl SimilarityMatrix {
    pub fn len(&self) -> usize {
        self.texts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.texts.is_empty()
    }

    pub fn index_of(&self, text: &str) -> Option<usize> {
        self.texts.iter().position(|t| t.as_str() == text)
    }

    pub fn cell(&self, i: usize, j: usize) -> &SimilarityCell {
        &self.cells[i * self.len() + j]
    }

    pub fn score(&self, a: &str, b: &str) -> Option<f64> {
        Some(self.cell(self.index_of(a)?, self.index_of(b)?).score)
    }
}

fn diagonal_cell(text: &TextId, tag: &TagId) -> SimilarityCell {
    SimilarityCell {
        text_a: text.clone(),
        text_b: text.clone(),
        tag: tag.clone(),
        base_similarity: 1.0,
        weight: 1.0,
        score: 1.0,
    }
}

/// Pairwise similarity of every text in `project` for one tag.
///
/// Pairs are scored independently and only placed into the matrix, so the
/// result does not depend on the number of workers.
pub fn similarity_matrix(
    project: &Project,
    tag: &str,
    opts: MatrixOptions,
) -> Result<SimilarityMatrix, SimilarityError> {
    let tag_id = project
        .tag(tag)
        .ok_or_else(|| SimilarityError::UnknownTag(tag.to_owned()))?
        .id
        .clone();
    let vectors = project
        .texts
        .iter()
        .map(|t| vectorize(project, t.id.as_str(), tag, opts.rollup))
        .collect::<Result<Vec<_>, _>>()?;
    let n = vectors.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();

    let score_pair =
        |&(i, j): &(usize, usize)| pair_similarity(&vectors[i], &vectors[j], opts.pair);
    let scored: Vec<SimilarityCell> = match opts.workers {
        Some(1) => pairs.iter().map(score_pair).collect::<Result<_, _>>()?,
        Some(workers) => rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| SimilarityError::WorkerPool(e.to_string()))?
            .install(|| pairs.par_iter().map(score_pair).collect::<Result<_, _>>())?,
        None => pairs.par_iter().map(score_pair).collect::<Result<_, _>>()?,
    };

    let texts: Vec<TextId> = project.texts.iter().map(|t| t.id.clone()).collect();
    let mut cells: Vec<Option<SimilarityCell>> = vec![None; n * n];
    for (i, t) in texts.iter().enumerate() {
        cells[i * n + i] = Some(diagonal_cell(t, &tag_id));
    }
    for (&(i, j), cell) in pairs.iter().zip(scored) {
        let mirrored = SimilarityCell {
            text_a: cell.text_b.clone(),
            text_b: cell.text_a.clone(),
            ..cell.clone()
        };
        cells[i * n + j] = Some(cell);
        cells[j * n + i] = Some(mirrored);
    }

    Ok(SimilarityMatrix {
        project: project.id.clone(),
        tag: tag_id,
        radius: opts.pair.radius,
        texts,
        cells: cells
            .into_iter()
            .map(|c| c.expect("every cell placed"))
            .collect(),
    })
}

/// Every other text ordered by score, highest first; ties by ascending id.
pub fn rank_similar(
    matrix: &SimilarityMatrix,
    target: &str,
) -> Result<Vec<(TextId, f64)>, SimilarityError> {
    let row = matrix
        .index_of(target)
        .ok_or_else(|| SimilarityError::UnknownText(target.to_owned()))?;
    let mut ranked: Vec<(TextId, f64)> = (0..matrix.len())
        .filter(|&j| j != row)
        .map(|j| (matrix.texts[j].clone(), matrix.cell(row, j).score))
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Ok(ranked)
}

/// Unweighted cell-wise mean of per-tag matrices over the same texts.
///
/// The result's `tag` joins the input tag ids with `+`.
pub fn mean_matrix(matrices: &[SimilarityMatrix]) -> Result<SimilarityMatrix, SimilarityError> {
    let first = matrices
        .first()
        .ok_or(SimilarityError::MismatchedMatrices)?;
    if matrices.iter().any(|m| m.texts != first.texts) {
        return Err(SimilarityError::MismatchedMatrices);
    }
    let k = matrices.len() as f64;
    let tag = TagId::new(
        matrices
            .iter()
            .map(|m| m.tag.as_str())
            .collect::<Vec<_>>()
            .join("+"),
    );
    let cells = (0..first.cells.len())
        .map(|idx| {
            let mean = |f: fn(&SimilarityCell) -> f64| {
                matrices.iter().map(|m| f(&m.cells[idx])).sum::<f64>() / k
            };
            SimilarityCell {
                text_a: first.cells[idx].text_a.clone(),
                text_b: first.cells[idx].text_b.clone(),
                tag: tag.clone(),
                base_similarity: mean(|c| c.base_similarity),
                weight: mean(|c| c.weight),
                score: mean(|c| c.score),
            }
        })
        .collect();
    Ok(SimilarityMatrix {
        project: first.project.clone(),
        tag,
        radius: first.radius,
        texts: first.texts.clone(),
        cells,
    })
}
