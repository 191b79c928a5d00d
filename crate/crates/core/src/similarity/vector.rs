use serde::{Deserialize, Serialize};

use crate::model::{Project, TagId, TextId};

use super::SimilarityError;

const WORD_BITS: usize = 64;

/// Per-code-point occupancy of one tag in one text, bit-packed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinaryTagVector {
    pub text: TextId,
    pub tag: TagId,
    words: Vec<u64>,
    len: usize,
    hamming_weight: usize,
}

impl BinaryTagVector {
    pub fn zeros(text: TextId, tag: TagId, len: usize) -> Self {
        Self {
            text,
            tag,
            words: vec![0; len.div_ceil(WORD_BITS)],
            len,
            hamming_weight: 0,
        }
    }

    pub fn from_bits(text: TextId, tag: TagId, bits: impl IntoIterator<Item = bool>) -> Self {
        let bits: Vec<bool> = bits.into_iter().collect();
        let mut v = Self::zeros(text, tag, bits.len());
        for (i, _) in bits.iter().enumerate().filter(|(_, b)| **b) {
            v.words[i / WORD_BITS] |= 1 << (i % WORD_BITS);
        }
        v.recount();
        v
    }

    /// Sets bits `[start, end)`, clamped to the vector length.
    fn fill(&mut self, start: usize, end: usize) {
        let end = end.min(self.len);
        let mut i = start;
        while i < end {
            let word = i / WORD_BITS;
            let bit = i % WORD_BITS;
            let take = (WORD_BITS - bit).min(end - i);
            let mask = if take == WORD_BITS {
                u64::MAX
            } else {
                ((1u64 << take) - 1) << bit
            };
            self.words[word] |= mask;
            i += take;
        }
    }

    fn recount(&mut self) {
        self.hamming_weight = self.words.iter().map(|w| w.count_ones() as usize).sum();
    }

    /// `|v|`: number of code points in the text.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// `H(v)`: number of set bits.
    pub fn hamming_weight(&self) -> usize {
        self.hamming_weight
    }

    pub fn get(&self, i: usize) -> bool {
        i < self.len && self.words[i / WORD_BITS] >> (i % WORD_BITS) & 1 == 1
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(|i| self.get(i))
    }

    /// The vector as a 0.0/1.0 series for alignment.
    pub fn to_series(&self) -> Vec<f64> {
        self.iter().map(|b| if b { 1.0 } else { 0.0 }).collect()
    }
}

/// Builds the occupancy vector of `tag` over `text`.
///
/// With `rollup`, annotations carrying any descendant of `tag` also set bits.
pub fn vectorize(
    project: &Project,
    text: &str,
    tag: &str,
    rollup: bool,
) -> Result<BinaryTagVector, SimilarityError> {
    let t = project
        .text(text)
        .ok_or_else(|| SimilarityError::UnknownText(text.to_owned()))?;
    let tree = project.tag_tree();
    let root = tree
        .get(tag)
        .ok_or_else(|| SimilarityError::UnknownTag(tag.to_owned()))?;
    let wanted: Vec<&TagId> = if rollup {
        tree.subtree(tag)
    } else {
        vec![&root.id]
    };

    let mut v = BinaryTagVector::zeros(t.id.clone(), root.id.clone(), t.len());
    for a in project
        .annotations_for(text)
        .filter(|a| wanted.contains(&&a.tag))
    {
        for r in &a.ranges {
            v.fill(r.start, r.end);
        }
    }
    v.recount();
    Ok(v)
}

fn sparseness_factor(hamming_weight: usize, len: usize) -> f64 {
    (10.0 * hamming_weight as f64 / len as f64).min(1.0)
}

/// Sparseness penalty `min(10·H(v1)/|v1|, 1) · min(10·H(v2)/|v2|, 1)`.
///
/// An empty tag vector (H = 0) drives the weight to zero, so two empty
/// vectors count as dissimilar.
pub fn weight(v1: &BinaryTagVector, v2: &BinaryTagVector) -> f64 {
    if v1.is_empty() || v2.is_empty() {
        return 0.0;
    }
    sparseness_factor(v1.hamming_weight, v1.len) * sparseness_factor(v2.hamming_weight, v2.len)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Annotation, Span, Tag, Tagset, Text};

    fn bits(s: &str) -> BinaryTagVector {
        BinaryTagVector::from_bits("t".into(), "g".into(), s.chars().map(|c| c == '1'))
    }

    fn project() -> Project {
        let mut p = Project::new("p", "p");
        p.texts.push(Text::new("t", "t", "0123456789"));
        p.tagsets.push(Tagset {
            id: "ts".into(),
            name: "ts".into(),
            tags: vec![
                Tag::new("parent", "parent", "#ff0000"),
                Tag::new("child", "child", "#00ff00").with_parent("parent"),
            ],
        });
        p
    }

    fn render(v: &BinaryTagVector) -> String {
        v.iter().map(|b| if b { '1' } else { '0' }).collect()
    }

    #[test]
    fn single_range_sets_bits() {
        let mut p = project();
        p.annotations.push(Annotation {
            id: "a".into(),
            text: "t".into(),
            tag: "parent".into(),
            ranges: vec![Span::new(2, 5)],
        });
        let v = vectorize(&p, "t", "parent", false).unwrap();
        assert_eq!(render(&v), "0011100000");
        assert_eq!(v.hamming_weight(), 3);
    }

    #[test]
    fn no_annotations_is_all_zero() {
        let v = vectorize(&project(), "t", "parent", true).unwrap();
        assert_eq!(render(&v), "0000000000");
        assert_eq!(v.hamming_weight(), 0);
    }

    #[test]
    fn rollup_includes_child_tags() {
        let mut p = project();
        p.annotations.push(Annotation {
            id: "a".into(),
            text: "t".into(),
            tag: "child".into(),
            ranges: vec![Span::new(0, 2)],
        });
        assert_eq!(
            render(&vectorize(&p, "t", "parent", true).unwrap()),
            "1100000000"
        );
        assert_eq!(
            render(&vectorize(&p, "t", "parent", false).unwrap()),
            "0000000000"
        );
    }

    #[test]
    fn unknown_ids() {
        let p = project();
        assert!(matches!(
            vectorize(&p, "x", "parent", false),
            Err(SimilarityError::UnknownText(_))
        ));
        assert!(matches!(
            vectorize(&p, "t", "x", false),
            Err(SimilarityError::UnknownTag(_))
        ));
    }

    #[test]
    fn fill_crosses_word_boundaries() {
        let mut v = BinaryTagVector::zeros("t".into(), "g".into(), 200);
        v.fill(60, 190);
        v.recount();
        assert_eq!(v.hamming_weight(), 130);
        assert!(!v.get(59) && v.get(60) && v.get(127) && v.get(128) && v.get(189) && !v.get(190));
    }

    #[test]
    fn weight_examples() {
        let empty = bits("0000000000");
        let dense = bits("1111100000");
        assert_eq!(weight(&empty, &dense), 0.0);

        let v = |len: usize, h: usize| {
            BinaryTagVector::from_bits("t".into(), "g".into(), (0..len).map(|i| i < h))
        };
        assert_eq!(weight(&v(100, 10), &v(100, 10)), 1.0);
        assert_eq!(weight(&v(200, 5), &v(100, 5)), 0.125);
    }
}
