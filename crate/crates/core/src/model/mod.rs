//! Standoff annotation model.
//!
//! A [`Project`] owns its [`Text`]s, the [`Tagset`]s that define the tag
//! vocabulary, and the [`Annotation`]s that bind tags to code-point ranges of
//! a text. Annotations never touch the text body: offsets are Unicode code
//! point indices into `Text::body`, never byte offsets.
//!
//! The serialized form of a [`Project`] is the canonical interchange format
//! read by [`load_project`] and written by [`save_project`].

mod ids;
mod io;
mod validate;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

pub use ids::{AnnotationId, ProjectId, TagId, TagsetId, TextId};
pub use io::{
    load_project, parse_project, project_version, save_project, to_canonical_json, ModelError,
};
pub use validate::{validate_project, Violation, ViolationKind};

/// Half-open `[start, end)` interval of code points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "(usize, usize)", into = "(usize, usize)")]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub const fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }
}

impl From<(usize, usize)> for Span {
    fn from((start, end): (usize, usize)) -> Self {
        Self { start, end }
    }
}

impl From<Span> for (usize, usize) {
    fn from(s: Span) -> Self {
        (s.start, s.end)
    }
}

/// Sorts spans and merges overlapping or touching ones.
pub fn merge_spans(mut spans: Vec<Span>) -> Vec<Span> {
    spans.retain(|s| !s.is_empty());
    spans.sort_unstable();
    let mut out: Vec<Span> = Vec::with_capacity(spans.len());
    for s in spans {
        match out.last_mut() {
            Some(last) if s.start <= last.end => last.end = last.end.max(s.end),
            _ => out.push(s),
        }
    }
    out
}

#[derive(Serialize, Deserialize)]
struct TextRecord {
    id: TextId,
    title: String,
    body: String,
}

/// A document of the corpus. `length` is the number of code points in `body`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "TextRecord", into = "TextRecord")]
pub struct Text {
    pub id: TextId,
    pub title: String,
    body: String,
    length: usize,
}

impl Text {
    pub fn new(id: impl Into<TextId>, title: impl Into<String>, body: impl Into<String>) -> Self {
        let body = body.into();
        let length = body.chars().count();
        Self {
            id: id.into(),
            title: title.into(),
            body,
            length,
        }
    }

    pub fn body(&self) -> &str {
        &self.body
    }

    /// Code-point count of the body.
    pub fn len(&self) -> usize {
        self.length
    }

    pub fn is_empty(&self) -> bool {
        self.length == 0
    }

    /// Returns the substring covering `span` (code-point offsets), clamped to the body.
    pub fn slice(&self, span: Span) -> &str {
        let byte_at = |cp: usize| {
            self.body
                .char_indices()
                .nth(cp)
                .map_or(self.body.len(), |(b, _)| b)
        };
        let start = byte_at(span.start.min(self.length));
        let end = byte_at(span.end.min(self.length));
        &self.body[start..end.max(start)]
    }
}

impl From<TextRecord> for Text {
    fn from(r: TextRecord) -> Self {
        Text::new(r.id, r.title, r.body)
    }
}

impl From<Text> for TextRecord {
    fn from(t: Text) -> Self {
        TextRecord {
            id: t.id,
            title: t.title,
            body: t.body,
        }
    }
}

/// A tag of a tagset. Tags form a forest through `parent`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tag {
    pub id: TagId,
    pub name: String,
    /// `#rrggbb`
    pub color: String,
    pub parent: Option<TagId>,
}

impl Tag {
    pub fn new(id: impl Into<TagId>, name: impl Into<String>, color: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            name: name.into(),
            color: color.into(),
            parent: None,
        }
    }

    pub fn with_parent(mut self, parent: impl Into<TagId>) -> Self {
        self.parent = Some(parent.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tagset {
    pub id: TagsetId,
    pub name: String,
    pub tags: Vec<Tag>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    pub id: AnnotationId,
    pub text: TextId,
    pub tag: TagId,
    pub ranges: Vec<Span>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Project {
    pub id: ProjectId,
    pub name: String,
    pub texts: Vec<Text>,
    pub tagsets: Vec<Tagset>,
    pub annotations: Vec<Annotation>,
}

impl Project {
    pub fn new(id: impl Into<ProjectId>, name: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            name: name.into(),
            texts: Vec::new(),
            tagsets: Vec::new(),
            annotations: Vec::new(),
        }
    }

    pub fn text(&self, id: &str) -> Option<&Text> {
        self.texts.iter().find(|t| t.id.as_str() == id)
    }

    pub fn tags(&self) -> impl Iterator<Item = &Tag> {
        self.tagsets.iter().flat_map(|ts| ts.tags.iter())
    }

    pub fn tag(&self, id: &str) -> Option<&Tag> {
        self.tags().find(|t| t.id.as_str() == id)
    }

    /// Finds a tag by id, falling back to a unique match on name.
    pub fn resolve_tag(&self, key: &str) -> Option<&Tag> {
        self.tag(key).or_else(|| {
            let mut named = self.tags().filter(|t| t.name == key);
            match (named.next(), named.next()) {
                (Some(t), None) => Some(t),
                _ => None,
            }
        })
    }

    pub fn annotations_for<'a>(&'a self, text: &'a str) -> impl Iterator<Item = &'a Annotation> {
        self.annotations
            .iter()
            .filter(move |a| a.text.as_str() == text)
    }

    /// Lookup tables over the tag hierarchy.
    pub fn tag_tree(&self) -> TagTree<'_> {
        TagTree::new(self)
    }
}

/// Parent/child view of a project's tags, in project order.
#[derive(Debug)]
pub struct TagTree<'a> {
    tags: Vec<&'a Tag>,
    by_id: HashMap<&'a str, usize>,
    children: Vec<Vec<usize>>,
    roots: Vec<usize>,
}

impl<'a> TagTree<'a> {
    fn new(project: &'a Project) -> Self {
        let tags: Vec<&Tag> = project.tags().collect();
        let by_id: HashMap<&str, usize> = tags
            .iter()
            .enumerate()
            .map(|(i, t)| (t.id.as_str(), i))
            .collect();
        let mut children = vec![Vec::new(); tags.len()];
        let mut roots = Vec::new();
        for (i, t) in tags.iter().enumerate() {
            match t.parent.as_ref().and_then(|p| by_id.get(p.as_str())) {
                Some(&p) if p != i => children[p].push(i),
                _ => roots.push(i),
            }
        }
        Self {
            tags,
            by_id,
            children,
            roots,
        }
    }

    pub fn get(&self, id: &str) -> Option<&'a Tag> {
        self.by_id.get(id).map(|&i| self.tags[i])
    }

    pub fn roots(&self) -> impl Iterator<Item = &'a Tag> + '_ {
        self.roots.iter().map(|&i| self.tags[i])
    }

    pub fn children(&self, id: &str) -> impl Iterator<Item = &'a Tag> + '_ {
        self.by_id
            .get(id)
            .into_iter()
            .flat_map(|&i| self.children[i].iter().map(|&c| self.tags[c]))
    }

    /// `id` and every tag below it. Cycles are cut at the first revisit.
    pub fn subtree(&self, id: &str) -> Vec<&'a TagId> {
        let Some(&start) = self.by_id.get(id) else {
            return Vec::new();
        };
        let mut seen = vec![false; self.tags.len()];
        let mut stack = vec![start];
        let mut out = Vec::new();
        while let Some(i) = stack.pop() {
            if std::mem::replace(&mut seen[i], true) {
                continue;
            }
            out.push(&self.tags[i].id);
            stack.extend(self.children[i].iter().rev());
        }
        out
    }
}
