use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::Serialize;

use super::Project;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    DuplicateId,
    DuplicateTagName,
    InvalidColor,
    UnknownParent,
    ParentOutsideTagset,
    TagCycle,
    UnknownText,
    UnknownTag,
    EmptyRange,
    RangeExceedsText,
    UnsortedRanges,
    OverlappingRanges,
}

impl ViolationKind {
    pub fn describe(self) -> &'static str {
        match self {
            Self::DuplicateId => "duplicate id",
            Self::DuplicateTagName => "duplicate tag name within one parent level",
            Self::InvalidColor => "color is not an RGB hex string",
            Self::UnknownParent => "parent tag does not exist",
            Self::ParentOutsideTagset => "parent tag belongs to another tagset",
            Self::TagCycle => "cycle in tag hierarchy",
            Self::UnknownText => "annotation references unknown text",
            Self::UnknownTag => "annotation references unknown tag",
            Self::EmptyRange => "range is empty or reversed",
            Self::RangeExceedsText => "range exceeds text length",
            Self::UnsortedRanges => "ranges not sorted ascending",
            Self::OverlappingRanges => "ranges overlap",
        }
    }
}

/// One broken invariant, attributed to the entity that breaks it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub entity: String,
    pub kind: ViolationKind,
}

impl Violation {
    fn new(entity: impl Into<String>, kind: ViolationKind) -> Self {
        Self {
            entity: entity.into(),
            kind,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.entity, self.kind.describe())
    }
}

fn is_hex_color(s: &str) -> bool {
    let Some(hex) = s.strip_prefix('#') else {
        return false;
    };
    matches!(hex.len(), 3 | 6) && hex.bytes().all(|b| b.is_ascii_hexdigit())
}

/// Checks every model invariant. An empty result means the project is valid.
pub fn validate_project(project: &Project) -> Vec<Violation> {
    use ViolationKind::*;
    let mut out = Vec::new();

    let mut text_len = HashMap::new();
    for t in &project.texts {
        if text_len.insert(t.id.as_str(), t.len()).is_some() {
            out.push(Violation::new(t.id.as_str(), DuplicateId));
        }
    }

    let mut seen_tagsets = HashSet::new();
    // tag id -> (tagset index, parent)
    let mut tag_home = HashMap::new();
    for (ts_idx, ts) in project.tagsets.iter().enumerate() {
        if !seen_tagsets.insert(ts.id.as_str()) {
            out.push(Violation::new(ts.id.as_str(), DuplicateId));
        }
        let mut names = HashSet::new();
        for tag in &ts.tags {
            if tag_home
                .insert(tag.id.as_str(), (ts_idx, tag.parent.as_ref()))
                .is_some()
            {
                out.push(Violation::new(tag.id.as_str(), DuplicateId));
            }
            if !names.insert((tag.parent.as_ref().map(|p| p.as_str()), tag.name.as_str())) {
                out.push(Violation::new(tag.id.as_str(), DuplicateTagName));
            }
            if !is_hex_color(&tag.color) {
                out.push(Violation::new(tag.id.as_str(), InvalidColor));
            }
        }
    }

    for (ts_idx, ts) in project.tagsets.iter().enumerate() {
        for tag in &ts.tags {
            let Some(parent) = &tag.parent else { continue };
            match tag_home.get(parent.as_str()) {
                None => out.push(Violation::new(tag.id.as_str(), UnknownParent)),
                Some(&(home, _)) if home != ts_idx => {
                    out.push(Violation::new(tag.id.as_str(), ParentOutsideTagset))
                }
                Some(_) => {}
            }
        }
    }

    // Each cycle is reported once, attributed to its smallest member id.
    let mut reported: HashSet<BTreeSet<&str>> = HashSet::new();
    for ts in &project.tagsets {
        for tag in &ts.tags {
            let mut path: Vec<&str> = vec![tag.id.as_str()];
            let mut cur = tag.parent.as_ref().map(|p| p.as_str());
            while let Some(id) = cur {
                if let Some(pos) = path.iter().position(|&p| p == id) {
                    let cycle: BTreeSet<&str> = path[pos..].iter().copied().collect();
                    let first = *cycle.iter().next().expect("non-empty cycle");
                    if reported.insert(cycle) {
                        out.push(Violation::new(first, TagCycle));
                    }
                    break;
                }
                path.push(id);
                cur = tag_home.get(id).and_then(|(_, p)| p.map(|p| p.as_str()));
            }
        }
    }

    let mut seen_annotations = HashSet::new();
    for a in &project.annotations {
        let id = a.id.as_str();
        if !seen_annotations.insert(id) {
            out.push(Violation::new(id, DuplicateId));
        }
        let len = text_len.get(a.text.as_str()).copied();
        if len.is_none() {
            out.push(Violation::new(id, UnknownText));
        }
        if !tag_home.contains_key(a.tag.as_str()) {
            out.push(Violation::new(id, UnknownTag));
        }
        for r in &a.ranges {
            if r.start >= r.end {
                out.push(Violation::new(id, EmptyRange));
            } else if len.is_some_and(|len| r.end > len) {
                out.push(Violation::new(id, RangeExceedsText));
            }
        }
        for w in a.ranges.windows(2) {
            if w[1].start < w[0].start {
                out.push(Violation::new(id, UnsortedRanges));
            } else if w[1].start < w[0].end {
                out.push(Violation::new(id, OverlappingRanges));
            }
        }
    }

    out
}
