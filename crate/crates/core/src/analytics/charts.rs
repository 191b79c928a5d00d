use std::collections::BTreeMap;
use std::fmt::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::{merge_spans, Project, Span, Tag, TagId, Text, TextId};
use crate::similarity::csv_field;

use super::AnalyticsError;

/// Restricts charts to a set of tag ids. An empty filter admits every tag.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TagFilter(Vec<TagId>);

impl TagFilter {
    pub fn all() -> Self {
        Self::default()
    }

    pub fn only(tags: impl IntoIterator<Item = impl Into<TagId>>) -> Self {
        Self(tags.into_iter().map(Into::into).collect())
    }

    pub fn admits(&self, tag: &TagId) -> bool {
        self.0.is_empty() || self.0.contains(tag)
    }
}

/// One tag's merged annotation intervals within a text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GanttLane {
    pub tag: TagId,
    pub name: String,
    pub color: String,
    pub intervals: Vec<Span>,
}

impl GanttLane {
    pub fn covered(&self) -> usize {
        self.intervals.iter().map(Span::len).sum()
    }
}

/// Per-bin count of code points covered by one tag.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StackedSeries {
    pub tag: TagId,
    pub name: String,
    pub color: String,
    pub bin_width: usize,
    pub counts: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GalleryEntry {
    pub text: TextId,
    pub title: String,
    pub length: usize,
    pub lanes: Vec<GanttLane>,
}

/// About 100 bins per text.
pub fn default_bin_width(text_len: usize) -> usize {
    (text_len / 100).max(1)
}

fn lanes_for(project: &Project, text: &Text, filter: &TagFilter) -> Vec<GanttLane> {
    let mut spans: BTreeMap<&TagId, Vec<Span>> = BTreeMap::new();
    for a in project.annotations_for(text.id.as_str()) {
        if filter.admits(&a.tag) {
            spans
                .entry(&a.tag)
                .or_default()
                .extend(a.ranges.iter().copied());
        }
    }
    project
        .tags()
        .filter_map(|tag: &Tag| {
            let s = spans.remove(&tag.id)?;
            Some(GanttLane {
                tag: tag.id.clone(),
                name: tag.name.clone(),
                color: tag.color.clone(),
                intervals: merge_spans(s),
            })
        })
        .collect()
}

fn find_text<'a>(project: &'a Project, text: &str) -> Result<&'a Text, AnalyticsError> {
    project
        .text(text)
        .ok_or_else(|| AnalyticsError::UnknownText(text.to_owned()))
}

/// One lane per tag annotated in `text`, in tagset order.
pub fn gantt(
    project: &Project,
    text: &str,
    filter: &TagFilter,
) -> Result<Vec<GanttLane>, AnalyticsError> {
    Ok(lanes_for(project, find_text(project, text)?, filter))
}

/// Binned coverage per tag. `bin_width` defaults to [`default_bin_width`].
pub fn stacked_area(
    project: &Project,
    text: &str,
    bin_width: Option<usize>,
) -> Result<Vec<StackedSeries>, AnalyticsError> {
    let t = find_text(project, text)?;
    let width = bin_width.unwrap_or_else(|| default_bin_width(t.len()));
    if width == 0 {
        return Err(AnalyticsError::ZeroBinWidth);
    }
    let bins = t.len().div_ceil(width);
    Ok(lanes_for(project, t, &TagFilter::all())
        .into_iter()
        .map(|lane| {
            let mut counts = vec![0; bins];
            for s in &lane.intervals {
                let mut pos = s.start;
                while pos < s.end {
                    let bin = pos / width;
                    let bin_end = ((bin + 1) * width).min(s.end);
                    counts[bin] += bin_end - pos;
                    pos = bin_end;
                }
            }
            StackedSeries {
                tag: lane.tag,
                name: lane.name,
                color: lane.color,
                bin_width: width,
                counts,
            }
        })
        .collect())
}

/// `bin_start,tag,count` rows, series by series.
pub fn stacked_csv(series: &[StackedSeries]) -> String {
    let mut out = String::from("bin_start,tag,count\n");
    for s in series {
        let tag = csv_field(s.tag.as_str());
        for (b, count) in s.counts.iter().enumerate() {
            writeln!(out, "{},{tag},{count}", b * s.bin_width).unwrap();
        }
    }
    out
}

/// Gantt lanes of every text, in project order.
pub fn gallery(project: &Project, filter: &TagFilter) -> Vec<GalleryEntry> {
    project
        .texts
        .par_iter()
        .map(|t| GalleryEntry {
            text: t.id.clone(),
            title: t.title.clone(),
            length: t.len(),
            lanes: lanes_for(project, t, filter),
        })
        .collect()
}
