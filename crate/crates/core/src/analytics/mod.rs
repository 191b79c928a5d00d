//! Chart-ready summaries of a project's annotations.
//!
//! Every function here is a pure function of the project and its arguments
//! and returns plain data; rendering is left to the caller.

mod charts;
mod sunburst;

use thiserror::Error;

pub use charts::{
    default_bin_width, gallery, gantt, stacked_area, stacked_csv, GalleryEntry, GanttLane,
    StackedSeries, TagFilter,
};
pub use sunburst::{
    compare_distributions, sunburst, CountMode, DistributionComparison, DistributionRow, Scope,
    SunburstNode,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AnalyticsError {
    #[error("unknown text: {0}")]
    UnknownText(String),
    #[error("bin width must be at least 1")]
    ZeroBinWidth,
}
