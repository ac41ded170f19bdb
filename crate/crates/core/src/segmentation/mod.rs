//! Tooth segmentation by crease-cost flood fill from peak points.

mod adaptive;
mod cleaning;
mod flood;
mod grouping;

use thiserror::Error;

pub use adaptive::{
    adaptive_threshold, flood_all, segment_at, threshold_ladder, RejectedGroup, Segmentation, SegmentationConfig, Stage,
};
pub use cleaning::{clean_regions, faces_centroid, steepest_rise, Cleaned, CleaningRules, RejectReason};
pub use flood::{flood_distances, flood_fill, Flood, Region};
pub use grouping::{arch_span, group_inline, group_overlapping, make_group, spans_overlap};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SegmentationError {
    #[error("no peaks to grow regions from")]
    NoPeaks,
    #[error("thresholds must be a non-empty list of positive values")]
    BadThresholds,
    #[error("cleaning removed every group")]
    AllRejected,
    #[error("could not fit an arch to the surviving peaks")]
    ArchFit,
}

/// Regions joined by shared faces.
#[derive(Debug, Clone, PartialEq)]
pub struct Group {
    pub regions: Vec<usize>,
    pub peaks: Vec<usize>,
    pub faces: Vec<u32>,
}

/// Candidate tooth: groups at one position along the arch.
#[derive(Debug, Clone, PartialEq)]
pub struct Blob {
    pub regions: Vec<usize>,
    /// Indices into the filtered peak list.
    pub peaks: Vec<usize>,
    pub faces: Vec<u32>,
    /// Arch parameter range `[s_min, s_max]`.
    pub span: [f64; 2],
}
