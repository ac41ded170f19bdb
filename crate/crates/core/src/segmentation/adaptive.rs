use log::debug;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cleaning::{clean_regions, CleaningRules, RejectReason};
use super::flood::{flood_distances, Flood};
use super::grouping::{arch_span, group_inline, group_overlapping, make_group};
use super::{Blob, SegmentationError};
use crate::arch::ArchCurve;
use crate::curvature::EdgeCurvatureMap;
use crate::mesh::IndexedMesh;
use crate::orientation::Frame;
use crate::peaks::Peak;

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentationConfig {
    pub spill_radius: f64,
    /// Candidate crease-cost thresholds, mm⁻¹.
    pub thresholds: Vec<f64>,
    /// Spans merge when they overlap by this share of the shorter one.
    pub overlap_fraction: f64,
    pub rules: CleaningRules,
}

impl Default for SegmentationConfig {
    fn default() -> Self {
        SegmentationConfig {
            spill_radius: 12.0,
            thresholds: threshold_ladder(0.05, 3.0, 12),
            overlap_fraction: 0.4,
            rules: CleaningRules::default(),
        }
    }
}

/// `count` geometrically spaced values from `lo` to `hi` inclusive.
pub fn threshold_ladder(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let ratio = (hi / lo).ln() / (count - 1) as f64;
    (0..count)
        .map(|k| if k + 1 == count { hi } else { lo * (ratio * k as f64).exp() })
        .collect()
}

/// A group dropped by cleaning, kept for diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectedGroup {
    pub peaks: Vec<usize>,
    pub face_count: usize,
    pub reason: RejectReason,
}

/// Outcome at one threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct Stage {
    pub threshold: f64,
    pub blobs: Vec<Blob>,
    pub rejected: Vec<RejectedGroup>,
    pub arch: ArchCurve,
    pub area: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segmentation {
    pub chosen: Stage,
    /// `(threshold, tooth area)` for every candidate tried.
    pub scores: Vec<(f64, f64)>,
}

/// One flood per peak at the largest threshold; smaller thresholds are cut
/// from it.
pub fn flood_all(
    mesh: &IndexedMesh,
    costs: &EdgeCurvatureMap,
    frame: &Frame,
    peaks: &[Peak],
    cap: f64,
    spill_radius: f64,
) -> Vec<Flood> {
    peaks
        .par_iter()
        .enumerate()
        .map(|(i, p)| flood_distances(mesh, costs, frame, i, p, cap, spill_radius))
        .collect()
}

/// Flood, group, clean and inline-group at a single threshold.
pub fn segment_at(
    mesh: &IndexedMesh,
    frame: &Frame,
    peaks: &[Peak],
    floods: &[Flood],
    threshold: f64,
    config: &SegmentationConfig,
) -> Result<Stage, SegmentationError> {
    let regions: Vec<_> = floods.iter().map(|f| f.region(mesh, threshold)).collect();
    let groups = group_overlapping(&regions)
        .iter()
        .map(|m| make_group(&regions, m))
        .collect();
    let cleaned = clean_regions(groups, &regions, peaks, frame, mesh, &config.rules);
    let rejected = cleaned
        .rejected
        .iter()
        .map(|(g, reason)| RejectedGroup {
            peaks: g.peaks.clone(),
            face_count: g.faces.len(),
            reason: *reason,
        })
        .collect();
    if cleaned.kept.is_empty() {
        return Err(SegmentationError::AllRejected);
    }
    let arch = cleaned.arch.ok_or(SegmentationError::ArchFit)?;
    let spans: Vec<[f64; 2]> = cleaned.kept.iter().map(|g| arch_span(mesh, &arch, &g.faces)).collect();
    let blobs = group_inline(&cleaned.kept, &spans, config.overlap_fraction);
    let mut faces: Vec<u32> = blobs.iter().flat_map(|b| b.faces.iter().copied()).collect();
    faces.sort_unstable();
    let area = faces.iter().map(|&f| mesh.face_areas[f as usize]).sum();
    Ok(Stage {
        threshold,
        blobs,
        rejected,
        arch,
        area,
    })
}

/// Tries every candidate threshold and keeps the one with the most tooth
/// area; ties go to the smallest threshold.
pub fn adaptive_threshold(
    mesh: &IndexedMesh,
    costs: &EdgeCurvatureMap,
    frame: &Frame,
    peaks: &[Peak],
    config: &SegmentationConfig,
) -> Result<Segmentation, SegmentationError> {
    if config.thresholds.is_empty() || config.thresholds.iter().any(|&t| !(t > 0.0)) {
        return Err(SegmentationError::BadThresholds);
    }
    if peaks.is_empty() {
        return Err(SegmentationError::NoPeaks);
    }
    let mut ladder = config.thresholds.clone();
    ladder.sort_by(f64::total_cmp);
    ladder.dedup();
    let cap = *ladder.last().unwrap();
    let floods = flood_all(mesh, costs, frame, peaks, cap, config.spill_radius);

    let stages: Vec<Result<Stage, SegmentationError>> = ladder
        .par_iter()
        .map(|&t| segment_at(mesh, frame, peaks, &floods, t, config))
        .collect();
    let mut scores = Vec::with_capacity(stages.len());
    let mut best: Option<Stage> = None;
    let mut last_err = SegmentationError::AllRejected;
    for (t, stage) in ladder.iter().zip(stages) {
        match stage {
            Ok(s) => {
                debug!("threshold {t:.4}: {} blobs, area {:.1}", s.blobs.len(), s.area);
                scores.push((*t, s.area));
                if s.area > 0.0 && best.as_ref().is_none_or(|b| s.area > b.area) {
                    best = Some(s);
                }
            }
            Err(e) => {
                debug!("threshold {t:.4}: {e}");
                scores.push((*t, 0.0));
                last_err = e;
            }
        }
    }
    match best {
        Some(chosen) => Ok(Segmentation { chosen, scores }),
        None => Err(last_err),
    }
}
