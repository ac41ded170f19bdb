use log::debug;
use serde::{Deserialize, Serialize};

use super::{Group, Region};
use crate::arch::{ArchCurve, Direction};
use crate::mesh::IndexedMesh;
use crate::orientation::Frame;
use crate::peaks::Peak;
use crate::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule")]
pub enum RejectReason {
    /// A member region travelled beyond the spill radius.
    Spilled,
    /// A member peak sits on the flank of a much higher peak.
    SteepNeighbor { peak: usize, ratio: f64 },
    TouchesBoundary,
    /// Face normals all lean buccally or all lingually.
    OneSidedNormals { positive: f64, negative: f64, variance: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CleaningRules {
    /// Maximum tolerated rise/run from a peak to a higher one.
    pub steep_ratio: f64,
    /// Minimum share of faces on each side for the normals rule.
    pub min_side_fraction: f64,
    /// Normal-projection variance that passes the normals rule regardless.
    pub min_variance: f64,
}

impl Default for CleaningRules {
    fn default() -> Self {
        CleaningRules {
            steep_ratio: 1.5,
            min_side_fraction: 0.05,
            min_variance: 0.15,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cleaned {
    pub kept: Vec<Group>,
    pub rejected: Vec<(Group, RejectReason)>,
    /// Arch fitted to the peaks that survived the peak and boundary rules.
    pub arch: Option<ArchCurve>,
}

/// For each peak, the steepest rise/run to any higher peak (0 when none is
/// higher).
pub fn steepest_rise(peaks: &[Peak], frame: &Frame) -> Vec<f64> {
    let flat: Vec<_> = peaks.iter().map(|p| frame.horizontal(&p.position)).collect();
    peaks
        .iter()
        .enumerate()
        .map(|(i, p)| {
            peaks
                .iter()
                .enumerate()
                .filter(|(_, q)| q.height > p.height)
                .map(|(j, q)| {
                    let run = (flat[j] - flat[i]).norm();
                    let rise = q.height - p.height;
                    if run > 0.0 {
                        rise / run
                    } else {
                        f64::INFINITY
                    }
                })
                .fold(0.0, f64::max)
        })
        .collect()
}

/// Area-weighted centroid of a face set.
pub fn faces_centroid(mesh: &IndexedMesh, faces: &[u32]) -> Vec3 {
    let mut acc = Vec3::zeros();
    let mut area = 0.0;
    for &f in faces {
        let a = mesh.face_areas[f as usize];
        acc += mesh.face_centroids[f as usize] * a;
        area += a;
    }
    if area > 0.0 {
        acc / area
    } else {
        acc
    }
}

fn normals_reason(mesh: &IndexedMesh, arch: &ArchCurve, group: &Group, rules: &CleaningRules) -> Option<RejectReason> {
    let centre = faces_centroid(mesh, &group.faces);
    let buccal = arch.direction_at(arch.frame.horizontal(&centre), Direction::Buccal);
    let proj: Vec<f64> = group.faces.iter().map(|&f| mesh.face_normals[f as usize].dot(&buccal)).collect();
    let n = proj.len() as f64;
    let positive = proj.iter().filter(|&&p| p > 0.0).count() as f64 / n;
    let negative = proj.iter().filter(|&&p| p < 0.0).count() as f64 / n;
    let mean = proj.iter().sum::<f64>() / n;
    let variance = proj.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / n;
    let bilateral = positive >= rules.min_side_fraction && negative >= rules.min_side_fraction;
    if bilateral || variance >= rules.min_variance {
        None
    } else {
        Some(RejectReason::OneSidedNormals {
            positive,
            negative,
            variance,
        })
    }
}

/// Removes groups that cannot be teeth. Peak rules (spill, steep neighbor)
/// run first, then the boundary rule, then an arch is fitted to the
/// remaining peaks for the normals rule.
pub fn clean_regions(
    groups: Vec<Group>,
    regions: &[Region],
    peaks: &[Peak],
    frame: &Frame,
    mesh: &IndexedMesh,
    rules: &CleaningRules,
) -> Cleaned {
    let rise = steepest_rise(peaks, frame);
    let mut rejected = Vec::new();
    let mut survivors = Vec::new();
    for g in groups {
        let reason = if g.regions.iter().any(|&r| regions[r].spilled) {
            Some(RejectReason::Spilled)
        } else if let Some(&p) = g.peaks.iter().find(|&&p| rise[p] > rules.steep_ratio) {
            Some(RejectReason::SteepNeighbor { peak: p, ratio: rise[p] })
        } else if g.regions.iter().any(|&r| regions[r].touches_boundary) {
            Some(RejectReason::TouchesBoundary)
        } else {
            None
        };
        match reason {
            Some(r) => rejected.push((g, r)),
            None => survivors.push(g),
        }
    }

    let points: Vec<Vec3> = survivors
        .iter()
        .flat_map(|g| g.peaks.iter().map(|&p| peaks[p].position))
        .collect();
    let arch = match ArchCurve::fit(*frame, &points, None) {
        Ok(a) => Some(a),
        Err(e) => {
            debug!("arch fit before the normals rule failed: {e}");
            None
        }
    };
    let mut kept = Vec::new();
    for g in survivors {
        match arch.as_ref().and_then(|a| normals_reason(mesh, a, &g, rules)) {
            Some(r) => rejected.push((g, r)),
            None => kept.push(g),
        }
    }
    Cleaned { kept, rejected, arch }
}
