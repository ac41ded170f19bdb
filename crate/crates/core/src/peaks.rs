//! Occlusal local maxima.

use serde::{Deserialize, Serialize};

use crate::mesh::IndexedMesh;
use crate::orientation::Frame;
use crate::Vec3;

/// Default drop below the highest peak at which peaks are discarded, mm.
pub const DEFAULT_HEIGHT_THRESHOLD: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub vertex: u32,
    pub position: Vec3,
    /// Occlusal height relative to the frame origin, mm.
    pub height: f64,
}

/// Vertices strictly higher than every 1-ring neighbor, in vertex order.
pub fn find_peaks(mesh: &IndexedMesh, frame: &Frame) -> Vec<Peak> {
    let heights: Vec<f64> = mesh.vertices.iter().map(|p| frame.height(p)).collect();
    (0..mesh.vertex_count())
        .filter(|&v| {
            let ring = mesh.vertex_neighbors(v);
            !ring.is_empty() && ring.iter().all(|&w| heights[w as usize] < heights[v])
        })
        .map(|v| Peak {
            vertex: v as u32,
            position: mesh.vertices[v],
            height: heights[v],
        })
        .collect()
}

/// Keeps peaks less than `threshold_mm` below the highest one.
pub fn filter_by_height(peaks: &[Peak], threshold_mm: f64) -> Vec<Peak> {
    let top = peaks.iter().map(|p| p.height).fold(f64::NEG_INFINITY, f64::max);
    peaks
        .iter()
        .filter(|p| top - p.height < threshold_mm)
        .copied()
        .collect()
}
