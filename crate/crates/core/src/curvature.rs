//! Signed curvature across mesh edges and the crease cost map.

use log::warn;

use crate::mesh::{IndexedMesh, NO_FACE};

/// Per face and per edge slot: signed curvature and crease cost, mm⁻¹.
/// Slots on boundary edges hold `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeCurvatureMap {
    pub signed: Vec<[Option<f64>; 3]>,
    pub cost: Vec<[Option<f64>; 3]>,
    /// Edges whose face centroids coincided.
    pub coincident: usize,
}

impl EdgeCurvatureMap {
    /// Smallest signed curvature around face `f` (0 when isolated).
    pub fn face_min_signed(&self, f: usize) -> f64 {
        self.signed[f].iter().flatten().fold(0.0, |m, &v| m.min(v))
    }
}

/// Curvature of the edge between faces `i` and `j`, seen from `i`.
pub fn signed_curvature(mesh: &IndexedMesh, i: usize, j: usize) -> Option<f64> {
    let (n0, n1) = (mesh.face_normals[i], mesh.face_normals[j]);
    let dx = mesh.face_centroids[j] - mesh.face_centroids[i];
    let len = dx.norm();
    if len < 1e-9 {
        return None;
    }
    let k = n0.cross(&n1).norm() / len;
    let s = n0.dot(&dx);
    Some(if s > 0.0 {
        -k
    } else if s < 0.0 {
        k
    } else {
        0.0
    })
}

/// Signed curvature for every interior edge, computed once per edge from the
/// lower-indexed face and stored for both directions. Costs start at zero;
/// see [`cost_map`].
pub fn edge_curvatures(mesh: &IndexedMesh) -> EdgeCurvatureMap {
    let n = mesh.face_count();
    let mut signed = vec![[None; 3]; n];
    let mut coincident = 0;
    for f in 0..n {
        for k in 0..3 {
            let g = mesh.adjacency[f][k];
            if g == NO_FACE || (g as usize) < f {
                continue;
            }
            let g = g as usize;
            let value = signed_curvature(mesh, f, g).unwrap_or_else(|| {
                coincident += 1;
                0.0
            });
            signed[f][k] = Some(value);
            let back = mesh.adjacency[g].iter().position(|&h| h as usize == f).expect("adjacency is symmetric");
            signed[g][back] = Some(value);
        }
    }
    if coincident > 0 {
        warn!("{coincident} edges join faces with coincident centroids; curvature set to 0");
    }
    EdgeCurvatureMap {
        cost: signed.iter().map(|s| s.map(|v| v.map(|_| 0.0))).collect(),
        signed,
        coincident,
    }
}

/// Fills `cost = max(−signed, 0)`: only creases cost anything.
pub fn cost_map(mut curv: EdgeCurvatureMap) -> EdgeCurvatureMap {
    for (c, s) in curv.cost.iter_mut().zip(&curv.signed) {
        *c = s.map(|v| v.map(|x| (-x).max(0.0)));
    }
    curv
}

pub fn crease_costs(mesh: &IndexedMesh) -> EdgeCurvatureMap {
    cost_map(edge_curvatures(mesh))
}
