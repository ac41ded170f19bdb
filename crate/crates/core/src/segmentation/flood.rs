use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::curvature::EdgeCurvatureMap;
use crate::mesh::IndexedMesh;
use crate::orientation::Frame;
use crate::peaks::Peak;

/// Faces grown from one peak, sorted by face index.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    /// Index into the peak list the region was seeded from.
    pub seed_peak: usize,
    pub faces: Vec<u32>,
    /// Accumulated crease cost `T` per member face, aligned with `faces`.
    pub costs: Vec<f64>,
    pub spilled: bool,
    pub touches_boundary: bool,
}

/// Shortest crease-cost distances from a peak, below a cap.
///
/// Valid for every threshold up to `cap`: [`Flood::region`] cuts it down.
#[derive(Debug, Clone, PartialEq)]
pub struct Flood {
    pub seed_peak: usize,
    pub faces: Vec<u32>,
    pub dist: Vec<f64>,
    /// Cheapest cost at which the fill would leave the spill radius.
    pub escape: f64,
}

#[derive(Clone, Copy)]
struct Entry {
    dist: f64,
    face: u32,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Entry {
    // Min-heap on distance, then face index.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.face.cmp(&self.face))
    }
}

/// Dijkstra over face adjacency from the faces around `seed.vertex`.
///
/// Faces whose centroid lies more than `spill_radius` (horizontally) from the
/// seed are never entered; the cheapest attempt to enter one is `escape`.
pub fn flood_distances(
    mesh: &IndexedMesh,
    costs: &EdgeCurvatureMap,
    frame: &Frame,
    seed_index: usize,
    seed: &Peak,
    cap: f64,
    spill_radius: f64,
) -> Flood {
    assert!(cap > 0.0, "threshold must be positive");
    assert!((seed.vertex as usize) < mesh.vertex_count(), "seed vertex not in mesh");
    let origin = frame.horizontal(&seed.position);
    let r2 = spill_radius * spill_radius;
    let outside = |f: usize| {
        spill_radius.is_finite() && (frame.horizontal(&mesh.face_centroids[f]) - origin).norm_squared() > r2
    };

    let mut dist = vec![f64::INFINITY; mesh.face_count()];
    let mut done = vec![false; mesh.face_count()];
    let mut heap = BinaryHeap::new();
    for &f in mesh.vertex_faces(seed.vertex as usize) {
        dist[f as usize] = 0.0;
        heap.push(Entry { dist: 0.0, face: f });
    }
    let mut escape = f64::INFINITY;
    let mut order = Vec::new();
    while let Some(Entry { dist: d, face }) = heap.pop() {
        let f = face as usize;
        if done[f] || d > dist[f] {
            continue;
        }
        done[f] = true;
        order.push(face);
        for k in 0..3 {
            let Some(step) = costs.cost[f][k] else { continue };
            let g = mesh.adjacency[f][k] as usize;
            let nd = d + step;
            if nd >= cap || done[g] {
                continue;
            }
            if outside(g) {
                escape = escape.min(nd);
                continue;
            }
            if nd < dist[g] {
                dist[g] = nd;
                heap.push(Entry { dist: nd, face: g as u32 });
            }
        }
    }
    order.sort_unstable();
    let d = order.iter().map(|&f| dist[f as usize]).collect();
    Flood {
        seed_peak: seed_index,
        faces: order,
        dist: d,
        escape,
    }
}

impl Flood {
    /// The region for threshold `t_max ≤ cap`.
    pub fn region(&self, mesh: &IndexedMesh, t_max: f64) -> Region {
        let mut faces = Vec::new();
        let mut costs = Vec::new();
        for (&f, &d) in self.faces.iter().zip(&self.dist) {
            if d < t_max {
                faces.push(f);
                costs.push(d);
            }
        }
        let touches_boundary = faces.iter().any(|&f| mesh.face_touches_boundary(f as usize));
        Region {
            seed_peak: self.seed_peak,
            faces,
            costs,
            spilled: self.escape < t_max,
            touches_boundary,
        }
    }
}

/// Single-threshold flood fill.
pub fn flood_fill(
    mesh: &IndexedMesh,
    costs: &EdgeCurvatureMap,
    frame: &Frame,
    seed_index: usize,
    seed: &Peak,
    t_max: f64,
    spill_radius: f64,
) -> Region {
    flood_distances(mesh, costs, frame, seed_index, seed, t_max, spill_radius).region(mesh, t_max)
}
