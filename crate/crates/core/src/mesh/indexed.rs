use std::collections::HashMap;

use log::warn;
use thiserror::Error;

use super::stl::TriangleSoup;
use crate::Vec3;

/// Sentinel for "no neighbor across this edge".
pub const NO_FACE: u32 = u32::MAX;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("mesh has no triangles")]
    Empty,
    #[error("every triangle was degenerate")]
    AllDegenerate,
    #[error("face {face} references vertex {index} but only {count} vertices exist")]
    BadIndex { face: usize, index: u32, count: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexOptions {
    /// Vertices closer than this (per coordinate grid cell) merge. `0` means
    /// exact bitwise equality.
    pub snap_tolerance: f64,
}

impl Default for IndexOptions {
    fn default() -> Self {
        IndexOptions { snap_tolerance: 0.0 }
    }
}

/// Counts of problems seen while building a mesh.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IndexReport {
    pub degenerate_dropped: usize,
    pub nonmanifold_incidences: usize,
    pub normal_mismatches: usize,
}

/// A deduplicated triangle mesh with per-face geometry and edge adjacency.
///
/// Immutable after construction. Face `f` has edges `(v0,v1)`, `(v1,v2)`,
/// `(v2,v0)`; `adjacency[f][k]` is the face across edge `k` or [`NO_FACE`].
#[derive(Debug, Clone)]
pub struct IndexedMesh {
    pub vertices: Vec<Vec3>,
    pub faces: Vec<[u32; 3]>,
    pub face_normals: Vec<Vec3>,
    pub face_centroids: Vec<Vec3>,
    pub face_areas: Vec<f64>,
    pub adjacency: Vec<[u32; 3]>,
    pub boundary_edges: Vec<[u32; 2]>,
    face_on_boundary: Vec<bool>,
    vertex_face_offsets: Vec<u32>,
    vertex_face_list: Vec<u32>,
    vertex_neighbor_offsets: Vec<u32>,
    vertex_neighbor_list: Vec<u32>,
    report: IndexReport,
}

fn key_of(p: &[f64; 3], tol: f64) -> [u64; 3] {
    let canon = |c: f64| {
        let c = if tol > 0.0 { (c / tol).round() } else { c };
        // +0.0 and -0.0 are the same point.
        if c == 0.0 { 0.0f64.to_bits() } else { c.to_bits() }
    };
    [canon(p[0]), canon(p[1]), canon(p[2])]
}

/// Deduplicates vertices and builds adjacency.
pub fn index_mesh(soup: &TriangleSoup, options: IndexOptions) -> Result<IndexedMesh, MeshError> {
    if soup.is_empty() {
        return Err(MeshError::Empty);
    }
    let mut lookup: HashMap<[u64; 3], u32> = HashMap::with_capacity(soup.len());
    let mut vertices = Vec::new();
    let mut faces = Vec::with_capacity(soup.len());
    let mut kept_normals = Vec::with_capacity(soup.len());
    for facet in &soup.facets {
        let mut idx = [0u32; 3];
        for (k, v) in facet.vertices.iter().enumerate() {
            let key = key_of(v, options.snap_tolerance);
            idx[k] = *lookup.entry(key).or_insert_with(|| {
                vertices.push(Vec3::new(v[0], v[1], v[2]));
                (vertices.len() - 1) as u32
            });
        }
        faces.push(idx);
        kept_normals.push(facet.stored_normal);
    }

    let mut mesh = IndexedMesh::from_parts(vertices, faces)?;

    let mut mismatches = 0;
    // Stored normals are only compared when the mesh kept every facet.
    if mesh.report.degenerate_dropped == 0 {
        for (n, stored) in mesh.face_normals.iter().zip(&kept_normals) {
            let s = Vec3::new(stored[0], stored[1], stored[2]);
            if s.norm() > 0.0 && n.dot(&s.normalize()) < 0.9 {
                mismatches += 1;
            }
        }
    }
    if mismatches > 0 {
        warn!("{mismatches} stored STL normals disagree with the facet winding; recomputed");
    }
    mesh.report.normal_mismatches = mismatches;
    Ok(mesh)
}

impl IndexedMesh {
    /// Builds a mesh from already-indexed geometry. Degenerate faces (repeated
    /// vertex or zero area) are dropped.
    pub fn from_parts(vertices: Vec<Vec3>, faces: Vec<[u32; 3]>) -> Result<Self, MeshError> {
        if faces.is_empty() {
            return Err(MeshError::Empty);
        }
        let nv = vertices.len();
        let mut report = IndexReport::default();
        let mut kept = Vec::with_capacity(faces.len());
        let mut face_normals = Vec::with_capacity(faces.len());
        let mut face_centroids = Vec::with_capacity(faces.len());
        let mut face_areas = Vec::with_capacity(faces.len());
        for (fi, f) in faces.iter().enumerate() {
            if let Some(&bad) = f.iter().find(|&&i| i as usize >= nv) {
                return Err(MeshError::BadIndex {
                    face: fi,
                    index: bad,
                    count: nv,
                });
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                report.degenerate_dropped += 1;
                continue;
            }
            let [a, b, c] = f.map(|i| vertices[i as usize]);
            let cross = (b - a).cross(&(c - a));
            let len = cross.norm();
            if !(len > 0.0) {
                report.degenerate_dropped += 1;
                continue;
            }
            kept.push(*f);
            face_normals.push(cross / len);
            face_centroids.push((a + b + c) / 3.0);
            face_areas.push(0.5 * len);
        }
        if kept.is_empty() {
            return Err(MeshError::AllDegenerate);
        }
        if report.degenerate_dropped > 0 {
            warn!("dropped {} degenerate triangles", report.degenerate_dropped);
        }
        let faces = kept;

        // Edge incidences, first two win.
        let mut edge_faces: HashMap<(u32, u32), (u32, u32, u8)> =
            HashMap::with_capacity(faces.len() * 3 / 2 + 1);
        let mut adjacency = vec![[NO_FACE; 3]; faces.len()];
        let mut nonmanifold = 0;
        for (fi, f) in faces.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                match edge_faces.get_mut(&key) {
                    None => {
                        edge_faces.insert(key, (fi as u32, NO_FACE, k as u8));
                    }
                    Some(entry) if entry.1 == NO_FACE => {
                        entry.1 = fi as u32;
                        let (first, _, first_slot) = *entry;
                        adjacency[first as usize][first_slot as usize] = fi as u32;
                        adjacency[fi][k] = first;
                    }
                    Some(_) => nonmanifold += 1,
                }
            }
        }
        if nonmanifold > 0 {
            warn!("{nonmanifold} non-manifold edge incidences ignored");
        }
        report.nonmanifold_incidences = nonmanifold;

        let mut boundary_edges: Vec<[u32; 2]> = edge_faces
            .iter()
            .filter(|(_, v)| v.1 == NO_FACE)
            .map(|(k, _)| [k.0, k.1])
            .collect();
        boundary_edges.sort_unstable();
        let mut face_on_boundary = vec![false; faces.len()];
        for &(f0, f1, _) in edge_faces.values() {
            if f1 == NO_FACE {
                face_on_boundary[f0 as usize] = true;
            }
        }

        // vertex -> faces
        let mut counts = vec![0u32; nv + 1];
        for f in &faces {
            for &v in f {
                counts[v as usize + 1] += 1;
            }
        }
        for i in 0..nv {
            counts[i + 1] += counts[i];
        }
        let vertex_face_offsets = counts.clone();
        let mut fill = counts;
        let mut vertex_face_list = vec![0u32; faces.len() * 3];
        for (fi, f) in faces.iter().enumerate() {
            for &v in f {
                vertex_face_list[fill[v as usize] as usize] = fi as u32;
                fill[v as usize] += 1;
            }
        }

        // vertex -> 1-ring vertices
        let mut vertex_neighbor_offsets = Vec::with_capacity(nv + 1);
        let mut vertex_neighbor_list = Vec::with_capacity(faces.len() * 3);
        vertex_neighbor_offsets.push(0u32);
        let mut scratch = Vec::new();
        for v in 0..nv {
            scratch.clear();
            let range = vertex_face_offsets[v] as usize..vertex_face_offsets[v + 1] as usize;
            for &fi in &vertex_face_list[range] {
                for &w in &faces[fi as usize] {
                    if w as usize != v {
                        scratch.push(w);
                    }
                }
            }
            scratch.sort_unstable();
            scratch.dedup();
            vertex_neighbor_list.extend_from_slice(&scratch);
            vertex_neighbor_offsets.push(vertex_neighbor_list.len() as u32);
        }

        Ok(IndexedMesh {
            vertices,
            faces,
            face_normals,
            face_centroids,
            face_areas,
            adjacency,
            boundary_edges,
            face_on_boundary,
            vertex_face_offsets,
            vertex_face_list,
            vertex_neighbor_offsets,
            vertex_neighbor_list,
            report,
        })
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn report(&self) -> IndexReport {
        self.report
    }

    /// Faces incident to vertex `v`.
    pub fn vertex_faces(&self, v: usize) -> &[u32] {
        &self.vertex_face_list
            [self.vertex_face_offsets[v] as usize..self.vertex_face_offsets[v + 1] as usize]
    }

    /// Vertices sharing an edge with `v`, sorted.
    pub fn vertex_neighbors(&self, v: usize) -> &[u32] {
        &self.vertex_neighbor_list
            [self.vertex_neighbor_offsets[v] as usize..self.vertex_neighbor_offsets[v + 1] as usize]
    }

    /// Neighboring faces of `f` (up to three).
    pub fn face_neighbors(&self, f: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[f]
            .iter()
            .filter(|&&n| n != NO_FACE)
            .map(|&n| n as usize)
    }

    pub fn face_touches_boundary(&self, f: usize) -> bool {
        self.face_on_boundary[f]
    }

    /// Applies `transform` to every vertex and rebuilds derived geometry.
    pub fn map_vertices(&self, transform: impl Fn(&Vec3) -> Vec3) -> IndexedMesh {
        let vertices = self.vertices.iter().map(transform).collect();
        IndexedMesh::from_parts(vertices, self.faces.clone())
            .expect("transforming a valid mesh keeps it valid")
    }

    /// Converts back to an unindexed soup (for STL output).
    pub fn to_soup(&self) -> TriangleSoup {
        let mut soup = TriangleSoup::from_triangles(self.faces.iter().map(|f| {
            f.map(|i| {
                let p = self.vertices[i as usize];
                [p.x, p.y, p.z]
            })
        }));
        for (facet, n) in soup.facets.iter_mut().zip(&self.face_normals) {
            facet.stored_normal = [n.x, n.y, n.z];
        }
        soup
    }
}

/// Sum of triangle areas over `subset`, in mm².
pub fn surface_area(mesh: &IndexedMesh, subset: &[u32]) -> f64 {
    subset.iter().map(|&f| mesh.face_areas[f as usize]).sum()
}
