use std::collections::{BTreeMap, HashMap};

use petgraph::unionfind::UnionFind;

use super::{Blob, Group, Region};
use crate::arch::ArchCurve;
use crate::mesh::IndexedMesh;

/// Connected components of the "shares a face" graph over `regions`.
///
/// Groups are ordered by their smallest region index; members ascend.
pub fn group_overlapping(regions: &[Region]) -> Vec<Vec<usize>> {
    let mut uf = UnionFind::<usize>::new(regions.len());
    let mut owner: HashMap<u32, usize> = HashMap::new();
    for (i, r) in regions.iter().enumerate() {
        for &f in &r.faces {
            match owner.get(&f) {
                Some(&j) => {
                    uf.union(i, j);
                }
                None => {
                    owner.insert(f, i);
                }
            }
        }
    }
    components(&mut uf, regions.len())
}

fn components(uf: &mut UnionFind<usize>, n: usize) -> Vec<Vec<usize>> {
    let mut by_root: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        by_root.entry(uf.find_mut(i)).or_default().push(i);
    }
    let mut groups: Vec<Vec<usize>> = by_root.into_values().collect();
    groups.sort_by_key(|g| g[0]);
    groups
}

/// Builds a group record from region indices.
pub fn make_group(regions: &[Region], members: &[usize]) -> Group {
    let mut faces: Vec<u32> = members.iter().flat_map(|&r| regions[r].faces.iter().copied()).collect();
    faces.sort_unstable();
    faces.dedup();
    let mut peaks: Vec<usize> = members.iter().map(|&r| regions[r].seed_peak).collect();
    peaks.sort_unstable();
    peaks.dedup();
    Group {
        regions: members.to_vec(),
        peaks,
        faces,
    }
}

/// Range of arch parameters over the vertices of `faces`.
pub fn arch_span(mesh: &IndexedMesh, arch: &ArchCurve, faces: &[u32]) -> [f64; 2] {
    let mut verts: Vec<u32> = faces.iter().flat_map(|&f| mesh.faces[f as usize]).collect();
    verts.sort_unstable();
    verts.dedup();
    verts.iter().fold([f64::INFINITY, f64::NEG_INFINITY], |[lo, hi], &v| {
        let s = arch.param_of(&mesh.vertices[v as usize]);
        [lo.min(s), hi.max(s)]
    })
}

/// True when the overlap of two spans is at least `fraction` of the
/// shorter one.
pub fn spans_overlap(a: [f64; 2], b: [f64; 2], fraction: f64) -> bool {
    let overlap = a[1].min(b[1]) - a[0].max(b[0]);
    let shorter = (a[1] - a[0]).min(b[1] - b[0]);
    overlap >= 0.0 && overlap >= fraction * shorter
}

/// Merges groups sitting at the same position along the arch, transitively.
/// Blobs come out in left-to-right order of their span midpoints.
pub fn group_inline(groups: &[Group], spans: &[[f64; 2]], fraction: f64) -> Vec<Blob> {
    assert_eq!(groups.len(), spans.len());
    let mut uf = UnionFind::<usize>::new(groups.len());
    for i in 0..groups.len() {
        for j in i + 1..groups.len() {
            if spans_overlap(spans[i], spans[j], fraction) {
                uf.union(i, j);
            }
        }
    }
    let mut blobs: Vec<Blob> = components(&mut uf, groups.len())
        .into_iter()
        .map(|members| {
            let mut regions = Vec::new();
            let mut peaks = Vec::new();
            let mut faces = Vec::new();
            let mut span = [f64::INFINITY, f64::NEG_INFINITY];
            for &g in &members {
                regions.extend_from_slice(&groups[g].regions);
                peaks.extend_from_slice(&groups[g].peaks);
                faces.extend_from_slice(&groups[g].faces);
                span = [span[0].min(spans[g][0]), span[1].max(spans[g][1])];
            }
            regions.sort_unstable();
            peaks.sort_unstable();
            peaks.dedup();
            faces.sort_unstable();
            faces.dedup();
            Blob {
                regions,
                peaks,
                faces,
                span,
            }
        })
        .collect();
    blobs.sort_by(|a, b| (a.span[0] + a.span[1]).total_cmp(&(b.span[0] + b.span[1])));
    blobs
}
