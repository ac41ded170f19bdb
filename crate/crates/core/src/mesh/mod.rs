//! STL input and the indexed triangle mesh.

mod indexed;
mod stl;

pub use indexed::{index_mesh, surface_area, IndexOptions, IndexReport, IndexedMesh, MeshError, NO_FACE};
pub use stl::{parse_stl, write_ascii_stl, write_binary_stl, Facet, StlError, TriangleSoup};

/// Small reference meshes used by tests and benches.
pub mod testing {
    use std::collections::HashMap;

    use super::IndexedMesh;
    use crate::Vec3;

    /// Regular tetrahedron with outward winding.
    pub fn tetrahedron() -> IndexedMesh {
        let v = vec![
            Vec3::new(1.0, 1.0, 1.0),
            Vec3::new(1.0, -1.0, -1.0),
            Vec3::new(-1.0, 1.0, -1.0),
            Vec3::new(-1.0, -1.0, 1.0),
        ];
        let f = vec![[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]];
        IndexedMesh::from_parts(v, f).unwrap()
    }

    /// Subdivided icosahedron projected to a sphere of `radius`.
    pub fn icosphere(radius: f64, subdivisions: u32) -> IndexedMesh {
        let t = (1.0 + 5f64.sqrt()) / 2.0;
        let mut verts: Vec<Vec3> = [
            [-1.0, t, 0.0],
            [1.0, t, 0.0],
            [-1.0, -t, 0.0],
            [1.0, -t, 0.0],
            [0.0, -1.0, t],
            [0.0, 1.0, t],
            [0.0, -1.0, -t],
            [0.0, 1.0, -t],
            [t, 0.0, -1.0],
            [t, 0.0, 1.0],
            [-t, 0.0, -1.0],
            [-t, 0.0, 1.0],
        ]
        .iter()
        .map(|p| Vec3::new(p[0], p[1], p[2]).normalize())
        .collect();
        let mut faces: Vec<[u32; 3]> = vec![
            [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
            [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
            [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
            [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
        ];
        for _ in 0..subdivisions {
            let mut mid: HashMap<(u32, u32), u32> = HashMap::new();
            let mut midpoint = |a: u32, b: u32, verts: &mut Vec<Vec3>| {
                *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
                    verts.push(((verts[a as usize] + verts[b as usize]) * 0.5).normalize());
                    (verts.len() - 1) as u32
                })
            };
            let mut next = Vec::with_capacity(faces.len() * 4);
            for [a, b, c] in faces {
                let ab = midpoint(a, b, &mut verts);
                let bc = midpoint(b, c, &mut verts);
                let ca = midpoint(c, a, &mut verts);
                next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
            }
            faces = next;
        }
        let verts = verts.into_iter().map(|v| v * radius).collect();
        IndexedMesh::from_parts(verts, faces).unwrap()
    }

    /// Triangulated height field `z = f(x, y)` on an `nx × ny` grid with
    /// spacing `h`, upward-facing.
    pub fn height_field(nx: usize, ny: usize, h: f64, f: impl Fn(f64, f64) -> f64) -> IndexedMesh {
        let mut verts = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let (x, y) = (i as f64 * h, j as f64 * h);
                verts.push(Vec3::new(x, y, f(x, y)));
            }
        }
        let mut faces = Vec::new();
        let id = |i: usize, j: usize| (j * nx + i) as u32;
        for j in 0..ny - 1 {
            for i in 0..nx - 1 {
                faces.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
                faces.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
        IndexedMesh::from_parts(verts, faces).unwrap()
    }
}
