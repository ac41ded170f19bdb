//! Landmark positions on identified teeth.

use serde::{Deserialize, Serialize};

use crate::arch::{ArchCurve, Direction};
use crate::assignment::ToothClass;
use crate::mesh::IndexedMesh;
use crate::peaks::Peak;
use crate::segmentation::faces_centroid;
use crate::Vec3;

/// Peaks closer than this count as one cusp, mm.
pub const CUSP_MERGE_DISTANCE: f64 = 1.5;
/// Band below the top of an incisor that forms its edge, mm.
const INCISAL_BAND: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LandmarkKind {
    IncisorMidpoint,
    CanineTip,
    BuccalCusp,
}

impl LandmarkKind {
    pub fn for_class(class: ToothClass) -> LandmarkKind {
        match class {
            ToothClass::Incisor => LandmarkKind::IncisorMidpoint,
            ToothClass::Canine => LandmarkKind::CanineTip,
            ToothClass::Premolar | ToothClass::Molar => LandmarkKind::BuccalCusp,
        }
    }
}

/// Which point of an incisor is reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IncisorRule {
    /// Middle of the incisal edge.
    #[default]
    IncisalEdge,
    /// Most labial point in line with the middle of the incisal edge.
    Labial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Landmark {
    pub tooth: String,
    pub kind: LandmarkKind,
    pub position: Vec3,
    pub vertex: u32,
    /// Order from mesial to distal, for cusps.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cusp_index: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToothLandmarks {
    pub landmarks: Vec<Landmark>,
    /// No landmark could be placed; needs a human look.
    pub missing: bool,
}

fn member_vertices(mesh: &IndexedMesh, faces: &[u32]) -> Vec<u32> {
    let mut v: Vec<u32> = faces.iter().flat_map(|&f| mesh.faces[f as usize]).collect();
    v.sort_unstable();
    v.dedup();
    v
}

fn nearest_vertex(mesh: &IndexedMesh, verts: &[u32], target: &Vec3) -> u32 {
    *verts
        .iter()
        .min_by(|&&a, &&b| {
            let da = (mesh.vertices[a as usize] - target).norm_squared();
            let db = (mesh.vertices[b as usize] - target).norm_squared();
            da.total_cmp(&db).then(a.cmp(&b))
        })
        .expect("tooth has vertices")
}

fn highest<'a>(peaks: impl Iterator<Item = &'a Peak>) -> Option<&'a Peak> {
    peaks.max_by(|a, b| a.height.total_cmp(&b.height).then(b.vertex.cmp(&a.vertex)))
}

/// Landmarks for one tooth given its faces and the peaks inside it.
pub fn extract_landmarks(
    code: &str,
    class: ToothClass,
    faces: &[u32],
    peaks: &[Peak],
    mesh: &IndexedMesh,
    arch: &ArchCurve,
    incisor_rule: IncisorRule,
) -> ToothLandmarks {
    let frame = &arch.frame;
    let mark = |kind, vertex: u32, cusp_index| Landmark {
        tooth: code.to_string(),
        kind,
        position: mesh.vertices[vertex as usize],
        vertex,
        cusp_index,
    };
    if peaks.is_empty() || faces.is_empty() {
        return ToothLandmarks {
            landmarks: Vec::new(),
            missing: true,
        };
    }
    let landmarks = match class {
        ToothClass::Incisor => {
            let verts = member_vertices(mesh, faces);
            let top = verts.iter().map(|&v| frame.height(&mesh.vertices[v as usize])).fold(f64::NEG_INFINITY, f64::max);
            let edge: Vec<u32> = verts
                .iter()
                .copied()
                .filter(|&v| frame.height(&mesh.vertices[v as usize]) >= top - INCISAL_BAND)
                .collect();
            let mid = edge.iter().map(|&v| mesh.vertices[v as usize]).sum::<Vec3>() / edge.len() as f64;
            let v = match incisor_rule {
                IncisorRule::IncisalEdge => {
                    // Closest edge vertex in plan view, the higher one on ties.
                    let mid2 = frame.horizontal(&mid);
                    *edge
                        .iter()
                        .min_by(|&&a, &&b| {
                            let pa = &mesh.vertices[a as usize];
                            let pb = &mesh.vertices[b as usize];
                            let da = (frame.horizontal(pa) - mid2).norm_squared();
                            let db = (frame.horizontal(pb) - mid2).norm_squared();
                            da.total_cmp(&db)
                                .then(frame.height(pb).total_cmp(&frame.height(pa)))
                                .then(a.cmp(&b))
                        })
                        .unwrap()
                }
                IncisorRule::Labial => {
                    let at = frame.horizontal(&faces_centroid(mesh, faces));
                    let distal = arch.direction_at(at, Direction::Distal);
                    let buccal = arch.direction_at(at, Direction::Buccal);
                    let line: Vec<u32> = verts
                        .iter()
                        .copied()
                        .filter(|&v| (mesh.vertices[v as usize] - mid).dot(&distal).abs() <= 0.5)
                        .collect();
                    if line.is_empty() {
                        nearest_vertex(mesh, &verts, &mid)
                    } else {
                        *line
                            .iter()
                            .max_by(|&&a, &&b| {
                                let pa = mesh.vertices[a as usize].dot(&buccal);
                                let pb = mesh.vertices[b as usize].dot(&buccal);
                                pa.total_cmp(&pb).then(b.cmp(&a))
                            })
                            .unwrap()
                    }
                }
            };
            vec![mark(LandmarkKind::IncisorMidpoint, v, None)]
        }
        ToothClass::Canine => {
            let tip = highest(peaks.iter()).unwrap();
            vec![mark(LandmarkKind::CanineTip, tip.vertex, None)]
        }
        ToothClass::Premolar | ToothClass::Molar => {
            let mut buccal: Vec<&Peak> = peaks.iter().filter(|p| arch.buccal_offset(&p.position) > 0.0).collect();
            buccal.sort_by(|a, b| b.height.total_cmp(&a.height).then(a.vertex.cmp(&b.vertex)));
            let mut cusps: Vec<&Peak> = Vec::new();
            for p in buccal {
                if cusps.iter().all(|c| (c.position - p.position).norm() > CUSP_MERGE_DISTANCE) {
                    cusps.push(p);
                }
            }
            let at = frame.horizontal(&faces_centroid(mesh, faces));
            let mesial = arch.direction_at(at, Direction::Mesial);
            cusps.sort_by(|a, b| b.position.dot(&mesial).total_cmp(&a.position.dot(&mesial)).then(a.vertex.cmp(&b.vertex)));
            cusps
                .iter()
                .enumerate()
                .map(|(k, p)| mark(LandmarkKind::BuccalCusp, p.vertex, Some(k)))
                .collect()
        }
    };
    ToothLandmarks {
        missing: landmarks.is_empty(),
        landmarks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arch::Quadratic;
    use crate::mesh::testing::height_field;
    use crate::orientation::Frame;
    use crate::peaks::find_peaks;

    fn straight_arch(y: f64) -> ArchCurve {
        // Nearly flat curve through y: buccal is +y, mesial is +x at x < 0.
        ArchCurve {
            quad: Quadratic { a: -1e-4, b: 0.0, c: y },
            frame: Frame::identity(),
        }
    }

    fn all_faces(m: &IndexedMesh) -> Vec<u32> {
        (0..m.face_count() as u32).collect()
    }

    #[test]
    fn canine_apex() {
        let m = height_field(41, 41, 0.25, |x, y| (6.0 - 1.5 * (x - 5.0).hypot(y - 5.0)).max(0.0));
        let peaks = find_peaks(&m, &Frame::identity());
        let lm = extract_landmarks("LR3", ToothClass::Canine, &all_faces(&m), &peaks, &m, &straight_arch(5.0), IncisorRule::default());
        assert_eq!(lm.landmarks.len(), 1);
        assert_eq!(lm.landmarks[0].position, Vec3::new(5.0, 5.0, 6.0));
        assert_eq!(lm.landmarks[0].kind, LandmarkKind::CanineTip);
    }

    #[test]
    fn incisor_edge_midpoint() {
        // Ridge along x from 3 to 7 at y = 5, tallest in the middle.
        let m = height_field(41, 41, 0.25, |x, y| {
            let along = if (3.0..=7.0).contains(&x) { 0.0 } else { (x - 5.0).abs() - 2.0 };
            (8.0 - 0.05 * (x - 5.0).powi(2) - 3.0 * (y - 5.0).abs() - 3.0 * along).max(0.0)
        });
        let peaks = find_peaks(&m, &Frame::identity());
        let lm = extract_landmarks("LR1", ToothClass::Incisor, &all_faces(&m), &peaks, &m, &straight_arch(5.0), IncisorRule::default());
        let p = lm.landmarks[0].position;
        assert!((p - Vec3::new(5.0, 5.0, 8.0)).norm() < 0.3, "{p:?}");
    }

    #[test]
    fn molar_buccal_cusps_only() {
        // Four cusps: buccal at y = 6.5, lingual at y = 3.5.
        let cusps = [(3.5, 6.5), (6.5, 6.5), (3.5, 3.5), (6.5, 3.5)];
        let m = height_field(41, 41, 0.25, move |x, y| {
            let body = (5.0 - 0.08 * ((x - 5.0).powi(2) + (y - 5.0).powi(2))).max(0.0);
            body + cusps.iter().map(|&(cx, cy)| 0.6 * (-((x - cx).powi(2) + (y - cy).powi(2)) / 0.8).exp()).sum::<f64>()
        });
        let peaks = find_peaks(&m, &Frame::identity());
        let arch = ArchCurve {
            quad: Quadratic { a: -1e-4, b: 0.0, c: 5.2 },
            frame: Frame { origin: Vec3::new(20.0, 0.0, 0.0), ..Frame::identity() },
        };
        let lm = extract_landmarks("LL6", ToothClass::Molar, &all_faces(&m), &peaks, &m, &arch, IncisorRule::default());
        assert_eq!(lm.landmarks.len(), 2);
        for l in &lm.landmarks {
            assert!(l.position.y > 6.0);
        }
        // mesial is +x on this side of the arch
        assert!(lm.landmarks[0].position.x > lm.landmarks[1].position.x);
        assert_eq!(lm.landmarks[0].cusp_index, Some(0));
    }

    #[test]
    fn no_buccal_peak_flags_missing() {
        let m = height_field(21, 21, 0.5, |x, y| (4.0 - 0.2 * ((x - 5.0).powi(2) + (y - 5.0).powi(2))).max(0.0));
        let peaks = find_peaks(&m, &Frame::identity());
        let lm = extract_landmarks("UR6", ToothClass::Molar, &all_faces(&m), &peaks, &m, &straight_arch(9.0), IncisorRule::default());
        assert!(lm.missing);
        let none = extract_landmarks("UR1", ToothClass::Incisor, &all_faces(&m), &[], &m, &straight_arch(9.0), IncisorRule::default());
        assert!(none.missing);
    }
}
