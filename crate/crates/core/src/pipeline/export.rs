use std::io::Write;
use std::str::FromStr;

use thiserror::Error;

use super::report::LandmarkReport;
use super::Analysis;
use crate::assignment::whole_tooth_codes;
use crate::landmarks::LandmarkKind;
use crate::mesh::IndexedMesh;

pub const UNLABELED_GRAY: [u8; 3] = [160, 160, 160];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExportError {
    #[error("unknown export format `{0}` (expected ply or json)")]
    UnknownFormat(String),
    #[error("{labels} face labels for a mesh with {faces} faces")]
    LabelCount { labels: usize, faces: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Ply,
    Json,
}

impl FromStr for ExportFormat {
    type Err = ExportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ply" => Ok(ExportFormat::Ply),
            "json" => Ok(ExportFormat::Json),
            _ => Err(ExportError::UnknownFormat(s.to_string())),
        }
    }
}

/// Fully saturated-ish hue wheel; one slot per whole tooth of the largest jaw.
const PALETTE: [[u8; 3]; 16] = [
    [230, 25, 75],
    [60, 180, 75],
    [255, 225, 25],
    [0, 130, 200],
    [245, 130, 48],
    [145, 30, 180],
    [70, 240, 240],
    [240, 50, 230],
    [210, 245, 60],
    [250, 190, 212],
    [0, 128, 128],
    [220, 190, 255],
    [170, 110, 40],
    [128, 0, 0],
    [170, 255, 195],
    [0, 0, 128],
];

fn landmark_color(kind: LandmarkKind) -> [u8; 3] {
    match kind {
        LandmarkKind::IncisorMidpoint => [255, 255, 255],
        LandmarkKind::CanineTip => [0, 0, 0],
        LandmarkKind::BuccalCusp => [255, 0, 0],
    }
}

/// Color of a tooth code: fixed per position in the jaw's catalog.
pub fn label_color(report: &LandmarkReport, code: &str) -> [u8; 3] {
    let whole = code.split('.').next().unwrap_or(code);
    whole_tooth_codes(report.jaw_kind)
        .iter()
        .position(|c| c == whole)
        .map_or(UNLABELED_GRAY, |i| PALETTE[i % PALETTE.len()])
}

/// Binary little-endian PLY: the mesh colored by tooth, then one extra
/// vertex per landmark.
pub fn write_ply(mesh: &IndexedMesh, analysis: &Analysis) -> Result<Vec<u8>, ExportError> {
    let report = &analysis.report;
    if analysis.face_labels.len() != mesh.face_count() {
        return Err(ExportError::LabelCount {
            labels: analysis.face_labels.len(),
            faces: mesh.face_count(),
        });
    }
    let tooth_colors: Vec<[u8; 3]> = report.teeth.iter().map(|t| label_color(report, &t.code)).collect();
    let landmarks: Vec<_> = report.landmarks().collect();
    let n = mesh.vertices.len() + landmarks.len();
    let mut out = Vec::with_capacity(64 + n * 15 + mesh.face_count() * 13);
    write!(
        out,
        "ply\nformat binary_little_endian 1.0\ncomment model {}\nelement vertex {n}\n\
         property float x\nproperty float y\nproperty float z\n\
         property uchar red\nproperty uchar green\nproperty uchar blue\n\
         element face {}\nproperty list uchar int vertex_indices\nend_header\n",
        report.model_id.replace(['\n', '\r'], " "),
        mesh.face_count()
    )
    .expect("writing to a Vec cannot fail");
    let mut vertex = |p: &crate::Vec3, c: [u8; 3]| {
        for x in [p.x, p.y, p.z] {
            out.extend_from_slice(&(x as f32).to_le_bytes());
        }
        out.extend_from_slice(&c);
    };
    for (v, p) in mesh.vertices.iter().enumerate() {
        let label = mesh.vertex_faces(v).iter().find_map(|&f| analysis.face_labels[f as usize]);
        vertex(p, label.map_or(UNLABELED_GRAY, |k| tooth_colors[k]));
    }
    for l in &landmarks {
        vertex(&l.position, landmark_color(l.kind));
    }
    for f in &mesh.faces {
        out.push(3);
        for &i in f {
            out.extend_from_slice(&(i as i32).to_le_bytes());
        }
    }
    Ok(out)
}

/// Serializes `analysis` in the requested format.
pub fn export_annotated(mesh: &IndexedMesh, analysis: &Analysis, format: ExportFormat) -> Result<Vec<u8>, ExportError> {
    match format {
        ExportFormat::Ply => write_ply(mesh, analysis),
        ExportFormat::Json => Ok(analysis.report.to_json().into_bytes()),
    }
}
