use log::warn;
use serde::{Deserialize, Serialize};

use crate::arch::{ArchCurve, Direction};
use crate::mesh::{surface_area, IndexedMesh};
use crate::segmentation::faces_centroid;
use crate::Vec3;

/// Depth below a blob's top at which pointiness is measured, mm.
const POINTINESS_DEPTH: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Characteristic {
    Area,
    MesiodistalWidth,
    BuccolingualWidth,
    Pointiness,
}

impl Characteristic {
    pub const ALL: [Characteristic; 4] = [
        Characteristic::Area,
        Characteristic::MesiodistalWidth,
        Characteristic::BuccolingualWidth,
        Characteristic::Pointiness,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Characteristic::Area => "area",
            Characteristic::MesiodistalWidth => "mesiodistal_width",
            Characteristic::BuccolingualWidth => "buccolingual_width",
            Characteristic::Pointiness => "pointiness",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Characteristics {
    /// mm²
    pub area: f64,
    /// mm
    pub mesiodistal_width: f64,
    /// mm
    pub buccolingual_width: f64,
    /// Width near the top over full width, in (0, 1].
    pub pointiness: f64,
}

impl Characteristics {
    pub fn get(&self, c: Characteristic) -> f64 {
        match c {
            Characteristic::Area => self.area,
            Characteristic::MesiodistalWidth => self.mesiodistal_width,
            Characteristic::BuccolingualWidth => self.buccolingual_width,
            Characteristic::Pointiness => self.pointiness,
        }
    }
}

fn extent(points: impl Iterator<Item = Vec3>, dir: &Vec3) -> f64 {
    let (lo, hi) = points.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
        let d = p.dot(dir);
        (lo.min(d), hi.max(d))
    });
    if hi >= lo {
        hi - lo
    } else {
        0.0
    }
}

/// Measures a blob. Directions are taken at the blob's centroid.
pub fn measure_characteristics(faces: &[u32], mesh: &IndexedMesh, arch: &ArchCurve) -> Characteristics {
    let frame = &arch.frame;
    let centre = faces_centroid(mesh, faces);
    let at = frame.horizontal(&centre);
    let distal = arch.direction_at(at, Direction::Distal);
    let buccal = arch.direction_at(at, Direction::Buccal);

    let mut verts: Vec<u32> = faces.iter().flat_map(|&f| mesh.faces[f as usize]).collect();
    verts.sort_unstable();
    verts.dedup();
    let pts = || verts.iter().map(|&v| mesh.vertices[v as usize]);
    let md = extent(pts(), &distal);
    let bl = extent(pts(), &buccal);

    let heights: Vec<f64> = pts().map(|p| frame.height(&p)).collect();
    let top = heights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let bottom = heights.iter().copied().fold(f64::INFINITY, f64::min);
    let pointiness = if top - bottom < POINTINESS_DEPTH || md <= 0.0 {
        warn!("blob is under {POINTINESS_DEPTH} mm tall; pointiness set to 1");
        1.0
    } else {
        let level = top - POINTINESS_DEPTH;
        let mut section: Vec<Vec3> = pts().filter(|p| frame.height(p) >= level).collect();
        // Where edges cross the cutting plane.
        for &f in faces {
            let tri = mesh.faces[f as usize];
            for k in 0..3 {
                let (a, b) = (mesh.vertices[tri[k] as usize], mesh.vertices[tri[(k + 1) % 3] as usize]);
                let (ha, hb) = (frame.height(&a) - level, frame.height(&b) - level);
                if (ha < 0.0) != (hb < 0.0) {
                    section.push(a + (b - a) * (ha / (ha - hb)));
                }
            }
        }
        (extent(section.into_iter(), &distal) / md).clamp(f64::MIN_POSITIVE, 1.0)
    };

    Characteristics {
        area: surface_area(mesh, faces),
        mesiodistal_width: md,
        buccolingual_width: bl,
        pointiness,
    }
}
