//! Model orientation: PCA axes, sign checks, and vertical fine-tuning.

use log::warn;
use nalgebra::{Matrix3, Rotation3, SymmetricEigen};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arch::fit_quadratic;
use crate::mesh::IndexedMesh;
use crate::{Vec2, Vec3};

/// Fewer faces than this and the covariance says nothing about arch shape.
pub const MIN_FACES: usize = 100;
const REFINE_BINS: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OrientationError {
    #[error("need at least 3 points for PCA, got {0}")]
    TooFewPoints(usize),
    #[error("point set is {0}; PCA axes are undefined")]
    Degenerate(&'static str),
    #[error("mesh has {count} faces, at least {MIN_FACES} are needed")]
    TooFewFaces { count: usize },
    #[error("mean face normal is nearly horizontal (dot {dot:.2e}); cannot tell up from down")]
    AmbiguousOcclusal { dot: f64 },
    #[error("forwards check failed: {0}")]
    ForwardsFit(String),
}

/// Orthonormal model frame. `right × forwards = up`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub right: Vec3,
    pub forwards: Vec3,
    pub up: Vec3,
    pub occlusal: Vec3,
    pub origin: Vec3,
}

impl Frame {
    pub fn identity() -> Frame {
        Frame {
            right: Vec3::x(),
            forwards: Vec3::y(),
            up: Vec3::z(),
            occlusal: Vec3::z(),
            origin: Vec3::zeros(),
        }
    }

    pub fn left(&self) -> Vec3 {
        -self.right
    }

    pub fn backwards(&self) -> Vec3 {
        -self.forwards
    }

    pub fn down(&self) -> Vec3 {
        -self.up
    }

    /// Coordinates of `p` as (right, forwards, up) components.
    pub fn to_local(&self, p: &Vec3) -> Vec3 {
        let d = p - self.origin;
        Vec3::new(d.dot(&self.right), d.dot(&self.forwards), d.dot(&self.up))
    }

    pub fn from_local(&self, l: &Vec3) -> Vec3 {
        self.origin + self.right * l.x + self.forwards * l.y + self.up * l.z
    }

    pub fn horizontal(&self, p: &Vec3) -> Vec2 {
        let d = p - self.origin;
        Vec2::new(d.dot(&self.right), d.dot(&self.forwards))
    }

    /// Occlusal height of `p` relative to the origin.
    pub fn height(&self, p: &Vec3) -> f64 {
        (p - self.origin).dot(&self.occlusal)
    }

    /// Horizontal direction to 3D.
    pub fn lift(&self, v: Vec2) -> Vec3 {
        self.right * v.x + self.forwards * v.y
    }

    pub fn determinant(&self) -> f64 {
        Matrix3::from_columns(&[self.right, self.forwards, self.up]).determinant()
    }

    /// Frame after applying `p ↦ rot·p + shift` to the model.
    pub fn transformed(&self, rot: &Rotation3<f64>, shift: &Vec3) -> Frame {
        Frame {
            right: rot * self.right,
            forwards: rot * self.forwards,
            up: rot * self.up,
            occlusal: rot * self.occlusal,
            origin: rot * self.origin + shift,
        }
    }

    /// Largest angle in degrees between corresponding axes of two frames.
    pub fn max_axis_angle_deg(&self, other: &Frame) -> f64 {
        [
            (self.right, other.right),
            (self.forwards, other.forwards),
            (self.up, other.up),
        ]
        .iter()
        .map(|(a, b)| a.angle(b).to_degrees())
        .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PcaResult {
    /// Unit axes, largest variance first.
    pub axes: [Vec3; 3],
    pub eigenvalues: [f64; 3],
    pub centroid: Vec3,
}

pub fn pca_axes(points: &[Vec3]) -> Result<PcaResult, OrientationError> {
    if points.len() < 3 {
        return Err(OrientationError::TooFewPoints(points.len()));
    }
    let n = points.len() as f64;
    let centroid = points.iter().sum::<Vec3>() / n;
    let mut cov = Matrix3::<f64>::zeros();
    for p in points {
        let d = p - centroid;
        cov += d * d.transpose();
    }
    cov /= n;
    let eig = SymmetricEigen::new(cov);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let eigenvalues = order.map(|i| eig.eigenvalues[i].max(0.0));
    let axes = order.map(|i| {
        let v: Vec3 = eig.eigenvectors.column(i).into_owned().normalize();
        // Deterministic sign: largest component positive.
        let k = v.iamax();
        if v[k] < 0.0 {
            -v
        } else {
            v
        }
    });
    let tol = 1e-12 * eigenvalues[0].max(f64::MIN_POSITIVE);
    if eigenvalues[0] <= tol || eigenvalues[1] <= tol {
        return Err(OrientationError::Degenerate("collinear"));
    }
    if eigenvalues[2] <= tol {
        return Err(OrientationError::Degenerate("coplanar"));
    }
    Ok(PcaResult {
        axes,
        eigenvalues,
        centroid,
    })
}

/// Area-weighted vertex normals.
pub fn vertex_normals(mesh: &IndexedMesh) -> Vec<Vec3> {
    let mut acc = vec![Vec3::zeros(); mesh.vertex_count()];
    for (f, face) in mesh.faces.iter().enumerate() {
        let w = mesh.face_normals[f] * mesh.face_areas[f];
        for &v in face {
            acc[v as usize] += w;
        }
    }
    acc.into_iter()
        .map(|n| {
            let len = n.norm();
            if len > 0.0 {
                n / len
            } else {
                n
            }
        })
        .collect()
}

/// PCA frame with signs fixed: occlusal agrees with the mean normal, the
/// weighted arch fit is ∩ shaped, and the frame does not mirror.
pub fn orient(mesh: &IndexedMesh) -> Result<Frame, OrientationError> {
    if mesh.face_count() < MIN_FACES {
        return Err(OrientationError::TooFewFaces {
            count: mesh.face_count(),
        });
    }
    let pca = pca_axes(&mesh.vertices)?;
    let [right0, mut forwards, mut up] = pca.axes;

    let mean_normal = mesh.face_normals.iter().sum::<Vec3>() / mesh.face_count() as f64;
    let dot = mean_normal.dot(&up);
    if dot.abs() < 1e-3 {
        return Err(OrientationError::AmbiguousOcclusal { dot });
    }
    if dot < 0.0 {
        up = -up;
    }

    let normals = vertex_normals(mesh);
    let mut pts = Vec::with_capacity(mesh.vertex_count());
    let mut weights = Vec::with_capacity(mesh.vertex_count());
    for (p, n) in mesh.vertices.iter().zip(&normals) {
        let d = p - pca.centroid;
        pts.push(Vec2::new(d.dot(&right0), d.dot(&forwards)));
        weights.push((1.0 - n.dot(&up)).max(0.0));
    }
    let fit = fit_quadratic(&pts, Some(&weights))
        .map_err(|e| OrientationError::ForwardsFit(e.to_string()))?;
    if fit.a > 0.0 {
        forwards = -forwards;
    }

    let right = forwards.cross(&up);
    Ok(Frame {
        right,
        forwards,
        up,
        occlusal: up,
        origin: pca.centroid,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Refinement {
    pub frame: Frame,
    /// Rotation applied about `right`, radians.
    pub pitch: f64,
    pub skipped: bool,
}

/// Levels the frame by fitting a line through the top outline seen from the
/// side. Rotates about `right` only.
pub fn refine_vertical(mesh: &IndexedMesh, frame: &Frame) -> Refinement {
    let skip = |why: &str| {
        warn!("vertical refinement skipped: {why}");
        Refinement {
            frame: *frame,
            pitch: 0.0,
            skipped: true,
        }
    };

    let proj: Vec<(f64, f64)> = mesh
        .vertices
        .iter()
        .map(|p| {
            let d = p - frame.origin;
            (d.dot(&frame.forwards), d.dot(&frame.up))
        })
        .collect();
    let (fmin, fmax) = proj
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(f, _)| (lo.min(f), hi.max(f)));
    if !(fmax > fmin) {
        return skip("model has no forwards extent");
    }

    let mut top: Vec<Option<(f64, f64)>> = vec![None; REFINE_BINS];
    for &(f, u) in &proj {
        let bin = (((f - fmin) / (fmax - fmin)) * REFINE_BINS as f64) as usize;
        let bin = bin.min(REFINE_BINS - 1);
        match top[bin] {
            Some((_, best)) if best >= u => {}
            _ => top[bin] = Some((f, u)),
        }
    }
    let points: Vec<(f64, f64)> = top.into_iter().flatten().collect();
    if points.len() < 3 {
        return skip("fewer than 3 occupied bins");
    }

    let (umin, umax) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, u)| (lo.min(u), hi.max(u)));
    let mut fs: Vec<f64> = points.iter().map(|p| p.0).collect();
    fs.sort_by(f64::total_cmp);
    let mid = fs.len() / 2;
    let median = if fs.len() % 2 == 0 {
        0.5 * (fs[mid - 1] + fs[mid])
    } else {
        fs[mid]
    };
    let spread = points.iter().map(|p| (p.0 - median).abs()).fold(0.0, f64::max);

    let (mut sw, mut sf, mut su, mut sff, mut sfu) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(f, u) in &points {
        let hn = if umax > umin { (u - umin) / (umax - umin) } else { 1.0 };
        let off = if spread > 0.0 { (f - median).abs() / spread } else { 0.0 };
        let w = hn * hn * (1.0 - off).powi(2);
        sw += w;
        sf += w * f;
        su += w * u;
        sff += w * f * f;
        sfu += w * f * u;
    }
    let denom = sw * sff - sf * sf;
    if !(sw > 0.0) || !(denom.abs() > 1e-12 * sw * sff.max(f64::MIN_POSITIVE)) {
        return skip("outline fit is degenerate");
    }
    let slope = (sw * sfu - sf * su) / denom;

    let norm = (1.0 + slope * slope).sqrt();
    let forwards = ((frame.forwards + frame.up * slope) / norm).normalize();
    let up = ((frame.up - frame.forwards * slope) / norm).normalize();
    let refined = Frame {
        right: forwards.cross(&up),
        forwards,
        up,
        occlusal: up,
        origin: frame.origin,
    };
    Refinement {
        frame: refined,
        pitch: slope.atan(),
        skipped: false,
    }
}
