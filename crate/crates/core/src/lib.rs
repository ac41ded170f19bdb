//! Automatic tooth segmentation, identification and landmarking for scanned
//! dental arches.

pub mod arch;
pub mod assignment;
pub mod curvature;
pub mod landmarks;
pub mod mesh;
pub mod orientation;
pub mod peaks;
pub mod pipeline;
pub mod segmentation;
pub mod synth;

/// Millimetre-scale 3D vector used throughout.
pub type Vec3 = nalgebra::Vector3<f64>;
/// Horizontal-plane vector in frame coordinates (x right, y forwards).
pub type Vec2 = nalgebra::Vector2<f64>;
