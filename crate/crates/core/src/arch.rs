//! Quadratic jaw curve in the horizontal plane.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::orientation::Frame;
use crate::{Vec2, Vec3};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ArchError {
    #[error("need at least 3 weighted points with distinct x, got {distinct}")]
    TooFewPoints { distinct: usize },
    #[error("normal equations are singular")]
    Singular,
    #[error("weights and points differ in length ({weights} vs {points})")]
    WeightLength { weights: usize, points: usize },
}

/// `y = a x² + b x + c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quadratic {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Mesial,
    Distal,
    Buccal,
    Lingual,
}

/// Least-squares fit minimizing `Σ w (y − a x² − b x − c)²`.
pub fn fit_quadratic(points: &[Vec2], weights: Option<&[f64]>) -> Result<Quadratic, ArchError> {
    if let Some(w) = weights {
        if w.len() != points.len() {
            return Err(ArchError::WeightLength {
                weights: w.len(),
                points: points.len(),
            });
        }
    }
    let weight = |i: usize| weights.map_or(1.0, |w| w[i]);

    let mut xs: Vec<f64> = (0..points.len())
        .filter(|&i| weight(i) > 0.0)
        .map(|i| points[i].x)
        .collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    if xs.len() < 3 {
        return Err(ArchError::TooFewPoints { distinct: xs.len() });
    }

    // Centre and scale x for conditioning.
    let mut wsum = 0.0;
    let mut mean = 0.0;
    for (i, p) in points.iter().enumerate() {
        wsum += weight(i);
        mean += weight(i) * p.x;
    }
    mean /= wsum;
    let scale = points
        .iter()
        .map(|p| (p.x - mean).abs())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);

    let mut ata = Matrix3::<f64>::zeros();
    let mut aty = Vector3::<f64>::zeros();
    for (i, p) in points.iter().enumerate() {
        let w = weight(i);
        if w == 0.0 {
            continue;
        }
        let u = (p.x - mean) / scale;
        let row = Vector3::new(u * u, u, 1.0);
        ata += w * row * row.transpose();
        aty += w * p.y * row;
    }
    let sol = ata.lu().solve(&aty).ok_or(ArchError::Singular)?;
    if !sol.iter().all(|v| v.is_finite()) {
        return Err(ArchError::Singular);
    }
    let (qa, qb, qc) = (sol[0], sol[1], sol[2]);
    let s2 = scale * scale;
    Ok(Quadratic {
        a: qa / s2,
        b: qb / scale - 2.0 * qa * mean / s2,
        c: qa * mean * mean / s2 - qb * mean / scale + qc,
    })
}

impl Quadratic {
    pub fn eval(&self, x: f64) -> f64 {
        (self.a * x + self.b) * x + self.c
    }

    pub fn slope(&self, x: f64) -> f64 {
        2.0 * self.a * x + self.b
    }

    /// Nearest point on the curve to `p`, as `(x, point)`.
    pub fn nearest(&self, p: Vec2) -> (f64, Vec2) {
        // d/dx of the squared distance, divided by 2:
        // 2a²x³ + 3ab x² + (b² + 2a r + 1) x + (b r − px), r = c − py
        let (a, b) = (self.a, self.b);
        let r = self.c - p.y;
        let coeffs = [2.0 * a * a, 3.0 * a * b, b * b + 2.0 * a * r + 1.0, b * r - p.x];
        let mut best_x = p.x;
        let mut best_d = f64::INFINITY;
        for x in real_cubic_roots(coeffs) {
            let x = polish(coeffs, x);
            let d = (x - p.x).powi(2) + (self.eval(x) - p.y).powi(2);
            if d < best_d || (d == best_d && x < best_x) {
                best_d = d;
                best_x = x;
            }
        }
        (best_x, Vec2::new(best_x, self.eval(best_x)))
    }

    /// Unit distal tangent at curve parameter `x`.
    pub fn distal_at(&self, x: f64) -> Vec2 {
        let d = self.slope(x);
        let t = Vec2::new(1.0, d).normalize();
        if d >= 0.0 {
            -t
        } else {
            t
        }
    }

    /// Unit normal on the positive-y side at curve parameter `x`.
    pub fn buccal_at(&self, x: f64) -> Vec2 {
        Vec2::new(-self.slope(x), 1.0).normalize()
    }
}

fn polish(c: [f64; 4], mut x: f64) -> f64 {
    for _ in 0..4 {
        let f = ((c[0] * x + c[1]) * x + c[2]) * x + c[3];
        let df = (3.0 * c[0] * x + 2.0 * c[1]) * x + c[2];
        if df == 0.0 || !f.is_finite() {
            break;
        }
        let step = f / df;
        if !step.is_finite() {
            break;
        }
        x -= step;
        if step.abs() <= 1e-15 * x.abs().max(1.0) {
            break;
        }
    }
    x
}

/// Real roots of `c0 x³ + c1 x² + c2 x + c3`.
fn real_cubic_roots(c: [f64; 4]) -> Vec<f64> {
    let scale = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return vec![0.0];
    }
    if c[0].abs() <= 1e-14 * scale {
        // Quadratic or linear.
        let (qa, qb, qc) = (c[1], c[2], c[3]);
        if qa.abs() <= 1e-14 * scale {
            return if qb != 0.0 { vec![-qc / qb] } else { vec![] };
        }
        let disc = qb * qb - 4.0 * qa * qc;
        if disc < 0.0 {
            return vec![-qb / (2.0 * qa)];
        }
        let sq = disc.sqrt();
        let q = -0.5 * (qb + qb.signum() * sq);
        let mut roots = vec![q / qa];
        if q != 0.0 {
            roots.push(qc / q);
        }
        return roots;
    }
    let (b, cc, d) = (c[1] / c[0], c[2] / c[0], c[3] / c[0]);
    // Depressed cubic t³ + p t + q with x = t − b/3.
    let shift = b / 3.0;
    let p = cc - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * cc / 3.0 + d;
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
    if disc > 0.0 {
        let sq = disc.sqrt();
        let u = (-q / 2.0 + sq).cbrt();
        let v = (-q / 2.0 - sq).cbrt();
        vec![u + v - shift]
    } else if p == 0.0 {
        vec![-shift]
    } else {
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        (0..3)
            .map(|k| m * (theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos() - shift)
            .collect()
    }
}

/// Jaw curve together with the frame that maps it to 3D.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArchCurve {
    pub quad: Quadratic,
    pub frame: Frame,
}

impl ArchCurve {
    /// Fits to the horizontal components of `points` in `frame`.
    pub fn fit(frame: Frame, points: &[Vec3], weights: Option<&[f64]>) -> Result<Self, ArchError> {
        let flat: Vec<Vec2> = points.iter().map(|p| frame.horizontal(p)).collect();
        Ok(ArchCurve {
            quad: fit_quadratic(&flat, weights)?,
            frame,
        })
    }

    /// Arc parameter (x of the nearest curve point) and the nearest point.
    pub fn project_onto(&self, point: Vec2) -> (f64, Vec2) {
        self.quad.nearest(point)
    }

    pub fn param_of(&self, p: &Vec3) -> f64 {
        self.quad.nearest(self.frame.horizontal(p)).0
    }

    /// Stable left-to-right order of `points` by arc parameter.
    pub fn order_by_arch(&self, points: &[Vec2]) -> Vec<usize> {
        let s: Vec<f64> = points.iter().map(|p| self.quad.nearest(*p).0).collect();
        let mut idx: Vec<usize> = (0..points.len()).collect();
        idx.sort_by(|&i, &j| s[i].total_cmp(&s[j]));
        idx
    }

    /// 2D direction at the projection of `point`.
    pub fn direction_2d(&self, point: Vec2, which: Direction) -> Vec2 {
        let (x, _) = self.quad.nearest(point);
        match which {
            Direction::Distal => self.quad.distal_at(x),
            Direction::Mesial => -self.quad.distal_at(x),
            Direction::Buccal => self.quad.buccal_at(x),
            Direction::Lingual => -self.quad.buccal_at(x),
        }
    }

    /// 3D unit direction at the projection of `point`.
    pub fn direction_at(&self, point: Vec2, which: Direction) -> Vec3 {
        self.frame.lift(self.direction_2d(point, which))
    }

    /// Signed horizontal distance of `p` from the curve along the local
    /// buccal normal; positive on the buccal side.
    pub fn buccal_offset(&self, p: &Vec3) -> f64 {
        let h = self.frame.horizontal(p);
        let (x, near) = self.quad.nearest(h);
        (h - near).dot(&self.quad.buccal_at(x))
    }
}
