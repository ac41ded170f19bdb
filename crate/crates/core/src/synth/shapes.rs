//! Closed-form crown and gum surfaces.
//!
//! A crown is `min(top, wall)`: a gently domed top made of one cap per
//! cusp, clipped by a steep wall around a rounded-rectangle footprint. The
//! model surface is the maximum of all crowns, the gum and the floor, so
//! every crown meets its surroundings along a sharp concave crease.

use crate::Vec2;

/// Wall slope, rise per unit of run.
pub const WALL_SLOPE: f64 = 5.0;
/// Height of the footprint rim below the crown top, mm.
pub const RIM_DROP: f64 = 2.5;
/// Default share of the buccolingual half width cut from the lingual corners.
pub const LINGUAL_TAPER: f64 = 0.4;

/// Rounded cap `top + dz − s·(√(d² + r²) − r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cusp {
    pub u: f64,
    pub v: f64,
    pub dz: f64,
    pub slope: f64,
    pub radius: f64,
    /// Stretch along `u`, turning the cap into a ridge.
    pub stretch: f64,
}

impl Cusp {
    pub fn round(u: f64, v: f64, dz: f64, slope: f64, radius: f64) -> Cusp {
        Cusp { u, v, dz, slope, radius, stretch: 1.0 }
    }

    fn height(&self, top: f64, u: f64, v: f64) -> f64 {
        let du = (u - self.u) / self.stretch;
        let dv = v - self.v;
        let d2 = du * du + dv * dv;
        top + self.dz - self.slope * ((d2 + self.radius * self.radius).sqrt() - self.radius)
    }
}

/// One crown, or one half of a split molar.
#[derive(Debug, Clone, PartialEq)]
pub struct Body {
    pub centre: Vec2,
    /// Unit vector pointing away from the midline along the arch.
    pub distal: Vec2,
    /// Unit vector pointing out of the arch.
    pub buccal: Vec2,
    pub half_md: f64,
    pub half_bl: f64,
    pub top: f64,
    /// Lingual corners are cut back by this share of the buccolingual half width.
    pub taper: f64,
    pub cusps: Vec<Cusp>,
}

impl Body {
    pub fn local(&self, p: Vec2) -> (f64, f64) {
        let d = p - self.centre;
        (d.dot(&self.distal), d.dot(&self.buccal))
    }

    pub fn world(&self, u: f64, v: f64) -> Vec2 {
        self.centre + self.distal * u + self.buccal * v
    }

    pub fn height(&self, p: Vec2) -> f64 {
        let (u, v) = self.local(p);
        let rho = (u / self.half_md).hypot(v / self.half_bl);
        // Approximate distance to the rim so the wall keeps one slope on long, narrow footprints.
        let g = Vec2::new(u / (self.half_md * self.half_md), v / (self.half_bl * self.half_bl));
        let inside = if rho > 1e-9 {
            (1.0 - rho) * rho / g.norm()
        } else {
            self.half_md.min(self.half_bl)
        };
        let mut wall = self.top - RIM_DROP + WALL_SLOPE * inside;
        // Chamfer planes through (±half_md, 0) and (±(half_md − t), −half_bl).
        if self.taper > 0.0 {
            let t = self.taper * self.half_bl;
            let n = Vec2::new(self.half_bl, -t).normalize();
            let outside = n.x * (u.abs() - self.half_md) + n.y * v;
            wall = wall.min(self.top - RIM_DROP - WALL_SLOPE * outside);
        }
        let cap = self
            .cusps
            .iter()
            .map(|c| c.height(self.top, u, v))
            .fold(f64::NEG_INFINITY, f64::max);
        cap.min(wall)
    }

    /// Cusp apex in plan view plus its height.
    pub fn cusp_apex(&self, c: &Cusp) -> (Vec2, f64) {
        (self.world(c.u, c.v), self.top + c.dz)
    }
}

/// Parabolic arch `y = vertex_y − a·x²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArchShape {
    pub a: f64,
    pub vertex_y: f64,
}

impl ArchShape {
    pub fn y(&self, x: f64) -> f64 {
        self.vertex_y - self.a * x * x
    }

    /// Arc length from the midline to `x ≥ 0`.
    pub fn arc_length(&self, x: f64) -> f64 {
        let u = 2.0 * self.a * x;
        (u * (1.0 + u * u).sqrt() + u.asinh()) / (4.0 * self.a)
    }

    /// Inverse of [`ArchShape::arc_length`].
    pub fn x_at(&self, s: f64) -> f64 {
        let (mut lo, mut hi) = (0.0, s.max(0.0));
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if self.arc_length(mid) < s {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Point, distal direction (for the `+x` side) and buccal direction.
    pub fn frame_at(&self, x: f64) -> (Vec2, Vec2, Vec2) {
        let p = Vec2::new(x, self.y(x));
        let t = Vec2::new(1.0, -2.0 * self.a * x).normalize();
        let n = Vec2::new(2.0 * self.a * x, 1.0).normalize();
        (p, t, n)
    }

    /// Unsigned distance from `p` to the curve.
    pub fn distance(&self, p: Vec2) -> f64 {
        let quad = crate::arch::Quadratic {
            a: -self.a,
            b: 0.0,
            c: self.vertex_y,
        };
        (quad.nearest(p).1 - p).norm()
    }
}

/// Flat gum band along the arch, falling away on both sides.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gum {
    pub arch: ArchShape,
    pub height: f64,
    /// Half width of the flat band.
    pub flat: f64,
    /// Fall-off length beyond the band.
    pub falloff: f64,
}

impl Gum {
    pub fn height(&self, p: Vec2) -> f64 {
        let d = ((self.arch.distance(p) - self.flat) / self.falloff).max(0.0);
        self.height * (-d * d).exp()
    }
}
