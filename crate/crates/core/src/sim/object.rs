use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{Rotation2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec2 = Vector2<f64>;

/// z-component of the planar cross product.
pub fn cross(a: &Vec2, b: &Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

/// `a` rotated by +90°, i.e. `z × a`.
pub fn perp(a: &Vec2) -> Vec2 {
    Vec2::new(-a.y, a.x)
}

pub fn rotate(a: &Vec2, angle: f64) -> Vec2 {
    Rotation2::new(angle) * a
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Square,
    Circle,
    RegularHexagon,
    EquilateralTriangle,
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Shape::Square => "square",
            Shape::Circle => "circle",
            Shape::RegularHexagon => "hexagon",
            Shape::EquilateralTriangle => "triangle",
        })
    }
}

impl FromStr for Shape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "square" => Shape::Square,
            "circle" => Shape::Circle,
            "hexagon" | "regular_hexagon" => Shape::RegularHexagon,
            "triangle" | "equilateral_triangle" => Shape::EquilateralTriangle,
            _ => return Err(Error::Parse(format!("unknown shape `{s}`"))),
        })
    }
}

/// Planar pose: centroid position (mm) and yaw (rad).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose2 {
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
}

impl Pose2 {
    pub fn new(x: f64, y: f64, yaw: f64) -> Self {
        Self { x, y, yaw }
    }

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    pub fn transform(&self, local: &Vec2) -> Vec2 {
        self.position() + rotate(local, self.yaw)
    }
}

/// Convex rigid object moved in the grasp plane.
///
/// `width` is the side length of the square, the diameter of the circle,
/// the flat-to-flat distance of the hexagon and the side of the triangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigidObject2D {
    pub shape: Shape,
    pub width: f64,
    pub pose: Pose2,
}

impl RigidObject2D {
    pub fn new(shape: Shape, width: f64, pose: Pose2) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::Domain(format!("object width must be positive, got {width}")));
        }
        Ok(Self { shape, width, pose })
    }

    pub fn is_circle(&self) -> bool {
        self.shape == Shape::Circle
    }

    pub fn radius(&self) -> f64 {
        0.5 * self.width
    }

    /// Characteristic length used to weigh rotations against translations.
    pub fn char_length(&self) -> f64 {
        0.5 * self.width
    }

    /// Vertices in the body frame, counter-clockwise. Empty for a circle.
    ///
    /// At zero yaw the square and hexagon present a flat face to either
    /// side (±x); the triangle presents a flat face to −x and a vertex to +x.
    pub fn local_vertices(&self) -> Vec<Vec2> {
        let w = self.width;
        let ring = |n: usize, r: f64, phase: f64| -> Vec<Vec2> {
            (0..n)
                .map(|i| {
                    let a = phase + 2.0 * PI * i as f64 / n as f64;
                    Vec2::new(r * a.cos(), r * a.sin())
                })
                .collect()
        };
        match self.shape {
            Shape::Circle => Vec::new(),
            Shape::Square => ring(4, w / 2f64.sqrt(), PI / 4.0),
            Shape::RegularHexagon => ring(6, w / 3f64.sqrt(), PI / 6.0),
            // Circumradius w/sqrt(3); vertex at +x, flat face at -x.
            Shape::EquilateralTriangle => ring(3, w / 3f64.sqrt(), 0.0),
        }
    }

    pub fn world_vertices(&self) -> Vec<Vec2> {
        self.local_vertices().iter().map(|v| self.pose.transform(v)).collect()
    }

    /// Signed distance from `p` to the boundary; negative inside.
    pub fn signed_distance(&self, p: &Vec2) -> f64 {
        if self.is_circle() {
            return (p - self.pose.position()).norm() - self.radius();
        }
        let vs = self.world_vertices();
        let n = vs.len();
        let mut inside_depth = f64::INFINITY;
        let mut outside = 0.0f64;
        let mut any_out = false;
        for i in 0..n {
            let a = vs[i];
            let b = vs[(i + 1) % n];
            let e = b - a;
            // Outward normal of a counter-clockwise polygon.
            let nrm = Vec2::new(e.y, -e.x).normalize();
            let d = (p - a).dot(&nrm);
            if d > 0.0 {
                any_out = true;
            }
            inside_depth = inside_depth.min(-d);
            outside = outside.max(d);
        }
        if !any_out {
            return -inside_depth;
        }
        // Outside: exact distance to the closest edge.
        (0..n)
            .map(|i| point_segment_distance(p, &vs[i], &vs[(i + 1) % n]))
            .fold(f64::INFINITY, f64::min)
            .max(outside.min(0.0))
    }
}

pub fn point_segment_distance(p: &Vec2, a: &Vec2, b: &Vec2) -> f64 {
    (p - closest_on_segment(p, a, b).0).norm()
}

/// Closest point on segment `ab` to `p`, and its parameter in `[0, 1]`.
pub fn closest_on_segment(p: &Vec2, a: &Vec2, b: &Vec2) -> (Vec2, f64) {
    let e = b - a;
    let len2 = e.norm_squared();
    if len2 == 0.0 {
        return (*a, 0.0);
    }
    let s = ((p - a).dot(&e) / len2).clamp(0.0, 1.0);
    (a + e * s, s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn widths_are_flat_to_flat() {
        for shape in [Shape::Square, Shape::RegularHexagon] {
            let o = RigidObject2D::new(shape, 50.0, Pose2::default()).unwrap();
            let xs: Vec<f64> = o.world_vertices().iter().map(|v| v.x).collect();
            let span = xs.iter().cloned().fold(f64::MIN, f64::max) - xs.iter().cloned().fold(f64::MAX, f64::min);
            assert_abs_diff_eq!(span, 50.0, epsilon = 1e-9);
        }
        let t = RigidObject2D::new(Shape::EquilateralTriangle, 50.0, Pose2::default()).unwrap();
        let v = t.world_vertices();
        assert_abs_diff_eq!((v[1] - v[2]).norm(), 50.0, epsilon = 1e-9);
        assert_abs_diff_eq!(v[1].x, v[2].x, epsilon = 1e-9);
    }

    #[test]
    fn signed_distance_square() {
        let o = RigidObject2D::new(Shape::Square, 40.0, Pose2::new(1.0, 2.0, 0.0)).unwrap();
        assert_abs_diff_eq!(o.signed_distance(&Vec2::new(1.0, 2.0)), -20.0, epsilon = 1e-9);
        assert_abs_diff_eq!(o.signed_distance(&Vec2::new(24.0, 2.0)), 3.0, epsilon = 1e-9);
        assert_abs_diff_eq!(o.signed_distance(&Vec2::new(24.0, 25.0)), (18.0f64).sqrt(), epsilon = 1e-9);
    }

    #[test]
    fn rejects_non_positive_width() {
        assert!(RigidObject2D::new(Shape::Circle, 0.0, Pose2::default()).is_err());
    }
}
