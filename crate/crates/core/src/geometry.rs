//! Planar points, 2x2 matrices and rectangular windows.

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

pub type Point = Vector2<f64>;
pub type Mat2 = Matrix2<f64>;

pub fn point(x: f64, y: f64) -> Point {
    Point::new(x, y)
}

/// Signed angle in radians, in `(-pi, pi]`, turning `a` into `b`.
pub fn signed_angle(a: &Point, b: &Point) -> f64 {
    let cross = a.x * b.y - a.y * b.x;
    let dot = a.dot(b);
    cross.atan2(dot)
}

/// Axis-aligned rectangle `[x_min, x_max] x [y_min, y_max]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Window {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Self {
        Self {
            x_min,
            x_max,
            y_min,
            y_max,
        }
    }

    /// Square window `[-h, h]^2`.
    pub fn centered(half_width: f64) -> Self {
        Self::new(-half_width, half_width, -half_width, half_width)
    }

    pub fn from_array(bounds: [f64; 4]) -> Self {
        Self::new(bounds[0], bounds[1], bounds[2], bounds[3])
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.x_min, self.x_max, self.y_min, self.y_max]
    }

    pub fn is_valid(&self) -> bool {
        self.x_min.is_finite()
            && self.x_max.is_finite()
            && self.y_min.is_finite()
            && self.y_max.is_finite()
            && self.x_min < self.x_max
            && self.y_min < self.y_max
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }

    pub fn contains_x(&self, x: f64) -> bool {
        x >= self.x_min && x <= self.x_max
    }

    pub fn contains_y(&self, y: f64) -> bool {
        y >= self.y_min && y <= self.y_max
    }

    /// True when the closed disc of radius `r` about `c` lies in the window.
    pub fn contains_disc(&self, c: &Point, r: f64) -> bool {
        c.x - r >= self.x_min && c.x + r <= self.x_max && c.y - r >= self.y_min && c.y + r <= self.y_max
    }

    /// Largest absolute coordinate values reached in the window.
    pub fn abs_extent(&self) -> (f64, f64) {
        (
            self.x_min.abs().max(self.x_max.abs()),
            self.y_min.abs().max(self.y_max.abs()),
        )
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn intersect(&self, other: &Window) -> Window {
        Window::new(
            self.x_min.max(other.x_min),
            self.x_max.min(other.x_max),
            self.y_min.max(other.y_min),
            self.y_max.min(other.y_max),
        )
    }

    /// Point at fractional coordinates `(u, v)` in `[0,1]^2`.
    pub fn lerp(&self, u: f64, v: f64) -> Point {
        point(self.x_min + u * self.width(), self.y_min + v * self.height())
    }

    /// `n x n` grid including the boundary, row-major in y then x.
    pub fn grid(&self, n: usize) -> Vec<Point> {
        let denom = (n.max(2) - 1) as f64;
        let mut pts = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                pts.push(self.lerp(i as f64 / denom, j as f64 / denom));
            }
        }
        pts
    }
}

/// Eigenvalues of a real 2x2 matrix as `(re, im)` pairs.
pub fn eigenvalues2(m: &Mat2) -> [(f64, f64); 2] {
    let half_tr = 0.5 * m.trace();
    let det = m.determinant();
    let disc = half_tr * half_tr - det;
    if disc >= 0.0 {
        let s = disc.sqrt();
        [(half_tr + s, 0.0), (half_tr - s, 0.0)]
    } else {
        let s = (-disc).sqrt();
        [(half_tr, s), (half_tr, -s)]
    }
}

/// Smallest singular value of a 2x2 matrix.
pub fn min_singular_value(m: &Mat2) -> f64 {
    let ata = m.transpose() * m;
    let half_tr = 0.5 * ata.trace();
    let det = ata.determinant();
    let disc = (half_tr * half_tr - det).max(0.0);
    let s_max = (half_tr + disc.sqrt()).sqrt();
    if s_max == 0.0 {
        return 0.0;
    }
    // s_min s_max = |det m| avoids cancellation for nearly singular m
    m.determinant().abs() / s_max
}

/// Rotation of the plane by `angle` radians.
pub fn rotation_matrix(angle: f64) -> Mat2 {
    let (s, c) = angle.sin_cos();
    Mat2::new(c, -s, s, c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signed_angle_quadrants() {
        let e1 = point(1.0, 0.0);
        assert!((signed_angle(&e1, &point(0.0, 1.0)) - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!((signed_angle(&e1, &point(0.0, -1.0)) + std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!((signed_angle(&e1, &point(-1.0, 0.0)) - std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn window_grid_covers_corners() {
        let w = Window::centered(1.0);
        let g = w.grid(3);
        assert_eq!(g.len(), 9);
        assert_eq!(g[0], point(-1.0, -1.0));
        assert_eq!(g[8], point(1.0, 1.0));
        assert!(w.contains(&g[4]));
        assert!(!w.contains(&point(1.1, 0.0)));
    }

    #[test]
    fn eigenvalues_of_rotation_are_complex() {
        let ev = eigenvalues2(&rotation_matrix(0.3));
        assert!((ev[0].0 - 0.3f64.cos()).abs() < 1e-15);
        assert!((ev[0].1.abs() - 0.3f64.sin()).abs() < 1e-15);
    }

    #[test]
    fn singular_value_of_shear_minus_identity() {
        let m = Mat2::new(0.0, 1.0, 0.0, 0.0);
        assert!(min_singular_value(&m) < 1e-15);
        assert!((min_singular_value(&Mat2::identity()) - 1.0).abs() < 1e-15);
    }
}
