//! Small fixed-size vector/matrix helpers and chart-level types.

use serde::{Deserialize, Serialize};
use std::ops::{Add, Div, Mul, Neg, Sub};

/// A point in the chart coordinates of a surface.
///
/// The meaning of `(u, v)` is chart-specific: Cartesian `(x, y)` on flat
/// domains, `(u, theta)` on the surface of revolution, `(phi, theta)` on the
/// spherical cap. Along sampled paths the periodic coordinate is stored
/// lifted (continuous), not wrapped.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub u: f64,
    pub v: f64,
}

impl SurfacePoint {
    pub fn new(u: f64, v: f64) -> Self {
        Self { u, v }
    }

    pub fn chart_dist(&self, other: &SurfacePoint) -> f64 {
        (self.u - other.u).hypot(self.v - other.v)
    }
}

/// A chart tangent vector `(du, dv)` based at a point.
#[derive(Clone, Copy, Debug)]
pub struct Tangent {
    pub base: SurfacePoint,
    pub du: f64,
    pub dv: f64,
}

impl Tangent {
    pub fn new(base: SurfacePoint, du: f64, dv: f64) -> Self {
        Self { base, du, dv }
    }
}

/// Symmetric 2x2 metric tensor at a chart point.
#[derive(Clone, Copy, Debug)]
pub struct Metric2 {
    pub g11: f64,
    pub g12: f64,
    pub g22: f64,
}

impl Metric2 {
    pub fn identity() -> Self {
        Self { g11: 1.0, g12: 0.0, g22: 1.0 }
    }

    pub fn diag(g11: f64, g22: f64) -> Self {
        Self { g11, g12: 0.0, g22 }
    }

    pub fn det(&self) -> f64 {
        self.g11 * self.g22 - self.g12 * self.g12
    }

    pub fn dot(&self, a: (f64, f64), b: (f64, f64)) -> f64 {
        self.g11 * a.0 * b.0 + self.g12 * (a.0 * b.1 + a.1 * b.0) + self.g22 * a.1 * b.1
    }

    pub fn norm(&self, a: (f64, f64)) -> f64 {
        self.dot(a, a).max(0.0).sqrt()
    }

    pub fn is_spd(&self, tol: f64) -> bool {
        self.g11 > tol && self.det() > tol
    }

    /// Unoriented angle between two chart vectors in `[0, pi]`.
    pub fn angle(&self, a: (f64, f64), b: (f64, f64)) -> f64 {
        let c = self.dot(a, b) / (self.norm(a) * self.norm(b));
        c.clamp(-1.0, 1.0).acos()
    }

    pub fn to_array(&self) -> [[f64; 2]; 2] {
        [[self.g11, self.g12], [self.g12, self.g22]]
    }
}

/// Christoffel symbols of the chart connection, `sym.<upper>_<lower lower>`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Christoffel {
    pub u_uu: f64,
    pub u_uv: f64,
    pub u_vv: f64,
    pub v_uu: f64,
    pub v_uv: f64,
    pub v_vv: f64,
}

impl Christoffel {
    /// Geodesic acceleration `-Gamma^k_{ij} w^i w^j` for chart velocity `w`.
    pub fn acceleration(&self, w: (f64, f64)) -> (f64, f64) {
        let (a, b) = w;
        (
            -(self.u_uu * a * a + 2.0 * self.u_uv * a * b + self.u_vv * b * b),
            -(self.v_uu * a * a + 2.0 * self.v_uv * a * b + self.v_vv * b * b),
        )
    }
}

/// Plane vector used by the flat-domain geometry.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct V2 {
    pub x: f64,
    pub y: f64,
}

impl V2 {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, o: V2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: V2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn normalized(self) -> V2 {
        let n = self.norm();
        V2::new(self.x / n, self.y / n)
    }

    /// Rotation by +90 degrees (left normal of a direction).
    pub fn perp(self) -> V2 {
        V2::new(-self.y, self.x)
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn from_angle(a: f64) -> V2 {
        V2::new(a.cos(), a.sin())
    }

    pub fn dist(self, o: V2) -> f64 {
        (self - o).norm()
    }
}

impl Add for V2 {
    type Output = V2;
    fn add(self, o: V2) -> V2 {
        V2::new(self.x + o.x, self.y + o.y)
    }
}
impl Sub for V2 {
    type Output = V2;
    fn sub(self, o: V2) -> V2 {
        V2::new(self.x - o.x, self.y - o.y)
    }
}
impl Mul<f64> for V2 {
    type Output = V2;
    fn mul(self, s: f64) -> V2 {
        V2::new(self.x * s, self.y * s)
    }
}
impl Div<f64> for V2 {
    type Output = V2;
    fn div(self, s: f64) -> V2 {
        V2::new(self.x / s, self.y / s)
    }
}
impl Neg for V2 {
    type Output = V2;
    fn neg(self) -> V2 {
        V2::new(-self.x, -self.y)
    }
}

/// Ambient vector; flat domains embed with `z = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct V3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl V3 {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, o: V3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn normalized(self) -> V3 {
        let n = self.norm();
        V3::new(self.x / n, self.y / n, self.z / n)
    }

    pub fn cross(self, o: V3) -> V3 {
        V3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn dist(self, o: V3) -> f64 {
        (self - o).norm()
    }
}

impl Add for V3 {
    type Output = V3;
    fn add(self, o: V3) -> V3 {
        V3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}
impl Sub for V3 {
    type Output = V3;
    fn sub(self, o: V3) -> V3 {
        V3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}
impl Mul<f64> for V3 {
    type Output = V3;
    fn mul(self, s: f64) -> V3 {
        V3::new(self.x * s, self.y * s, self.z * s)
    }
}
impl Neg for V3 {
    type Output = V3;
    fn neg(self) -> V3 {
        V3::new(-self.x, -self.y, -self.z)
    }
}

/// Wrap an angle-like value into `[0, period)`.
pub fn wrap_into(value: f64, period: f64) -> f64 {
    let mut t = value % period;
    if t < 0.0 {
        t += period;
    }
    t
}

/// Signed difference `a - b` wrapped into `(-period/2, period/2]`.
pub fn wrap_signed(diff: f64, period: f64) -> f64 {
    let mut d = diff % period;
    if d > 0.5 * period {
        d -= period;
    } else if d <= -0.5 * period {
        d += period;
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metric_angle_identity() {
        let g = Metric2::identity();
        let a = g.angle((1.0, 0.0), (0.0, 2.0));
        assert!((a - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn wrap_helpers() {
        let tau = std::f64::consts::TAU;
        assert!((wrap_into(-0.1, tau) - (tau - 0.1)).abs() < 1e-12);
        assert!((wrap_signed(tau - 0.1, tau) + 0.1).abs() < 1e-12);
    }
}
