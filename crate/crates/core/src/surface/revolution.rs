//! Surface of revolution with a spherical-cap nose blended C^1 into a
//! straight-line profile tail.
//!
//! The profile is `r(u) = sqrt(u (2 rho_c - u))` (circle of radius `rho_c`
//! through the apex) up to the tangency height `u*`, and `r(u) = a u + b`
//! beyond, with `b = rho_c (sqrt(1 + a^2) - a)` so slopes match. Curvature is
//! `1/rho_c^2` on the nose and `0` on the conical tail, with a jump at the
//! blend. The surface is rotated around the `u` axis and cut at `u = u1`.

use crate::error::Error;
use crate::geom::{V3};
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RevPiece {
    Nose,
    Tail,
}

#[derive(Clone, Debug)]
pub struct RevolutionSurface {
    pub cap_radius: f64,
    pub slope: f64,
    pub cut_height: f64,
    pub blend_u: f64,
    pub line_b: f64,
}

impl RevolutionSurface {
    pub fn new(cap_radius: f64, slope: f64, cut_height: f64) -> Result<Self> {
        if cap_radius <= 0.0 || slope <= 0.0 {
            return Err(Error::ConfigInvalid(
                "cap radius and slope must be positive".into(),
            ));
        }
        let hyp = (1.0 + slope * slope).sqrt();
        let blend_u = cap_radius * (1.0 - slope / hyp);
        if cut_height <= blend_u {
            return Err(Error::ConfigInvalid(
                "cut height must exceed the blend height".into(),
            ));
        }
        let line_b = cap_radius * (hyp - slope);
        Ok(Self {
            cap_radius,
            slope,
            cut_height,
            blend_u,
            line_b,
        })
    }

    /// Cut height that puts the boundary circle at radius `r1`.
    pub fn with_boundary_radius(cap_radius: f64, slope: f64, r1: f64) -> Result<Self> {
        let hyp = (1.0 + slope * slope).sqrt();
        let line_b = cap_radius * (hyp - slope);
        if r1 <= cap_radius / hyp {
            return Err(Error::ConfigInvalid(
                "boundary radius must exceed the blend radius".into(),
            ));
        }
        Self::new(cap_radius, slope, (r1 - line_b) / slope)
    }

    pub fn piece_of(&self, u: f64) -> RevPiece {
        if u <= self.blend_u {
            RevPiece::Nose
        } else {
            RevPiece::Tail
        }
    }

    /// `(r, r', r'')` of the profile at height `u`.
    pub fn profile(&self, u: f64) -> (f64, f64, f64) {
        let rc = self.cap_radius;
        if u <= self.blend_u {
            let r2 = (u * (2.0 * rc - u)).max(0.0);
            let r = r2.sqrt();
            if r < 1e-300 {
                return (0.0, f64::INFINITY, f64::NEG_INFINITY);
            }
            let dr = (rc - u) / r;
            let ddr = -rc * rc / (r2 * r);
            (r, dr, ddr)
        } else {
            (self.slope * u + self.line_b, self.slope, 0.0)
        }
    }

    pub fn boundary_r(&self) -> f64 {
        self.profile(self.cut_height).0
    }

    /// Gauss curvature as a function of `u` only.
    pub fn curvature(&self, u: f64) -> f64 {
        if u <= self.blend_u {
            1.0 / (self.cap_radius * self.cap_radius)
        } else {
            0.0
        }
    }

    /// Meridian arc length between heights, by closed forms on both pieces.
    pub fn meridian_arclen(&self, u_a: f64, u_b: f64) -> f64 {
        if u_b < u_a {
            return self.meridian_arclen(u_b, u_a);
        }
        let rc = self.cap_radius;
        let chi = |u: f64| (1.0 - u / rc).clamp(-1.0, 1.0).acos();
        let hyp = (1.0 + self.slope * self.slope).sqrt();
        let mut acc = 0.0;
        if u_a < self.blend_u {
            let hi = u_b.min(self.blend_u);
            acc += rc * (chi(hi) - chi(u_a));
        }
        if u_b > self.blend_u {
            let lo = u_a.max(self.blend_u);
            acc += hyp * (u_b - lo);
        }
        acc
    }

    /// Antiderivative of `f(u) * r sqrt(1 + r'^2)` anchored at the apex, for
    /// `f = 1` (area) and `f = K` (total curvature), used by the face audits.
    pub fn area_potential(&self, u: f64) -> f64 {
        let rc = self.cap_radius;
        if u <= self.blend_u {
            rc * u
        } else {
            let hyp = (1.0 + self.slope * self.slope).sqrt();
            let line = |x: f64| hyp * (0.5 * self.slope * x * x + self.line_b * x);
            rc * self.blend_u + line(u) - line(self.blend_u)
        }
    }

    pub fn curvature_potential(&self, u: f64) -> f64 {
        (u.min(self.blend_u)) / self.cap_radius
    }

    // --- ambient representation: x = (u, r cos v, r sin v) ---

    pub fn embed(&self, u: f64, theta: f64) -> V3 {
        let (r, _, _) = self.profile(u);
        V3::new(u, r * theta.cos(), r * theta.sin())
    }

    pub fn flow_accel(&self, x: V3, v: V3, piece: RevPiece) -> V3 {
        match piece {
            RevPiece::Nose => {
                // sphere of radius rho_c centered at (rho_c, 0, 0)
                let c = V3::new(self.cap_radius, 0.0, 0.0);
                let rel = x - c;
                rel * (-v.dot(v) / (self.cap_radius * self.cap_radius))
            }
            RevPiece::Tail => {
                // implicit cone y^2 + z^2 = (a u + b)^2
                let a = self.slope;
                let g = a * x.x + self.line_b;
                let grad = V3::new(-2.0 * a * g, 2.0 * x.y, 2.0 * x.z);
                let vhv = 2.0 * (v.y * v.y + v.z * v.z - a * a * v.x * v.x);
                grad * (-vhv / grad.dot(grad))
            }
        }
    }

    /// Pull a drifted state back onto the surface piece.
    pub fn project_point(&self, x: V3, piece: RevPiece) -> V3 {
        match piece {
            RevPiece::Nose => {
                let c = V3::new(self.cap_radius, 0.0, 0.0);
                c + (x - c).normalized() * self.cap_radius
            }
            RevPiece::Tail => {
                let target = self.slope * x.x + self.line_b;
                let rho = x.y.hypot(x.z);
                if rho < 1e-300 {
                    x
                } else {
                    V3::new(x.x, x.y * target / rho, x.z * target / rho)
                }
            }
        }
    }

    /// Surface unit normal at `x` (outward from the axis).
    pub fn normal(&self, x: V3, piece: RevPiece) -> V3 {
        match piece {
            RevPiece::Nose => {
                let c = V3::new(self.cap_radius, 0.0, 0.0);
                (x - c).normalized()
            }
            RevPiece::Tail => {
                let a = self.slope;
                let g = a * x.x + self.line_b;
                V3::new(-a * g, x.y, x.z).normalized()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn surf() -> RevolutionSurface {
        RevolutionSurface::with_boundary_radius(1.0, 0.2, 1.5).unwrap()
    }

    #[test]
    fn blend_is_c1() {
        let s = surf();
        let eps = 1e-9;
        let (r_lo, dr_lo, _) = s.profile(s.blend_u - eps);
        let (r_hi, dr_hi, _) = s.profile(s.blend_u + eps);
        assert!((r_lo - r_hi).abs() < 1e-7);
        assert!((dr_lo - dr_hi).abs() < 1e-6);
        assert!((dr_hi - 0.2).abs() < 1e-7);
    }

    #[test]
    fn boundary_radius_hits_target() {
        let s = surf();
        assert!((s.boundary_r() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn meridian_arclen_matches_chord_sums() {
        let s = surf();
        // graded mesh, quadratic near the apex to resolve r' -> inf there
        let n = 100_000;
        let mut acc = 0.0;
        let mut prev = (0.0, 0.0);
        for k in 1..=n {
            let u = s.cut_height * (k as f64 / n as f64).powi(2);
            let (r, _, _) = s.profile(u);
            acc += (u - prev.0).hypot(r - prev.1);
            prev = (u, r);
        }
        let exact = s.meridian_arclen(0.0, s.cut_height);
        assert!(
            (acc - exact).abs() < 1e-6,
            "chord sum {acc} vs closed form {exact}"
        );
    }

    #[test]
    fn nose_flow_stays_on_sphere() {
        let s = surf();
        let x = s.embed(0.3, 0.7);
        let c = V3::new(1.0, 0.0, 0.0);
        assert!(((x - c).norm() - 1.0).abs() < 1e-12);
        let acc = s.flow_accel(x, V3::new(0.0, 0.4, 0.3), RevPiece::Nose);
        // acceleration is parallel to the sphere radius vector
        assert!(acc.cross(x - c).norm() < 1e-12);
    }
}
