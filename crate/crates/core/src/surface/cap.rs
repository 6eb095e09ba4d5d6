//! Spherical cap: the region of a round sphere of radius `R` with colatitude
//! at most `phi1 < pi/2`, in the chart `(phi, theta)`.

use crate::error::Error;
use crate::geom::V3;
use crate::Result;

#[derive(Clone, Debug)]
pub struct SphericalCap {
    pub radius: f64,
    pub colatitude: f64,
}

impl SphericalCap {
    pub fn new(radius: f64, colatitude: f64) -> Result<Self> {
        if radius <= 0.0 {
            return Err(Error::ConfigInvalid("sphere radius must be positive".into()));
        }
        if !(0.0 < colatitude && colatitude < std::f64::consts::FRAC_PI_2) {
            return Err(Error::ConfigInvalid(
                "colatitude cut must lie in (0, pi/2) for strict convexity".into(),
            ));
        }
        Ok(Self { radius, colatitude })
    }

    pub fn embed(&self, phi: f64, theta: f64) -> V3 {
        let r = self.radius;
        V3::new(
            r * phi.sin() * theta.cos(),
            r * phi.sin() * theta.sin(),
            r * phi.cos(),
        )
    }

    pub fn flow_accel(&self, x: V3, v: V3) -> V3 {
        x * (-v.dot(v) / (self.radius * self.radius))
    }

    pub fn project_point(&self, x: V3) -> V3 {
        x.normalized() * self.radius
    }

    /// Boundary circle geodesic curvature w.r.t. the inward normal.
    pub fn boundary_kg(&self) -> f64 {
        1.0 / (self.radius * self.colatitude.tan())
    }

    /// Antiderivatives of `f * sqrt(det g)` in `phi`, anchored at the pole.
    pub fn area_potential(&self, phi: f64) -> f64 {
        self.radius * self.radius * (1.0 - phi.cos())
    }

    pub fn curvature_potential(&self, phi: f64) -> f64 {
        1.0 - phi.cos()
    }
}
