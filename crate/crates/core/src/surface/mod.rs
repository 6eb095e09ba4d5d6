//! Surface catalog: chart data (metric, Christoffel symbols, curvature),
//! boundary data (frame, geodesic curvature, projection) and the ambient
//! representation used by the geodesic integrator.

pub mod cap;
pub mod flat;
pub mod revolution;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::geom::{wrap_into, Christoffel, Metric2, SurfacePoint, Tangent, V2, V3};
use crate::Result;

pub use cap::SphericalCap;
pub use flat::{FlatDomain, Piece};
pub use revolution::{RevPiece, RevolutionSurface};

const TAU: f64 = std::f64::consts::TAU;

/// Serializable surface descriptor; see the README for the exact field names.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum SurfaceSpec {
    FlatConvexDomain(FlatParams),
    SurfaceOfRevolution(RevParams),
    SphericalCap(CapParams),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum FlatParams {
    Disk {
        radius: f64,
    },
    Sector {
        radius: f64,
        angle: f64,
        #[serde(default)]
        corner_radius: f64,
    },
    Triangle {
        vertices: [[f64; 2]; 3],
        #[serde(default)]
        corner_radius: f64,
        /// Rescale the triangle to unit area before rounding.
        #[serde(default)]
        unit_area: bool,
    },
    Polygon {
        vertices: Vec<[f64; 2]>,
        #[serde(default)]
        corner_radius: f64,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RevParams {
    pub cap_radius: f64,
    pub slope: f64,
    /// Either the cut height `u1` or the boundary radius `r(u1)` must be set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cut_height: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary_radius: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CapParams {
    pub radius: f64,
    pub colatitude: f64,
}

/// A built surface with precomputed boundary data.
#[derive(Clone, Debug)]
pub enum Surface {
    Flat(FlatDomain),
    Revolution(RevolutionSurface),
    Cap(SphericalCap),
}

/// Boundary frame at arc parameter `s`.
#[derive(Clone, Copy, Debug)]
pub struct BoundaryFrame {
    pub point: SurfacePoint,
    pub tangent: Tangent,
    pub inward: Tangent,
    pub kg: f64,
}

impl Surface {
    pub fn build(spec: &SurfaceSpec) -> Result<Surface> {
        match spec {
            SurfaceSpec::FlatConvexDomain(p) => Ok(Surface::Flat(match p {
                FlatParams::Disk { radius } => FlatDomain::disk(*radius)?,
                FlatParams::Sector {
                    radius,
                    angle,
                    corner_radius,
                } => FlatDomain::rounded_sector(*radius, *angle, *corner_radius)?,
                FlatParams::Triangle {
                    vertices,
                    corner_radius,
                    unit_area,
                } => {
                    let v = [
                        V2::new(vertices[0][0], vertices[0][1]),
                        V2::new(vertices[1][0], vertices[1][1]),
                        V2::new(vertices[2][0], vertices[2][1]),
                    ];
                    if *unit_area {
                        FlatDomain::triangle_unit_area(v, *corner_radius)?
                    } else {
                        FlatDomain::rounded_polygon(&v, *corner_radius)?
                    }
                }
                FlatParams::Polygon {
                    vertices,
                    corner_radius,
                } => {
                    let v: Vec<V2> = vertices.iter().map(|p| V2::new(p[0], p[1])).collect();
                    FlatDomain::rounded_polygon(&v, *corner_radius)?
                }
            })),
            SurfaceSpec::SurfaceOfRevolution(p) => {
                let surf = match (p.cut_height, p.boundary_radius) {
                    (Some(u1), None) => RevolutionSurface::new(p.cap_radius, p.slope, u1)?,
                    (None, Some(r1)) => {
                        RevolutionSurface::with_boundary_radius(p.cap_radius, p.slope, r1)?
                    }
                    _ => {
                        return Err(Error::ConfigInvalid(
                            "set exactly one of cut_height, boundary_radius".into(),
                        ))
                    }
                };
                Ok(Surface::Revolution(surf))
            }
            SurfaceSpec::SphericalCap(p) => {
                Ok(Surface::Cap(SphericalCap::new(p.radius, p.colatitude)?))
            }
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Surface::Flat(_) => "flat_convex_domain",
            Surface::Revolution(_) => "surface_of_revolution",
            Surface::Cap(_) => "spherical_cap",
        }
    }

    pub fn as_flat(&self) -> Option<&FlatDomain> {
        match self {
            Surface::Flat(d) => Some(d),
            _ => None,
        }
    }

    pub fn as_revolution(&self) -> Option<&RevolutionSurface> {
        match self {
            Surface::Revolution(r) => Some(r),
            _ => None,
        }
    }

    pub fn as_cap(&self) -> Option<&SphericalCap> {
        match self {
            Surface::Cap(c) => Some(c),
            _ => None,
        }
    }

    // ---- chart data ----

    fn chart_ok(&self, p: SurfacePoint) -> bool {
        match self {
            Surface::Flat(d) => d.signed_inside(V2::new(p.u, p.v)) >= -1e-9 * (1.0 + d.diameter()),
            Surface::Revolution(r) => p.u > 0.0 && p.u <= r.cut_height + 1e-9,
            Surface::Cap(c) => p.u > 0.0 && p.u <= c.colatitude + 1e-9,
        }
    }

    /// Closed-domain membership. On the rotational charts this includes the
    /// apex, which the chart itself does not cover (`metric_at` rejects it).
    pub fn contains(&self, p: SurfacePoint, tol: f64) -> bool {
        match self {
            Surface::Flat(d) => d.signed_inside(V2::new(p.u, p.v)) >= -tol,
            Surface::Revolution(r) => p.u >= -tol && p.u <= r.cut_height + tol,
            Surface::Cap(c) => p.u >= -tol && p.u <= c.colatitude + tol,
        }
    }

    pub fn metric_at(&self, p: SurfacePoint) -> Result<Metric2> {
        if !self.chart_ok(p) {
            return Err(Error::PointOutsideDomain { u: p.u, v: p.v });
        }
        Ok(match self {
            Surface::Flat(_) => Metric2::identity(),
            Surface::Revolution(r) => {
                let (rr, dr, _) = r.profile(p.u);
                Metric2::diag(1.0 + dr * dr, rr * rr)
            }
            Surface::Cap(c) => {
                let r2 = c.radius * c.radius;
                Metric2::diag(r2, r2 * p.u.sin().powi(2))
            }
        })
    }

    pub fn christoffel_at(&self, p: SurfacePoint) -> Result<Christoffel> {
        if !self.chart_ok(p) {
            return Err(Error::PointOutsideDomain { u: p.u, v: p.v });
        }
        Ok(match self {
            Surface::Flat(_) => Christoffel::default(),
            Surface::Revolution(r) => {
                let (rr, dr, ddr) = r.profile(p.u);
                let w = 1.0 + dr * dr;
                Christoffel {
                    u_uu: dr * ddr / w,
                    u_vv: -rr * dr / w,
                    v_uv: dr / rr,
                    ..Default::default()
                }
            }
            Surface::Cap(_) => Christoffel {
                u_vv: -p.u.sin() * p.u.cos(),
                v_uv: 1.0 / p.u.tan(),
                ..Default::default()
            },
        })
    }

    pub fn gauss_curvature_at(&self, p: SurfacePoint) -> Result<f64> {
        if !self.chart_ok(p) {
            return Err(Error::PointOutsideDomain { u: p.u, v: p.v });
        }
        Ok(match self {
            Surface::Flat(_) => 0.0,
            Surface::Revolution(r) => r.curvature(p.u),
            Surface::Cap(c) => 1.0 / (c.radius * c.radius),
        })
    }

    // ---- boundary ----

    pub fn boundary_total(&self) -> f64 {
        match self {
            Surface::Flat(d) => d.boundary_total(),
            Surface::Revolution(r) => TAU * r.boundary_r(),
            Surface::Cap(c) => TAU * c.radius * c.colatitude.sin(),
        }
    }

    pub fn boundary_eval(&self, s: f64) -> BoundaryFrame {
        match self {
            Surface::Flat(d) => {
                let (p, t, n, kg) = d.boundary_frame(s);
                let bp = SurfacePoint::new(p.x, p.y);
                BoundaryFrame {
                    point: bp,
                    tangent: Tangent::new(bp, t.x, t.y),
                    inward: Tangent::new(bp, n.x, n.y),
                    kg,
                }
            }
            Surface::Revolution(r) => {
                let r1 = r.boundary_r();
                let (_, dr1, _) = r.profile(r.cut_height);
                let theta = wrap_into(s, TAU * r1) / r1;
                let p = SurfacePoint::new(r.cut_height, theta);
                let hyp = (1.0 + dr1 * dr1).sqrt();
                BoundaryFrame {
                    point: p,
                    tangent: Tangent::new(p, 0.0, 1.0 / r1),
                    inward: Tangent::new(p, -1.0 / hyp, 0.0),
                    kg: dr1 / (r1 * hyp),
                }
            }
            Surface::Cap(c) => {
                let rs = c.radius * c.colatitude.sin();
                let theta = wrap_into(s, TAU * rs) / rs;
                let p = SurfacePoint::new(c.colatitude, theta);
                BoundaryFrame {
                    point: p,
                    tangent: Tangent::new(p, 0.0, 1.0 / rs),
                    inward: Tangent::new(p, -1.0 / c.radius, 0.0),
                    kg: c.boundary_kg(),
                }
            }
        }
    }

    /// Closest boundary point `(s, geodesic distance)`; ties break to the
    /// smallest `s`.
    pub fn project_to_boundary(&self, p: SurfacePoint) -> Result<(f64, f64)> {
        if !self.contains(p, 1e-9 * (1.0 + self.diameter_estimate())) {
            return Err(Error::PointOutsideDomain { u: p.u, v: p.v });
        }
        Ok(match self {
            Surface::Flat(d) => d.closest_boundary(V2::new(p.u, p.v)),
            Surface::Revolution(r) => {
                let theta = wrap_into(p.v, TAU);
                (theta * r.boundary_r(), r.meridian_arclen(p.u, r.cut_height))
            }
            Surface::Cap(c) => {
                let theta = wrap_into(p.v, TAU);
                (
                    theta * c.radius * c.colatitude.sin(),
                    c.radius * (c.colatitude - p.u),
                )
            }
        })
    }

    /// Signed distance-like boundary gap in the chart, positive inside.
    pub fn signed_inside(&self, p: SurfacePoint) -> f64 {
        match self {
            Surface::Flat(d) => d.signed_inside(V2::new(p.u, p.v)),
            Surface::Revolution(r) => r.meridian_arclen(p.u.min(r.cut_height), r.cut_height)
                * if p.u <= r.cut_height { 1.0 } else { -1.0 },
            Surface::Cap(c) => c.radius * (c.colatitude - p.u),
        }
    }

    // ---- ambient representation ----

    pub fn embed(&self, p: SurfacePoint) -> V3 {
        match self {
            Surface::Flat(_) => V3::new(p.u, p.v, 0.0),
            Surface::Revolution(r) => r.embed(p.u, p.v),
            Surface::Cap(c) => c.embed(p.u, p.v),
        }
    }

    /// Chart coordinates of an ambient point; the periodic coordinate is
    /// lifted to be continuous near `v_hint`.
    pub fn chart_of(&self, x: V3, v_hint: f64) -> SurfacePoint {
        match self {
            Surface::Flat(_) => SurfacePoint::new(x.x, x.y),
            Surface::Revolution(_) => {
                let rho = x.y.hypot(x.z);
                let theta = if rho < 1e-13 {
                    v_hint
                } else {
                    lift(x.z.atan2(x.y), v_hint)
                };
                SurfacePoint::new(x.x, theta)
            }
            Surface::Cap(c) => {
                let phi = (x.z / c.radius).clamp(-1.0, 1.0).acos();
                let rho = x.x.hypot(x.y);
                let theta = if rho < 1e-13 * c.radius {
                    v_hint
                } else {
                    lift(x.y.atan2(x.x), v_hint)
                };
                SurfacePoint::new(phi, theta)
            }
        }
    }

    pub fn push_tangent(&self, p: SurfacePoint, du: f64, dv: f64) -> V3 {
        match self {
            Surface::Flat(_) => V3::new(du, dv, 0.0),
            Surface::Revolution(r) => {
                let (rr, dr, _) = r.profile(p.u);
                let (sc, cc) = (p.v.sin(), p.v.cos());
                V3::new(
                    du,
                    dr * cc * du - rr * sc * dv,
                    dr * sc * du + rr * cc * dv,
                )
            }
            Surface::Cap(c) => {
                let r = c.radius;
                let (sp, cp) = (p.u.sin(), p.u.cos());
                let (st, ct) = (p.v.sin(), p.v.cos());
                V3::new(
                    r * (cp * ct * du - sp * st * dv),
                    r * (cp * st * du + sp * ct * dv),
                    -r * sp * du,
                )
            }
        }
    }

    pub fn pull_tangent(&self, p: SurfacePoint, w: V3) -> (f64, f64) {
        match self {
            Surface::Flat(_) => (w.x, w.y),
            Surface::Revolution(r) => {
                let (rr, _, _) = r.profile(p.u);
                let (sc, cc) = (p.v.sin(), p.v.cos());
                (w.x, (-sc * w.y + cc * w.z) / rr)
            }
            Surface::Cap(c) => {
                let r = c.radius;
                let e_phi = self.push_tangent(p, 1.0, 0.0);
                let sp = p.u.sin();
                let e_theta = self.push_tangent(p, 0.0, 1.0);
                (w.dot(e_phi) / (r * r), w.dot(e_theta) / (r * r * sp * sp))
            }
        }
    }

    /// Piece index of the ambient flow at `x` (the revolution surface has a
    /// curvature jump at the blend; everything else is a single piece).
    pub fn piece_at(&self, x: V3) -> u8 {
        match self {
            Surface::Revolution(r) => match r.piece_of(x.x) {
                RevPiece::Nose => 0,
                RevPiece::Tail => 1,
            },
            _ => 0,
        }
    }

    /// Signed value crossing zero at piece switches (positive on the current
    /// side), or `+inf` when the flow has a single piece.
    pub fn piece_switch_value(&self, x: V3, piece: u8) -> f64 {
        match self {
            Surface::Revolution(r) => {
                if piece == 0 {
                    r.blend_u - x.x
                } else {
                    x.x - r.blend_u
                }
            }
            _ => f64::INFINITY,
        }
    }

    pub fn flow_accel(&self, x: V3, v: V3, piece: u8) -> V3 {
        match self {
            Surface::Flat(_) => V3::default(),
            Surface::Revolution(r) => r.flow_accel(
                x,
                v,
                if piece == 0 { RevPiece::Nose } else { RevPiece::Tail },
            ),
            Surface::Cap(c) => c.flow_accel(x, v),
        }
    }

    /// Project a drifted state back onto the surface and its tangent plane.
    pub fn project_state(&self, x: V3, v: V3, piece: u8) -> (V3, V3) {
        match self {
            Surface::Flat(_) => (V3::new(x.x, x.y, 0.0), V3::new(v.x, v.y, 0.0)),
            Surface::Revolution(r) => {
                let rp = if piece == 0 { RevPiece::Nose } else { RevPiece::Tail };
                let xp = r.project_point(x, rp);
                let n = r.normal(xp, rp);
                (xp, v - n * v.dot(n))
            }
            Surface::Cap(c) => {
                let xp = c.project_point(x);
                let n = xp.normalized();
                (xp, v - n * v.dot(n))
            }
        }
    }

    /// Boundary gap of an ambient point, positive inside, zero on `del M`.
    pub fn boundary_gap(&self, x: V3) -> f64 {
        match self {
            Surface::Flat(d) => d.signed_inside(V2::new(x.x, x.y)),
            Surface::Revolution(r) => r.cut_height - x.x,
            Surface::Cap(c) => x.z - c.radius * c.colatitude.cos(),
        }
    }

    // ---- derived scales ----

    pub fn diameter_estimate(&self) -> f64 {
        match self {
            Surface::Flat(d) => d.diameter(),
            Surface::Revolution(r) => 2.0 * r.meridian_arclen(0.0, r.cut_height),
            Surface::Cap(c) => 2.0 * c.radius * c.colatitude,
        }
    }

    /// Conservative segment-length bound for the broken-geodesic space: 0.9
    /// times a lower-bound proxy for the injectivity scale (boundary focal
    /// distance capped by `pi / sqrt(max K)`).
    pub fn epsilon_lambda(&self) -> Result<f64> {
        match self {
            Surface::Flat(d) => {
                if !d.is_smooth() {
                    return Err(Error::ConfigInvalid(
                        "shortening needs a C^1 boundary; use a rounded domain".into(),
                    ));
                }
                Ok(0.9 * d.min_focal().min(d.diameter()))
            }
            Surface::Revolution(r) => {
                let focal = r.meridian_arclen(0.0, r.cut_height);
                Ok(0.9 * focal.min(std::f64::consts::PI * r.cap_radius))
            }
            Surface::Cap(c) => Ok(0.9 * c.radius * c.colatitude),
        }
    }

    /// Default arc-length spacing for stored path samples.
    pub fn sample_spacing(&self) -> f64 {
        self.diameter_estimate() / 256.0
    }

    /// Unit-normalize a chart vector in the metric at its base point.
    pub fn normalize(&self, t: Tangent) -> Result<Tangent> {
        let g = self.metric_at(t.base)?;
        let n = g.norm((t.du, t.dv));
        if n < 1e-300 {
            return Err(Error::ConfigInvalid("cannot normalize zero vector".into()));
        }
        Ok(Tangent::new(t.base, t.du / n, t.dv / n))
    }
}

fn lift(wrapped: f64, hint: f64) -> f64 {
    hint + crate::geom::wrap_signed(wrapped - hint, TAU)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

    fn disk() -> Surface {
        Surface::build(&SurfaceSpec::FlatConvexDomain(FlatParams::Disk { radius: 1.0 })).unwrap()
    }

    fn rev() -> Surface {
        Surface::build(&SurfaceSpec::SurfaceOfRevolution(RevParams {
            cap_radius: 1.0,
            slope: 0.2,
            cut_height: None,
            boundary_radius: Some(1.5),
        }))
        .unwrap()
    }

    fn cap() -> Surface {
        Surface::build(&SurfaceSpec::SphericalCap(CapParams {
            radius: 1.0,
            colatitude: FRAC_PI_3,
        }))
        .unwrap()
    }

    #[test]
    fn flat_metric_is_identity() {
        let s = disk();
        let g = s.metric_at(SurfacePoint::new(0.3, 0.1)).unwrap();
        assert_eq!(g.to_array(), [[1.0, 0.0], [0.0, 1.0]]);
        assert!(s
            .metric_at(SurfacePoint::new(2.0, 0.0))
            .is_err_and(|e| matches!(e, Error::PointOutsideDomain { .. })));
    }

    #[test]
    fn revolution_metric_matches_embedding() {
        let s = rev();
        let r = s.as_revolution().unwrap();
        let p = SurfacePoint::new(1.7, 0.9);
        let g = s.metric_at(p).unwrap();
        let (rr, dr, _) = r.profile(p.u);
        assert!((g.g11 - (1.0 + dr * dr)).abs() < 1e-12);
        assert!((g.g22 - rr * rr).abs() < 1e-12);
        // finite differences of the embedding
        let h = 1e-6;
        let fd = |du: f64, dv: f64| {
            let a = s.embed(SurfacePoint::new(p.u + h * du, p.v + h * dv));
            let b = s.embed(SurfacePoint::new(p.u - h * du, p.v - h * dv));
            (a - b) * (1.0 / (2.0 * h))
        };
        let xu = fd(1.0, 0.0);
        let xv = fd(0.0, 1.0);
        assert!((xu.dot(xu) - g.g11).abs() < 1e-6);
        assert!((xv.dot(xv) - g.g22).abs() < 1e-6);
        assert!(xu.dot(xv).abs() < 1e-6);
    }

    #[test]
    fn cap_chart_data() {
        let s = cap();
        let p = SurfacePoint::new(0.8, 0.3);
        let g = s.metric_at(p).unwrap();
        assert!((g.g11 - 1.0).abs() < 1e-12);
        assert!((g.g22 - p.u.sin().powi(2)).abs() < 1e-12);
        let c = s.christoffel_at(p).unwrap();
        assert!((c.u_vv + p.u.sin() * p.u.cos()).abs() < 1e-12);
        assert!((c.v_uv - 1.0 / p.u.tan()).abs() < 1e-12);
        assert!((s.gauss_curvature_at(p).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn disk_boundary_frames() {
        let s = disk();
        let f = s.boundary_eval(0.0);
        assert!(f.point.chart_dist(&SurfacePoint::new(1.0, 0.0)) < 1e-12);
        assert!((f.tangent.du).abs() < 1e-12 && (f.tangent.dv - 1.0).abs() < 1e-12);
        assert!((f.inward.du + 1.0).abs() < 1e-12);
        assert!((f.kg - 1.0).abs() < 1e-12);
        let f = s.boundary_eval(PI);
        assert!(f.point.chart_dist(&SurfacePoint::new(-1.0, 0.0)) < 1e-12);
        assert!((f.inward.du - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cap_projection_distance() {
        let s = cap();
        let (sstar, d) = s
            .project_to_boundary(SurfacePoint::new(FRAC_PI_3 / 2.0, 0.0))
            .unwrap();
        assert!((d - FRAC_PI_3 / 2.0).abs() < 1e-12);
        assert!(sstar.abs() < 1e-12);
    }

    #[test]
    fn disk_center_tie_breaks_to_zero() {
        let s = disk();
        let (sstar, d) = s.project_to_boundary(SurfacePoint::new(0.0, 0.0)).unwrap();
        assert_eq!(sstar, 0.0);
        assert!((d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn revolution_boundary_kg() {
        let s = rev();
        let r = s.as_revolution().unwrap();
        let f = s.boundary_eval(0.0);
        let (r1, dr1, _) = r.profile(r.cut_height);
        let expected = dr1 / (r1 * (1.0 + dr1 * dr1).sqrt());
        assert!((f.kg - expected).abs() < 1e-14);
        assert!(f.kg > 0.0);
    }

    #[test]
    fn tangent_push_pull_roundtrip() {
        for s in [rev(), cap(), disk()] {
            let p = SurfacePoint::new(
                match s {
                    Surface::Flat(_) => 0.2,
                    _ => 0.7,
                },
                0.4,
            );
            let w = s.push_tangent(p, 0.3, -0.8);
            let (du, dv) = s.pull_tangent(p, w);
            assert!((du - 0.3).abs() < 1e-10, "{}", s.kind_name());
            assert!((dv + 0.8).abs() < 1e-10, "{}", s.kind_name());
        }
    }

    #[test]
    fn chart_lift_near_seam() {
        let s = cap();
        let p = SurfacePoint::new(0.5, TAU - 0.01);
        let x = s.embed(p);
        let q = s.chart_of(x, TAU - 0.02);
        assert!((q.v - p.v).abs() < 1e-9);
        let q2 = s.chart_of(x, TAU + 0.05);
        assert!((q2.v - p.v).abs() < 1e-9);
    }

    #[test]
    fn spec_roundtrip_json() {
        let spec = SurfaceSpec::SphericalCap(CapParams {
            radius: 2.0,
            colatitude: 0.9,
        });
        let text = serde_json::to_string(&spec).unwrap();
        assert!(text.contains("spherical_cap"));
        let back: SurfaceSpec = serde_json::from_str(&text).unwrap();
        assert!(matches!(back, SurfaceSpec::SphericalCap(_)));
    }

    #[test]
    fn sector_boundary_is_convex_where_curved() {
        let s = Surface::build(&SurfaceSpec::FlatConvexDomain(FlatParams::Sector {
            radius: 1.0,
            angle: 0.4 * TAU,
            corner_radius: 0.01,
        }))
        .unwrap();
        let total = s.boundary_total();
        let mut kmin: f64 = f64::INFINITY;
        for k in 0..1000 {
            let f = s.boundary_eval(k as f64 / 1000.0 * total);
            assert!(f.kg >= 0.0);
            kmin = kmin.min(f.kg);
        }
        // straight edges keep kg = 0; curved pieces are strictly convex
        assert_eq!(kmin, 0.0);
    }

    #[test]
    fn epsilon_lambda_values() {
        assert!((disk().epsilon_lambda().unwrap() - 0.9).abs() < 1e-12);
        let c = cap().epsilon_lambda().unwrap();
        assert!((c - 0.9 * FRAC_PI_3).abs() < 1e-12);
        let r = rev().epsilon_lambda().unwrap();
        assert!(r > 0.9 * FRAC_PI_2); // capped by pi * cap_radius
    }
}
