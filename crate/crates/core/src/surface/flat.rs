//! Flat convex domains bounded by a CCW chain of segments and circular arcs.
//!
//! Catalog shapes: disks, circular sectors and triangles/polygons, the latter
//! two with optional circular-arc corner rounding of radius `rho`. A rounding
//! radius of zero keeps the corners sharp; sharp domains are valid for chord
//! constructions (parallel sweepouts) but refuse the shortening process,
//! which needs a C^1 boundary.

use crate::error::Error;
use crate::geom::{wrap_into, V2};
use crate::Result;

const TAU: f64 = std::f64::consts::TAU;

#[derive(Clone, Debug)]
pub enum Piece {
    Seg {
        a: V2,
        b: V2,
        dir: V2,
        len: f64,
    },
    /// CCW arc, `a1 > a0`, bulging away from the interior (center inside).
    Arc {
        c: V2,
        r: f64,
        a0: f64,
        a1: f64,
        len: f64,
    },
}

impl Piece {
    fn seg(a: V2, b: V2) -> Piece {
        let len = a.dist(b);
        Piece::Seg {
            a,
            b,
            dir: (b - a) / len,
            len,
        }
    }

    fn arc(c: V2, r: f64, a0: f64, a1: f64) -> Piece {
        debug_assert!(a1 > a0 - 1e-14);
        Piece::Arc {
            c,
            r,
            a0,
            a1,
            len: r * (a1 - a0),
        }
    }

    pub fn len(&self) -> f64 {
        match self {
            Piece::Seg { len, .. } | Piece::Arc { len, .. } => *len,
        }
    }

    fn point_at(&self, s: f64) -> V2 {
        match self {
            Piece::Seg { a, dir, .. } => *a + *dir * s,
            Piece::Arc { c, r, a0, .. } => {
                let ang = a0 + s / r;
                *c + V2::from_angle(ang) * *r
            }
        }
    }

    fn tangent_at(&self, s: f64) -> V2 {
        match self {
            Piece::Seg { dir, .. } => *dir,
            Piece::Arc { a0, r, .. } => {
                let ang = a0 + s / r;
                V2::new(-ang.sin(), ang.cos())
            }
        }
    }

    fn curvature(&self) -> f64 {
        match self {
            Piece::Seg { .. } => 0.0,
            Piece::Arc { r, .. } => 1.0 / r,
        }
    }

    /// Closest point on the piece: `(local arc parameter, point)`.
    fn closest(&self, p: V2) -> (f64, V2) {
        match self {
            Piece::Seg { a, dir, len, .. } => {
                let t = (p - *a).dot(*dir).clamp(0.0, *len);
                (t, *a + *dir * t)
            }
            Piece::Arc { c, r, a0, a1, .. } => {
                let d = p - *c;
                if d.norm() < 1e-300 {
                    return (0.0, *c + V2::from_angle(*a0) * *r);
                }
                let ang = d.angle();
                let rel = wrap_into(ang - a0, TAU);
                let span = a1 - a0;
                if rel <= span {
                    (rel * r, *c + V2::from_angle(a0 + rel) * *r)
                } else {
                    // compare the two endpoints
                    let p0 = *c + V2::from_angle(*a0) * *r;
                    let p1 = *c + V2::from_angle(*a1) * *r;
                    if p.dist(p0) <= p.dist(p1) {
                        (0.0, p0)
                    } else {
                        (span * r, p1)
                    }
                }
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct FlatDomain {
    pieces: Vec<Piece>,
    cum: Vec<f64>,
    total: f64,
    corner_radius: f64,
    /// True when the boundary tangent is continuous (disk, or rounded corners).
    smooth: bool,
    interior_pt: V2,
    diameter: f64,
}

impl FlatDomain {
    pub fn disk(radius: f64) -> Result<Self> {
        if radius <= 0.0 {
            return Err(Error::ConfigInvalid("disk radius must be positive".into()));
        }
        Self::from_pieces(
            vec![Piece::arc(V2::new(0.0, 0.0), radius, 0.0, TAU)],
            0.0,
            true,
            V2::new(0.0, 0.0),
        )
    }

    /// Convex polygon with CCW vertices; corners rounded by radius `rho`
    /// (sharp when `rho == 0`).
    pub fn rounded_polygon(vertices: &[V2], rho: f64) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::ConfigInvalid("polygon needs >= 3 vertices".into()));
        }
        let centroid = vertices.iter().fold(V2::default(), |s, v| s + *v) / n as f64;
        // convexity / orientation check
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let c = vertices[(i + 2) % n];
            if (b - a).cross(c - b) <= 0.0 {
                return Err(Error::ConfigInvalid(
                    "polygon vertices must be strictly convex and CCW".into(),
                ));
            }
        }
        if rho == 0.0 {
            let pieces = (0..n)
                .map(|i| Piece::seg(vertices[i], vertices[(i + 1) % n]))
                .collect();
            return Self::from_pieces(pieces, 0.0, false, centroid);
        }

        // fillet every corner, then connect consecutive fillets by segments
        let mut fillets = Vec::with_capacity(n);
        for i in 0..n {
            let prev = vertices[(i + n - 1) % n];
            let v = vertices[i];
            let next = vertices[(i + 1) % n];
            fillets.push(fillet_line_line(v, (v - prev).normalized(), (next - v).normalized(), rho)?);
        }
        let mut pieces = Vec::with_capacity(2 * n);
        for i in 0..n {
            let exit = fillets[i].2;
            let entry = fillets[(i + 1) % n].1;
            if exit.dist(entry) < 1e-12 {
                return Err(Error::ConfigInvalid(
                    "corner radius too large for polygon edge".into(),
                ));
            }
            pieces.push(Piece::seg(exit, entry));
            let (arc, _, _) = fillets[(i + 1) % n].clone();
            pieces.push(arc);
        }
        Self::from_pieces(pieces, rho, true, centroid)
    }

    /// Circular sector of the given radius and central angle, apex at the
    /// origin, first edge along the positive x-axis.
    pub fn rounded_sector(radius: f64, angle: f64, rho: f64) -> Result<Self> {
        if !(0.0 < angle && angle < std::f64::consts::PI) {
            return Err(Error::ConfigInvalid(
                "sector angle must lie in (0, pi) for convexity".into(),
            ));
        }
        let e_b = V2::from_angle(angle);
        let interior = V2::from_angle(0.5 * angle) * (0.5 * radius);
        if rho == 0.0 {
            let pieces = vec![
                Piece::seg(V2::new(0.0, 0.0), V2::new(radius, 0.0)),
                Piece::arc(V2::new(0.0, 0.0), radius, 0.0, angle),
                Piece::seg(e_b * radius, V2::new(0.0, 0.0)),
            ];
            return Self::from_pieces(pieces, 0.0, false, interior);
        }
        if rho >= radius * 0.25 {
            return Err(Error::ConfigInvalid("sector corner radius too large".into()));
        }
        // apex fillet between edge (R e_b -> O) and edge (O -> (R, 0))
        let (apex_arc, apex_p1, apex_p2) =
            fillet_line_line(V2::new(0.0, 0.0), -e_b, V2::new(1.0, 0.0), rho)?;
        // junction fillet on the first edge: center (x_j, rho), internally
        // tangent to the outer arc
        let xj = ((radius - rho) * (radius - rho) - rho * rho).sqrt();
        let o1 = V2::new(xj, rho);
        let t1_angle = o1.angle();
        // mirrored junction fillet near the second edge
        let o2 = e_b * xj + V2::new(angle.sin(), -angle.cos()) * rho;
        let t2_angle = o2.angle();
        let pieces = vec![
            Piece::seg(apex_p2, V2::new(xj, 0.0)),
            Piece::arc(o1, rho, -std::f64::consts::FRAC_PI_2, t1_angle),
            Piece::arc(V2::new(0.0, 0.0), radius, t1_angle, t2_angle),
            Piece::arc(o2, rho, t2_angle, angle + std::f64::consts::FRAC_PI_2),
            Piece::seg(e_b * xj, apex_p1),
            apex_arc,
        ];
        Self::from_pieces(pieces, rho, true, interior)
    }

    /// Equilateral triangle of unit area centered at the origin.
    pub fn equilateral_unit_area(rho: f64) -> Result<Self> {
        let side = 2.0 / 3.0_f64.powf(0.25);
        let h = 0.5 * 3.0_f64.sqrt() * side;
        let verts = [
            V2::new(-0.5 * side, -h / 3.0),
            V2::new(0.5 * side, -h / 3.0),
            V2::new(0.0, 2.0 * h / 3.0),
        ];
        Self::rounded_polygon(&verts, rho)
    }

    /// Arbitrary triangle rescaled to unit area.
    pub fn triangle_unit_area(vertices: [V2; 3], rho: f64) -> Result<Self> {
        let ab = vertices[1] - vertices[0];
        let ac = vertices[2] - vertices[0];
        let area = 0.5 * ab.cross(ac).abs();
        if area < 1e-12 {
            return Err(Error::ConfigInvalid("degenerate triangle".into()));
        }
        let scale = (1.0 / area).sqrt();
        let centroid = (vertices[0] + vertices[1] + vertices[2]) / 3.0;
        let mut v: Vec<V2> = vertices
            .iter()
            .map(|p| (*p - centroid) * scale)
            .collect();
        if (v[1] - v[0]).cross(v[2] - v[0]) < 0.0 {
            v.swap(1, 2);
        }
        Self::rounded_polygon(&v, rho)
    }

    fn from_pieces(pieces: Vec<Piece>, corner_radius: f64, smooth: bool, interior_pt: V2) -> Result<Self> {
        let mut cum = Vec::with_capacity(pieces.len() + 1);
        let mut s = 0.0;
        for p in &pieces {
            cum.push(s);
            s += p.len();
        }
        cum.push(s);
        let mut dom = FlatDomain {
            pieces,
            cum,
            total: s,
            corner_radius,
            smooth,
            interior_pt,
            diameter: 0.0,
        };
        let samples: Vec<V2> = (0..128)
            .map(|k| dom.boundary_point(k as f64 / 128.0 * s))
            .collect();
        let mut diam: f64 = 0.0;
        for i in 0..samples.len() {
            for j in (i + 1)..samples.len() {
                diam = diam.max(samples[i].dist(samples[j]));
            }
        }
        dom.diameter = diam;
        Ok(dom)
    }

    pub fn boundary_total(&self) -> f64 {
        self.total
    }

    pub fn corner_radius(&self) -> f64 {
        self.corner_radius
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn interior_point(&self) -> V2 {
        self.interior_pt
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    fn locate(&self, s: f64) -> (usize, f64) {
        let s = wrap_into(s, self.total);
        // linear scan; piece counts are tiny
        for i in 0..self.pieces.len() {
            if s < self.cum[i + 1] || i + 1 == self.pieces.len() {
                return (i, s - self.cum[i]);
            }
        }
        unreachable!()
    }

    pub fn boundary_point(&self, s: f64) -> V2 {
        let (i, ds) = self.locate(s);
        self.pieces[i].point_at(ds)
    }

    /// `(point, unit tangent, inward unit normal, k_g)` at arc parameter `s`.
    pub fn boundary_frame(&self, s: f64) -> (V2, V2, V2, f64) {
        let (i, ds) = self.locate(s);
        let p = self.pieces[i].point_at(ds);
        let t = self.pieces[i].tangent_at(ds);
        (p, t, t.perp(), self.pieces[i].curvature())
    }

    /// Closest boundary point: `(s, distance)`, ties resolved to smallest `s`.
    pub fn closest_boundary(&self, p: V2) -> (f64, f64) {
        let mut best_s = 0.0;
        let mut best_d = f64::INFINITY;
        for (i, piece) in self.pieces.iter().enumerate() {
            let (ls, q) = piece.closest(p);
            let d = p.dist(q);
            if d < best_d - 1e-12 {
                best_d = d;
                best_s = self.cum[i] + ls;
            }
        }
        (best_s, best_d)
    }

    fn is_inside_sharp(&self, p: V2) -> bool {
        self.pieces.iter().all(|piece| match piece {
            Piece::Seg { a, dir, .. } => dir.cross(p - *a) >= -1e-12,
            Piece::Arc { c, r, .. } => p.dist(*c) <= r + 1e-12,
        })
    }

    /// Signed distance to the boundary, positive inside.
    pub fn signed_inside(&self, p: V2) -> f64 {
        let (s, d) = self.closest_boundary(p);
        if !self.smooth {
            return if self.is_inside_sharp(p) { d } else { -d };
        }
        let (q, _t, nin, _) = self.boundary_frame(s);
        if (p - q).dot(nin) >= 0.0 {
            d
        } else {
            -d
        }
    }

    pub fn is_smooth(&self) -> bool {
        self.smooth
    }

    /// Support interval of the domain along direction `n` (unit).
    pub fn support_interval(&self, n: V2) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut push = |p: V2| {
            let d = p.dot(n);
            lo = lo.min(d);
            hi = hi.max(d);
        };
        for piece in &self.pieces {
            match piece {
                Piece::Seg { a, b, .. } => {
                    push(*a);
                    push(*b);
                }
                Piece::Arc { c, r, a0, a1, .. } => {
                    push(*c + V2::from_angle(*a0) * *r);
                    push(*c + V2::from_angle(*a1) * *r);
                    for ang in [n.angle(), n.angle() + std::f64::consts::PI] {
                        if wrap_into(ang - a0, TAU) <= a1 - a0 {
                            push(*c + V2::from_angle(ang) * *r);
                        }
                    }
                }
            }
        }
        (lo, hi)
    }

    /// Intersections of the line `p0 + t d` with the boundary, sorted by `t`.
    /// Returns `(t, boundary arc parameter)` pairs.
    pub fn line_hits(&self, p0: V2, d: V2) -> Vec<(f64, f64)> {
        let mut hits: Vec<(f64, f64)> = Vec::new();
        for (i, piece) in self.pieces.iter().enumerate() {
            match piece {
                Piece::Seg { a, dir, len, .. } => {
                    let denom = d.cross(*dir);
                    if denom.abs() < 1e-14 {
                        continue;
                    }
                    // solve p0 + t d = a + s dir
                    let w = *a - p0;
                    let t = w.cross(*dir) / denom;
                    let s = w.cross(d) / denom;
                    if (-1e-12..=len + 1e-12).contains(&s) {
                        hits.push((t, self.cum[i] + s.clamp(0.0, *len)));
                    }
                }
                Piece::Arc { c, r, a0, a1, .. } => {
                    let f = p0 - *c;
                    let b = f.dot(d);
                    let cc = f.dot(f) - r * r;
                    let disc = b * b - cc;
                    if disc < 0.0 {
                        continue;
                    }
                    let sq = disc.sqrt();
                    for t in [-b - sq, -b + sq] {
                        let q = p0 + d * t;
                        let ang = (q - *c).angle();
                        let rel = wrap_into(ang - a0, TAU);
                        if rel <= a1 - a0 + 1e-12 {
                            hits.push((t, self.cum[i] + rel.min(a1 - a0) * r));
                        }
                    }
                }
            }
        }
        hits.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        hits.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-10);
        hits
    }

    /// Domain area via the divergence theorem (closed forms per piece).
    pub fn area(&self) -> f64 {
        let mut acc = 0.0;
        for piece in &self.pieces {
            match piece {
                Piece::Seg { a, b, .. } => {
                    // integral of x dy along the segment
                    acc += 0.5 * (a.x + b.x) * (b.y - a.y);
                }
                Piece::Arc { c, r, a0, a1, .. } => {
                    // x dy = (cx + r cos a)(r cos a) da
                    let f = |a: f64| {
                        c.x * r * a.sin() + r * r * (0.5 * a + 0.25 * (2.0 * a).sin())
                    };
                    acc += f(*a1) - f(*a0);
                }
            }
        }
        acc
    }

    /// Smallest boundary geodesic curvature (0 on straight edges).
    pub fn k_min(&self) -> f64 {
        self.pieces
            .iter()
            .map(|p| p.curvature())
            .fold(f64::INFINITY, f64::min)
    }

    /// Geodesic-curvature integral over the boundary range `[s0, s1]`
    /// (`s1 >= s0`, may wrap past the total): the turning of the tangent
    /// along arc pieces, exact per piece.
    pub fn kg_integral(&self, s0: f64, s1: f64) -> f64 {
        debug_assert!(s1 >= s0 - 1e-12);
        let mut acc = 0.0;
        let mut t = s0;
        let mut remaining = s1 - s0;
        while remaining > 1e-14 {
            let (i, ds) = self.locate(t);
            let piece_left = self.pieces[i].len() - ds;
            let take = piece_left.min(remaining);
            acc += self.pieces[i].curvature() * take;
            t += take;
            remaining -= take;
        }
        acc
    }

    /// Largest boundary curvature; infinite focal data on segments is skipped.
    pub fn min_focal(&self) -> f64 {
        self.pieces
            .iter()
            .filter_map(|p| match p {
                Piece::Arc { r, .. } => Some(*r),
                Piece::Seg { .. } => None,
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Fillet arc of radius `rho` replacing the corner at `v` between incoming
/// unit direction `e_in` and outgoing unit direction `e_out` (both CCW).
/// Returns `(arc, entry point on incoming edge, exit point on outgoing edge)`.
fn fillet_line_line(v: V2, e_in: V2, e_out: V2, rho: f64) -> Result<(Piece, V2, V2)> {
    let turn = e_in.cross(e_out).atan2(e_in.dot(e_out));
    if turn <= 1e-9 {
        return Err(Error::ConfigInvalid("corner is not convex".into()));
    }
    let half_interior = 0.5 * (std::f64::consts::PI - turn);
    let t = rho / half_interior.tan();
    let p1 = v - e_in * t;
    let p2 = v + e_out * t;
    let o = p1 + e_in.perp() * rho;
    let a0 = (p1 - o).angle();
    let mut a1 = (p2 - o).angle();
    while a1 < a0 {
        a1 += TAU;
    }
    Ok((Piece::arc(o, rho, a0, a1), p1, p2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn disk_frames() {
        let d = FlatDomain::disk(1.0).unwrap();
        assert!((d.boundary_total() - TAU).abs() < 1e-12);
        let (p, t, n, kg) = d.boundary_frame(0.0);
        assert!(p.dist(V2::new(1.0, 0.0)) < 1e-12);
        assert!(t.dist(V2::new(0.0, 1.0)) < 1e-12);
        assert!(n.dist(V2::new(-1.0, 0.0)) < 1e-12);
        assert!((kg - 1.0).abs() < 1e-12);
        let (p, _, n, _) = d.boundary_frame(PI);
        assert!(p.dist(V2::new(-1.0, 0.0)) < 1e-12);
        assert!(n.dist(V2::new(1.0, 0.0)) < 1e-12);
    }

    #[test]
    fn disk_signed_distance_and_ties() {
        let d = FlatDomain::disk(1.0).unwrap();
        assert!((d.signed_inside(V2::new(0.5, 0.0)) - 0.5).abs() < 1e-12);
        assert!((d.signed_inside(V2::new(1.5, 0.0)) + 0.5).abs() < 1e-12);
        let (s, dist) = d.closest_boundary(V2::new(0.0, 0.0));
        assert_eq!(s, 0.0);
        assert!((dist - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rounded_triangle_is_closed_and_convex() {
        let t = FlatDomain::equilateral_unit_area(0.05).unwrap();
        // boundary must be a closed C^1 chain: walk it and compare ends
        let n = 2048;
        let step = t.boundary_total() / n as f64;
        let mut prev = t.boundary_point(0.0);
        for k in 1..=n {
            let q = t.boundary_point(k as f64 * step);
            assert!(prev.dist(q) < 2.0 * step, "gap in boundary chain");
            prev = q;
        }
        // area shrinks with rounding but stays close to 1
        assert!((t.area() - 1.0).abs() < 0.01);
        let sharp = FlatDomain::equilateral_unit_area(0.0).unwrap();
        assert!((sharp.area() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sector_pieces_join() {
        let s = FlatDomain::rounded_sector(1.0, 0.4 * TAU, 0.01).unwrap();
        let n = 4096;
        let step = s.boundary_total() / n as f64;
        let mut prev = s.boundary_point(0.0);
        for k in 1..=n {
            let q = s.boundary_point(k as f64 * step);
            assert!(prev.dist(q) < 2.0 * step, "gap at s = {}", k as f64 * step);
            prev = q;
        }
        let sharp = FlatDomain::rounded_sector(1.0, 0.4 * TAU, 0.0).unwrap();
        let expected = PI * 0.4 * TAU / TAU; // area = angle/2 * r^2
        assert!((sharp.area() - expected).abs() < 1e-12);
    }

    #[test]
    fn line_hits_chord() {
        let d = FlatDomain::disk(1.0).unwrap();
        let hits = d.line_hits(V2::new(0.0, 0.5), V2::new(1.0, 0.0));
        assert_eq!(hits.len(), 2);
        let chord = hits[1].0 - hits[0].0;
        assert!((chord - 2.0 * (1.0f64 - 0.25).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn support_interval_disk() {
        let d = FlatDomain::disk(2.0).unwrap();
        let (lo, hi) = d.support_interval(V2::new(0.0, 1.0));
        assert!((lo + 2.0).abs() < 1e-12 && (hi - 2.0).abs() < 1e-12);
    }
}
