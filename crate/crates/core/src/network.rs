//! Geodesic networks with multiplicities: junction balance and
//! classification, planar-subdivision face extraction, Gauss-Bonnet audits,
//! the star property, and the mod-2 parity decomposition of faces.

use crate::error::Error;
use crate::geodesic::{resample_path, GeodesicPath};
use crate::geom::{wrap_into, SurfacePoint, V3};
use crate::surface::Surface;
use crate::Result;

const TAU: f64 = std::f64::consts::TAU;
const PI: f64 = std::f64::consts::PI;

#[derive(Clone, Debug)]
pub struct NetSegment {
    pub path: GeodesicPath,
    pub multiplicity: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JunctionClass {
    /// Paired ends (or a single orthogonal boundary end): no singularity.
    Regular,
    /// Interior junction with density >= 3.
    InteriorJunction,
    /// Boundary junction with density >= 1.5.
    BoundaryJunction,
    /// Boundary vertex of a loop: density 1 with two distinct velocities.
    LoopVertex,
    /// Interior density-2 point made of two transversal multiplicity-1 passes.
    CrossingCandidate,
    /// Anything else (e.g. non-integral interior density).
    Irregular,
}

#[derive(Clone, Debug)]
pub struct JunctionReport {
    pub location: SurfacePoint,
    pub on_boundary: bool,
    pub density: f64,
    /// Norm of the full balance vector (interior) or of its tangential
    /// component (boundary junction).
    pub residual: f64,
    pub balance: (f64, f64),
    pub classification: JunctionClass,
    pub integral_density: bool,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub enum FaceEdge {
    Net { edge: usize, forward: bool },
    Boundary { s0: f64, s1: f64 },
}

#[derive(Clone, Debug)]
pub struct Corner {
    pub point: SurfacePoint,
    /// Signed turning angle of the face boundary at this corner.
    pub turning: f64,
    /// Corner between a geodesic edge and a boundary arc.
    pub meets_boundary: bool,
}

#[derive(Clone, Debug)]
pub struct Face {
    pub cycle: Vec<FaceEdge>,
    pub corners: Vec<Corner>,
    pub euler_char: i32,
    pub area: f64,
}

#[derive(Clone, Debug)]
struct IncidentEnd {
    seg: usize,
    multiplicity: u32,
    /// Unit chart direction emanating from the node.
    dir: (f64, f64),
}

#[derive(Clone, Debug)]
struct Node {
    point: SurfacePoint,
    ambient: V3,
    boundary_s: Option<f64>,
    ends: Vec<IncidentEnd>,
}

#[derive(Clone, Debug)]
struct Edge {
    seg: usize,
    node_a: usize,
    node_b: usize,
    /// Arc range on the parent segment.
    t0: f64,
    t1: f64,
    length: f64,
    multiplicity: u32,
    /// Oriented a -> b chart samples, periodic coordinate lifted.
    samples: Vec<SurfacePoint>,
}

#[derive(Clone, Debug)]
pub struct GeodesicNetwork {
    pub segments: Vec<NetSegment>,
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    /// Boundary node ids sorted by boundary parameter.
    boundary_order: Vec<usize>,
}

impl GeodesicNetwork {
    pub fn new(surface: &Surface, segments: Vec<NetSegment>) -> Result<GeodesicNetwork> {
        if segments.iter().any(|s| s.multiplicity == 0) {
            return Err(Error::MalformedNetwork(
                "multiplicities must be positive".into(),
            ));
        }
        let scale = surface.diameter_estimate();
        let snap = 1e-8 * (1.0 + scale);

        // crossing registration between distinct segments
        let mut cuts: Vec<Vec<f64>> = segments.iter().map(|s| vec![0.0, s.path.length]).collect();
        for i in 0..segments.len() {
            for j in (i + 1)..segments.len() {
                for (ti, tj) in find_crossings(surface, &segments[i].path, &segments[j].path, snap)?
                {
                    cuts[i].push(ti);
                    cuts[j].push(tj);
                }
            }
        }
        for c in &mut cuts {
            c.sort_by(|a, b| a.partial_cmp(b).unwrap());
            c.dedup_by(|a, b| (*a - *b).abs() < snap);
        }

        // gather node sites: segment ends and crossing points
        let mut nodes: Vec<Node> = Vec::new();
        let mut find_or_insert = |surface: &Surface, p: SurfacePoint| -> usize {
            let amb = surface.embed(p);
            for (k, n) in nodes.iter().enumerate() {
                if n.ambient.dist(amb) < snap {
                    return k;
                }
            }
            let boundary_s = {
                let gap = surface.signed_inside(p).abs();
                if gap < snap {
                    Some(surface.project_to_boundary(clamp(surface, p)).map(|x| x.0).unwrap_or(0.0))
                } else {
                    None
                }
            };
            nodes.push(Node {
                point: p,
                ambient: amb,
                boundary_s,
                ends: Vec::new(),
            });
            nodes.len() - 1
        };

        let mut edges: Vec<Edge> = Vec::new();
        for (si, seg) in segments.iter().enumerate() {
            let ts = &cuts[si];
            for w in ts.windows(2) {
                let (t0, t1) = (w[0], w[1]);
                if t1 - t0 < snap {
                    continue;
                }
                let pa = point_on(surface, &seg.path, t0)?;
                let pb = point_on(surface, &seg.path, t1)?;
                let na = find_or_insert(surface, pa);
                let nb = find_or_insert(surface, pb);
                let n_samples = ((t1 - t0) / surface.sample_spacing()).ceil() as usize;
                let samples = slice_samples(surface, &seg.path, t0, t1, n_samples.clamp(8, 512))?;
                edges.push(Edge {
                    seg: si,
                    node_a: na,
                    node_b: nb,
                    t0,
                    t1,
                    length: t1 - t0,
                    multiplicity: seg.multiplicity,
                    samples,
                });
            }
        }

        // incident ends with exact directions from re-integration
        for (ei, e) in edges.iter().enumerate() {
            let _ = ei;
            let (da, db) = edge_end_dirs(surface, &segments[e.seg].path, e.t0, e.t1)?;
            nodes[e.node_a].ends.push(IncidentEnd {
                seg: e.seg,
                multiplicity: e.multiplicity,
                dir: da,
            });
            nodes[e.node_b].ends.push(IncidentEnd {
                seg: e.seg,
                multiplicity: e.multiplicity,
                dir: db,
            });
        }

        let mut boundary_order: Vec<usize> = nodes
            .iter()
            .enumerate()
            .filter_map(|(k, n)| n.boundary_s.map(|_| k))
            .collect();
        boundary_order.sort_by(|a, b| {
            nodes[*a]
                .boundary_s
                .partial_cmp(&nodes[*b].boundary_s)
                .unwrap()
        });

        Ok(GeodesicNetwork {
            segments,
            nodes,
            edges,
            boundary_order,
        })
    }

    pub fn mass(&self) -> f64 {
        self.segments
            .iter()
            .map(|s| s.multiplicity as f64 * s.path.length)
            .sum()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Odd-multiplicity original segment indices.
    pub fn odd_segments(&self) -> Vec<usize> {
        self.segments
            .iter()
            .enumerate()
            .filter_map(|(i, s)| (s.multiplicity % 2 == 1).then_some(i))
            .collect()
    }

    /// Component count of the support and whether it touches the boundary.
    pub fn support_report(&self) -> (usize, bool) {
        let n = self.nodes.len();
        if n == 0 {
            return (0, false);
        }
        let mut parent: Vec<usize> = (0..n).collect();
        fn root(parent: &mut Vec<usize>, mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for e in &self.edges {
            let (a, b) = (root(&mut parent, e.node_a), root(&mut parent, e.node_b));
            if a != b {
                parent[a] = b;
            }
        }
        let mut roots: Vec<usize> = (0..n).map(|k| root(&mut parent, k)).collect();
        roots.sort_unstable();
        roots.dedup();
        let touches = self.nodes.iter().any(|n| n.boundary_s.is_some());
        (roots.len(), touches)
    }
}

fn clamp(surface: &Surface, p: SurfacePoint) -> SurfacePoint {
    match surface {
        Surface::Flat(_) => p,
        Surface::Revolution(r) => SurfacePoint::new(p.u.clamp(0.0, r.cut_height), p.v),
        Surface::Cap(c) => SurfacePoint::new(p.u.clamp(0.0, c.colatitude), p.v),
    }
}

fn point_on(surface: &Surface, path: &GeodesicPath, t: f64) -> Result<SurfacePoint> {
    if t <= 0.0 {
        return Ok(path.start);
    }
    if t >= path.length {
        return Ok(path.end());
    }
    let pts = resample_path(surface, path, 2, t, t)?;
    Ok(pts[0])
}

fn slice_samples(
    surface: &Surface,
    path: &GeodesicPath,
    t0: f64,
    t1: f64,
    n: usize,
) -> Result<Vec<SurfacePoint>> {
    resample_path(surface, path, n.max(2), t0, t1)
}

/// Unit chart directions leaving the two ends of the sub-segment `[t0, t1]`.
fn edge_end_dirs(
    surface: &Surface,
    path: &GeodesicPath,
    t0: f64,
    t1: f64,
) -> Result<((f64, f64), (f64, f64))> {
    let ends = resample_path(surface, path, 2, t0, t1)?;
    let vel = |t: f64, at: SurfacePoint, sign: f64| -> Result<(f64, f64)> {
        let v_amb = crate::geodesic::velocity_at(surface, path, t)?;
        let (du, dv) = surface.pull_tangent(clamp_chart(surface, at), v_amb * sign);
        let g = surface.metric_at(clamp_chart(surface, at))?;
        let n = g.norm((du, dv));
        Ok((du / n, dv / n))
    };
    let da = vel(t0, ends[0], 1.0)?;
    let db = vel(t1, ends[1], -1.0)?;
    Ok((da, db))
}

fn clamp_chart(surface: &Surface, p: SurfacePoint) -> SurfacePoint {
    match surface {
        Surface::Flat(_) => p,
        Surface::Revolution(r) => SurfacePoint::new(p.u.clamp(1e-12, r.cut_height), p.v),
        Surface::Cap(c) => SurfacePoint::new(p.u.clamp(1e-12, c.colatitude), p.v),
    }
}

/// Transversal intersection parameters between two geodesic paths, interior
/// to both. Tangential overlaps raise `NonManifoldIncidence`.
fn find_crossings(
    surface: &Surface,
    a: &GeodesicPath,
    b: &GeodesicPath,
    snap: f64,
) -> Result<Vec<(f64, f64)>> {
    let pa: Vec<V3> = a.samples.iter().map(|p| surface.embed(*p)).collect();
    let pb: Vec<V3> = b.samples.iter().map(|p| surface.embed(*p)).collect();
    let ha = a.length / (pa.len() - 1) as f64;
    let hb = b.length / (pb.len() - 1) as f64;
    let near_tol = 2.0 * ha.max(hb);

    let mut candidate_cells = Vec::new();
    for i in 0..pa.len() - 1 {
        for j in 0..pb.len() - 1 {
            let d = seg_seg_distance(pa[i], pa[i + 1], pb[j], pb[j + 1]);
            if d < near_tol {
                candidate_cells.push((i, j, d));
            }
        }
    }
    // tangential overlap guard: a long run of adjacent near cells
    let mut by_i: Vec<usize> = candidate_cells.iter().map(|c| c.0).collect();
    by_i.sort_unstable();
    by_i.dedup();
    let mut run = 1usize;
    let mut longest = if by_i.is_empty() { 0 } else { 1 };
    for w in by_i.windows(2) {
        if w[1] == w[0] + 1 {
            run += 1;
            longest = longest.max(run);
        } else {
            run = 1;
        }
    }
    if longest > 10 {
        let mid = candidate_cells[candidate_cells.len() / 2];
        let p = a.samples[mid.0];
        return Err(Error::NonManifoldIncidence { u: p.u, v: p.v });
    }

    // cluster candidate cells and refine each cluster by Newton on (ta, tb)
    let mut found: Vec<(f64, f64)> = Vec::new();
    for (i, j, _) in candidate_cells {
        let ta0 = (i as f64 + 0.5) * ha;
        let tb0 = (j as f64 + 0.5) * hb;
        if found
            .iter()
            .any(|(ta, tb)| (ta - ta0).abs() < 3.0 * ha && (tb - tb0).abs() < 3.0 * hb)
        {
            continue;
        }
        if let Some((ta, tb)) = refine_crossing(surface, a, b, ta0, tb0, snap)? {
            // interior only: endpoint contacts are junctions, not crossings
            let margin_a = 10.0 * snap;
            if ta < margin_a
                || ta > a.length - margin_a
                || tb < margin_a
                || tb > b.length - margin_a
            {
                continue;
            }
            if !found
                .iter()
                .any(|(x, y)| (x - ta).abs() < 3.0 * ha && (y - tb).abs() < 3.0 * hb)
            {
                found.push((ta, tb));
            }
        }
    }
    Ok(found)
}

fn refine_crossing(
    surface: &Surface,
    a: &GeodesicPath,
    b: &GeodesicPath,
    ta0: f64,
    tb0: f64,
    snap: f64,
) -> Result<Option<(f64, f64)>> {
    let eval = |ta: f64, tb: f64| -> Result<V3> {
        let qa = surface.embed(point_on(surface, a, ta.clamp(0.0, a.length))?);
        let qb = surface.embed(point_on(surface, b, tb.clamp(0.0, b.length))?);
        Ok(qa - qb)
    };
    let mut ta = ta0;
    let mut tb = tb0;
    for _ in 0..40 {
        let f0 = eval(ta, tb)?;
        if f0.norm() < 0.1 * snap {
            return Ok(Some((ta, tb)));
        }
        let h = 1e-7 * (1.0 + a.length.max(b.length));
        let fa = (eval(ta + h, tb)? - f0) * (1.0 / h);
        let fb = (eval(ta, tb + h)? - f0) * (1.0 / h);
        // least squares on the 3x2 system
        let g = [
            [fa.dot(fa), fa.dot(fb)],
            [fa.dot(fb), fb.dot(fb)],
        ];
        let r = [fa.dot(f0), fb.dot(f0)];
        let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
        if det.abs() < 1e-18 {
            return Ok(None);
        }
        let dta = (-r[0] * g[1][1] + r[1] * g[0][1]) / det;
        let dtb = (-r[1] * g[0][0] + r[0] * g[1][0]) / det;
        ta += dta;
        tb += dtb;
        if !ta.is_finite() || !tb.is_finite() {
            return Ok(None);
        }
        if dta.abs() + dtb.abs() < 1e-13 {
            break;
        }
    }
    let f = eval(ta, tb)?;
    if f.norm() < snap {
        Ok(Some((ta, tb)))
    } else {
        Ok(None)
    }
}

fn seg_seg_distance(a0: V3, a1: V3, b0: V3, b1: V3) -> f64 {
    // sampled lower envelope; adequate for candidate screening
    let mut best = f64::INFINITY;
    for i in 0..=4 {
        let p = a0 + (a1 - a0) * (i as f64 / 4.0);
        for j in 0..=4 {
            let q = b0 + (b1 - b0) * (j as f64 / 4.0);
            best = best.min(p.dist(q));
        }
    }
    best
}

// -------------------------------------------------------------- stationarity

/// Balance/perpendicularity residuals and the junction classification.
pub fn check_stationarity(
    surface: &Surface,
    net: &GeodesicNetwork,
    tol: f64,
) -> Result<Vec<JunctionReport>> {
    let mut reports = Vec::new();
    for node in &net.nodes {
        let density = node.ends.iter().map(|e| e.multiplicity as f64).sum::<f64>() / 2.0;
        if node.boundary_s.is_none() && (density - 0.5).abs() < 1e-12 {
            return Err(Error::MalformedNetwork(format!(
                "dangling interior endpoint at ({}, {})",
                node.point.u, node.point.v
            )));
        }
        let g = surface.metric_at(clamp_chart(surface, node.point))?;
        let mut bal = (0.0, 0.0);
        for e in &node.ends {
            bal.0 += e.multiplicity as f64 * e.dir.0;
            bal.1 += e.multiplicity as f64 * e.dir.1;
        }
        let (residual, on_boundary) = match node.boundary_s {
            Some(s) => {
                let frame = surface.boundary_eval(s);
                let tangential = g.dot(bal, (frame.tangent.du, frame.tangent.dv));
                (tangential.abs(), true)
            }
            None => (g.norm(bal), false),
        };
        let integral_density =
            on_boundary || (density - density.round()).abs() < 1e-9;
        let classification = classify(surface, node, density, g)?;
        reports.push(JunctionReport {
            location: node.point,
            on_boundary,
            density,
            residual,
            balance: bal,
            classification,
            integral_density,
            pass: residual < tol,
        });
    }
    Ok(reports)
}

fn classify(
    surface: &Surface,
    node: &Node,
    density: f64,
    g: crate::geom::Metric2,
) -> Result<JunctionClass> {
    let ends = &node.ends;
    match node.boundary_s {
        Some(s) => {
            if density >= 1.5 - 1e-9 {
                return Ok(JunctionClass::BoundaryJunction);
            }
            if (density - 1.0).abs() < 1e-9 {
                let distinct = ends.len() >= 2
                    && g.angle(ends[0].dir, ends[1].dir) > 1e-6;
                if distinct {
                    return Ok(JunctionClass::LoopVertex);
                }
            }
            if (density - 0.5).abs() < 1e-9 {
                let frame = surface.boundary_eval(s);
                let ang = g.angle(ends[0].dir, (frame.tangent.du, frame.tangent.dv));
                if (ang - PI / 2.0).abs() < 1e-6 {
                    return Ok(JunctionClass::Regular);
                }
            }
            Ok(JunctionClass::Irregular)
        }
        None => {
            // try to pair ends into opposite directions with equal multiplicity
            let mut used = vec![false; ends.len()];
            let mut paired = true;
            let mut pair_count = 0usize;
            for i in 0..ends.len() {
                if used[i] {
                    continue;
                }
                let mut matched = false;
                for j in (i + 1)..ends.len() {
                    if used[j] || ends[j].multiplicity != ends[i].multiplicity {
                        continue;
                    }
                    let opp = (-ends[j].dir.0, -ends[j].dir.1);
                    if g.angle(ends[i].dir, opp) < 1e-6 {
                        used[i] = true;
                        used[j] = true;
                        matched = true;
                        pair_count += 1;
                        break;
                    }
                }
                if !matched {
                    paired = false;
                    break;
                }
            }
            if paired {
                let all_mult_one = ends.iter().all(|e| e.multiplicity == 1);
                if (density - 2.0).abs() < 1e-9 && pair_count == 2 && all_mult_one {
                    return Ok(JunctionClass::CrossingCandidate);
                }
                return Ok(JunctionClass::Regular);
            }
            let integral = (density - density.round()).abs() < 1e-9;
            if integral && density >= 3.0 - 1e-9 {
                Ok(JunctionClass::InteriorJunction)
            } else {
                Ok(JunctionClass::Irregular)
            }
        }
    }
}

/// Named angle hypotheses used before the face-decomposition bounds.
pub fn interior_angle_gaps_ok(surface: &Surface, net: &GeodesicNetwork) -> Result<bool> {
    for node in &net.nodes {
        if node.boundary_s.is_some() || node.ends.len() < 2 {
            continue;
        }
        let angles = end_angles(surface, node)?;
        let mut sorted = angles.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for k in 0..sorted.len() {
            let next = if k + 1 == sorted.len() {
                sorted[0] + TAU
            } else {
                sorted[k + 1]
            };
            if next - sorted[k] >= PI - 1e-9 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

pub fn boundary_angles_ok(surface: &Surface, net: &GeodesicNetwork) -> Result<bool> {
    for node in &net.nodes {
        let Some(s) = node.boundary_s else { continue };
        let frame = surface.boundary_eval(s);
        let g = surface.metric_at(clamp_chart(surface, node.point))?;
        for e in &node.ends {
            let a = g.angle(e.dir, (frame.tangent.du, frame.tangent.dv));
            let b = PI - a;
            if a.min(b) > PI / 2.0 + 1e-9 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn end_angles(surface: &Surface, node: &Node) -> Result<Vec<f64>> {
    // chart angles preserve cyclic order under the positive-definite metric
    let _ = surface;
    Ok(node
        .ends
        .iter()
        .map(|e| e.dir.1.atan2(e.dir.0))
        .collect())
}

// ----------------------------------------------------------------- faces

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct Dart {
    kind: DartKind,
    /// edge id or boundary-arc id
    idx: usize,
    forward: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum DartKind {
    Net,
    Boundary,
}

struct BoundaryArc {
    node_a: usize,
    node_b: usize,
    s0: f64,
    s1: f64, // s1 >= s0, may exceed the total (wrapped)
}

/// Faces of the subdivision of the surface by the network support.
/// Also returns, for every network edge, the face ids on its left and right.
pub fn extract_faces(
    surface: &Surface,
    net: &GeodesicNetwork,
) -> Result<(Vec<Face>, Vec<(usize, usize)>)> {
    let total = surface.boundary_total();

    // whole domain when the network is empty
    if net.edges.is_empty() {
        let face = Face {
            cycle: vec![FaceEdge::Boundary { s0: 0.0, s1: total }],
            corners: Vec::new(),
            euler_char: 1,
            area: surface.total_area(),
        };
        return Ok((vec![face], Vec::new()));
    }

    // boundary arcs between consecutive boundary nodes
    let mut arcs: Vec<BoundaryArc> = Vec::new();
    if net.boundary_order.is_empty() {
        return Err(Error::MalformedNetwork(
            "network support does not touch the boundary".into(),
        ));
    }
    let bn = &net.boundary_order;
    for k in 0..bn.len() {
        let a = bn[k];
        let b = bn[(k + 1) % bn.len()];
        let s0 = net.nodes[a].boundary_s.unwrap();
        let mut s1 = net.nodes[b].boundary_s.unwrap();
        if k + 1 == bn.len() {
            s1 += total;
        }
        if s1 - s0 < 1e-12 && bn.len() > 1 {
            continue;
        }
        arcs.push(BoundaryArc {
            node_a: a,
            node_b: b,
            s0,
            s1,
        });
    }

    // darts with their outgoing chart direction per node
    let mut darts_at: Vec<Vec<(Dart, f64)>> = vec![Vec::new(); net.nodes.len()];
    let dir_angle = |d: (f64, f64)| d.1.atan2(d.0);
    for (ei, e) in net.edges.iter().enumerate() {
        let (da, db) = edge_end_dirs(surface, &net.segments[e.seg].path, e.t0, e.t1)?;
        darts_at[e.node_a].push((
            Dart { kind: DartKind::Net, idx: ei, forward: true },
            dir_angle(da),
        ));
        darts_at[e.node_b].push((
            Dart { kind: DartKind::Net, idx: ei, forward: false },
            dir_angle(db),
        ));
    }
    for (ai, arc) in arcs.iter().enumerate() {
        let fa = surface.boundary_eval(arc.s0);
        let fb = surface.boundary_eval(arc.s1);
        darts_at[arc.node_a].push((
            Dart { kind: DartKind::Boundary, idx: ai, forward: true },
            dir_angle((fa.tangent.du, fa.tangent.dv)),
        ));
        darts_at[arc.node_b].push((
            Dart { kind: DartKind::Boundary, idx: ai, forward: false },
            dir_angle((-fb.tangent.du, -fb.tangent.dv)),
        ));
    }
    for list in &mut darts_at {
        list.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    }

    let target_of = |d: &Dart| -> usize {
        match d.kind {
            DartKind::Net => {
                let e = &net.edges[d.idx];
                if d.forward {
                    e.node_b
                } else {
                    e.node_a
                }
            }
            DartKind::Boundary => {
                let a = &arcs[d.idx];
                if d.forward {
                    a.node_b
                } else {
                    a.node_a
                }
            }
        }
    };
    let source_of = |d: &Dart| -> usize {
        let mut r = *d;
        r.forward = !r.forward;
        target_of(&r)
    };

    // direction of the reversed dart at the target node
    let reversed_angle = |d: &Dart| -> f64 {
        let node = target_of(d);
        let rev = Dart {
            kind: d.kind,
            idx: d.idx,
            forward: !d.forward,
        };
        darts_at[node]
            .iter()
            .find(|(x, _)| *x == rev)
            .map(|(_, a)| *a)
            .expect("reverse dart present")
    };

    // next dart in the face-on-left traversal: the CCW-predecessor of the
    // reversed dart among the darts at the target node
    let next_dart = |d: &Dart| -> Dart {
        let node = target_of(d);
        let list = &darts_at[node];
        let ra = reversed_angle(d);
        let mut best: Option<(f64, Dart)> = None;
        for (cand, ang) in list {
            if cand.kind == d.kind && cand.idx == d.idx && cand.forward != d.forward {
                continue;
            }
            // angular distance going clockwise from ra to ang
            let mut delta = ra - ang;
            while delta <= 1e-12 {
                delta += TAU;
            }
            while delta > TAU {
                delta -= TAU;
            }
            if best.map(|(bd, _)| delta < bd).unwrap_or(true) {
                best = Some((delta, *cand));
            }
        }
        best.map(|(_, d)| d).unwrap_or(Dart {
            kind: d.kind,
            idx: d.idx,
            forward: !d.forward,
        })
    };

    // orbit decomposition
    let mut all_darts: Vec<Dart> = Vec::new();
    for list in &darts_at {
        for (d, _) in list {
            all_darts.push(*d);
        }
    }
    let mut visited: std::collections::HashSet<Dart> = std::collections::HashSet::new();
    let mut faces: Vec<Face> = Vec::new();
    let mut side_map: Vec<(Option<usize>, Option<usize>)> = vec![(None, None); net.edges.len()];

    for d0 in all_darts {
        if visited.contains(&d0) {
            continue;
        }
        let mut cycle_darts = Vec::new();
        let mut d = d0;
        loop {
            visited.insert(d);
            cycle_darts.push(d);
            d = next_dart(&d);
            if d == d0 {
                break;
            }
            if cycle_darts.len() > 10 * (net.edges.len() + arcs.len() + 4) {
                return Err(Error::MalformedNetwork(
                    "face traversal failed to close".into(),
                ));
            }
        }
        // drop the exterior orbit: it traverses boundary arcs backwards
        let backwards_arc = cycle_darts
            .iter()
            .any(|d| d.kind == DartKind::Boundary && !d.forward);
        if backwards_arc {
            continue;
        }
        let face_id = faces.len();
        for d in &cycle_darts {
            if d.kind == DartKind::Net {
                if d.forward {
                    side_map[d.idx].0 = Some(face_id);
                } else {
                    side_map[d.idx].1 = Some(face_id);
                }
            }
        }
        faces.push(build_face(surface, net, &arcs, &cycle_darts, &darts_at, &source_of)?);
    }

    let sides: Vec<(usize, usize)> = side_map
        .into_iter()
        .map(|(l, r)| {
            (
                l.expect("left face assigned"),
                r.expect("right face assigned"),
            )
        })
        .collect();
    Ok((faces, sides))
}

#[allow(clippy::too_many_arguments)]
fn build_face(
    surface: &Surface,
    net: &GeodesicNetwork,
    arcs: &[BoundaryArc],
    cycle: &[Dart],
    darts_at: &[Vec<(Dart, f64)>],
    source_of: &dyn Fn(&Dart) -> usize,
) -> Result<Face> {
    // corner turning: at the source node of each dart, the turn from the
    // previous dart's incoming direction to this dart's outgoing direction
    let mut corners = Vec::new();
    let k = cycle.len();
    for i in 0..k {
        let prev = &cycle[(i + k - 1) % k];
        let cur = &cycle[i];
        let node = source_of(cur);
        let incoming = incoming_dir(surface, net, arcs, prev)?;
        let outgoing = outgoing_dir(darts_at, node, cur);
        let g = surface.metric_at(clamp_chart(surface, net_node_point(net, node)))?;
        let turning = signed_angle(g, incoming, outgoing);
        let meets_boundary = (prev.kind == DartKind::Boundary) != (cur.kind == DartKind::Boundary);
        corners.push(Corner {
            point: net_node_point(net, node),
            turning,
            meets_boundary,
        });
    }

    // boundary word + integrals
    let mut cycle_edges = Vec::with_capacity(k);
    for d in cycle {
        match d.kind {
            DartKind::Net => cycle_edges.push(FaceEdge::Net {
                edge: d.idx,
                forward: d.forward,
            }),
            DartKind::Boundary => cycle_edges.push(FaceEdge::Boundary {
                s0: arcs[d.idx].s0,
                s1: arcs[d.idx].s1,
            }),
        }
    }
    let area = face_integral(surface, net, &cycle_edges, Potential::Area)?;
    Ok(Face {
        cycle: cycle_edges,
        corners,
        euler_char: 1,
        area,
    })
}

fn net_node_point(net: &GeodesicNetwork, node: usize) -> SurfacePoint {
    net.nodes[node].point
}

fn outgoing_dir(darts_at: &[Vec<(Dart, f64)>], node: usize, d: &Dart) -> (f64, f64) {
    let ang = darts_at[node]
        .iter()
        .find(|(x, _)| x == d)
        .map(|(_, a)| *a)
        .expect("dart registered");
    (ang.cos(), ang.sin())
}

/// Direction of travel when arriving through dart `d` at its target.
fn incoming_dir(
    surface: &Surface,
    net: &GeodesicNetwork,
    arcs: &[BoundaryArc],
    d: &Dart,
) -> Result<(f64, f64)> {
    match d.kind {
        DartKind::Net => {
            let e = &net.edges[d.idx];
            let (da, db) = edge_end_dirs(surface, &net.segments[e.seg].path, e.t0, e.t1)?;
            // arriving at the target: reverse of the outgoing dir there
            Ok(if d.forward { (-db.0, -db.1) } else { (-da.0, -da.1) })
        }
        DartKind::Boundary => {
            let a = &arcs[d.idx];
            let f = if d.forward {
                surface.boundary_eval(a.s1)
            } else {
                surface.boundary_eval(a.s0)
            };
            let sign = if d.forward { 1.0 } else { -1.0 };
            Ok((sign * f.tangent.du, sign * f.tangent.dv))
        }
    }
}

fn signed_angle(g: crate::geom::Metric2, a: (f64, f64), b: (f64, f64)) -> f64 {
    let dot = g.dot(a, b);
    let cross = (a.0 * b.1 - a.1 * b.0) * g.det().sqrt();
    cross.atan2(dot)
}

#[derive(Clone, Copy)]
pub enum Potential {
    Area,
    Curvature,
}

/// Integral of the area form (`f = 1`) or the curvature form (`f = K`) over a
/// face, through the divergence theorem: the integrand's chart potential is a
/// function of `u` alone on every catalog surface, anchored at the axis.
fn face_integral(
    surface: &Surface,
    net: &GeodesicNetwork,
    cycle: &[FaceEdge],
    which: Potential,
) -> Result<f64> {
    let potential = |u: f64| -> f64 {
        match (surface, which) {
            (Surface::Flat(_), Potential::Area) => u,
            (Surface::Flat(_), Potential::Curvature) => 0.0,
            (Surface::Revolution(r), Potential::Area) => r.area_potential(u),
            (Surface::Revolution(r), Potential::Curvature) => r.curvature_potential(u),
            (Surface::Cap(c), Potential::Area) => c.area_potential(u),
            (Surface::Cap(c), Potential::Curvature) => c.curvature_potential(u),
        }
    };
    if matches!((surface, which), (Surface::Flat(_), Potential::Curvature)) {
        return Ok(0.0);
    }

    let mut acc = 0.0;
    let mut prev_v: Option<f64> = None;
    let mut push_polyline = |pts: &[SurfacePoint], prev_v: &mut Option<f64>| {
        for w in pts.windows(2) {
            let (a, b) = (w[0], w[1]);
            // keep the periodic coordinate continuous across edge joints
            let (va, vb) = match *prev_v {
                Some(pv) => {
                    let va = pv + crate::geom::wrap_signed(a.v - pv, TAU);
                    (va, va + crate::geom::wrap_signed(b.v - va, TAU))
                }
                None => (a.v, a.v + crate::geom::wrap_signed(b.v - a.v, TAU)),
            };
            acc += 0.5 * (potential(a.u) + potential(b.u)) * (vb - va);
            *prev_v = Some(vb);
        }
    };

    for item in cycle {
        match item {
            FaceEdge::Net { edge, forward } => {
                let e = &net.edges[*edge];
                let n = dense_n(surface, e.length);
                let pts = slice_samples(surface, &net.segments[e.seg].path, e.t0, e.t1, n)?;
                if *forward {
                    push_polyline(&pts, &mut prev_v);
                } else {
                    let rev: Vec<SurfacePoint> = pts.into_iter().rev().collect();
                    push_polyline(&rev, &mut prev_v);
                }
            }
            FaceEdge::Boundary { s0, s1 } => {
                let n = dense_n(surface, (s1 - s0).abs());
                let pts: Vec<SurfacePoint> = (0..=n)
                    .map(|k| {
                        let s = s0 + (s1 - s0) * k as f64 / n as f64;
                        surface.boundary_eval(s).point
                    })
                    .collect();
                push_polyline(&pts, &mut prev_v);
            }
        }
    }
    // for flat charts "v" is y, not periodic; the wrap logic above is a
    // no-op there because consecutive samples are close
    Ok(acc)
}

fn dense_n(surface: &Surface, len: f64) -> usize {
    ((len / surface.diameter_estimate() * 4096.0).ceil() as usize).clamp(16, 8192)
}

/// Geodesic-curvature integral over the boundary arcs of a face cycle.
fn boundary_kg_integral(surface: &Surface, cycle: &[FaceEdge]) -> f64 {
    let mut acc = 0.0;
    for item in cycle {
        if let FaceEdge::Boundary { s0, s1 } = item {
            acc += match surface {
                Surface::Flat(d) => d.kg_integral(*s0, *s1),
                _ => surface.boundary_eval(0.0).kg * (s1 - s0),
            };
        }
    }
    acc
}

/// `|int_face K + int_{boundary arcs} k_g + sum turning - 2 pi chi|`.
pub fn gauss_bonnet_audit(surface: &Surface, net: &GeodesicNetwork, face: &Face) -> Result<f64> {
    let curv = face_integral(surface, net, &face.cycle, Potential::Curvature)?;
    let kg = boundary_kg_integral(surface, &face.cycle);
    let turning: f64 = face.corners.iter().map(|c| c.turning).sum();
    Ok((curv + kg + turning - TAU * face.euler_char as f64).abs())
}

/// Star property: all interior angles < pi and geodesic-to-boundary corners
/// at most pi/2. Returns the violating corner indices.
pub fn check_star_property(face: &Face) -> (bool, Vec<usize>) {
    let mut violations = Vec::new();
    for (i, c) in face.corners.iter().enumerate() {
        if c.turning.abs() <= 1e-9 {
            // straight continuation, not a corner
            continue;
        }
        let interior = PI - c.turning;
        if interior >= PI - 1e-9 {
            violations.push(i);
            continue;
        }
        if c.meets_boundary && interior > PI / 2.0 + 1e-9 {
            violations.push(i);
        }
    }
    (violations.is_empty(), violations)
}

/// Two-coloring of faces by crossing parity: faces across an odd edge get
/// different colors, across an even edge the same. `I` contains face 0.
pub fn parity_decomposition(
    net: &GeodesicNetwork,
    faces: &[Face],
    sides: &[(usize, usize)],
) -> Result<(Vec<usize>, Vec<usize>, Vec<usize>)> {
    let n = faces.len();
    let mut color: Vec<Option<bool>> = vec![None; n];
    let mut queue = std::collections::VecDeque::new();
    for start in 0..n {
        if color[start].is_some() {
            continue;
        }
        color[start] = Some(true);
        queue.push_back(start);
        while let Some(f) = queue.pop_front() {
            let cf = color[f].unwrap();
            for (ei, (l, r)) in sides.iter().enumerate() {
                if *l != f && *r != f {
                    continue;
                }
                let other = if *l == f { *r } else { *l };
                let odd = net.edges[ei].multiplicity % 2 == 1;
                let want = if odd { !cf } else { cf };
                match color[other] {
                    None => {
                        color[other] = Some(want);
                        queue.push_back(other);
                    }
                    Some(c) if c != want => return Err(Error::ParityInconsistency),
                    _ => {}
                }
            }
        }
    }
    let mut i_set = Vec::new();
    let mut j_set = Vec::new();
    for (f, c) in color.iter().enumerate() {
        if c.unwrap_or(true) {
            i_set.push(f);
        } else {
            j_set.push(f);
        }
    }
    Ok((i_set, j_set, net.odd_segments()))
}

/// Mod-2 boundary identity: the edges traversed an odd number of times by
/// the faces of one color class are exactly the odd-multiplicity edges.
pub fn parity_identity_holds(
    net: &GeodesicNetwork,
    faces: &[Face],
    class: &[usize],
) -> bool {
    let mut count = vec![0usize; net.edges.len()];
    for f in class {
        for item in &faces[*f].cycle {
            if let FaceEdge::Net { edge, .. } = item {
                count[*edge] += 1;
            }
        }
    }
    count
        .iter()
        .enumerate()
        .all(|(e, c)| (c % 2 == 1) == (net.edges[e].multiplicity % 2 == 1))
}

/// Interior junction densities are positive integers.
pub fn density_integrality_ok(net: &GeodesicNetwork) -> bool {
    net.nodes.iter().all(|n| {
        if n.boundary_s.is_some() {
            return true;
        }
        let d = n.ends.iter().map(|e| e.multiplicity as f64).sum::<f64>() / 2.0;
        (d - d.round()).abs() < 1e-9 && d >= 1.0 - 1e-9
    })
}

/// Edge lengths and multiplicities grouped by parent segment, for the
/// face-concatenation sweepout bound.
pub fn edge_table(net: &GeodesicNetwork) -> Vec<(usize, f64, u32)> {
    net.edges
        .iter()
        .map(|e| (e.seg, e.length, e.multiplicity))
        .collect()
}

/// Face ids adjacent to each edge `(left, right)`.
pub fn edge_faces(sides: &[(usize, usize)]) -> Vec<(usize, usize)> {
    sides.to_vec()
}

impl Surface {
    /// Total area of the domain.
    pub fn total_area(&self) -> f64 {
        match self {
            Surface::Flat(d) => d.area(),
            Surface::Revolution(r) => TAU * r.area_potential(r.cut_height),
            Surface::Cap(c) => TAU * c.area_potential(c.colatitude),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodesic::connect;
    use crate::surface::{FlatParams, SurfaceSpec};

    fn disk() -> Surface {
        Surface::build(&SurfaceSpec::FlatConvexDomain(FlatParams::Disk { radius: 1.0 })).unwrap()
    }

    fn seg(surface: &Surface, a: (f64, f64), b: (f64, f64), m: u32) -> NetSegment {
        NetSegment {
            path: connect(
                surface,
                SurfacePoint::new(a.0, a.1),
                SurfacePoint::new(b.0, b.1),
            )
            .unwrap(),
            multiplicity: m,
        }
    }

    #[test]
    fn diameter_two_faces() {
        let s = disk();
        let net = GeodesicNetwork::new(&s, vec![seg(&s, (-1.0, 0.0), (1.0, 0.0), 1)]).unwrap();
        let (faces, sides) = extract_faces(&s, &net).unwrap();
        assert_eq!(faces.len(), 2);
        assert_eq!(sides.len(), 1);
        let total: f64 = faces.iter().map(|f| f.area).sum();
        assert!((total - std::f64::consts::PI).abs() < 1e-6, "area {total}");
        for f in &faces {
            let gb = gauss_bonnet_audit(&s, &net, f).unwrap();
            assert!(gb < 1e-9, "gb residual {gb}");
            let (ok, _) = check_star_property(f);
            assert!(ok);
        }
    }

    #[test]
    fn y_network_balance_and_classification() {
        let s = disk();
        let c = (0.0, 0.0);
        let net = GeodesicNetwork::new(
            &s,
            vec![
                seg(&s, c, (1.0, 0.0), 1),
                seg(&s, c, ((TAU / 3.0).cos(), (TAU / 3.0).sin()), 1),
                seg(&s, c, ((2.0 * TAU / 3.0).cos(), (2.0 * TAU / 3.0).sin()), 1),
            ],
        )
        .unwrap();
        let reports = check_stationarity(&s, &net, 1e-8).unwrap();
        let center = reports.iter().find(|r| !r.on_boundary).unwrap();
        assert!((center.density - 1.5).abs() < 1e-12);
        assert!(center.residual < 1e-8, "residual {}", center.residual);
        assert!(!center.integral_density);
        assert_eq!(center.classification, JunctionClass::Irregular);
        for r in reports.iter().filter(|r| r.on_boundary) {
            assert!((r.density - 0.5).abs() < 1e-12);
            assert!(r.residual < 1e-8);
            assert_eq!(r.classification, JunctionClass::Regular);
        }
        let (faces, sides) = extract_faces(&s, &net).unwrap();
        assert_eq!(faces.len(), 3);
        // odd 3-cycle of faces: parity must fail
        assert!(matches!(
            parity_decomposition(&net, &faces, &sides),
            Err(Error::ParityInconsistency)
        ));
    }

    #[test]
    fn crossed_diameters_faces_and_parity() {
        let s = disk();
        let net = GeodesicNetwork::new(
            &s,
            vec![
                seg(&s, (-1.0, 0.0), (1.0, 0.0), 1),
                seg(&s, (0.0, -1.0), (0.0, 1.0), 1),
            ],
        )
        .unwrap();
        assert_eq!(net.edge_count(), 4);
        let reports = check_stationarity(&s, &net, 1e-8).unwrap();
        let center = reports.iter().find(|r| !r.on_boundary).unwrap();
        assert!((center.density - 2.0).abs() < 1e-9);
        assert_eq!(center.classification, JunctionClass::CrossingCandidate);
        let (faces, sides) = extract_faces(&s, &net).unwrap();
        assert_eq!(faces.len(), 4);
        let (i_set, j_set, odd) = parity_decomposition(&net, &faces, &sides).unwrap();
        assert_eq!(i_set.len(), 2);
        assert_eq!(j_set.len(), 2);
        assert_eq!(odd.len(), 2);
        assert!(parity_identity_holds(&net, &faces, &i_set));
        assert!(parity_identity_holds(&net, &faces, &j_set));
        for f in &faces {
            let gb = gauss_bonnet_audit(&s, &net, f).unwrap();
            assert!(gb < 1e-8, "gb {gb}");
        }
    }

    #[test]
    fn empty_network_full_disk() {
        let s = disk();
        let net = GeodesicNetwork::new(&s, vec![]).unwrap();
        let (faces, _) = extract_faces(&s, &net).unwrap();
        assert_eq!(faces.len(), 1);
        let gb = gauss_bonnet_audit(&s, &net, &faces[0]).unwrap();
        assert!(gb < 1e-9);
        assert!((faces[0].area - std::f64::consts::PI).abs() < 1e-9);
    }

    #[test]
    fn mass_values() {
        let s = disk();
        let d1 = GeodesicNetwork::new(&s, vec![seg(&s, (-1.0, 0.0), (1.0, 0.0), 1)]).unwrap();
        assert!((d1.mass() - 2.0).abs() < 1e-9);
        let d2 = GeodesicNetwork::new(&s, vec![seg(&s, (-1.0, 0.0), (1.0, 0.0), 2)]).unwrap();
        assert!((d2.mass() - 4.0).abs() < 1e-9);
        let y = GeodesicNetwork::new(
            &s,
            vec![
                seg(&s, (0.0, 0.0), (1.0, 0.0), 1),
                seg(&s, (0.0, 0.0), ((TAU / 3.0).cos(), (TAU / 3.0).sin()), 1),
                seg(&s, (0.0, 0.0), ((2.0 * TAU / 3.0).cos(), (2.0 * TAU / 3.0).sin()), 1),
            ],
        )
        .unwrap();
        assert!((y.mass() - 3.0).abs() < 1e-8);
    }

    #[test]
    fn double_diameter_parity() {
        let s = disk();
        let net = GeodesicNetwork::new(&s, vec![seg(&s, (-1.0, 0.0), (1.0, 0.0), 2)]).unwrap();
        let (faces, sides) = extract_faces(&s, &net).unwrap();
        let (i_set, j_set, odd) = parity_decomposition(&net, &faces, &sides).unwrap();
        assert_eq!(i_set.len() + j_set.len(), 2);
        // even edge: both faces in the same class
        assert!(j_set.is_empty());
        assert!(odd.is_empty());
    }

    #[test]
    fn dangling_interior_end_rejected() {
        let s = disk();
        let net = GeodesicNetwork::new(&s, vec![seg(&s, (0.2, 0.1), (1.0, 0.0), 1)]).unwrap();
        assert!(matches!(
            check_stationarity(&s, &net, 1e-8),
            Err(Error::MalformedNetwork(_))
        ));
    }
}
