//! Boundary-adapted Birkhoff curve shortening on broken geodesics.
//!
//! The space Lambda holds constant-speed broken geodesics with endpoints on
//! the boundary (or closed), every mini segment no longer than the surface
//! bound `epsilon`. One shortening step performs two geodesic approximations:
//! the end segments are replaced by shortest drops to the boundary and the
//! even-index gaps by minimizing geodesics, then the same is done through the
//! segment midpoints, and the result is resampled to constant speed. Every
//! substep replaces a sub-arc by a minimizing curve with the same endpoints,
//! so lengths never increase.

use crate::error::Error;
use crate::exec;
use crate::geodesic::{connect, drop_to_boundary, shoot_endpoint, GeodesicPath};
use crate::geom::{SurfacePoint, Tangent};
use crate::surface::Surface;
use crate::Result;

/// Absolute per-iteration decrease below which a curve is tested as a fixed
/// point of the shortening map.
pub const FIXED_POINT_DECREASE: f64 = 1e-12;
/// Geodesic/orthogonality residual for accepting a fixed point.
pub const FIXED_POINT_RESIDUAL: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct BrokenGeodesic {
    /// 2L+1 vertices for open curves, 2L (cyclic) for closed ones.
    pub vertices: Vec<SurfacePoint>,
    pub closed: bool,
    pub endpoints_on_boundary: bool,
    pub total_length: f64,
    /// Constant-speed parametrization on the unit interval has Lipschitz
    /// constant `total_length`; the space bounds it by `pairs * epsilon`.
    pub lipschitz_bound: f64,
    /// Mini-segment length bound of the ambient space Lambda.
    pub epsilon: f64,
}

impl BrokenGeodesic {
    /// Number L of paired segments (half the mini-segment count).
    pub fn pairs(&self) -> usize {
        if self.closed {
            self.vertices.len() / 2
        } else {
            (self.vertices.len() - 1) / 2
        }
    }

    pub fn mini_segments(&self) -> usize {
        if self.closed {
            self.vertices.len()
        } else {
            self.vertices.len() - 1
        }
    }

    /// Ambient diameter of the vertex set.
    pub fn diameter(&self, surface: &Surface) -> f64 {
        let pts: Vec<_> = self.vertices.iter().map(|p| surface.embed(*p)).collect();
        let mut d: f64 = 0.0;
        for i in 0..pts.len() {
            for j in (i + 1)..pts.len() {
                d = d.max(pts[i].dist(pts[j]));
            }
        }
        d
    }
}

#[derive(Clone, Debug)]
pub enum OutcomeKind {
    FixedFreeBoundaryGeodesic,
    FixedClosedGeodesic,
    Collapsed(SurfacePoint),
    MaxIterations,
}

#[derive(Clone, Debug)]
pub struct ShorteningOutcome {
    pub kind: OutcomeKind,
    /// Thinned snapshots of the deformation, first and last always retained.
    pub trajectory: Vec<BrokenGeodesic>,
    /// Complete length sequence, one entry per iterate (nonincreasing).
    pub lengths: Vec<f64>,
}

// ---------------------------------------------------------------- chains

/// A run of geodesic legs laid end to end.
#[derive(Clone, Debug)]
struct Leg {
    start: SurfacePoint,
    dir: (f64, f64),
    len: f64,
    end: SurfacePoint,
}

fn leg_of(path: &GeodesicPath) -> Leg {
    Leg {
        start: path.start,
        dir: (path.initial_velocity.du, path.initial_velocity.dv),
        len: path.length,
        end: path.end(),
    }
}

/// The same geodesic traversed backwards.
fn leg_reversed(surface: &Surface, path: &GeodesicPath) -> Result<Leg> {
    if path.length <= 0.0 {
        return Ok(Leg {
            start: path.end(),
            dir: (0.0, 0.0),
            len: 0.0,
            end: path.start,
        });
    }
    let back = path.reversed_terminal(surface)?;
    Ok(Leg {
        start: path.end(),
        dir: (back.du, back.dv),
        len: path.length,
        end: path.start,
    })
}

fn leg_point(surface: &Surface, leg: &Leg, offset: f64) -> Result<SurfacePoint> {
    if offset <= 1e-14 || leg.len <= 0.0 {
        return Ok(leg.start);
    }
    if offset >= leg.len - 1e-14 {
        return Ok(leg.end);
    }
    let (p, _) = shoot_endpoint(surface, leg.start, leg.dir.0, leg.dir.1, offset)?;
    Ok(p)
}

struct Chain {
    legs: Vec<Leg>,
    cum: Vec<f64>,
    total: f64,
}

impl Chain {
    fn new(legs: Vec<Leg>) -> Chain {
        let mut cum = Vec::with_capacity(legs.len() + 1);
        let mut t = 0.0;
        for l in &legs {
            cum.push(t);
            t += l.len;
        }
        cum.push(t);
        Chain { legs, cum, total: t }
    }

    fn locate(&self, t: f64) -> (usize, f64) {
        let t = t.clamp(0.0, self.total);
        for i in 0..self.legs.len() {
            if t < self.cum[i + 1] || i + 1 == self.legs.len() {
                return (i, t - self.cum[i]);
            }
        }
        (0, 0.0)
    }

    /// Midpoints of every nonzero leg (zero legs contribute their point).
    fn midpoints(&self, surface: &Surface) -> Result<Vec<SurfacePoint>> {
        self.legs
            .iter()
            .map(|l| leg_point(surface, l, 0.5 * l.len))
            .collect()
    }

    /// Sample `n` points at uniform arc positions (`n` covers [0, total] for
    /// open chains, [0, total) for closed ones) and measure the broken
    /// geodesic through them. Sample gaps that straddle a leg joint are
    /// re-measured with a minimizing geodesic, so the reported length never
    /// exceeds the chain length.
    fn resample(
        &self,
        surface: &Surface,
        n: usize,
        closed: bool,
    ) -> Result<(Vec<SurfacePoint>, f64)> {
        let slots = if closed { n } else { n - 1 };
        let step = self.total / slots as f64;
        let mut verts = Vec::with_capacity(n);
        let mut leg_idx = Vec::with_capacity(n);
        for k in 0..n {
            let (i, off) = self.locate(k as f64 * step);
            verts.push(leg_point(surface, &self.legs[i], off)?);
            leg_idx.push(i);
        }
        let mut length = 0.0;
        let pairs = if closed { n } else { n - 1 };
        for k in 0..pairs {
            let a = k;
            let b = (k + 1) % n;
            if !closed && b == 0 {
                break;
            }
            if leg_idx[a] == leg_idx[b] && b != 0 {
                length += step;
            } else {
                let d = verts[a].chart_dist(&verts[b]);
                if d < 1e-14 {
                    continue;
                }
                length += connect(surface, verts[a], verts[b])?.length;
            }
        }
        Ok((verts, length.min(self.total)))
    }
}

// --------------------------------------------------------------- public ops

/// Interpolate a chart polyline by minimizing geodesics and resample it as a
/// broken geodesic with `pairs` segment pairs (2*pairs mini segments).
pub fn project_to_lambda(
    surface: &Surface,
    polyline: &[SurfacePoint],
    pairs: usize,
    closed: bool,
) -> Result<BrokenGeodesic> {
    let min_pairs = if closed { 3 } else { 2 };
    if pairs < min_pairs {
        return Err(Error::ConfigInvalid(format!(
            "need at least {min_pairs} segment pairs"
        )));
    }
    if polyline.len() < 2 {
        return Err(Error::ConfigInvalid("polyline needs >= 2 points".into()));
    }
    let eps = surface.epsilon_lambda()?;
    let mut legs = Vec::new();
    let mut poly_len = 0.0;
    let m = polyline.len();
    let seg_count = if closed { m } else { m - 1 };
    for i in 0..seg_count {
        let a = polyline[i];
        let b = polyline[(i + 1) % m];
        if a.chart_dist(&b) < 1e-14 {
            continue;
        }
        let path = connect(surface, a, b)?;
        poly_len += path.length;
        legs.push(leg_of(&path));
    }
    if legs.is_empty() {
        return Err(Error::ConfigInvalid("degenerate polyline".into()));
    }
    let chain = Chain::new(legs);
    let n = if closed { 2 * pairs } else { 2 * pairs + 1 };
    let spacing = chain.total / (2 * pairs) as f64;
    if spacing > eps {
        return Err(Error::SegmentTooLong {
            length: spacing,
            max: eps,
        });
    }
    let (vertices, total_length) = chain.resample(surface, n, closed)?;
    debug_assert!(total_length <= poly_len + 1e-9);
    let endpoints_on_boundary = !closed && {
        let scale = surface.diameter_estimate();
        surface.signed_inside(vertices[0]).abs() < 1e-6 * scale
            && surface.signed_inside(*vertices.last().unwrap()).abs() < 1e-6 * scale
    };
    Ok(BrokenGeodesic {
        vertices,
        closed,
        endpoints_on_boundary,
        total_length,
        lipschitz_bound: (pairs as f64) * eps * 2.0,
        epsilon: eps,
    })
}

/// One application of the shortening map. Returns the new curve and the
/// achieved length decrease (nonnegative up to roundoff).
pub fn shorten_step(surface: &Surface, sigma: &BrokenGeodesic) -> Result<(BrokenGeodesic, f64)> {
    let n = sigma.vertices.len();
    let pairs = sigma.pairs();
    let even: Vec<SurfacePoint> = (0..=(if sigma.closed { pairs - 1 } else { pairs }))
        .map(|i| sigma.vertices[(2 * i) % n])
        .collect();

    // first geodesic approximation
    let mut legs_a: Vec<Leg> = Vec::with_capacity(pairs + 1);
    if sigma.closed {
        for i in 0..pairs {
            let a = even[i];
            let b = even[(i + 1) % pairs];
            legs_a.push(segment_leg(surface, a, b)?);
        }
    } else {
        let first_inner = even[1];
        let last_inner = even[pairs - 1];
        let drop_first = drop_to_boundary(surface, first_inner)?;
        legs_a.push(leg_reversed(surface, &drop_first)?);
        for i in 1..pairs - 1 {
            legs_a.push(segment_leg(surface, even[i], even[i + 1])?);
        }
        let drop_last = drop_to_boundary(surface, last_inner)?;
        legs_a.push(leg_of(&drop_last));
    }
    let chain_a = Chain::new(legs_a);

    // second approximation through the midpoints
    let mids = chain_a.midpoints(surface)?;
    let mut legs_b: Vec<Leg> = Vec::with_capacity(mids.len() + 1);
    if sigma.closed {
        for i in 0..mids.len() {
            legs_b.push(segment_leg(surface, mids[i], mids[(i + 1) % mids.len()])?);
        }
    } else {
        let drop_first = drop_to_boundary(surface, mids[0])?;
        legs_b.push(leg_reversed(surface, &drop_first)?);
        for i in 0..mids.len() - 1 {
            legs_b.push(segment_leg(surface, mids[i], mids[i + 1])?);
        }
        let drop_last = drop_to_boundary(surface, *mids.last().unwrap())?;
        legs_b.push(leg_of(&drop_last));
    }
    let chain_b = Chain::new(legs_b);

    let (vertices, total_length) = chain_b.resample(surface, n, sigma.closed)?;
    let new_curve = BrokenGeodesic {
        vertices,
        closed: sigma.closed,
        endpoints_on_boundary: sigma.endpoints_on_boundary,
        total_length,
        lipschitz_bound: sigma.lipschitz_bound,
        epsilon: sigma.epsilon,
    };
    let decrease = sigma.total_length - total_length;
    Ok((new_curve, decrease))
}

fn segment_leg(surface: &Surface, a: SurfacePoint, b: SurfacePoint) -> Result<Leg> {
    if a.chart_dist(&b) < 1e-14 {
        return Ok(Leg {
            start: a,
            dir: (0.0, 0.0),
            len: 0.0,
            end: b,
        });
    }
    Ok(leg_of(&connect(surface, a, b)?))
}

/// Iterate the shortening map to a classified outcome.
pub fn shorten_run(
    surface: &Surface,
    sigma0: BrokenGeodesic,
    tol: f64,
    max_iter: usize,
) -> Result<ShorteningOutcome> {
    let mut lengths = vec![sigma0.total_length];
    let mut keeper = TrajectoryKeeper::new();
    keeper.push(sigma0.clone());
    let mut cur = sigma0;

    for _ in 0..max_iter {
        let (next, decrease) = shorten_step(surface, &cur)?;
        lengths.push(next.total_length);
        keeper.push(next.clone());

        if next.diameter(surface) < tol {
            return Ok(ShorteningOutcome {
                kind: OutcomeKind::Collapsed(next.vertices[0]),
                trajectory: keeper.finish(next),
                lengths,
            });
        }
        if decrease.abs() < FIXED_POINT_DECREASE {
            let residual = geodesic_residual(surface, &next)?;
            if residual < FIXED_POINT_RESIDUAL {
                let kind = if next.closed {
                    OutcomeKind::FixedClosedGeodesic
                } else {
                    OutcomeKind::FixedFreeBoundaryGeodesic
                };
                return Ok(ShorteningOutcome {
                    kind,
                    trajectory: keeper.finish(next),
                    lengths,
                });
            }
        }
        cur = next;
    }
    Ok(ShorteningOutcome {
        kind: OutcomeKind::MaxIterations,
        trajectory: keeper.finish(cur),
        lengths,
    })
}

/// Shorten many curves independently (parallel when enabled).
pub fn batch_shorten(
    surface: &Surface,
    curves: &[BrokenGeodesic],
    tol: f64,
    max_iter: usize,
) -> Vec<Result<ShorteningOutcome>> {
    exec::map(curves, |c| shorten_run(surface, c.clone(), tol, max_iter))
}

/// Turning-angle / boundary-orthogonality residual of a broken geodesic,
/// measured through exact mini geodesics (not chord differences).
pub fn geodesic_residual(surface: &Surface, curve: &BrokenGeodesic) -> Result<f64> {
    let n = curve.vertices.len();
    let mut worst: f64 = 0.0;
    let dir_between = |a: SurfacePoint, b: SurfacePoint| -> Result<Option<(Tangent, Tangent)>> {
        if a.chart_dist(&b) < 1e-12 {
            return Ok(None);
        }
        let path = connect(surface, a, b)?;
        let end_dir = path.terminal_velocity;
        Ok(Some((path.initial_velocity, end_dir)))
    };

    let idx = |k: usize| curve.vertices[k % n];
    let interior: Vec<usize> = if curve.closed {
        (0..n).collect()
    } else {
        (1..n - 1).collect()
    };
    for k in interior {
        let (prev, next) = (idx(k + n - 1), idx(k + 1));
        let me = idx(k);
        let (Some((_, incoming)), Some((outgoing, _))) =
            (dir_between(prev, me)?, dir_between(me, next)?)
        else {
            continue;
        };
        let g = surface.metric_at(clamp(surface, me))?;
        let turn = g.angle((incoming.du, incoming.dv), (outgoing.du, outgoing.dv));
        worst = worst.max(turn);
    }
    if !curve.closed {
        for (endpoint, inner) in [(0usize, 1usize), (n - 1, n - 2)] {
            let a = curve.vertices[endpoint];
            let b = curve.vertices[inner];
            let Some((outgoing, _)) = dir_between(a, b)? else {
                continue;
            };
            let (s, d) = surface.project_to_boundary(clamp(surface, a))?;
            if d > 1e-6 * surface.diameter_estimate() {
                worst = worst.max(f64::INFINITY);
                continue;
            }
            let frame = surface.boundary_eval(s);
            let g = surface.metric_at(clamp(surface, a))?;
            let angle = g.angle(
                (outgoing.du, outgoing.dv),
                (frame.tangent.du, frame.tangent.dv),
            );
            worst = worst.max((angle - std::f64::consts::FRAC_PI_2).abs());
        }
    }
    Ok(worst)
}

fn clamp(surface: &Surface, p: SurfacePoint) -> SurfacePoint {
    match surface {
        Surface::Flat(_) => p,
        Surface::Revolution(r) => SurfacePoint::new(p.u.clamp(1e-12, r.cut_height), p.v),
        Surface::Cap(c) => SurfacePoint::new(p.u.clamp(1e-12, c.colatitude), p.v),
    }
}

/// Frames of the length-monotone homotopy recorded by a collapsing run:
/// `n_frames` snapshots from the initial curve down to the terminal point.
pub fn homotopy_extract(
    outcome: &ShorteningOutcome,
    n_frames: usize,
) -> Result<Vec<BrokenGeodesic>> {
    let OutcomeKind::Collapsed(_) = outcome.kind else {
        return Err(Error::NotCollapsed);
    };
    let snaps = &outcome.trajectory;
    if snaps.is_empty() || n_frames == 0 {
        return Err(Error::ConfigInvalid("empty trajectory or zero frames".into()));
    }
    let last = snaps.len() - 1;
    let mut frames = Vec::with_capacity(n_frames);
    for k in 0..n_frames {
        let idx = if n_frames == 1 {
            last
        } else {
            ((k as f64) * (last as f64) / (n_frames as f64 - 1.0)).round() as usize
        };
        frames.push(snaps[idx.min(last)].clone());
    }
    Ok(frames)
}

/// Keeps a bounded number of trajectory snapshots by doubling the stride; the
/// first snapshot is always retained and `finish` appends the final curve.
struct TrajectoryKeeper {
    snaps: Vec<BrokenGeodesic>,
    stride: usize,
    since: usize,
}

const KEEPER_CAP: usize = 1024;

impl TrajectoryKeeper {
    fn new() -> Self {
        TrajectoryKeeper {
            snaps: Vec::new(),
            stride: 1,
            since: 0,
        }
    }

    fn push(&mut self, c: BrokenGeodesic) {
        self.since += 1;
        if self.since >= self.stride {
            self.snaps.push(c);
            self.since = 0;
            if self.snaps.len() >= KEEPER_CAP {
                let mut kept = Vec::with_capacity(KEEPER_CAP / 2 + 1);
                for (i, s) in self.snaps.drain(..).enumerate() {
                    if i % 2 == 0 {
                        kept.push(s);
                    }
                }
                self.snaps = kept;
                self.stride *= 2;
            }
        }
    }

    fn finish(mut self, last: BrokenGeodesic) -> Vec<BrokenGeodesic> {
        let replace = self
            .snaps
            .last()
            .map(|s| s.total_length <= last.total_length + 1e-15)
            .unwrap_or(false);
        if replace {
            *self.snaps.last_mut().unwrap() = last;
        } else {
            self.snaps.push(last);
        }
        self.snaps
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{FlatParams, SurfaceSpec};

    fn disk() -> Surface {
        Surface::build(&SurfaceSpec::FlatConvexDomain(FlatParams::Disk { radius: 1.0 })).unwrap()
    }

    fn diameter_curve(surface: &Surface, pairs: usize) -> BrokenGeodesic {
        let poly: Vec<SurfacePoint> = (0..=32)
            .map(|k| SurfacePoint::new(-1.0 + 2.0 * k as f64 / 32.0, 0.0))
            .collect();
        project_to_lambda(surface, &poly, pairs, false).unwrap()
    }

    #[test]
    fn project_diameter() {
        let s = disk();
        let bg = diameter_curve(&s, 16);
        assert_eq!(bg.vertices.len(), 33);
        assert!((bg.total_length - 2.0).abs() < 1e-9);
        assert!(bg.endpoints_on_boundary);
    }

    #[test]
    fn project_semicircle_shortens() {
        let s = disk();
        // upper unit semicircle sampled as a polyline; its chordal broken
        // geodesic is strictly shorter than the arc
        let poly: Vec<SurfacePoint> = (0..=64)
            .map(|k| {
                let t = std::f64::consts::PI * k as f64 / 64.0;
                SurfacePoint::new(t.cos(), t.sin())
            })
            .collect();
        let bg = project_to_lambda(&s, &poly, 32, false).unwrap();
        assert!(bg.total_length < std::f64::consts::PI);
        assert!(bg.total_length > 2.0);
    }

    #[test]
    fn project_closed_polygon_length() {
        let s = disk();
        let n = 32;
        let poly: Vec<SurfacePoint> = (0..n)
            .map(|k| {
                let t = k as f64 / n as f64 * std::f64::consts::TAU;
                SurfacePoint::new(0.5 * t.cos(), 0.5 * t.sin())
            })
            .collect();
        let bg = project_to_lambda(&s, &poly, n / 2, true).unwrap();
        let expected = 32.0 * (std::f64::consts::PI / 32.0).sin();
        assert!(
            (bg.total_length - expected).abs() < 1e-9,
            "{} vs {}",
            bg.total_length,
            expected
        );
    }

    #[test]
    fn diameter_is_fixed_point() {
        let s = disk();
        let bg = diameter_curve(&s, 8);
        let (next, dec) = shorten_step(&s, &bg).unwrap();
        assert!(dec.abs() < 1e-10, "decrease {dec}");
        let worst = bg
            .vertices
            .iter()
            .zip(&next.vertices)
            .map(|(a, b)| a.chart_dist(b))
            .fold(0.0f64, f64::max);
        assert!(worst < 1e-9, "moved {worst}");
    }

    #[test]
    fn offset_chord_strictly_shortens() {
        let s = disk();
        let y = 0.5;
        let half = (1.0f64 - y * y).sqrt();
        let poly: Vec<SurfacePoint> = (0..=32)
            .map(|k| SurfacePoint::new(-half + 2.0 * half * k as f64 / 32.0, y))
            .collect();
        let bg = project_to_lambda(&s, &poly, 8, false).unwrap();
        let (_, dec) = shorten_step(&s, &bg).unwrap();
        assert!(dec > 1e-6, "decrease {dec}");
    }

    #[test]
    fn chord_collapses_with_monotone_lengths() {
        let s = disk();
        let y = 0.5;
        let half = (1.0f64 - y * y).sqrt();
        let poly: Vec<SurfacePoint> = (0..=32)
            .map(|k| SurfacePoint::new(-half + 2.0 * half * k as f64 / 32.0, y))
            .collect();
        let bg = project_to_lambda(&s, &poly, 8, false).unwrap();
        let out = shorten_run(&s, bg, 2e-4, 20_000).unwrap();
        assert!(matches!(out.kind, OutcomeKind::Collapsed(_)), "{:?}", out.kind);
        for w in out.lengths.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
    }

    #[test]
    fn closed_polygon_collapses() {
        let s = disk();
        let n = 32;
        let poly: Vec<SurfacePoint> = (0..n)
            .map(|k| {
                let t = k as f64 / n as f64 * std::f64::consts::TAU;
                SurfacePoint::new(0.5 * t.cos(), 0.5 * t.sin())
            })
            .collect();
        let bg = project_to_lambda(&s, &poly, n / 2, true).unwrap();
        let out = shorten_run(&s, bg, 2e-4, 50_000).unwrap();
        assert!(matches!(out.kind, OutcomeKind::Collapsed(_)), "{:?}", out.kind);
    }

    #[test]
    fn homotopy_frames_bounded() {
        let s = disk();
        let y = 0.4;
        let half = (1.0f64 - y * y).sqrt();
        let poly: Vec<SurfacePoint> = (0..=32)
            .map(|k| SurfacePoint::new(-half + 2.0 * half * k as f64 / 32.0, y))
            .collect();
        let bg = project_to_lambda(&s, &poly, 8, false).unwrap();
        let len0 = bg.total_length;
        let out = shorten_run(&s, bg, 2e-4, 20_000).unwrap();
        let frames = homotopy_extract(&out, 64).unwrap();
        assert_eq!(frames.len(), 64);
        assert!((frames[0].total_length - len0).abs() < 1e-12);
        for f in &frames {
            assert!(f.total_length <= len0 + 1e-9);
        }
        assert!(frames.last().unwrap().diameter(&s) < 2e-4);
        assert!(matches!(
            homotopy_extract(
                &ShorteningOutcome {
                    kind: OutcomeKind::MaxIterations,
                    trajectory: out.trajectory.clone(),
                    lengths: out.lengths.clone()
                },
                8
            ),
            Err(Error::NotCollapsed)
        ));
    }
}
