//! Geodesic integration and boundary-value solvers.
//!
//! Geodesics are integrated in the ambient representation of each surface
//! (straight lines in the plane, sphere/cone flows for the rotational
//! surfaces) with an embedded 4(5) pair, absolute tolerance 1e-10 and
//! bisection event localization. Working in the ambient keeps the flow
//! regular at the rotation axis, where the `(u, theta)` charts degenerate;
//! the chart geodesic equation is used as an independent residual check
//! wherever the chart is regular.

use crate::error::Error;
use crate::geom::{wrap_into, wrap_signed, SurfacePoint, Tangent, V3};
use crate::surface::Surface;
use crate::Result;

const ODE_TOL: f64 = 1e-10;
const EVENT_TOL: f64 = 1e-12;
const MIN_STEP: f64 = 1e-13;

/// A sampled geodesic segment.
#[derive(Clone, Debug)]
pub struct GeodesicPath {
    pub start: SurfacePoint,
    /// Unit initial velocity.
    pub initial_velocity: Tangent,
    pub length: f64,
    /// Samples at uniform arc-length spacing, periodic coordinate lifted.
    pub samples: Vec<SurfacePoint>,
    /// Unit terminal velocity (chart components at the last sample).
    pub terminal_velocity: Tangent,
    /// Arc-length positions where the flow switched pieces (curvature jumps).
    pub piece_breaks: Vec<f64>,
}

impl GeodesicPath {
    pub fn end(&self) -> SurfacePoint {
        *self.samples.last().expect("path has samples")
    }

    pub fn spacing(&self) -> f64 {
        self.length / (self.samples.len() - 1) as f64
    }

    /// Unit velocity for retracing the path from its end.
    pub fn reversed_terminal(&self, surface: &Surface) -> Result<Tangent> {
        let t = self.terminal_velocity;
        surface.normalize(Tangent::new(t.base, -t.du, -t.dv))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExitKind {
    ReachedLength,
    HitBoundary { s_exit: f64, angle: f64 },
}

#[derive(Clone, Debug)]
pub struct ShootResult {
    pub path: GeodesicPath,
    pub exit: ExitKind,
}

/// A geodesic loop with vertex on the boundary.
#[derive(Clone, Debug)]
pub struct BoundaryLoop {
    pub vertex_s: f64,
    pub path: GeodesicPath,
    /// The two angles the loop makes with the boundary at the vertex.
    pub angles: (f64, f64),
}

// ---------------------------------------------------------------- integrator

#[derive(Clone, Copy, Debug)]
struct State {
    x: V3,
    v: V3,
    piece: u8,
}

impl State {
    fn from_chart(surface: &Surface, p: SurfacePoint, du: f64, dv: f64) -> Result<State> {
        let x = surface.embed(p);
        let v = surface.push_tangent(p, du, dv);
        let n = v.norm();
        if !n.is_finite() || n < 1e-300 {
            return Err(Error::ConfigInvalid(
                "degenerate launch data (chart tangent at a pole?)".into(),
            ));
        }
        Ok(State {
            x,
            v: v * (1.0 / n),
            piece: surface.piece_at(x),
        })
    }
}

/// One Fehlberg 4(5) trial step; returns the 5th order update and an error
/// estimate. The state is not projected here.
fn rkf45_step(surface: &Surface, st: &State, h: f64) -> (V3, V3, f64) {
    let f = |x: V3, v: V3| (v, surface.flow_accel(x, v, st.piece));
    let (x0, v0) = (st.x, st.v);

    let (k1x, k1v) = f(x0, v0);
    let (k2x, k2v) = f(x0 + k1x * (0.25 * h), v0 + k1v * (0.25 * h));
    let (k3x, k3v) = f(
        x0 + (k1x * (3.0 / 32.0) + k2x * (9.0 / 32.0)) * h,
        v0 + (k1v * (3.0 / 32.0) + k2v * (9.0 / 32.0)) * h,
    );
    let (k4x, k4v) = f(
        x0 + (k1x * (1932.0 / 2197.0) - k2x * (7200.0 / 2197.0) + k3x * (7296.0 / 2197.0)) * h,
        v0 + (k1v * (1932.0 / 2197.0) - k2v * (7200.0 / 2197.0) + k3v * (7296.0 / 2197.0)) * h,
    );
    let (k5x, k5v) = f(
        x0 + (k1x * (439.0 / 216.0) - k2x * 8.0 + k3x * (3680.0 / 513.0)
            - k4x * (845.0 / 4104.0))
            * h,
        v0 + (k1v * (439.0 / 216.0) - k2v * 8.0 + k3v * (3680.0 / 513.0)
            - k4v * (845.0 / 4104.0))
            * h,
    );
    let (k6x, k6v) = f(
        x0 - (k1x * (8.0 / 27.0) - k2x * 2.0 + k3x * (3544.0 / 2565.0) - k4x * (1859.0 / 4104.0)
            + k5x * (11.0 / 40.0))
            * h,
        v0 - (k1v * (8.0 / 27.0) - k2v * 2.0 + k3v * (3544.0 / 2565.0) - k4v * (1859.0 / 4104.0)
            + k5v * (11.0 / 40.0))
            * h,
    );

    let x4 = x0
        + (k1x * (25.0 / 216.0) + k3x * (1408.0 / 2565.0) + k4x * (2197.0 / 4104.0)
            - k5x * (1.0 / 5.0))
            * h;
    let v4 = v0
        + (k1v * (25.0 / 216.0) + k3v * (1408.0 / 2565.0) + k4v * (2197.0 / 4104.0)
            - k5v * (1.0 / 5.0))
            * h;
    let x5 = x0
        + (k1x * (16.0 / 135.0) + k3x * (6656.0 / 12825.0) + k4x * (28561.0 / 56430.0)
            - k5x * (9.0 / 50.0)
            + k6x * (2.0 / 55.0))
            * h;
    let v5 = v0
        + (k1v * (16.0 / 135.0) + k3v * (6656.0 / 12825.0) + k4v * (28561.0 / 56430.0)
            - k5v * (9.0 / 50.0)
            + k6v * (2.0 / 55.0))
            * h;

    let err = (x4 - x5).norm().max((v4 - v5).norm());
    (x5, v5, err)
}

struct Flight<'a> {
    surface: &'a Surface,
    st: State,
    t: f64,
    h: f64,
    h_max: f64,
    /// Arc positions of piece switches seen so far.
    breaks: Vec<f64>,
    stop_at_boundary: bool,
    /// Set once the trajectory is clearly inside; arms the boundary event.
    armed: bool,
}

enum FlightEnd {
    Reached,
    Boundary,
}

impl<'a> Flight<'a> {
    fn new(surface: &'a Surface, st: State, stop_at_boundary: bool) -> Flight<'a> {
        let scale = surface.diameter_estimate();
        Flight {
            surface,
            st,
            t: 0.0,
            h: 0.01 * scale,
            h_max: 0.05 * scale,
            breaks: Vec::new(),
            stop_at_boundary,
            armed: false,
        }
    }

    /// Advance by exactly `dt` handling piece switches, no boundary events.
    fn advance_plain(&mut self, dt: f64) -> Result<()> {
        let t_target = self.t + dt;
        while self.t < t_target - EVENT_TOL {
            let h = self.h.min(t_target - self.t);
            let (st, used) = self.single_step(h)?;
            self.st = st;
            self.t += used;
        }
        self.t = t_target;
        Ok(())
    }

    /// One accepted (possibly piece-split) step of size at most `h`.
    /// Returns the new state and the arc length actually advanced.
    fn single_step(&mut self, h: f64) -> Result<(State, f64)> {
        let mut h = h;
        loop {
            if h < MIN_STEP {
                return Err(Error::StepFailure { arc_length: self.t });
            }
            let (x, v, err) = rkf45_step(self.surface, &self.st, h);
            if err > ODE_TOL && h > MIN_STEP * 4.0 {
                h *= 0.5 * (ODE_TOL / err).powf(0.2).clamp(0.2, 0.9) / 0.5;
                h = h.max(MIN_STEP * 4.0);
                // explicit rejection loop; retry with the smaller h
                if err > ODE_TOL {
                    let (x2, v2, err2) = rkf45_step(self.surface, &self.st, h);
                    if err2 > ODE_TOL {
                        h *= 0.5;
                        continue;
                    }
                    return Ok((self.finish_step(x2, v2, h)?, h));
                }
            }
            // grow for the next step
            if err < 0.1 * ODE_TOL {
                self.h = (self.h * 2.0).min(self.h_max);
            }
            return Ok((self.finish_step(x, v, h)?, h));
        }
    }

    /// Project the raw update, splitting the step at a piece switch.
    fn finish_step(&mut self, x: V3, v: V3, h: f64) -> Result<State> {
        let switch_before = self.surface.piece_switch_value(self.st.x, self.st.piece);
        let switch_after = self.surface.piece_switch_value(x, self.st.piece);
        if switch_before > 0.0 && switch_after < 0.0 && switch_after.is_finite() {
            // bisect the switch time, then continue on the new piece
            let base = self.st;
            let mut lo = 0.0;
            let mut hi = h;
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let (xm, _, _) = rkf45_step(self.surface, &base, mid);
                if self.surface.piece_switch_value(xm, base.piece) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo < EVENT_TOL {
                    break;
                }
            }
            let (xs, vs, _) = rkf45_step(self.surface, &base, lo.max(0.5 * EVENT_TOL));
            let (xp, vp) = self.surface.project_state(xs, vs, base.piece);
            let mut st = State {
                x: xp,
                v: vp * (1.0 / vp.norm()),
                piece: self.surface.piece_at(xp),
            };
            if st.piece == base.piece {
                // nudge across the switch surface
                st.piece = if base.piece == 0 { 1 } else { 0 };
            }
            self.breaks.push(self.t + lo);
            // replay the remaining fraction on the new piece
            let rest = h - lo;
            if rest > EVENT_TOL {
                let (x2, v2, _) = rkf45_step(self.surface, &st, rest);
                let (xq, vq) = self.surface.project_state(x2, v2, st.piece);
                st = State {
                    x: xq,
                    v: vq * (1.0 / vq.norm()),
                    piece: st.piece,
                };
            }
            return Ok(st);
        }
        let (xp, vp) = self.surface.project_state(x, v, self.st.piece);
        Ok(State {
            x: xp,
            v: vp * (1.0 / vp.norm()),
            piece: self.surface.piece_at(xp),
        })
    }

    /// Run until `t_max` or a boundary crossing.
    fn run(&mut self, t_max: f64) -> Result<FlightEnd> {
        let gap0 = self.surface.boundary_gap(self.st.x);
        if self.stop_at_boundary && gap0 > 1e-9 {
            self.armed = true;
        }
        while self.t < t_max - EVENT_TOL {
            let before = self.st;
            let t_before = self.t;
            let h = self.h.min(t_max - self.t).min(self.band_limited_h());
            let (st, used) = self.single_step(h)?;
            self.st = st;
            self.t += used;

            if self.stop_at_boundary {
                let gap = self.surface.boundary_gap(self.st.x);
                if !self.armed && gap > 1e-9 {
                    self.armed = true;
                }
                if self.armed && gap < 0.0 {
                    // bisect the crossing within the last step
                    let mut lo = 0.0;
                    let mut hi = used;
                    for _ in 0..64 {
                        let mid = 0.5 * (lo + hi);
                        let mut probe = Flight {
                            surface: self.surface,
                            st: before,
                            t: 0.0,
                            h: mid.max(1e-9),
                            h_max: self.h_max,
                            breaks: Vec::new(),
                            stop_at_boundary: false,
                            armed: false,
                        };
                        probe.advance_plain(mid)?;
                        if self.surface.boundary_gap(probe.st.x) > 0.0 {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                        if hi - lo < 1e-11 {
                            break;
                        }
                    }
                    let mut fin = Flight {
                        surface: self.surface,
                        st: before,
                        t: 0.0,
                        h: hi.max(1e-9),
                        h_max: self.h_max,
                        breaks: Vec::new(),
                        stop_at_boundary: false,
                        armed: false,
                    };
                    fin.advance_plain(hi)?;
                    for b in fin.breaks {
                        self.breaks.push(t_before + b);
                    }
                    self.st = fin.st;
                    self.t = t_before + hi;
                    return Ok(FlightEnd::Boundary);
                }
            }
        }
        Ok(FlightEnd::Reached)
    }

    /// Keep steps short while grazing the boundary so crossings are not
    /// stepped over.
    fn band_limited_h(&self) -> f64 {
        if !self.stop_at_boundary {
            return self.h_max;
        }
        let gap = self.surface.boundary_gap(self.st.x);
        if gap < 0.1 * self.surface.diameter_estimate() {
            (2.0 * gap.abs()).max(0.005 * self.surface.diameter_estimate())
        } else {
            self.h_max
        }
    }
}

// ------------------------------------------------------------- public ops

/// Integrate from `p` with unit chart velocity `w` until `max_length` or the
/// boundary. The boundary crossing is bisection-localized; the terminal
/// sample snaps onto the boundary curve.
pub fn shoot(
    surface: &Surface,
    p: SurfacePoint,
    w: Tangent,
    max_length: f64,
) -> Result<ShootResult> {
    shoot_sampled(surface, p, w, max_length, default_samples(surface, max_length))
}

pub fn shoot_sampled(
    surface: &Surface,
    p: SurfacePoint,
    w: Tangent,
    max_length: f64,
    n_samples: usize,
) -> Result<ShootResult> {
    let scale = surface.diameter_estimate();
    if !surface.contains(p, 1e-8 * scale) {
        return Err(Error::PointOutsideDomain { u: p.u, v: p.v });
    }
    let st0 = unit_state(surface, p, w)?;

    // outward shot from the boundary exits immediately
    let gap0 = surface.boundary_gap(st0.x);
    if gap0 <= 1e-9 * scale {
        let probe = rkf45_step(surface, &st0, 1e-7 * scale).0;
        if surface.boundary_gap(probe) < gap0 {
            let (s_exit, _) = surface.project_to_boundary(clamp_to_domain(surface, p))?;
            let angle = boundary_angle(surface, p, (w.du, w.dv), s_exit)?;
            return Ok(ShootResult {
                path: GeodesicPath {
                    start: p,
                    initial_velocity: w,
                    length: 0.0,
                    samples: vec![p, p],
                    terminal_velocity: w,
                    piece_breaks: Vec::new(),
                },
                exit: ExitKind::HitBoundary { s_exit, angle },
            });
        }
    }

    let mut flight = Flight::new(surface, st0, true);
    let end = flight.run(max_length)?;
    let length = flight.t;
    let breaks = flight.breaks.clone();

    let (samples, terminal) = resample(surface, st0, p.v, length, n_samples.max(2))?;
    match end {
        FlightEnd::Reached => {
            let tv = terminal_tangent(surface, *samples.last().unwrap(), terminal);
            Ok(ShootResult {
                path: GeodesicPath {
                    start: p,
                    initial_velocity: w,
                    length,
                    samples,
                    terminal_velocity: tv,
                    piece_breaks: breaks,
                },
                exit: ExitKind::ReachedLength,
            })
        }
        FlightEnd::Boundary => {
            let mut samples = samples;
            let hint = samples[samples.len() - 1].v;
            let exit_chart = surface.chart_of(flight.st.x, hint);
            let (s_exit, _) = surface.project_to_boundary(clamp_to_domain(surface, exit_chart))?;
            let snapped = snap_to_boundary(surface, s_exit, exit_chart);
            *samples.last_mut().unwrap() = snapped;
            let (du, dv) = surface.pull_tangent(snapped, terminal);
            let angle = boundary_angle(surface, snapped, (du, dv), s_exit)?;
            let tv = terminal_tangent(surface, snapped, terminal);
            Ok(ShootResult {
                path: GeodesicPath {
                    start: p,
                    initial_velocity: w,
                    length,
                    samples,
                    terminal_velocity: tv,
                    piece_breaks: breaks,
                },
                exit: ExitKind::HitBoundary { s_exit, angle },
            })
        }
    }
}

/// Endpoint-only integration without boundary events (flows extend past the
/// cut on every catalog surface).
pub(crate) fn shoot_endpoint(
    surface: &Surface,
    p: SurfacePoint,
    du: f64,
    dv: f64,
    len: f64,
) -> Result<(SurfacePoint, V3)> {
    let st0 = unit_state(surface, p, Tangent::new(p, du, dv))?;
    let mut flight = Flight::new(surface, st0, false);
    flight.advance_plain(len)?;
    Ok((surface.chart_of(flight.st.x, p.v), flight.st.v))
}

/// Shortest geodesic from `p` to `q` by Newton shooting on the launch angle
/// and length, with a continuation fallback. Both endpoints must lie in the
/// closed domain; the solved path must not leave it.
pub fn connect(surface: &Surface, p: SurfacePoint, q: SurfacePoint) -> Result<GeodesicPath> {
    let len_guess = chord_guess(surface, p, q);
    connect_sampled(surface, p, q, default_samples(surface, len_guess))
}

pub fn connect_sampled(
    surface: &Surface,
    p: SurfacePoint,
    q: SurfacePoint,
    n_samples: usize,
) -> Result<GeodesicPath> {
    let scale = surface.diameter_estimate();
    for pt in [p, q] {
        if !surface.contains(pt, 1e-7 * scale) {
            return Err(Error::PointOutsideDomain { u: pt.u, v: pt.v });
        }
    }
    let (alpha, len, st0) = solve_connect(surface, p, q)?;
    let w = direction_from_angle(surface, p, alpha)?;
    let (samples, terminal) = resample(surface, st0, p.v, len, n_samples.max(2))?;
    let mut samples = samples;
    // endpoint is exact by construction of the solve; snap exactly to q
    *samples.last_mut().unwrap() = SurfacePoint::new(q.u, lift_near(samples.last().unwrap().v, q.v));
    let tv = terminal_tangent(surface, *samples.last().unwrap(), terminal);
    let breaks = collect_breaks(surface, st0, len)?;
    let path = GeodesicPath {
        start: p,
        initial_velocity: w,
        length: len,
        samples,
        terminal_velocity: tv,
        piece_breaks: breaks,
    };
    let worst = path
        .samples
        .iter()
        .map(|s| surface.signed_inside(*s))
        .fold(f64::INFINITY, f64::min);
    if worst < -1e-6 * scale {
        return Err(Error::PathLeavesDomain { gap: worst });
    }
    Ok(path)
}

/// Shortest geodesic from `p` to the boundary; meets it orthogonally.
pub fn drop_to_boundary(surface: &Surface, p: SurfacePoint) -> Result<GeodesicPath> {
    let (s_star, d) = surface.project_to_boundary(p)?;
    let foot = surface.boundary_eval(s_star).point;
    if d < 1e-12 * surface.diameter_estimate() {
        let stay = Tangent::new(p, 0.0, 0.0);
        return Ok(GeodesicPath {
            start: p,
            initial_velocity: stay,
            length: 0.0,
            samples: vec![p, SurfacePoint::new(foot.u, lift_near(p.v, foot.v))],
            terminal_velocity: stay,
            piece_breaks: Vec::new(),
        });
    }
    connect(surface, p, SurfacePoint::new(foot.u, lift_near(p.v, foot.v)))
}

/// Newton solve for a geodesic meeting the boundary orthogonally at both
/// endpoints, seeded at boundary parameter `seed_s` and launch angle
/// `seed_angle` (radians from the boundary tangent, in `(0, pi)`).
pub fn find_free_boundary_geodesic(
    surface: &Surface,
    seed_s: f64,
    seed_angle: f64,
) -> Result<GeodesicPath> {
    if !(0.0 < seed_angle && seed_angle < std::f64::consts::PI) {
        return Err(Error::ConfigInvalid("seed angle must lie in (0, pi)".into()));
    }
    let max_len = 3.0 * surface.diameter_estimate();
    let half_pi = std::f64::consts::FRAC_PI_2;
    let residual = |z: &[f64; 2]| -> Result<[f64; 2]> {
        let (exit_angle, _, _) = boundary_shot(surface, z[0], z[1], max_len)?;
        Ok([z[1] - half_pi, exit_angle - half_pi])
    };
    let z = newton2(residual, [seed_s, seed_angle], 1e-10, 60).map_err(|e| match e {
        Error::NoConvergence { iterations, residual, .. } => Error::NoConvergence {
            context: "free boundary geodesic",
            iterations,
            residual,
        },
        other => other,
    })?;
    let frame = surface.boundary_eval(z[0]);
    let w = launch(surface, &frame, z[1]);
    let shot = shoot_sampled(
        surface,
        frame.point,
        w,
        max_len,
        default_samples(surface, surface.diameter_estimate()),
    )?;
    match shot.exit {
        ExitKind::HitBoundary { angle, .. } if (angle - half_pi).abs() < 1e-6 => Ok(shot.path),
        ExitKind::HitBoundary { angle, .. } => Err(Error::NoConvergence {
            context: "free boundary geodesic",
            iterations: 0,
            residual: (angle - half_pi).abs(),
        }),
        ExitKind::ReachedLength => Err(Error::NoConvergence {
            context: "free boundary geodesic",
            iterations: 0,
            residual: f64::INFINITY,
        }),
    }
}

/// Sweep the launch angle at `seed_s` for a geodesic loop closing up at its
/// vertex with equal boundary angles, then polish with a 2x2 Newton solve.
pub fn find_boundary_geodesic_loop(surface: &Surface, seed_s: f64) -> Result<BoundaryLoop> {
    let total = surface.boundary_total();
    let max_len = 6.0 * surface.diameter_estimate();
    let closure = |s: f64, alpha: f64| -> Result<(f64, f64)> {
        let (exit_angle, s_exit, len) = boundary_shot(surface, s, alpha, max_len)?;
        let gap = wrap_signed(s_exit - s, total);
        Ok((gap, if len > 0.25 * surface.diameter_estimate() {
            exit_angle
        } else {
            f64::NAN
        }))
    };

    // sweep the launch angle, keep brackets whose wrapped closure gap crosses
    // zero away from the wrap discontinuity
    let n = 180;
    let mut bracket = None;
    let mut prev: Option<(f64, f64)> = None;
    for k in 1..n {
        let alpha = k as f64 / n as f64 * std::f64::consts::PI;
        let Ok((gap, exit_angle)) = closure(seed_s, alpha) else {
            prev = None;
            continue;
        };
        if !exit_angle.is_finite() {
            prev = None;
            continue;
        }
        if let Some((pa, pg)) = prev {
            if pg.signum() != gap.signum() && pg.abs().max(gap.abs()) < 0.1 * total {
                bracket = Some((pa, alpha));
                break;
            }
        }
        prev = Some((alpha, gap));
    }
    let Some((mut lo, mut hi)) = bracket else {
        return Err(Error::NoLoopFound { attempts: n });
    };

    // bisect the closure gap at fixed vertex
    for _ in 0..70 {
        let mid = 0.5 * (lo + hi);
        let (g_lo, _) = closure(seed_s, lo)?;
        let (g_mid, _) = closure(seed_s, mid)?;
        if g_lo.signum() != g_mid.signum() {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    let alpha0 = 0.5 * (lo + hi);

    // polish (vertex, angle) on (closure gap, angle asymmetry)
    let residual = |z: &[f64; 2]| -> Result<[f64; 2]> {
        let (exit_angle, s_exit, _) = boundary_shot(surface, z[0], z[1], max_len)?;
        Ok([wrap_signed(s_exit - z[0], total), z[1] - exit_angle])
    };
    let z = newton2(residual, [seed_s, alpha0], 1e-10, 50)?;

    let frame = surface.boundary_eval(z[0]);
    let w = launch(surface, &frame, z[1]);
    let shot = shoot_sampled(
        surface,
        frame.point,
        w,
        max_len,
        default_samples(surface, max_len / 3.0),
    )?;
    let ExitKind::HitBoundary { s_exit, angle } = shot.exit else {
        return Err(Error::NoLoopFound { attempts: n });
    };
    let gap = wrap_signed(s_exit - z[0], total).abs();
    if gap > 1e-8 * (1.0 + total) {
        return Err(Error::NoConvergence {
            context: "boundary geodesic loop",
            iterations: 0,
            residual: gap,
        });
    }
    Ok(BoundaryLoop {
        vertex_s: wrap_into(z[0], total),
        path: shot.path,
        angles: (z[1], angle),
    })
}

/// Second variation of length under a unit-normal variation with endpoints
/// sliding on the boundary: `-k_g(0) - k_g(L) - int K ds`.
pub fn second_variation_normal(surface: &Surface, path: &GeodesicPath) -> Result<f64> {
    let res = free_boundary_residual(surface, path)?;
    if res > 1e-6 {
        return Err(Error::NotFreeBoundary { residual: res });
    }
    let (s0, _) = surface.project_to_boundary(clamp_to_domain(surface, path.start))?;
    let (s1, _) = surface.project_to_boundary(clamp_to_domain(surface, path.end()))?;
    let kg0 = surface.boundary_eval(s0).kg;
    let kg1 = surface.boundary_eval(s1).kg;
    Ok(-kg0 - kg1 - curvature_integral(surface, path))
}

/// Integral of the Gauss curvature along the path; exact per flow piece
/// since K is piecewise constant on the catalog surfaces.
pub fn curvature_integral(surface: &Surface, path: &GeodesicPath) -> f64 {
    match surface {
        Surface::Flat(_) => 0.0,
        Surface::Cap(c) => path.length / (c.radius * c.radius),
        Surface::Revolution(r) => {
            let k_nose = 1.0 / (r.cap_radius * r.cap_radius);
            let mut cuts = vec![0.0];
            cuts.extend(path.piece_breaks.iter().copied());
            cuts.push(path.length);
            let mut acc = 0.0;
            for win in cuts.windows(2) {
                let mid = 0.5 * (win[0] + win[1]);
                let u = sample_at(path, mid).u;
                if r.piece_of(u) == crate::surface::RevPiece::Nose {
                    acc += k_nose * (win[1] - win[0]);
                }
            }
            acc
        }
    }
}

/// Max deviation of the endpoint boundary angles from pi/2.
pub fn free_boundary_residual(surface: &Surface, path: &GeodesicPath) -> Result<f64> {
    let half_pi = std::f64::consts::FRAC_PI_2;
    let scale = surface.diameter_estimate();
    let ends = [
        (path.start, path.samples[1]),
        (path.end(), path.samples[path.samples.len() - 2]),
    ];
    let mut worst: f64 = 0.0;
    for (endpoint, inner) in ends {
        let (s, d) = surface.project_to_boundary(clamp_to_domain(surface, endpoint))?;
        if d > 1e-6 * scale {
            return Ok(f64::INFINITY);
        }
        let w = surface.embed(inner) - surface.embed(endpoint);
        let (du, dv) = surface.pull_tangent(endpoint, w);
        let angle = boundary_angle(surface, endpoint, (du, dv), s)?;
        worst = worst.max((angle - half_pi).abs());
    }
    Ok(worst)
}

/// Chart-geodesic-equation residual of a sampled path, skipping samples near
/// chart singularities and piece breaks. Fourth-order stencils; independent
/// of the ambient integration that produced the samples.
pub fn chart_ode_residual(surface: &Surface, path: &GeodesicPath) -> f64 {
    let n = path.samples.len();
    if n < 7 {
        return 0.0;
    }
    let h = path.spacing();
    let mut worst: f64 = 0.0;
    'outer: for i in 2..n - 2 {
        let p = path.samples[i];
        // chart-singular neighborhoods (rotation axis)
        match surface {
            Surface::Revolution(_) | Surface::Cap(_) => {
                if p.u < 0.05 * surface.diameter_estimate() {
                    continue;
                }
            }
            Surface::Flat(_) => {}
        }
        let t_i = i as f64 * h;
        for b in &path.piece_breaks {
            if (t_i - b).abs() < 3.0 * h {
                continue 'outer;
            }
        }
        let s = &path.samples;
        let d1 = (
            (s[i - 2].u - 8.0 * s[i - 1].u + 8.0 * s[i + 1].u - s[i + 2].u) / (12.0 * h),
            (s[i - 2].v - 8.0 * s[i - 1].v + 8.0 * s[i + 1].v - s[i + 2].v) / (12.0 * h),
        );
        let d2 = (
            (-s[i - 2].u + 16.0 * s[i - 1].u - 30.0 * s[i].u + 16.0 * s[i + 1].u - s[i + 2].u)
                / (12.0 * h * h),
            (-s[i - 2].v + 16.0 * s[i - 1].v - 30.0 * s[i].v + 16.0 * s[i + 1].v - s[i + 2].v)
                / (12.0 * h * h),
        );
        let Ok(gamma) = surface.christoffel_at(p) else {
            continue;
        };
        let acc = gamma.acceleration(d1);
        let r = (d2.0 - acc.0).hypot(d2.1 - acc.1);
        worst = worst.max(r);
    }
    worst
}

/// Re-integrate a path from its stored initial data: `n` chart samples at
/// uniform arc positions over `[t0, t1]`.
pub fn resample_path(
    surface: &Surface,
    path: &GeodesicPath,
    n: usize,
    t0: f64,
    t1: f64,
) -> Result<Vec<SurfacePoint>> {
    let n = n.max(2);
    let t0 = t0.clamp(0.0, path.length);
    let t1 = t1.clamp(0.0, path.length);
    if path.length <= 0.0 || (t1 - t0).abs() < 1e-14 {
        let p = sample_at(path, t0);
        return Ok(vec![p; n]);
    }
    let st0 = State::from_chart(
        surface,
        path.start,
        path.initial_velocity.du,
        path.initial_velocity.dv,
    )?;
    let mut flight = Flight::new(surface, st0, false);
    flight.advance_plain(t0)?;
    let mut hint = sample_at(path, t0).v;
    let mut out = Vec::with_capacity(n);
    let p0 = surface.chart_of(flight.st.x, hint);
    hint = p0.v;
    out.push(p0);
    let dt = (t1 - t0) / (n - 1) as f64;
    for _ in 1..n {
        flight.advance_plain(dt)?;
        let p = surface.chart_of(flight.st.x, hint);
        hint = p.v;
        out.push(p);
    }
    Ok(out)
}

/// Ambient unit velocity of the path at arc length `t`.
pub fn velocity_at(surface: &Surface, path: &GeodesicPath, t: f64) -> Result<V3> {
    let t = t.clamp(0.0, path.length);
    let st0 = State::from_chart(
        surface,
        path.start,
        path.initial_velocity.du,
        path.initial_velocity.dv,
    )?;
    if t <= 0.0 {
        return Ok(st0.v);
    }
    let mut flight = Flight::new(surface, st0, false);
    flight.advance_plain(t)?;
    Ok(flight.st.v)
}

/// Chart point of the path at arc length `t` (linear between samples).
pub fn sample_at(path: &GeodesicPath, t: f64) -> SurfacePoint {
    let n = path.samples.len();
    if path.length <= 0.0 || n < 2 {
        return path.start;
    }
    let x = (t / path.length).clamp(0.0, 1.0) * (n - 1) as f64;
    let i = (x.floor() as usize).min(n - 2);
    let f = x - i as f64;
    let a = path.samples[i];
    let b = path.samples[i + 1];
    SurfacePoint::new(a.u + f * (b.u - a.u), a.v + f * (b.v - a.v))
}

// ------------------------------------------------------------- internals

fn terminal_tangent(surface: &Surface, end: SurfacePoint, v_amb: V3) -> Tangent {
    let (du, dv) = surface.pull_tangent(clamp_chart(surface, end), v_amb);
    surface
        .normalize(Tangent::new(end, du, dv))
        .unwrap_or(Tangent::new(end, du, dv))
}

fn default_samples(surface: &Surface, len: f64) -> usize {
    ((len / surface.sample_spacing()).ceil() as usize).clamp(32, 4096) + 1
}

fn unit_state(surface: &Surface, p: SurfacePoint, w: Tangent) -> Result<State> {
    // accept slightly off-unit input, normalize in the ambient
    State::from_chart(surface, p, w.du, w.dv)
}

fn clamp_to_domain(surface: &Surface, p: SurfacePoint) -> SurfacePoint {
    match surface {
        Surface::Flat(_) => p,
        Surface::Revolution(r) => SurfacePoint::new(p.u.clamp(0.0, r.cut_height), p.v),
        Surface::Cap(c) => SurfacePoint::new(p.u.clamp(0.0, c.colatitude), p.v),
    }
}

fn snap_to_boundary(surface: &Surface, s: f64, near: SurfacePoint) -> SurfacePoint {
    let b = surface.boundary_eval(s).point;
    SurfacePoint::new(b.u, lift_near(near.v, b.v))
}

/// Lift `target` (a possibly-wrapped periodic coordinate) near `reference`.
fn lift_near(reference: f64, target: f64) -> f64 {
    reference + wrap_signed(target - reference, std::f64::consts::TAU)
}

fn boundary_angle(
    surface: &Surface,
    p: SurfacePoint,
    w: (f64, f64),
    s: f64,
) -> Result<f64> {
    let frame = surface.boundary_eval(s);
    let g = surface.metric_at(clamp_chart(surface, p))?;
    Ok(g.angle(w, (frame.tangent.du, frame.tangent.dv)))
}

fn clamp_chart(surface: &Surface, p: SurfacePoint) -> SurfacePoint {
    match surface {
        Surface::Flat(_) => p,
        Surface::Revolution(r) => SurfacePoint::new(p.u.clamp(1e-12, r.cut_height), p.v),
        Surface::Cap(c) => SurfacePoint::new(p.u.clamp(1e-12, c.colatitude), p.v),
    }
}

/// Launch tangent at angle `alpha` from the boundary tangent, rotated toward
/// the inward normal.
fn launch(surface: &Surface, frame: &crate::surface::BoundaryFrame, alpha: f64) -> Tangent {
    let _ = surface;
    Tangent::new(
        frame.point,
        alpha.cos() * frame.tangent.du + alpha.sin() * frame.inward.du,
        alpha.cos() * frame.tangent.dv + alpha.sin() * frame.inward.dv,
    )
}

/// Shoot from boundary parameter `s` at angle `alpha`; returns
/// `(exit angle, exit boundary parameter, path length)`.
fn boundary_shot(surface: &Surface, s: f64, alpha: f64, max_len: f64) -> Result<(f64, f64, f64)> {
    let frame = surface.boundary_eval(s);
    let w = launch(surface, &frame, alpha);
    let shot = shoot_sampled(surface, frame.point, w, max_len, 2)?;
    match shot.exit {
        ExitKind::HitBoundary { s_exit, angle } => Ok((angle, s_exit, shot.path.length)),
        ExitKind::ReachedLength => Err(Error::NoConvergence {
            context: "boundary shot did not return to the boundary",
            iterations: 0,
            residual: f64::INFINITY,
        }),
    }
}

/// g-orthonormal frame at `p` with positive chart orientation.
fn chart_frame(surface: &Surface, p: SurfacePoint) -> Result<((f64, f64), (f64, f64))> {
    let g = surface.metric_at(clamp_chart(surface, p))?;
    let e1 = (1.0 / g.g11.sqrt(), 0.0);
    let det = g.det();
    let norm = (g.g11 * det).sqrt();
    let e2 = (-g.g12 / norm, g.g11 / norm);
    Ok((e1, e2))
}

fn direction_from_angle(surface: &Surface, p: SurfacePoint, alpha: f64) -> Result<Tangent> {
    let (e1, e2) = chart_frame(surface, p)?;
    Ok(Tangent::new(
        p,
        alpha.cos() * e1.0 + alpha.sin() * e2.0,
        alpha.cos() * e1.1 + alpha.sin() * e2.1,
    ))
}

fn chord_guess(surface: &Surface, p: SurfacePoint, q: SurfacePoint) -> f64 {
    surface.embed(p).dist(surface.embed(q)).max(1e-9)
}

/// Newton shooting for `connect`: unknowns are the launch angle and length.
fn solve_connect(surface: &Surface, p: SurfacePoint, q: SurfacePoint) -> Result<(f64, f64, State)> {
    let q_amb = surface.embed(q);
    let scale = surface.diameter_estimate();
    if surface.embed(p).dist(q_amb) < 1e-13 * scale {
        let st = State::from_chart(surface, p, 1.0, 0.0).unwrap_or(State {
            x: surface.embed(p),
            v: V3::new(1.0, 0.0, 0.0),
            piece: surface.piece_at(surface.embed(p)),
        });
        return Ok((0.0, 0.0, st));
    }

    // residual of a trial (alpha, len): ambient displacement at the target,
    // expressed in an orthonormal tangent frame there
    let frame_q = ambient_frame(surface, q);

    let attempt = |alpha0: f64, len0: f64| -> Result<(f64, f64)> {
        let mut alpha = alpha0;
        let mut len = len0.max(1e-9 * scale);
        let mut best_r = f64::INFINITY;
        for it in 0..60 {
            let r0 = connect_residual(surface, p, alpha, len, q_amb, &frame_q)?;
            let rn = r0[0].hypot(r0[1]);
            if rn < 1e-12 * (1.0 + len) * scale.max(1.0) {
                return Ok((alpha, len));
            }
            best_r = best_r.min(rn);
            let da = 1e-7;
            let dl = 1e-7 * (1.0 + len);
            let ra = connect_residual(surface, p, alpha + da, len, q_amb, &frame_q)?;
            let rl = connect_residual(surface, p, alpha, len + dl, q_amb, &frame_q)?;
            let j = [
                [(ra[0] - r0[0]) / da, (rl[0] - r0[0]) / dl],
                [(ra[1] - r0[1]) / da, (rl[1] - r0[1]) / dl],
            ];
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            if det.abs() < 1e-18 {
                return Err(Error::NoConvergence {
                    context: "connect: singular shooting Jacobian",
                    iterations: it,
                    residual: rn,
                });
            }
            let mut step_a = (-r0[0] * j[1][1] + r0[1] * j[0][1]) / det;
            let mut step_l = (-r0[1] * j[0][0] + r0[0] * j[1][0]) / det;
            // damping
            let mut lam = 1.0;
            for _ in 0..8 {
                let trial_r = connect_residual(
                    surface,
                    p,
                    alpha + lam * step_a,
                    (len + lam * step_l).max(1e-9 * scale),
                    q_amb,
                    &frame_q,
                )?;
                if trial_r[0].hypot(trial_r[1]) < rn {
                    break;
                }
                lam *= 0.5;
            }
            step_a *= lam;
            step_l *= lam;
            alpha += step_a;
            len = (len + step_l).max(1e-9 * scale);
        }
        Err(Error::NoConvergence {
            context: "connect",
            iterations: 60,
            residual: best_r,
        })
    };

    // initial guess from the chart chord
    let dv0 = match surface {
        Surface::Flat(_) => q.v - p.v,
        _ => wrap_signed(q.v - p.v, std::f64::consts::TAU),
    };
    let (e1, e2) = chart_frame(surface, p)?;
    let g = surface.metric_at(clamp_chart(surface, p))?;
    let delta = (q.u - p.u, dv0);
    let c1 = g.dot(delta, e1);
    let c2 = g.dot(delta, e2);
    let alpha0 = c2.atan2(c1);
    let len0 = chord_guess(surface, p, q);

    let solved = attempt(alpha0, len0).or_else(|_| {
        // continuation along the chart chord
        let mut alpha = alpha0;
        let mut len = len0 / 8.0;
        for k in 1..=8 {
            let f = k as f64 / 8.0;
            let target = SurfacePoint::new(p.u + f * (q.u - p.u), p.v + f * dv0);
            let t_amb = surface.embed(target);
            let t_frame = ambient_frame(surface, target);
            let mut ok = false;
            let mut a = alpha;
            let mut l = len.max(1e-6 * scale);
            for _ in 0..60 {
                let r = connect_residual(surface, p, a, l, t_amb, &t_frame)?;
                let rn = r[0].hypot(r[1]);
                if rn < 1e-11 * scale.max(1.0) {
                    ok = true;
                    break;
                }
                let da = 1e-7;
                let dl = 1e-7 * (1.0 + l);
                let ra = connect_residual(surface, p, a + da, l, t_amb, &t_frame)?;
                let rl = connect_residual(surface, p, a, l + dl, t_amb, &t_frame)?;
                let j = [
                    [(ra[0] - r[0]) / da, (rl[0] - r[0]) / dl],
                    [(ra[1] - r[1]) / da, (rl[1] - r[1]) / dl],
                ];
                let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
                if det.abs() < 1e-18 {
                    break;
                }
                a += (-r[0] * j[1][1] + r[1] * j[0][1]) / det;
                l = (l + (-r[1] * j[0][0] + r[0] * j[1][0]) / det).max(1e-9 * scale);
            }
            if !ok {
                return Err(Error::NoConvergence {
                    context: "connect (continuation)",
                    iterations: 60 * k,
                    residual: f64::NAN,
                });
            }
            alpha = a;
            len = l;
        }
        Ok((alpha, len))
    })?;

    let (alpha, len) = solved;
    let w = direction_from_angle(surface, p, alpha)?;
    let st = State::from_chart(surface, p, w.du, w.dv)?;
    Ok((alpha, len, st))
}

fn connect_residual(
    surface: &Surface,
    p: SurfacePoint,
    alpha: f64,
    len: f64,
    target: V3,
    frame: &(V3, V3),
) -> Result<[f64; 2]> {
    let w = direction_from_angle(surface, p, alpha)?;
    let st0 = State::from_chart(surface, p, w.du, w.dv)?;
    let mut flight = Flight::new(surface, st0, false);
    flight.advance_plain(len)?;
    let dx = flight.st.x - target;
    Ok([dx.dot(frame.0), dx.dot(frame.1)])
}

/// Orthonormal tangent-plane frame at a chart point, in ambient coordinates.
fn ambient_frame(surface: &Surface, p: SurfacePoint) -> (V3, V3) {
    match surface {
        Surface::Flat(_) => (V3::new(1.0, 0.0, 0.0), V3::new(0.0, 1.0, 0.0)),
        _ => {
            let e1 = surface.push_tangent(clamp_chart(surface, p), 1.0, 0.0).normalized();
            let e2r = surface.push_tangent(clamp_chart(surface, p), 0.0, 1.0);
            let e2 = (e2r - e1 * e2r.dot(e1)).normalized();
            (e1, e2)
        }
    }
}

/// Re-integrate with uniform output samples; returns the chart samples (with
/// the periodic coordinate lifted) and the terminal ambient velocity.
fn resample(
    surface: &Surface,
    st0: State,
    v_hint0: f64,
    length: f64,
    n: usize,
) -> Result<(Vec<SurfacePoint>, V3)> {
    let mut out = Vec::with_capacity(n);
    let mut hint = v_hint0;
    let p0 = surface.chart_of(st0.x, hint);
    out.push(p0);
    if length <= 0.0 {
        let p = surface.chart_of(st0.x, hint);
        while out.len() < n.max(2) {
            out.push(p);
        }
        return Ok((out, st0.v));
    }
    let mut flight = Flight::new(surface, st0, false);
    let dt = length / (n - 1) as f64;
    for _ in 1..n {
        flight.advance_plain(dt)?;
        let p = surface.chart_of(flight.st.x, hint);
        hint = p.v;
        out.push(p);
    }
    Ok((out, flight.st.v))
}

fn collect_breaks(surface: &Surface, st0: State, length: f64) -> Result<Vec<f64>> {
    if !matches!(surface, Surface::Revolution(_)) || length <= 0.0 {
        return Ok(Vec::new());
    }
    let mut flight = Flight::new(surface, st0, false);
    flight.advance_plain(length)?;
    Ok(flight.breaks)
}

/// Damped 2x2 Newton with a Tikhonov guard for rotationally degenerate
/// residuals.
fn newton2<F>(mut f: F, z0: [f64; 2], tol: f64, max_iter: usize) -> Result<[f64; 2]>
where
    F: FnMut(&[f64; 2]) -> Result<[f64; 2]>,
{
    let mut z = z0;
    let mut last_norm = f64::INFINITY;
    for it in 0..max_iter {
        let r = f(&z)?;
        let rn = r[0].hypot(r[1]);
        if rn < tol {
            return Ok(z);
        }
        last_norm = rn;
        let d0 = 1e-7 * (1.0 + z[0].abs());
        let d1 = 1e-7;
        let r0 = f(&[z[0] + d0, z[1]])?;
        let r1 = f(&[z[0], z[1] + d1])?;
        let j = [
            [(r0[0] - r[0]) / d0, (r1[0] - r[0]) / d1],
            [(r0[1] - r[1]) / d0, (r1[1] - r[1]) / d1],
        ];
        // normal equations with a small ridge
        let jtj = [
            [
                j[0][0] * j[0][0] + j[1][0] * j[1][0],
                j[0][0] * j[0][1] + j[1][0] * j[1][1],
            ],
            [
                j[0][0] * j[0][1] + j[1][0] * j[1][1],
                j[0][1] * j[0][1] + j[1][1] * j[1][1],
            ],
        ];
        let jtr = [
            j[0][0] * r[0] + j[1][0] * r[1],
            j[0][1] * r[0] + j[1][1] * r[1],
        ];
        let ridge = 1e-12 * (1.0 + jtj[0][0].max(jtj[1][1]));
        let a = [
            [jtj[0][0] + ridge, jtj[0][1]],
            [jtj[1][0], jtj[1][1] + ridge],
        ];
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        if det.abs() < 1e-30 {
            return Err(Error::NoConvergence {
                context: "newton2: singular system",
                iterations: it,
                residual: rn,
            });
        }
        let mut dz = [
            (-jtr[0] * a[1][1] + jtr[1] * a[0][1]) / det,
            (-jtr[1] * a[0][0] + jtr[0] * a[1][0]) / det,
        ];
        let mut lam = 1.0;
        for _ in 0..8 {
            let trial = [z[0] + lam * dz[0], z[1] + lam * dz[1]];
            if let Ok(rt) = f(&trial) {
                if rt[0].hypot(rt[1]) < rn {
                    break;
                }
            }
            lam *= 0.5;
        }
        dz[0] *= lam;
        dz[1] *= lam;
        z[0] += dz[0];
        z[1] += dz[1];
    }
    Err(Error::NoConvergence {
        context: "newton2",
        iterations: max_iter,
        residual: last_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{CapParams, FlatParams, RevParams, SurfaceSpec};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

    fn disk() -> Surface {
        Surface::build(&SurfaceSpec::FlatConvexDomain(FlatParams::Disk { radius: 1.0 })).unwrap()
    }

    fn cap() -> Surface {
        Surface::build(&SurfaceSpec::SphericalCap(CapParams {
            radius: 1.0,
            colatitude: FRAC_PI_3,
        }))
        .unwrap()
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

    #[test]
    fn shoot_disk_radius() {
        let s = disk();
        let p = SurfacePoint::new(0.0, 0.0);
        let w = Tangent::new(p, 1.0, 0.0);
        let r = shoot(&s, p, w, 2.0).unwrap();
        match r.exit {
            ExitKind::HitBoundary { s_exit, angle } => {
                assert!(s_exit.abs() < 1e-8);
                assert!((angle - FRAC_PI_2).abs() < 1e-8);
            }
            _ => panic!("expected boundary hit"),
        }
        assert!((r.path.length - 1.0).abs() < 1e-9);
        assert!(r.path.end().chart_dist(&SurfacePoint::new(1.0, 0.0)) < 1e-8);
    }

    #[test]
    fn shoot_cap_meridian_through_apex() {
        let s = cap();
        let p = SurfacePoint::new(FRAC_PI_3, 0.0);
        // inward along the meridian: -d/dphi
        let w = Tangent::new(p, -1.0, 0.0);
        let r = shoot(&s, p, w, 10.0).unwrap();
        match r.exit {
            ExitKind::HitBoundary { angle, s_exit } => {
                assert!((r.path.length - 2.0 * FRAC_PI_3).abs() < 1e-8, "len {}", r.path.length);
                assert!((angle - FRAC_PI_2).abs() < 1e-7);
                // exits at the opposite meridian
                let total = s.boundary_total();
                assert!((wrap_signed(s_exit - total / 2.0, total)).abs() < 1e-7);
            }
            _ => panic!("expected boundary exit"),
        }
    }

    #[test]
    fn connect_disk_diameter() {
        let s = disk();
        let path = connect(
            &s,
            SurfacePoint::new(-1.0, 0.0),
            SurfacePoint::new(1.0, 0.0),
        )
        .unwrap();
        assert!((path.length - 2.0).abs() < 1e-10);
        for sm in &path.samples {
            assert!(sm.v.abs() < 1e-9);
        }
    }

    #[test]
    fn connect_symmetry_and_interior() {
        let s = disk();
        let p = SurfacePoint::new(0.0, 0.0);
        let q = SurfacePoint::new(0.5, 0.0);
        let a = connect(&s, p, q).unwrap();
        let b = connect(&s, q, p).unwrap();
        assert!((a.length - 0.5).abs() < 1e-11);
        assert!((a.length - b.length).abs() < 1e-9);
    }

    #[test]
    fn connect_cap_matches_law_of_cosines() {
        let s = cap();
        let dtheta = 1.1_f64;
        let p = SurfacePoint::new(FRAC_PI_3, 0.0);
        let q = SurfacePoint::new(FRAC_PI_3, dtheta);
        let path = connect(&s, p, q).unwrap();
        let expected = (FRAC_PI_3.cos().powi(2)
            + FRAC_PI_3.sin().powi(2) * dtheta.cos())
        .acos();
        assert!(
            (path.length - expected).abs() < 1e-8,
            "len {} vs {}",
            path.length,
            expected
        );
    }

    #[test]
    fn drop_disk() {
        let s = disk();
        let path = drop_to_boundary(&s, SurfacePoint::new(0.25, 0.0)).unwrap();
        assert!((path.length - 0.75).abs() < 1e-9);
        assert!(path.end().chart_dist(&SurfacePoint::new(1.0, 0.0)) < 1e-8);
    }

    #[test]
    fn fbg_disk_is_diameter() {
        let s = disk();
        let path = find_free_boundary_geodesic(&s, 0.3, 1.4).unwrap();
        assert!((path.length - 2.0).abs() < 1e-8);
        let res = free_boundary_residual(&s, &path).unwrap();
        assert!(res < 1e-6);
    }

    #[test]
    fn fbg_cap_meridian() {
        let s = cap();
        let path = find_free_boundary_geodesic(&s, 0.7, FRAC_PI_2 - 0.1).unwrap();
        assert!((path.length - 2.0 * FRAC_PI_3).abs() < 1e-7);
    }

    #[test]
    fn fbg_revolution_meridian_pair() {
        let s = rev();
        let r = s.as_revolution().unwrap();
        let path = find_free_boundary_geodesic(&s, 1.0, FRAC_PI_2 + 0.05).unwrap();
        let expected = 2.0 * r.meridian_arclen(0.0, r.cut_height);
        assert!(
            (path.length - expected).abs() < 1e-6,
            "len {} vs {}",
            path.length,
            expected
        );
    }

    #[test]
    fn loop_not_found_on_disk_and_cap() {
        assert!(matches!(
            find_boundary_geodesic_loop(&disk(), 0.0),
            Err(Error::NoLoopFound { .. })
        ));
        assert!(matches!(
            find_boundary_geodesic_loop(&cap(), 0.0),
            Err(Error::NoLoopFound { .. })
        ));
    }

    #[test]
    fn loop_on_revolution_matches_unrolled_cone() {
        let s = rev();
        let r = s.as_revolution().unwrap();
        let lp = find_boundary_geodesic_loop(&s, 0.0).unwrap();
        let a = r.slope;
        let hyp = (1.0 + a * a).sqrt();
        let theta_span = std::f64::consts::TAU * a / hyp;
        let slant = r.boundary_r() * hyp / a;
        let expected = 2.0 * slant * (0.5 * theta_span).sin();
        assert!(
            (lp.path.length - expected).abs() < 1e-6,
            "loop {} vs cone {}",
            lp.path.length,
            expected
        );
        assert!((lp.angles.0 - lp.angles.1).abs() < 1e-6);
        assert!(lp.path.length < std::f64::consts::TAU * r.boundary_r());
    }

    #[test]
    fn second_variation_disk_diameter() {
        let s = disk();
        let d = connect(
            &s,
            SurfacePoint::new(-1.0, 0.0),
            SurfacePoint::new(1.0, 0.0),
        )
        .unwrap();
        let q = second_variation_normal(&s, &d).unwrap();
        assert!((q + 2.0).abs() < 1e-8, "{q}");
    }

    #[test]
    fn second_variation_cap_meridian() {
        let s = cap();
        let m = find_free_boundary_geodesic(&s, 0.0, FRAC_PI_2).unwrap();
        let q = second_variation_normal(&s, &m).unwrap();
        let expected = -2.0 / FRAC_PI_3.tan() - 2.0 * FRAC_PI_3;
        assert!((q - expected).abs() < 1e-6, "{q} vs {expected}");
    }

    #[test]
    fn shooting_reversibility() {
        for s in [disk(), cap(), rev()] {
            let total = s.boundary_total();
            let frame = s.boundary_eval(0.15 * total);
            let w = launch(&s, &frame, 1.1);
            let fwd = shoot(&s, frame.point, w, 10.0 * s.diameter_estimate()).unwrap();
            let back_dir = fwd.path.reversed_terminal(&s).unwrap();
            let back = shoot(&s, fwd.path.end(), back_dir, fwd.path.length + 1.0).unwrap();
            let gap = s
                .embed(back.path.end())
                .dist(s.embed(frame.point));
            assert!(gap < 1e-6, "{}: reversibility gap {gap}", s.kind_name());
        }
    }

    #[test]
    fn chart_residual_small_on_cap_chord() {
        let s = cap();
        let p = SurfacePoint::new(FRAC_PI_3, 0.0);
        let q = SurfacePoint::new(FRAC_PI_3, 2.0);
        let path = connect_sampled(&s, p, q, 2049).unwrap();
        let r = chart_ode_residual(&s, &path);
        assert!(r < 1e-6, "residual {r}");
    }

    #[test]
    fn curvature_integral_piecewise() {
        let s = rev();
        let r = s.as_revolution().unwrap();
        // meridian from the boundary through the apex and back out
        let path = find_free_boundary_geodesic(&s, 0.0, PI / 2.0).unwrap();
        let got = curvature_integral(&s, &path);
        // the full nose is crossed twice: total curvature of the spherical
        // zone swept twice along the meridian
        let chi = (1.0 - r.blend_u / r.cap_radius).acos();
        let expected = 2.0 * r.cap_radius * chi / (r.cap_radius * r.cap_radius);
        assert!((got - expected).abs() < 1e-6, "{got} vs {expected}");
    }
}
