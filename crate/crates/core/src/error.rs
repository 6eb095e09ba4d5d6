use thiserror::Error;

/// Failure modes shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("point ({u}, {v}) lies outside the chart domain")]
    PointOutsideDomain { u: f64, v: f64 },

    #[error("adaptive integrator step underflow at arc length {arc_length}")]
    StepFailure { arc_length: f64 },

    #[error("{context}: no convergence after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence {
        context: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("connecting geodesic leaves the domain (worst signed gap {gap:.3e})")]
    PathLeavesDomain { gap: f64 },

    #[error("no boundary geodesic loop found (swept {attempts} launch angles)")]
    NoLoopFound { attempts: usize },

    #[error("segment of length {length:.6e} exceeds the broken-geodesic bound {max:.6e}")]
    SegmentTooLong { length: f64, max: f64 },

    #[error("shortening outcome is not a collapse")]
    NotCollapsed,

    #[error("curve does not meet the boundary orthogonally (angle residual {residual:.3e} rad)")]
    NotFreeBoundary { residual: f64 },

    #[error("malformed network: {0}")]
    MalformedNetwork(String),

    #[error("non-manifold incidence: segments overlap tangentially near ({u}, {v})")]
    NonManifoldIncidence { u: f64, v: f64 },

    #[error("parity inconsistency: odd cycle in the face adjacency graph")]
    ParityInconsistency,

    #[error("face integration failed: {0}")]
    FaceIntegrationFailure(String),

    #[error("precondition unverified: {0}")]
    PreconditionUnverified(String),

    #[error("inscribed polygon with n = {n} is not reachable: {reason}")]
    NUnreachable { n: usize, reason: String },

    #[error("operation requires a flat domain")]
    NotFlat,

    #[error("operation requires a {expected} surface")]
    WrongSurfaceKind { expected: &'static str },

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),

    #[error("i/o failure: {0}")]
    IoFailure(#[from] std::io::Error),

    #[error("serialization failure: {0}")]
    Serde(#[from] serde_json::Error),
}
