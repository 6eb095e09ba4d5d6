//! Numerical toolkit for free-boundary geodesics on convex surfaces.
//!
//! The crate models a small catalog of surfaces with strictly convex boundary
//! (flat convex domains, a blended-cap surface of revolution, spherical caps),
//! integrates geodesics on them, runs a boundary-adapted curve-shortening
//! process on broken geodesics, audits geodesic networks (junction balance,
//! faces, Gauss-Bonnet, parity), and builds one-parameter sweepouts used to
//! estimate min-max widths of the length functional.

pub mod error;
pub mod exec;
pub mod geodesic;
pub mod geom;
pub mod network;
pub mod shorten;
pub mod surface;
pub mod sweepout;

pub use error::Error;
pub use geom::{SurfacePoint, Tangent};
pub use surface::{Surface, SurfaceSpec};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
