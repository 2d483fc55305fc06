//! relstring: a laboratory for closed relativistic strings — time-like
//! minimal surfaces in (1+n)-dimensional Minkowski space.
//!
//! A closed string in conformal gauge is a pair (a, b) of E-periodic
//! unit-speed loops; the evolution is the exact d'Alembert formula
//! gamma(t, x) = (a(x+t) + b(x-t))/2, so there is no time stepping anywhere
//! and the weak extension to all times is free. On top of that sit:
//!
//! - [`curve`]: loops with analytic, periodic-spline and exact
//!   piecewise-linear backends, arc-length machinery;
//! - [`gauge`]: conformal normalization of raw initial data and the
//!   transport-equation orthogonalization of whole evolutions;
//! - [`dalembert`]: the evolution engine, collapse-time maps, collapse
//!   detection, singular sets;
//! - [`diagnostics`]: Minkowski area, conserved energy, constraint /
//!   Euler-Lagrange / geometric-law residuals, the sectional identity;
//! - [`convexity`]: planar convexity preservation, inclusion of enclosed
//!   bodies, blow-up profiles near a collapse;
//! - [`wiggly`]: zig-zag densification and C^2 corner rounding — genuine
//!   strings converging uniformly to any prescribed sub-unit Lipschitz pair;
//! - [`scenarios`]: circle, square, ellipse, ovals, oscillating-circle and
//!   helical families, cylinder limits;
//! - [`run`]: frame/diagnostics/manifest emission for the CLI;
//! - [`verify`]: the acceptance checks run by `cargo test` and the CLI.
//!
//! The runnable examples under `examples/` walk through each capability.

pub mod convexity;
pub mod curve;
pub mod dalembert;
pub mod diagnostics;
pub mod error;
pub mod gauge;
pub mod interp;
pub mod output;
pub mod quad;
pub mod run;
pub mod scenarios;
pub mod spline;
pub mod tol;
pub mod vecn;
pub mod verify;
pub mod wiggly;

pub use curve::{PeriodicLoop, PiecewiseLinearLoop, VelocityField};
pub use dalembert::{ConstraintMode, DAlembertPair, StringState};
pub use diagnostics::DiagnosticsReport;
pub use error::{Error, Result};
pub use gauge::GaugeReport;
pub use tol::{ToleranceConfig, TOL};
