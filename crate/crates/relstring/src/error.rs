//! Error type shared by all modules.

use thiserror::Error;

/// Errors surfaced by curve construction, gauge normalization, evolution and
/// the wiggly pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// The curve has a parametrization singularity: min |γ'| below threshold.
    #[error("curve is not regular: min |gamma'| = {min_speed:.3e} below {threshold:.3e}")]
    NonRegularCurve { min_speed: f64, threshold: f64 },

    /// Sampled construction needs at least 8 samples per period.
    #[error("too few samples: got {got}, need at least {need}")]
    TooFewSamples { got: usize, need: usize },

    /// Normal velocity reaches or exceeds the speed of light somewhere.
    #[error("data is not strictly admissible: max |v_perp| = {max_vperp:.6}")]
    NotStrictlyAdmissible { max_vperp: f64 },

    /// Velocity has a tangential component; conformal normalization requires
    /// normal-form velocities.
    #[error("velocity is not normal to the curve: max |<v, tau>| = {max_tangential:.3e}")]
    VelocityNotNormal { max_tangential: f64 },

    /// The discrete reparametrization map stopped being increasing.
    #[error("transport reparametrization lost monotonicity at t = {t}")]
    MonotonicityLost { t: f64 },

    /// Initial data violates the conformal gauge |γ'|^2 + |v|^2 = 1.
    #[error("initial data is not conformal-normalized: max residual = {residual:.3e}")]
    NotNormalized { residual: f64 },

    /// The velocity must integrate to zero over one period for the
    /// d'Alembert pair to be periodic.
    #[error("velocity has nonzero mean: |integral v| = {mean_norm:.3e}")]
    NonZeroMeanVelocity { mean_norm: f64 },

    /// Operation requires a = b (zero initial velocity).
    #[error("pair has nonzero initial velocity: sup |a - b| = {deviation:.3e}")]
    NotZeroVelocity { deviation: f64 },

    /// Slice is not (uniformly) convex.
    #[error("curve is not uniformly convex: margin = {margin:.3e}")]
    NotConvex { margin: f64 },

    /// Root bracketing for the collapse-time bisection failed.
    #[error("collapse-time root not bracketed at node {node}")]
    RootNotBracketed { node: usize },

    /// (ξ, η) lies outside the domain of the area Lagrangian (space-like).
    #[error("configuration outside Lagrangian domain: discriminant = {discriminant:.3e}")]
    OutsideDomain { discriminant: f64 },

    /// Operation restricted to planar (n = 2) data.
    #[error("operation requires dimension {need}, got {got}")]
    WrongDimension { got: usize, need: usize },

    /// Zig-zag density must be even.
    #[error("zig-zag density k must be even and >= 2, got {k}")]
    OddK { k: usize },

    /// Corner smoothing parameters invalid or the alpha/beta balance cannot
    /// be bracketed (reversal corner or window too large).
    #[error("corner smoothing infeasible: {reason}")]
    ParamsInfeasible { reason: String },

    /// collapse_profile called at a time that is not a collapsing time.
    #[error("no collapse at t = {t}: max spread = {spread:.3e}")]
    NoCollapseAtTbar { t: f64, spread: f64 },

    /// Cylinder scenario needs 2/eps to be an integer in (0, 1).
    #[error("invalid eps = {eps}: need eps in (0,1) with 2/eps integral")]
    BadEps { eps: f64 },

    /// Helical scenario needs alpha^2 + beta^2 = 1.
    #[error("invalid parameters: {reason}")]
    BadParams { reason: String },

    /// Unknown scenario name or bad scenario parameter set.
    #[error("scenario error: {0}")]
    Scenario(String),

    /// Configuration error (CLI / run configuration).
    #[error("config error: {0}")]
    Config(String),

    /// I/O error while writing or reading artifacts.
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
