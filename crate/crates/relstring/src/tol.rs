//! Global tolerance configuration.
//!
//! Analytic and exact piecewise-linear backends are held to fixed absolute
//! tolerances; sampled-spline backends get a reference tolerance at N = 256
//! that scales like N^-2 (the spline machinery converges at order >= 2, so
//! this is a conservative envelope).

/// Tolerances used by constructors and invariant checks throughout the crate.
#[derive(Debug, Clone, Copy)]
pub struct ToleranceConfig {
    /// Tolerance for identities that hold exactly up to rounding.
    pub exact: f64,
    /// Gauge/unit-speed tolerance for analytic and piecewise-linear backends.
    pub analytic: f64,
    /// Spline-backend gauge/unit-speed tolerance at the reference grid size.
    pub spline_ref: f64,
    /// Reference grid size for `spline_ref`.
    pub spline_ref_n: usize,
    /// Regularity threshold: curves with min |γ'| below this are rejected.
    pub regularity: f64,
    /// Strict admissibility slack: |v| must stay below 1 - this.
    pub admissibility: f64,
    /// Sub-unit slack for the SubUnit constraint mode.
    pub subunit_slack: f64,
    /// Default collapse detection tolerance, relative to the period.
    pub collapse_rel: f64,
    /// Default singular-set speed threshold.
    pub singular_speed: f64,
}

impl ToleranceConfig {
    pub const fn default_config() -> Self {
        ToleranceConfig {
            exact: 1e-12,
            analytic: 1e-8,
            spline_ref: 4e-6,
            spline_ref_n: 256,
            regularity: 1e-12,
            admissibility: 1e-10,
            subunit_slack: 1e-10,
            collapse_rel: 1e-6,
            singular_speed: 1e-6,
        }
    }

    /// Gauge/unit-speed tolerance for a sampled-spline backend of size `n`,
    /// scaled at order 2 from the reference grid.
    pub fn spline_tol(&self, n: usize) -> f64 {
        let r = self.spline_ref_n as f64 / n as f64;
        (self.spline_ref * r * r).max(self.analytic)
    }
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self::default_config()
    }
}

/// The crate-wide default tolerances.
pub const TOL: ToleranceConfig = ToleranceConfig::default_config();
