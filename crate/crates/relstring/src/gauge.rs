//! Gauge normalization: bring arbitrary regular string data to the
//! orthogonal-conformal gauge <gamma_t, gamma_x> = 0, |gamma_t|^2 +
//! |gamma_x|^2 = 1 at t = 0, and reparametrize whole evolutions
//! orthogonally via the linear transport equation
//!
//!   r_t = -(<gamma_t, gamma_x> / |gamma_x|^2) r_x,  r(0, x) = x.

use std::sync::Arc;

use crate::curve::{PeriodicLoop, VelocityField};
use crate::dalembert::StringState;
use crate::error::{Error, Result};
use crate::interp::{InversionTable, MonotoneCubic};
use crate::spline::PeriodicSpline;
use crate::tol::TOL;
use crate::vecn;

/// What conformal normalization did: the new interval length E and the
/// residual gauge violations measured on the output nodes.
#[derive(Debug, Clone, serde::Serialize)]
pub struct GaugeReport {
    pub energy_parameter: f64,
    pub max_orthogonality_residual: f64,
    pub max_norm_residual: f64,
}

/// Reparametrize initial data (curve, velocity) onto [0, E] so that
/// |gamma_x|^2 = 1 - |gamma_t|^2 at the nodes, with E the rho-weighted
/// length int |gamma'| / sqrt(1 - |v|^2).
///
/// The velocity must be given in normal form (<v, gamma'> = 0); tangential
/// components are a gauge artifact and are rejected.
pub fn conformal_normalize(
    curve: &PeriodicLoop,
    velocity: &VelocityField,
    n: usize,
) -> Result<(PeriodicLoop, VelocityField, GaugeReport)> {
    let dim = curve.dim();
    let e0 = curve.period();
    let fine = (4 * n).max(2048);
    let h = e0 / fine as f64;

    let mut db = vec![0.0; dim];
    let mut vb = vec![0.0; dim];
    let mut min_speed = f64::INFINITY;
    let mut max_v: f64 = 0.0;
    let mut max_tan: f64 = 0.0;
    let mut max_gauge_residual: f64 = 0.0;
    for j in 0..fine {
        let s = j as f64 * h;
        curve.deriv_into(s, &mut db);
        velocity.eval_into(s, &mut vb);
        let sp = vecn::norm(&db);
        min_speed = min_speed.min(sp);
        max_v = max_v.max(vecn::norm(&vb));
        if sp > 0.0 {
            max_tan = max_tan.max((vecn::dot(&vb, &db) / sp).abs());
        }
        max_gauge_residual =
            max_gauge_residual.max((sp * sp + vecn::dot(&vb, &vb) - 1.0).abs());
    }
    if min_speed <= TOL.regularity {
        return Err(Error::NonRegularCurve {
            min_speed,
            threshold: TOL.regularity,
        });
    }
    if max_v >= 1.0 - TOL.admissibility {
        return Err(Error::NotStrictlyAdmissible { max_vperp: max_v });
    }
    if max_tan > 1e-8 {
        return Err(Error::VelocityNotNormal {
            max_tangential: max_tan,
        });
    }

    // already in gauge: return the inputs unchanged (idempotence, and keeps
    // analytic backends analytic)
    if max_gauge_residual <= curve.backend_tol() {
        let report = GaugeReport {
            energy_parameter: e0,
            max_orthogonality_residual: max_tan,
            max_norm_residual: max_gauge_residual,
        };
        return Ok((curve.clone(), velocity.clone(), report));
    }

    // rho-weighted reparametrization
    let mut dbuf = vec![0.0; dim];
    let mut vbuf = vec![0.0; dim];
    let table = InversionTable::build(e0, fine, |x| {
        curve.deriv_into(x, &mut dbuf);
        velocity.eval_into(x, &mut vbuf);
        vecn::norm(&dbuf) / (1.0 - vecn::dot(&vbuf, &vbuf)).sqrt()
    });
    let energy = table.total();

    let mut csamples = vec![0.0; n * dim];
    let mut vsamples = vec![0.0; n * dim];
    let mut pbuf = vec![0.0; dim];
    for k in 0..n {
        let x = table.invert(k as f64 * energy / n as f64);
        curve.eval_into(x, &mut pbuf);
        csamples[k * dim..(k + 1) * dim].copy_from_slice(&pbuf);
        velocity.eval_into(x, &mut pbuf);
        vsamples[k * dim..(k + 1) * dim].copy_from_slice(&pbuf);
    }
    let out_curve = PeriodicLoop::SampledSpline(Arc::new(PeriodicSpline::new(
        csamples, dim, energy,
    )));
    let out_velocity = if velocity.is_zero() {
        VelocityField::zero(dim, energy)
    } else {
        VelocityField::new(PeriodicLoop::SampledSpline(Arc::new(PeriodicSpline::new(
            vsamples, dim, energy,
        ))))?
    };

    // measure residuals on the output nodes
    let mut max_orth: f64 = 0.0;
    let mut max_norm: f64 = 0.0;
    for k in 0..n {
        let s = k as f64 * energy / n as f64;
        let g = out_curve.deriv(s);
        let v = out_velocity.eval(s);
        max_orth = max_orth.max(vecn::dot(&g, &v).abs());
        max_norm = max_norm.max((vecn::dot(&g, &g) + vecn::dot(&v, &v) - 1.0).abs());
    }
    Ok((
        out_curve,
        out_velocity,
        GaugeReport {
            energy_parameter: energy,
            max_orthogonality_residual: max_orth,
            max_norm_residual: max_norm,
        },
    ))
}

/// The reparametrization r(t, x) on a (time, space) grid, with r(0, x) = x.
#[derive(Debug, Clone)]
pub struct ReparametrizationMap {
    pub times: Vec<f64>,
    pub n_nodes: usize,
    pub period: f64,
    /// time-major: values[j * n_nodes + k] = r(t_j, x_k)
    pub values: Vec<f64>,
}

impl ReparametrizationMap {
    pub fn r(&self, j: usize, k: usize) -> f64 {
        self.values[j * self.n_nodes + k]
    }
}

/// Solve the transport equation for r on the grid of the given states by
/// tracking characteristics dX/dt = <gamma_t, gamma_x>/|gamma_x|^2 forward
/// from each node with classical RK4, then inverting x0 -> X(t) monotonically.
/// r is constant along characteristics, so r(t, X(t; x0)) = x0.
pub fn orthogonal_gauge(states: &[StringState], n: usize) -> Result<ReparametrizationMap> {
    if states.is_empty() {
        return Err(Error::Config("orthogonal_gauge needs at least one state".into()));
    }
    let e = states[0].period();
    let identity: Vec<f64> = (0..n).map(|k| e * k as f64 / n as f64).collect();
    let mut values = identity.clone();
    let times: Vec<f64> = states.iter().map(|s| s.t).collect();
    if states.len() == 1 {
        return Ok(ReparametrizationMap {
            times,
            n_nodes: n,
            period: e,
            values,
        });
    }

    // per-slice transport coefficient beta(x), spline-interpolated in x
    let mut betas = Vec::with_capacity(states.len());
    for st in states {
        let mn = st.min_speed();
        if mn < 1e-10 {
            return Err(Error::NonRegularCurve {
                min_speed: mn,
                threshold: 1e-10,
            });
        }
        let b: Vec<f64> = (0..st.n_nodes())
            .map(|k| {
                let gx = st.gamma_x(k);
                vecn::dot(st.gamma_t(k), gx) / vecn::dot(gx, gx)
            })
            .collect();
        betas.push(PeriodicSpline::new(b, 1, e));
    }

    let beta_at = |j: usize, frac: f64, x: f64| -> f64 {
        // linear time interpolation between slice j and j+1
        let mut b0 = [0.0];
        let mut b1 = [0.0];
        betas[j].eval(x, &mut b0);
        betas[j + 1].eval(x, &mut b1);
        b0[0] * (1.0 - frac) + b1[0] * frac
    };

    // forward characteristics from the uniform grid
    let mut xs = identity.clone();
    for j in 0..states.len() - 1 {
        let dt = times[j + 1] - times[j];
        for x in xs.iter_mut() {
            let k1 = beta_at(j, 0.0, *x);
            let k2 = beta_at(j, 0.5, *x + 0.5 * dt * k1);
            let k3 = beta_at(j, 0.5, *x + 0.5 * dt * k2);
            let k4 = beta_at(j, 1.0, *x + dt * k3);
            *x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        // monotonicity of the circular sequence
        for i in 0..n {
            let gap = if i + 1 < n {
                xs[i + 1] - xs[i]
            } else {
                xs[0] + e - xs[n - 1]
            };
            if gap <= 0.0 {
                return Err(Error::MonotonicityLost { t: times[j + 1] });
            }
        }
        // invert: r(t_{j+1}, X_i) = x_i; unroll one period plus margins
        let mut xx = Vec::with_capacity(3 * n);
        let mut rr = Vec::with_capacity(3 * n);
        for w in -1..=1i64 {
            for i in 0..n {
                xx.push(xs[i] + w as f64 * e);
                rr.push(identity[i] + w as f64 * e);
            }
        }
        let interp = MonotoneCubic::from_data(xx, rr);
        for k in 0..n {
            values.push(interp.eval(identity[k]));
        }
    }
    Ok(ReparametrizationMap {
        times,
        n_nodes: n,
        period: e,
        values,
    })
}

/// Pointwise conserved density rho(x) = |gamma_x| / sqrt(1 - |gamma_t|^2);
/// identically 1 in conformal gauge and constant in time on orthogonal
/// parametrizations.
pub fn rho_profile(state: &StringState) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(state.n_nodes());
    for k in 0..state.n_nodes() {
        let vt = vecn::norm(state.gamma_t(k));
        if vt >= 1.0 {
            return Err(Error::NotStrictlyAdmissible { max_vperp: vt });
        }
        out.push(vecn::norm(state.gamma_x(k)) / (1.0 - vt * vt).sqrt());
    }
    Ok(out)
}
