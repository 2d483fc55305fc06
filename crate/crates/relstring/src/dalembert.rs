//! The d'Alembert evolution engine.
//!
//! A closed string in conformal gauge is the pair (a, b) of E-periodic
//! unit-speed loops with
//!
//!   gamma(t, x) = (a(x + t) + b(x - t)) / 2.
//!
//! Evolution is exact evaluation of this formula, never time stepping: all
//! time error comes from the curve backend alone, and t may lie anywhere on
//! the real line (the periodic weak extension).

use std::sync::Arc;

use crate::curve::{BackendKind, PeriodicLoop, VelocityField};
use crate::error::{Error, Result};
use crate::quad;
use crate::spline::PeriodicSpline;
use crate::tol::TOL;
use crate::vecn;

/// Constraint class of a pair: genuine strings have |a'| = |b'| = 1; uniform
/// limits of strings satisfy only |a'|, |b'| <= 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintMode {
    UnitSpeed,
    SubUnit,
}

/// The complete evolution state: two E-periodic loops plus constraint mode.
#[derive(Debug, Clone)]
pub struct DAlembertPair {
    a: PeriodicLoop,
    b: PeriodicLoop,
    period: f64,
    mode: ConstraintMode,
}

impl DAlembertPair {
    /// Validate and build a pair. Unit-speed deviation is checked nodewise at
    /// the backend-appropriate tolerance.
    pub fn new(a: PeriodicLoop, b: PeriodicLoop, mode: ConstraintMode) -> Result<Self> {
        if a.dim() != b.dim() {
            return Err(Error::WrongDimension {
                got: b.dim(),
                need: a.dim(),
            });
        }
        let period = a.period();
        if (b.period() - period).abs() > 1e-12 * period.max(1.0) {
            return Err(Error::BadParams {
                reason: format!("periods differ: {} vs {}", period, b.period()),
            });
        }
        for l in [&a, &b] {
            // the unit-speed invariant is a node statement: spline backends
            // superconverge at their own knots, so sample there
            let m = match l.backend_kind() {
                BackendKind::SampledSpline => l.grid_hint(),
                _ => 4 * l.grid_hint(),
            };
            match mode {
                ConstraintMode::UnitSpeed => {
                    let dev = l.unit_speed_deviation(m);
                    if dev > l.backend_tol() {
                        return Err(Error::NotNormalized { residual: dev });
                    }
                }
                ConstraintMode::SubUnit => {
                    let h = period / m as f64;
                    let mut buf = vec![0.0; l.dim()];
                    for j in 0..m {
                        l.deriv_into(j as f64 * h, &mut buf);
                        let sp = vecn::norm(&buf);
                        if sp > 1.0 + TOL.subunit_slack {
                            return Err(Error::NotNormalized {
                                residual: sp - 1.0,
                            });
                        }
                    }
                }
            }
        }
        Ok(DAlembertPair { a, b, period, mode })
    }

    pub fn a(&self) -> &PeriodicLoop {
        &self.a
    }
    pub fn b(&self) -> &PeriodicLoop {
        &self.b
    }
    pub fn period(&self) -> f64 {
        self.period
    }
    pub fn dim(&self) -> usize {
        self.a.dim()
    }
    pub fn mode(&self) -> ConstraintMode {
        self.mode
    }

    /// Natural grid resolution for slices of this pair.
    pub fn grid_hint(&self) -> usize {
        self.a.grid_hint().max(self.b.grid_hint())
    }

    /// Gauge tolerance implied by the coarser of the two backends.
    pub fn backend_tol(&self) -> f64 {
        self.a.backend_tol().max(self.b.backend_tol())
    }

    /// Sup distance between a and b over a dense sample (zero initial
    /// velocity iff a = b up to a constant; here we test exact equality).
    pub fn ab_deviation(&self, m: usize) -> f64 {
        let h = self.period / m as f64;
        let mut pa = vec![0.0; self.dim()];
        let mut pb = vec![0.0; self.dim()];
        let mut dev: f64 = 0.0;
        for j in 0..m {
            let s = j as f64 * h;
            self.a.eval_into(s, &mut pa);
            self.b.eval_into(s, &mut pb);
            dev = dev.max(vecn::dist(&pa, &pb));
        }
        dev
    }
}

/// One time slice of the evolution on a uniform grid, with the spatial
/// derivatives the backends provide (second derivatives included, so the
/// geometric diagnostics can run at backend accuracy).
#[derive(Debug, Clone)]
pub struct StringState {
    pub t: f64,
    period: f64,
    dim: usize,
    n_nodes: usize,
    gamma: Vec<f64>,
    gamma_t: Vec<f64>,
    gamma_x: Vec<f64>,
    gamma_xx: Vec<f64>,
    gamma_tx: Vec<f64>,
    /// equals gamma_xx for states of wave solutions; kept separate so states
    /// assembled from non-wave data can carry the true value
    gamma_tt: Vec<f64>,
}

impl StringState {
    pub fn period(&self) -> f64 {
        self.period
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    /// Grid node k in [0, E).
    pub fn node(&self, k: usize) -> f64 {
        self.period * k as f64 / self.n_nodes as f64
    }

    pub fn grid_spacing(&self) -> f64 {
        self.period / self.n_nodes as f64
    }

    pub fn gamma(&self, k: usize) -> &[f64] {
        &self.gamma[k * self.dim..(k + 1) * self.dim]
    }
    pub fn gamma_t(&self, k: usize) -> &[f64] {
        &self.gamma_t[k * self.dim..(k + 1) * self.dim]
    }
    pub fn gamma_x(&self, k: usize) -> &[f64] {
        &self.gamma_x[k * self.dim..(k + 1) * self.dim]
    }
    pub fn gamma_xx(&self, k: usize) -> &[f64] {
        &self.gamma_xx[k * self.dim..(k + 1) * self.dim]
    }
    pub fn gamma_tx(&self, k: usize) -> &[f64] {
        &self.gamma_tx[k * self.dim..(k + 1) * self.dim]
    }
    pub fn gamma_tt(&self, k: usize) -> &[f64] {
        &self.gamma_tt[k * self.dim..(k + 1) * self.dim]
    }

    /// Replace the second time derivative (states built from samples default
    /// to the wave identity gamma_tt = gamma_xx).
    pub fn with_gamma_tt(mut self, gamma_tt: Vec<f64>) -> Self {
        assert_eq!(gamma_tt.len(), self.gamma.len());
        self.gamma_tt = gamma_tt;
        self
    }

    pub fn min_speed(&self) -> f64 {
        (0..self.n_nodes)
            .map(|k| vecn::norm(self.gamma_x(k)))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_velocity(&self) -> f64 {
        (0..self.n_nodes)
            .map(|k| vecn::norm(self.gamma_t(k)))
            .fold(0.0, f64::max)
    }

    /// Assemble a state from raw nodal samples; second derivatives are filled
    /// by periodic-spline differentiation of the given first derivatives.
    pub fn from_samples(
        t: f64,
        period: f64,
        dim: usize,
        gamma: Vec<f64>,
        gamma_t: Vec<f64>,
        gamma_x: Vec<f64>,
    ) -> Self {
        let n_nodes = gamma.len() / dim;
        let sp_x = PeriodicSpline::new(gamma_x.clone(), dim, period);
        let sp_t = PeriodicSpline::new(gamma_t.clone(), dim, period);
        let mut gamma_xx = vec![0.0; gamma.len()];
        let mut gamma_tx = vec![0.0; gamma.len()];
        let mut buf = vec![0.0; dim];
        for k in 0..n_nodes {
            let x = period * k as f64 / n_nodes as f64;
            sp_x.deriv(x, &mut buf);
            gamma_xx[k * dim..(k + 1) * dim].copy_from_slice(&buf);
            sp_t.deriv(x, &mut buf);
            gamma_tx[k * dim..(k + 1) * dim].copy_from_slice(&buf);
        }
        let gamma_tt = gamma_xx.clone();
        StringState {
            t,
            period,
            dim,
            n_nodes,
            gamma,
            gamma_t,
            gamma_x,
            gamma_xx,
            gamma_tx,
            gamma_tt,
        }
    }
}

/// Decompose conformal-gauge initial data (gamma_0, v_0) into the pair
/// a = gamma_0 + V, b = gamma_0 - V with V(x) = int_0^x v_0.
pub fn decompose(curve: &PeriodicLoop, velocity: &VelocityField) -> Result<DAlembertPair> {
    let dim = curve.dim();
    let e = curve.period();
    let n = curve.grid_hint().max(1024);
    let m = 4 * n;
    let h = e / m as f64;

    // gauge precondition |gamma'|^2 + |v|^2 = 1
    let tol = curve.backend_tol().max(TOL.analytic);
    let mut db = vec![0.0; dim];
    let mut vb = vec![0.0; dim];
    let mut residual: f64 = 0.0;
    for j in 0..m {
        let s = j as f64 * h;
        curve.deriv_into(s, &mut db);
        velocity.eval_into(s, &mut vb);
        residual = residual.max((vecn::dot(&db, &db) + vecn::dot(&vb, &vb) - 1.0).abs());
    }
    if residual > tol {
        return Err(Error::NotNormalized { residual });
    }

    if velocity.is_zero() {
        return DAlembertPair::new(curve.clone(), curve.clone(), ConstraintMode::UnitSpeed);
    }

    // zero-mean check (VelocityField enforces it, but data may arrive through
    // other constructors in the future; the pair must be E-periodic).
    let mut mean = vec![0.0; dim];
    for j in 0..m {
        velocity.eval_into(j as f64 * h, &mut vb);
        for d in 0..dim {
            mean[d] += vb[d] * h;
        }
    }
    let mean_norm = vecn::norm(&mean);
    if mean_norm > 1e-10 * e {
        return Err(Error::NonZeroMeanVelocity { mean_norm });
    }

    // V by cumulative Simpson per component on the fine grid, then sample
    // a, b on the loop's natural grid.
    let mut cums: Vec<Vec<f64>> = Vec::with_capacity(dim);
    for d in 0..dim {
        let mut buf = vec![0.0; dim];
        cums.push(quad::cumulative_simpson(0.0, h, m, |x| {
            velocity.eval_into(x, &mut buf);
            buf[d]
        }));
    }
    let step = m / n;
    let mut sa = vec![0.0; n * dim];
    let mut sb = vec![0.0; n * dim];
    let mut pbuf = vec![0.0; dim];
    for k in 0..n {
        let x = k as f64 * e / n as f64;
        curve.eval_into(x, &mut pbuf);
        for d in 0..dim {
            let v = cums[d][k * step];
            sa[k * dim + d] = pbuf[d] + v;
            sb[k * dim + d] = pbuf[d] - v;
        }
    }
    let a = PeriodicLoop::SampledSpline(Arc::new(PeriodicSpline::new(sa, dim, e)));
    let b = PeriodicLoop::SampledSpline(Arc::new(PeriodicSpline::new(sb, dim, e)));
    DAlembertPair::new(a, b, ConstraintMode::UnitSpeed)
}

/// Evaluate the string at time t on an n-node uniform grid.
pub fn evaluate_state(pair: &DAlembertPair, t: f64, n: usize) -> StringState {
    let dim = pair.dim();
    let e = pair.period();
    let mut gamma = vec![0.0; n * dim];
    let mut gamma_t = vec![0.0; n * dim];
    let mut gamma_x = vec![0.0; n * dim];
    let mut gamma_xx = vec![0.0; n * dim];
    let mut gamma_tx = vec![0.0; n * dim];
    let mut pa = vec![0.0; dim];
    let mut pb = vec![0.0; dim];
    let mut da = vec![0.0; dim];
    let mut dbv = vec![0.0; dim];
    let mut d2a = vec![0.0; dim];
    let mut d2b = vec![0.0; dim];
    for k in 0..n {
        let x = e * k as f64 / n as f64;
        let (u, w) = (x + t, x - t);
        pair.a.eval_into(u, &mut pa);
        pair.b.eval_into(w, &mut pb);
        pair.a.deriv_into(u, &mut da);
        pair.b.deriv_into(w, &mut dbv);
        pair.a.deriv2_into(u, &mut d2a);
        pair.b.deriv2_into(w, &mut d2b);
        for d in 0..dim {
            let i = k * dim + d;
            gamma[i] = 0.5 * (pa[d] + pb[d]);
            gamma_t[i] = 0.5 * (da[d] - dbv[d]);
            gamma_x[i] = 0.5 * (da[d] + dbv[d]);
            gamma_xx[i] = 0.5 * (d2a[d] + d2b[d]);
            gamma_tx[i] = 0.5 * (d2a[d] - d2b[d]);
        }
    }
    let gamma_tt = gamma_xx.clone();
    StringState {
        t,
        period: e,
        dim,
        n_nodes: n,
        gamma,
        gamma_t,
        gamma_x,
        gamma_xx,
        gamma_tx,
        gamma_tt,
    }
}

/// Per-node collapse times of a zero-velocity uniformly convex planar pair.
#[derive(Debug, Clone)]
pub struct CollapseTimeMap {
    pub t_of_x: Vec<f64>,
    pub t_min: f64,
    pub t_max: f64,
}

/// Unwrapped tangent-angle table of a' over one period. The lift increases by
/// exactly 2 pi over [0, E] for a convex counter-clockwise loop.
struct AngleLift {
    angles: Vec<f64>,
    period: f64,
    loop_ref: PeriodicLoop,
    turning: f64,
}

impl AngleLift {
    fn new(a: &PeriodicLoop, m: usize) -> Self {
        let h = a.period() / m as f64;
        let mut angles = Vec::with_capacity(m + 1);
        let mut buf = vec![0.0; a.dim()];
        let mut prev = 0.0;
        for j in 0..=m {
            a.deriv_into(j as f64 * h, &mut buf);
            let raw = buf[1].atan2(buf[0]);
            let lifted = if j == 0 {
                raw
            } else {
                let two_pi = 2.0 * std::f64::consts::PI;
                raw + two_pi * ((prev - raw) / two_pi).round()
            };
            angles.push(lifted);
            prev = lifted;
        }
        let turning = angles[m] - angles[0];
        AngleLift {
            angles,
            period: a.period(),
            loop_ref: a.clone(),
            turning,
        }
    }

    /// theta(s) with the table-consistent lift; s may be any real.
    fn theta(&self, s: f64) -> f64 {
        let m = self.angles.len() - 1;
        let k = (s / self.period).floor();
        let sr = s - k * self.period;
        let jf = sr / self.period * m as f64;
        let j = (jf as usize).min(m - 1);
        let frac = jf - j as f64;
        let anchor = self.angles[j] * (1.0 - frac) + self.angles[j + 1] * frac;
        let mut buf = vec![0.0; self.loop_ref.dim()];
        self.loop_ref.deriv_into(sr, &mut buf);
        let raw = buf[1].atan2(buf[0]);
        let two_pi = 2.0 * std::f64::consts::PI;
        raw + two_pi * ((anchor - raw) / two_pi).round() + k * self.turning
    }
}

/// For each grid node x, the unique t(x) in (0, E/2) solving
/// a'(x + t) + a'(x - t) = 0, located by bisection on the tangent-angle
/// difference theta(x+t) - theta(x-t) - pi (monotone in t for uniformly
/// convex planar loops).
pub fn collapse_time_map(pair: &DAlembertPair, n: usize) -> Result<CollapseTimeMap> {
    if pair.dim() != 2 {
        return Err(Error::WrongDimension {
            got: pair.dim(),
            need: 2,
        });
    }
    let e = pair.period();
    let dev = pair.ab_deviation(512);
    if dev > 1e-10 * e.max(1.0) {
        return Err(Error::NotZeroVelocity { deviation: dev });
    }
    let slice0 = evaluate_state(pair, 0.0, n.max(256));
    let (convex, margin) = crate::convexity::is_uniformly_convex(&slice0)?;
    if !convex {
        return Err(Error::NotConvex { margin });
    }

    let m_table = (8 * n).max(16384);
    let lift = AngleLift::new(pair.a(), m_table);

    let mut t_of_x = Vec::with_capacity(n);
    for k in 0..n {
        let x = e * k as f64 / n as f64;
        let g = |t: f64| lift.theta(x + t) - lift.theta(x - t) - std::f64::consts::PI;
        let (mut lo, mut hi) = (0.0, 0.5 * e);
        let (glo, ghi) = (g(lo), g(hi));
        if glo > 0.0 || ghi < 0.0 {
            return Err(Error::RootNotBracketed { node: k });
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-16 * e {
                break;
            }
        }
        t_of_x.push(0.5 * (lo + hi));
    }
    let t_min = t_of_x.iter().copied().fold(f64::INFINITY, f64::min);
    let t_max = t_of_x.iter().copied().fold(0.0f64, f64::max);
    Ok(CollapseTimeMap {
        t_of_x,
        t_min,
        t_max,
    })
}

/// Result of a collapse probe at a fixed time.
#[derive(Debug, Clone)]
pub struct CollapseCheck {
    /// The collapse point (nodal mean) if the whole slice is within
    /// tol * E of it.
    pub point: Option<Vec<f64>>,
    /// max_k |gamma(t, x_k) - mean|
    pub max_spread: f64,
    /// max_k |a'(x_k + t) + b'(x_k - t)|, the necessary condition for
    /// collapse (must vanish on a collapsing slice).
    pub max_derivative_sum: f64,
}

/// Probe whether t is a collapsing time: the slice degenerates to a point.
pub fn detect_collapse(pair: &DAlembertPair, t: f64, n: usize, tol: f64) -> CollapseCheck {
    let state = evaluate_state(pair, t, n);
    let dim = pair.dim();
    let mut mean = vec![0.0; dim];
    for k in 0..n {
        for d in 0..dim {
            mean[d] += state.gamma(k)[d];
        }
    }
    for v in mean.iter_mut() {
        *v /= n as f64;
    }
    let mut max_spread: f64 = 0.0;
    let mut max_dsum: f64 = 0.0;
    for k in 0..n {
        max_spread = max_spread.max(vecn::dist(state.gamma(k), &mean));
        max_dsum = max_dsum.max(2.0 * vecn::norm(state.gamma_x(k)));
    }
    let point = if max_spread <= tol * pair.period() {
        Some(mean)
    } else {
        None
    };
    CollapseCheck {
        point,
        max_spread,
        max_derivative_sum: max_dsum,
    }
}

/// A maximal run of consecutive grid nodes where |gamma_x| < tol; runs may
/// wrap around the parameter seam.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularInterval {
    pub start_node: usize,
    pub node_count: usize,
    /// parameter length node_count * h
    pub param_length: f64,
    /// parameter midpoint of the run (mod E)
    pub param_center: f64,
}

/// Maximal circular runs of nodes with |gamma_x| < tol at time t.
pub fn singular_set(pair: &DAlembertPair, t: f64, n: usize, tol: f64) -> Vec<SingularInterval> {
    let state = evaluate_state(pair, t, n);
    let flags: Vec<bool> = (0..n)
        .map(|k| vecn::norm(state.gamma_x(k)) < tol)
        .collect();
    let h = pair.period() / n as f64;
    let mut out = Vec::new();
    if flags.iter().all(|&f| f) {
        out.push(SingularInterval {
            start_node: 0,
            node_count: n,
            param_length: pair.period(),
            param_center: 0.5 * pair.period(),
        });
        return out;
    }
    // start scanning just after a clear node so wrapped runs merge
    let first_clear = flags.iter().position(|&f| !f).unwrap();
    let mut k = 0;
    while k < n {
        let idx = (first_clear + 1 + k) % n;
        if flags[idx] {
            let start = idx;
            let mut count = 0;
            while k < n && flags[(first_clear + 1 + k) % n] {
                count += 1;
                k += 1;
            }
            let center =
                crate::curve::wrap((start as f64 + 0.5 * (count as f64 - 1.0)) * h, pair.period());
            out.push(SingularInterval {
                start_node: start,
                node_count: count,
                param_length: count as f64 * h,
                param_center: center,
            });
        } else {
            k += 1;
        }
    }
    out.sort_by(|a, b| a.start_node.cmp(&b.start_node));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    #[test]
    fn circle_decompose_zero_velocity_gives_a_eq_b() {
        let c = crate::curve::circle_loop(1.0);
        let v = VelocityField::zero(2, 2.0 * PI);
        let pair = decompose(&c, &v).unwrap();
        assert_eq!(pair.ab_deviation(128), 0.0);
        // Neu's solution: gamma(t, x) = (cos x, sin x) cos t
        let st = evaluate_state(&pair, 0.7, 64);
        for k in 0..64 {
            let x = 2.0 * PI * k as f64 / 64.0;
            let expect = [x.cos() * 0.7f64.cos(), x.sin() * 0.7f64.cos()];
            assert!(vecn::dist(st.gamma(k), &expect) < 1e-14);
        }
    }

    #[test]
    fn decompose_rejects_unnormalized_data() {
        // circle scaled by 1.1 on [0, 2 pi]: |gamma'| = 1.1
        let scaled = PeriodicLoop::analytic(crate::curve::ClosureCurve::new(
            2,
            2.0 * PI,
            |s, out| {
                out[0] = 1.1 * s.cos();
                out[1] = 1.1 * s.sin();
            },
            |s, out| {
                out[0] = -1.1 * s.sin();
                out[1] = 1.1 * s.cos();
            },
            |s, out| {
                out[0] = -1.1 * s.cos();
                out[1] = -1.1 * s.sin();
            },
        ));
        let v = VelocityField::zero(2, 2.0 * PI);
        assert!(matches!(
            decompose(&scaled, &v),
            Err(Error::NotNormalized { .. })
        ));
    }

    #[test]
    fn decompose_with_normal_velocity_reconstructs_initial_data() {
        // circle of radius c with constant-magnitude radial velocity w:
        // c^2 + w^2 = 1 gives exact conformal gauge, zero mean by symmetry.
        let w: f64 = 0.1;
        let c = (1.0 - w * w).sqrt();
        let curve = PeriodicLoop::analytic(crate::curve::ClosureCurve::new(
            2,
            2.0 * PI,
            move |s, out| {
                out[0] = c * s.cos();
                out[1] = c * s.sin();
            },
            move |s, out| {
                out[0] = -c * s.sin();
                out[1] = c * s.cos();
            },
            move |s, out| {
                out[0] = -c * s.cos();
                out[1] = -c * s.sin();
            },
        ));
        let vloop = PeriodicLoop::analytic(crate::curve::ClosureCurve::new(
            2,
            2.0 * PI,
            move |s, out| {
                out[0] = -w * s.cos();
                out[1] = -w * s.sin();
            },
            move |s, out| {
                out[0] = w * s.sin();
                out[1] = -w * s.cos();
            },
            move |s, out| {
                out[0] = w * s.cos();
                out[1] = w * s.sin();
            },
        ));
        let vf = VelocityField::new(vloop).unwrap();
        let pair = decompose(&curve, &vf).unwrap();
        let n = 512;
        let st = evaluate_state(&pair, 0.0, n);
        let mut sup: f64 = 0.0;
        for k in 0..n {
            let s = 2.0 * PI * k as f64 / n as f64;
            sup = sup.max(vecn::dist(st.gamma(k), &curve.eval(s)));
            sup = sup.max(vecn::dist(st.gamma_t(k), &vf.eval(s)));
        }
        assert!(sup < 1e-10, "reconstruction residual {sup:.3e}");
    }

    #[test]
    fn circle_collapses_at_quarter_period() {
        let pair = scenarios::circle(1.0);
        let e = pair.period();
        let check = detect_collapse(&pair, e / 4.0, 256, 1e-8);
        let p = check.point.expect("circle must collapse at E/4");
        assert!(vecn::norm(&p) < 1e-12);
        assert!(check.max_derivative_sum < 1e-12);
        let off = detect_collapse(&pair, e / 8.0, 256, 1e-8);
        assert!(off.point.is_none());
    }

    #[test]
    fn time_periodicity_exact_for_square() {
        let pair = scenarios::square(1.0);
        let e = pair.period();
        let s1 = evaluate_state(&pair, 0.625, 128);
        let s2 = evaluate_state(&pair, 0.625 + e, 128);
        for k in 0..128 {
            assert_eq!(s1.gamma(k), s2.gamma(k));
            assert_eq!(s1.gamma_x(k), s2.gamma_x(k));
        }
    }

    #[test]
    fn time_periodicity_circle_within_1e12() {
        let pair = scenarios::circle(1.0);
        let e = pair.period();
        let s1 = evaluate_state(&pair, 0.0, 128);
        let s2 = evaluate_state(&pair, e, 128);
        for k in 0..128 {
            assert!(vecn::dist(s1.gamma(k), s2.gamma(k)) <= 1e-12);
        }
    }

    #[test]
    fn shift_consistency_is_exact() {
        // evaluating at (t, x + delta) equals the shifted-grid formula exactly
        let pair = scenarios::circle(1.0);
        let n = 64;
        let e = pair.period();
        let t = 0.37;
        let delta = e / n as f64 * 5.0; // five grid cells
        let st = evaluate_state(&pair, t, n);
        for k in 0..n {
            let x = e * k as f64 / n as f64 + delta;
            let manual = vecn::scale(
                &vecn::add(&pair.a().eval(x + t), &pair.b().eval(x - t)),
                0.5,
            );
            let shifted = st.gamma((k + 5) % n);
            assert!(vecn::dist(&manual, shifted) < 1e-15);
        }
    }

    #[test]
    fn discrete_wave_residual_second_order() {
        let pair = scenarios::circle(1.0);
        let mut errs = Vec::new();
        for n in [64usize, 128, 256] {
            let e = pair.period();
            let h = e / n as f64;
            let dt = h / 2.0;
            let t = 0.4;
            let sm = evaluate_state(&pair, t - dt, n);
            let s0 = evaluate_state(&pair, t, n);
            let sp = evaluate_state(&pair, t + dt, n);
            let mut r: f64 = 0.0;
            for k in 0..n {
                for d in 0..2 {
                    let gtt =
                        (sp.gamma(k)[d] - 2.0 * s0.gamma(k)[d] + sm.gamma(k)[d]) / (dt * dt);
                    let kp = (k + 1) % n;
                    let km = (k + n - 1) % n;
                    let gxx =
                        (s0.gamma(kp)[d] - 2.0 * s0.gamma(k)[d] + s0.gamma(km)[d]) / (h * h);
                    r = r.max((gtt - gxx).abs());
                }
            }
            errs.push(r);
        }
        assert!(errs[0] / errs[1] > 3.5, "wave residuals {errs:?}");
        assert!(errs[1] / errs[2] > 3.5, "wave residuals {errs:?}");
    }

    #[test]
    fn collapse_map_circle_constant_quarter() {
        let pair = scenarios::circle(1.0);
        let map = collapse_time_map(&pair, 128).unwrap();
        let e = pair.period();
        assert!((map.t_min - e / 4.0).abs() < 1e-10);
        assert!((map.t_max - e / 4.0).abs() < 1e-10);
    }

    #[test]
    fn collapse_map_requires_zero_velocity() {
        let (pair, _) = scenarios::neu(3);
        // a_n != b_n
        assert!(matches!(
            collapse_time_map(&pair, 64),
            Err(Error::NotZeroVelocity { .. })
        ));
    }

    #[test]
    fn collapse_map_egg_residuals_small() {
        let pair = scenarios::egg_pair().unwrap();
        let n = 128;
        let map = collapse_time_map(&pair, n).unwrap();
        let e = pair.period();
        assert!(map.t_min < map.t_max, "egg must have a spread of t(x)");
        assert!(map.t_min > 0.0 && map.t_max < 0.5 * e);
        // residual |a'(x+t) + a'(x-t)| at each root
        for (k, &t) in map.t_of_x.iter().enumerate() {
            let x = e * k as f64 / n as f64;
            let r = vecn::norm(&vecn::add(
                &pair.a().deriv(x + t),
                &pair.a().deriv(x - t),
            ));
            assert!(r <= 1e-10, "node {k}: residual {r:.3e}");
        }
    }

    #[test]
    fn singular_set_circle_empty_before_collapse() {
        let pair = scenarios::circle(1.0);
        let iv = singular_set(&pair, pair.period() / 8.0, 256, 1e-6);
        assert!(iv.is_empty());
    }

    #[test]
    fn singular_set_square_four_intervals() {
        let l = 1.0;
        let pair = scenarios::square(l);
        let n = 512;
        let h = 4.0 * l / n as f64;
        let t = 0.75 * l;
        let iv = singular_set(&pair, t, n, 1e-6);
        assert_eq!(iv.len(), 4, "expected 4 degenerate intervals: {iv:?}");
        for (j, i) in iv.iter().enumerate() {
            assert!(
                (i.param_length - (2.0 * t - l)).abs() <= 2.0 * h,
                "interval {j} length {} vs {}",
                i.param_length,
                2.0 * t - l
            );
            // centered at side midpoints L/2, 3L/2, 5L/2, 7L/2
            let expect = l * (0.5 + j as f64);
            assert!(
                (i.param_center - expect).abs() <= 2.0 * h,
                "interval {j} center {} vs {}",
                i.param_center,
                expect
            );
        }
        assert!(singular_set(&pair, 0.25 * l, n, 1e-6).is_empty());
    }

    #[test]
    fn collapse_condition_whenever_detected() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let pair = scenarios::circle(1.0);
        let e = pair.period();
        let tol = 1e-8;
        for _ in 0..20 {
            let t: f64 = rng.gen_range(0.0..e);
            let check = detect_collapse(&pair, t, 128, tol);
            if check.point.is_some() {
                assert!(check.max_derivative_sum <= 10.0 * tol);
            }
        }
    }
}
