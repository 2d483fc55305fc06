//! Closed periodic curves in R^n with three interchangeable backends:
//! closed-form analytic maps, periodic cubic splines through uniform samples,
//! and exact piecewise-linear loops.
//!
//! All loops are immutable after construction and evaluate with two
//! derivatives. Parameters are always reduced modulo the period, so a loop is
//! defined on the whole real line.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::interp::InversionTable;
use crate::quad;
use crate::spline::PeriodicSpline;
use crate::tol::TOL;
use crate::vecn;

/// A closed-form curve: the analytic backend supplies the map and its first
/// two derivatives directly.
pub trait AnalyticCurve: Send + Sync {
    fn dim(&self) -> usize;
    fn period(&self) -> f64;
    fn eval(&self, s: f64, out: &mut [f64]);
    fn deriv(&self, s: f64, out: &mut [f64]);
    fn deriv2(&self, s: f64, out: &mut [f64]);
}

type VecFn = Arc<dyn Fn(f64, &mut [f64]) + Send + Sync>;

/// Analytic curve assembled from three closures.
pub struct ClosureCurve {
    dim: usize,
    period: f64,
    f: VecFn,
    df: VecFn,
    d2f: VecFn,
}

impl ClosureCurve {
    pub fn new<F, G, H>(dim: usize, period: f64, f: F, df: G, d2f: H) -> Self
    where
        F: Fn(f64, &mut [f64]) + Send + Sync + 'static,
        G: Fn(f64, &mut [f64]) + Send + Sync + 'static,
        H: Fn(f64, &mut [f64]) + Send + Sync + 'static,
    {
        ClosureCurve {
            dim,
            period,
            f: Arc::new(f),
            df: Arc::new(df),
            d2f: Arc::new(d2f),
        }
    }
}

impl AnalyticCurve for ClosureCurve {
    fn dim(&self) -> usize {
        self.dim
    }
    fn period(&self) -> f64 {
        self.period
    }
    fn eval(&self, s: f64, out: &mut [f64]) {
        (self.f)(s, out)
    }
    fn deriv(&self, s: f64, out: &mut [f64]) {
        (self.df)(s, out)
    }
    fn deriv2(&self, s: f64, out: &mut [f64]) {
        (self.d2f)(s, out)
    }
}

/// Exact piecewise-linear closed loop: breakpoints 0 = L_0 < ... < L_{m+1} = E
/// with constant slope c_{i+1} on [L_i, L_{i+1}). Evaluation is plain affine
/// arithmetic; derivatives use the right-continuous segment convention and the
/// second derivative is zero away from corners.
#[derive(Debug, Clone)]
pub struct PiecewiseLinearLoop {
    period: f64,
    dim: usize,
    /// L_0 = 0 .. L_{m+1} = E  (m+2 entries)
    breaks: Vec<f64>,
    /// vertex positions at L_0..L_m, flat (m+1)*dim
    vertices: Vec<f64>,
    /// slope on each of the m+1 segments, flat
    slopes: Vec<f64>,
}

impl PiecewiseLinearLoop {
    /// Build from breakpoints, per-segment slopes and the starting vertex.
    /// The loop must close: sum of (L_{i+1}-L_i) c_{i+1} = 0.
    pub fn from_slopes(breaks: Vec<f64>, slopes: Vec<Vec<f64>>, start: Vec<f64>) -> Result<Self> {
        let m1 = slopes.len();
        if breaks.len() != m1 + 1 || m1 == 0 {
            return Err(Error::BadParams {
                reason: format!(
                    "need |breaks| = |slopes| + 1, got {} and {}",
                    breaks.len(),
                    m1
                ),
            });
        }
        if breaks[0] != 0.0 {
            return Err(Error::BadParams {
                reason: "first breakpoint must be 0".into(),
            });
        }
        for w in breaks.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::BadParams {
                    reason: "breakpoints must be strictly increasing".into(),
                });
            }
        }
        let period = *breaks.last().unwrap();
        let dim = start.len();
        let mut vertices = start.clone();
        let mut p = start;
        for (i, c) in slopes.iter().enumerate() {
            let dl = breaks[i + 1] - breaks[i];
            p = vecn::axpy(&p, dl, c);
            if i + 1 < m1 {
                vertices.extend_from_slice(&p);
            }
        }
        let gap = vecn::dist(&p, &vertices[..dim]);
        if gap > 1e-10 * period.max(1.0) {
            return Err(Error::BadParams {
                reason: format!("loop does not close: seam gap {gap:.3e}"),
            });
        }
        Ok(PiecewiseLinearLoop {
            period,
            dim,
            breaks,
            vertices,
            slopes: slopes.into_iter().flatten().collect(),
        })
    }

    /// Build from vertex positions at the breakpoints (the loop closes back to
    /// the first vertex over the final segment).
    pub fn from_vertices(breaks: Vec<f64>, vertices: Vec<Vec<f64>>) -> Result<Self> {
        if breaks.len() != vertices.len() + 1 {
            return Err(Error::BadParams {
                reason: "need one more breakpoint than vertices".into(),
            });
        }
        let dim = vertices[0].len();
        let mut slopes = Vec::with_capacity(vertices.len());
        for i in 0..vertices.len() {
            let next = if i + 1 < vertices.len() {
                &vertices[i + 1]
            } else {
                &vertices[0]
            };
            let dl = breaks[i + 1] - breaks[i];
            slopes.push(
                next.iter()
                    .zip(&vertices[i])
                    .map(|(a, b)| (a - b) / dl)
                    .collect::<Vec<f64>>(),
            );
        }
        let start = vertices[0].clone();
        let _ = dim;
        Self::from_slopes(breaks, slopes, start)
    }

    pub fn period(&self) -> f64 {
        self.period
    }
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of segments.
    pub fn segments(&self) -> usize {
        self.slopes.len() / self.dim
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breaks
    }

    pub fn slope(&self, i: usize) -> &[f64] {
        &self.slopes[i * self.dim..(i + 1) * self.dim]
    }

    pub fn vertex(&self, i: usize) -> &[f64] {
        &self.vertices[i * self.dim..(i + 1) * self.dim]
    }

    /// Shortest segment length.
    pub fn min_segment(&self) -> f64 {
        self.breaks
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    fn locate(&self, s: f64) -> (usize, f64) {
        let sr = wrap(s, self.period);
        let i = match self
            .breaks
            .binary_search_by(|v| v.partial_cmp(&sr).unwrap())
        {
            Ok(i) => i.min(self.segments() - 1),
            Err(i) => i - 1,
        };
        (i, sr - self.breaks[i])
    }

    pub fn eval(&self, s: f64, out: &mut [f64]) {
        let (i, t) = self.locate(s);
        let v = self.vertex(i);
        let c = self.slope(i);
        for d in 0..self.dim {
            out[d] = v[d] + t * c[d];
        }
    }

    pub fn deriv(&self, s: f64, out: &mut [f64]) {
        let (i, _) = self.locate(s);
        out.copy_from_slice(self.slope(i));
    }

    pub fn eval_vec(&self, s: f64) -> Vec<f64> {
        let mut v = vec![0.0; self.dim];
        self.eval(s, &mut v);
        v
    }

    /// Exact sum of segment lengths.
    pub fn length(&self) -> f64 {
        (0..self.segments())
            .map(|i| vecn::norm(self.slope(i)) * (self.breaks[i + 1] - self.breaks[i]))
            .sum()
    }
}

/// Reduce s into [0, period).
#[inline]
pub fn wrap(s: f64, period: f64) -> f64 {
    let r = s - period * (s / period).floor();
    if r >= period {
        0.0
    } else {
        r
    }
}

/// Which backend a loop uses; tolerance checks are backend-aware.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendKind {
    Analytic,
    SampledSpline,
    PiecewiseLinear,
}

/// A closed curve R -> R^n with period E, evaluable with two derivatives.
#[derive(Clone)]
pub enum PeriodicLoop {
    Analytic(Arc<dyn AnalyticCurve>),
    SampledSpline(Arc<PeriodicSpline>),
    PiecewiseLinear(Arc<PiecewiseLinearLoop>),
}

impl std::fmt::Debug for PeriodicLoop {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "PeriodicLoop({:?}, dim={}, period={})",
            self.backend_kind(),
            self.dim(),
            self.period()
        )
    }
}

impl PeriodicLoop {
    pub fn analytic<C: AnalyticCurve + 'static>(c: C) -> Self {
        PeriodicLoop::Analytic(Arc::new(c))
    }

    pub fn piecewise_linear(p: PiecewiseLinearLoop) -> Self {
        PeriodicLoop::PiecewiseLinear(Arc::new(p))
    }

    pub fn backend_kind(&self) -> BackendKind {
        match self {
            PeriodicLoop::Analytic(_) => BackendKind::Analytic,
            PeriodicLoop::SampledSpline(_) => BackendKind::SampledSpline,
            PeriodicLoop::PiecewiseLinear(_) => BackendKind::PiecewiseLinear,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            PeriodicLoop::Analytic(c) => c.dim(),
            PeriodicLoop::SampledSpline(s) => s.dim(),
            PeriodicLoop::PiecewiseLinear(p) => p.dim(),
        }
    }

    pub fn period(&self) -> f64 {
        match self {
            PeriodicLoop::Analytic(c) => c.period(),
            PeriodicLoop::SampledSpline(s) => s.period(),
            PeriodicLoop::PiecewiseLinear(p) => p.period(),
        }
    }

    /// Natural sampling resolution: the spline's own grid, or a default for
    /// closed forms.
    pub fn grid_hint(&self) -> usize {
        match self {
            PeriodicLoop::SampledSpline(s) => s.n_nodes(),
            _ => 512,
        }
    }

    /// Unit-speed / gauge tolerance appropriate for this backend.
    pub fn backend_tol(&self) -> f64 {
        match self {
            PeriodicLoop::SampledSpline(s) => TOL.spline_tol(s.n_nodes()),
            _ => TOL.analytic,
        }
    }

    pub fn eval_into(&self, s: f64, out: &mut [f64]) {
        match self {
            PeriodicLoop::Analytic(c) => c.eval(wrap(s, c.period()), out),
            PeriodicLoop::SampledSpline(sp) => sp.eval(s, out),
            PeriodicLoop::PiecewiseLinear(p) => p.eval(s, out),
        }
    }

    pub fn deriv_into(&self, s: f64, out: &mut [f64]) {
        match self {
            PeriodicLoop::Analytic(c) => c.deriv(wrap(s, c.period()), out),
            PeriodicLoop::SampledSpline(sp) => sp.deriv(s, out),
            PeriodicLoop::PiecewiseLinear(p) => p.deriv(s, out),
        }
    }

    pub fn deriv2_into(&self, s: f64, out: &mut [f64]) {
        match self {
            PeriodicLoop::Analytic(c) => c.deriv2(wrap(s, c.period()), out),
            PeriodicLoop::SampledSpline(sp) => sp.deriv2(s, out),
            PeriodicLoop::PiecewiseLinear(_) => out.fill(0.0),
        }
    }

    pub fn eval(&self, s: f64) -> Vec<f64> {
        let mut v = vec![0.0; self.dim()];
        self.eval_into(s, &mut v);
        v
    }

    pub fn deriv(&self, s: f64) -> Vec<f64> {
        let mut v = vec![0.0; self.dim()];
        self.deriv_into(s, &mut v);
        v
    }

    pub fn deriv2(&self, s: f64) -> Vec<f64> {
        let mut v = vec![0.0; self.dim()];
        self.deriv2_into(s, &mut v);
        v
    }

    pub fn speed(&self, s: f64) -> f64 {
        vecn::norm(&self.deriv(s))
    }

    /// Minimum speed over a dense sample (regularity probe).
    pub fn min_speed(&self, m: usize) -> f64 {
        let h = self.period() / m as f64;
        let mut buf = vec![0.0; self.dim()];
        let mut min = f64::INFINITY;
        for j in 0..m {
            self.deriv_into(j as f64 * h, &mut buf);
            min = min.min(vecn::norm(&buf));
        }
        min
    }

    /// Max nodewise deviation of |gamma'| from 1 over a dense sample.
    pub fn unit_speed_deviation(&self, m: usize) -> f64 {
        let h = self.period() / m as f64;
        let mut buf = vec![0.0; self.dim()];
        let mut dev: f64 = 0.0;
        for j in 0..m {
            self.deriv_into(j as f64 * h, &mut buf);
            dev = dev.max((vecn::norm(&buf) - 1.0).abs());
        }
        dev
    }
}

/// Exact-unit-speed arc-length view of a regular analytic curve.
///
/// The parameter map x(s) comes from a dense cumulative-quadrature table;
/// the reported derivative is gamma'(x)/|gamma'(x)|, which has unit norm by
/// construction regardless of the table's interpolation error.
pub struct ArcLengthCurve {
    inner: Arc<dyn AnalyticCurve>,
    table: InversionTable,
    length: f64,
}

impl ArcLengthCurve {
    pub fn new(inner: Arc<dyn AnalyticCurve>, fine: usize) -> Result<Self> {
        let e0 = inner.period();
        let dim = inner.dim();
        let speed = {
            let inner = inner.clone();
            move |x: f64| {
                let mut b = vec![0.0; dim];
                inner.deriv(wrap(x, e0), &mut b);
                vecn::norm(&b)
            }
        };
        let mut min = f64::INFINITY;
        for j in 0..fine {
            min = min.min(speed(j as f64 * e0 / fine as f64));
        }
        if min <= TOL.regularity {
            return Err(Error::NonRegularCurve {
                min_speed: min,
                threshold: TOL.regularity,
            });
        }
        let table = InversionTable::build(e0, fine, speed);
        let length = table.total();
        Ok(ArcLengthCurve {
            inner,
            table,
            length,
        })
    }

    fn param(&self, s: f64) -> f64 {
        self.table.invert(wrap(s, self.length))
    }
}

impl AnalyticCurve for ArcLengthCurve {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn period(&self) -> f64 {
        self.length
    }
    fn eval(&self, s: f64, out: &mut [f64]) {
        self.inner.eval(wrap(self.param(s), self.inner.period()), out);
    }
    fn deriv(&self, s: f64, out: &mut [f64]) {
        let x = wrap(self.param(s), self.inner.period());
        self.inner.deriv(x, out);
        let n = vecn::norm(out);
        for v in out.iter_mut() {
            *v /= n;
        }
    }
    fn deriv2(&self, s: f64, out: &mut [f64]) {
        let x = wrap(self.param(s), self.inner.period());
        let dim = self.inner.dim();
        let mut g1 = vec![0.0; dim];
        self.inner.deriv(x, &mut g1);
        self.inner.deriv2(x, out);
        let n2 = vecn::dot(&g1, &g1);
        let c = vecn::dot(&g1, out) / n2;
        for d in 0..dim {
            out[d] = (out[d] - c * g1[d]) / n2;
        }
    }
}

/// Velocity data attached to a loop: an E-periodic map with zero mean over
/// one period (otherwise the d'Alembert pair cannot be E-periodic).
#[derive(Debug, Clone)]
pub struct VelocityField {
    inner: Option<PeriodicLoop>,
    dim: usize,
    period: f64,
}

impl VelocityField {
    /// The identically-zero velocity.
    pub fn zero(dim: usize, period: f64) -> Self {
        VelocityField {
            inner: None,
            dim,
            period,
        }
    }

    /// Wrap a loop as a velocity field, enforcing the zero-mean invariant
    /// |int v| <= 1e-10 E.
    pub fn new(field: PeriodicLoop) -> Result<Self> {
        let dim = field.dim();
        let period = field.period();
        let m = 4 * field.grid_hint();
        let h = period / m as f64;
        let mut mean = vec![0.0; dim];
        let mut buf = vec![0.0; dim];
        for j in 0..m {
            field.eval_into(j as f64 * h, &mut buf);
            for d in 0..dim {
                mean[d] += buf[d] * h;
            }
        }
        let mean_norm = vecn::norm(&mean);
        if mean_norm > 1e-10 * period {
            return Err(Error::NonZeroMeanVelocity { mean_norm });
        }
        Ok(VelocityField {
            inner: Some(field),
            dim,
            period,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.inner.is_none()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn eval_into(&self, s: f64, out: &mut [f64]) {
        match &self.inner {
            None => out.fill(0.0),
            Some(l) => l.eval_into(s, out),
        }
    }

    pub fn eval(&self, s: f64) -> Vec<f64> {
        let mut v = vec![0.0; self.dim];
        self.eval_into(s, &mut v);
        v
    }

    /// Max |v| over a dense sample.
    pub fn max_norm(&self, m: usize) -> f64 {
        match &self.inner {
            None => 0.0,
            Some(l) => {
                let h = self.period / m as f64;
                let mut buf = vec![0.0; self.dim];
                let mut mx: f64 = 0.0;
                for j in 0..m {
                    l.eval_into(j as f64 * h, &mut buf);
                    mx = mx.max(vecn::norm(&buf));
                }
                mx
            }
        }
    }
}

/// Total length int |gamma'| over one period: exact for piecewise-linear
/// loops, composite quadrature otherwise.
pub fn total_length(curve: &PeriodicLoop) -> f64 {
    match curve {
        PeriodicLoop::PiecewiseLinear(p) => p.length(),
        _ => {
            let m = (8 * curve.grid_hint()).max(4096);
            let dim = curve.dim();
            let mut buf = vec![0.0; dim];
            quad::simpson(0.0, curve.period(), m, |x| {
                curve.deriv_into(x, &mut buf);
                vecn::norm(&buf)
            })
        }
    }
}

/// Reparametrize a regular curve by arc length: the output is a periodic
/// spline with period equal to the total length and |gamma'| = 1 at nodes.
///
/// Cumulative length uses composite Simpson on a 4N-fine grid; the inverse
/// map uses monotone cubic interpolation with exact nodal slopes 1/|gamma'|.
pub fn arclength_reparametrize(curve: &PeriodicLoop, n: usize) -> Result<PeriodicLoop> {
    let dim = curve.dim();
    let e0 = curve.period();
    let fine = 4 * n;
    let min = curve.min_speed(2 * fine);
    if min <= TOL.regularity {
        return Err(Error::NonRegularCurve {
            min_speed: min,
            threshold: TOL.regularity,
        });
    }
    let mut dbuf = vec![0.0; dim];
    let table = InversionTable::build(e0, fine, |x| {
        curve.deriv_into(x, &mut dbuf);
        vecn::norm(&dbuf)
    });
    let length = table.total();
    let mut samples = vec![0.0; n * dim];
    let mut pbuf = vec![0.0; dim];
    for k in 0..n {
        let x = table.invert(k as f64 * length / n as f64);
        curve.eval_into(x, &mut pbuf);
        samples[k * dim..(k + 1) * dim].copy_from_slice(&pbuf);
    }
    Ok(PeriodicLoop::SampledSpline(Arc::new(PeriodicSpline::new(
        samples, dim, length,
    ))))
}

/// Interpolate uniform samples of one period with a C^2 periodic spline.
pub fn periodic_interpolate(samples: &[f64], dim: usize, period: f64) -> Result<PeriodicLoop> {
    let n = samples.len() / dim;
    if n < 8 || n * dim != samples.len() {
        return Err(Error::TooFewSamples { got: n, need: 8 });
    }
    Ok(PeriodicLoop::SampledSpline(Arc::new(PeriodicSpline::new(
        samples.to_vec(),
        dim,
        period,
    ))))
}

/// Convenience: the unit-speed circle of radius r as an analytic loop,
/// parametrized on [0, 2 pi r].
pub fn circle_loop(r: f64) -> PeriodicLoop {
    PeriodicLoop::analytic(ClosureCurve::new(
        2,
        2.0 * std::f64::consts::PI * r,
        move |s, out| {
            out[0] = r * (s / r).cos();
            out[1] = r * (s / r).sin();
        },
        move |s, out| {
            out[0] = -(s / r).sin();
            out[1] = (s / r).cos();
        },
        move |s, out| {
            out[0] = -(s / r).cos() / r;
            out[1] = -(s / r).sin() / r;
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    /// Independent oracle: adaptive Simpson quadrature, used to pin expected
    /// arc lengths without going through the library's quadrature path.
    pub fn adaptive_simpson<F: Fn(f64) -> f64 + Copy>(f: F, a: f64, b: f64, tol: f64) -> f64 {
        fn simp<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
            (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
        }
        fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
            let m = 0.5 * (a + b);
            let left = simp(f, a, m);
            let right = simp(f, m, b);
            if depth > 40 || (left + right - whole).abs() <= 15.0 * tol {
                left + right + (left + right - whole) / 15.0
            } else {
                rec(f, a, m, left, tol / 2.0, depth + 1) + rec(f, m, b, right, tol / 2.0, depth + 1)
            }
        }
        let whole = simp(&f, a, b);
        rec(&f, a, b, whole, tol, 0)
    }

    fn ellipse_01() -> PeriodicLoop {
        // (2 cos 2 pi s, sin 2 pi s) on [0, 1]
        PeriodicLoop::analytic(ClosureCurve::new(
            2,
            1.0,
            |s, out| {
                out[0] = 2.0 * (2.0 * PI * s).cos();
                out[1] = (2.0 * PI * s).sin();
            },
            |s, out| {
                out[0] = -4.0 * PI * (2.0 * PI * s).sin();
                out[1] = 2.0 * PI * (2.0 * PI * s).cos();
            },
            |s, out| {
                out[0] = -8.0 * PI * PI * (2.0 * PI * s).cos();
                out[1] = -4.0 * PI * PI * (2.0 * PI * s).sin();
            },
        ))
    }

    /// Ellipse (2 cos, sin) perimeter, frozen from an independent
    /// high-precision quadrature oracle.
    const ELLIPSE_2_1_PERIMETER: f64 = 9.688448220547676;

    #[test]
    fn oracle_confirms_frozen_perimeter() {
        let p = adaptive_simpson(
            |s| {
                let dx = -4.0 * PI * (2.0 * PI * s).sin();
                let dy = 2.0 * PI * (2.0 * PI * s).cos();
                dx.hypot(dy)
            },
            0.0,
            1.0,
            1e-13,
        );
        assert!(
            (p - ELLIPSE_2_1_PERIMETER).abs() < 1e-9,
            "oracle = {p}, frozen = {ELLIPSE_2_1_PERIMETER}"
        );
    }

    #[test]
    fn total_length_unit_circle() {
        let c = circle_loop(1.0);
        assert!((total_length(&c) - 2.0 * PI).abs() < 1e-10);
    }

    #[test]
    fn total_length_square_exact() {
        let sq = crate::scenarios::square_loop(1.5);
        assert_eq!(total_length(&sq), 6.0);
    }

    #[test]
    fn total_length_ellipse_matches_oracle() {
        let e = ellipse_01();
        assert!((total_length(&e) - ELLIPSE_2_1_PERIMETER).abs() < 1e-10);
    }

    #[test]
    fn reparametrize_circle_radius_two() {
        // circle of radius 2 on [0, 1]: period becomes 4 pi, unit speed
        let c = PeriodicLoop::analytic(ClosureCurve::new(
            2,
            1.0,
            |s, out| {
                out[0] = 2.0 * (2.0 * PI * s).cos();
                out[1] = 2.0 * (2.0 * PI * s).sin();
            },
            |s, out| {
                out[0] = -4.0 * PI * (2.0 * PI * s).sin();
                out[1] = 4.0 * PI * (2.0 * PI * s).cos();
            },
            |s, out| {
                out[0] = -8.0 * PI * PI * (2.0 * PI * s).cos();
                out[1] = -8.0 * PI * PI * (2.0 * PI * s).sin();
            },
        ));
        let r = arclength_reparametrize(&c, 256).unwrap();
        assert!((r.period() - 4.0 * PI).abs() < 1e-9);
        assert!(r.unit_speed_deviation(256) < 1e-8);
    }

    #[test]
    fn reparametrize_identity_on_unit_speed_circle() {
        let c = circle_loop(1.0);
        let r = arclength_reparametrize(&c, 128).unwrap();
        assert!((r.period() - 2.0 * PI).abs() < 1e-12);
        // identity up to resampling: nodes reproduce the input exactly
        for k in 0..128 {
            let s = 2.0 * PI * k as f64 / 128.0;
            assert!(vecn::dist(&r.eval(s), &c.eval(s)) < 1e-10);
        }
    }

    #[test]
    fn reparametrize_ellipse_period_matches_oracle() {
        let e = ellipse_01();
        let r = arclength_reparametrize(&e, 256).unwrap();
        assert!((r.period() - ELLIPSE_2_1_PERIMETER).abs() < 1e-8);
        assert!(r.unit_speed_deviation(256) < 4e-6);
    }

    #[test]
    fn reparametrize_rejects_degenerate_curve() {
        // figure-eight-ish with a stationary point at s = 0
        let c = PeriodicLoop::analytic(ClosureCurve::new(
            2,
            2.0 * PI,
            |s, out| {
                out[0] = (1.0 - s.cos()).powi(2);
                out[1] = s.sin() * (1.0 - s.cos());
            },
            |s, out| {
                out[0] = 2.0 * (1.0 - s.cos()) * s.sin();
                out[1] = s.cos() * (1.0 - s.cos()) + s.sin() * s.sin();
            },
            |_, out| out.fill(0.0),
        ));
        assert!(matches!(
            arclength_reparametrize(&c, 64),
            Err(Error::NonRegularCurve { .. })
        ));
    }

    #[test]
    fn arclength_idempotent() {
        let e = ellipse_01();
        let once = arclength_reparametrize(&e, 512).unwrap();
        let twice = arclength_reparametrize(&once, 512).unwrap();
        assert!((once.period() - twice.period()).abs() < 1e-8);
        let mut sup: f64 = 0.0;
        for k in 0..1024 {
            let s = once.period() * k as f64 / 1024.0;
            sup = sup.max(vecn::dist(&once.eval(s), &twice.eval(s)));
        }
        assert!(sup < 1e-8, "idempotence sup distance = {sup:.3e}");
    }

    #[test]
    fn periodic_interpolate_reproduces_samples() {
        let n = 16;
        let samples: Vec<f64> = (0..n)
            .flat_map(|k| {
                let s = 2.0 * PI * k as f64 / n as f64;
                [s.cos(), s.sin()]
            })
            .collect();
        let l = periodic_interpolate(&samples, 2, 2.0 * PI).unwrap();
        for k in 0..n {
            let s = 2.0 * PI * k as f64 / n as f64;
            let p = l.eval(s);
            assert!((p[0] - s.cos()).abs() < 1e-13);
            assert!((p[1] - s.sin()).abs() < 1e-13);
        }
    }

    #[test]
    fn periodic_interpolate_rejects_two_samples() {
        assert!(matches!(
            periodic_interpolate(&[0.0, 0.0, 1.0, 1.0], 2, 1.0),
            Err(Error::TooFewSamples { .. })
        ));
    }

    #[test]
    fn periodic_interpolate_64_samples_close_to_analytic() {
        let n = 64;
        let samples: Vec<f64> = (0..n)
            .flat_map(|k| {
                let s = 2.0 * PI * k as f64 / n as f64;
                [s.cos(), s.sin()]
            })
            .collect();
        let l = periodic_interpolate(&samples, 2, 2.0 * PI).unwrap();
        let mut sup: f64 = 0.0;
        for j in 0..4096 {
            let s = 2.0 * PI * j as f64 / 4096.0;
            let p = l.eval(s);
            sup = sup.max((p[0] - s.cos()).abs().max((p[1] - s.sin()).abs()));
        }
        assert!(sup < 1e-5, "interpolation sup error = {sup:.3e}");
    }

    #[test]
    fn every_backend_is_periodic_at_random_points() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let loops = [
            circle_loop(1.3),
            arclength_reparametrize(&ellipse_01(), 64).unwrap(),
            crate::scenarios::square_loop(2.0),
        ];
        for l in &loops {
            let e = l.period();
            for _ in 0..100 {
                let s: f64 = rng.gen_range(0.0..e);
                let tol = match l.backend_kind() {
                    BackendKind::SampledSpline => 1e-12,
                    _ => 1e-12,
                };
                assert!(vecn::dist(&l.eval(s), &l.eval(s + e)) <= tol);
            }
        }
    }

    #[test]
    fn spline_derivative_order_at_least_two() {
        let mut errs = Vec::new();
        for n in [64usize, 128, 256] {
            let r = arclength_reparametrize(&circle_loop(1.0), n).unwrap();
            let mut e: f64 = 0.0;
            for k in 0..n {
                let s = r.period() * k as f64 / n as f64;
                e = e.max((vecn::norm(&r.deriv(s)) - 1.0).abs());
            }
            errs.push(e.max(1e-16));
        }
        assert!(errs[0] / errs[1] > 3.9, "node derivative errors {errs:?}");
        assert!(errs[1] / errs[2] > 3.9, "node derivative errors {errs:?}");
    }

    #[test]
    fn arc_length_curve_has_exact_unit_speed() {
        let e = ellipse_01();
        let inner: Arc<dyn AnalyticCurve> = match e {
            PeriodicLoop::Analytic(c) => c,
            _ => unreachable!(),
        };
        let al = ArcLengthCurve::new(inner, 4096).unwrap();
        let mut buf = [0.0; 2];
        for k in 0..500 {
            al.deriv(al.period() * k as f64 / 500.0, &mut buf);
            assert!((vecn::norm(&buf) - 1.0).abs() < 1e-15);
        }
        assert!((al.period() - ELLIPSE_2_1_PERIMETER).abs() < 1e-10);
    }

    #[test]
    fn velocity_field_rejects_nonzero_mean() {
        let v = PeriodicLoop::analytic(ClosureCurve::new(
            2,
            2.0 * PI,
            |_, out| {
                out[0] = 0.1;
                out[1] = 0.0;
            },
            |_, out| out.fill(0.0),
            |_, out| out.fill(0.0),
        ));
        assert!(matches!(
            VelocityField::new(v),
            Err(Error::NonZeroMeanVelocity { .. })
        ));
    }
}
