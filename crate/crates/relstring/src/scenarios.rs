//! Closed-form and constructed initial data: every scenario returns a ready
//! d'Alembert pair plus expected facts usable by tests and the CLI manifest.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use crate::curve::{
    circle_loop, AnalyticCurve, ArcLengthCurve, ClosureCurve, PeriodicLoop, PiecewiseLinearLoop,
};
use crate::dalembert::{ConstraintMode, DAlembertPair};
use crate::error::{Error, Result};
use crate::quad;

/// amp * base(rate * s), declared with its own period (which must be a
/// multiple of the base period divided by rate).
fn scaled_arg_loop(base: PeriodicLoop, amp: f64, rate: f64, period: f64) -> PeriodicLoop {
    let dim = base.dim();
    let b1 = base.clone();
    let b2 = base.clone();
    let b3 = base;
    PeriodicLoop::analytic(ClosureCurve::new(
        dim,
        period,
        move |s, out| {
            b1.eval_into(rate * s, out);
            for v in out.iter_mut() {
                *v *= amp;
            }
        },
        move |s, out| {
            b2.deriv_into(rate * s, out);
            for v in out.iter_mut() {
                *v *= amp * rate;
            }
        },
        move |s, out| {
            b3.deriv2_into(rate * s, out);
            for v in out.iter_mut() {
                *v *= amp * rate * rate;
            }
        },
    ))
}

/// Circle of radius r: a = b = r (cos s/r, sin s/r), E = 2 pi r; the slice
/// shrinks as cos(t/r) and collapses at t = E/4.
pub fn circle(r: f64) -> DAlembertPair {
    let a = circle_loop(r);
    DAlembertPair::new(a.clone(), a, ConstraintMode::UnitSpeed).expect("circle pair is exact")
}

/// The square boundary of side l as an exact piecewise-linear loop,
/// counter-clockwise from the corner (-l/2, -l/2).
pub fn square_pl(l: f64) -> PiecewiseLinearLoop {
    PiecewiseLinearLoop::from_slopes(
        vec![0.0, l, 2.0 * l, 3.0 * l, 4.0 * l],
        vec![
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![-1.0, 0.0],
            vec![0.0, -1.0],
        ],
        vec![-0.5 * l, -0.5 * l],
    )
    .expect("square closes")
}

pub fn square_loop(l: f64) -> PeriodicLoop {
    PeriodicLoop::piecewise_linear(square_pl(l))
}

/// Weak Lipschitz evolution of the square [-L/2, L/2]^2 with zero initial
/// velocity: slices are shrinking octagons, then rotated squares collapsing
/// to the origin at t = L.
pub fn square(l: f64) -> DAlembertPair {
    let a = square_loop(l);
    DAlembertPair::new(a.clone(), a, ConstraintMode::UnitSpeed).expect("square pair is exact")
}

/// Regular unit-circumradius polygon with the given number of sides, as an
/// arc-length piecewise-linear loop.
pub fn regular_polygon(sides: usize) -> PiecewiseLinearLoop {
    assert!(sides >= 3);
    let side = 2.0 * (PI / sides as f64).sin();
    let breaks: Vec<f64> = (0..=sides).map(|j| j as f64 * side).collect();
    let vertices: Vec<Vec<f64>> = (0..sides)
        .map(|j| {
            let th = 2.0 * PI * j as f64 / sides as f64;
            vec![th.cos(), th.sin()]
        })
        .collect();
    PiecewiseLinearLoop::from_vertices(breaks, vertices).expect("polygon closes")
}

/// Flat back-and-forth loop: slope (1/2, 0) on [0, 1], (-1/2, 0) on [1, 2].
/// Degenerate as a curve, but the canonical zig-zag input.
pub fn flat_loop() -> PiecewiseLinearLoop {
    PiecewiseLinearLoop::from_slopes(
        vec![0.0, 1.0, 2.0],
        vec![vec![0.5, 0.0], vec![-0.5, 0.0]],
        vec![0.0, 0.0],
    )
    .expect("flat loop closes")
}

/// Ellipse (rx cos s, ry sin s) on [0, 2 pi].
pub fn ellipse_curve(rx: f64, ry: f64) -> PeriodicLoop {
    PeriodicLoop::analytic(ClosureCurve::new(
        2,
        2.0 * PI,
        move |s, out| {
            out[0] = rx * s.cos();
            out[1] = ry * s.sin();
        },
        move |s, out| {
            out[0] = -rx * s.sin();
            out[1] = ry * s.cos();
        },
        move |s, out| {
            out[0] = -rx * s.cos();
            out[1] = -ry * s.sin();
        },
    ))
}

/// Uniformly convex C^2 curve with zero initial velocity, arc-length
/// reparametrized into a unit-speed pair a = b (spline backend of size n).
pub fn convex_zero_velocity(curve: &PeriodicLoop, n: usize) -> Result<DAlembertPair> {
    if curve.dim() != 2 {
        return Err(Error::WrongDimension {
            got: curve.dim(),
            need: 2,
        });
    }
    // uniform convexity of the input: signed curvature cross(g', g'') > 0
    let m = (4 * n).max(1024);
    let mut margin = f64::INFINITY;
    for j in 0..m {
        let s = curve.period() * j as f64 / m as f64;
        let d1 = curve.deriv(s);
        let d2 = curve.deriv2(s);
        margin = margin.min(d1[0] * d2[1] - d1[1] * d2[0]);
    }
    if margin <= 0.0 {
        return Err(Error::NotConvex { margin });
    }
    let a = crate::curve::arclength_reparametrize(curve, n)?;
    DAlembertPair::new(a.clone(), a, ConstraintMode::UnitSpeed)
}

/// Ellipse pair via convex_zero_velocity.
pub fn ellipse_pair(rx: f64, ry: f64, n: usize) -> Result<DAlembertPair> {
    convex_zero_velocity(&ellipse_curve(rx, ry), n)
}

/// Centrally symmetric smooth convex oval
/// (cos s + 0.1 cos 3s, sin s - 0.1 sin 3s); signed curvature
/// 1 + 0.6 cos 4s - 0.27 > 0.
pub fn symmetric_oval_curve() -> PeriodicLoop {
    PeriodicLoop::analytic(ClosureCurve::new(
        2,
        2.0 * PI,
        |s, out| {
            out[0] = s.cos() + 0.1 * (3.0 * s).cos();
            out[1] = s.sin() - 0.1 * (3.0 * s).sin();
        },
        |s, out| {
            out[0] = -s.sin() - 0.3 * (3.0 * s).sin();
            out[1] = s.cos() - 0.3 * (3.0 * s).cos();
        },
        |s, out| {
            out[0] = -s.cos() - 0.9 * (3.0 * s).cos();
            out[1] = -s.sin() + 0.9 * (3.0 * s).sin();
        },
    ))
}

/// Exact-unit-speed pair a = b on the symmetric oval (analytic arc-length
/// backend; collapse-time diagnostics resolve 1e-10 on it).
pub fn symmetric_oval_pair() -> Result<DAlembertPair> {
    let inner: Arc<dyn AnalyticCurve> = match symmetric_oval_curve() {
        PeriodicLoop::Analytic(c) => c,
        _ => unreachable!(),
    };
    let a = PeriodicLoop::analytic(ArcLengthCurve::new(inner, 16384)?);
    DAlembertPair::new(a.clone(), a, ConstraintMode::UnitSpeed)
}

/// Non-symmetric uniformly convex oval from the support function
/// h(theta) = 1 + 0.1 cos 3 theta (curvature radius 1 - 0.8 cos 3 theta).
pub fn egg_curve() -> PeriodicLoop {
    let h = |t: f64| 1.0 + 0.1 * (3.0 * t).cos();
    let hp = |t: f64| -0.3 * (3.0 * t).sin();
    let hpp = |t: f64| -0.9 * (3.0 * t).cos();
    let hppp = |t: f64| 2.7 * (3.0 * t).sin();
    PeriodicLoop::analytic(ClosureCurve::new(
        2,
        2.0 * PI,
        move |t, out| {
            out[0] = h(t) * t.cos() - hp(t) * t.sin();
            out[1] = h(t) * t.sin() + hp(t) * t.cos();
        },
        move |t, out| {
            let r = h(t) + hpp(t);
            out[0] = -r * t.sin();
            out[1] = r * t.cos();
        },
        move |t, out| {
            let r = h(t) + hpp(t);
            let rp = hp(t) + hppp(t);
            out[0] = -rp * t.sin() - r * t.cos();
            out[1] = rp * t.cos() - r * t.sin();
        },
    ))
}

/// Exact-unit-speed pair a = b on the egg (t(x) genuinely spreads).
pub fn egg_pair() -> Result<DAlembertPair> {
    let inner: Arc<dyn AnalyticCurve> = match egg_curve() {
        PeriodicLoop::Analytic(c) => c,
        _ => unreachable!(),
    };
    let a = PeriodicLoop::analytic(ArcLengthCurve::new(inner, 16384)?);
    DAlembertPair::new(a.clone(), a, ConstraintMode::UnitSpeed)
}

/// Sub-unit pair a = b = c * circle with |a'| = |b'| = c < 1: equal speeds,
/// orthogonally parametrized, the clean test bed for the sectional identity.
pub fn scaled_circle_pair(c: f64) -> Result<DAlembertPair> {
    let a = PeriodicLoop::analytic(ClosureCurve::new(
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
    DAlembertPair::new(a.clone(), a, ConstraintMode::SubUnit)
}

/// Cylinder family: a(s) = 2A(s/2), b(s) = eps A(s/eps), E = 2L. As
/// eps -> 0 the evolution converges to the static reparametrized curve
/// A((x+t)/2). Needs |A'| = 1 and 2/eps integral so b is E-periodic.
pub fn cylinder(a_curve: &PeriodicLoop, eps: f64) -> Result<DAlembertPair> {
    if !(eps > 0.0 && eps < 1.0) || (2.0 / eps - (2.0 / eps).round()).abs() > 1e-9 {
        return Err(Error::BadEps { eps });
    }
    let dev = a_curve.unit_speed_deviation(4096);
    if dev > a_curve.backend_tol() {
        return Err(Error::NotNormalized { residual: dev });
    }
    let e = 2.0 * a_curve.period();
    let a = scaled_arg_loop(a_curve.clone(), 2.0, 0.5, e);
    let b = scaled_arg_loop(a_curve.clone(), eps, 1.0 / eps, e);
    DAlembertPair::new(a, b, ConstraintMode::UnitSpeed)
}

/// The eps -> 0 limit of the cylinder family: pair (2A(s/2), 0), a SubUnit
/// wave solution whose image is the static curve traversed at half speed.
pub fn static_limit_pair(a_curve: &PeriodicLoop) -> Result<DAlembertPair> {
    let e = 2.0 * a_curve.period();
    let a = scaled_arg_loop(a_curve.clone(), 2.0, 0.5, e);
    let b = PeriodicLoop::piecewise_linear(
        PiecewiseLinearLoop::from_slopes(
            vec![0.0, e],
            vec![vec![0.0; a_curve.dim()]],
            vec![0.0; a_curve.dim()],
        )
        .expect("constant loop"),
    );
    DAlembertPair::new(a, b, ConstraintMode::SubUnit)
}

/// alpha = (1/2pi) int_0^{2pi} sqrt(5/4 + cos sigma) d sigma, the period
/// stretch of the oscillating circle family; lies strictly in (1, 3/2).
pub fn neu_alpha() -> f64 {
    quad::adaptive_simpson(|s| (1.25 + s.cos()).sqrt(), 0.0, 2.0 * PI, 1e-13) / (2.0 * PI)
}

/// Oscillating-circle family: b_n is the arc-length reparametrization of
/// a(x) + a(nx)/(2n) on the circle, a_n the circle rescaled to the same
/// period l_n; both have |.'| = 1. The uniform limit is the SubUnit pair
/// (alpha a(s/alpha), a(s/alpha)), which never collapses.
pub fn neu(n: usize) -> (DAlembertPair, DAlembertPair) {
    assert!(n >= 2, "need n >= 2");
    let nf = n as f64;
    let inner = ClosureCurve::new(
        2,
        2.0 * PI,
        move |x, out| {
            out[0] = x.cos() + (nf * x).cos() / (2.0 * nf);
            out[1] = x.sin() + (nf * x).sin() / (2.0 * nf);
        },
        move |x, out| {
            out[0] = -x.sin() - (nf * x).sin() / 2.0;
            out[1] = x.cos() + (nf * x).cos() / 2.0;
        },
        move |x, out| {
            out[0] = -x.cos() - nf * (nf * x).cos() / 2.0;
            out[1] = -x.sin() - nf * (nf * x).sin() / 2.0;
        },
    );
    let fine = (256 * (n - 1)).max(8192);
    let b = ArcLengthCurve::new(Arc::new(inner), fine).expect("oscillating circle is regular");
    let l_n = b.period();
    let b = PeriodicLoop::analytic(b);
    let scale = l_n / (2.0 * PI);
    let a = PeriodicLoop::analytic(ClosureCurve::new(
        2,
        l_n,
        move |s, out| {
            out[0] = scale * (s / scale).cos();
            out[1] = scale * (s / scale).sin();
        },
        move |s, out| {
            out[0] = -(s / scale).sin();
            out[1] = (s / scale).cos();
        },
        move |s, out| {
            out[0] = -(s / scale).cos() / scale;
            out[1] = -(s / scale).sin() / scale;
        },
    ));
    let pair =
        DAlembertPair::new(a, b, ConstraintMode::UnitSpeed).expect("oscillating pair is unit speed");
    (pair, neu_limit())
}

/// The uniform limit of the oscillating-circle family.
pub fn neu_limit() -> DAlembertPair {
    let alpha = neu_alpha();
    let a = PeriodicLoop::analytic(ClosureCurve::new(
        2,
        2.0 * PI * alpha,
        move |s, out| {
            out[0] = alpha * (s / alpha).cos();
            out[1] = alpha * (s / alpha).sin();
        },
        move |s, out| {
            out[0] = -(s / alpha).sin();
            out[1] = (s / alpha).cos();
        },
        move |s, out| {
            out[0] = -(s / alpha).cos() / alpha;
            out[1] = -(s / alpha).sin() / alpha;
        },
    ));
    let b = PeriodicLoop::analytic(ClosureCurve::new(
        2,
        2.0 * PI * alpha,
        move |s, out| {
            out[0] = (s / alpha).cos();
            out[1] = (s / alpha).sin();
        },
        move |s, out| {
            out[0] = -(s / alpha).sin() / alpha;
            out[1] = (s / alpha).cos() / alpha;
        },
        move |s, out| {
            out[0] = -(s / alpha).cos() / (alpha * alpha);
            out[1] = -(s / alpha).sin() / (alpha * alpha);
        },
    ));
    DAlembertPair::new(a, b, ConstraintMode::SubUnit).expect("limit pair is sub-unit")
}

/// Helical oscillations in cylindrical coordinates (n = 3): a is the shifted
/// angular direction field, b_n carries transverse oscillations with
/// |b_n'| = 1 exactly; the limit is (a, alpha e_theta) with min |gamma| >=
/// (1 - alpha)/2.
pub fn helical3d(
    alpha: f64,
    beta: f64,
    n: usize,
    phi: f64,
) -> Result<(DAlembertPair, DAlembertPair)> {
    if (alpha * alpha + beta * beta - 1.0).abs() > 1e-12
        || !(alpha.abs() < 1.0)
        || !(beta.abs() < 1.0)
        || n < 2
    {
        return Err(Error::BadParams {
            reason: format!("need alpha^2 + beta^2 = 1, |alpha|,|beta| < 1, n >= 2; got alpha={alpha}, beta={beta}, n={n}"),
        });
    }
    let nf = n as f64;
    let a = PeriodicLoop::analytic(ClosureCurve::new(
        3,
        2.0 * PI,
        move |t, out| {
            out[0] = -(t + 2.0 * phi).sin();
            out[1] = (t + 2.0 * phi).cos();
            out[2] = 0.0;
        },
        move |t, out| {
            out[0] = -(t + 2.0 * phi).cos();
            out[1] = -(t + 2.0 * phi).sin();
            out[2] = 0.0;
        },
        move |t, out| {
            out[0] = (t + 2.0 * phi).sin();
            out[1] = -(t + 2.0 * phi).cos();
            out[2] = 0.0;
        },
    ));
    let b = PeriodicLoop::analytic(ClosureCurve::new(
        3,
        2.0 * PI,
        move |t, out| {
            let (er, eth) = ([t.cos(), t.sin(), 0.0], [-t.sin(), t.cos(), 0.0]);
            let c1 = (nf * t).sin() * nf / (nf * nf - 1.0);
            let c2 = (nf * t).cos() / (nf * nf - 1.0);
            let c3 = (nf * t).cos() / nf;
            for d in 0..3 {
                out[d] = alpha * eth[d] + beta * (eth[d] * c1 - er[d] * c2);
            }
            out[2] += beta * c3;
        },
        move |t, out| {
            let (er, eth) = ([t.cos(), t.sin(), 0.0], [-t.sin(), t.cos(), 0.0]);
            let cn = (nf * t).cos();
            let sn = (nf * t).sin();
            for d in 0..3 {
                out[d] = -alpha * er[d] + beta * eth[d] * cn;
            }
            out[2] -= beta * sn;
        },
        move |t, out| {
            let (er, eth) = ([t.cos(), t.sin(), 0.0], [-t.sin(), t.cos(), 0.0]);
            let cn = (nf * t).cos();
            let sn = (nf * t).sin();
            for d in 0..3 {
                out[d] = -alpha * eth[d] + beta * (-er[d] * cn - nf * eth[d] * sn);
            }
            out[2] -= beta * nf * cn;
        },
    ));
    let pair = DAlembertPair::new(a.clone(), b, ConstraintMode::UnitSpeed)?;
    let b_lim = PeriodicLoop::analytic(ClosureCurve::new(
        3,
        2.0 * PI,
        move |t, out| {
            out[0] = -alpha * t.sin();
            out[1] = alpha * t.cos();
            out[2] = 0.0;
        },
        move |t, out| {
            out[0] = -alpha * t.cos();
            out[1] = -alpha * t.sin();
            out[2] = 0.0;
        },
        move |t, out| {
            out[0] = alpha * t.sin();
            out[1] = -alpha * t.cos();
            out[2] = 0.0;
        },
    ));
    let limit = DAlembertPair::new(a, b_lim, ConstraintMode::SubUnit)?;
    Ok((pair, limit))
}

/// Static description of a scenario run: name, parameters and the facts the
/// construction guarantees (used in manifests and tests).
#[derive(Debug, Clone, serde::Serialize)]
pub struct ScenarioSpec {
    pub name: String,
    pub dimension: usize,
    pub parameters: BTreeMap<String, f64>,
    pub expected: BTreeMap<String, f64>,
}

pub struct BuiltScenario {
    pub pair: DAlembertPair,
    pub spec: ScenarioSpec,
}

/// Registered scenario names with their parameter schemas.
pub fn list_scenarios() -> Vec<(&'static str, &'static str)> {
    vec![
        ("circle", "R (radius, default 1)"),
        ("square", "L (side, default 1)"),
        ("ellipse", "rx, ry (semi-axes, default 2, 1); n (grid, default 512)"),
        ("oval", "(none) centrally symmetric convex oval"),
        ("egg", "(none) non-symmetric convex oval"),
        ("polygon", "sides (default 16)"),
        ("neu", "n (oscillation index, default 5)"),
        ("neu_limit", "(none) SubUnit uniform limit of neu"),
        ("helical", "alpha, beta (alpha^2+beta^2=1, default 0.6, 0.8); n (default 7); phi (default 0)"),
        ("helical_limit", "alpha, beta, phi as helical"),
        ("cylinder", "eps (2/eps integral, default 0.125); R (circle radius, default 1)"),
    ]
}

fn get(params: &BTreeMap<String, f64>, key: &str, default: f64) -> f64 {
    params.get(key).copied().unwrap_or(default)
}

/// Build a registered scenario from its name and parameter map.
pub fn build_scenario(name: &str, params: &BTreeMap<String, f64>) -> Result<BuiltScenario> {
    let mut expected = BTreeMap::new();
    let mut eff = params.clone();
    let pair = match name {
        "circle" => {
            let r = get(params, "R", 1.0);
            if r <= 0.0 {
                return Err(Error::Scenario("circle needs R > 0".into()));
            }
            eff.insert("R".into(), r);
            expected.insert("collapse_time".into(), PI * r / 2.0);
            expected.insert("conserved_energy".into(), 2.0 * PI * r);
            circle(r)
        }
        "square" => {
            let l = get(params, "L", 1.0);
            if l <= 0.0 {
                return Err(Error::Scenario("square needs L > 0".into()));
            }
            eff.insert("L".into(), l);
            expected.insert("collapse_time".into(), l);
            expected.insert("conserved_energy".into(), 4.0 * l);
            square(l)
        }
        "ellipse" => {
            let rx = get(params, "rx", 2.0);
            let ry = get(params, "ry", 1.0);
            let n = get(params, "n", 512.0) as usize;
            eff.insert("rx".into(), rx);
            eff.insert("ry".into(), ry);
            eff.insert("n".into(), n as f64);
            ellipse_pair(rx, ry, n)?
        }
        "oval" => symmetric_oval_pair()?,
        "egg" => egg_pair()?,
        "polygon" => {
            let sides = get(params, "sides", 16.0) as usize;
            eff.insert("sides".into(), sides as f64);
            let pl = PeriodicLoop::piecewise_linear(regular_polygon(sides));
            DAlembertPair::new(pl.clone(), pl, ConstraintMode::UnitSpeed)?
        }
        "neu" => {
            let n = get(params, "n", 5.0) as usize;
            eff.insert("n".into(), n as f64);
            expected.insert("alpha".into(), neu_alpha());
            neu(n).0
        }
        "neu_limit" => {
            let alpha = neu_alpha();
            expected.insert("alpha".into(), alpha);
            expected.insert("min_gamma_lower_bound".into(), (alpha - 1.0) / 2.0);
            neu_limit()
        }
        "helical" => {
            let alpha = get(params, "alpha", 0.6);
            let beta = get(params, "beta", 0.8);
            let n = get(params, "n", 7.0) as usize;
            let phi = get(params, "phi", 0.0);
            eff.insert("alpha".into(), alpha);
            eff.insert("beta".into(), beta);
            eff.insert("n".into(), n as f64);
            eff.insert("phi".into(), phi);
            helical3d(alpha, beta, n, phi)?.0
        }
        "helical_limit" => {
            let alpha = get(params, "alpha", 0.6);
            let beta = get(params, "beta", 0.8);
            let phi = get(params, "phi", 0.0);
            eff.insert("alpha".into(), alpha);
            eff.insert("beta".into(), beta);
            eff.insert("phi".into(), phi);
            expected.insert("min_gamma_lower_bound".into(), (1.0 - alpha) / 2.0);
            helical3d(alpha, beta, 7, phi)?.1
        }
        "cylinder" => {
            let eps = get(params, "eps", 0.125);
            let r = get(params, "R", 1.0);
            eff.insert("eps".into(), eps);
            eff.insert("R".into(), r);
            cylinder(&circle_loop(r), eps)?
        }
        other => {
            return Err(Error::Scenario(format!(
                "unknown scenario '{other}'; see list-scenarios"
            )))
        }
    };
    Ok(BuiltScenario {
        spec: ScenarioSpec {
            name: name.to_string(),
            dimension: pair.dim(),
            parameters: eff,
            expected,
        },
        pair,
    })
}
