//! Planar (n = 2) convexity analysis: uniform convexity of slices, the
//! inclusion of the enclosed convex bodies, and the rescaled blow-up profile
//! near a collapse.

use crate::dalembert::{detect_collapse, evaluate_state, DAlembertPair, StringState};
use crate::error::{Error, Result};
use crate::tol::TOL;
use crate::vecn;

/// Polygonal snapshot of a convex slice, counter-clockwise, with the
/// discrete uniform-convexity margin min <gamma_xx, nu>.
#[derive(Debug, Clone)]
pub struct ConvexSlice {
    /// ordered nodes, flat 2D layout, counter-clockwise
    nodes: Vec<f64>,
    pub period: f64,
    pub convexity_margin: f64,
}

impl ConvexSlice {
    pub fn from_state(state: &StringState) -> Result<Self> {
        let (flag, margin) = is_uniformly_convex(state)?;
        if !flag {
            return Err(Error::NotConvex { margin });
        }
        let n = state.n_nodes();
        let mut nodes = Vec::with_capacity(2 * n);
        for k in 0..n {
            nodes.extend_from_slice(state.gamma(k));
        }
        // normalize to counter-clockwise order
        if signed_area(&nodes) < 0.0 {
            let mut rev = Vec::with_capacity(2 * n);
            for k in (0..n).rev() {
                rev.extend_from_slice(&nodes[2 * k..2 * k + 2]);
            }
            nodes = rev;
        }
        Ok(ConvexSlice {
            nodes,
            period: state.period(),
            convexity_margin: margin,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len() / 2
    }

    pub fn node(&self, k: usize) -> [f64; 2] {
        [self.nodes[2 * k], self.nodes[2 * k + 1]]
    }
}

fn signed_area(nodes: &[f64]) -> f64 {
    let n = nodes.len() / 2;
    let mut a = 0.0;
    for k in 0..n {
        let kp = (k + 1) % n;
        a += nodes[2 * k] * nodes[2 * kp + 1] - nodes[2 * kp] * nodes[2 * k + 1];
    }
    0.5 * a
}

/// Uniform convexity test: with nu the counter-clockwise pi/2 rotation of
/// the unit tangent, the slice is uniformly convex iff min <gamma_xx, nu> is
/// positive; that minimum is the margin.
pub fn is_uniformly_convex(state: &StringState) -> Result<(bool, f64)> {
    if state.dim() != 2 {
        return Err(Error::WrongDimension {
            got: state.dim(),
            need: 2,
        });
    }
    let mn = state.min_speed();
    if mn <= 1e-10 {
        return Err(Error::NonRegularCurve {
            min_speed: mn,
            threshold: 1e-10,
        });
    }
    let mut margin = f64::INFINITY;
    for k in 0..state.n_nodes() {
        let gx = state.gamma_x(k);
        let nx = vecn::norm(gx);
        let nu = [-gx[1] / nx, gx[0] / nx];
        let gxx = state.gamma_xx(k);
        margin = margin.min(gxx[0] * nu[0] + gxx[1] * nu[1]);
    }
    Ok((margin > 0.0, margin))
}

/// Convex hull (monotone chain) of a flat 2D point list; returns hull
/// vertices counter-clockwise.
fn convex_hull(nodes: &[f64]) -> Vec<[f64; 2]> {
    let n = nodes.len() / 2;
    let mut pts: Vec<[f64; 2]> = (0..n).map(|k| [nodes[2 * k], nodes[2 * k + 1]]).collect();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup_by(|a, b| a == b);
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: &[f64; 2], a: &[f64; 2], b: &[f64; 2]| {
        (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
    };
    let mut lower: Vec<[f64; 2]> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= 0.0
        {
            lower.pop();
        }
        lower.push(*p);
    }
    let mut upper: Vec<[f64; 2]> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= 0.0
        {
            upper.pop();
        }
        upper.push(*p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// True iff every node of `inner` lies inside (or within 1e-10 E of the
/// boundary of) the convex hull of `outer`.
pub fn inclusion_check(inner: &ConvexSlice, outer: &ConvexSlice) -> Result<bool> {
    let hull = convex_hull(&outer.nodes);
    if hull.len() < 3 {
        return Err(Error::NotConvex { margin: 0.0 });
    }
    let slack = 1e-10 * outer.period;
    for k in 0..inner.n_nodes() {
        let p = inner.node(k);
        for i in 0..hull.len() {
            let a = hull[i];
            let b = hull[(i + 1) % hull.len()];
            let edge = [b[0] - a[0], b[1] - a[1]];
            let elen = (edge[0] * edge[0] + edge[1] * edge[1]).sqrt();
            let cross = edge[0] * (p[1] - a[1]) - edge[1] * (p[0] - a[0]);
            if cross < -slack * elen {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Rescaled distance profile near a collapse: for each requested time
/// t < t_bar, the nodal max and min of |gamma(t, x) - p| / (t_bar - t).
#[derive(Debug, Clone)]
pub struct ProfileRatios {
    pub t: f64,
    pub delta: f64,
    pub max_ratio: f64,
    pub min_ratio: f64,
}

impl ProfileRatios {
    /// max/min - 1: zero for a perfectly circular profile.
    pub fn spread(&self) -> f64 {
        self.max_ratio / self.min_ratio - 1.0
    }
}

/// Compute the blow-up profile ratios. `p` must be the collapse point at
/// time t_bar (verified with detect_collapse before any ratio is computed).
///
/// For C^2 convex data the profile is circular and both ratios tend to 1;
/// Lipschitz data (the square) keeps a finite spread.
pub fn collapse_profile(
    pair: &DAlembertPair,
    t_bar: f64,
    p: &[f64],
    times: &[f64],
    n: usize,
) -> Result<Vec<ProfileRatios>> {
    let check = detect_collapse(pair, t_bar, n, TOL.collapse_rel);
    match &check.point {
        None => {
            return Err(Error::NoCollapseAtTbar {
                t: t_bar,
                spread: check.max_spread,
            })
        }
        Some(q) => {
            if vecn::dist(q, p) > TOL.collapse_rel * pair.period() * 10.0 {
                return Err(Error::NoCollapseAtTbar {
                    t: t_bar,
                    spread: vecn::dist(q, p),
                });
            }
        }
    }
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        if t >= t_bar {
            return Err(Error::Config(format!(
                "profile time {t} must precede the collapse at {t_bar}"
            )));
        }
        let delta = t_bar - t;
        let st = evaluate_state(pair, t, n);
        let mut max_ratio: f64 = 0.0;
        let mut min_ratio = f64::INFINITY;
        for k in 0..n {
            let r = vecn::dist(st.gamma(k), p) / delta;
            max_ratio = max_ratio.max(r);
            min_ratio = min_ratio.min(r);
        }
        out.push(ProfileRatios {
            t,
            delta,
            max_ratio,
            min_ratio,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios;

    #[test]
    fn circle_slice_is_uniformly_convex_margin_one() {
        let pair = scenarios::circle(1.0);
        let st = evaluate_state(&pair, 0.0, 256);
        let (flag, margin) = is_uniformly_convex(&st).unwrap();
        assert!(flag);
        assert!((margin - 1.0).abs() < 1e-12);
    }

    #[test]
    fn square_slice_is_not_uniformly_convex() {
        let pair = scenarios::square(1.0);
        let st = evaluate_state(&pair, 0.1, 256);
        let (flag, margin) = is_uniformly_convex(&st).unwrap();
        assert!(!flag);
        assert_eq!(margin, 0.0);
    }

    #[test]
    fn helical_slice_rejected_for_dimension() {
        let (pair, _) = scenarios::helical3d(0.6, 0.8, 5, 0.0).unwrap();
        let st = evaluate_state(&pair, 0.0, 64);
        assert!(matches!(
            is_uniformly_convex(&st),
            Err(Error::WrongDimension { .. })
        ));
    }

    #[test]
    fn ellipse_convexity_preserved() {
        let pair = scenarios::ellipse_pair(2.0, 1.0, 512).unwrap();
        let map = crate::dalembert::collapse_time_map(&pair, 128).unwrap();
        for j in 0..20 {
            let t = 0.95 * map.t_min * j as f64 / 20.0;
            let st = evaluate_state(&pair, t, 512);
            let (flag, margin) = is_uniformly_convex(&st).unwrap();
            assert!(flag, "t = {t}: margin = {margin}");
        }
    }

    #[test]
    fn circle_bodies_shrink() {
        // radii cos t: the body at t = 0.2 sits inside the body at t = 0.1
        let pair = scenarios::circle(1.0);
        let s1 = ConvexSlice::from_state(&evaluate_state(&pair, 0.2, 256)).unwrap();
        let s2 = ConvexSlice::from_state(&evaluate_state(&pair, 0.1, 256)).unwrap();
        assert!(inclusion_check(&s1, &s2).unwrap());
        assert!(!inclusion_check(&s2, &s1).unwrap());
    }

    #[test]
    fn identical_slices_include_each_other() {
        let pair = scenarios::circle(1.0);
        let s = ConvexSlice::from_state(&evaluate_state(&pair, 0.3, 128)).unwrap();
        assert!(inclusion_check(&s, &s).unwrap());
    }

    #[test]
    fn translated_slices_fail_inclusion() {
        let pair = scenarios::circle(1.0);
        let st = evaluate_state(&pair, 0.3, 128);
        let s1 = ConvexSlice::from_state(&st).unwrap();
        let mut moved = s1.clone();
        for k in 0..moved.nodes.len() / 2 {
            moved.nodes[2 * k] += 5.0;
        }
        assert!(!inclusion_check(&moved, &s1).unwrap());
    }

    #[test]
    fn ellipse_inclusion_direction_is_shrinking() {
        // zero-velocity convex data: the bodies shrink toward the collapse,
        // so K(t2) subset K(t1) for t1 <= t2 in the regular window.
        let pair = scenarios::ellipse_pair(2.0, 1.0, 512).unwrap();
        let map = crate::dalembert::collapse_time_map(&pair, 128).unwrap();
        let ts: Vec<f64> = (0..5).map(|j| 0.9 * map.t_min * j as f64 / 5.0).collect();
        for w in ts.windows(2) {
            let early = ConvexSlice::from_state(&evaluate_state(&pair, w[0], 512)).unwrap();
            let late = ConvexSlice::from_state(&evaluate_state(&pair, w[1], 512)).unwrap();
            assert!(
                inclusion_check(&late, &early).unwrap(),
                "K({}) should lie inside K({})",
                w[1],
                w[0]
            );
        }
    }

    #[test]
    fn circle_profile_ratio_is_sinc() {
        let pair = scenarios::circle(1.0);
        let e = pair.period();
        let t_bar = e / 4.0;
        let times = [t_bar - 0.1, t_bar - 0.05];
        let prof = collapse_profile(&pair, t_bar, &[0.0, 0.0], &times, 512).unwrap();
        for pr in &prof {
            // |gamma| = cos t = sin(delta), ratio = sin(delta)/delta
            let expect = pr.delta.sin() / pr.delta;
            assert!((pr.max_ratio - expect).abs() < 1e-12);
            assert!((pr.min_ratio - expect).abs() < 1e-12);
            assert!(pr.max_ratio <= 1.0 && pr.max_ratio >= 1.0 - pr.delta * pr.delta / 6.0);
        }
    }

    #[test]
    fn square_profile_keeps_ell1_spread() {
        let l = 1.0;
        let pair = scenarios::square(l);
        let t_bar = l;
        let delta = 0.05 * l;
        let prof = collapse_profile(&pair, t_bar, &[0.0, 0.0], &[t_bar - delta], 2048).unwrap();
        let spread = prof[0].spread();
        // rotated square: max/min = sqrt(2), spread = sqrt(2) - 1 > 0.4
        assert!(spread > 0.4, "square spread = {spread}");
        assert!((prof[0].max_ratio - 1.0).abs() < 2e-2);
        assert!((prof[0].min_ratio - 1.0 / 2.0f64.sqrt()).abs() < 2e-2);
    }

    #[test]
    fn no_collapse_error_when_tbar_wrong() {
        let pair = scenarios::circle(1.0);
        assert!(matches!(
            collapse_profile(&pair, 0.3, &[0.0, 0.0], &[0.1], 128),
            Err(Error::NoCollapseAtTbar { .. })
        ));
    }

    #[test]
    fn symmetric_oval_profile_deviation_shrinks_linearly_in_bound() {
        // dev(delta) <= C delta with the fitted C non-growing under
        // refinement (quadratic truth); the square grows by 2x per halving.
        let pair = scenarios::symmetric_oval_pair().unwrap();
        let e = pair.period();
        let t_bar = e / 4.0;
        let deltas = [0.04 * e, 0.02 * e, 0.01 * e];
        let times: Vec<f64> = deltas.iter().map(|d| t_bar - d).collect();
        let prof = collapse_profile(&pair, t_bar, &[0.0, 0.0], &times, 1024).unwrap();
        let mut cs = Vec::new();
        for pr in &prof {
            let dev = (pr.max_ratio - 1.0).max(1.0 - pr.min_ratio);
            cs.push(dev / pr.delta);
        }
        // non-growing within factor 2 under refinement
        assert!(cs[1] <= 2.0 * cs[0], "C values {cs:?}");
        assert!(cs[2] <= 2.0 * cs[1], "C values {cs:?}");
        // and the deviations themselves decay quadratically (order ~ 2)
        let dev: Vec<f64> = prof
            .iter()
            .map(|p| (p.max_ratio - 1.0).max(1.0 - p.min_ratio))
            .collect();
        let order = (dev[0] / dev[2]).log2() / 2.0;
        assert!(
            order > 1.2,
            "profile deviation order = {order:.2}, devs {dev:?}"
        );
    }

    #[test]
    fn symmetric_oval_collapse_time_constant() {
        let pair = scenarios::symmetric_oval_pair().unwrap();
        let map = crate::dalembert::collapse_time_map(&pair, 128).unwrap();
        let e = pair.period();
        assert!(
            map.t_max - map.t_min <= 1e-8,
            "spread = {:.3e}",
            map.t_max - map.t_min
        );
        assert!((map.t_min - e / 4.0).abs() <= 1e-8);
    }
}
