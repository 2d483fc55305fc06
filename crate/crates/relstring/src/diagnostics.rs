//! Scalar and field diagnostics of the string evolution: the area Lagrangian,
//! the Minkowski area, the conserved energy and its image form, the gauge
//! constraint residuals, the Euler-Lagrange residuals, the geometric fields
//! kappa / v / a with the geometric law a = (1 - |v|^2) kappa, and the
//! phi-weighted sectional identity for sub-unit wave solutions.

use crate::dalembert::{evaluate_state, ConstraintMode, DAlembertPair, StringState};
use crate::error::{Error, Result};
use crate::quad;
use crate::vecn;

/// Nodes with |gamma_x| below this are treated as degenerate in the energy
/// integrand (the square's collapsed intervals have a genuine 0/0 limit
/// there, and the limit along the evolution is 0).
const DEGENERATE_SPEED: f64 = 1e-12;

/// Area Lagrangian l(xi, eta) = sqrt(<xi,eta>^2 + |eta|^2 (1 - |xi|^2)),
/// defined where <xi,eta>^2 >= |eta|^2(|xi|^2 - 1).
pub fn lagrangian(xi: &[f64], eta: &[f64]) -> Result<f64> {
    let d = vecn::dot(xi, eta);
    let disc = d * d + vecn::dot(eta, eta) * (1.0 - vecn::dot(xi, xi));
    if disc < -1e-12 {
        return Err(Error::OutsideDomain { discriminant: disc });
    }
    Ok(disc.max(0.0).sqrt())
}

/// Lagrangian of a slice node, using the orthogonal-gauge reduction
/// |gamma_x| sqrt(1 - |gamma_t|^2) for unit-speed pairs and the general
/// formula otherwise.
fn node_lagrangian(state: &StringState, k: usize, mode: ConstraintMode) -> Result<f64> {
    let gt = state.gamma_t(k);
    let gx = state.gamma_x(k);
    match mode {
        ConstraintMode::UnitSpeed => {
            let nx = vecn::norm(gx);
            let m2 = (1.0 - vecn::dot(gt, gt)).max(0.0);
            Ok(nx * m2.sqrt())
        }
        ConstraintMode::SubUnit => lagrangian(gt, gx),
    }
}

/// Minkowski area of the evolved map over [t0, t1] x [0, E]: composite
/// trapezoid on the periodic space direction, composite Simpson in time.
pub fn minkowski_area(
    pair: &DAlembertPair,
    t0: f64,
    t1: f64,
    n: usize,
    m: usize,
) -> Result<f64> {
    if t1 < t0 {
        return Err(Error::Config("minkowski_area needs t0 <= t1".into()));
    }
    if t1 == t0 {
        return Ok(0.0);
    }
    let h = pair.period() / n as f64;
    let mut err = None;
    let v = quad::simpson(t0, t1, m.max(2), |t| {
        let st = evaluate_state(pair, t, n);
        let mut acc = 0.0;
        for k in 0..n {
            match node_lagrangian(&st, k, pair.mode()) {
                Ok(l) => acc += l,
                Err(e) => err = Some(e),
            }
        }
        acc * h
    });
    match err {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

/// Slice integral of the area density l(gamma_t, gamma_x) dx.
pub fn area_density_integral(state: &StringState, mode: ConstraintMode) -> Result<f64> {
    let n = state.n_nodes();
    let h = state.grid_spacing();
    let mut acc = 0.0;
    for k in 0..n {
        acc += node_lagrangian(state, k, mode)?;
    }
    Ok(acc * h)
}

/// Conserved energy int |gamma_x|^2 / l(gamma_t, gamma_x) dx, computed in
/// the extended sense: the integrand equals |gamma_x| / sqrt(1 - |v_perp|^2)
/// and is set to 0 on degenerate nodes (|gamma_x| < 1e-12).
pub fn conserved_energy(state: &StringState) -> f64 {
    let n = state.n_nodes();
    let h = state.grid_spacing();
    let samples: Vec<f64> = (0..n)
        .map(|k| {
            let gx = state.gamma_x(k);
            let nx = vecn::norm(gx);
            if nx < DEGENERATE_SPEED {
                return 0.0;
            }
            let gt = state.gamma_t(k);
            let tan = vecn::dot(gt, gx) / nx;
            let vperp2 = vecn::dot(gt, gt) - tan * tan;
            let denom2 = (1.0 - vperp2).max(0.0);
            if denom2 == 0.0 {
                return 0.0;
            }
            nx / denom2.sqrt()
        })
        .collect();
    quad::trapezoid_periodic(&samples, h)
}

/// Nodewise maxima of the two gauge-constraint violations
/// (|<gamma_t, gamma_x>|, | |gamma_t|^2 + |gamma_x|^2 - 1 |).
pub fn constraint_residuals(state: &StringState) -> (f64, f64) {
    let mut orth: f64 = 0.0;
    let mut norm: f64 = 0.0;
    for k in 0..state.n_nodes() {
        let gt = state.gamma_t(k);
        let gx = state.gamma_x(k);
        orth = orth.max(vecn::dot(gt, gx).abs());
        norm = norm.max((vecn::dot(gt, gt) + vecn::dot(gx, gx) - 1.0).abs());
    }
    (orth, norm)
}

/// Per-node curvature vector, normal velocity and normal acceleration.
#[derive(Debug, Clone)]
pub struct GeometryFields {
    dim: usize,
    pub kappa: Vec<f64>,
    pub velocity: Vec<f64>,
    pub accel: Vec<f64>,
}

impl GeometryFields {
    pub fn kappa(&self, k: usize) -> &[f64] {
        &self.kappa[k * self.dim..(k + 1) * self.dim]
    }
    pub fn velocity(&self, k: usize) -> &[f64] {
        &self.velocity[k * self.dim..(k + 1) * self.dim]
    }
    pub fn accel(&self, k: usize) -> &[f64] {
        &self.accel[k * self.dim..(k + 1) * self.dim]
    }
    pub fn n_nodes(&self) -> usize {
        self.kappa.len() / self.dim
    }
}

/// kappa = gamma_xx^perp / |gamma_x|^2, v = gamma_t^perp, and the normal
/// acceleration including the mixed transport terms:
///
///   a = gamma_tt^perp - 2 <gamma_t, tau> gamma_tx^perp / |gamma_x|
///       + <gamma_t, tau>^2 gamma_xx^perp / |gamma_x|^2,
///
/// with gamma_tt = gamma_xx (states always come from wave solutions). In
/// orthogonal gauge the mixed terms vanish and a reduces to gamma_tt^perp.
/// The + sign on the quadratic term is forced by the material-derivative
/// computation (v_t - <gamma_t,tau> v_x / |gamma_x|)^perp and is the one for
/// which critical points satisfy a = (1 - |v|^2) kappa in any
/// parametrization.
pub fn geometry(state: &StringState) -> Result<GeometryFields> {
    let dim = state.dim();
    let n = state.n_nodes();
    let mut kappa = vec![0.0; n * dim];
    let mut velocity = vec![0.0; n * dim];
    let mut accel = vec![0.0; n * dim];
    for k in 0..n {
        let gx = state.gamma_x(k);
        let nx = vecn::norm(gx);
        if nx <= 1e-10 {
            return Err(Error::NonRegularCurve {
                min_speed: nx,
                threshold: 1e-10,
            });
        }
        let tau: Vec<f64> = gx.iter().map(|v| v / nx).collect();
        let gxxp = vecn::perp(state.gamma_xx(k), &tau);
        let gttp = vecn::perp(state.gamma_tt(k), &tau);
        let gtxp = vecn::perp(state.gamma_tx(k), &tau);
        let vp = vecn::perp(state.gamma_t(k), &tau);
        let m = vecn::dot(state.gamma_t(k), &tau);
        for d in 0..dim {
            kappa[k * dim + d] = gxxp[d] / (nx * nx);
            velocity[k * dim + d] = vp[d];
            accel[k * dim + d] =
                gttp[d] - 2.0 * m * gtxp[d] / nx + m * m * gxxp[d] / (nx * nx);
        }
    }
    Ok(GeometryFields {
        dim,
        kappa,
        velocity,
        accel,
    })
}

/// Max nodewise |a - (1 - |v|^2) kappa|.
pub fn geometric_residual(state: &StringState) -> Result<f64> {
    let g = geometry(state)?;
    let mut r: f64 = 0.0;
    for k in 0..g.n_nodes() {
        let v2 = vecn::dot(g.velocity(k), g.velocity(k));
        let mut node: f64 = 0.0;
        for d in 0..state.dim() {
            node += (g.accel(k)[d] - (1.0 - v2) * g.kappa(k)[d]).powi(2);
        }
        r = r.max(node.sqrt());
    }
    Ok(r)
}

/// Residuals of the scalar conservation equation
/// -(|gamma_x|^2 / l)_t + (<gamma_t, gamma_x>/l)_x = 0 and of the vector
/// Euler-Lagrange equation, with time/space derivatives of the composite
/// quantities by central differences at steps (dt, h) = (E/4N, E/N).
pub fn el_residual(pair: &DAlembertPair, t: f64, n: usize) -> Result<(f64, f64)> {
    let e = pair.period();
    let h = e / n as f64;
    let dt = e / (4.0 * n as f64);
    let st = evaluate_state(pair, t, n);
    let stp = evaluate_state(pair, t + dt, n);
    let stm = evaluate_state(pair, t - dt, n);

    let check = |s: &StringState| -> Result<()> {
        let mn = s.min_speed();
        if mn <= 1e-10 {
            return Err(Error::NonRegularCurve {
                min_speed: mn,
                threshold: 1e-10,
            });
        }
        let mv = s.max_velocity();
        if mv >= 1.0 {
            return Err(Error::NotStrictlyAdmissible { max_vperp: mv });
        }
        Ok(())
    };
    check(&st)?;
    check(&stp)?;
    check(&stm)?;

    let f_of = |s: &StringState, k: usize| -> Result<f64> {
        let gx = s.gamma_x(k);
        Ok(vecn::dot(gx, gx) / lagrangian(s.gamma_t(k), gx)?)
    };
    let g_of = |s: &StringState, k: usize| -> Result<f64> {
        let gx = s.gamma_x(k);
        Ok(vecn::dot(s.gamma_t(k), gx) / lagrangian(s.gamma_t(k), gx)?)
    };
    // (|gamma_t|^2 - 1)/l, the coefficient differentiated in x in the vector eq
    let w_of = |s: &StringState, k: usize| -> Result<f64> {
        let gt = s.gamma_t(k);
        Ok((vecn::dot(gt, gt) - 1.0) / lagrangian(gt, s.gamma_x(k))?)
    };

    let dim = pair.dim();
    let mut scalar_res: f64 = 0.0;
    let mut vector_res: f64 = 0.0;
    for k in 0..n {
        let kp = (k + 1) % n;
        let km = (k + n - 1) % n;
        let ft = (f_of(&stp, k)? - f_of(&stm, k)?) / (2.0 * dt);
        let gx_fd = (g_of(&st, kp)? - g_of(&st, km)?) / (2.0 * h);
        scalar_res = scalar_res.max((-ft + gx_fd).abs());

        let gt = st.gamma_t(k);
        let gx = st.gamma_x(k);
        let l = lagrangian(gt, gx)?;
        let nx2 = vecn::dot(gx, gx);
        let gt2 = vecn::dot(gt, gt);
        let dot = vecn::dot(gt, gx);
        // gamma_tt = gamma_xx for wave solutions
        let wx = (w_of(&st, kp)? - w_of(&st, km)?) / (2.0 * h);
        let gt_fd = (g_of(&stp, k)? - g_of(&stm, k)?) / (2.0 * dt);
        let coeff = wx - gt_fd;
        let mut node = 0.0;
        for d in 0..dim {
            let r = (nx2 * st.gamma_tt(k)[d] + (gt2 - 1.0) * st.gamma_xx(k)[d]
                - 2.0 * dot * st.gamma_tx(k)[d])
                / l
                + coeff * gx[d];
            node += r * r;
        }
        vector_res = vector_res.max(node.sqrt());
    }
    Ok((scalar_res, vector_res))
}

/// phi = |gamma_x| / sqrt(1 - |gamma_t|^2) nodewise, plus the max residual of
/// the sectional identity
///
///   -a + (1-|v|^2) kappa = ((1-phi^2)/(1+phi^2)) (a + (1-|v|^2) kappa),
///
/// which holds for wave solutions whose pair satisfies |a'| = |b'| <= 1.
pub fn phi_sectional_check(state: &StringState) -> Result<(Vec<f64>, f64)> {
    let n = state.n_nodes();
    let mut phi = Vec::with_capacity(n);
    for k in 0..n {
        let vt = vecn::norm(state.gamma_t(k));
        if vt >= 1.0 {
            return Err(Error::NotStrictlyAdmissible { max_vperp: vt });
        }
        phi.push(vecn::norm(state.gamma_x(k)) / (1.0 - vt * vt).sqrt());
    }
    let g = geometry(state)?;
    let mut res: f64 = 0.0;
    for k in 0..n {
        let v2 = vecn::dot(g.velocity(k), g.velocity(k));
        let psi = (1.0 - phi[k] * phi[k]) / (1.0 + phi[k] * phi[k]);
        let mut node = 0.0;
        for d in 0..state.dim() {
            let lhs = -g.accel(k)[d] + (1.0 - v2) * g.kappa(k)[d];
            let rhs = psi * (g.accel(k)[d] + (1.0 - v2) * g.kappa(k)[d]);
            node += (lhs - rhs).powi(2);
        }
        res = res.max(node.sqrt());
    }
    Ok((phi, res))
}

/// Per-slice diagnostic scalars; one CSV row in the frame output.
#[derive(Debug, Clone, serde::Serialize)]
pub struct DiagnosticsReport {
    pub t: f64,
    pub conserved_energy: f64,
    pub area_density_integral: f64,
    pub max_orthogonality_residual: f64,
    pub max_unitnorm_residual: f64,
    pub max_el_residual: f64,
    pub max_geometric_residual: f64,
    pub min_speed: f64,
    pub max_normal_velocity: f64,
}

impl DiagnosticsReport {
    pub const CSV_HEADER: &'static str = "t,conserved_energy,area_density_integral,max_orthogonality_residual,max_unitnorm_residual,max_el_residual,max_geometric_residual,min_speed,max_normal_velocity";

    /// Compute the full report for a slice. Residuals needing regular,
    /// strictly admissible data are reported as NaN on slices that fail
    /// those preconditions (the square's degenerate phase, for instance).
    pub fn compute(pair: &DAlembertPair, t: f64, n: usize) -> Self {
        let st = evaluate_state(pair, t, n);
        let (orth, norm) = constraint_residuals(&st);
        let energy = conserved_energy(&st);
        let area = area_density_integral(&st, pair.mode()).unwrap_or(f64::NAN);
        let min_speed = st.min_speed();
        let max_nv = (0..n)
            .map(|k| {
                let gx = st.gamma_x(k);
                let gt = st.gamma_t(k);
                let nx = vecn::norm(gx);
                if nx < DEGENERATE_SPEED {
                    vecn::norm(gt)
                } else {
                    let tan = vecn::dot(gt, gx) / nx;
                    (vecn::dot(gt, gt) - tan * tan).max(0.0).sqrt()
                }
            })
            .fold(0.0, f64::max);
        let geom = geometric_residual(&st).unwrap_or(f64::NAN);
        let el = el_residual(pair, t, n)
            .map(|(s, v)| s.max(v))
            .unwrap_or(f64::NAN);
        DiagnosticsReport {
            t,
            conserved_energy: energy,
            area_density_integral: area,
            max_orthogonality_residual: orth,
            max_unitnorm_residual: norm,
            max_el_residual: el,
            max_geometric_residual: geom,
            min_speed,
            max_normal_velocity: max_nv,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    #[test]
    fn lagrangian_basic_values() {
        assert!((lagrangian(&[0.0, 0.0], &[1.0, 0.0]).unwrap() - 1.0).abs() < 1e-15);
        // xi perp eta with |xi|^2 + |eta|^2 = 1 gives l = |eta|^2
        let l = lagrangian(&[0.6, 0.0], &[0.0, 0.8]).unwrap();
        assert!((l - 0.64).abs() < 1e-15);
        assert!(matches!(
            lagrangian(&[2.0, 0.0], &[0.0, 1.0]),
            Err(Error::OutsideDomain { .. })
        ));
    }

    #[test]
    fn lagrangian_positive_homogeneity() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let xi = [rng.gen_range(-0.7..0.7), rng.gen_range(-0.7..0.7)];
            let eta = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let alpha: f64 = rng.gen_range(-3.0..3.0);
            let l = lagrangian(&xi, &eta).unwrap();
            let la = lagrangian(&xi, &vecn::scale(&eta, alpha)).unwrap();
            assert!((la - alpha.abs() * l).abs() <= 1e-12);
        }
    }

    #[test]
    fn circle_area_quarter_period() {
        // l = cos^2 t, area over [0, pi/2] x [0, 2 pi] = pi^2 / 2
        let pair = scenarios::circle(1.0);
        let a = minkowski_area(&pair, 0.0, PI / 2.0, 256, 64).unwrap();
        assert!(
            (a - 4.934802200544679).abs() < 1e-6,
            "area = {a}, expected pi^2/2"
        );
        assert_eq!(minkowski_area(&pair, 0.3, 0.3, 64, 8).unwrap(), 0.0);
    }

    #[test]
    fn cylinder_static_limit_area_closed_form() {
        // pair (2A(s/2), 0) evolves to A((x+t)/2): l = 1/2, area = (t1-t0) L
        let a_curve = crate::curve::circle_loop(1.0);
        let l_len = 2.0 * PI;
        let a = crate::scenarios::static_limit_pair(&a_curve).unwrap();
        let area = minkowski_area(&a, 0.0, 1.0, 256, 64).unwrap();
        assert!(
            (area - l_len).abs() < 1e-6,
            "area = {area}, expected {l_len}"
        );
    }

    #[test]
    fn reparametrization_invariance_of_area() {
        // gamma~(t,x) = gamma(t, phi(t,x)) has the same area; derivatives via
        // chain rule from the exact pair derivatives.
        let pair = scenarios::circle(1.0);
        let e = pair.period();
        let (t0, t1) = (0.1, 0.9);
        let direct = minkowski_area(&pair, t0, t1, 256, 64).unwrap();
        let n = 256;
        let m = 64;
        let h = e / n as f64;
        let phi = |t: f64, x: f64| x + 0.1 * (2.0 * PI * x / e).sin() * (1.0 + 0.3 * t.cos());
        let phi_x = |t: f64, x: f64| {
            1.0 + 0.1 * (2.0 * PI / e) * (2.0 * PI * x / e).cos() * (1.0 + 0.3 * t.cos())
        };
        let phi_t = |t: f64, x: f64| -0.1 * (2.0 * PI * x / e).sin() * 0.3 * t.sin();
        let reparam = crate::quad::simpson(t0, t1, m, |t| {
            let mut acc = 0.0;
            for k in 0..n {
                let x = h * k as f64;
                let y = phi(t, x);
                let ga = pair.a().deriv(y + t);
                let gb = pair.b().deriv(y - t);
                let gt: Vec<f64> = (0..2).map(|d| 0.5 * (ga[d] - gb[d])).collect();
                let gx: Vec<f64> = (0..2).map(|d| 0.5 * (ga[d] + gb[d])).collect();
                let gt_new = vecn::axpy(&gt, phi_t(t, x), &gx);
                let gx_new = vecn::scale(&gx, phi_x(t, x));
                acc += lagrangian(&gt_new, &gx_new).unwrap();
            }
            acc * h
        });
        assert!(
            (direct - reparam).abs() < 1e-6,
            "direct = {direct}, reparametrized = {reparam}"
        );
    }

    #[test]
    fn circle_energy_equals_period() {
        let pair = scenarios::circle(1.0);
        for &t in &[0.1, 0.5, 1.2] {
            let st = evaluate_state(&pair, t, 512);
            assert!((conserved_energy(&st) - 2.0 * PI).abs() < 1e-12);
        }
    }

    #[test]
    fn square_energy_plateau_and_decay() {
        let l = 1.0;
        let pair = scenarios::square(l);
        // phase (ii): energy = 4L exactly for t in [0, L/2)
        for j in 0..20 {
            let t = 0.5 * l * j as f64 / 20.0;
            let st = evaluate_state(&pair, t, 512);
            assert!(
                (conserved_energy(&st) - 4.0 * l).abs() <= 1e-12,
                "t = {t}: energy = {}",
                conserved_energy(&st)
            );
        }
        // phase (iii): energy = 8(L - t), nonincreasing on [L/2, L)
        let mut prev = f64::INFINITY;
        for j in 0..20 {
            let t = 0.5 * l + 0.5 * l * j as f64 / 20.0;
            let st = evaluate_state(&pair, t, 512);
            let en = conserved_energy(&st);
            let h = 4.0 * l / 512.0;
            assert!(
                (en - 8.0 * (l - t)).abs() <= 8.0 * 2.0 * h + 1e-12,
                "t = {t}: energy = {en}, closed form = {}",
                8.0 * (l - t)
            );
            assert!(en <= prev + 1e-12, "energy must be nonincreasing");
            prev = en;
        }
        // spot value from the spec'd closed form: t = 3L/4 gives 2L
        let st = evaluate_state(&pair, 0.75 * l, 512);
        let h = 4.0 * l / 512.0;
        assert!((conserved_energy(&st) - 2.0 * l).abs() <= 16.0 * h);
    }

    #[test]
    fn constraint_residuals_detect_scaling() {
        let pair = scenarios::circle(1.0);
        let st = evaluate_state(&pair, 0.3, 256);
        let (orth, norm) = constraint_residuals(&st);
        assert!(orth < 1e-12 && norm < 1e-12);
        // deliberately scaled data: 1.1 * circle gives norm residual 0.21
        let n = 256;
        let mut gamma = vec![0.0; 2 * n];
        let mut gt = vec![0.0; 2 * n];
        let mut gx = vec![0.0; 2 * n];
        for k in 0..n {
            let s = 2.0 * PI * k as f64 / n as f64;
            gamma[2 * k] = 1.1 * s.cos();
            gamma[2 * k + 1] = 1.1 * s.sin();
            gx[2 * k] = -1.1 * s.sin();
            gx[2 * k + 1] = 1.1 * s.cos();
            gt[2 * k] = 0.0;
            gt[2 * k + 1] = 0.0;
        }
        let st2 = StringState::from_samples(0.0, 2.0 * PI, 2, gamma, gt, gx);
        let (_, norm2) = constraint_residuals(&st2);
        assert!((norm2 - 0.21).abs() < 1e-10);
    }

    #[test]
    fn subunit_limit_violates_pointwise_constraint() {
        let (_, limit) = scenarios::neu(5);
        let st = evaluate_state(&limit, 0.3, 512);
        let (_, norm) = constraint_residuals(&st);
        assert!(norm > 0.01, "norm residual = {norm} should be positive");
    }

    #[test]
    fn circle_geometry_fields() {
        let pair = scenarios::circle(1.0);
        // t = 0: |kappa| = 1, v = 0, a = -(cos x, sin x)
        let st = evaluate_state(&pair, 0.0, 128);
        let g = geometry(&st).unwrap();
        for k in 0..128 {
            let x = 2.0 * PI * k as f64 / 128.0;
            assert!((vecn::norm(g.kappa(k)) - 1.0).abs() < 1e-12);
            assert!(vecn::norm(g.velocity(k)) < 1e-12);
            assert!(vecn::dist(g.accel(k), &[-x.cos(), -x.sin()]) < 1e-12);
        }
        // general t: |v| = sin t, |kappa| = 1/cos t, (1-|v|^2)|kappa| = |a|
        let t = 0.6;
        let st = evaluate_state(&pair, t, 128);
        let g = geometry(&st).unwrap();
        for k in 0..128 {
            assert!((vecn::norm(g.velocity(k)) - t.sin().abs()).abs() < 1e-12);
            assert!((vecn::norm(g.kappa(k)) - 1.0 / t.cos()).abs() < 1e-10);
            assert!((vecn::norm(g.accel(k)) - t.cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn geometry_fields_are_normal() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let pair = scenarios::circle(1.0);
        for _ in 0..5 {
            let t: f64 = rng.gen_range(0.0..1.2);
            let st = evaluate_state(&pair, t, 64);
            let g = geometry(&st).unwrap();
            for k in 0..64 {
                let gx = st.gamma_x(k);
                let nx = vecn::norm(gx);
                assert!(vecn::dot(g.kappa(k), gx).abs() / nx < 1e-8);
                assert!(vecn::dot(g.velocity(k), gx).abs() / nx < 1e-8);
                assert!(vecn::dot(g.accel(k), gx).abs() / nx < 1e-8);
            }
        }
    }

    #[test]
    fn square_flat_sides_have_zero_curvature() {
        let pair = scenarios::square(1.0);
        let st = evaluate_state(&pair, 0.25, 512);
        let g = geometry(&st).unwrap();
        // all second derivatives vanish for piecewise-linear data
        for k in 0..512 {
            assert_eq!(vecn::norm(g.kappa(k)), 0.0);
        }
    }

    #[test]
    fn circle_geometric_residual_tiny() {
        let pair = scenarios::circle(1.0);
        let st = evaluate_state(&pair, 0.7, 256);
        assert!(geometric_residual(&st).unwrap() <= 1e-10);
    }

    #[test]
    fn geometric_law_holds_in_sheared_parametrization() {
        // the geometric law is parametrization-independent; the sheared
        // circle has <gamma_t, gamma_x> != 0 and exercises the mixed
        // acceleration terms (including the sign of the quadratic one).
        let eps = 0.25;
        let e = 2.0 * PI;
        let n = 1024;
        let t = 0.4;
        let mut gamma = vec![0.0; 2 * n];
        let mut gt = vec![0.0; 2 * n];
        let mut gx = vec![0.0; 2 * n];
        let mut gtt = vec![0.0; 2 * n];
        for k in 0..n {
            let x0 = e * k as f64 / n as f64;
            let y = x0 + eps * t;
            let (ct, st_) = (t.cos(), t.sin());
            // base solution gamma(t,y) = u(y) cos t and its derivatives
            let u = [y.cos(), y.sin()];
            let up = [-y.sin(), y.cos()];
            gamma[2 * k] = u[0] * ct;
            gamma[2 * k + 1] = u[1] * ct;
            // sheared map g(t,x) = gamma(t, x + eps t)
            gt[2 * k] = -u[0] * st_ + eps * up[0] * ct;
            gt[2 * k + 1] = -u[1] * st_ + eps * up[1] * ct;
            gx[2 * k] = up[0] * ct;
            gx[2 * k + 1] = up[1] * ct;
            // g_tt = gamma_tt + 2 eps gamma_ty + eps^2 gamma_yy
            gtt[2 * k] = -u[0] * ct - 2.0 * eps * up[0] * st_ - eps * eps * u[0] * ct;
            gtt[2 * k + 1] = -u[1] * ct - 2.0 * eps * up[1] * st_ - eps * eps * u[1] * ct;
        }
        let st = StringState::from_samples(t, e, 2, gamma, gt, gx).with_gamma_tt(gtt);
        let r = geometric_residual(&st).unwrap();
        assert!(r <= 1e-5, "sheared-parametrization residual = {r:.3e}");
    }

    #[test]
    fn subunit_limit_geometric_residual_positive() {
        let (_, limit) = scenarios::neu(5);
        let st = evaluate_state(&limit, 0.3, 512);
        assert!(geometric_residual(&st).unwrap() > 0.01);
    }

    #[test]
    fn circle_el_residual_tiny() {
        let pair = scenarios::circle(1.0);
        let (s, v) = el_residual(&pair, 0.5, 256).unwrap();
        assert!(s <= 1e-6 && v <= 1e-6, "scalar {s:.3e} vector {v:.3e}");
    }

    #[test]
    fn neu_limit_el_residual_positive() {
        let (_, limit) = scenarios::neu(5);
        let (_, v) = el_residual(&limit, 0.3, 512).unwrap();
        assert!(v > 0.01, "vector EL residual = {v}");
    }

    #[test]
    fn ellipse_el_residual_order_two() {
        let pair = scenarios::ellipse_pair(2.0, 1.0, 512).unwrap();
        let map = crate::dalembert::collapse_time_map(&pair, 128).unwrap();
        let t = 0.2 * map.t_min;
        let mut rs = Vec::new();
        for n in [512usize, 1024, 2048] {
            let pair_n = scenarios::ellipse_pair(2.0, 1.0, n).unwrap();
            let (s, v) = el_residual(&pair_n, t, n).unwrap();
            rs.push(s.max(v));
        }
        // spline-backed pairs: residual decays at order >= 2 overall
        let order = (rs[0] / rs[2]).log2() / 2.0;
        assert!(order >= 2.0, "el residuals {rs:?}, order = {order:.2}");
    }

    #[test]
    fn phi_identity_unit_speed_pair() {
        let pair = scenarios::circle(1.0);
        let st = evaluate_state(&pair, 0.4, 256);
        let (phi, res) = phi_sectional_check(&st).unwrap();
        for p in &phi {
            assert!((p - 1.0).abs() < 1e-12);
        }
        assert!(res <= 1e-8);
    }

    #[test]
    fn phi_identity_equal_subunit_pair() {
        // |a'| = |b'| = 0.8: the identity holds at machine precision
        let pair = scenarios::scaled_circle_pair(0.8).unwrap();
        let st = evaluate_state(&pair, 0.3, 512);
        let (phi, res) = phi_sectional_check(&st).unwrap();
        assert!(phi.iter().any(|p| (p - 1.0).abs() > 0.05));
        assert!(res <= 1e-10, "residual = {res:.3e}");
        let st = evaluate_state(&pair, 1.1, 512);
        let (_, res) = phi_sectional_check(&st).unwrap();
        assert!(res <= 1e-10, "residual = {res:.3e}");
    }

    #[test]
    fn phi_identity_needs_equal_speeds() {
        // the Neu limit has |a'| = 1 != |b'| = 1/alpha: the identity's
        // precondition fails and the residual is genuinely nonzero.
        let (_, limit) = scenarios::neu(5);
        let st = evaluate_state(&limit, 0.3, 1024);
        let (_, res) = phi_sectional_check(&st).unwrap();
        assert!(
            res > 1e-4,
            "identity should not hold for unequal speeds: {res:.3e}"
        );
    }

    #[test]
    fn energy_drift_analytic_tiny() {
        let pair = scenarios::circle(1.0);
        let map = crate::dalembert::collapse_time_map(&pair, 64).unwrap();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for j in 0..50 {
            let t = 0.9 * map.t_min * j as f64 / 49.0;
            let en = conserved_energy(&evaluate_state(&pair, t, 512));
            lo = lo.min(en);
            hi = hi.max(en);
        }
        assert!((hi - lo) / hi <= 1e-10, "drift = {:.3e}", (hi - lo) / hi);
    }
}
