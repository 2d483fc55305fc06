use relstring::curve::arclength_reparametrize;
use relstring::scenarios;
use relstring::vecn;
use relstring::wiggly::{SmoothedCorner, SmoothingParams};

fn main() {
    // probe 1: ellipse spline node unit-speed deviation
    let e = scenarios::ellipse_curve(2.0, 1.0);
    for n in [256usize, 512, 1024] {
        let r = arclength_reparametrize(&e, n).unwrap();
        let mut dev_nodes: f64 = 0.0;
        for k in 0..n {
            let s = r.period() * k as f64 / n as f64;
            dev_nodes = dev_nodes.max((vecn::norm(&r.deriv(s)) - 1.0).abs());
        }
        let dev_mid = r.unit_speed_deviation(4 * n);
        println!("n={n}: node dev={dev_nodes:.3e} between dev={dev_mid:.3e}");
    }

    // probe 2: corner junction curvature approach
    let params = SmoothingParams::new(0.3, 0.05).unwrap();
    for &psi in &[0.7854f64, 0.15, 1.42] {
        let c = SmoothedCorner::solve(psi.cos(), psi.sin(), &params).unwrap();
        println!(
            "psi={psi}: alpha={:.3e} beta={:.3e} window={:.15}",
            c.alpha,
            c.beta,
            c.window_length()
        );
        for eps in [1e-5f64, 1e-6, 1e-7, 1e-8] {
            let k1 = c.curvature_s(0.15 - eps);
            let k2 = c.curvature_s(0.15 - 2.0 * eps);
            let j = (2.0 * k1[0] - k2[0]).hypot(2.0 * k1[1] - k2[1]);
            println!(
                "  eps={eps:.0e}: |k(eps)|={:.3e} |k(2eps)|={:.3e} extrap={j:.3e}",
                k1[0].hypot(k1[1]),
                k2[0].hypot(k2[1]),
            );
        }
        // left edge
        let k1 = c.curvature_s(-0.15 + 1e-7);
        println!("  left inside |k|={:.3e}", k1[0].hypot(k1[1]));
        // sigma inversion sanity at the right edge
        for s in [0.1499999, 0.15 - 1e-9] {
            let sg = 0.0; // placeholder
            let _ = sg;
            let p = c.eval_s(s);
            println!("  eval_s({s}) = ({:.9}, {:.9})", p[0], p[1]);
        }
    }
}
