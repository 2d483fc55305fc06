//! Monotone one-dimensional interpolation and inversion tables.

/// Monotone cubic Hermite interpolant on strictly increasing nodes.
///
/// Slopes may be supplied exactly (e.g. from an analytic derivative) and are
/// safeguarded Fritsch-Carlson style so the interpolant stays monotone even
/// on rough data.
#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    ms: Vec<f64>,
}

impl MonotoneCubic {
    /// Build from nodes and exact slopes dy/dx at the nodes.
    pub fn with_slopes(xs: Vec<f64>, ys: Vec<f64>, mut ms: Vec<f64>) -> Self {
        assert!(xs.len() == ys.len() && ys.len() == ms.len() && xs.len() >= 2);
        // Fritsch-Carlson safeguard: clamp slopes to 3x the adjacent secants.
        let n = xs.len();
        for i in 0..n {
            let sec_l = if i > 0 {
                (ys[i] - ys[i - 1]) / (xs[i] - xs[i - 1])
            } else {
                f64::INFINITY
            };
            let sec_r = if i + 1 < n {
                (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i])
            } else {
                f64::INFINITY
            };
            let cap = 3.0 * sec_l.min(sec_r);
            if ms[i] > cap {
                ms[i] = cap;
            }
            if ms[i] < 0.0 {
                ms[i] = 0.0;
            }
        }
        MonotoneCubic { xs, ys, ms }
    }

    /// Build with Fritsch-Carlson slopes estimated from the data.
    pub fn from_data(xs: Vec<f64>, ys: Vec<f64>) -> Self {
        let n = xs.len();
        let mut ms = vec![0.0; n];
        let sec =
            |i: usize| -> f64 { (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]) };
        for i in 0..n {
            ms[i] = if i == 0 {
                sec(0)
            } else if i == n - 1 {
                sec(n - 2)
            } else {
                let (a, b) = (sec(i - 1), sec(i));
                if a * b <= 0.0 {
                    0.0
                } else {
                    // harmonic mean keeps monotonicity
                    2.0 * a * b / (a + b)
                }
            };
        }
        Self::with_slopes(xs, ys, ms)
    }

    fn segment(&self, x: f64) -> usize {
        match self
            .xs
            .binary_search_by(|v| v.partial_cmp(&x).unwrap())
        {
            Ok(i) => i.min(self.xs.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.xs.len() - 2),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.ys[i] + h10 * h * self.ms[i] + h01 * self.ys[i + 1] + h11 * h * self.ms[i + 1]
    }
}

/// Cumulative-integral inversion table: given a positive weight w on [0, L],
/// stores s(x) = int_0^x w and inverts it with a monotone Hermite interpolant
/// whose slopes dx/ds = 1/w are exact at the nodes.
#[derive(Debug, Clone)]
pub struct InversionTable {
    /// fine parameter grid x_j (uniform on [0, L])
    xs: Vec<f64>,
    /// cumulative integral s_j = s(x_j), strictly increasing
    ss: Vec<f64>,
    inv: MonotoneCubic,
    total: f64,
    domain: f64,
}

impl InversionTable {
    /// Build from `m` fine intervals over [0, L] with weight function `w`.
    pub fn build<F: FnMut(f64) -> f64>(domain: f64, m: usize, mut w: F) -> Self {
        let h = domain / m as f64;
        let ss = crate::quad::cumulative_simpson(0.0, h, m, &mut w);
        let xs: Vec<f64> = (0..=m).map(|j| j as f64 * h).collect();
        let slopes: Vec<f64> = xs.iter().map(|&x| 1.0 / w(x)).collect();
        let total = *ss.last().unwrap();
        let inv = MonotoneCubic::with_slopes(ss.clone(), xs.clone(), slopes);
        InversionTable {
            xs,
            ss,
            inv,
            total,
            domain,
        }
    }

    /// Total integral over one period.
    pub fn total(&self) -> f64 {
        self.total
    }

    /// Forward map s(x) by Hermite interpolation of the cumulative table.
    pub fn forward(&self, x: f64) -> f64 {
        // periodic unrolling: s(x + L) = s(x) + total
        let k = (x / self.domain).floor();
        let xr = x - k * self.domain;
        let i = match self
            .xs
            .binary_search_by(|v| v.partial_cmp(&xr).unwrap())
        {
            Ok(i) => i.min(self.xs.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.xs.len() - 2),
        };
        let h = self.xs[i + 1] - self.xs[i];
        let t = (xr - self.xs[i]) / h;
        let (s0, s1) = (self.ss[i], self.ss[i + 1]);
        // Hermite with exact slopes w(x) would need w; linear blend of the
        // dense table is enough for the forward direction (only used for
        // diagnostics); the inverse direction carries the accuracy burden.
        let v = s0 + t * (s1 - s0);
        v + k * self.total
    }

    /// Inverse map x(s), periodically unrolled: x(s + total) = x(s) + L.
    pub fn invert(&self, s: f64) -> f64 {
        let k = (s / self.total).floor();
        let sr = s - k * self.total;
        self.inv.eval(sr) + k * self.domain
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn inverts_identity_weight_exactly() {
        let t = InversionTable::build(2.0 * PI, 64, |_| 1.0);
        assert!((t.total() - 2.0 * PI).abs() < 1e-14);
        for s in [0.0, 0.4, 3.3, 6.2] {
            assert!((t.invert(s) - s).abs() < 1e-13);
        }
    }

    #[test]
    fn inverts_smooth_weight_to_high_order() {
        // w(x) = 1 + 0.5 sin x, s(x) = x - 0.5 cos x + 0.5
        let t = InversionTable::build(2.0 * PI, 512, |x| 1.0 + 0.5 * x.sin());
        let s_exact = |x: f64| x - 0.5 * x.cos() + 0.5;
        for x in [0.3, 1.7, 4.0, 5.9] {
            let x_rec = t.invert(s_exact(x));
            assert!(
                (x_rec - x).abs() < 1e-9,
                "x = {x}, recovered = {x_rec}"
            );
        }
    }

    #[test]
    fn unrolls_periodically() {
        let t = InversionTable::build(1.0, 64, |x| 1.5 + x.powi(0) * 0.0 + 0.3 * (2.0 * PI * x).cos());
        let s1 = t.forward(0.25);
        let s2 = t.forward(1.25);
        assert!((s2 - s1 - t.total()).abs() < 1e-12);
        let x = t.invert(s1 + 2.0 * t.total());
        assert!((x - 2.25).abs() < 1e-9);
    }

    #[test]
    fn monotone_cubic_reproduces_linear_data() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x + 1.0).collect();
        let m = MonotoneCubic::from_data(xs, ys);
        assert!((m.eval(4.37) - (2.0 * 4.37 + 1.0)).abs() < 1e-13);
    }
}
