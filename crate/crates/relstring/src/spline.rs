//! Periodic cubic spline interpolation on a uniform grid in R^n.
//!
//! Moments (nodal second derivatives) come from the cyclic tridiagonal
//! system solved with the Sherman-Morrison correction; evaluation and both
//! derivatives use the spline's own polynomial, never finite differences of
//! the samples.

/// C^2 periodic cubic spline through `n_nodes` uniform samples in R^dim.
#[derive(Debug, Clone)]
pub struct PeriodicSpline {
    period: f64,
    dim: usize,
    n_nodes: usize,
    h: f64,
    /// node values, flat layout [node * dim + d]
    values: Vec<f64>,
    /// nodal second derivatives, same layout
    moments: Vec<f64>,
}

/// Thomas solve of a tridiagonal system with constant bands (1, diag_i, 1).
fn tridiag_solve(diag: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = 1.0 / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - c[i - 1];
        c[i] = 1.0 / m;
        d[i] = (rhs[i] - d[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// Solve the cyclic system (1, 4, 1) with wrap-around corners equal to 1.
fn cyclic_solve(rhs: &[f64]) -> Vec<f64> {
    let n = rhs.len();
    if n == 1 {
        return vec![rhs[0] / 6.0];
    }
    if n == 2 {
        // rows: 4 M0 + 2 M1 = r0 ; 2 M0 + 4 M1 = r1 (wrap hits twice)
        let det = 12.0;
        return vec![
            (4.0 * rhs[0] - 2.0 * rhs[1]) / det,
            (4.0 * rhs[1] - 2.0 * rhs[0]) / det,
        ];
    }
    let gamma = -4.0;
    let mut diag = vec![4.0; n];
    diag[0] -= gamma;
    diag[n - 1] -= 1.0 / gamma;
    let y = tridiag_solve(&diag, rhs);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = 1.0;
    let z = tridiag_solve(&diag, &u);
    let vy = y[0] + y[n - 1] / gamma;
    let vz = z[0] + z[n - 1] / gamma;
    let f = vy / (1.0 + vz);
    y.iter().zip(&z).map(|(yi, zi)| yi - f * zi).collect()
}

impl PeriodicSpline {
    /// Interpolate `samples` (flat layout [node * dim + d]) on a uniform grid
    /// covering one period.
    pub fn new(samples: Vec<f64>, dim: usize, period: f64) -> Self {
        assert!(dim >= 1 && period > 0.0);
        let n_nodes = samples.len() / dim;
        assert!(n_nodes * dim == samples.len() && n_nodes >= 3);
        let h = period / n_nodes as f64;
        let mut moments = vec![0.0; samples.len()];
        let mut rhs = vec![0.0; n_nodes];
        for d in 0..dim {
            for i in 0..n_nodes {
                let im = (i + n_nodes - 1) % n_nodes;
                let ip = (i + 1) % n_nodes;
                rhs[i] = 6.0
                    * (samples[im * dim + d] - 2.0 * samples[i * dim + d]
                        + samples[ip * dim + d])
                    / (h * h);
            }
            let m = cyclic_solve(&rhs);
            for i in 0..n_nodes {
                moments[i * dim + d] = m[i];
            }
        }
        PeriodicSpline {
            period,
            dim,
            n_nodes,
            h,
            values: samples,
            moments,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn node_values(&self) -> &[f64] {
        &self.values
    }

    fn locate(&self, s: f64) -> (usize, f64) {
        let mut sr = s - self.period * (s / self.period).floor();
        if !(0.0..self.period).contains(&sr) {
            sr = 0.0;
        }
        let mut i = (sr / self.h) as usize;
        if i >= self.n_nodes {
            i = self.n_nodes - 1;
        }
        (i, sr - i as f64 * self.h)
    }

    pub fn eval(&self, s: f64, out: &mut [f64]) {
        let (i, t) = self.locate(s);
        let ip = (i + 1) % self.n_nodes;
        let h = self.h;
        for d in 0..self.dim {
            let y0 = self.values[i * self.dim + d];
            let y1 = self.values[ip * self.dim + d];
            let m0 = self.moments[i * self.dim + d];
            let m1 = self.moments[ip * self.dim + d];
            let c1 = (y1 - y0) / h - h * (2.0 * m0 + m1) / 6.0;
            out[d] = y0 + t * (c1 + t * (0.5 * m0 + t * (m1 - m0) / (6.0 * h)));
        }
    }

    pub fn deriv(&self, s: f64, out: &mut [f64]) {
        let (i, t) = self.locate(s);
        let ip = (i + 1) % self.n_nodes;
        let h = self.h;
        for d in 0..self.dim {
            let y0 = self.values[i * self.dim + d];
            let y1 = self.values[ip * self.dim + d];
            let m0 = self.moments[i * self.dim + d];
            let m1 = self.moments[ip * self.dim + d];
            let c1 = (y1 - y0) / h - h * (2.0 * m0 + m1) / 6.0;
            out[d] = c1 + t * (m0 + t * (m1 - m0) / (2.0 * h));
        }
    }

    pub fn deriv2(&self, s: f64, out: &mut [f64]) {
        let (i, t) = self.locate(s);
        let ip = (i + 1) % self.n_nodes;
        for d in 0..self.dim {
            let m0 = self.moments[i * self.dim + d];
            let m1 = self.moments[ip * self.dim + d];
            out[d] = m0 + t * (m1 - m0) / self.h;
        }
    }
}
