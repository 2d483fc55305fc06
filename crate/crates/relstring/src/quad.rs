//! Quadrature rules used across the crate.
//!
//! Periodic integrands use the composite trapezoid rule (spectrally accurate
//! for smooth periodic data); cumulative integrals use per-interval Simpson
//! with midpoints; localized smooth integrals use 16-point Gauss-Legendre.

/// Composite trapezoid over one period of a periodic integrand sampled at
/// `n` uniform nodes with spacing `h` (node n coincides with node 0).
pub fn trapezoid_periodic(samples: &[f64], h: f64) -> f64 {
    samples.iter().sum::<f64>() * h
}

/// Composite Simpson over [a, b] with `m` intervals (rounded up to even).
pub fn simpson<F: FnMut(f64) -> f64>(a: f64, b: f64, m: usize, mut f: F) -> f64 {
    if b == a {
        return 0.0;
    }
    let m = if m % 2 == 0 { m.max(2) } else { m + 1 };
    let h = (b - a) / m as f64;
    let mut acc = f(a) + f(b);
    for j in 1..m {
        let w = if j % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + j as f64 * h);
    }
    acc * h / 3.0
}

/// Cumulative integral of `f` on the uniform grid a + j*h, j = 0..=m, using
/// per-interval Simpson with midpoint evaluations. Returns m+1 values with
/// out[0] = 0. Fourth-order accurate and monotone for positive integrands.
pub fn cumulative_simpson<F: FnMut(f64) -> f64>(a: f64, h: f64, m: usize, mut f: F) -> Vec<f64> {
    let mut out = Vec::with_capacity(m + 1);
    out.push(0.0);
    let mut acc = 0.0;
    let mut left = f(a);
    for j in 0..m {
        let x0 = a + j as f64 * h;
        let fm = f(x0 + 0.5 * h);
        let right = f(x0 + h);
        acc += h / 6.0 * (left + 4.0 * fm + right);
        out.push(acc);
        left = right;
    }
    out
}

/// Adaptive Simpson quadrature with Richardson correction.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    fn simp<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
    }
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let left = simp(f, a, m);
        let right = simp(f, m, b);
        if depth > 48 || (left + right - whole).abs() <= 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            rec(f, a, m, left, 0.5 * tol, depth + 1) + rec(f, m, b, right, 0.5 * tol, depth + 1)
        }
    }
    let whole = simp(&f, a, b);
    rec(&f, a, b, whole, tol, 0)
}

/// Nodes and weights for 16-point Gauss-Legendre on [-1, 1].
const GL16_X: [f64; 8] = [
    0.0950125098376374,
    0.2816035507792589,
    0.4580167776572274,
    0.6178762444026438,
    0.7554044083550030,
    0.8656312023878318,
    0.9445750230732326,
    0.9894009349916499,
];
const GL16_W: [f64; 8] = [
    0.1894506104550685,
    0.1826034150449236,
    0.1691565193950025,
    0.1495959888165767,
    0.1246289712555339,
    0.0951585116824928,
    0.0622535239386479,
    0.0271524594117541,
];

/// 16-point Gauss-Legendre quadrature of `f` over [a, b].
pub fn gauss16<F: FnMut(f64) -> f64>(a: f64, b: f64, mut f: F) -> f64 {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let mut acc = 0.0;
    for i in 0..8 {
        acc += GL16_W[i] * (f(c + r * GL16_X[i]) + f(c - r * GL16_X[i]));
    }
    acc * r
}

/// Composite 16-point Gauss-Legendre with `panels` subintervals.
pub fn gauss16_composite<F: FnMut(f64) -> f64>(a: f64, b: f64, panels: usize, mut f: F) -> f64 {
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|j| gauss16(a + j as f64 * h, a + (j + 1) as f64 * h, &mut f))
        .sum()
}
