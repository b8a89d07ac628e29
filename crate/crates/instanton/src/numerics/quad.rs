//! Quadrature rules: composite Gauss–Legendre and double-exponential (tanh-sinh).

use std::f64::consts::{FRAC_PI_2, PI};

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Reusable composite Gauss–Legendre rule.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        let (nodes, weights) = gauss_legendre(n);
        GaussLegendre { nodes, weights }
    }

    /// Integrates over [a, b] split into `panels` equal panels.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64, panels: usize) -> f64 {
        let h = (b - a) / panels as f64;
        let mut total = 0.0;
        for p in 0..panels {
            let lo = a + h * p as f64;
            let c = lo + 0.5 * h;
            let mut s = 0.0;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                s += w * f(c + 0.5 * h * x);
            }
            total += 0.5 * h * s;
        }
        total
    }
}

/// Result of an adaptive quadrature.
#[derive(Debug, Clone, Copy)]
pub struct QuadEstimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

const TS_UMAX: f64 = 4.0;

/// Tanh-sinh quadrature on [a, b]. The integrand receives `(x, x − a, b − x)` so
/// that endpoint singularities can be evaluated without cancellation.
pub fn tanh_sinh<F>(mut f: F, a: f64, b: f64, rtol: f64) -> QuadEstimate
where
    F: FnMut(f64, f64, f64) -> f64,
{
    let d = 0.5 * (b - a);
    let mut evals = 0usize;
    let mut eval = |u: f64, evals: &mut usize| -> f64 {
        let s = FRAC_PI_2 * u.sinh();
        let ch = s.cosh();
        let w = FRAC_PI_2 * u.cosh() / (ch * ch);
        // complement 1 − tanh|s| computed without cancellation
        let comp = 2.0 / (1.0 + (2.0 * s.abs()).exp());
        let (x, da, db) = if s >= 0.0 {
            let db = d * comp;
            (b - db, 2.0 * d - db, db)
        } else {
            let da = d * comp;
            (a + da, da, 2.0 * d - da)
        };
        if da <= 0.0 || db <= 0.0 {
            return 0.0;
        }
        *evals += 1;
        let v = f(x, da, db) * w;
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    let mut h = 0.5;
    let mut sum = eval(0.0, &mut evals);
    let mut k = 1;
    while k as f64 * h <= TS_UMAX {
        let u = k as f64 * h;
        sum += eval(u, &mut evals) + eval(-u, &mut evals);
        k += 1;
    }
    let mut prev = sum * h * d;
    let mut err = f64::INFINITY;
    for _level in 0..10 {
        h *= 0.5;
        let mut k = 1;
        while k as f64 * h <= TS_UMAX {
            let u = k as f64 * h;
            sum += eval(u, &mut evals) + eval(-u, &mut evals);
            k += 2;
        }
        let cur = sum * h * d;
        err = (cur - prev).abs();
        prev = cur;
        if err <= rtol * cur.abs() || err < 1e-300 {
            break;
        }
    }
    QuadEstimate { value: prev, error: err, evaluations: evals }
}

/// Convenience wrapper for smooth integrands.
pub fn tanh_sinh_simple<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, rtol: f64) -> f64 {
    tanh_sinh(|x, _, _| f(x), a, b, rtol).value
}

/// Composite trapezoid on uniformly spaced samples.
pub fn trapezoid(y: &[f64], dx: f64) -> f64 {
    if y.len() < 2 {
        return 0.0;
    }
    let inner: f64 = y[1..y.len() - 1].iter().sum();
    dx * (inner + 0.5 * (y[0] + y[y.len() - 1]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_polynomial_exact() {
        let gl = GaussLegendre::new(5);
        let v = gl.integrate(|x| x.powi(9) + x * x, 0.0, 1.0, 1);
        assert!((v - (0.1 + 1.0 / 3.0)).abs() < 1e-14);
    }

    #[test]
    fn ts_sqrt_singularity() {
        // ∫_0^1 sqrt(1 - x^2) dx = π/4 with a square-root endpoint
        let r = tanh_sinh(|x, _, db| (db * (1.0 + x)).sqrt(), 0.0, 1.0, 1e-14);
        assert!((r.value - PI / 4.0).abs() < 1e-13, "{}", r.value);
    }
}
