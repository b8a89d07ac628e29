//! Interpolants: periodic cubic spline and quintic Hermite segments.

use super::tridiag::TridiagLu;
use serde::{Deserialize, Serialize};

/// Periodic cubic spline through equally spaced samples `y_i = f(x0 + i·h)`, `h = period / n`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PeriodicSpline {
    x0: f64,
    period: f64,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl PeriodicSpline {
    pub fn new(x0: f64, period: f64, y: Vec<f64>) -> Self {
        let n = y.len();
        assert!(n >= 3, "periodic spline needs at least three samples");
        let h = period / n as f64;
        let rhs: Vec<f64> = (0..n)
            .map(|i| 6.0 * (y[(i + 1) % n] - 2.0 * y[i] + y[(i + n - 1) % n]) / (h * h))
            .collect();
        // Sherman–Morrison on the cyclic [1 4 1] system
        let gamma = -4.0;
        let mut d = vec![4.0; n];
        d[0] -= gamma;
        d[n - 1] -= 1.0 / gamma;
        let off = vec![1.0; n - 1];
        let lu = TridiagLu::factor(&off, &d, &off);
        let mut xs = rhs;
        lu.solve(&mut xs);
        let mut u = vec![0.0; n];
        u[0] = gamma;
        u[n - 1] = 1.0;
        lu.solve(&mut u);
        let fact = (xs[0] + xs[n - 1] / gamma) / (1.0 + u[0] + u[n - 1] / gamma);
        let m: Vec<f64> = xs.iter().zip(&u).map(|(a, b)| a - fact * b).collect();
        PeriodicSpline { x0, period, y, m }
    }

    pub fn samples(&self) -> &[f64] {
        &self.y
    }

    fn locate(&self, x: f64) -> (usize, f64) {
        let n = self.y.len();
        let s = (x - self.x0).rem_euclid(self.period) / (self.period / n as f64);
        let i = (s.floor() as usize).min(n - 1);
        (i, s - i as f64)
    }

    /// f(x + h) − f(x) without cancellation for small `h`.
    pub fn increment(&self, x: f64, h: f64) -> f64 {
        self.increment_impl(x, h, false)
    }

    /// f(x + h) − f(x) − f′(x)·h, quadratic in small `h` to rounding.
    pub fn curvature_increment(&self, x: f64, h: f64) -> f64 {
        self.increment_impl(x, h, true)
    }

    fn increment_impl(&self, x: f64, h: f64, drop_linear: bool) -> f64 {
        let n = self.y.len();
        let hs = self.period / n as f64;
        let (i, t) = self.locate(x);
        let d0 = self.local(i, t).1;
        if h.abs() >= hs {
            let inc = self.eval(x + h).0 - self.eval(x).0;
            return if drop_linear { inc - d0 * h } else { inc };
        }
        // exact cubic Taylor step inside segment `i` from local position `t`,
        // with the slope taken relative to d0 when the linear term is dropped
        let step = |i: usize, t: f64, dx: f64| {
            let (_, d, dd) = self.local(i, t);
            let ddd = (self.m[(i + 1) % n] - self.m[i]) / hs;
            let slope = if drop_linear { d - d0 } else { d };
            dx * (slope + dx * (0.5 * dd + dx * ddd / 6.0))
        };
        let to_right = (1.0 - t) * hs;
        let to_left = -t * hs;
        let first = |dx: f64| {
            let (_, _, dd) = self.local(i, t);
            let ddd = (self.m[(i + 1) % n] - self.m[i]) / hs;
            let lin = if drop_linear { 0.0 } else { d0 * dx };
            lin + dx * dx * (0.5 * dd + dx * ddd / 6.0)
        };
        if h > to_right {
            first(to_right) + step((i + 1) % n, 0.0, h - to_right)
        } else if h < to_left {
            first(to_left) + step((i + n - 1) % n, 1.0, h - to_left)
        } else {
            first(h)
        }
    }

    /// Value, first and second derivative at `x`.
    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        let (i, t) = self.locate(x);
        self.local(i, t)
    }

    fn local(&self, i: usize, t: f64) -> (f64, f64, f64) {
        let n = self.y.len();
        let h = self.period / n as f64;
        let j = (i + 1) % n;
        let (y0, y1, m0, m1) = (self.y[i], self.y[j], self.m[i], self.m[j]);
        let a = 1.0 - t;
        let v = a * y0 + t * y1 + h * h / 6.0 * ((a * a * a - a) * m0 + (t * t * t - t) * m1);
        let d = (y1 - y0) / h + h / 6.0 * (-(3.0 * a * a - 1.0) * m0 + (3.0 * t * t - 1.0) * m1);
        let dd = a * m0 + t * m1;
        (v, d, dd)
    }
}

/// Quintic Hermite interpolation on `[t0, t0 + h]` from value, first and second
/// derivative at both ends. Returns value and first derivative at `t`.
#[allow(clippy::too_many_arguments)]
pub fn quintic_hermite(t0: f64, h: f64, y0: f64, d0: f64, s0: f64, y1: f64, d1: f64, s1: f64, t: f64) -> (f64, f64) {
    let u = (t - t0) / h;
    let (u2, u3) = (u * u, u * u * u);
    let (u4, u5) = (u3 * u, u3 * u2);
    let h00 = 1.0 - 10.0 * u3 + 15.0 * u4 - 6.0 * u5;
    let h10 = u - 6.0 * u3 + 8.0 * u4 - 3.0 * u5;
    let h20 = 0.5 * u2 - 1.5 * u3 + 1.5 * u4 - 0.5 * u5;
    let h01 = 10.0 * u3 - 15.0 * u4 + 6.0 * u5;
    let h11 = -4.0 * u3 + 7.0 * u4 - 3.0 * u5;
    let h21 = 0.5 * u3 - u4 + 0.5 * u5;
    let v = h00 * y0 + h * h10 * d0 + h * h * h20 * s0 + h01 * y1 + h * h11 * d1 + h * h * h21 * s1;
    let g00 = -30.0 * u2 + 60.0 * u3 - 30.0 * u4;
    let g10 = 1.0 - 18.0 * u2 + 32.0 * u3 - 15.0 * u4;
    let g20 = u - 4.5 * u2 + 6.0 * u3 - 2.5 * u4;
    let g01 = -g00;
    let g11 = -12.0 * u2 + 28.0 * u3 - 15.0 * u4;
    let g21 = 1.5 * u2 - 4.0 * u3 + 2.5 * u4;
    let dv = (g00 * y0 + g01 * y1) / h + g10 * d0 + g11 * d1 + h * (g20 * s0 + g21 * s1);
    (v, dv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn periodic_spline_reproduces_sine() {
        let n = 128;
        let y: Vec<f64> = (0..n).map(|i| (2.0 * PI * i as f64 / n as f64).sin()).collect();
        let sp = PeriodicSpline::new(0.0, 2.0 * PI, y);
        for k in 0..50 {
            let x = 0.123 + k as f64 * 0.37;
            let (v, d, _) = sp.eval(x);
            assert!((v - x.sin()).abs() < 1e-6);
            assert!((d - x.cos()).abs() < 1e-4);
        }
    }

    #[test]
    fn increment_matches_difference_and_stays_quadratic() {
        let n = 32;
        let y: Vec<f64> = (0..n).map(|i| (2.0 * PI * i as f64 / n as f64).cos() + 0.3).collect();
        let sp = PeriodicSpline::new(-PI, 2.0 * PI, y);
        for &x in &[0.05, 1.3, -2.9, 3.0] {
            for &h in &[0.4, -0.4, 0.15, -0.15, 0.01, 3.0, -7.0] {
                let direct = sp.eval(x + h).0 - sp.eval(x).0;
                assert!((sp.increment(x, h) - direct).abs() < 1e-13, "{x} {h}");
            }
        }
        let x0 = 0.0;
        let d2 = sp.eval(x0).2;
        for k in 6..30 {
            let h = 10f64.powi(-k);
            if k < 14 {
                let inc = sp.increment(x0, h) - sp.eval(x0).1 * h;
                assert!((inc / (0.5 * d2 * h * h) - 1.0).abs() < 1e-3, "{h}");
            }
            let cur = sp.curvature_increment(x0, h);
            assert!((cur / (0.5 * d2 * h * h) - 1.0).abs() < 1e-5, "{h}");
        }
    }

    #[test]
    fn hermite_exact_for_quintic() {
        let f = |t: f64| (t.powi(5) - 2.0 * t.powi(3) + t, 5.0 * t.powi(4) - 6.0 * t * t + 1.0, 20.0 * t.powi(3) - 12.0 * t);
        let (a, b) = (0.3, 0.8);
        let (y0, d0, s0) = f(a);
        let (y1, d1, s1) = f(b);
        let t = 0.47;
        let (v, dv) = quintic_hermite(a, b - a, y0, d0, s0, y1, d1, s1, t);
        assert!((v - f(t).0).abs() < 1e-13);
        assert!((dv - f(t).1).abs() < 1e-12);
    }
}
