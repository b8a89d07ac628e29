//! Gaussian integrals, one-dimensional steepest descent with its first
//! correction, and the rotated-contour continuation of the quartic toy integral.

use std::f64::consts::{FRAC_PI_4, PI};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::quad::tanh_sinh_simple;

pub const MAX_DIM: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticForm {
    /// Row-major symmetric matrix.
    pub a: Vec<Vec<f64>>,
    pub b: Option<Vec<f64>>,
}

impl QuadraticForm {
    pub fn new(a: Vec<Vec<f64>>, b: Option<Vec<f64>>) -> Result<Self> {
        let n = a.len();
        if n == 0 || n > MAX_DIM {
            return Err(Error::Config(format!("matrix size {n} outside 1..={MAX_DIM}")));
        }
        if a.iter().any(|r| r.len() != n) {
            return Err(Error::Config("matrix is not square".into()));
        }
        for i in 0..n {
            for j in 0..i {
                if a[i][j] != a[j][i] {
                    return Err(Error::Config(format!("matrix is not symmetric at ({i}, {j})")));
                }
            }
        }
        if let Some(b) = &b {
            if b.len() != n {
                return Err(Error::Config(format!("linear term has length {} for n = {n}", b.len())));
            }
        }
        Ok(QuadraticForm { a, b })
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }
}

/// ∫ exp(−½xᵀAx + bᵀx) dⁿx = (2π)^{n/2} (det A)^{−1/2} e^{½ bᵀA⁻¹b}.
pub fn gaussian_integral(form: &QuadraticForm) -> Result<f64> {
    let n = form.dim();
    let m = DMatrix::from_fn(n, n, |i, j| form.a[i][j]);
    let chol = m.cholesky().ok_or(Error::Definiteness)?;
    let l = chol.l();
    let log_det: f64 = 2.0 * (0..n).map(|i| l[(i, i)].ln()).sum::<f64>();
    let quad = match &form.b {
        Some(b) => {
            let bv = DVector::from_column_slice(b);
            let x = chol.solve(&bv);
            bv.dot(&x)
        }
        None => 0.0,
    };
    Ok((0.5 * n as f64 * (2.0 * PI).ln() - 0.5 * log_det + 0.5 * quad).exp())
}

/// Value and the first four derivatives of an exponent A(x).
pub type Derivs = [f64; 5];

/// Central finite-difference derivatives of a smooth scalar function.
pub fn finite_difference(f: impl Fn(f64) -> f64, x: f64, step: f64) -> Derivs {
    let h = step;
    let fm2 = f(x - 2.0 * h);
    let fm1 = f(x - h);
    let f0 = f(x);
    let fp1 = f(x + h);
    let fp2 = f(x + 2.0 * h);
    [
        f0,
        (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h),
        (-fm2 + 16.0 * fm1 - 30.0 * f0 + 16.0 * fp1 - fp2) / (12.0 * h * h),
        (-fm2 + 2.0 * fm1 - 2.0 * fp1 + fp2) / (2.0 * h * h * h),
        (fm2 - 4.0 * fm1 + 6.0 * f0 - 4.0 * fp1 + fp2) / (h * h * h * h),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteepestDescent {
    pub value: f64,
    pub x_c: f64,
    pub upsilon: f64,
}

/// I(h) ≈ √(2πh/A″) e^{−A(x_c)/h} Υ(h), Υ = 1 at order 0 and
/// 1 + (h/24)(5A‴²/A″³ − 3A⁗/A″²) at order 1.
pub fn steepest_descent(a: impl Fn(f64) -> Derivs, x_guess: f64, h: f64, order: u32) -> Result<SteepestDescent> {
    if order > 1 {
        return Err(Error::Config(format!("order {order} not available; use 0 or 1")));
    }
    if !(h > 0.0) {
        return Err(Error::Domain(format!("h = {h} must be positive")));
    }
    let mut x = x_guess;
    for _ in 0..100 {
        let d = a(x);
        if !(d[2] > 0.0) {
            return Err(Error::Saddle(d[2]));
        }
        let step = d[1] / d[2];
        x -= step;
        if step.abs() <= 1e-15 * x.abs().max(1.0) {
            break;
        }
    }
    let d = a(x);
    if !(d[2] > 0.0) {
        return Err(Error::Saddle(d[2]));
    }
    let upsilon = if order == 0 {
        1.0
    } else {
        1.0 + h / 24.0 * (5.0 * d[3] * d[3] / d[2].powi(3) - 3.0 * d[4] / (d[2] * d[2]))
    };
    let value = (2.0 * PI * h / d[2]).sqrt() * (-d[0] / h).exp() * upsilon;
    Ok(SteepestDescent { value, x_c: x, upsilon })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToyResult {
    pub g: f64,
    /// 2^{−1/2} e^{1/(4g)}.
    pub asymptotic: f64,
    /// |Im Λ| from the rotated contour.
    pub contour: f64,
    /// Signed Im Λ on the contour rotated by −π/4.
    pub contour_signed: f64,
    pub real_part: f64,
    pub ratio: f64,
    /// Set when contour and asymptotic values differ by more than 50%.
    pub flagged: bool,
}

/// Radius at which the quartic damping reaches e^{−40}.
pub fn default_radius(g: f64) -> f64 {
    (160.0 / g.abs()).powf(0.25)
}

/// Λ(g) = (2π)^{−1/2} ∫ e^{−x²/2 − g x⁴/4} dx continued to g < 0 along x = r e^{−iπ/4}.
pub fn toy_contour(g: f64, radius: f64) -> Result<Complex64> {
    if !(g < 0.0) {
        return Err(Error::Domain(format!("g = {g} must be negative")));
    }
    let ag = g.abs();
    let re = tanh_sinh_simple(|r| (-0.25 * ag * r.powi(4)).exp() * (0.5 * r * r).cos(), 0.0, radius, 1e-15);
    let im = tanh_sinh_simple(|r| (-0.25 * ag * r.powi(4)).exp() * (0.5 * r * r).sin(), 0.0, radius, 1e-15);
    let rot = Complex64::from_polar(1.0, -FRAC_PI_4);
    Ok(rot * Complex64::new(2.0 * re, 2.0 * im) / (2.0 * PI).sqrt())
}

pub fn toy_imaginary_part(g: f64) -> Result<ToyResult> {
    toy_imaginary_part_at(g, default_radius(g))
}

pub fn toy_imaginary_part_at(g: f64, radius: f64) -> Result<ToyResult> {
    let lam = toy_contour(g, radius)?;
    let asymptotic = 2f64.powf(-0.5) * (0.25 / g).exp();
    let contour = lam.im.abs();
    let ratio = contour / asymptotic;
    Ok(ToyResult {
        g,
        asymptotic,
        contour,
        contour_signed: lam.im,
        real_part: lam.re,
        ratio,
        flagged: (ratio - 1.0).abs() > 0.5,
    })
}
