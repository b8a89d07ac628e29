//! Ginzburg–Landau junction: order-parameter profiles f(x) on [0, L] with
//! f(0) = 1, f(L) = e^{iδ}, the resulting current-phase relation and its
//! deviation from sin δ.
//!
//! Lengths are in units of ζ, so the equation reads f″ + f − k|f|²f = 0 with the
//! homotopy parameter k raised from 0 (linear, closed form) to 1.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::banded::BandMatrix;
use crate::numerics::spline::PeriodicSpline;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CprMethod {
    Linear,
    SincCorrected,
    NonlinearHomotopy,
}

/// Uniform x sampling: `points_per_zeta` per coherence length, at least `min_points` intervals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct XGrid {
    pub points_per_zeta: usize,
    pub min_points: usize,
}

impl Default for XGrid {
    fn default() -> Self {
        XGrid { points_per_zeta: 1024, min_points: 64 }
    }
}

impl XGrid {
    pub fn intervals(&self, l: f64) -> usize {
        ((l * self.points_per_zeta as f64).ceil() as usize).max(self.min_points)
    }

    pub fn doubled(&self) -> Self {
        XGrid { points_per_zeta: 2 * self.points_per_zeta, min_points: 2 * self.min_points }
    }
}

pub const DEFAULT_HOMOTOPY_STEPS: usize = 100;
const NEWTON_ABS: f64 = 1e-11;
const MIN_DK: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub delta: f64,
    /// (Re f, Im f) at x_i = i·L/n, i = 0..=n.
    pub f: Vec<(f64, f64)>,
    /// Max-norm residual of the discrete equation.
    pub residual: f64,
    /// Relative spread of Im(f*·f′) along x.
    pub current_spread: f64,
    pub boundary_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurrentPhaseRelation {
    #[serde(rename = "L_over_zeta")]
    pub l_over_zeta: f64,
    pub delta_grid: Vec<f64>,
    #[serde(rename = "J")]
    pub j: Vec<f64>,
    #[serde(rename = "J_c")]
    pub j_c: f64,
    pub profiles: Vec<Profile>,
    /// (J − J_c sin δ)/J_c.
    pub deviation: Vec<f64>,
    pub method: CprMethod,
}

fn check_length(l: f64) -> Result<()> {
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::Config(format!("L/ζ = {l} must be positive")));
    }
    if l.sin().abs() < 1e-12 * l.max(1.0) {
        return Err(Error::Resonance(l));
    }
    Ok(())
}

fn finish(l: f64, delta_grid: &[f64], j: Vec<f64>, profiles: Vec<Profile>, method: CprMethod) -> CurrentPhaseRelation {
    let j_c = j.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let deviation = if j_c > 0.0 {
        delta_grid.iter().zip(&j).map(|(d, jv)| (jv - j_c * d.sin()) / j_c).collect()
    } else {
        vec![0.0; j.len()]
    };
    CurrentPhaseRelation { l_over_zeta: l, delta_grid: delta_grid.to_vec(), j, j_c, profiles, deviation, method }
}

/// Closed-form solution of f″ + f = 0: f = [sin(L − x) + e^{iδ} sin x]/sin L.
pub fn linear_profile(l: f64, delta: f64, n: usize) -> Vec<Complex64> {
    let e = Complex64::from_polar(1.0, delta);
    let s = l.sin();
    (0..=n)
        .map(|i| {
            let x = l * i as f64 / n as f64;
            if i == 0 {
                Complex64::new(1.0, 0.0)
            } else if i == n {
                e
            } else {
                ((l - x).sin() + e * x.sin()) / s
            }
        })
        .collect()
}

/// Current in units of the short-junction amplitude, L·Im(f*f′), from the
/// conserved discrete flux.
fn discrete_current(f: &[Complex64], l: f64) -> (f64, f64) {
    let n = f.len() - 1;
    let h = l / n as f64;
    let flux: Vec<f64> = (0..n).map(|i| (f[i].conj() * f[i + 1]).im).collect();
    let mean = flux.iter().sum::<f64>() / n as f64;
    let spread = flux.iter().fold(0.0f64, |m, v| m.max((v - mean).abs()));
    let scale = mean.abs().max(1e-300);
    (l * mean / h.sin(), if mean == 0.0 { spread } else { spread / scale })
}

/// Residual (f_{i−1} + f_{i+1} − 2cos(h) f_i)/h² − k|f_i|²f_i at interior nodes.
fn residual(f: &[Complex64], h: f64, k: f64) -> Vec<Complex64> {
    let n = f.len() - 1;
    let c = 2.0 * h.cos();
    let ih2 = 1.0 / (h * h);
    (1..n)
        .map(|i| (f[i - 1] + f[i + 1] - c * f[i]) * ih2 - k * f[i].norm_sqr() * f[i])
        .collect()
}

fn max_norm(r: &[Complex64]) -> f64 {
    r.iter().fold(0.0f64, |m, z| m.max(z.norm()))
}

/// Solves J·dz = rhs with the interleaved (u, v) Jacobian at (f, k).
fn jacobian_solve(f: &[Complex64], h: f64, k: f64, rhs: &[Complex64]) -> Option<Vec<Complex64>> {
    let n = f.len() - 1;
    let m = n - 1;
    let mut a = BandMatrix::zeros(2 * m, 2, 2);
    let c = 2.0 * h.cos();
    let ih2 = 1.0 / (h * h);
    for r in 0..m {
        let z = f[r + 1];
        let (u, v) = (z.re, z.im);
        let (iu, iv) = (2 * r, 2 * r + 1);
        a.add(iu, iu, -c * ih2 - k * (3.0 * u * u + v * v));
        a.add(iu, iv, -2.0 * k * u * v);
        a.add(iv, iu, -2.0 * k * u * v);
        a.add(iv, iv, -c * ih2 - k * (u * u + 3.0 * v * v));
        if r > 0 {
            a.add(iu, iu - 2, ih2);
            a.add(iv, iv - 2, ih2);
        }
        if r + 1 < m {
            a.add(iu, iu + 2, ih2);
            a.add(iv, iv + 2, ih2);
        }
    }
    let mut b: Vec<f64> = rhs.iter().flat_map(|z| [z.re, z.im]).collect();
    if !a.solve(&mut b) {
        return None;
    }
    Some(b.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect())
}

enum Newton {
    Converged,
    Diverged,
}

/// Residual floor: rounding in the second difference scales as ε/h².
fn newton_tol(h: f64) -> f64 {
    NEWTON_ABS + 8.0 * f64::EPSILON / (h * h)
}

fn newton(f: &mut [Complex64], h: f64, k: f64) -> Newton {
    let n = f.len() - 1;
    let tol = newton_tol(h);
    let mut prev_norm = f64::INFINITY;
    let mut growth = 0;
    for _ in 0..50 {
        let r = residual(f, h, k);
        if max_norm(&r) < tol {
            return Newton::Converged;
        }
        let neg: Vec<Complex64> = r.iter().map(|z| -z).collect();
        let dz = match jacobian_solve(f, h, k, &neg) {
            Some(d) => d,
            None => return Newton::Diverged,
        };
        let norm = max_norm(&dz);
        if !norm.is_finite() {
            return Newton::Diverged;
        }
        if norm > prev_norm {
            growth += 1;
            if growth >= 3 {
                return Newton::Diverged;
            }
        } else {
            growth = 0;
        }
        prev_norm = norm;
        for i in 1..n {
            f[i] += dz[i - 1];
        }
        if norm < 1e-14 {
            return Newton::Converged;
        }
    }
    Newton::Diverged
}

/// Continues the linear profile from k = 0 to `k_end` with a tangent predictor
/// and Newton corrector; Δk is halved whenever the corrector diverges.
pub fn continue_profile(l: f64, delta: f64, n: usize, steps: usize, k_end: f64) -> Result<Vec<Complex64>> {
    let h = l / n as f64;
    let mut f = linear_profile(l, delta, n);
    let mut k = 0.0;
    let base_dk = k_end / steps as f64;
    let mut dk = base_dk;
    while k < k_end {
        let step = dk.min(k_end - k);
        // tangent: J·df/dk = |f|²f
        let src: Vec<Complex64> = f[1..n].iter().map(|z| z.norm_sqr() * z).collect();
        let tangent = jacobian_solve(&f, h, k, &src);
        let mut trial = f.clone();
        if let Some(t) = tangent {
            for i in 1..n {
                trial[i] += step * t[i - 1];
            }
        }
        match newton(&mut trial, h, k + step) {
            Newton::Converged => {
                f = trial;
                k += step;
                dk = (dk * 2.0).min(base_dk);
            }
            Newton::Diverged => {
                dk *= 0.5;
                if dk < MIN_DK {
                    return Err(Error::Continuation { last_k: k });
                }
            }
        }
    }
    Ok(f)
}

fn to_profile(f: &[Complex64], l: f64, delta: f64, k: f64) -> (f64, Profile) {
    let n = f.len() - 1;
    let h = l / n as f64;
    let (j, spread) = discrete_current(f, l);
    let target = Complex64::from_polar(1.0, delta);
    let boundary_error = (f[0] - 1.0).norm().max((f[n] - target).norm());
    let residual = max_norm(&residual(f, h, k));
    (j, Profile { delta, f: f.iter().map(|z| (z.re, z.im)).collect(), residual, current_spread: spread, boundary_error })
}

/// J(δ) = sin δ / sinc(L/ζ) with closed-form profiles.
pub fn linear_cpr(l_over_zeta: f64, delta_grid: &[f64]) -> Result<CurrentPhaseRelation> {
    check_length(l_over_zeta)?;
    let n = XGrid::default().intervals(l_over_zeta);
    let amp = l_over_zeta / l_over_zeta.sin();
    let mut j = Vec::with_capacity(delta_grid.len());
    let mut profiles = Vec::with_capacity(delta_grid.len());
    for &d in delta_grid {
        let f = linear_profile(l_over_zeta, d, n);
        let (_, p) = to_profile(&f, l_over_zeta, d, 0.0);
        j.push(amp * d.sin());
        profiles.push(p);
    }
    Ok(finish(l_over_zeta, delta_grid, j, profiles, CprMethod::SincCorrected))
}

/// Short-junction limit J = sin δ.
pub fn short_junction_cpr(delta_grid: &[f64]) -> CurrentPhaseRelation {
    let j = delta_grid.iter().map(|d| d.sin()).collect();
    finish(0.0, delta_grid, j, Vec::new(), CprMethod::Linear)
}

/// Homotopy solution of the full equation; δ values solve in parallel.
pub fn nonlinear_cpr(l_over_zeta: f64, delta_grid: &[f64], homotopy_steps: usize, x_grid: XGrid) -> Result<CurrentPhaseRelation> {
    nonlinear_cpr_to(l_over_zeta, delta_grid, homotopy_steps, x_grid, 1.0)
}

/// As [`nonlinear_cpr`] but stopping at homotopy parameter `k_end`.
pub fn nonlinear_cpr_to(
    l_over_zeta: f64,
    delta_grid: &[f64],
    homotopy_steps: usize,
    x_grid: XGrid,
    k_end: f64,
) -> Result<CurrentPhaseRelation> {
    check_length(l_over_zeta)?;
    if homotopy_steps < 10 {
        return Err(Error::Config(format!("homotopy_steps = {homotopy_steps} must be at least 10")));
    }
    if x_grid.points_per_zeta < 32 {
        return Err(Error::Config(format!("{} points per ζ is below 32", x_grid.points_per_zeta)));
    }
    if !(0.0..=1.0).contains(&k_end) {
        return Err(Error::Config(format!("k = {k_end} outside [0, 1]")));
    }
    let n = x_grid.intervals(l_over_zeta);
    let solved: Vec<(f64, Profile)> = delta_grid
        .par_iter()
        .map(|&d| {
            let f = if k_end == 0.0 {
                linear_profile(l_over_zeta, d, n)
            } else {
                continue_profile(l_over_zeta, d, n, homotopy_steps, k_end)?
            };
            Ok(to_profile(&f, l_over_zeta, d, k_end))
        })
        .collect::<Result<_>>()?;
    let (j, profiles) = solved.into_iter().unzip();
    Ok(finish(l_over_zeta, delta_grid, j, profiles, CprMethod::NonlinearHomotopy))
}

/// Uniform δ grid of `n` points on [0, 2π).
pub fn delta_grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| 2.0 * PI * i as f64 / n as f64).collect()
}

/// Potential correction ε(δ) = E_J ∫₀^δ (J/J_c − sin δ′) dδ′ on the CPR grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WashboardCorrection {
    pub delta: Vec<f64>,
    pub eps: Vec<f64>,
    pub e_j: f64,
}

impl WashboardCorrection {
    pub fn spline(&self) -> PeriodicSpline {
        PeriodicSpline::new(0.0, 2.0 * PI, self.eps.clone())
    }
}

fn check_uniform_period(delta: &[f64]) -> Result<()> {
    let n = delta.len();
    if n < 4 {
        return Err(Error::Validation(format!("{n} samples are too few")));
    }
    let h = 2.0 * PI / n as f64;
    for (i, d) in delta.iter().enumerate() {
        if (d - h * i as f64).abs() > 1e-9 {
            return Err(Error::Validation("δ grid must be uniform on [0, 2π) starting at 0".into()));
        }
    }
    Ok(())
}

/// Spectral antiderivative of periodic zero-mean samples, pinned to 0 at the first sample.
pub fn periodic_antiderivative(samples: &[f64]) -> Result<Vec<f64>> {
    let n = samples.len();
    let mean = samples.iter().sum::<f64>() / n as f64;
    let scale = samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if mean.abs() > 1e-8 * scale.max(1e-300) && mean.abs() > 1e-14 {
        return Err(Error::Validation(format!("deviation has nonzero mean {mean:e}; its integral is not periodic")));
    }
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fwd.process(&mut buf);
    for (m, c) in buf.iter_mut().enumerate() {
        let k = if m <= n / 2 { m as f64 } else { m as f64 - n as f64 };
        if m == 0 || (n % 2 == 0 && m == n / 2) {
            *c = Complex64::new(0.0, 0.0);
        } else {
            *c /= Complex64::new(0.0, k);
        }
    }
    inv.process(&mut buf);
    let out: Vec<f64> = buf.iter().map(|c| c.re / n as f64).collect();
    let o0 = out[0];
    Ok(out.into_iter().map(|v| v - o0).collect())
}

/// Spectral derivative of periodic samples on [0, 2π).
pub fn periodic_derivative(samples: &[f64]) -> Vec<f64> {
    let n = samples.len();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fwd.process(&mut buf);
    for (m, c) in buf.iter_mut().enumerate() {
        let k = if m <= n / 2 { m as f64 } else { m as f64 - n as f64 };
        if n % 2 == 0 && m == n / 2 {
            *c = Complex64::new(0.0, 0.0);
        } else {
            *c *= Complex64::new(0.0, k);
        }
    }
    inv.process(&mut buf);
    buf.iter().map(|c| c.re / n as f64).collect()
}

pub fn washboard_correction(cpr: &CurrentPhaseRelation, e_j: f64) -> Result<WashboardCorrection> {
    check_uniform_period(&cpr.delta_grid)?;
    let integral = periodic_antiderivative(&cpr.deviation)?;
    Ok(WashboardCorrection {
        delta: cpr.delta_grid.clone(),
        eps: integral.into_iter().map(|v| e_j * v).collect(),
        e_j,
    })
}
