//! WKB treatment of a symmetric double well: phase integrals θ, φ and the
//! quantization condition tan θ = ±2e^φ.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::quad::tanh_sinh;
use crate::numerics::roots::{brent, newton_bisect};
use crate::potential::PotentialModel;

const QUAD_RTOL: f64 = 1e-13;

/// Geometry of a symmetric well: barrier at the origin, right minimum at `x_min`.
#[derive(Debug, Clone, Copy)]
struct Geometry {
    x_min: f64,
    v_min: f64,
    /// Barrier height V(0), or `None` for a single well centred at the origin.
    v_top: Option<f64>,
    scale: f64,
}

fn geometry(model: &PotentialModel) -> Result<Geometry> {
    let scale = model.length_scale();
    for k in 1..=7 {
        let x = 0.37 * k as f64 * scale;
        let (a, b) = (model.evaluate(x).v, model.evaluate(-x).v);
        if (a - b).abs() > 1e-12 * (1.0 + a.abs()) {
            return Err(Error::Domain("WKB double-well analysis needs V(x) = V(−x)".into()));
        }
    }
    let mins = model.minima(1e-9 * scale, 10.0 * scale)?;
    match mins.iter().min_by(|a, b| model.evaluate(a.x).v.partial_cmp(&model.evaluate(b.x).v).unwrap()) {
        Some(m) => Ok(Geometry { x_min: m.x, v_min: model.evaluate(m.x).v, v_top: Some(model.evaluate(0.0).v), scale }),
        None => {
            let e = model.evaluate(0.0);
            if e.d2v > 0.0 {
                Ok(Geometry { x_min: 0.0, v_min: e.v, v_top: None, scale })
            } else {
                Err(Error::Domain("no well found on the positive axis".into()))
            }
        }
    }
}

fn turning_point(model: &PotentialModel, e: f64, a: f64, b: f64, scale: f64) -> Result<f64> {
    newton_bisect(|x| {
        let ev = model.evaluate(x);
        (ev.v - e, ev.dv)
    }, a, b, 1e-15 * scale)
}

fn outer_turning_point(model: &PotentialModel, g: &Geometry, e: f64) -> Result<f64> {
    let mut hi = g.x_min + g.scale;
    let mut k = 0;
    while model.evaluate(hi).v < e {
        hi = g.x_min + (hi - g.x_min) * 2.0;
        k += 1;
        if k > 60 {
            return Err(Error::Domain(format!("no outer turning point for E = {e}")));
        }
    }
    turning_point(model, e, g.x_min, hi, g.scale)
}

fn momentum_integral(model: &PotentialModel, e: f64, a: f64, b: f64, allowed: bool) -> f64 {
    tanh_sinh(|x, _, _| {
        let d = if allowed { e - model.evaluate(x).v } else { model.evaluate(x).v - e };
        (2.0 * d.max(0.0)).sqrt()
    }, a, b, QUAD_RTOL)
    .value
}

/// θ = (1/ħ)∫_{x₁}^{x₂} p dx over the right well and φ = (2/ħ)∫_0^{x₁} |p| dx
/// under the barrier. For a single well the full-well θ is returned and φ = ∞.
pub fn phase_integrals(model: &PotentialModel, e: f64, hbar: f64) -> Result<(f64, f64)> {
    let g = geometry(model)?;
    phase_integrals_with(model, &g, e, hbar)
}

fn phase_integrals_with(model: &PotentialModel, g: &Geometry, e: f64, hbar: f64) -> Result<(f64, f64)> {
    if !(hbar > 0.0) {
        return Err(Error::Domain(format!("ħ = {hbar} must be positive")));
    }
    let top = g.v_top.unwrap_or(f64::INFINITY);
    if !(e > g.v_min && e < top) {
        return Err(Error::Domain(format!("E = {e} outside ({}, {top})", g.v_min)));
    }
    let x2 = outer_turning_point(model, g, e)?;
    match g.v_top {
        None => Ok((momentum_integral(model, e, -x2, x2, true) / hbar, f64::INFINITY)),
        Some(_) => {
            let x1 = turning_point(model, e, 0.0, g.x_min, g.scale)?;
            let theta = momentum_integral(model, e, x1, x2, true) / hbar;
            let phi = 2.0 * momentum_integral(model, e, 0.0, x1, false) / hbar;
            Ok((theta, phi))
        }
    }
}

/// φ = (2E/ħω)[z₀√(z₀²−1) − ln(z₀ + √(z₀²−1))], z₀ = ωa/√(2E), for V = ½ω²(|x|−a)².
pub fn parabolic_phi(omega: f64, a: f64, e: f64, hbar: f64) -> f64 {
    let z0 = omega * a / (2.0 * e).sqrt();
    let r = (z0 * z0 - 1.0).sqrt();
    2.0 * e / (hbar * omega) * (z0 * r - (z0 + r).ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WkbDoublet {
    pub n: u32,
    #[serde(rename = "E_plus")]
    pub e_plus: f64,
    #[serde(rename = "E_minus")]
    pub e_minus: f64,
    /// θ and φ at E⁺.
    pub theta: f64,
    pub phi: f64,
    pub parity_split: f64,
    /// Thick-barrier estimates (n+½)-level ∓ (ħω/2π)e^{−φ}.
    pub approx_e_plus: f64,
    pub approx_e_minus: f64,
    /// max |sin θ ∓ 2e^φ cos θ| over both branches.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WkbSpectrum {
    pub doublets: Vec<WkbDoublet>,
    pub warnings: Vec<String>,
}

/// Condition residual sin θ ∓ 2e^φ cos θ.
pub fn condition_residual(theta: f64, phi: f64, sign: f64) -> f64 {
    theta.sin() - sign * 2.0 * phi.exp() * theta.cos()
}

/// Doublets n = 0..n_max−1 from tan θ = ±2e^φ; the + branch is the lower, even level.
pub fn quantize(model: &PotentialModel, hbar: f64, n_max: u32) -> Result<WkbSpectrum> {
    let g = geometry(model)?;
    let top = match g.v_top {
        Some(t) => t,
        None => return Err(Error::Domain("quantize needs a double well".into())),
    };
    let span = top - g.v_min;
    let (lo, hi) = (g.v_min + 1e-12 * span, top - 1e-9 * span);
    let mut out = WkbSpectrum { doublets: Vec::new(), warnings: Vec::new() };
    let pi_ = |e: f64| phase_integrals_with(model, &g, e, hbar);
    for n in 0..n_max {
        let target = (n as f64 + 0.5) * PI;
        let branch = |sign: f64| -> Result<Option<f64>> {
            let h = |e: f64| match pi_(e) {
                Ok((th, ph)) => th - target + sign * (0.5 * (-ph).exp()).atan(),
                Err(_) => f64::NAN,
            };
            if h(hi) < 0.0 {
                return Ok(None);
            }
            brent(h, lo, hi, 1e-15 * span.max(hbar)).map(Some)
        };
        let (ep, em) = match (branch(1.0)?, branch(-1.0)?) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                out.warnings.push(format!("doublet n = {n} lies above the barrier; truncated"));
                break;
            }
        };
        let (tp, pp) = pi_(ep)?;
        let (tm, pm) = pi_(em)?;
        let residual = condition_residual(tp, pp, 1.0).abs().max(condition_residual(tm, pm, -1.0).abs());
        let e0 = brent(|e| pi_(e).map(|(t, _)| t - target).unwrap_or(f64::NAN), lo, hi, 1e-15 * span.max(hbar))?;
        let de = 1e-6 * span;
        let dth = (pi_((e0 + de).min(hi))?.0 - pi_(e0 - de)?.0) / (2.0 * de);
        let hw = PI / dth;
        let shift = hw / (2.0 * PI) * (-pi_(e0)?.1).exp();
        out.doublets.push(WkbDoublet {
            n,
            e_plus: ep,
            e_minus: em,
            theta: tp,
            phi: pp,
            parity_split: em - ep,
            approx_e_plus: e0 - shift,
            approx_e_minus: e0 + shift,
            residual,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_full_well_theta() {
        let m = PotentialModel::harmonic(1.3).unwrap();
        let (th, ph) = phase_integrals(&m, 0.7, 0.5).unwrap();
        assert!((th - PI * 0.7 / (0.5 * 1.3)).abs() < 1e-10);
        assert!(ph.is_infinite());
    }

    #[test]
    fn parabolic_phi_closed_form() {
        let m = PotentialModel::parabolic_double_well(1.0, 3.0).unwrap();
        let (_, ph) = phase_integrals(&m, 0.5, 1.0).unwrap();
        assert!((ph - parabolic_phi(1.0, 3.0, 0.5, 1.0)).abs() < 1e-8);
        assert!((ph - 6.7226).abs() < 1e-4);
    }
}
