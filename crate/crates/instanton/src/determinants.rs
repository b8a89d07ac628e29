//! Fluctuation determinants by Gelfand–Yaglom shooting, zero-mode removal,
//! the Pöschl–Teller (Bargmann–Wigner) closed form and the K coefficient.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::ode::{integrate, OdeOptions};
use crate::numerics::roots::brent;
use crate::numerics::spline::quintic_hermite;
use crate::trajectory::InstantonPath;

/// Value carried as `mantissa · e^{log_scale}` so exponential growth cannot overflow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaled {
    pub mantissa: f64,
    pub log_scale: f64,
}

impl Scaled {
    pub fn value(&self) -> f64 {
        self.mantissa * self.log_scale.exp()
    }

    pub fn ratio(&self, other: &Scaled) -> f64 {
        self.mantissa / other.mantissa * (self.log_scale - other.log_scale).exp()
    }
}

const RESCALE_AT: f64 = 1e100;

fn gy_options() -> OdeOptions {
    OdeOptions { rtol: 1e-10, atol: 1e-300, h_init: 1e-3, h_max: 0.0, max_steps: 10_000_000 }
}

/// Shoots ψ'' = (W − λ)ψ with ψ(−T/2) = 0, ψ′(−T/2) = 1 and returns ψ(T/2).
pub fn shoot<W: Fn(f64) -> f64>(w: W, t_total: f64, lambda: f64, rtol: f64) -> Result<Scaled> {
    if !(t_total > 0.0) {
        return Err(Error::Config(format!("horizon T = {t_total} must be positive")));
    }
    let opts = OdeOptions { rtol, ..gy_options() };
    let mut y = [0.0, 1.0];
    let mut log_scale = 0.0;
    let n_seg = (t_total.ceil() as usize).max(1);
    let seg = t_total / n_seg as f64;
    let mut t = -0.5 * t_total;
    for k in 0..n_seg {
        let t1 = if k + 1 == n_seg { 0.5 * t_total } else { t + seg };
        integrate(|s, y, d| {
            d[0] = y[1];
            d[1] = (w(s) - lambda) * y[0];
        }, t, &mut y, t1, &opts)?;
        let m = y[0].abs().max(y[1].abs());
        if !m.is_finite() {
            return Err(Error::Integration(format!("non-finite solution at t = {t1}")));
        }
        if m > RESCALE_AT {
            y[0] /= m;
            y[1] /= m;
            log_scale += m.ln();
        }
        t = t1;
    }
    Ok(Scaled { mantissa: y[0], log_scale })
}

/// det[−∂² + W1 − λ] / det[−∂² + W2 − λ] on [−T/2, T/2] with Dirichlet ends.
pub fn gelfand_yaglom_ratio<W1, W2>(w1: W1, w2: W2, t_total: f64, lambda: f64) -> Result<f64>
where
    W1: Fn(f64) -> f64,
    W2: Fn(f64) -> f64,
{
    let a = shoot(w1, t_total, lambda, 1e-10)?;
    let b = shoot(w2, t_total, lambda, 1e-10)?;
    if b.mantissa == 0.0 || !b.mantissa.is_finite() {
        return Err(Error::Pole(format!("λ = {lambda} is an eigenvalue of the reference operator")));
    }
    Ok(a.ratio(&b))
}

/// ln|Γ(x)| and the sign of Γ(x), valid for negative non-integers too.
fn ln_gamma_signed(x: f64) -> Result<(f64, f64)> {
    if x <= 0.0 && x == x.floor() {
        return Err(Error::Pole(format!("Γ has a pole at {x}")));
    }
    if x > 0.0 {
        return Ok((statrs::function::gamma::ln_gamma(x), 1.0));
    }
    // reflection: Γ(x) = π / (sin(πx) Γ(1 − x))
    let s = (PI * x).sin();
    let lg = statrs::function::gamma::ln_gamma(1.0 - x);
    Ok((PI.ln() - s.abs().ln() - lg, s.signum()))
}

/// Closed-form ratio Γ(1+z)Γ(z) / (Γ(1+λ+z)Γ(z−λ)), z = √(1+ε)/ω, for the
/// operator −∂² + 1 − λ(λ+1)ω²sech²(ωt) shifted by ε against −∂² + 1 + ε.
pub fn bargmann_wigner_det(lambda_pt: f64, omega: f64, eps: f64) -> Result<f64> {
    if !(eps > -1.0) {
        return Err(Error::Domain(format!("ε = {eps} must exceed −1")));
    }
    if !(omega > 0.0) {
        return Err(Error::Domain(format!("ω = {omega} must be positive")));
    }
    let z = (1.0 + eps).sqrt() / omega;
    let (a, sa) = ln_gamma_signed(1.0 + z)?;
    let (b, sb) = ln_gamma_signed(z)?;
    let (c, sc) = ln_gamma_signed(1.0 + lambda_pt + z)?;
    let (d, sd) = ln_gamma_signed(z - lambda_pt)?;
    Ok(sa * sb * sc * sd * (a + b - c - d).exp())
}

/// lim_{ε→0} f(ε)/ε from ε ∈ {1e−3, 1e−4, 1e−5} by two Richardson sweeps.
pub fn small_eps_slope<F: Fn(f64) -> Result<f64>>(f: F) -> Result<f64> {
    let eps = [1e-3, 1e-4, 1e-5];
    let mut c = [0.0; 3];
    for (ci, e) in c.iter_mut().zip(eps) {
        *ci = f(e)? / e;
    }
    let r1 = [(10.0 * c[1] - c[0]) / 9.0, (10.0 * c[2] - c[1]) / 9.0];
    Ok((100.0 * r1[1] - r1[0]) / 99.0)
}

/// Potential −λ(λ+1)ω²sech²(ωt) + 1 of the Pöschl–Teller family.
pub fn poschl_teller(lambda_pt: f64, omega: f64) -> impl Fn(f64) -> f64 {
    move |t: f64| {
        let c = (omega * t).cosh();
        1.0 - lambda_pt * (lambda_pt + 1.0) * omega * omega / (c * c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HorizonPoint {
    pub horizon: f64,
    pub ratio_full: f64,
    pub lambda0: f64,
    pub ratio_prime: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluctuationResult {
    /// ψ(T/2)/ψ_free(T/2) at the largest horizon.
    pub ratio_full: f64,
    pub lambda0: f64,
    /// Zero-mode-removed ratio det′/det₀ extrapolated over the horizon grid.
    pub ratio_prime: f64,
    pub negative_mode: bool,
    /// |K| at ħ = 1; K(ħ) = K(1)/√ħ.
    #[serde(rename = "K")]
    pub k: f64,
    pub horizon: f64,
    pub scan: Vec<HorizonPoint>,
}

impl FluctuationResult {
    pub fn k_at(&self, s0: f64, hbar: f64) -> Result<f64> {
        k_coefficient(s0, self.ratio_prime, hbar)
    }
}

/// K = √(S₀/2πħ)·|det′/det₀|^{−1/2}.
pub fn k_coefficient(s0: f64, ratio_prime: f64, hbar: f64) -> Result<f64> {
    if ratio_prime == 0.0 || !ratio_prime.is_finite() {
        return Err(Error::Degenerate(format!("ratio_prime = {ratio_prime}")));
    }
    if !(s0 > 0.0 && hbar > 0.0) {
        return Err(Error::Domain(format!("S0 = {s0} and ħ = {hbar} must be positive")));
    }
    Ok((s0 / (2.0 * PI * hbar)).sqrt() / ratio_prime.abs().sqrt())
}

/// Zero mode x₁ and a second solution y₁ of the λ = 0 fluctuation equation with
/// Wronskian x₁y₁′ − x₁′y₁ = 1, tabulated on the path grid.
pub struct ZeroModePair<'a> {
    path: &'a InstantonPath,
    first: usize,
    y: Vec<f64>,
    dy: Vec<f64>,
}

impl<'a> ZeroModePair<'a> {
    pub fn new(path: &'a InstantonPath, half_width: f64) -> Result<Self> {
        if !(path.jacobian > 0.0) {
            return Err(Error::Degenerate("no zero mode: the path is static".into()));
        }
        let dt = path.dt();
        let c = path.center_index();
        let k = ((half_width / dt).ceil() as usize + 1).min(c);
        let first = c - k;
        let last = c + k;
        let (x0, dx0) = path.zero_mode_sample(c);
        let n2 = x0 * x0 + dx0 * dx0;
        let mut y = vec![0.0; last - first + 1];
        let mut dy = vec![0.0; last - first + 1];
        y[c - first] = -dx0 / n2;
        dy[c - first] = x0 / n2;
        let opts = OdeOptions { rtol: 1e-12, ..gy_options() };
        let rhs = |t: f64, s: &[f64], d: &mut [f64]| {
            d[0] = s[1];
            d[1] = path.w_at(t) * s[0];
        };
        let mut st = [y[c - first], dy[c - first]];
        for i in c..last {
            integrate(rhs, path.tau(i), &mut st, path.tau(i + 1), &opts)?;
            y[i + 1 - first] = st[0];
            dy[i + 1 - first] = st[1];
        }
        let mut st = [y[c - first], dy[c - first]];
        for i in (first + 1..=c).rev() {
            integrate(rhs, path.tau(i), &mut st, path.tau(i - 1), &opts)?;
            y[i - 1 - first] = st[0];
            dy[i - 1 - first] = st[1];
        }
        Ok(ZeroModePair { path, first, y, dy })
    }

    pub fn x1(&self, tau: f64) -> f64 {
        self.path.zero_mode_at(tau).0
    }

    pub fn y1(&self, tau: f64) -> f64 {
        let dt = self.path.dt();
        let c = self.path.center_index() as f64;
        let s = tau / dt + c - self.first as f64;
        let i = (s.floor().max(0.0) as usize).min(self.y.len() - 2);
        let t0 = self.path.tau(i + self.first);
        let w0 = self.path.w_sample(i + self.first);
        let w1 = self.path.w_sample(i + 1 + self.first);
        quintic_hermite(t0, dt, self.y[i], self.dy[i], w0 * self.y[i], self.y[i + 1], self.dy[i + 1], w1 * self.y[i + 1], tau).0
    }

    /// ψ₀(T/2) for the λ = 0 Dirichlet problem on [−T/2, T/2].
    pub fn psi0(&self, t_total: f64) -> f64 {
        let h = 0.5 * t_total;
        self.x1(-h) * self.y1(h) - self.y1(-h) * self.x1(h)
    }

    /// ψ_λ(T/2) by variation of parameters around the λ = 0 pair.
    pub fn psi_lambda(&self, t_total: f64, lambda: f64) -> Result<f64> {
        let h = 0.5 * t_total;
        let mut ab = [-self.y1(-h), self.x1(-h)];
        let opts = OdeOptions { rtol: 1e-12, ..gy_options() };
        let n_seg = (t_total.ceil() as usize).max(1);
        let seg = t_total / n_seg as f64;
        for k in 0..n_seg {
            let t0 = -h + seg * k as f64;
            let t1 = if k + 1 == n_seg { h } else { t0 + seg };
            integrate(|t, s, d| {
                let x = self.x1(t);
                let y = self.y1(t);
                let psi = s[0] * x + s[1] * y;
                d[0] = lambda * psi * y;
                d[1] = -lambda * psi * x;
            }, t0, &mut ab, t1, &opts)?;
        }
        Ok(ab[0] * self.x1(h) + ab[1] * self.y1(h))
    }

    /// First-order estimate of the eigenvalue closest to zero.
    pub fn lambda0_estimate(&self, t_total: f64) -> f64 {
        let h = 0.5 * t_total;
        let (xp, yp) = (self.x1(h), self.y1(h));
        let (xm, ym) = (self.x1(-h), self.y1(-h));
        let n = ((t_total / self.path.dt()).round() as usize).max(2);
        let dt = t_total / n as f64;
        let mut s = 0.0;
        for i in 0..=n {
            let t = -h + dt * i as f64;
            let (x, y) = (self.x1(t), self.y1(t));
            let p0 = xm * y - ym * x;
            let pt = x * yp - y * xp;
            let wgt = if i == 0 || i == n { 0.5 } else { 1.0 };
            s += wgt * p0 * pt;
        }
        self.psi0(t_total) / (s * dt)
    }

    /// Root of ψ_λ(T/2) near zero.
    pub fn lambda0(&self, t_total: f64) -> Result<f64> {
        let est = self.lambda0_estimate(t_total);
        let (lo, hi) = if est > 0.0 { (0.5 * est, 1.5 * est) } else { (1.5 * est, 0.5 * est) };
        brent(|l| self.psi_lambda(t_total, l).unwrap_or(f64::NAN), lo, hi, 1e-9 * est.abs())
    }
}

/// λ₀(T) over a list of horizons.
pub fn lambda0_scan(path: &InstantonPath, horizons: &[f64]) -> Result<Vec<(f64, f64)>> {
    let tmax = horizons.iter().cloned().fold(0.0, f64::max);
    check_horizons(path, tmax)?;
    let pair = ZeroModePair::new(path, 0.5 * tmax)?;
    horizons.iter().map(|&t| Ok((t, pair.lambda0(t)?))).collect()
}

fn check_horizons(path: &InstantonPath, tmax: f64) -> Result<()> {
    if 0.5 * tmax > path.half_width() - path.dt() {
        return Err(Error::Config(format!(
            "horizon T = {tmax} exceeds the sampled path window ±{}",
            path.half_width()
        )));
    }
    Ok(())
}

/// Default horizon grid [20/ω, 40/ω].
pub fn default_horizons(omega: f64) -> Vec<f64> {
    (0..=8).map(|k| (20.0 + 2.5 * k as f64) / omega).collect()
}

/// Divides the finite-T determinant by its smallest eigenvalue and extrapolates in T.
pub fn zero_mode_removed_ratio(path: &InstantonPath, horizons: &[f64]) -> Result<FluctuationResult> {
    if horizons.is_empty() {
        return Err(Error::Config("empty horizon grid".into()));
    }
    let mut hs = horizons.to_vec();
    hs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let tmax = *hs.last().unwrap();
    check_horizons(path, tmax)?;
    let pair = ZeroModePair::new(path, 0.5 * tmax)?;
    let omega = path.omega_well();
    let mut scan = Vec::with_capacity(hs.len());
    for &t in &hs {
        let psi0 = pair.psi0(t);
        let free = (omega * t).sinh() / omega;
        let ratio_full = psi0 / free;
        let lambda0 = pair.lambda0(t)?;
        scan.push(HorizonPoint { horizon: t, ratio_full, lambda0, ratio_prime: ratio_full / lambda0 });
    }
    let last = *scan.last().unwrap();
    let upper: Vec<f64> = scan.iter().filter(|p| p.horizon >= 0.5 * (hs[0] + tmax)).map(|p| p.ratio_prime).collect();
    let hi = upper.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = upper.iter().cloned().fold(f64::INFINITY, f64::min);
    let spread = ((hi - lo) / last.ratio_prime).abs();
    if !(spread <= 1e-3) {
        return Err(Error::Extrapolation { spread });
    }
    let k = k_coefficient(path.s0, last.ratio_prime, 1.0)?;
    Ok(FluctuationResult {
        ratio_full: last.ratio_full,
        lambda0: last.lambda0,
        ratio_prime: last.ratio_prime,
        negative_mode: pair.psi0(tmax) < 0.0,
        k,
        horizon: tmax,
        scan,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_over_free() {
        let r = gelfand_yaglom_ratio(|_| 1.0, |_| 0.0, 10.0, 0.0).unwrap();
        let exact = 10f64.sinh() / 10.0;
        assert!((r / exact - 1.0).abs() < 1e-6);
    }

    #[test]
    fn bw_trivial() {
        assert!((bargmann_wigner_det(0.0, 0.7, 0.3).unwrap() - 1.0).abs() < 1e-14);
    }
}
