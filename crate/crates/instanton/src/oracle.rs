//! Brute-force reference solvers: finite-difference diagonalization, the
//! charge-basis band problem and coefficient propagation under a drive.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::ode::{integrate, integrate_observed, OdeOptions};
use crate::numerics::tridiag::SymTridiag;
use crate::potential::PotentialModel;

pub const DEFAULT_POINTS: usize = 4096;
pub const DEFAULT_CHARGE_CUTOFF: usize = 128;
pub const BOX_TOLERANCE: f64 = 1e-6;
pub const CUTOFF_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Boundary {
    Box,
    Periodic,
    Bloch { theta: f64 },
}

/// Sampling grid; for charge-basis spectra `lo`/`hi` are the charge range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    pub spacing: f64,
}

impl Grid {
    pub fn x(&self, i: usize) -> f64 {
        self.lo + self.spacing * (i + 1) as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSpectrum {
    pub energies: Vec<f64>,
    /// Grid-normalized states, Σψ²h = 1 (charge basis: Σψ² = 1).
    pub states: Vec<Vec<f64>>,
    pub grid: Grid,
    pub boundary: Boundary,
    pub hbar: f64,
}

fn fix_sign(v: &mut [f64]) {
    let mut best = 0.0f64;
    for &x in v.iter() {
        if x.abs() > best.abs() * (1.0 + 1e-9) {
            best = x;
        }
    }
    if best < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Lowest `k_levels` eigenpairs of −(ħ²/2)∂² + V on `domain` with Dirichlet walls.
pub fn grid_spectrum(
    model: &PotentialModel,
    domain: (f64, f64),
    points: usize,
    hbar: f64,
    k_levels: usize,
) -> Result<OracleSpectrum> {
    let (lo, hi) = domain;
    if !(hi > lo) || points < 3 || k_levels == 0 || k_levels > points {
        return Err(Error::Config(format!("invalid grid {domain:?} with {points} points for {k_levels} levels")));
    }
    if !(hbar > 0.0) {
        return Err(Error::Domain(format!("ħ = {hbar} must be positive")));
    }
    let h = (hi - lo) / (points + 1) as f64;
    let grid = Grid { lo, hi, points, spacing: h };
    let kin = 0.5 * hbar * hbar / (h * h);
    let d: Vec<f64> = (0..points).map(|i| 2.0 * kin + model.evaluate(grid.x(i)).v).collect();
    let e = vec![-kin; points - 1];
    let (energies, vecs) = SymTridiag::new(d, e).lowest_eigenpairs(k_levels);
    let norm = 1.0 / h.sqrt();
    let mut states = Vec::with_capacity(vecs.len());
    for (level, mut v) in vecs.into_iter().enumerate() {
        fix_sign(&mut v);
        let peak = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let edge = v[0].abs().max(v[points - 1].abs()) / peak;
        if edge > BOX_TOLERANCE {
            return Err(Error::Box { level, amplitude: edge });
        }
        states.push(v.into_iter().map(|x| x * norm).collect());
    }
    Ok(OracleSpectrum { energies, states, grid, boundary: Boundary::Box, hbar })
}

/// Eigenpairs of E_C(N + θ/2π)² − (E_J/2)(|N+1⟩⟨N| + h.c.), N ∈ [−c, c].
pub fn bloch_spectrum(ec: f64, ej: f64, theta: f64, cutoff: usize, k_levels: usize) -> Result<OracleSpectrum> {
    if !(ec > 0.0) || ej < 0.0 || cutoff == 0 || k_levels == 0 || k_levels > 2 * cutoff + 1 {
        return Err(Error::Config(format!(
            "invalid charge problem E_C = {ec}, E_J = {ej}, cutoff {cutoff}, {k_levels} levels"
        )));
    }
    let n = 2 * cutoff + 1;
    let ng = theta / (2.0 * PI);
    let d: Vec<f64> = (0..n).map(|i| {
        let q = i as f64 - cutoff as f64 + ng;
        ec * q * q
    }).collect();
    let e = vec![-0.5 * ej; n - 1];
    let (energies, vecs) = SymTridiag::new(d, e).lowest_eigenpairs(k_levels);
    let mut states = Vec::with_capacity(vecs.len());
    for mut v in vecs {
        fix_sign(&mut v);
        let top = v[0].abs().max(v[n - 1].abs());
        if top > CUTOFF_TOLERANCE {
            return Err(Error::Cutoff { amplitude: top });
        }
        states.push(v);
    }
    let grid = Grid { lo: -(cutoff as f64), hi: cutoff as f64, points: n, spacing: 1.0 };
    Ok(OracleSpectrum { energies, states, grid, boundary: Boundary::Bloch { theta }, hbar: (2.0 * ec).sqrt() })
}

/// Smallest charge cutoff meeting 20 + 4√(E_J/E_C).
pub fn minimum_cutoff(ec: f64, ej: f64) -> usize {
    (20.0 + 4.0 * (ej / ec).sqrt()).ceil() as usize
}

/// Ground band E₀(θ) over a θ grid.
pub fn ground_band(ec: f64, ej: f64, cutoff: usize, thetas: &[f64]) -> Result<Vec<(f64, f64)>> {
    thetas.iter().map(|&t| Ok((t, bloch_spectrum(ec, ej, t, cutoff, 1)?.energies[0]))).collect()
}

/// Width of the ground band from phase-space shooting at E₀(θ = π/2).
///
/// With ψ_a, ψ_b solving −E_Cψ″ − E_J cos φ ψ = Eψ from φ = π (ψ_a = 1, ψ_a′ = 0;
/// ψ_b = 0, ψ_b′ = 1), the band E₀(θ) has width |E_C / ∫₀^π ψ_aψ_b dφ|. Unlike
/// differencing two eigenvalues this keeps full relative precision when the
/// band is exponentially narrow.
pub fn mathieu_bandwidth(ec: f64, ej: f64, cutoff: usize) -> Result<f64> {
    let e = bloch_spectrum(ec, ej, 0.5 * PI, cutoff, 1)?.energies[0];
    let opts = OdeOptions { rtol: 1e-13, atol: 1e-300, h_init: 1e-4, h_max: 0.0, max_steps: 10_000_000 };
    let mut y = [1.0, 0.0, 0.0, 1.0, 0.0];
    integrate(|phi, y, dy| {
        let q = -(e + ej * phi.cos()) / ec;
        dy[0] = y[1];
        dy[1] = q * y[0];
        dy[2] = y[3];
        dy[3] = q * y[2];
        dy[4] = -y[0] * y[2];
    }, PI, &mut y, 0.0, &opts)?;
    Ok((ec / y[4]).abs())
}

/// ⟨n|f(x)|m⟩ by grid quadrature.
pub fn matrix_elements(spec: &OracleSpectrum, op: impl Fn(f64) -> f64) -> Result<Vec<Vec<f64>>> {
    if spec.boundary != Boundary::Box {
        return Err(Error::Validation("coordinate matrix elements need a real-space grid".into()));
    }
    let n = spec.states.len();
    if spec.states.iter().any(|s| s.len() != spec.grid.points) {
        return Err(Error::Validation("state length does not match the grid".into()));
    }
    let w: Vec<f64> = (0..spec.grid.points).map(|i| op(spec.grid.x(i)) * spec.grid.spacing).collect();
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let s: f64 = spec.states[i].iter().zip(&spec.states[j]).zip(&w).map(|((a, b), c)| a * b * c).sum();
            m[i][j] = s;
            m[j][i] = s;
        }
    }
    Ok(m)
}

/// Drive envelope shapes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Envelope {
    Constant,
    Square { t_on: f64, t_off: f64 },
    Gaussian { center: f64, width: f64 },
}

impl Envelope {
    pub fn at(&self, t: f64) -> f64 {
        match *self {
            Envelope::Constant => 1.0,
            Envelope::Square { t_on, t_off } => {
                if t >= t_on && t < t_off {
                    1.0
                } else {
                    0.0
                }
            }
            Envelope::Gaussian { center, width } => {
                let u = (t - center) / width;
                (-0.5 * u * u).exp()
            }
        }
    }
}

/// Coupling ε(t)·cos(ω_d t + φ)·x added to the Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Drive {
    pub amplitude: f64,
    pub envelope: Envelope,
    pub omega_d: f64,
    pub phase: f64,
}

impl Drive {
    pub fn none() -> Self {
        Drive { amplitude: 0.0, envelope: Envelope::Constant, omega_d: 0.0, phase: 0.0 }
    }

    pub fn at(&self, t: f64) -> f64 {
        self.amplitude * self.envelope.at(t) * (self.omega_d * t + self.phase).cos()
    }
}

/// Truncated Hamiltonian E_n δ_nm + drive(t)·X_nm in the lab frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSystem {
    pub energies: Vec<f64>,
    pub coupling: Vec<Vec<f64>>,
    pub hbar: f64,
}

impl LevelSystem {
    /// First `levels` states of a grid spectrum, coupled through x.
    pub fn from_spectrum(spec: &OracleSpectrum, levels: usize) -> Result<Self> {
        if levels == 0 || levels > spec.energies.len() {
            return Err(Error::Config(format!("{levels} levels requested from {}", spec.energies.len())));
        }
        let x = matrix_elements(spec, |x| x)?;
        let coupling = x.iter().take(levels).map(|r| r[..levels].to_vec()).collect();
        Ok(LevelSystem { energies: spec.energies[..levels].to_vec(), coupling, hbar: spec.hbar })
    }

    fn rhs(&self, drive: &Drive, t: f64, y: &[f64], dy: &mut [f64]) {
        let n = self.energies.len();
        let f = drive.at(t);
        for i in 0..n {
            let (mut hr, mut hi) = (self.energies[i] * y[2 * i], self.energies[i] * y[2 * i + 1]);
            if f != 0.0 {
                for j in 0..n {
                    let c = f * self.coupling[i][j];
                    hr += c * y[2 * j];
                    hi += c * y[2 * j + 1];
                }
            }
            // iħ dC/dt = H C
            dy[2 * i] = hi / self.hbar;
            dy[2 * i + 1] = -hr / self.hbar;
        }
    }
}

/// Complex amplitudes stored as (re, im) pairs.
pub type Amplitudes = Vec<(f64, f64)>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Populations {
    pub times: Vec<f64>,
    /// populations[k][n] = |C_n(t_k)|².
    pub populations: Vec<Vec<f64>>,
    pub final_state: Amplitudes,
    pub max_norm_error: f64,
    pub steps: usize,
}

pub const NORM_TOLERANCE: f64 = 1e-6;

fn propagation_options() -> OdeOptions {
    OdeOptions { rtol: 1e-12, atol: 1e-14, h_init: 1e-3, h_max: 0.0, max_steps: 50_000_000 }
}

fn pack(c: &[(f64, f64)]) -> Vec<f64> {
    c.iter().flat_map(|&(a, b)| [a, b]).collect()
}

fn norm2(y: &[f64]) -> f64 {
    y.iter().map(|v| v * v).sum()
}

/// Integrates iħ Ċ = H(t) C from t_span.0 to t_span.1 (either direction),
/// sampling populations at `samples` evenly spaced times.
pub fn propagate_populations(
    sys: &LevelSystem,
    drive: &Drive,
    t_span: (f64, f64),
    c0: &[(f64, f64)],
    samples: usize,
) -> Result<Populations> {
    let n = sys.energies.len();
    if c0.len() != n {
        return Err(Error::Config(format!("initial state has {} entries for {n} levels", c0.len())));
    }
    let mut y = pack(c0);
    let n0 = norm2(&y);
    if (n0 - 1.0).abs() > 1e-12 {
        return Err(Error::Config(format!("initial state norm {n0} is not 1")));
    }
    let samples = samples.max(2);
    let (t0, t1) = t_span;
    let dt = (t1 - t0) / (samples - 1) as f64;
    let opts = propagation_options();
    let mut times = vec![t0];
    let mut populations = vec![pops(&y)];
    let mut max_err: f64 = 0.0;
    let mut steps = 0;
    let mut t = t0;
    for k in 1..samples {
        let tk = if k + 1 == samples { t1 } else { t0 + dt * k as f64 };
        let stats = integrate_observed(
            &mut |s: f64, y: &[f64], d: &mut [f64]| sys.rhs(drive, s, y, d),
            t,
            &mut y,
            tk,
            &opts,
            |_, y| max_err = max_err.max((norm2(y) - 1.0).abs()),
        )?;
        steps += stats.accepted;
        if max_err > NORM_TOLERANCE {
            return Err(Error::Integration(format!("norm drift {max_err:e} exceeds {NORM_TOLERANCE:e}")));
        }
        t = tk;
        times.push(t);
        populations.push(pops(&y));
    }
    let final_state = y.chunks(2).map(|c| (c[0], c[1])).collect();
    Ok(Populations { times, populations, final_state, max_norm_error: max_err, steps })
}

fn pops(y: &[f64]) -> Vec<f64> {
    y.chunks(2).map(|c| c[0] * c[0] + c[1] * c[1]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_ground_state() {
        let m = PotentialModel::harmonic(1.0).unwrap();
        let s = grid_spectrum(&m, (-10.0, 10.0), 4096, 1.0, 3).unwrap();
        assert!((s.energies[0] - 0.5).abs() < 1e-5);
        assert!((s.energies[2] - 2.5).abs() < 1e-4);
    }

    #[test]
    fn free_charge_parabola() {
        let th = 1.1;
        let s = bloch_spectrum(1.0, 0.0, th, 40, 1).unwrap();
        assert!((s.energies[0] - (th / (2.0 * PI)).powi(2)).abs() < 1e-10);
    }
}
