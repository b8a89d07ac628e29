//! Zero-energy Euclidean paths (kinks and bounces), their action and the
//! asymptotic coefficient of the normalized zero mode.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::ode::{integrate, OdeOptions};
use crate::numerics::quad::{tanh_sinh, GaussLegendre};
use crate::numerics::spline::quintic_hermite;
use crate::potential::PotentialModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathKind {
    Kink,
    Bounce,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    pub t: f64,
    pub x: f64,
    pub xdot: f64,
}

/// Uniform time grid centred on `center_time`; `step` and `horizon` are in units of 1/ω.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub step: f64,
    /// Half-width of the sampled window.
    pub horizon: f64,
    pub center_time: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { step: 0.01, horizon: 40.0, center_time: 0.0 }
    }
}

/// Tail-fit window on the normalized zero mode.
pub const TAIL_WINDOW: (f64, f64) = (1e-8, 1e-3);
const TAIL_MIN_R2: f64 = 0.9999;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstantonPath {
    pub kind: PathKind,
    pub samples: Vec<PathSample>,
    #[serde(rename = "S0")]
    pub s0: f64,
    pub omega: f64,
    #[serde(rename = "A")]
    pub a: f64,
    pub jacobian: f64,
    pub center_time: f64,
    /// Well the path starts from (and returns to, for a bounce).
    pub well: f64,
    /// Far endpoint: second well for a kink, exit point σ for a bounce.
    pub end: f64,
    #[serde(skip)]
    internals: Internals,
}

#[derive(Debug, Clone, Default)]
struct Internals {
    model: Option<PotentialModel>,
    dt: f64,
    anchor: Vec<f64>,
    offset: Vec<f64>,
    accel: Vec<f64>,
    w: Vec<f64>,
}

fn ode_opts() -> OdeOptions {
    OdeOptions { rtol: 1e-13, atol: 1e-300, h_init: 1e-3, h_max: 0.0, max_steps: 10_000_000 }
}

fn well_frequency(model: &PotentialModel, x: f64) -> Result<f64> {
    let d2 = model.evaluate(x).d2v;
    if !(d2 > 0.0) {
        return Err(Error::Singularity(format!(
            "V'' = {d2} at endpoint {x}: the minimum is not quadratic"
        )));
    }
    Ok(d2.sqrt())
}

fn classify(model: &PotentialModel, x_start: f64, x_end: f64) -> Result<PathKind> {
    let e = model.excess(x_start, x_end - x_start);
    let at_end = model.evaluate(x_end);
    let scale = model.length_scale();
    let vscale = model.evaluate(x_start).d2v.abs() * scale * scale;
    if e.v.abs() > 1e-9 * vscale.max(1e-300) {
        return Err(Error::Domain(format!(
            "endpoints are not at equal potential: V(end) - V(start) = {:e}",
            e.v
        )));
    }
    if at_end.dv.abs() <= 1e-7 * at_end.d2v.abs() * scale {
        Ok(PathKind::Kink)
    } else {
        Ok(PathKind::Bounce)
    }
}

fn check_positive_between(model: &PotentialModel, x_start: f64, x_end: f64) -> Result<()> {
    let n = 400;
    for i in 1..n {
        let x = x_start + (x_end - x_start) * i as f64 / n as f64;
        let v = model.excess(x_start, x - x_start).v;
        if v < 0.0 {
            return Err(Error::Domain(format!("V < 0 inside the interval at x = {x}")));
        }
    }
    Ok(())
}

/// Euclidean action ∫√(2V) dx between the endpoints (doubled for a bounce),
/// by composite Gauss–Legendre with the x = σ − u² substitution at turning points.
pub fn action(model: &PotentialModel, x_start: f64, x_end: f64) -> Result<f64> {
    let kind = classify(model, x_start, x_end)?;
    well_frequency(model, x_start)?;
    check_positive_between(model, x_start, x_end)?;
    let gl = GaussLegendre::new(20);
    let d = (x_end - x_start).signum();
    let mid = 0.5 * (x_start + x_end);
    let f_near = |anchor: f64, x: f64| (2.0 * model.excess_at_stationary(anchor, x - anchor).v.max(0.0)).sqrt();
    let first = gl.integrate(|x| f_near(x_start, x), x_start.min(mid), x_start.max(mid), 24);
    match kind {
        PathKind::Kink => {
            well_frequency(model, x_end)?;
            let second = gl.integrate(|x| f_near(x_end, x), mid.min(x_end), mid.max(x_end), 24);
            Ok(first + second)
        }
        PathKind::Bounce => {
            let umax = (x_end - mid).abs().sqrt();
            let second = gl.integrate(
                |u| {
                    let h = -d * u * u;
                    (2.0 * model.excess(x_end, h).v.max(0.0)).sqrt() * 2.0 * u
                },
                0.0,
                umax,
                24,
            );
            Ok(2.0 * (first + second))
        }
    }
}

/// Same action by tanh-sinh quadrature on the untransformed integrand.
pub fn action_tanh_sinh(model: &PotentialModel, x_start: f64, x_end: f64) -> Result<f64> {
    let kind = classify(model, x_start, x_end)?;
    well_frequency(model, x_start)?;
    let (lo, hi) = (x_start.min(x_end), x_start.max(x_end));
    let start_is_lo = x_start <= x_end;
    let r = tanh_sinh(
        |_, da, db| {
            let (anchor, h) = if da <= db {
                let a = if start_is_lo { x_start } else { x_end };
                (a, da)
            } else {
                let b = if start_is_lo { x_end } else { x_start };
                (b, -db)
            };
            let stationary = anchor == x_start || kind == PathKind::Kink;
            let e = if stationary { model.excess_at_stationary(anchor, h) } else { model.excess(anchor, h) };
            (2.0 * e.v.max(0.0)).sqrt()
        },
        lo,
        hi,
        1e-14,
    );
    Ok(match kind {
        PathKind::Kink => r.value,
        PathKind::Bounce => 2.0 * r.value,
    })
}

impl InstantonPath {
    pub fn model(&self) -> &PotentialModel {
        self.internals.model.as_ref().expect("path carries its model")
    }

    /// Grid spacing in time.
    pub fn dt(&self) -> f64 {
        self.internals.dt
    }

    fn excess_from(&self, anchor: f64, h: f64) -> crate::potential::Eval {
        let m = self.model();
        if anchor == self.well || (self.kind == PathKind::Kink && anchor == self.end) {
            m.excess_at_stationary(anchor, h)
        } else {
            m.excess(anchor, h)
        }
    }

    /// Sample times relative to the centre.
    pub fn tau(&self, i: usize) -> f64 {
        self.samples[i].t - self.center_time
    }

    /// Index of the centre sample.
    pub fn center_index(&self) -> usize {
        self.samples.len() / 2
    }

    /// Half-width of the sampled window.
    pub fn half_width(&self) -> f64 {
        self.internals.dt * self.center_index() as f64
    }

    /// Excess potential ½ẋ² should equal, evaluated without cancellation.
    pub fn shifted_potential(&self, i: usize) -> f64 {
        self.excess_from(self.internals.anchor[i], self.internals.offset[i]).v
    }

    /// Largest relative violation of ½ẋ² = V(x) − V(well) over samples.
    pub fn energy_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, s) in self.samples.iter().enumerate() {
            let v = self.shifted_potential(i);
            let k = 0.5 * s.xdot * s.xdot;
            if v > 0.0 {
                worst = worst.max((k - v).abs() / v);
            }
        }
        worst
    }

    /// ∫ẋ² dt on the sample grid.
    pub fn kinetic_integral(&self) -> f64 {
        let y: Vec<f64> = self.samples.iter().map(|s| s.xdot * s.xdot).collect();
        crate::numerics::quad::trapezoid(&y, self.internals.dt)
    }

    /// Normalized zero mode x₁ = ẋ/√S₀ and its derivative at sample `i`.
    pub fn zero_mode_sample(&self, i: usize) -> (f64, f64) {
        let n = self.s0.sqrt();
        (self.samples[i].xdot / n, self.internals.accel[i] / n)
    }

    fn locate(&self, tau: f64) -> Option<(usize, f64)> {
        let dt = self.internals.dt;
        let c = self.center_index() as f64;
        let s = tau / dt + c;
        if s < 0.0 || s > (self.samples.len() - 1) as f64 {
            return None;
        }
        let i = (s.floor() as usize).min(self.samples.len() - 2);
        Some((i, self.tau(i)))
    }

    /// Fluctuation potential W(τ) = V″(x_c(τ)) with τ relative to the centre;
    /// outside the sampled window the well value ω² is returned.
    pub fn w_at(&self, tau: f64) -> f64 {
        let Some((i, t0)) = self.locate(tau) else {
            return self.omega_well().powi(2);
        };
        let it = &self.internals;
        let j = i + 1;
        // express both nodes relative to the outer anchor
        let outer = if self.tau(i).abs() >= self.tau(j).abs() { i } else { j };
        let anchor = it.anchor[outer];
        let h0 = (it.anchor[i] - anchor) + it.offset[i];
        let h1 = (it.anchor[j] - anchor) + it.offset[j];
        let (h, _) = quintic_hermite(
            t0,
            it.dt,
            h0,
            self.samples[i].xdot,
            it.accel[i],
            h1,
            self.samples[j].xdot,
            it.accel[j],
            tau,
        );
        self.excess_from(anchor, h).d2v
    }

    /// Normalized zero mode x₁(τ) and x₁′(τ) by quintic Hermite interpolation.
    pub fn zero_mode_at(&self, tau: f64) -> (f64, f64) {
        let Some((i, t0)) = self.locate(tau) else {
            let w = self.omega_well();
            let (k, sign) = if tau > 0.0 { (self.samples.len() - 1, 1.0) } else { (0, -1.0) };
            let (x, _) = self.zero_mode_sample(k);
            let dtau = tau - self.tau(k);
            let v = x * (-w * dtau.abs()).exp();
            return (v, -sign * w * v);
        };
        let j = i + 1;
        let (y0, d0) = self.zero_mode_sample(i);
        let (y1, d1) = self.zero_mode_sample(j);
        let s0 = self.internals.w[i] * y0;
        let s1 = self.internals.w[j] * y1;
        quintic_hermite(t0, self.internals.dt, y0, d0, s0, y1, d1, s1, tau)
    }

    /// √V″ at the starting well.
    pub fn omega_well(&self) -> f64 {
        self.model().evaluate(self.well).d2v.sqrt()
    }

    /// Stored fluctuation potential at sample `i`.
    pub fn w_sample(&self, i: usize) -> f64 {
        self.internals.w[i]
    }
}

/// Integrates the zero-energy path between `x_start` (a well) and `x_end`
/// (a degenerate well for a kink, the exit point for a bounce).
pub fn solve_path(model: &PotentialModel, x_start: f64, x_end: f64, grid: &GridSpec) -> Result<InstantonPath> {
    if !(grid.step > 0.0 && grid.horizon > grid.step) {
        return Err(Error::Config(format!("invalid grid step {} / horizon {}", grid.step, grid.horizon)));
    }
    let kind = classify(model, x_start, x_end)?;
    let omega = well_frequency(model, x_start)?;
    if kind == PathKind::Kink {
        well_frequency(model, x_end)?;
    }
    check_positive_between(model, x_start, x_end)?;
    let s0 = action(model, x_start, x_end)?;
    let dt = grid.step / omega;
    let m = (grid.horizon / grid.step).round() as usize;
    let d = (x_end - x_start).signum();

    // positive-time half: (anchor, offset, xdot) per grid point, τ = i·dt
    let mut pos: Vec<(f64, f64, f64)> = Vec::with_capacity(m + 1);
    let mut neg: Vec<(f64, f64, f64)> = Vec::with_capacity(m + 1);
    let is_well = |anchor: f64| anchor == x_start || (kind == PathKind::Kink && anchor == x_end);
    let exc = |anchor: f64, h: f64| {
        if is_well(anchor) {
            model.excess_at_stationary(anchor, h)
        } else {
            model.excess(anchor, h)
        }
    };
    let speed = |anchor: f64, h: f64| (2.0 * exc(anchor, h).v.max(0.0)).sqrt();
    let opts = ode_opts();
    match kind {
        PathKind::Kink => {
            let mid = 0.5 * (x_start + x_end);
            // t > 0: x = x_end − d·u
            let mut u = [(x_end - mid).abs()];
            pos.push((x_end, -d * u[0], d * speed(x_end, -d * u[0])));
            for i in 0..m {
                integrate(
                    |_, y, dy| dy[0] = -speed(x_end, -d * y[0].max(0.0)),
                    i as f64 * dt,
                    &mut u,
                    (i + 1) as f64 * dt,
                    &opts,
                )?;
                pos.push((x_end, -d * u[0], d * speed(x_end, -d * u[0])));
            }
            // t < 0: x = x_start + d·u
            let mut u = [(mid - x_start).abs()];
            neg.push((x_start, d * u[0], d * speed(x_start, d * u[0])));
            for i in 0..m {
                integrate(
                    |_, y, dy| dy[0] = speed(x_start, d * y[0].max(0.0)),
                    -(i as f64) * dt,
                    &mut u,
                    -((i + 1) as f64) * dt,
                    &opts,
                )?;
                neg.push((x_start, d * u[0], d * speed(x_start, d * u[0])));
            }
        }
        PathKind::Bounce => {
            let sigma = x_end;
            let dist = (sigma - x_start).abs();
            let slope = -d * model.evaluate(sigma).dv;
            if !(slope > 0.0) {
                return Err(Error::Domain("exit point is not a simple turning point".into()));
            }
            // phase 1: x = σ − d·s², ṡ = √(2ΔV/s²)/2
            let q = |s: f64| -> f64 {
                let s2 = s * s;
                if s2 < 1e-12 * dist {
                    slope - 0.5 * model.evaluate(sigma).d2v * s2
                } else {
                    model.excess(sigma, -d * s2).v / s2
                }
            };
            let mut s = [0.0];
            pos.push((sigma, 0.0, 0.0));
            let mut i = 0;
            while i < m {
                integrate(
                    |_, y, dy| dy[0] = 0.5 * (2.0 * q(y[0]).max(0.0)).sqrt(),
                    i as f64 * dt,
                    &mut s,
                    (i + 1) as f64 * dt,
                    &opts,
                )?;
                i += 1;
                let h = -d * s[0] * s[0];
                pos.push((sigma, h, -d * speed(sigma, h)));
                if s[0] * s[0] > 0.5 * dist {
                    break;
                }
            }
            // phase 2: x = well + d·u
            let mut u = [dist - s[0] * s[0]];
            if let Some(last) = pos.last_mut() {
                *last = (x_start, d * u[0], -d * speed(x_start, d * u[0]));
            }
            while i < m {
                integrate(
                    |_, y, dy| dy[0] = -speed(x_start, d * y[0].max(0.0)),
                    i as f64 * dt,
                    &mut u,
                    (i + 1) as f64 * dt,
                    &opts,
                )?;
                i += 1;
                pos.push((x_start, d * u[0], -d * speed(x_start, d * u[0])));
            }
            neg = pos.iter().map(|&(a, h, v)| (a, h, -v)).collect();
        }
    }

    let n = 2 * m + 1;
    let mut samples = Vec::with_capacity(n);
    let mut anchor = Vec::with_capacity(n);
    let mut offset = Vec::with_capacity(n);
    let mut accel = Vec::with_capacity(n);
    let mut w = Vec::with_capacity(n);
    let mut push = |tau: f64, (a, h, v): (f64, f64, f64)| {
        let e = exc(a, h);
        samples.push(PathSample { t: grid.center_time + tau, x: a + h, xdot: v });
        anchor.push(a);
        offset.push(h);
        accel.push(e.dv);
        w.push(e.d2v);
    };
    for k in (1..=m).rev() {
        push(-(k as f64) * dt, neg[k]);
    }
    push(0.0, pos[0]);
    for (k, p) in pos.iter().enumerate().skip(1) {
        push(k as f64 * dt, *p);
    }

    let mut path = InstantonPath {
        kind,
        samples,
        s0,
        omega,
        a: f64::NAN,
        jacobian: s0.sqrt(),
        center_time: grid.center_time,
        well: x_start,
        end: x_end,
        internals: Internals { model: Some(model.clone()), dt, anchor, offset, accel, w },
    };
    let (a, om) = asymptotic_coefficient(&path)?;
    path.a = a;
    path.omega = om;
    Ok(path)
}

/// Fits ln x₁ = ln A − ω|τ| + c·e^{−ω₀|τ|} on one tail; returns (A, ω, R²).
fn fit_tail(path: &InstantonPath, positive: bool, omega0: f64) -> Result<(f64, f64, f64)> {
    let mut rows: Vec<(f64, f64)> = Vec::new();
    let mut reached_floor = false;
    let c = path.center_index();
    // walk inward from the outer end of the tail
    let idx: Box<dyn Iterator<Item = usize>> =
        if positive { Box::new((c..path.samples.len()).rev()) } else { Box::new(0..=c) };
    for i in idx {
        let x1 = path.zero_mode_sample(i).0.abs();
        if x1 < TAIL_WINDOW.0 {
            reached_floor = true;
            continue;
        }
        if x1 > TAIL_WINDOW.1 {
            break;
        }
        rows.push((path.tau(i).abs(), x1.ln()));
    }
    rows.reverse();
    if !reached_floor || rows.len() < 16 {
        return Err(Error::Tail(format!(
            "zero mode does not reach {:e} inside the grid ({} tail samples); extend the horizon",
            TAIL_WINDOW.0,
            rows.len()
        )));
    }
    // least squares for [α, β, γ] with basis {1, −τ, e^{−ω₀τ}}
    let mut ata = [[0.0f64; 3]; 3];
    let mut atb = [0.0f64; 3];
    let t_ref = rows[0].0;
    for &(t, y) in &rows {
        let b = [1.0, -(t - t_ref), (-omega0 * t).exp() / (-omega0 * t_ref).exp()];
        for r in 0..3 {
            atb[r] += b[r] * y;
            for s in 0..3 {
                ata[r][s] += b[r] * b[s];
            }
        }
    }
    let m = nalgebra::Matrix3::from_fn(|r, s| ata[r][s]);
    let v = nalgebra::Vector3::from_column_slice(&atb);
    let sol = m
        .lu()
        .solve(&v)
        .ok_or_else(|| Error::Tail("singular tail regression".into()))?;
    let (alpha, beta, gamma) = (sol[0], sol[1], sol[2]);
    let mean = rows.iter().map(|r| r.1).sum::<f64>() / rows.len() as f64;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for &(t, y) in &rows {
        let pred = alpha - beta * (t - t_ref) + gamma * (-omega0 * (t - t_ref)).exp();
        ss_res += (y - pred).powi(2);
        ss_tot += (y - mean).powi(2);
    }
    let r2 = 1.0 - ss_res / ss_tot;
    // α is the intercept at t_ref: ln A = α + β·t_ref
    let ln_a = alpha + beta * t_ref;
    Ok((ln_a.exp(), beta, r2))
}

/// Asymptotic coefficient A of x₁ = S₀^{-1/2}ẋ (x₁ → A·e^{−ω|t|}) and the fitted ω.
/// For paths with unequal tails the geometric mean of the two coefficients is returned.
pub fn asymptotic_coefficient(path: &InstantonPath) -> Result<(f64, f64)> {
    let omega0 = path.omega_well();
    let (ap, wp, rp) = fit_tail(path, true, omega0)?;
    let (an, wn, rn) = fit_tail(path, false, omega0)?;
    if rp < TAIL_MIN_R2 || rn < TAIL_MIN_R2 {
        return Err(Error::Tail(format!("tail is not exponential: R² = {rp:.6}, {rn:.6}")));
    }
    let omega = 0.5 * (wp + wn);
    if ((omega - omega0) / omega0).abs() > 1e-4 {
        return Err(Error::Tail(format!("fitted ω = {omega} disagrees with √V'' = {omega0}")));
    }
    Ok(((ap * an).sqrt(), omega))
}
