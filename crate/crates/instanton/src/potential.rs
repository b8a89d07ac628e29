//! One-dimensional potential families in internal units (m = 1).
//!
//! Every family exposes V, V′, V″ and a cancellation-free excess
//! `V(base + h) − V(base)` so that exponentially small velocities on instanton
//! tails keep full relative precision.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::roots::newton_bisect;
use crate::numerics::spline::PeriodicSpline;

const TAYLOR_ORDER: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// V = ½(x² − ¼)²
    QuarticDoubleWell,
    /// V = ½x² + ½g·x^(2N), g < 0
    PolyBounce { n: u32, g: f64 },
    /// U = E_J(1 − cos δ) − tilt·δ with tilt = flux_factor·I_e (flux_factor defaults to E_J/I_c)
    Washboard { ej: f64, ec: f64, ie: f64, ic: f64, flux_factor: Option<f64> },
    /// U = E_J(1 − cos φ) + E_L(φ − φ_e)²/2
    Flux { ej: f64, ec: f64, el: f64, phi_e: f64 },
    /// U = E_J(1 − cos φ)
    PeriodicCosine { ej: f64, ec: f64 },
    /// V = ½ω²x²
    Harmonic { omega: f64 },
    /// V = ½ω²(|x| − a)²
    ParabolicDoubleWell { omega: f64, a: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eval {
    pub v: f64,
    pub dv: f64,
    pub d2v: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StationaryKind {
    Min,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationaryPoint {
    pub x: f64,
    pub kind: StationaryKind,
    /// √V″ at minima, `None` at maxima.
    pub omega: Option<f64>,
}

/// Turning point reached from a well, with the offset that shifts V(well) to zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExitPoint {
    pub well: f64,
    pub sigma: f64,
    /// Location of the barrier top crossed on the way.
    pub barrier: f64,
    /// Constant c₀ = V(well) removed by the shift.
    pub c0: f64,
    /// True when σ is itself a degenerate minimum (kink rather than bounce).
    pub degenerate: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PotentialModel {
    pub family: Family,
    pub correction: Option<PeriodicSpline>,
}

impl PotentialModel {
    pub fn new(family: Family) -> Result<Self> {
        let m = PotentialModel { family, correction: None };
        m.validate()?;
        Ok(m)
    }

    pub fn quartic_double_well() -> Self {
        PotentialModel { family: Family::QuarticDoubleWell, correction: None }
    }

    /// V = ½x² + ½g·x^(2N).
    pub fn poly_bounce(n: u32, g: f64) -> Result<Self> {
        Self::new(Family::PolyBounce { n, g })
    }

    /// V = ½x² + ¼g·x⁴, the anharmonic-oscillator normalization.
    pub fn quartic_anharmonic(g: f64) -> Result<Self> {
        Self::poly_bounce(2, 0.5 * g)
    }

    pub fn washboard(ej: f64, ec: f64, ie: f64, ic: f64) -> Result<Self> {
        Self::new(Family::Washboard { ej, ec, ie, ic, flux_factor: None })
    }

    pub fn flux(ej: f64, ec: f64, el: f64, phi_e: f64) -> Result<Self> {
        Self::new(Family::Flux { ej, ec, el, phi_e })
    }

    pub fn periodic_cosine(ej: f64, ec: f64) -> Result<Self> {
        Self::new(Family::PeriodicCosine { ej, ec })
    }

    pub fn harmonic(omega: f64) -> Result<Self> {
        Self::new(Family::Harmonic { omega })
    }

    pub fn parabolic_double_well(omega: f64, a: f64) -> Result<Self> {
        Self::new(Family::ParabolicDoubleWell { omega, a })
    }

    /// Builds a model from a family name and a flat parameter map; unknown keys are rejected.
    pub fn from_params(family: &str, params: &BTreeMap<String, f64>) -> Result<Self> {
        let allowed: &[&str] = match family {
            "quartic_double_well" => &[],
            "poly_bounce" => &["n", "g"],
            "washboard" => &["ej", "ec", "ie", "ic", "flux_factor"],
            "flux" => &["ej", "ec", "el", "phi_e"],
            "periodic_cosine" => &["ej", "ec"],
            "harmonic" => &["omega"],
            "parabolic_double_well" => &["omega", "a"],
            other => return Err(Error::Config(format!("unknown family '{other}'"))),
        };
        for k in params.keys() {
            if !allowed.contains(&k.as_str()) {
                return Err(Error::Config(format!("unknown parameter '{k}' for family '{family}'")));
            }
        }
        let get = |k: &str| -> Result<f64> {
            params.get(k).copied().ok_or_else(|| Error::Config(format!("missing parameter '{k}' for family '{family}'")))
        };
        let fam = match family {
            "quartic_double_well" => Family::QuarticDoubleWell,
            "poly_bounce" => {
                let n = get("n")?;
                if n.fract() != 0.0 {
                    return Err(Error::Config(format!("exponent n = {n} must be an integer")));
                }
                Family::PolyBounce { n: n as u32, g: get("g")? }
            }
            "washboard" => Family::Washboard {
                ej: get("ej")?,
                ec: get("ec")?,
                ie: get("ie")?,
                ic: get("ic")?,
                flux_factor: params.get("flux_factor").copied(),
            },
            "flux" => Family::Flux { ej: get("ej")?, ec: get("ec")?, el: get("el")?, phi_e: get("phi_e")? },
            "periodic_cosine" => Family::PeriodicCosine { ej: get("ej")?, ec: get("ec")? },
            "harmonic" => Family::Harmonic { omega: get("omega")? },
            _ => Family::ParabolicDoubleWell { omega: get("omega")?, a: get("a")? },
        };
        Self::new(fam)
    }

    /// Named parameters of the family.
    pub fn params(&self) -> BTreeMap<String, f64> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: f64| {
            m.insert(k.to_string(), v);
        };
        match self.family {
            Family::QuarticDoubleWell => {}
            Family::PolyBounce { n, g } => {
                put("n", n as f64);
                put("g", g);
            }
            Family::Washboard { ej, ec, ie, ic, flux_factor } => {
                put("ej", ej);
                put("ec", ec);
                put("ie", ie);
                put("ic", ic);
                if let Some(f) = flux_factor {
                    put("flux_factor", f);
                }
            }
            Family::Flux { ej, ec, el, phi_e } => {
                put("ej", ej);
                put("ec", ec);
                put("el", el);
                put("phi_e", phi_e);
            }
            Family::PeriodicCosine { ej, ec } => {
                put("ej", ej);
                put("ec", ec);
            }
            Family::Harmonic { omega } => put("omega", omega),
            Family::ParabolicDoubleWell { omega, a } => {
                put("omega", omega);
                put("a", a);
            }
        }
        m
    }

    fn validate(&self) -> Result<()> {
        let pos = |name: &str, v: f64| -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive and finite, got {v}")))
            }
        };
        match self.family {
            Family::QuarticDoubleWell => Ok(()),
            Family::PolyBounce { n, g } => {
                if n < 2 {
                    return Err(Error::Config(format!("exponent N = {n} must be >= 2")));
                }
                if !(g.is_finite() && g < 0.0) {
                    return Err(Error::Config(format!("coupling g = {g} must be negative")));
                }
                Ok(())
            }
            Family::Washboard { ej, ec, ie, ic, flux_factor } => {
                pos("ej", ej)?;
                pos("ec", ec)?;
                pos("ic", ic)?;
                if !(ie.is_finite() && ie >= 0.0) {
                    return Err(Error::Config(format!("ie = {ie} must be non-negative")));
                }
                if let Some(f) = flux_factor {
                    pos("flux_factor", f)?;
                }
                Ok(())
            }
            Family::Flux { ej, ec, el, phi_e } => {
                pos("ej", ej)?;
                pos("ec", ec)?;
                pos("el", el)?;
                if !phi_e.is_finite() {
                    return Err(Error::Config("phi_e must be finite".into()));
                }
                Ok(())
            }
            Family::PeriodicCosine { ej, ec } => {
                pos("ej", ej)?;
                pos("ec", ec)
            }
            Family::Harmonic { omega } => {
                if omega.is_finite() && omega >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::Config(format!("omega = {omega} must be non-negative")))
                }
            }
            Family::ParabolicDoubleWell { omega, a } => {
                pos("omega", omega)?;
                pos("a", a)
            }
        }
    }

    /// Adds a periodic correction ε(x) to the potential.
    pub fn with_correction(mut self, eps: PeriodicSpline) -> Self {
        self.correction = Some(eps);
        self
    }

    /// Effective ħ for families whose kinetic term is −E_C∂², i.e. √(2E_C).
    pub fn effective_hbar(&self) -> Option<f64> {
        match self.family {
            Family::Washboard { ec, .. } | Family::Flux { ec, .. } | Family::PeriodicCosine { ec, .. } => {
                Some((2.0 * ec).sqrt())
            }
            _ => None,
        }
    }

    /// Linear tilt coefficient of the washboard, zero otherwise.
    pub fn tilt(&self) -> f64 {
        match self.family {
            Family::Washboard { ej, ie, ic, flux_factor, .. } => flux_factor.unwrap_or(ej / ic) * ie,
            _ => 0.0,
        }
    }

    /// tilt / E_J for the washboard (equals I_e/I_c when E_J = (ħ/2e)I_c).
    pub fn tilt_ratio(&self) -> Option<f64> {
        match self.family {
            Family::Washboard { ej, .. } => Some(self.tilt() / ej),
            _ => None,
        }
    }

    /// Spatial period for periodic-like families.
    pub fn period(&self) -> Option<f64> {
        match self.family {
            Family::Washboard { .. } | Family::PeriodicCosine { .. } => Some(2.0 * PI),
            _ => None,
        }
    }

    /// Characteristic length used for search windows and Taylor radii.
    pub fn length_scale(&self) -> f64 {
        match self.family {
            Family::QuarticDoubleWell => 0.5,
            Family::PolyBounce { n, g } => (-1.0 / g).powf(1.0 / (2.0 * n as f64 - 2.0)),
            Family::Washboard { .. } | Family::PeriodicCosine { .. } | Family::Flux { .. } => 1.0,
            Family::Harmonic { omega } => {
                if omega > 0.0 {
                    1.0 / omega.sqrt()
                } else {
                    1.0
                }
            }
            Family::ParabolicDoubleWell { a, .. } => a,
        }
    }

    /// Derivatives of the family part, V^(k)(x) for k = 0..TAYLOR_ORDER.
    fn derivatives(&self, x: f64) -> [f64; TAYLOR_ORDER] {
        let mut d = [0.0; TAYLOR_ORDER];
        match self.family {
            Family::QuarticDoubleWell => {
                let q = x * x - 0.25;
                d[0] = 0.5 * q * q;
                d[1] = 2.0 * x * q;
                d[2] = 6.0 * x * x - 0.5;
                d[3] = 12.0 * x;
                d[4] = 12.0;
            }
            Family::PolyBounce { n, g } => {
                let p = 2 * n as usize;
                d[0] = 0.5 * x * x;
                d[1] = x;
                d[2] = 1.0;
                let mut coef = 0.5 * g;
                for (k, dk) in d.iter_mut().enumerate() {
                    if k > p {
                        break;
                    }
                    *dk += coef * x.powi((p - k) as i32);
                    coef *= (p - k) as f64;
                }
            }
            Family::Washboard { ej, .. } | Family::PeriodicCosine { ej, .. } | Family::Flux { ej, .. } => {
                let (s, c) = x.sin_cos();
                d[0] = ej * (1.0 - c);
                let cyc = [s, c, -s, -c];
                for (k, dk) in d.iter_mut().enumerate().skip(1) {
                    *dk = ej * cyc[(k - 1) % 4];
                }
                match self.family {
                    Family::Washboard { .. } => {
                        let t = self.tilt();
                        d[0] -= t * x;
                        d[1] -= t;
                    }
                    Family::Flux { el, phi_e, .. } => {
                        let y = x - phi_e;
                        d[0] += 0.5 * el * y * y;
                        d[1] += el * y;
                        d[2] += el;
                    }
                    _ => {}
                }
            }
            Family::Harmonic { omega } => {
                let w2 = omega * omega;
                d[0] = 0.5 * w2 * x * x;
                d[1] = w2 * x;
                d[2] = w2;
            }
            Family::ParabolicDoubleWell { omega, a } => {
                let w2 = omega * omega;
                let y = x.abs() - a;
                d[0] = 0.5 * w2 * y * y;
                d[1] = w2 * y * x.signum();
                d[2] = w2;
            }
        }
        d
    }

    fn taylor_radius(&self) -> f64 {
        match self.family {
            Family::Harmonic { .. } | Family::ParabolicDoubleWell { .. } | Family::QuarticDoubleWell => f64::INFINITY,
            Family::PolyBounce { n, .. } if n <= 4 => f64::INFINITY,
            _ => 0.05 * self.length_scale(),
        }
    }

    /// V, V′ and V″ at `x`.
    pub fn evaluate(&self, x: f64) -> Eval {
        let d = self.derivatives(x);
        let mut e = Eval { v: d[0], dv: d[1], d2v: d[2] };
        if let Some(s) = &self.correction {
            let (v, dv, d2v) = s.eval(x);
            e.v += v;
            e.dv += dv;
            e.d2v += d2v;
        }
        e
    }

    /// V(base + h) − V(base) together with V′ and V″ at base + h, free of
    /// cancellation for small `h`.
    pub fn excess(&self, base: f64, h: f64) -> Eval {
        self.excess_impl(base, h, false)
    }

    /// [`Self::excess`] about a point known to be stationary: the rounding
    /// residual of V′(base) is dropped so the excess stays quadratic in `h`.
    pub fn excess_at_stationary(&self, base: f64, h: f64) -> Eval {
        self.excess_impl(base, h, true)
    }

    fn excess_impl(&self, base: f64, h: f64, stationary: bool) -> Eval {
        let x = base + h;
        let crosses_kink = matches!(self.family, Family::ParabolicDoubleWell { .. }) && (base * x <= 0.0);
        let taylor = h.abs() <= self.taylor_radius() && !crosses_kink;
        let mut e = if taylor {
            let mut d = self.derivatives(base);
            if stationary {
                d[1] = 0.0;
            }
            let mut dv = 0.0;
            let mut v1 = 0.0;
            let mut v2 = 0.0;
            // Horner evaluation of Σ d_k h^k / k! and its first two derivatives
            for k in (1..TAYLOR_ORDER).rev() {
                dv = dv * h / (k as f64 + 1.0) + d[k];
            }
            dv *= h;
            for k in (1..TAYLOR_ORDER).rev() {
                v1 = v1 * h / k as f64 + d[k];
            }
            for k in (2..TAYLOR_ORDER).rev() {
                v2 = v2 * h / (k as f64 - 1.0) + d[k];
            }
            Eval { v: dv, dv: v1, d2v: v2 }
        } else {
            let d0 = self.derivatives(base);
            let d1 = self.derivatives(x);
            Eval { v: d1[0] - d0[0], dv: d1[1], d2v: d1[2] }
        };
        if let Some(s) = &self.correction {
            let (_, db, ddb) = s.eval(x);
            if taylor && stationary {
                // the combined slope at base is zero; drop the spline's share too
                e.v += s.curvature_increment(base, h);
                e.dv += db - s.eval(base).1;
            } else {
                e.v += s.increment(base, h);
                e.dv += db;
            }
            e.d2v += ddb;
        }
        e
    }

    /// All stationary points of V in `[lo, hi]`, ascending.
    pub fn stationary_points(&self, lo: f64, hi: f64) -> Result<Vec<StationaryPoint>> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Domain(format!("invalid window [{lo}, {hi}]")));
        }
        if let Some(r) = self.tilt_ratio() {
            if r >= 1.0 {
                return Err(Error::NoWell { ratio: r });
            }
        }
        let scale = self.length_scale();
        let m = (((hi - lo) / scale * 400.0).ceil() as usize).clamp(2000, 2_000_000);
        let dx = (hi - lo) / m as f64;
        let mut roots: Vec<f64> = Vec::new();
        let mut xa = lo;
        let mut fa = self.evaluate(xa).dv;
        if fa == 0.0 {
            roots.push(xa);
        }
        for i in 1..=m {
            let xb = if i == m { hi } else { lo + dx * i as f64 };
            let fb = self.evaluate(xb).dv;
            if fb == 0.0 {
                roots.push(xb);
            } else if fa != 0.0 && fa.signum() != fb.signum() {
                let r = newton_bisect(
                    |x| {
                        let e = self.evaluate(x);
                        (e.dv, e.d2v)
                    },
                    xa,
                    xb,
                    1e-14 * scale.max(xa.abs()),
                )?;
                roots.push(r);
            }
            xa = xb;
            fa = fb;
        }
        roots.dedup_by(|a, b| (*a - *b).abs() < 1e-10 * scale);
        let mut out = Vec::new();
        for x in roots {
            let d2 = self.evaluate(x).d2v;
            if d2 > 0.0 {
                out.push(StationaryPoint { x, kind: StationaryKind::Min, omega: Some(d2.sqrt()) });
            } else if d2 < 0.0 {
                out.push(StationaryPoint { x, kind: StationaryKind::Max, omega: None });
            }
        }
        Ok(out)
    }

    /// Local minima in a window.
    pub fn minima(&self, lo: f64, hi: f64) -> Result<Vec<StationaryPoint>> {
        Ok(self.stationary_points(lo, hi)?.into_iter().filter(|p| p.kind == StationaryKind::Min).collect())
    }

    /// Search window length used by [`Self::exit_point`].
    fn exit_window(&self) -> f64 {
        match self.period() {
            Some(p) => 1.5 * p,
            None => match self.family {
                Family::Flux { .. } => 4.0 * PI,
                _ => 8.0 * self.length_scale(),
            },
        }
    }

    /// Far-side zero σ of the potential shifted so that V(well) = 0. Positive
    /// direction is tried first, then negative.
    pub fn exit_point(&self, well: f64) -> Result<ExitPoint> {
        let e = self.evaluate(well);
        if e.d2v <= 0.0 {
            return Err(Error::Domain(format!("x = {well} is not a local minimum")));
        }
        for dir in [1.0, -1.0] {
            if let Some(p) = self.exit_in_direction(well, dir)? {
                return Ok(p);
            }
        }
        Err(Error::NoExit { well })
    }

    fn exit_in_direction(&self, well: f64, dir: f64) -> Result<Option<ExitPoint>> {
        let c0 = self.evaluate(well).v;
        let len = self.exit_window();
        let scale = self.length_scale();
        let m = ((len / scale) * 2000.0).ceil() as usize;
        let dx = len / m as f64;
        let vs = |h: f64| self.excess(well, h).v;
        let tol = 1e-12 * (1.0 + c0.abs());
        let mut barrier: Option<f64> = None;
        let mut prev_h = 0.0;
        let mut prev_d = 0.0f64;
        for i in 1..=m {
            let h = dir * dx * i as f64;
            let e = self.excess(well, h);
            let slope = e.dv * dir;
            if barrier.is_none() {
                if i > 1 && prev_d > 0.0 && slope <= 0.0 {
                    let lo = well + prev_h;
                    let hi = well + h;
                    let xb = newton_bisect(|x| {
                        let q = self.evaluate(x);
                        (q.dv, q.d2v)
                    }, lo.min(hi), lo.max(hi), 1e-14 * scale)
                    .unwrap_or(0.5 * (lo + hi));
                    barrier = Some(xb);
                }
            } else if e.v <= 0.0 {
                let (a, b) = (well + prev_h, well + h);
                let sigma = newton_bisect(
                    |x| {
                        let q = self.excess(well, x - well);
                        (q.v, q.dv)
                    },
                    a.min(b),
                    a.max(b),
                    1e-15 * scale.max(well.abs()),
                )?;
                let at = self.evaluate(sigma);
                if at.dv.abs() <= 1e-7 * at.d2v.abs() * scale {
                    let xm = newton_bisect(|x| {
                        let q = self.evaluate(x);
                        (q.dv, q.d2v)
                    }, sigma - dx, sigma + dx, 1e-15 * scale)
                    .unwrap_or(sigma);
                    return Ok(Some(ExitPoint { well, sigma: xm, barrier: barrier.unwrap_or(xm), c0, degenerate: true }));
                }
                return Ok(Some(ExitPoint { well, sigma, barrier: barrier.unwrap_or(sigma), c0, degenerate: false }));
            } else if prev_d < 0.0 && slope >= 0.0 {
                // passed a minimum: degenerate if it touches zero
                let (a, b) = (well + prev_h, well + h);
                let xm = newton_bisect(|x| {
                    let q = self.evaluate(x);
                    (q.dv, q.d2v)
                }, a.min(b), a.max(b), 1e-15 * scale)
                .unwrap_or(0.5 * (a + b));
                if vs(xm - well).abs() <= tol {
                    return Ok(Some(ExitPoint { well, sigma: xm, barrier: barrier.unwrap_or(xm), c0, degenerate: true }));
                }
                return Ok(None);
            }
            prev_h = h;
            prev_d = slope;
        }
        Ok(None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quartic_values() {
        let m = PotentialModel::quartic_double_well();
        let e = m.evaluate(0.5);
        assert_eq!((e.v, e.dv, e.d2v), (0.0, 0.0, 1.0));
        assert_eq!(m.evaluate(0.0).v, 1.0 / 32.0);
    }

    #[test]
    fn excess_is_accurate_on_tails() {
        let m = PotentialModel::periodic_cosine(3.0, 1.0).unwrap();
        let h: f64 = 1e-9;
        let exact = 6.0 * (0.5 * h).sin().powi(2);
        assert!((m.excess(0.0, h).v / exact - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unknown_parameter_rejected() {
        let mut p = BTreeMap::new();
        p.insert("bogus".to_string(), 1.0);
        assert!(matches!(PotentialModel::from_params("harmonic", &p), Err(Error::Config(_))));
    }
}
