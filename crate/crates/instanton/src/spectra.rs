//! Dilute-gas assembly: parity doublets, Bloch bands, metastable decay and the
//! validity diagnostics.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::determinants::{default_horizons, k_coefficient, zero_mode_removed_ratio, FluctuationResult};
use crate::error::{Error, Result};
use crate::potential::{Family, PotentialModel};
use crate::trajectory::{solve_path, GridSpec, InstantonPath, PathKind};

pub mod units {
    /// Boltzmann constant in J/K.
    pub const K_B: f64 = 1.380_649e-23;
    /// Planck constant in J·s.
    pub const H: f64 = 6.626_070_15e-34;

    /// Energy unit for diagnostics inputs.
    #[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
    #[serde(rename_all = "snake_case")]
    pub enum EnergyUnit {
        /// Energy expressed as an equivalent temperature E/k_B.
        Kelvin,
        Joule,
        Gigahertz,
    }

    impl EnergyUnit {
        pub fn to_kelvin(self, e: f64) -> f64 {
            match self {
                EnergyUnit::Kelvin => e,
                EnergyUnit::Joule => e / K_B,
                EnergyUnit::Gigahertz => e * 1e9 * H / K_B,
            }
        }
    }
}

/// Instanton ingredients consumed by every assembly routine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InstantonData {
    #[serde(rename = "S0")]
    pub s0: f64,
    #[serde(rename = "A")]
    pub a: f64,
    pub omega: f64,
    pub negative_mode: bool,
    /// Shot determinant ratio; when absent K follows from A.
    pub ratio_prime: Option<f64>,
}

impl InstantonData {
    pub fn kink(s0: f64, a: f64, omega: f64) -> Self {
        InstantonData { s0, a, omega, negative_mode: false, ratio_prime: None }
    }

    pub fn bounce(s0: f64, a: f64, omega: f64) -> Self {
        InstantonData { s0, a, omega, negative_mode: true, ratio_prime: None }
    }

    pub fn from_parts(path: &InstantonPath, fl: &FluctuationResult) -> Self {
        InstantonData {
            s0: path.s0,
            a: path.a,
            omega: path.omega,
            negative_mode: fl.negative_mode,
            ratio_prime: Some(fl.ratio_prime),
        }
    }

    /// |K| at the given ħ.
    pub fn k(&self, hbar: f64) -> Result<f64> {
        match self.ratio_prime {
            Some(r) => k_coefficient(self.s0, r, hbar),
            None => {
                if !(self.s0 > 0.0 && hbar > 0.0 && self.a > 0.0 && self.omega > 0.0) {
                    return Err(Error::Domain(format!("invalid instanton data {self:?} at ħ = {hbar}")));
                }
                Ok(self.a * (self.omega * self.s0 / (PI * hbar)).sqrt())
            }
        }
    }

    /// One-instanton weight K·e^{−S₀/ħ}.
    pub fn weight(&self, hbar: f64) -> Result<f64> {
        Ok(self.k(hbar)? * (-self.s0 / hbar).exp())
    }
}

/// Solved path plus determinant.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub path: InstantonPath,
    pub fluctuation: FluctuationResult,
}

impl Pipeline {
    pub fn data(&self) -> InstantonData {
        InstantonData::from_parts(&self.path, &self.fluctuation)
    }
}

/// Kink between two degenerate minima, with its determinant.
pub fn kink_pipeline(model: &PotentialModel, x_start: f64, x_end: f64) -> Result<Pipeline> {
    let path = solve_path(model, x_start, x_end, &GridSpec::default())?;
    if path.kind != PathKind::Kink {
        return Err(Error::Semantics("endpoints describe a bounce, not a kink".into()));
    }
    let fluctuation = zero_mode_removed_ratio(&path, &default_horizons(path.omega_well()))?;
    Ok(Pipeline { path, fluctuation })
}

/// Bounce out of the metastable minimum at `well`, with its determinant.
pub fn bounce_pipeline(model: &PotentialModel, well: f64) -> Result<Pipeline> {
    let exit = model.exit_point(well)?;
    if exit.degenerate {
        return Err(Error::Semantics("the well is degenerate with its neighbour; use a kink".into()));
    }
    let path = solve_path(model, exit.well, exit.sigma, &GridSpec::default())?;
    let fluctuation = zero_mode_removed_ratio(&path, &default_horizons(path.omega_well()))?;
    Ok(Pipeline { path, fluctuation })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub diluteness: f64,
    pub thermal_ratio: f64,
    /// Expected instanton count K·T·e^{−S₀/ħ} over the horizon.
    pub expected_count: f64,
    pub dilute_flag: bool,
    pub thermal_flag: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemiclassicalSpectrum {
    #[serde(rename = "E_plus")]
    pub e_plus: Option<f64>,
    #[serde(rename = "E_minus")]
    pub e_minus: Option<f64>,
    #[serde(rename = "delta_E")]
    pub delta_e: Option<f64>,
    pub band: Vec<(f64, f64)>,
    pub bandwidth: Option<f64>,
    #[serde(rename = "Gamma")]
    pub gamma: Option<f64>,
    pub im_e0: Option<f64>,
    pub lifetime: Option<f64>,
    #[serde(rename = "K")]
    pub k: f64,
    pub hbar: f64,
    pub diagnostics: Option<Diagnostics>,
}

impl SemiclassicalSpectrum {
    fn empty(k: f64, hbar: f64) -> Self {
        SemiclassicalSpectrum {
            e_plus: None,
            e_minus: None,
            delta_e: None,
            band: Vec::new(),
            bandwidth: None,
            gamma: None,
            im_e0: None,
            lifetime: None,
            k,
            hbar,
            diagnostics: None,
        }
    }
}

fn check_hbar(hbar: f64) -> Result<()> {
    if hbar > 0.0 && hbar.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("ħ = {hbar} must be positive")))
    }
}

fn require_kink(d: &InstantonData) -> Result<()> {
    if d.negative_mode {
        Err(Error::Semantics("bounce input has a negative mode; it describes decay, not tunnel splitting".into()))
    } else {
        Ok(())
    }
}

/// E± = ½ħω ∓ ħKe^{−S₀/ħ}, ΔE = 2ħKe^{−S₀/ħ}.
pub fn double_well_splitting(d: &InstantonData, hbar: f64) -> Result<SemiclassicalSpectrum> {
    check_hbar(hbar)?;
    require_kink(d)?;
    let k = d.k(hbar)?;
    let shift = hbar * k * (-d.s0 / hbar).exp();
    let mut s = SemiclassicalSpectrum::empty(k, hbar);
    s.e_plus = Some(0.5 * hbar * d.omega - shift);
    s.e_minus = Some(0.5 * hbar * d.omega + shift);
    s.delta_e = Some(2.0 * shift);
    Ok(s)
}

/// E(θ) = ½ħω + 2ħK cos θ e^{−S₀/ħ}; bandwidth 4ħKe^{−S₀/ħ}.
pub fn bloch_band(d: &InstantonData, hbar: f64, theta_grid: &[f64]) -> Result<SemiclassicalSpectrum> {
    check_hbar(hbar)?;
    require_kink(d)?;
    let k = d.k(hbar)?;
    let w = hbar * k * (-d.s0 / hbar).exp();
    let mut s = SemiclassicalSpectrum::empty(k, hbar);
    s.band = theta_grid
        .iter()
        .map(|&th| {
            let t = th.abs() % (2.0 * PI);
            let folded = if t > PI { 2.0 * PI - t } else { t };
            let c = if folded == 0.5 * PI { 0.0 } else { folded.cos() };
            (th, 0.5 * hbar * d.omega + 2.0 * c * w)
        })
        .collect();
    s.bandwidth = Some(4.0 * w);
    Ok(s)
}

/// Number of equivalent escape directions: two for the even polynomial well.
pub fn bounce_multiplicity(model: &PotentialModel) -> u32 {
    match model.family {
        Family::PolyBounce { .. } => 2,
        _ => 1,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decay {
    #[serde(rename = "Gamma")]
    pub gamma: f64,
    pub im_e0: f64,
    pub lifetime: f64,
    /// (t, |U(t)|²) with |U(t)| = e^{−Im E₀ t/ħ}.
    pub survival: Vec<(f64, f64)>,
}

pub const SURVIVAL_POINTS: usize = 512;
pub const SURVIVAL_LIFETIMES: f64 = 5.0;

/// Im E₀ = n·½ħ|K|e^{−S₀/ħ}, Γ = 2 Im E₀, lifetime ħ/Im E₀.
pub fn decay_rate(d: &InstantonData, hbar: f64, multiplicity: u32) -> Result<Decay> {
    check_hbar(hbar)?;
    if !d.negative_mode {
        return Err(Error::Semantics("kink input has no negative mode; it describes splitting, not decay".into()));
    }
    let im_e0 = multiplicity as f64 * 0.5 * hbar * d.k(hbar)? * (-d.s0 / hbar).exp();
    let lifetime = hbar / im_e0;
    let t_end = SURVIVAL_LIFETIMES * lifetime;
    let survival = (0..SURVIVAL_POINTS)
        .map(|i| {
            let t = t_end * i as f64 / (SURVIVAL_POINTS - 1) as f64;
            (t, (-2.0 * im_e0 * t / hbar).exp())
        })
        .collect();
    Ok(Decay { gamma: 2.0 * im_e0, im_e0, lifetime, survival })
}

/// A(N) = 4^{1/(N−1)} Γ²(N/(N−1)) / Γ(2N/(N−1)).
pub fn a_of_n(n: u32) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain(format!("N = {n} must be at least 2")));
    }
    let a = 1.0 / (n as f64 - 1.0);
    let lg = statrs::function::gamma::ln_gamma;
    Ok((a * 4f64.ln() + 2.0 * lg(1.0 + a) - lg(2.0 + 2.0 * a)).exp())
}

/// Im E(g) = C(−g)^{−β} e^{−A(N)/(−g)^{1/(N−1)}} for V = ½q² + ½g q^{2N}, ħ = 1.
pub fn poly_bounce_im_energy(n: u32, g: f64) -> Result<f64> {
    if !(g < 0.0) {
        return Err(Error::Domain(format!("g = {g} must be negative")));
    }
    let p = 1.0 / (n as f64 - 1.0);
    let beta = 0.5 * p;
    let c = 2f64.powf(p) / PI.sqrt();
    Ok(c * (-g).powf(-beta) * (-a_of_n(n)? / (-g).powf(p)).exp())
}

/// Im E₀ = (4/√(2π)) e^{4/(3g)} / √(−g) for V = ½q² + ¼g q⁴, ħ = 1.
pub fn quartic_im_energy(g: f64) -> Result<f64> {
    if !(g < 0.0) {
        return Err(Error::Domain(format!("g = {g} must be negative")));
    }
    Ok(4.0 / (2.0 * PI).sqrt() * (4.0 / (3.0 * g)).exp() / (-g).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WashboardResult {
    pub well: f64,
    pub sigma: f64,
    pub barrier: f64,
    pub c0: f64,
    #[serde(rename = "S0")]
    pub s0: f64,
    #[serde(rename = "A")]
    pub a: f64,
    pub omega: f64,
    pub ratio_prime: f64,
    pub spectrum: SemiclassicalSpectrum,
    pub survival: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WashboardReport {
    pub without_correction: WashboardResult,
    pub with_correction: Option<WashboardResult>,
}

/// Metastable minimum nearest the origin within one period.
pub fn select_well(model: &PotentialModel) -> Result<f64> {
    let p = model.period().unwrap_or(2.0 * PI);
    let mins = model.minima(-0.5 * p, 0.5 * p)?;
    mins.iter()
        .min_by(|a, b| a.x.abs().partial_cmp(&b.x.abs()).unwrap())
        .map(|m| m.x)
        .ok_or(Error::NoWell { ratio: model.tilt_ratio().unwrap_or(f64::NAN) })
}

fn washboard_single(model: &PotentialModel, hbar: f64) -> Result<WashboardResult> {
    let well = select_well(model)?;
    let exit = model.exit_point(well)?;
    let pipe = bounce_pipeline(model, well)?;
    let d = pipe.data();
    let decay = decay_rate(&d, hbar, bounce_multiplicity(model))?;
    let mut spectrum = SemiclassicalSpectrum::empty(d.k(hbar)?, hbar);
    spectrum.gamma = Some(decay.gamma);
    spectrum.im_e0 = Some(decay.im_e0);
    spectrum.lifetime = Some(decay.lifetime);
    spectrum.diagnostics = Some(diagnostics(spectrum.k, d.s0, hbar, pipe.fluctuation.horizon, None, None)?);
    Ok(WashboardResult {
        well: exit.well,
        sigma: exit.sigma,
        barrier: exit.barrier,
        c0: exit.c0,
        s0: d.s0,
        a: d.a,
        omega: d.omega,
        ratio_prime: pipe.fluctuation.ratio_prime,
        spectrum,
        survival: decay.survival,
    })
}

/// Exit point, bounce, S₀, A and Γ for the well nearest the origin, with and
/// without the attached ε(δ) correction. ħ defaults to √(2E_C).
pub fn washboard_analysis(model: &PotentialModel, hbar: Option<f64>) -> Result<WashboardReport> {
    if !matches!(model.family, Family::Washboard { .. }) {
        return Err(Error::Config("washboard_analysis needs a washboard model".into()));
    }
    let hbar = match hbar.or(model.effective_hbar()) {
        Some(h) => h,
        None => return Err(Error::Config("no ħ available".into())),
    };
    check_hbar(hbar)?;
    let bare = PotentialModel { family: model.family.clone(), correction: None };
    let without_correction = washboard_single(&bare, hbar)?;
    let with_correction = match model.correction {
        Some(_) => Some(washboard_single(model, hbar)?),
        None => None,
    };
    Ok(WashboardReport { without_correction, with_correction })
}

/// E = ½ħ + ħ e^{−S₀/ħ} A (S₀/πħ)^{1/2}, in ω = 1 units.
pub fn flux_ground_energy(s0: f64, a: f64, hbar: f64) -> Result<f64> {
    check_hbar(hbar)?;
    if !(s0 > 0.0 && a > 0.0) {
        return Err(Error::Domain(format!("S0 = {s0} and A = {a} must be positive")));
    }
    Ok(0.5 * hbar + hbar * (-s0 / hbar).exp() * a * (s0 / (PI * hbar)).sqrt())
}

/// General-ω form ½ħω + ħKe^{−S₀/ħ}; reduces to [`flux_ground_energy`] at ω = 1.
pub fn flux_ground_energy_omega(d: &InstantonData, hbar: f64) -> Result<f64> {
    check_hbar(hbar)?;
    Ok(0.5 * hbar * d.omega + hbar * d.weight(hbar)?)
}

pub const DILUTENESS_LIMIT: f64 = 0.1;
pub const THERMAL_LIMIT: f64 = 10.0;

/// Diluteness K·e^{−S₀/ħ} and thermal ratio ΔE/k_BT; ΔE in kelvin-equivalent.
pub fn diagnostics(
    k: f64,
    s0: f64,
    hbar: f64,
    horizon: f64,
    delta_e_kelvin: Option<f64>,
    temperature_k: Option<f64>,
) -> Result<Diagnostics> {
    check_hbar(hbar)?;
    let diluteness = k * (-s0 / hbar).exp();
    let thermal_ratio = match (delta_e_kelvin, temperature_k) {
        (Some(e), Some(t)) if t > 0.0 => e / t,
        (Some(_), Some(t)) if t == 0.0 => f64::INFINITY,
        (Some(_), Some(t)) => return Err(Error::Domain(format!("temperature {t} K must be non-negative"))),
        _ => f64::INFINITY,
    };
    Ok(Diagnostics {
        diluteness,
        thermal_ratio,
        expected_count: diluteness * horizon,
        dilute_flag: diluteness > DILUTENESS_LIMIT,
        thermal_flag: thermal_ratio < THERMAL_LIMIT,
    })
}

/// Warning text when a requested accuracy exceeds the first exponential order.
pub fn precision_warning(order: u32) -> Option<String> {
    (order > 1).then(|| {
        format!(
            "order {order} requested: corrections beyond O(ħ) are not meaningful at first exponential order; \
             results carry only the leading dilute-gas term"
        )
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quartic_closed_form_splitting() {
        let d = InstantonData::kink(1.0 / 6.0, 6f64.sqrt(), 1.0);
        let s = double_well_splitting(&d, 0.1).unwrap();
        let exact = 2.0 * (0.1 / PI).sqrt() * (-1.0 / 0.6f64).exp();
        assert!((s.delta_e.unwrap() / exact - 1.0).abs() < 1e-14);
        assert!((s.delta_e.unwrap() - 6.740e-2).abs() < 1e-4);
    }

    #[test]
    fn semantics_guard() {
        let d = InstantonData::bounce(1.0, 1.0, 1.0);
        assert!(matches!(double_well_splitting(&d, 1.0), Err(Error::Semantics(_))));
        let k = InstantonData::kink(1.0, 1.0, 1.0);
        assert!(matches!(decay_rate(&k, 1.0, 1), Err(Error::Semantics(_))));
    }

    #[test]
    fn a_of_two() {
        assert!((a_of_n(2).unwrap() - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn thermal_operating_point() {
        let d = diagnostics(1.0, 40.0, 1.0, 1.0, Some(0.5), Some(0.02)).unwrap();
        assert_eq!(d.thermal_ratio, 25.0);
        assert!(!d.thermal_flag && !d.dilute_flag);
    }
}
